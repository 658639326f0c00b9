#pragma once

// Dense complex kernel: composite tensor indexing, Hermitian eigensolver,
// singular values, partial transpose/trace, realignment and Kronecker
// products. Operators on a composite space are indexed with the first mode
// as the most significant digit, which is also the ordering `kron` produces.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvent/errors.hpp"

namespace cvent {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Ordered list of mode indices.
using ModeSet = std::vector<std::size_t>;

inline constexpr double kHermitianTol = 1e-10;

namespace detail {

inline std::string join(const std::vector<std::size_t>& v, const char* sep = ",") {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? sep : "") << v[i];
    return os.str();
}

}  // namespace detail

/// Mixed-radix addressing of a tensor product basis. The composite index of
/// (n_1, ..., n_M) is sum_s n_s * stride_s with stride_M = 1.
class CompositeIndexMap {
public:
    CompositeIndexMap() = default;

    explicit CompositeIndexMap(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
        if (dims_.empty()) throw ContractViolation("index map needs at least one mode");
        strides_.assign(dims_.size(), 1);
        for (std::size_t s = dims_.size(); s-- > 0;) {
            if (dims_[s] == 0) throw ContractViolation("mode dimensions must be >= 1");
            if (s + 1 < dims_.size()) strides_[s] = strides_[s + 1] * dims_[s + 1];
        }
        size_ = strides_.front() * dims_.front();
    }

    std::size_t num_modes() const noexcept { return dims_.size(); }
    std::size_t size() const noexcept { return size_; }
    std::size_t dim(std::size_t mode) const { return dims_.at(mode); }
    std::size_t stride(std::size_t mode) const { return strides_.at(mode); }
    const std::vector<std::size_t>& dims() const noexcept { return dims_; }

    std::size_t index(const std::vector<std::size_t>& tuple) const {
        if (tuple.size() != dims_.size()) throw ContractViolation("tuple length does not match mode count");
        std::size_t idx = 0;
        for (std::size_t s = 0; s < dims_.size(); ++s) {
            if (tuple[s] >= dims_[s]) throw ContractViolation("tuple digit out of range");
            idx += tuple[s] * strides_[s];
        }
        return idx;
    }

    std::vector<std::size_t> tuple(std::size_t index) const {
        if (index >= size_) throw ContractViolation("composite index out of range");
        std::vector<std::size_t> t(dims_.size());
        for (std::size_t s = 0; s < dims_.size(); ++s) t[s] = (index / strides_[s]) % dims_[s];
        return t;
    }

    std::size_t digit(std::size_t index, std::size_t mode) const {
        return (index / strides_[mode]) % dims_[mode];
    }

    std::string to_string() const { return detail::join(dims_); }

    friend bool operator==(const CompositeIndexMap& a, const CompositeIndexMap& b) { return a.dims_ == b.dims_; }

private:
    std::vector<std::size_t> dims_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

/// Split of the modes into two nonempty groups. Operations that need a
/// genuinely bipartite operator reorder modes as (first..., second...).
struct Bipartition {
    ModeSet first;
    ModeSet second;

    std::string label() const { return detail::join(first) + "|" + detail::join(second); }

    friend bool operator==(const Bipartition&, const Bipartition&) = default;

    /// Parses "0|1,2" style labels.
    static Bipartition parse(const std::string& text) {
        auto bar = text.find('|');
        if (bar == std::string::npos) throw ContractViolation("partition '" + text + "' lacks '|'");
        auto side = [&](const std::string& part) {
            ModeSet out;
            std::stringstream ss(part);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                if (tok.empty()) continue;
                std::size_t pos = 0;
                unsigned long v = 0;
                try {
                    v = std::stoul(tok, &pos);
                } catch (const std::exception&) {
                    pos = 0;
                }
                if (pos != tok.size()) throw ContractViolation("bad mode index '" + tok + "' in partition");
                out.push_back(v);
            }
            return out;
        };
        return {side(text.substr(0, bar)), side(text.substr(bar + 1))};
    }

    /// {0} | {1, ..., M-1}
    static Bipartition first_vs_rest(std::size_t num_modes) {
        Bipartition b{{0}, {}};
        for (std::size_t s = 1; s < num_modes; ++s) b.second.push_back(s);
        return b;
    }

    void check(std::size_t num_modes) const {
        if (first.empty() || second.empty())
            throw ContractViolation("bipartition " + label() + " has an empty side");
        std::vector<int> seen(num_modes, 0);
        for (auto s : first) {
            if (s >= num_modes) throw ContractViolation("bipartition " + label() + " names a missing mode");
            ++seen[s];
        }
        for (auto s : second) {
            if (s >= num_modes) throw ContractViolation("bipartition " + label() + " names a missing mode");
            ++seen[s];
        }
        for (int c : seen)
            if (c != 1) throw ContractViolation("bipartition " + label() + " must cover every mode exactly once");
    }

    /// Mode order (first..., second...).
    ModeSet order() const {
        ModeSet o = first;
        o.insert(o.end(), second.begin(), second.end());
        return o;
    }
};

inline bool all_finite(const ComplexMatrix& m) { return m.allFinite(); }

struct HermiticityDefect {
    double value = 0.0;
    std::size_t row = 0;
    std::size_t col = 0;
};

/// Largest |H_ij - conj(H_ji)| and where it occurs.
inline HermiticityDefect hermiticity_defect(const ComplexMatrix& h) {
    HermiticityDefect d;
    for (Eigen::Index j = 0; j < h.cols(); ++j)
        for (Eigen::Index i = 0; i <= j; ++i) {
            double m = std::abs(h(i, j) - std::conj(h(j, i)));
            if (m > d.value) d = {m, std::size_t(i), std::size_t(j)};
        }
    return d;
}

inline void require_finite(const ComplexMatrix& m, const char* what) {
    if (!all_finite(m)) throw ContractViolation(std::string(what) + ": matrix has non-finite entries");
}

inline void require_hermitian(const ComplexMatrix& h, const char* what, double tol = kHermitianTol) {
    if (h.rows() != h.cols())
        throw ContractViolation(std::string(what) + ": matrix is " + std::to_string(h.rows()) + "x" +
                                std::to_string(h.cols()) + ", not square");
    require_finite(h, what);
    auto d = hermiticity_defect(h);
    if (d.value > tol) {
        std::ostringstream os;
        os << what << ": not Hermitian, |H(" << d.row << "," << d.col << ") - conj(H(" << d.col << ","
           << d.row << "))| = " << d.value;
        throw ContractViolation(os.str());
    }
}

/// (H + H^dagger) / 2; exact for inputs that are already Hermitian.
inline ComplexMatrix hermitian_part(const ComplexMatrix& h) {
    ComplexMatrix out = (h + h.adjoint()) * 0.5;
    return out;
}

struct HermitianSpectrum {
    RealVector eigenvalues;      // ascending
    ComplexMatrix eigenvectors;  // orthonormal columns

    ComplexMatrix reconstruct() const {
        return eigenvectors * eigenvalues.cast<cplx>().asDiagonal() * eigenvectors.adjoint();
    }
};

/// Eigendecomposition of a Hermitian matrix. Inputs within `tol` of Hermitian
/// are symmetrized first.
inline HermitianSpectrum eigh(const ComplexMatrix& h, double tol = kHermitianTol) {
    require_hermitian(h, "eigh", tol);
    if (h.rows() == 0) return {};
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(h));
    if (es.info() != Eigen::Success) throw Error("eigh: eigensolver did not converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

inline RealVector eigvalsh(const ComplexMatrix& h, double tol = kHermitianTol) {
    require_hermitian(h, "eigvalsh", tol);
    if (h.rows() == 0) return {};
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(h), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("eigvalsh: eigensolver did not converge");
    return es.eigenvalues();
}

/// Singular values, descending.
inline RealVector svd_values(const ComplexMatrix& m) {
    require_finite(m, "svd_values");
    if (m.size() == 0) return {};
    Eigen::BDCSVD<ComplexMatrix> svd(m);
    return svd.singularValues();
}

namespace detail {

inline void check_square(const ComplexMatrix& rho, const CompositeIndexMap& map, const char* what) {
    if (rho.rows() != rho.cols() || std::size_t(rho.rows()) != map.size())
        throw ContractViolation(std::string(what) + ": operator is " + std::to_string(rho.rows()) + "x" +
                                std::to_string(rho.cols()) + " but the index map has size " +
                                std::to_string(map.size()));
}

inline void check_modes(const ModeSet& modes, const CompositeIndexMap& map, const char* what) {
    std::vector<bool> seen(map.num_modes(), false);
    for (auto s : modes) {
        if (s >= map.num_modes())
            throw ContractViolation(std::string(what) + ": mode " + std::to_string(s) + " out of range");
        if (seen[s]) throw ContractViolation(std::string(what) + ": mode " + std::to_string(s) + " repeated");
        seen[s] = true;
    }
}

}  // namespace detail

/// Transposes the indices of the listed modes only. The subset must be
/// nonempty and proper; use a plain transpose for the full set.
inline ComplexMatrix partial_transpose(const ComplexMatrix& rho, const CompositeIndexMap& map,
                                       const ModeSet& transposed) {
    detail::check_square(rho, map, "partial_transpose");
    detail::check_modes(transposed, map, "partial_transpose");
    if (transposed.empty()) throw ContractViolation("partial_transpose: empty mode subset");
    if (transposed.size() == map.num_modes())
        throw ContractViolation("partial_transpose: subset covers all modes, use a full transpose");

    const std::size_t n = map.size();
    // Offset of each index restricted to the transposed modes.
    std::vector<std::size_t> part(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (auto s : transposed) part[i] += map.digit(i, s) * map.stride(s);

    ComplexMatrix out(rho.rows(), rho.cols());
    for (std::size_t c = 0; c < n; ++c)
        for (std::size_t r = 0; r < n; ++r) {
            std::size_t r2 = r - part[r] + part[c];
            std::size_t c2 = c - part[c] + part[r];
            out(r2, c2) = rho(r, c);
        }
    return out;
}

/// Traces out every mode not in `keep`. The kept modes stay in ascending order.
inline ComplexMatrix partial_trace(const ComplexMatrix& rho, const CompositeIndexMap& map, ModeSet keep) {
    detail::check_square(rho, map, "partial_trace");
    detail::check_modes(keep, map, "partial_trace");
    if (keep.empty()) throw ContractViolation("partial_trace: keep set is empty");
    std::sort(keep.begin(), keep.end());

    std::vector<std::size_t> kept_dims;
    for (auto s : keep) kept_dims.push_back(map.dim(s));
    CompositeIndexMap out_map(kept_dims);

    const std::size_t n = map.size();
    std::vector<std::size_t> kidx(n, 0), tidx(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t k = 0;
        for (std::size_t s = 0, q = 0; s < map.num_modes(); ++s) {
            std::size_t dgt = map.digit(i, s);
            if (q < keep.size() && keep[q] == s) {
                k += dgt * out_map.stride(q);
                ++q;
            } else {
                tidx[i] += dgt * map.stride(s);
            }
        }
        kidx[i] = k;
    }

    ComplexMatrix out = ComplexMatrix::Zero(out_map.size(), out_map.size());
    for (std::size_t c = 0; c < n; ++c)
        for (std::size_t r = 0; r < n; ++r)
            if (tidx[r] == tidx[c]) out(kidx[r], kidx[c]) += rho(r, c);
    return out;
}

/// Realignment of a bipartite operator: R(i*dA + j, k*dB + l) = rho((i,k), (j,l)).
inline ComplexMatrix realign(const ComplexMatrix& rho, const CompositeIndexMap& map) {
    if (map.num_modes() != 2)
        throw ContractViolation("realign: needs exactly 2 modes, got " + std::to_string(map.num_modes()) +
                                "; group a bipartition first");
    detail::check_square(rho, map, "realign");
    const std::size_t da = map.dim(0), db = map.dim(1);
    ComplexMatrix out(da * da, db * db);
    for (std::size_t i = 0; i < da; ++i)
        for (std::size_t j = 0; j < da; ++j)
            for (std::size_t k = 0; k < db; ++k)
                for (std::size_t l = 0; l < db; ++l) out(i * da + j, k * db + l) = rho(i * db + k, j * db + l);
    return out;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_finite(a, "kron");
    require_finite(b, "kron");
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline ComplexVector kron(const ComplexVector& a, const ComplexVector& b) {
    ComplexVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

/// Composite-index permutation: perm[new_index] = old_index when modes are
/// reordered so that new mode q is old mode order[q].
inline std::vector<std::size_t> mode_permutation(const CompositeIndexMap& map, const ModeSet& order,
                                                 CompositeIndexMap* new_map = nullptr) {
    if (order.size() != map.num_modes()) throw ContractViolation("mode order must list every mode");
    detail::check_modes(order, map, "mode_permutation");
    std::vector<std::size_t> nd;
    for (auto s : order) nd.push_back(map.dim(s));
    CompositeIndexMap nm(nd);
    std::vector<std::size_t> perm(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) {
        std::size_t j = 0;
        for (std::size_t q = 0; q < order.size(); ++q) j += nm.digit(i, q) * map.stride(order[q]);
        perm[i] = j;
    }
    if (new_map) *new_map = nm;
    return perm;
}

inline ComplexMatrix permute_modes(const ComplexMatrix& rho, const CompositeIndexMap& map, const ModeSet& order) {
    detail::check_square(rho, map, "permute_modes");
    auto perm = mode_permutation(map, order);
    ComplexMatrix out(rho.rows(), rho.cols());
    for (std::size_t c = 0; c < perm.size(); ++c)
        for (std::size_t r = 0; r < perm.size(); ++r) out(r, c) = rho(perm[r], perm[c]);
    return out;
}

inline ComplexVector permute_modes(const ComplexVector& v, const CompositeIndexMap& map, const ModeSet& order) {
    if (std::size_t(v.size()) != map.size()) throw ContractViolation("permute_modes: vector length mismatch");
    auto perm = mode_permutation(map, order);
    ComplexVector out(v.size());
    for (std::size_t i = 0; i < perm.size(); ++i) out(i) = v(perm[i]);
    return out;
}

/// Two-mode map (prod of first-side dims, prod of second-side dims).
inline CompositeIndexMap grouped_map(const CompositeIndexMap& map, const Bipartition& bip) {
    bip.check(map.num_modes());
    std::size_t a = 1, b = 1;
    for (auto s : bip.first) a *= map.dim(s);
    for (auto s : bip.second) b *= map.dim(s);
    return CompositeIndexMap({a, b});
}

/// Reorders modes as (first..., second...) so the operator acts on the
/// two-mode space `grouped_map(map, bip)`.
inline ComplexMatrix group_bipartite(const ComplexMatrix& rho, const CompositeIndexMap& map, const Bipartition& bip) {
    bip.check(map.num_modes());
    return permute_modes(rho, map, bip.order());
}

inline ComplexVector group_bipartite(const ComplexVector& v, const CompositeIndexMap& map, const Bipartition& bip) {
    bip.check(map.num_modes());
    return permute_modes(v, map, bip.order());
}

namespace detail {

/// For each index of the map with dims `sub`, its index in `map`.
inline std::vector<std::size_t> embedding(const CompositeIndexMap& map, const std::vector<std::size_t>& sub) {
    if (sub.size() != map.num_modes()) throw ContractViolation("dimension list length does not match mode count");
    for (std::size_t s = 0; s < sub.size(); ++s)
        if (sub[s] > map.dim(s))
            throw ContractViolation("dimension " + std::to_string(sub[s]) + " of mode " + std::to_string(s) +
                                    " exceeds ambient " + std::to_string(map.dim(s)));
    CompositeIndexMap sm(sub);
    std::vector<std::size_t> e(sm.size());
    for (std::size_t i = 0; i < sm.size(); ++i) {
        std::size_t j = 0;
        for (std::size_t s = 0; s < sub.size(); ++s) j += sm.digit(i, s) * map.stride(s);
        e[i] = j;
    }
    return e;
}

}  // namespace detail

/// Block of an operator on basis tuples with n_s < dims_s; this is
/// P M P for P the product of leading-basis projectors, written in the
/// smaller index map.
inline ComplexMatrix principal_block(const ComplexMatrix& m, const CompositeIndexMap& map,
                                     const std::vector<std::size_t>& dims) {
    detail::check_square(m, map, "principal_block");
    auto e = detail::embedding(map, dims);
    ComplexMatrix out(e.size(), e.size());
    for (std::size_t c = 0; c < e.size(); ++c)
        for (std::size_t r = 0; r < e.size(); ++r) out(r, c) = m(e[r], e[c]);
    return out;
}

inline ComplexVector principal_block(const ComplexVector& v, const CompositeIndexMap& map,
                                     const std::vector<std::size_t>& dims) {
    auto e = detail::embedding(map, dims);
    ComplexVector out(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) out(i) = v(e[i]);
    return out;
}

/// Inverse of `principal_block`: embeds an operator on `map` into the larger
/// space with per-mode dims `big`, zero on the complement.
inline ComplexMatrix zero_pad(const ComplexMatrix& m, const CompositeIndexMap& map, const std::vector<std::size_t>& big) {
    detail::check_square(m, map, "zero_pad");
    CompositeIndexMap bm(big);
    auto e = detail::embedding(bm, map.dims());
    ComplexMatrix out = ComplexMatrix::Zero(bm.size(), bm.size());
    for (std::size_t c = 0; c < e.size(); ++c)
        for (std::size_t r = 0; r < e.size(); ++r) out(e[r], e[c]) = m(r, c);
    return out;
}

inline ComplexVector zero_pad(const ComplexVector& v, const CompositeIndexMap& map, const std::vector<std::size_t>& big) {
    CompositeIndexMap bm(big);
    auto e = detail::embedding(bm, map.dims());
    ComplexVector out = ComplexVector::Zero(bm.size());
    for (std::size_t i = 0; i < e.size(); ++i) out(e[i]) = v(i);
    return out;
}

inline double trace_real(const ComplexMatrix& m) { return m.trace().real(); }

}  // namespace cvent
