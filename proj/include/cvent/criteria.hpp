#pragma once

// Entanglement criteria on finite-dimensional (possibly subnormalized)
// states, witnesses of the form tr(rho A) > f(A) with f the supremum of
// tr(sigma A) over separable sigma, and the zero-padding that carries a
// witness found on a truncated space to a larger one.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cvent/errors.hpp"
#include "cvent/linalg.hpp"
#include "cvent/rng.hpp"
#include "cvent/states.hpp"

namespace cvent {

inline constexpr double kTolDetect = 1e-9;

/// How a witness's separable bound was obtained. Only analytic_exact,
/// nonneg_by_construction and realignment_dual bounds are rigorous upper
/// bounds on f and may certify entanglement.
enum class BoundKind {
    analytic_exact,          // (largest Schmidt coefficient)^2 of a pure projector
    seesaw_lower,            // numerical lower bound on f, diagnostic only
    nonneg_by_construction,  // -(|eta><eta|)^T_B: separable expectations are <= 0
    realignment_dual,        // trace-norm dual of the realignment map, shifted so f <= 0
};

inline const char* to_string(BoundKind k) {
    switch (k) {
        case BoundKind::analytic_exact: return "analytic-exact";
        case BoundKind::seesaw_lower: return "seesaw-lower";
        case BoundKind::nonneg_by_construction: return "nonneg-by-construction";
        case BoundKind::realignment_dual: return "realignment-dual";
    }
    return "?";
}

inline bool certifies(BoundKind k) { return k != BoundKind::seesaw_lower; }

struct Witness {
    ComplexMatrix op;
    double sep_bound = 0.0;
    BoundKind kind = BoundKind::seesaw_lower;
    CompositeIndexMap map;
    Bipartition partition;
};

enum class Outcome { entangled, inconclusive };

inline const char* to_string(Outcome o) { return o == Outcome::entangled ? "entangled" : "inconclusive"; }

struct CriterionResult {
    std::string criterion;
    double value = 0.0;
    double threshold = 0.0;
    Outcome verdict = Outcome::inconclusive;
    std::vector<std::pair<std::string, double>> detail;

    bool entangled() const { return verdict == Outcome::entangled; }

    double detail_value(const std::string& key) const {
        for (const auto& [k, v] : detail)
            if (k == key) return v;
        throw ContractViolation("criterion result has no detail '" + key + "'");
    }
};

struct SchmidtDecomposition {
    RealVector coefficients;           // descending, positive
    std::vector<ComplexVector> left;   // on the grouped first side
    std::vector<ComplexVector> right;  // on the grouped second side
    CompositeIndexMap map;             // original (ungrouped) map
    Bipartition partition;

    /// sum_l c_l |a_l> (x) |b_l>, in the original mode order.
    ComplexVector reconstruct() const;
};

struct Certificate {
    Witness witness;
    double measured_value = 0.0;
    double margin = 0.0;  // measured_value - sep_bound
    std::vector<std::size_t> subspace_dims;
    bool lifted = false;
    std::string criterion;
};

struct SpectralTerm {
    double weight;
    PureStateVec vector;
};

namespace detail {

inline ModeSet inverse_order(const ModeSet& order) {
    ModeSet inv(order.size());
    for (std::size_t q = 0; q < order.size(); ++q) inv[order[q]] = q;
    return inv;
}

/// Inverse of group_bipartite: back from (first..., second...) order.
inline ComplexMatrix ungroup(const ComplexMatrix& m, const CompositeIndexMap& map, const Bipartition& bip) {
    auto order = bip.order();
    std::vector<std::size_t> pd;
    for (auto s : order) pd.push_back(map.dim(s));
    return permute_modes(m, CompositeIndexMap(pd), inverse_order(order));
}

inline ComplexVector ungroup(const ComplexVector& v, const CompositeIndexMap& map, const Bipartition& bip) {
    auto order = bip.order();
    std::vector<std::size_t> pd;
    for (auto s : order) pd.push_back(map.dim(s));
    return permute_modes(v, CompositeIndexMap(pd), inverse_order(order));
}

inline Outcome judge(double value, double threshold, double tol) {
    return value - threshold > tol ? Outcome::entangled : Outcome::inconclusive;
}

/// tr(rho A) for Hermitian rho and A.
inline double expectation(const ComplexMatrix& rho, const ComplexMatrix& a) {
    return (rho.array() * a.transpose().array()).sum().real();
}

}  // namespace detail

inline ComplexVector SchmidtDecomposition::reconstruct() const {
    auto g = grouped_map(map, partition);
    ComplexVector v = ComplexVector::Zero(g.size());
    for (Eigen::Index l = 0; l < coefficients.size(); ++l) v += coefficients(l) * kron(left[l], right[l]);
    return detail::ungroup(v, map, partition);
}

/// rho = sum_k p_k |psi_k><psi_k| with p_k > 1e-12, descending.
inline std::vector<SpectralTerm> spectral_decompose(const DensityState& rho) {
    auto eig = eigh(rho.matrix());
    std::vector<SpectralTerm> out;
    for (Eigen::Index i = eig.eigenvalues.size(); i-- > 0;) {
        if (eig.eigenvalues(i) <= 1e-12) break;
        out.push_back({eig.eigenvalues(i), PureStateVec(rho.map(), eig.eigenvectors.col(i))});
    }
    return out;
}

inline SchmidtDecomposition schmidt_decompose(const PureStateVec& psi, const Bipartition& bip) {
    auto g = grouped_map(psi.map, bip);
    ComplexVector v = group_bipartite(psi.amplitudes, psi.map, bip);
    const auto da = g.dim(0), db = g.dim(1);
    ComplexMatrix m(da, db);
    for (std::size_t i = 0; i < da; ++i)
        for (std::size_t j = 0; j < db; ++j) m(i, j) = v(i * db + j);

    Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& s = svd.singularValues();
    const double cutoff = 1e-13 * std::max(s.size() ? s(0) : 0.0, 1e-300);

    SchmidtDecomposition out;
    out.map = psi.map;
    out.partition = bip;
    std::vector<double> coeffs;
    for (Eigen::Index l = 0; l < s.size(); ++l) {
        if (s(l) <= cutoff) break;
        coeffs.push_back(s(l));
        out.left.push_back(svd.matrixU().col(l));
        out.right.push_back(svd.matrixV().col(l).conjugate());
    }
    out.coefficients = Eigen::Map<RealVector>(coeffs.data(), Eigen::Index(coeffs.size()));
    return out;
}

/// (largest Schmidt coefficient)^2 = sup over product vectors of |<a,b|psi>|^2.
inline double pure_projector_bound(const PureStateVec& psi, const Bipartition& bip) {
    if (std::abs(psi.norm() - 1.0) > 1e-10)
        throw ContractViolation("pure_projector_bound: vector norm " + std::to_string(psi.norm()) + " is not 1");
    auto sd = schmidt_decompose(psi, bip);
    return sd.coefficients.size() ? sd.coefficients(0) * sd.coefficients(0) : 0.0;
}

/// |psi><psi| with its exact separable bound.
inline Witness projector_witness(const PureStateVec& psi, const Bipartition& bip) {
    double f = pure_projector_bound(psi, bip);
    return {psi.amplitudes * psi.amplitudes.adjoint(), f, BoundKind::analytic_exact, psi.map, bip};
}

/// Minimum eigenvalue of the partial transpose over `second`. The raw
/// (possibly subnormalized) matrix is used; only the sign matters.
inline CriterionResult ppt_check(const DensityState& rho, const Bipartition& bip, double tol = kTolDetect) {
    bip.check(rho.num_modes());
    auto ev = eigvalsh(partial_transpose(rho.matrix(), rho.map(), bip.second));
    double min_ev = ev.size() ? ev(0) : 0.0;
    double negativity = 0.0;
    for (Eigen::Index i = 0; i < ev.size() && ev(i) < 0.0; ++i) negativity -= ev(i);
    const double value = 0.0 - min_ev;  // no -0 in reports
    CriterionResult r{"ppt", value, 0.0, detail::judge(value, 0.0, tol), {}};
    r.detail = {{"min_eigenvalue", min_ev}, {"negativity", negativity}};
    return r;
}

/// Realignment (CCNR) test on the trace-normalized state: value is the
/// realigned trace norm minus one.
inline CriterionResult realignment_check(const DensityState& rho, const Bipartition& bip, double tol = kTolDetect) {
    if (!(rho.trace() > 0.0)) throw ContractViolation("realignment_check: state has zero trace");
    auto g = grouped_map(rho.map(), bip);
    ComplexMatrix normalized = group_bipartite(rho.matrix(), rho.map(), bip) / rho.trace();
    double sum = svd_values(realign(normalized, g)).sum();
    CriterionResult r{"realign", sum - 1.0, 0.0, detail::judge(sum - 1.0, 0.0, tol), {}};
    r.detail = {{"singular_value_sum", sum}, {"trace", rho.trace()}};
    return r;
}

/// tr(rho A) - f. Witnesses whose bound is only a lower estimate of f never
/// certify, whatever the sign of the margin.
inline CriterionResult witness_expectation(const DensityState& rho, const Witness& w, double tol = kTolDetect) {
    if (!(rho.map() == w.map))
        throw ContractViolation("witness_expectation: state dims (" + rho.map().to_string() + ") vs witness dims (" +
                                w.map.to_string() + ")");
    double ex = detail::expectation(rho.matrix(), w.op);
    double value = ex - w.sep_bound;
    Outcome v = certifies(w.kind) ? detail::judge(value, 0.0, tol) : Outcome::inconclusive;
    CriterionResult r{"witness", value, 0.0, v, {}};
    r.detail = {{"expectation", ex}, {"sep_bound", w.sep_bound}};
    return r;
}

/// -(|eta><eta|)^T over `second`, with eta the eigenvector of the most
/// negative partial-transpose eigenvalue mu; tr(rho A) = -mu and
/// tr(sigma A) <= 0 for every separable sigma.
inline Witness extract_pt_witness(const DensityState& rho, const Bipartition& bip, double tol = kTolDetect) {
    bip.check(rho.num_modes());
    auto eig = eigh(partial_transpose(rho.matrix(), rho.map(), bip.second));
    if (eig.eigenvalues.size() == 0 || eig.eigenvalues(0) >= -tol)
        throw ContractViolation("extract_pt_witness: partial transpose has no eigenvalue below -" + std::to_string(tol));
    ComplexVector eta = eig.eigenvectors.col(0);
    ComplexMatrix op = -partial_transpose(eta * eta.adjoint(), rho.map(), bip.second);
    return {std::move(op), 0.0, BoundKind::nonneg_by_construction, rho.map(), bip};
}

/// Witness dual to the realignment trace norm. With R(rho) = U S V^dagger
/// and G = U V^dagger, W is the Hermitian operator with tr(rho W) =
/// Re tr(G^dagger R(rho)); returns W - I, whose separable expectations are
/// <= 0 even for subnormalized separable operators.
inline Witness extract_realignment_witness(const DensityState& rho, const Bipartition& bip) {
    auto g = grouped_map(rho.map(), bip);
    const auto da = g.dim(0), db = g.dim(1);
    ComplexMatrix r = realign(group_bipartite(rho.matrix(), rho.map(), bip), g);
    Eigen::JacobiSVD<ComplexMatrix> svd(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
    ComplexMatrix gm = svd.matrixU() * svd.matrixV().adjoint();

    ComplexMatrix w(g.size(), g.size());
    for (std::size_t i = 0; i < da; ++i)
        for (std::size_t j = 0; j < da; ++j)
            for (std::size_t k = 0; k < db; ++k)
                for (std::size_t l = 0; l < db; ++l) w(j * db + l, i * db + k) = std::conj(gm(i * da + j, k * db + l));
    ComplexMatrix c = hermitian_part(w);
    c.diagonal().array() -= 1.0;
    return {detail::ungroup(c, rho.map(), bip), 0.0, BoundKind::realignment_dual, rho.map(), bip};
}

/// Pure-projector witness on the dominant eigenvector of rho. Returns the
/// witness together with its evaluation on rho.
inline std::pair<CriterionResult, Witness> witness_check(const DensityState& rho, const Bipartition& bip,
                                                         double tol = kTolDetect) {
    bip.check(rho.num_modes());
    auto eig = eigh(rho.matrix());
    const auto n = eig.eigenvalues.size();
    PureStateVec top(rho.map(), eig.eigenvectors.col(n - 1));
    Witness w = projector_witness(top, bip);
    return {witness_expectation(rho, w, tol), std::move(w)};
}

inline Certificate make_certificate(const DensityState& rho, Witness w, std::string criterion) {
    double measured = detail::expectation(rho.matrix(), w.op);
    Certificate c;
    c.margin = measured - w.sep_bound;
    c.measured_value = measured;
    c.subspace_dims = w.map.dims();
    c.witness = std::move(w);
    c.criterion = std::move(criterion);
    return c;
}

/// Zero-pads the certificate's witness to `full_dims`. Sound for PSD
/// operators and for the PT / realignment constructions; the measured value
/// carries over because tr(rho_full (C + 0)) = tr(rho_red C).
inline Certificate lift_certificate(const Certificate& cert, const std::vector<std::size_t>& full_dims) {
    const auto& w = cert.witness;
    if (full_dims.size() != w.map.num_modes())
        throw ContractViolation("lift_certificate: full dims have " + std::to_string(full_dims.size()) +
                                " modes, witness has " + std::to_string(w.map.num_modes()));
    for (std::size_t s = 0; s < full_dims.size(); ++s)
        if (full_dims[s] < w.map.dim(s))
            throw ContractViolation("lift_certificate: full dim " + std::to_string(full_dims[s]) + " of mode " +
                                    std::to_string(s) + " below subspace dim " + std::to_string(w.map.dim(s)));
    if (w.kind != BoundKind::nonneg_by_construction && w.kind != BoundKind::realignment_dual) {
        auto ev = eigvalsh(w.op);
        if (ev.size() && ev(0) < -kHermitianTol)
            throw ContractViolation("lift_certificate: witness is indefinite (min eigenvalue " + std::to_string(ev(0)) +
                                    ") and not of a padding-safe construction");
    }
    Certificate out = cert;
    out.witness.op = zero_pad(w.op, w.map, full_dims);
    out.witness.map = CompositeIndexMap(full_dims);
    out.lifted = true;
    return out;
}

// ---------------------------------------------------------------------------
// Seesaw

struct SeesawOptions {
    std::size_t restarts = 16;
    std::size_t max_iters = 500;
    double tol_conv = 1e-13;
    std::uint64_t seed = kDefaultSeed;
};

struct SeesawResult {
    double value = 0.0;                      // best <a,b|A|a,b>: a lower bound on f
    ComplexVector first;                     // |a> on the grouped first side
    ComplexVector second;                    // |b> on the grouped second side
    ComplexVector product;                   // |a> (x) |b> in the original mode order
    std::vector<std::vector<double>> trajectories;  // objective after every half-step, per restart
};

namespace detail {

/// Top eigenvector; degenerate ties (1e-12) go to the lexicographically
/// largest |v_0|, |v_1|, ...; the phase makes the leading nonzero entry real positive.
inline std::pair<double, ComplexVector> top_eigenvector(const ComplexMatrix& h) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(h));
    const auto n = es.eigenvalues().size();
    const double top = es.eigenvalues()(n - 1);
    Eigen::Index best = n - 1;
    for (Eigen::Index i = n - 1; i-- > 0 && es.eigenvalues()(i) >= top - 1e-12;) {
        const auto a = es.eigenvectors().col(i);
        const auto b = es.eigenvectors().col(best);
        for (Eigen::Index k = 0; k < a.size(); ++k) {
            double x = std::abs(a(k)), y = std::abs(b(k));
            if (x > y) {
                best = i;
                break;
            }
            if (x < y) break;
        }
    }
    ComplexVector v = es.eigenvectors().col(best);
    for (Eigen::Index k = 0; k < v.size(); ++k)
        if (std::abs(v(k)) > 1e-12) {
            v *= std::conj(v(k)) / std::abs(v(k));
            break;
        }
    return {top, v};
}

}  // namespace detail

/// Alternating maximization of <a,b|A|a,b> over unit product vectors across
/// `bip`. Each half-step replaces one factor by the top eigenvector of A
/// contracted with the other, so the objective never decreases. The result
/// is a lower bound on f(A).
inline SeesawResult seesaw_fab(const ComplexMatrix& a_op, const CompositeIndexMap& map, const Bipartition& bip,
                               const SeesawOptions& opt = {}) {
    require_hermitian(a_op, "seesaw_fab");
    detail::check_square(a_op, map, "seesaw_fab");
    if (opt.restarts < 1) throw ContractViolation("seesaw_fab: restarts must be >= 1");
    auto g = grouped_map(map, bip);
    const auto da = g.dim(0), db = g.dim(1);
    const ComplexMatrix ag = group_bipartite(hermitian_part(a_op), map, bip);

    auto contract_second = [&](const ComplexVector& b) {
        ComplexMatrix m = ComplexMatrix::Zero(da, da);
        for (std::size_t i = 0; i < da; ++i)
            for (std::size_t j = 0; j < da; ++j) {
                cplx s = 0.0;
                for (std::size_t k = 0; k < db; ++k) {
                    cplx row = 0.0;
                    for (std::size_t l = 0; l < db; ++l) row += ag(i * db + k, j * db + l) * b(l);
                    s += std::conj(b(k)) * row;
                }
                m(i, j) = s;
            }
        return m;
    };
    auto contract_first = [&](const ComplexVector& a) {
        ComplexMatrix m = ComplexMatrix::Zero(db, db);
        for (std::size_t k = 0; k < db; ++k)
            for (std::size_t l = 0; l < db; ++l) {
                cplx s = 0.0;
                for (std::size_t i = 0; i < da; ++i) {
                    cplx row = 0.0;
                    for (std::size_t j = 0; j < da; ++j) row += ag(i * db + k, j * db + l) * a(j);
                    s += std::conj(a(i)) * row;
                }
                m(k, l) = s;
            }
        return m;
    };

    SeesawResult best;
    best.value = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < opt.restarts; ++r) {
        Rng rng(split_seed(opt.seed, r));
        ComplexVector b = random_unit_vector(db, rng);
        ComplexVector a;
        std::vector<double> traj;
        double prev = -std::numeric_limits<double>::infinity();
        for (std::size_t it = 0; it < opt.max_iters; ++it) {
            auto [va, na] = detail::top_eigenvector(contract_second(b));
            a = std::move(na);
            traj.push_back(va);
            auto [vb, nb] = detail::top_eigenvector(contract_first(a));
            b = std::move(nb);
            traj.push_back(vb);
            if (vb - prev < opt.tol_conv) break;
            prev = vb;
        }
        ComplexVector ab = kron(a, b);
        double value = (ab.adjoint() * ag * ab)(0, 0).real();
        if (value > best.value) {
            best.value = value;
            best.first = a;
            best.second = b;
            best.product = detail::ungroup(ab, map, bip);
        }
        best.trajectories.push_back(std::move(traj));
    }
    return best;
}

/// Witness carrying a seesaw estimate of f; never certifies.
inline Witness seesaw_witness(const ComplexMatrix& a_op, const CompositeIndexMap& map, const Bipartition& bip,
                              const SeesawOptions& opt = {}) {
    auto res = seesaw_fab(a_op, map, bip, opt);
    return {hermitian_part(a_op), res.value, BoundKind::seesaw_lower, map, bip};
}

}  // namespace cvent
