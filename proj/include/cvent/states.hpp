#pragma once

// State construction and validation: density operators and amplitude
// vectors on composite Fock-like bases, the example families used by the
// escalation driver, and random separable ensembles.

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cvent/errors.hpp"
#include "cvent/linalg.hpp"
#include "cvent/rng.hpp"

namespace cvent {

inline constexpr double kTraceSlack = 1e-10;

/// Hermitian positive semidefinite operator with trace in (0, 1]. A trace
/// below one is allowed only for states flagged as truncations.
class DensityState {
public:
    DensityState() = default;

    /// For operators that are PSD by construction (projectors, compressions
    /// of valid states). No spectral check is performed.
    static DensityState trusted(CompositeIndexMap map, ComplexMatrix matrix, bool truncation) {
        detail::check_square(matrix, map, "DensityState");
        DensityState s;
        s.trace_ = trace_real(matrix);
        s.map_ = std::move(map);
        s.matrix_ = std::move(matrix);
        s.truncation_ = truncation || s.trace_ < 1.0 - kTraceSlack;
        return s;
    }

    const CompositeIndexMap& map() const noexcept { return map_; }
    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    double trace() const noexcept { return trace_; }
    bool truncation() const noexcept { return truncation_; }
    std::size_t num_modes() const noexcept { return map_.num_modes(); }

private:
    CompositeIndexMap map_;
    ComplexMatrix matrix_;
    double trace_ = 0.0;
    bool truncation_ = false;
};

/// Amplitude vector over a composite basis; norm may be below one for
/// truncated vectors.
struct PureStateVec {
    CompositeIndexMap map;
    ComplexVector amplitudes;

    PureStateVec() = default;
    PureStateVec(CompositeIndexMap m, ComplexVector a) : map(std::move(m)), amplitudes(std::move(a)) {
        if (std::size_t(amplitudes.size()) != map.size())
            throw ContractViolation("amplitude vector has length " + std::to_string(amplitudes.size()) +
                                    ", composite dimension is " + std::to_string(map.size()));
        if (!amplitudes.allFinite()) throw ContractViolation("amplitude vector has non-finite entries");
        if (norm() > 1.0 + 1e-12)
            throw ContractViolation("amplitude vector norm " + std::to_string(norm()) + " exceeds 1");
    }

    double norm() const { return amplitudes.norm(); }
};

/// |psi><psi|, flagged as a truncation when the norm is below one.
inline DensityState projector(const PureStateVec& psi) {
    ComplexMatrix m = psi.amplitudes * psi.amplitudes.adjoint();
    return DensityState::trusted(psi.map, std::move(m), false);
}

/// sum_k w_k |v_k><v_k| with v_k the Kronecker product of the local vectors of
/// term k. Local vectors need not be normalized.
inline ComplexMatrix assemble_product_mixture(const CompositeIndexMap& map, const std::vector<double>& weights,
                                              const std::vector<std::vector<ComplexVector>>& terms) {
    if (weights.size() != terms.size()) throw ContractViolation("weights and terms differ in length");
    ComplexMatrix out = ComplexMatrix::Zero(map.size(), map.size());
    for (std::size_t k = 0; k < terms.size(); ++k) {
        if (terms[k].size() != map.num_modes()) throw ContractViolation("term needs one local vector per mode");
        ComplexVector v = ComplexVector::Ones(1);
        for (std::size_t s = 0; s < terms[k].size(); ++s) {
            if (std::size_t(terms[k][s].size()) != map.dim(s))
                throw ContractViolation("local vector length does not match mode dimension");
            v = kron(v, terms[k][s]);
        }
        out.noalias() += weights[k] * (v * v.adjoint());
    }
    return out;
}

/// sum_k p_k (x)_s |a_{s,k}><a_{s,k}| with pure local factors.
struct SeparableEnsemble {
    CompositeIndexMap map;
    std::vector<double> weights;
    std::vector<std::vector<ComplexVector>> terms;

    DensityState assemble() const {
        return DensityState::trusted(map, assemble_product_mixture(map, weights, terms), false);
    }
};

/// Checks Hermiticity, positivity and trace, then returns the symmetrized
/// state. Eigenvalues in [-tol, 0) are clamped to zero; if the clamp moves
/// the trace by more than 1e-12 the result is rescaled to the input trace.
inline DensityState validate_density(const ComplexMatrix& matrix, const CompositeIndexMap& map,
                                     double tol = kHermitianTol) {
    using Kind = ValidationError::Kind;
    if (matrix.rows() != matrix.cols() || std::size_t(matrix.rows()) != map.size()) {
        std::ostringstream os;
        os << "density matrix is " << matrix.rows() << "x" << matrix.cols() << ", dims " << map.to_string()
           << " need " << map.size();
        throw ValidationError(Kind::shape, double(map.size()), os.str());
    }
    if (!matrix.allFinite()) throw ValidationError(Kind::non_finite, 0.0, "density matrix has non-finite entries");

    auto herm = hermiticity_defect(matrix);
    if (herm.value > tol) {
        std::ostringstream os;
        os << "density matrix not Hermitian: mismatch " << herm.value << " at (" << herm.row << "," << herm.col << ")";
        throw ValidationError(Kind::hermiticity, herm.value, os.str());
    }
    ComplexMatrix h = hermitian_part(matrix);

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    if (es.info() != Eigen::Success) throw Error("validate_density: eigensolver did not converge");
    const RealVector& ev = es.eigenvalues();
    double min_ev = ev.size() ? ev(0) : 0.0;
    if (min_ev < -tol) {
        std::ostringstream os;
        os << "density matrix not positive semidefinite: minimum eigenvalue " << min_ev;
        throw ValidationError(Kind::positivity, min_ev, os.str());
    }

    double tr = trace_real(h);
    if (!(tr > 0.0) || tr > 1.0 + tol) {
        std::ostringstream os;
        os << "density matrix trace " << tr << " outside (0, 1]";
        throw ValidationError(Kind::trace, tr, os.str());
    }

    double clamped = 0.0;
    for (Eigen::Index i = 0; i < ev.size() && ev(i) < 0.0; ++i) clamped -= ev(i);
    // Sub-1e-14 negatives are eigensolver noise on rank-deficient inputs;
    // rebuilding the matrix for them would only add rounding noise.
    if (clamped > 1e-14) {
        for (Eigen::Index i = 0; i < ev.size() && ev(i) < 0.0; ++i) {
            const auto v = es.eigenvectors().col(i);
            h.noalias() += (-ev(i)) * (v * v.adjoint());
        }
        if (clamped > 1e-12) h *= tr / trace_real(h);
    }
    return DensityState::trusted(map, std::move(h), false);
}

// ---------------------------------------------------------------------------
// Generators

/// (|0,0> + |k,k>) / sqrt(2) in a (local_dim, local_dim) basis.
inline PureStateVec gen_chik(std::size_t k, std::size_t local_dim) {
    if (k < 1) throw ContractViolation("gen_chik: k must be >= 1");
    if (local_dim <= k)
        throw ContractViolation("gen_chik: local_dim " + std::to_string(local_dim) + " cannot represent |" +
                                std::to_string(k) + "," + std::to_string(k) + ">");
    CompositeIndexMap map({local_dim, local_dim});
    ComplexVector a = ComplexVector::Zero(map.size());
    a(map.index({0, 0})) = 1.0 / std::sqrt(2.0);
    a(map.index({k, k})) = 1.0 / std::sqrt(2.0);
    return {map, a};
}

/// Fock amplitude sqrt(1 - lambda^2) lambda^n of |n,n> in the two-mode squeezed vacuum.
inline double tmsv_amplitude(double lambda, std::size_t n) {
    return std::sqrt(1.0 - lambda * lambda) * std::pow(lambda, double(n));
}

inline void check_tmsv_lambda(double lambda) {
    if (!(lambda >= 0.0 && lambda < 1.0))
        throw ContractViolation("tmsv: lambda " + std::to_string(lambda) + " outside [0, 1)");
}

/// Two-mode squeezed vacuum truncated to n < local_dim on both modes; trace
/// is 1 - lambda^(2 local_dim).
inline DensityState gen_tmsv(double lambda, std::size_t local_dim) {
    check_tmsv_lambda(lambda);
    if (local_dim < 1) throw ContractViolation("gen_tmsv: local_dim must be >= 1");
    CompositeIndexMap map({local_dim, local_dim});
    ComplexVector a = ComplexVector::Zero(map.size());
    for (std::size_t n = 0; n < local_dim; ++n) a(map.index({n, n})) = tmsv_amplitude(lambda, n);
    ComplexMatrix m = a * a.adjoint();
    return DensityState::trusted(map, std::move(m), true);
}

/// p |Phi_d><Phi_d| + (1 - p) I / d^2.
inline DensityState gen_isotropic(double p, std::size_t d) {
    if (!(p >= 0.0 && p <= 1.0)) throw ContractViolation("gen_isotropic: p " + std::to_string(p) + " outside [0, 1]");
    if (d < 1) throw ContractViolation("gen_isotropic: d must be >= 1");
    CompositeIndexMap map({d, d});
    ComplexVector phi = ComplexVector::Zero(map.size());
    for (std::size_t i = 0; i < d; ++i) phi(map.index({i, i})) = 1.0 / std::sqrt(double(d));
    ComplexMatrix m = p * (phi * phi.adjoint());
    m.diagonal().array() += (1.0 - p) / double(d * d);
    return DensityState::trusted(map, std::move(m), false);
}

/// |0_A> (x) (|0_B 0_C> + |1_B 1_C>) / sqrt(2): product across A | BC,
/// entangled between B and C.
inline PureStateVec gen_partial_ent(std::size_t local_dim) {
    if (local_dim < 2) throw ContractViolation("gen_partial_ent: local_dim must be >= 2");
    CompositeIndexMap map({local_dim, local_dim, local_dim});
    ComplexVector a = ComplexVector::Zero(map.size());
    a(map.index({0, 0, 0})) = 1.0 / std::sqrt(2.0);
    a(map.index({0, 1, 1})) = 1.0 / std::sqrt(2.0);
    return {map, a};
}

/// (|0...0> + |1...1>) / sqrt(2).
inline PureStateVec gen_ghz(std::size_t num_modes, std::size_t local_dim) {
    if (num_modes < 2) throw ContractViolation("gen_ghz: needs at least 2 modes");
    if (local_dim < 2) throw ContractViolation("gen_ghz: local_dim must be >= 2");
    CompositeIndexMap map(std::vector<std::size_t>(num_modes, local_dim));
    ComplexVector a = ComplexVector::Zero(map.size());
    a(map.index(std::vector<std::size_t>(num_modes, 0))) = 1.0 / std::sqrt(2.0);
    a(map.index(std::vector<std::size_t>(num_modes, 1))) = 1.0 / std::sqrt(2.0);
    return {map, a};
}

/// Random separable ensemble: exponential weights normalized to the simplex,
/// local vectors from normalized complex Gaussians. Deterministic in `seed`.
inline SeparableEnsemble gen_separable_random(std::size_t num_terms, const std::vector<std::size_t>& dims,
                                              std::uint64_t seed) {
    if (num_terms < 1) throw ContractViolation("gen_separable_random: num_terms must be >= 1");
    SeparableEnsemble e{CompositeIndexMap(dims), {}, {}};
    Rng rng(seed);
    std::exponential_distribution<double> expo(1.0);
    double total = 0.0;
    for (std::size_t k = 0; k < num_terms; ++k) {
        double w;
        do {
            w = expo(rng);
        } while (w <= 0.0);
        e.weights.push_back(w);
        total += w;
    }
    for (auto& w : e.weights) w /= total;
    for (std::size_t k = 0; k < num_terms; ++k) {
        std::vector<ComplexVector> locals;
        for (auto d : dims) locals.push_back(random_unit_vector(d, rng));
        e.terms.push_back(std::move(locals));
    }
    return e;
}

}  // namespace cvent
