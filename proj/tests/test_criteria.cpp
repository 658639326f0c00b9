#include <gtest/gtest.h>

#include <cmath>

#include "cvent/criteria.hpp"
#include "oracles.hpp"

using namespace cvent;

namespace {

const Bipartition kAB{{0}, {1}};

ComplexVector bell_vector() {
    ComplexVector v = ComplexVector::Zero(4);
    v(0) = v(3) = 1.0 / std::sqrt(2.0);
    return v;
}

DensityState bell() { return projector(PureStateVec(CompositeIndexMap({2, 2}), bell_vector())); }

DensityState product00(double weight = 1.0) {
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    m(0, 0) = weight;
    return DensityState::trusted(CompositeIndexMap({2, 2}), m, weight < 1.0);
}

DensityState random_state(std::size_t da, std::size_t db, std::size_t rank, Rng& rng) {
    const std::size_t n = da * db;
    ComplexMatrix g(n, rank);
    for (std::size_t j = 0; j < rank; ++j) g.col(j) = random_gaussian_vector(n, rng);
    ComplexMatrix r = g * g.adjoint();
    return validate_density(r / r.trace().real(), CompositeIndexMap({da, db}));
}

ComplexVector random_product(const CompositeIndexMap& map, Rng& rng) {
    ComplexVector v = ComplexVector::Ones(1);
    for (std::size_t s = 0; s < map.num_modes(); ++s) v = kron(v, random_unit_vector(map.dim(s), rng));
    return v;
}

}  // namespace

TEST(SpectralDecompose, Examples) {
    auto terms = spectral_decompose(bell());
    ASSERT_EQ(terms.size(), 1u);
    EXPECT_NEAR(terms[0].weight, 1.0, 1e-14);
    EXPECT_NEAR(std::abs(terms[0].vector.amplitudes.dot(bell_vector())), 1.0, 1e-14);

    auto mm = spectral_decompose(validate_density(ComplexMatrix::Identity(4, 4) / 4.0, CompositeIndexMap({2, 2})));
    ASSERT_EQ(mm.size(), 4u);
    for (const auto& t : mm) EXPECT_NEAR(t.weight, 0.25, 1e-15);
}

TEST(SpectralDecompose, MixtureAgainstOracle) {
    ComplexMatrix m = 0.3 * bell().matrix();
    m(0, 0) += 0.7;
    auto rho = validate_density(m, CompositeIndexMap({2, 2}));
    auto want = oracle::hermitian_eigenvalues(m);
    // Closed form of the nonzero pair: (1 +- sqrt(0.58)) / 2.
    EXPECT_NEAR(want[3], 0.8807886552931955, 1e-12);
    EXPECT_NEAR(want[2], 0.1192113447068045, 1e-12);
    auto terms = spectral_decompose(rho);
    ASSERT_EQ(terms.size(), 2u);
    EXPECT_NEAR(terms[0].weight, want[3], 1e-12);
    EXPECT_NEAR(terms[1].weight, want[2], 1e-12);
    EXPECT_NEAR(std::abs(terms[0].vector.amplitudes.dot(terms[1].vector.amplitudes)), 0.0, 1e-12);
}

TEST(SpectralDecompose, WeightsSumToTrace) {
    auto rng = oracle::logged_rng("SpectralDecompose.WeightsSumToTrace", 101);
    for (int trial = 0; trial < 20; ++trial) {
        auto rho = random_state(2 + trial % 2, 3, 1 + trial % 6, rng);
        double sum = 0.0;
        for (const auto& t : spectral_decompose(rho)) sum += t.weight;
        EXPECT_NEAR(sum, rho.trace(), 1e-10);
    }
}

TEST(Schmidt, Examples) {
    CompositeIndexMap map({2, 3});
    ComplexVector a(2), b(3);
    a << 0.6, cplx(0, 0.8);
    b << 0, 1, 0;
    auto sd = schmidt_decompose(PureStateVec(map, 0.5 * kron(a, b)), kAB);
    ASSERT_EQ(sd.coefficients.size(), 1);
    EXPECT_NEAR(sd.coefficients(0), 0.5, 1e-14);

    auto bs = schmidt_decompose(PureStateVec(CompositeIndexMap({2, 2}), bell_vector()), kAB);
    ASSERT_EQ(bs.coefficients.size(), 2);
    EXPECT_NEAR(bs.coefficients(0), 1 / std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(bs.coefficients(1), 1 / std::sqrt(2.0), 1e-14);
}

TEST(Schmidt, ReconstructionAndNorm) {
    auto rng = oracle::logged_rng("Schmidt.ReconstructionAndNorm", 102);
    for (int trial = 0; trial < 30; ++trial) {
        CompositeIndexMap map({3, 4});
        PureStateVec psi(map, random_unit_vector(12, rng));
        auto sd = schmidt_decompose(psi, kAB);
        EXPECT_NEAR(sd.coefficients.squaredNorm(), 1.0, 1e-10);
        EXPECT_LE((sd.reconstruct() - psi.amplitudes).norm(), 1e-10);
        auto want = oracle::singular_values(psi.amplitudes.reshaped<Eigen::RowMajor>(3, 4));
        for (Eigen::Index l = 0; l < sd.coefficients.size(); ++l) EXPECT_NEAR(sd.coefficients(l), want[l], 1e-8);
        for (std::size_t i = 0; i < sd.left.size(); ++i)
            for (std::size_t j = 0; j < sd.left.size(); ++j) {
                EXPECT_NEAR(std::abs(sd.left[i].dot(sd.left[j])), i == j ? 1.0 : 0.0, 1e-10);
                EXPECT_NEAR(std::abs(sd.right[i].dot(sd.right[j])), i == j ? 1.0 : 0.0, 1e-10);
            }
    }
}

TEST(Schmidt, GroupedMultimodeReconstruction) {
    auto rng = oracle::logged_rng("Schmidt.GroupedMultimodeReconstruction", 103);
    CompositeIndexMap map({2, 3, 2});
    for (const auto& bip : {Bipartition{{0, 2}, {1}}, Bipartition{{0}, {1, 2}}, Bipartition{{0, 1}, {2}}}) {
        PureStateVec psi(map, random_unit_vector(12, rng));
        auto sd = schmidt_decompose(psi, bip);
        EXPECT_LE((sd.reconstruct() - psi.amplitudes).norm(), 1e-10) << bip.label();
    }
    EXPECT_THROW(schmidt_decompose(PureStateVec(map, random_unit_vector(12, rng)), Bipartition{{0, 1, 2}, {}}),
                 ContractViolation);
}

TEST(PptCheck, Examples) {
    auto r = ppt_check(bell(), kAB);
    EXPECT_TRUE(r.entangled());
    EXPECT_NEAR(r.value, 0.5, 1e-14);
    EXPECT_NEAR(r.detail_value("min_eigenvalue"), -0.5, 1e-14);
    EXPECT_NEAR(r.detail_value("negativity"), 0.5, 1e-14);

    auto p = ppt_check(product00(0.5), kAB);
    EXPECT_FALSE(p.entangled());
    EXPECT_GE(p.detail_value("min_eigenvalue"), -1e-15);
}

TEST(PptCheck, ScalingPreservesVerdict) {
    auto rng = oracle::logged_rng("PptCheck.ScalingPreservesVerdict", 111);
    int checked = 0;
    while (checked < 20) {
        auto rho = random_state(2, 3, 1 + rng() % 3, rng);
        auto base = ppt_check(rho, kAB);
        if (std::abs(base.detail_value("min_eigenvalue")) <= 1e-3) continue;
        for (double c : {1.0, 0.5, 0.1}) {
            auto scaled = DensityState::trusted(rho.map(), c * rho.matrix(), true);
            auto r = ppt_check(scaled, kAB);
            EXPECT_EQ(r.verdict, base.verdict);
            EXPECT_NEAR(r.detail_value("min_eigenvalue"), c * base.detail_value("min_eigenvalue"), 1e-12);
        }
        ++checked;
    }
}

TEST(PptCheck, LocalUnitaryInvariance) {
    auto rng = oracle::logged_rng("PptCheck.LocalUnitaryInvariance", 112);
    for (int trial = 0; trial < 20; ++trial) {
        auto rho = random_state(3, 3, 1 + trial % 4, rng);
        ComplexMatrix u = kron(random_unitary(3, rng), random_unitary(3, rng));
        auto rotated = validate_density(u * rho.matrix() * u.adjoint(), rho.map());
        auto a = ppt_check(rho, kAB), b = ppt_check(rotated, kAB);
        EXPECT_EQ(a.verdict, b.verdict);
        EXPECT_NEAR(a.detail_value("min_eigenvalue"), b.detail_value("min_eigenvalue"), 1e-9);
    }
}

TEST(RealignmentCheck, Examples) {
    auto r = realignment_check(bell(), kAB);
    EXPECT_NEAR(r.value, 1.0, 1e-13);
    EXPECT_NEAR(r.detail_value("singular_value_sum"), 2.0, 1e-13);
    EXPECT_TRUE(r.entangled());

    auto p = realignment_check(product00(0.5), kAB);
    EXPECT_NEAR(p.value, 0.0, 1e-10);
    EXPECT_FALSE(p.entangled());

    for (std::size_t d = 1; d <= 4; ++d) {
        auto mm = validate_density(ComplexMatrix::Identity(d * d, d * d) / double(d * d), CompositeIndexMap({d, d}));
        auto want = oracle::singular_values(oracle::realign(mm.matrix(), d, d));
        double sum = 0.0;
        for (double s : want) sum += s;
        EXPECT_NEAR(sum, 1.0 / double(d), 1e-12);
        auto rr = realignment_check(mm, kAB);
        EXPECT_NEAR(rr.value, 1.0 / double(d) - 1.0, 1e-12);
        EXPECT_FALSE(rr.entangled());
    }
}

TEST(RealignmentCheck, ImpliesPptInSmallDimensions) {
    auto rng = oracle::logged_rng("RealignmentCheck.ImpliesPptInSmallDimensions", 121);
    int detected = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t db = 2 + trial % 2;
        // Full rank: a random pure state mixed with a random full-rank state.
        auto pure = random_state(2, db, 1, rng);
        auto full = random_state(2, db, 2 * db, rng);
        auto rho = validate_density(0.8 * pure.matrix() + 0.2 * full.matrix(), pure.map());
        if (realignment_check(rho, kAB).entangled()) {
            ++detected;
            EXPECT_TRUE(ppt_check(rho, kAB).entangled());
        }
    }
    EXPECT_GT(detected, 20);
}

TEST(WitnessExpectation, Examples) {
    auto w = projector_witness(PureStateVec(CompositeIndexMap({2, 2}), bell_vector()), kAB);
    EXPECT_EQ(w.kind, BoundKind::analytic_exact);
    EXPECT_NEAR(w.sep_bound, 0.5, 1e-14);

    auto r = witness_expectation(bell(), w);
    EXPECT_NEAR(r.value, 0.5, 1e-14);
    EXPECT_TRUE(r.entangled());

    auto p = witness_expectation(product00(), w);
    EXPECT_NEAR(p.value, 0.0, 1e-14);
    EXPECT_FALSE(p.entangled());

    Witness lower = w;
    lower.kind = BoundKind::seesaw_lower;
    lower.sep_bound = 0.0;
    auto q = witness_expectation(bell(), lower);
    EXPECT_GT(q.value, 0.9);
    EXPECT_FALSE(q.entangled());

    Witness wrong = w;
    wrong.map = CompositeIndexMap({4});
    EXPECT_THROW(witness_expectation(bell(), wrong), ContractViolation);
}

TEST(PureProjectorBound, Examples) {
    CompositeIndexMap map({2, 2});
    EXPECT_NEAR(pure_projector_bound(PureStateVec(map, ComplexVector::Unit(4, 1)), kAB), 1.0, 1e-14);
    EXPECT_NEAR(pure_projector_bound(PureStateVec(map, bell_vector()), kAB), 0.5, 1e-14);
    ComplexVector v = ComplexVector::Zero(4);
    v(0) = std::sqrt(0.8);
    v(3) = std::sqrt(0.2);
    EXPECT_NEAR(pure_projector_bound(PureStateVec(map, v), kAB), 0.8, 1e-14);
    EXPECT_THROW(pure_projector_bound(PureStateVec(map, 0.5 * v), kAB), ContractViolation);
}

TEST(Seesaw, Examples) {
    CompositeIndexMap map({2, 2});
    EXPECT_NEAR(seesaw_fab(ComplexMatrix::Identity(4, 4), map, kAB).value, 1.0, 1e-12);
    auto bellp = bell().matrix();
    auto r = seesaw_fab(bellp, map, kAB);
    EXPECT_NEAR(r.value, 0.5, 1e-8);
    EXPECT_NEAR((r.product.adjoint() * bellp * r.product)(0, 0).real(), r.value, 1e-12);

    ComplexMatrix nh = ComplexMatrix::Identity(4, 4);
    nh(0, 1) = 0.5;
    EXPECT_THROW(seesaw_fab(nh, map, kAB), ContractViolation);
    SeesawOptions none;
    none.restarts = 0;
    EXPECT_THROW(seesaw_fab(bellp, map, kAB, none), ContractViolation);
}

TEST(Seesaw, ProductOperatorMatchesGridOracle) {
    auto rng = oracle::logged_rng("Seesaw.ProductOperatorMatchesGridOracle", 131);
    CompositeIndexMap map({2, 2});
    for (int trial = 0; trial < 4; ++trial) {
        ComplexMatrix p = random_hermitian(2, rng), q = random_hermitian(2, rng);
        // Shift both factors to be positive definite.
        p.diagonal().array() += 3.0;
        q.diagonal().array() += 3.0;
        ComplexMatrix a = kron(p, q);
        double exact = eigvalsh(p).maxCoeff() * eigvalsh(q).maxCoeff();
        double got = seesaw_fab(a, map, kAB).value;
        EXPECT_NEAR(got, exact, 1e-9);
        double grid = oracle::product_max_2x2_grid(a, 24);
        EXPECT_LE(grid, got + 1e-12);
        EXPECT_GE(grid, got - 0.05 * std::abs(got));
    }
}

TEST(Seesaw, MonotoneAndBelowSpectralMax) {
    auto rng = oracle::logged_rng("Seesaw.MonotoneAndBelowSpectralMax", 132);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t da = 2 + trial % 2, db = 2 + (trial / 2) % 3;
        CompositeIndexMap map({da, db});
        ComplexMatrix a = random_hermitian(da * db, rng);
        SeesawOptions opt;
        opt.restarts = 4;
        opt.seed = rng();
        auto r = seesaw_fab(a, map, kAB, opt);
        for (const auto& traj : r.trajectories)
            for (std::size_t i = 1; i < traj.size(); ++i) EXPECT_GE(traj[i], traj[i - 1] - 1e-12);
        EXPECT_LE(r.value, eigvalsh(a).maxCoeff() + 1e-10);
    }
}

TEST(Seesaw, DeterministicInSeed) {
    auto rng = oracle::logged_rng("Seesaw.DeterministicInSeed", 133);
    ComplexMatrix a = random_hermitian(9, rng);
    CompositeIndexMap map({3, 3});
    auto r1 = seesaw_fab(a, map, kAB), r2 = seesaw_fab(a, map, kAB);
    EXPECT_EQ(r1.value, r2.value);
    EXPECT_EQ(r1.product, r2.product);
    EXPECT_EQ(r1.trajectories, r2.trajectories);
    auto w = seesaw_witness(a, map, kAB);
    EXPECT_EQ(w.kind, BoundKind::seesaw_lower);
    EXPECT_EQ(w.sep_bound, r1.value);
}

TEST(Seesaw, MatchesPureProjectorBound) {
    auto rng = oracle::logged_rng("Seesaw.MatchesPureProjectorBound", 134);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t d = trial % 2 ? 4 : 3;
        CompositeIndexMap map({d, d});
        PureStateVec psi(map, random_unit_vector(d * d, rng));
        double exact = pure_projector_bound(psi, kAB);
        double got = seesaw_fab(psi.amplitudes * psi.amplitudes.adjoint(), map, kAB).value;
        EXPECT_NEAR(got, exact, 1e-6);
    }
}

TEST(PtWitness, BellAndSoundness) {
    auto w = extract_pt_witness(bell(), kAB);
    EXPECT_EQ(w.kind, BoundKind::nonneg_by_construction);
    EXPECT_EQ(w.sep_bound, 0.0);
    EXPECT_LE(hermiticity_defect(w.op).value, 1e-14);
    EXPECT_NEAR(detail::expectation(bell().matrix(), w.op), 0.5, 1e-13);

    auto rng = oracle::logged_rng("PtWitness.BellAndSoundness", 141);
    for (int i = 0; i < 500; ++i) {
        ComplexVector v = random_product(w.map, rng);
        EXPECT_LE((v.adjoint() * w.op * v)(0, 0).real(), 1e-10);
    }
    EXPECT_THROW(extract_pt_witness(validate_density(ComplexMatrix::Identity(4, 4) / 4.0, CompositeIndexMap({2, 2})), kAB),
                 ContractViolation);
}

TEST(PtWitness, RandomNptStates) {
    auto rng = oracle::logged_rng("PtWitness.RandomNptStates", 142);
    for (int trial = 0; trial < 20; ++trial) {
        auto rho = random_state(3, 3, 1 + trial % 2, rng);
        auto r = ppt_check(rho, kAB);
        if (!r.entangled()) continue;
        auto w = extract_pt_witness(rho, kAB);
        EXPECT_NEAR(detail::expectation(rho.matrix(), w.op), r.value, 1e-10);
        for (int i = 0; i < 50; ++i) {
            ComplexVector v = random_product(w.map, rng);
            EXPECT_LE((v.adjoint() * w.op * v)(0, 0).real(), 1e-10);
        }
    }
}

TEST(RealignmentWitness, MatchesTraceNormAndIsSound) {
    auto rng = oracle::logged_rng("RealignmentWitness.MatchesTraceNormAndIsSound", 151);
    for (int trial = 0; trial < 10; ++trial) {
        std::size_t da = 2 + trial % 2, db = 2 + (trial / 2) % 2;
        auto rho = random_state(da, db, 1, rng);
        auto scaled = DensityState::trusted(rho.map(), 0.7 * rho.matrix(), true);
        auto w = extract_realignment_witness(scaled, kAB);
        EXPECT_EQ(w.kind, BoundKind::realignment_dual);
        double want = svd_values(oracle::realign(scaled.matrix(), da, db)).sum() - scaled.trace();
        EXPECT_NEAR(detail::expectation(scaled.matrix(), w.op), want, 1e-10);
        for (int i = 0; i < 100; ++i) {
            ComplexVector v = random_product(w.map, rng) * std::sqrt(0.3 + 0.7 * (i % 2));
            EXPECT_LE((v.adjoint() * w.op * v)(0, 0).real(), 1e-10);
        }
    }
}

TEST(WitnessCheck, TopEigenvectorProjector) {
    auto [r, w] = witness_check(bell(), kAB);
    EXPECT_TRUE(r.entangled());
    EXPECT_NEAR(r.value, 0.5, 1e-12);
    EXPECT_EQ(w.kind, BoundKind::analytic_exact);
    auto [p, pw] = witness_check(product00(), kAB);
    EXPECT_FALSE(p.entangled());
    (void)pw;
}

TEST(Lifting, ProjectorWitnessPreservesValue) {
    auto w = projector_witness(PureStateVec(CompositeIndexMap({2, 2}), bell_vector()), kAB);
    auto cert = make_certificate(bell(), w, "witness");
    EXPECT_NEAR(cert.margin, 0.5, 1e-14);
    auto lifted = lift_certificate(cert, {5, 5});
    EXPECT_TRUE(lifted.lifted);
    EXPECT_EQ(lifted.witness.map, CompositeIndexMap({5, 5}));
    EXPECT_EQ(lifted.witness.sep_bound, cert.witness.sep_bound);

    // Any state on 5x5 whose 2x2 block is the Bell projector (here a
    // normalized mixture with weight outside the block).
    auto rng = oracle::logged_rng("Lifting.ProjectorWitnessPreservesValue", 161);
    ComplexMatrix big = 0.4 * zero_pad(bell().matrix(), CompositeIndexMap({2, 2}), {5, 5});
    ComplexVector far = ComplexVector::Zero(25);
    far(24) = 1.0;
    big += 0.6 * far * far.adjoint();
    EXPECT_NEAR(detail::expectation(big, lifted.witness.op),
                detail::expectation(principal_block(big, CompositeIndexMap({5, 5}), {2, 2}), cert.witness.op), 1e-12);
    for (int i = 0; i < 200; ++i) {
        ComplexVector v = random_product(lifted.witness.map, rng);
        EXPECT_LE((v.adjoint() * lifted.witness.op * v)(0, 0).real(), lifted.witness.sep_bound + 1e-10);
    }

    auto same = lift_certificate(cert, {2, 2});
    EXPECT_EQ(same.witness.op, cert.witness.op);
}

TEST(Lifting, Preconditions) {
    auto w = projector_witness(PureStateVec(CompositeIndexMap({2, 2}), bell_vector()), kAB);
    auto cert = make_certificate(bell(), w, "witness");
    EXPECT_THROW(lift_certificate(cert, {1, 5}), ContractViolation);
    EXPECT_THROW(lift_certificate(cert, {5, 5, 5}), ContractViolation);

    Certificate shifted = cert;
    shifted.witness.op.diagonal().array() -= 0.5;
    EXPECT_THROW(lift_certificate(shifted, {3, 3}), ContractViolation);

    auto pt = make_certificate(bell(), extract_pt_witness(bell(), kAB), "ppt");
    EXPECT_NO_THROW(lift_certificate(pt, {3, 3}));
}
