#pragma once

#include <cstdint>
#include <random>

#include "cvent/linalg.hpp"

namespace cvent {

/// The library's random engine. All randomized routines take one explicitly,
/// so results are a pure function of the seed.
using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 20240229;

/// splitmix64 step; derives independent per-stream seeds from a master seed.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline ComplexVector random_gaussian_vector(std::size_t dim, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexVector v(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        double re = g(rng);
        double im = g(rng);
        v(i) = cplx(re, im);
    }
    return v;
}

/// Unit vector drawn from the unitarily invariant distribution.
inline ComplexVector random_unit_vector(std::size_t dim, Rng& rng) {
    ComplexVector v;
    do {
        v = random_gaussian_vector(dim, rng);
    } while (v.norm() < 1e-300);
    return v / v.norm();
}

/// Haar-random unitary via QR of a Ginibre matrix with the R-diagonal phases removed.
inline ComplexMatrix random_unitary(std::size_t dim, Rng& rng) {
    ComplexMatrix g(dim, dim);
    for (std::size_t j = 0; j < dim; ++j) g.col(j) = random_gaussian_vector(dim, rng);
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ();
    ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (std::size_t j = 0; j < dim; ++j) {
        double a = std::abs(r(j, j));
        if (a > 0) q.col(j) *= r(j, j) / a;
    }
    return q;
}

inline ComplexMatrix random_hermitian(std::size_t dim, Rng& rng) {
    ComplexMatrix g(dim, dim);
    for (std::size_t j = 0; j < dim; ++j) g.col(j) = random_gaussian_vector(dim, rng);
    return hermitian_part(g);
}

}  // namespace cvent
