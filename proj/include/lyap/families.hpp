#pragma once

// Seeded random matrix families used by the CLI checks and the test suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "errors.hpp"
#include "matan.hpp"
#include "matrix.hpp"
#include "rng.hpp"
#include "stability.hpp"

namespace lyap {

/// Real matrix with i.i.d. standard normal entries.
inline RealSquareMatrix gaussian_matrix(Rng& rng, std::size_t d) {
  RealSquareMatrix m(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = rng.normal();
  return m;
}

/// Hermitian matrix (G + G^dagger)/2 with complex Gaussian G, times scale.
inline HermitianMatrix gaussian_hermitian(Rng& rng, std::size_t d, double scale) {
  ComplexSquareMatrix g(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) g(i, j) = Complex(rng.normal(), rng.normal()) * scale;
  return HermitianMatrix::symmetrized(g);
}

/// Random orthogonal matrix: Gram-Schmidt on a Gaussian matrix.
inline RealSquareMatrix random_orthogonal(Rng& rng, std::size_t d) {
  RealSquareMatrix q = gaussian_matrix(rng, d);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      double dot = 0.0;
      for (std::size_t i = 0; i < d; ++i) dot += q(i, j) * q(i, k);
      for (std::size_t i = 0; i < d; ++i) q(i, j) -= dot * q(i, k);
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < d; ++i) nrm += q(i, j) * q(i, j);
    nrm = std::sqrt(nrm);
    for (std::size_t i = 0; i < d; ++i) q(i, j) /= nrm;
  }
  return q;
}

/// Random matrix with operator norm exactly `norm` (up to rounding).
inline RealSquareMatrix random_with_norm(Rng& rng, std::size_t d, double norm) {
  if (norm == 0.0) return RealSquareMatrix(d);
  RealSquareMatrix g = gaussian_matrix(rng, d);
  g *= norm / op_norm(g);
  return g;
}

/// One Golden-Thompson test family: n Hermitian d x d matrices.
inline std::vector<HermitianMatrix> random_hermitian_family(Rng& rng, std::size_t n, std::size_t d,
                                                            double scale) {
  std::vector<HermitianMatrix> hs;
  hs.reserve(n);
  for (std::size_t k = 0; k < n; ++k) hs.push_back(gaussian_hermitian(rng, d, scale));
  return hs;
}

/// Diagonal matrices diag(+-g_k, +-x_2, ...) with g_k >= gap and |x_i| in
/// [1/2, 1], each perturbed by a random matrix of norm `perturbation`.
/// Dominant directions agree, so the family is aligned for small
/// perturbations.
inline std::vector<RealSquareMatrix> aligned_diagonal_family(Rng& rng, std::size_t n,
                                                             std::size_t d, double gap,
                                                             double perturbation) {
  require(d >= 2 && n >= 1 && gap >= 1.0, ErrorKind::DomainError, "bad aligned family shape");
  std::vector<RealSquareMatrix> seq;
  seq.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> diag(d);
    diag[0] = gap * rng.uniform(1.0, 4.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
    for (std::size_t i = 1; i < d; ++i) diag[i] = rng.uniform(0.5, 1.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
    seq.push_back(RealSquareMatrix::diagonal(std::span<const double>(diag)) +
                  random_with_norm(rng, d, perturbation));
  }
  return seq;
}

/// Diagonal D_k in the class and M_k = D_k + E_k with ||E_k|| = delta.
/// |lambda_1| is uniform on [C0, C1], the other moduli uniform on
/// [eta, Gamma C0]; signs are random.
struct DiagonalPair {
  std::vector<RealSquareMatrix> d;
  std::vector<RealSquareMatrix> m;
};

inline DiagonalPair random_diagonal_family(Rng& rng, const DiagonalClass& cls, std::size_t dim,
                                           std::size_t n, double delta) {
  validate(cls);
  require(dim >= 2, ErrorKind::DomainError, "need dimension >= 2");
  require(cls.eta <= cls.gamma * cls.c0, ErrorKind::DomainError,
          "class is empty: need eta <= Gamma C0");
  DiagonalPair out;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> diag(dim);
    auto sign = [&] { return rng.bernoulli(0.5) ? 1.0 : -1.0; };
    diag[0] = sign() * rng.uniform(cls.c0, cls.c1);
    for (std::size_t i = 1; i < dim; ++i)
      diag[i] = sign() * rng.uniform(cls.eta, cls.gamma * std::abs(diag[0]));
    auto dk = RealSquareMatrix::diagonal(std::span<const double>(diag));
    out.m.push_back(dk + random_with_norm(rng, dim, delta));
    out.d.push_back(std::move(dk));
  }
  return out;
}

}  // namespace lyap
