#pragma once

// Positive definite cocycles whose matrices almost commute: commutator
// norms, the lower bound with a user-supplied convergence-rate constant c,
// and Monte Carlo probes of the t-dependent exponents of prod A_k^{1+it}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "bound.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "matan.hpp"
#include "matrix.hpp"

namespace lyap {

/// Symbol-indexed positive definite matrices, their symbol distribution and
/// the rate constant c. Outputs that depend on c are conditional: c is taken
/// on trust and never estimated.
struct PDCocycleSample {
  std::vector<SymmetricMatrix> images;
  FiniteDistribution dist;
  double c = 1.0;
};

inline void validate(const PDCocycleSample& s) {
  require(!s.images.empty(), ErrorKind::InvalidMatrix, "no matrices");
  require(std::isfinite(s.c) && s.c > 0.0, ErrorKind::DomainError, "c must be positive and finite");
  require(s.dist.weights.size() == s.images.size(), ErrorKind::DomainError,
          "need one weight per matrix");
  for (const auto& a : s.images) {
    require(a.dim() == s.images.front().dim(), ErrorKind::InvalidMatrix, "matrix sizes differ");
    require_positive_definite(a);
  }
}

/// ||AB - BA||.
template <Scalar T>
double commutator_norm(const Matrix<T>& a, const Matrix<T>& b) {
  require_finite(a);
  require_finite(b);
  return op_norm(a * b - b * a);
}

/// max{sqrt(4 e^{5c} x), 4 e^{5c} x}.
inline double commutator_penalty(double kappa_c, double c) {
  require(kappa_c >= 0.0 && std::isfinite(kappa_c), ErrorKind::DomainError,
          "commutator size must be finite and >= 0");
  const double x = 4.0 * std::exp(5.0 * c) * kappa_c;
  return std::max(std::sqrt(x), x);
}

/// Commutators below this are treated as exact zeros.
inline constexpr double kCommuteTol = 1e-12;

/// max over symbol pairs of ||[log A_j, A_k]||.
inline double max_log_commutator(const PDCocycleSample& s) {
  double m = 0.0;
  std::vector<SymmetricMatrix> logs;
  for (const auto& a : s.images) logs.push_back(log_pd(a));
  for (std::size_t j = 0; j < s.images.size(); ++j)
    for (std::size_t k = 0; k < s.images.size(); ++k)
      if (j != k) m = std::max(m, commutator_norm(logs[j].matrix(), s.images[k].matrix()));
  return m;
}

/// lambda_max(E log A_1) minus the commutator penalty. Tagged conditional.
inline CertifiedBound almost_commuting_bound(const PDCocycleSample& s) {
  validate(s);
  detail::check_probability_row(s.dist.weights, "symbol distribution");
  SymmetricMatrix avg = SymmetricMatrix::zero(s.images.front().dim());
  for (std::size_t k = 0; k < s.images.size(); ++k)
    if (s.dist.weights[k] != 0.0) avg += s.dist.weights[k] * log_pd(s.images[k]);
  const double kc = max_log_commutator(s);
  const double penalty = kc <= kCommuteTol ? 0.0 : commutator_penalty(kc, s.c);
  auto b = CertifiedBound::from_terms({{"main_term", lambda_max(avg)}, {"commutator_penalty", 0.0 - penalty}},
                                      "c=" + std::to_string(s.c), kc, 0.0);
  b.conditional = true;
  return b;
}

/// max over symbol pairs of ||[A_j^{it}, A_k]||.
inline double max_imaginary_power_commutator(const PDCocycleSample& s, double t) {
  double m = 0.0;
  for (std::size_t j = 0; j < s.images.size(); ++j) {
    const auto ait = complex_power(s.images[j], Complex(0.0, t));
    for (std::size_t k = 0; k < s.images.size(); ++k)
      if (j != k) m = std::max(m, commutator_norm(ait, to_complex(s.images[k].matrix())));
  }
  return m;
}

inline Cocycle real_cocycle(const PDCocycleSample& s) {
  Cocycle coc;
  for (const auto& a : s.images) coc.images.push_back(a.matrix());
  return coc;
}

/// Monte Carlo estimate of (1/n) log||A_1^{1+it} ... A_n^{1+it}|| along
/// orbits of `sys`. The product is accumulated as its adjoint
/// A_n^{1-it} ... A_1^{1-it}, which has the same norm. At t = 0 the real
/// estimator is used, so the result equals mc_lyapunov bitwise.
inline MCResult gamma_t_probe(const PDCocycleSample& s, const DynSystem& sys, double t,
                              std::size_t n, std::size_t trials, std::uint64_t seed) {
  validate(s);
  require(std::isfinite(t), ErrorKind::DomainError, "t must be finite");
  const Cocycle coc = real_cocycle(s);
  if (t == 0.0) return mc_lyapunov(sys, coc, n, trials, seed);
  validate(sys);
  std::vector<ComplexSquareMatrix> powers;
  for (const auto& a : s.images) powers.push_back(complex_power(a, Complex(1.0, -t)));
  return mc_run(trials, n, seed, [&](std::uint64_t i) {
    DynSystem local = sys;
    local.seed = seed;
    RenormProduct<Complex> prod(coc.dim());
    for (Symbol sym : orbit_symbols(local, n, i)) {
      require(sym < powers.size(), ErrorKind::UnknownSymbol,
              "symbol " + std::to_string(sym) + " has no matrix");
      prod.push(powers[sym]);
    }
    return prod.exponent();
  });
}

struct TProbeCheck {
  double t = 0.0;
  double gamma_t = 0.0;
  double gamma_0 = 0.0;
  double std_error = 0.0;  // combined standard error of the difference
  double penalty = 0.0;    // max{sqrt(4 e^{5c} eps_t), 4 e^{5c} eps_t}
  bool holds = false;      // |gamma_t - gamma_0| <= penalty + 3 std_error
  bool conditional = true;
};

/// Compares |gamma(t) - gamma(0)| against the penalty with eps_t. Holding
/// depends on c, so the result is informative only.
inline TProbeCheck t_probe_check(const PDCocycleSample& s, const DynSystem& sys, double t,
                                 std::size_t n, std::size_t trials, std::uint64_t seed) {
  TProbeCheck r;
  r.t = t;
  const auto g0 = gamma_t_probe(s, sys, 0.0, n, trials, seed);
  const auto gt = gamma_t_probe(s, sys, t, n, trials, seed);
  r.gamma_0 = g0.mean;
  r.gamma_t = gt.mean;
  r.std_error = std::hypot(g0.std_error, gt.std_error);
  const double et = max_imaginary_power_commutator(s, t);
  r.penalty = et <= kCommuteTol ? 0.0 : commutator_penalty(et, s.c);
  r.holds = std::abs(r.gamma_t - r.gamma_0) <= r.penalty + 3.0 * r.std_error + 1e-12;
  return r;
}

}  // namespace lyap
