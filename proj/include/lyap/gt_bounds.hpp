#pragma once

// Multivariate Golden-Thompson machinery (operator norm case): the density
// f(t), a quadrature check of the n-matrix inequality, and the lower bounds
// on finite-product and ergodic Lyapunov exponents built from it together
// with the Avalanche Principle.

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "avalanche.hpp"
#include "bound.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "matan.hpp"
#include "matrix.hpp"
#include "parallel.hpp"

namespace lyap {

/// f(t) = (pi/2) / (cosh(pi t) + 1), a probability density on the line.
inline double gt_density(double t) {
  const double pi = std::numbers::pi;
  return 0.5 * pi / (std::cosh(pi * t) + 1.0);
}

/// Distribution function of f: 1/2 + tanh(pi t / 2)/2.
inline double gt_cdf(double t) { return 0.5 + 0.5 * std::tanh(0.5 * std::numbers::pi * t); }

/// Mass of f outside [-T, T], 1 - tanh(pi T/2) = 2/(e^{pi T} + 1).
inline double gt_tail_mass(double half_width) {
  return 2.0 / (std::exp(std::numbers::pi * half_width) + 1.0);
}

/// Composite trapezoid rule on [-T, T] with `nodes` equispaced nodes.
struct GTQuadrature {
  double half_width = 9.0;
  std::size_t nodes = 4001;
};

inline void validate(const GTQuadrature& q) {
  require(std::isfinite(q.half_width) && q.half_width > 0.0, ErrorKind::DomainError,
          "quadrature half-width must be positive");
  require(q.nodes >= 3, ErrorKind::DomainError, "quadrature needs at least 3 nodes");
}

/// Trapezoid approximation of the integral of f over [-T, T] (no tail).
inline double gt_captured_mass(const GTQuadrature& q) {
  validate(q);
  const double h = 2.0 * q.half_width / static_cast<double>(q.nodes - 1);
  std::vector<double> w(q.nodes);
  for (std::size_t i = 0; i < q.nodes; ++i) {
    const double t = -q.half_width + h * static_cast<double>(i);
    w[i] = h * gt_density(t) * ((i == 0 || i + 1 == q.nodes) ? 0.5 : 1.0);
  }
  return pairwise_sum(w);
}

inline constexpr double kGtSlackTol = 1e-7;
inline constexpr double kGtDoublingTol = 1e-6;

struct GTCheck {
  double lhs = 0.0;           // lambda_max(sum H_k)
  double rhs = 0.0;           // integral on the refined grid minus tail allowance
  double slack = 0.0;         // rhs - lhs
  double integral = 0.0;      // refined trapezoid value on [-T, T]
  double tail_allowance = 0.0;
  double doubling_change = 0.0;  // |refined - coarse|
};

namespace detail {

/// Evaluates t -> log||E_n(t)...E_1(t)||, E_k(t) = exp((1+it) H_k), from
/// precomputed eigensystems. Each factor is scaled by exp(-lambda_max(H_k))
/// and the scales are restored in log space.
class GtIntegrand {
 public:
  explicit GtIntegrand(std::span<const HermitianMatrix> hs) {
    for (const auto& h : hs) {
      systems_.push_back(eigh(h));
      log_scale_ += systems_.back().values.back();
    }
  }

  double operator()(double t) const {
    const std::size_t d = systems_.front().vectors.dim();
    ComplexSquareMatrix prod = ComplexSquareMatrix::identity(d);
    const Complex z(1.0, t);
    for (const auto& sys : systems_) {
      const double top = sys.values.back();
      ComplexSquareMatrix e(d);
      for (std::size_t k = 0; k < d; ++k) {
        const Complex fk = std::exp(z * sys.values[k] - top);
        for (std::size_t i = 0; i < d; ++i) {
          const Complex vik = sys.vectors(i, k) * fk;
          for (std::size_t j = 0; j < d; ++j) e(i, j) += vik * std::conj(sys.vectors(j, k));
        }
      }
      prod = e * prod;
    }
    return std::log(op_norm(prod)) + log_scale_;
  }

 private:
  std::vector<EigenSystem<Complex>> systems_;
  double log_scale_ = 0.0;
};

}  // namespace detail

/// Checks log||exp(sum H_k)|| <= integral f(t) log||prod exp((1+it)H_k)|| dt.
/// The integral is approximated by the trapezoid rule on `quad` and on the
/// grid with halved spacing; the tail outside [-T, T] is bounded below by
/// -tail_mass * sum ||H_k|| since the integrand is at least -sum ||H_k||.
inline GTCheck gt_check(std::span<const HermitianMatrix> hs, const GTQuadrature& quad = {}) {
  validate(quad);
  require(!hs.empty(), ErrorKind::DomainError, "empty Hermitian family");
  const std::size_t d = hs.front().dim();
  HermitianMatrix sum = HermitianMatrix::zero(d);
  double norm_sum = 0.0;
  for (const auto& h : hs) {
    require(h.dim() == d, ErrorKind::InvalidMatrix, "Hermitian family dimensions differ");
    sum += h;
    norm_sum += hermitian_norm(h);
  }

  const detail::GtIntegrand g(hs);
  const std::size_t fine_nodes = 2 * quad.nodes - 1;
  const double h_fine = 2.0 * quad.half_width / static_cast<double>(fine_nodes - 1);
  std::vector<double> fine(fine_nodes), coarse(quad.nodes);
  for (std::size_t i = 0; i < fine_nodes; ++i) {
    const double t = -quad.half_width + h_fine * static_cast<double>(i);
    const double edge = (i == 0 || i + 1 == fine_nodes) ? 0.5 : 1.0;
    const double v = gt_density(t) * g(t);
    fine[i] = edge * h_fine * v;
    if (i % 2 == 0) coarse[i / 2] = edge * 2.0 * h_fine * v;
  }

  GTCheck r;
  r.lhs = lambda_max(sum);
  r.integral = pairwise_sum(fine);
  r.doubling_change = std::abs(r.integral - pairwise_sum(coarse));
  r.tail_allowance = gt_tail_mass(quad.half_width) * norm_sum;
  r.rhs = r.integral - r.tail_allowance;
  r.slack = r.rhs - r.lhs;
  require(r.doubling_change <= kGtDoublingTol, ErrorKind::QuadratureUnderresolved,
          "node doubling changed the integral by " + std::to_string(r.doubling_change));
  require(r.slack >= -kGtSlackTol, ErrorKind::BoundViolated,
          "Golden-Thompson slack " + std::to_string(r.slack) + " is negative");
  return r;
}

// ---------------------------------------------------------------------------

struct StrangeAlpha {
  double alpha = 0.0;            // max of the deficits, clamped at 0
  std::vector<double> deficits;  // 1 - ||L_{k+1}L_k|| / || |L_{k+1}^T| |L_k| ||
};

inline StrangeAlpha strange_alpha(std::span<const RealSquareMatrix> seq) {
  StrangeAlpha s;
  for (const auto& l : seq) require_invertible(l);
  for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
    const double direct = op_norm(seq[k + 1] * seq[k]);
    const double dressed = norm_abs_adjoint_times_abs(seq[k + 1], seq[k]);
    const double deficit = 1.0 - direct / dressed;
    s.deficits.push_back(deficit);
    s.alpha = std::max(s.alpha, deficit);
  }
  s.alpha = std::max(0.0, s.alpha);
  return s;
}

/// Slack allowed when asserting bound <= measured exponent.
inline constexpr double kBoundCheckTol = 1e-9;

struct FiniteBound {
  CertifiedBound bound;
  double measured = 0.0;  // (1/n) log||L_n...L_1||
  APReport report;
};

namespace detail {

inline APReport require_hypotheses(const SequenceData& d, const APParams& params,
                                   const APOverrides& ov) {
  auto r = check_ap(d, params, ov);
  require_ap(r, params);
  return r;
}

inline void require_below_measured(const CertifiedBound& b, double measured) {
  require(b.value <= measured + kBoundCheckTol, ErrorKind::BoundViolated,
          "lower bound " + std::to_string(b.value) + " exceeds measured exponent " +
              std::to_string(measured));
}

}  // namespace detail

/// Normal-matrix case: lambda_max((1/n) sum log|L_k|) - (c_l + c_u) kappa/eps^2.
inline FiniteBound finite_lower_bound_normal(std::span<const RealSquareMatrix> seq,
                                             const APParams& params, const APOverrides& ov = {}) {
  require(!seq.empty(), ErrorKind::DomainError, "empty sequence");
  for (const auto& l : seq)
    require(is_normal(l), ErrorKind::NotNormal, "sequence element is not normal");
  const auto d = sequence_data(seq);
  FiniteBound out;
  out.report = detail::require_hypotheses(d, params, ov);
  const double n = static_cast<double>(seq.size());
  SymmetricMatrix avg = SymmetricMatrix::zero(seq.front().dim());
  for (const auto& l : seq) avg += log_abs(l);
  avg *= 1.0 / n;
  const double k = out.report.kappa, e = out.report.eps;
  out.bound = CertifiedBound::from_terms(
      {{"main_term", lambda_max(avg)}, {"ap_error", -(params.c_l + params.c_u) * k / (e * e)}},
      params.name, k, e);
  out.measured = finite_exponent(seq);
  detail::require_below_measured(out.bound, out.measured);
  return out;
}

namespace detail {

inline void require_alpha_admissible(double alpha, double kappa, double eps,
                                     const APParams& params) {
  require(alpha >= 0.0 && alpha < 1.0, ErrorKind::AlphaTooLarge, "alpha must lie in [0,1)");
  const double shrunk = (1.0 - alpha) * eps;
  require(kappa <= params.c0 * shrunk * shrunk * (1.0 + kBoundaryRelTol), ErrorKind::AlphaTooLarge,
          "kappa exceeds c0 ((1-alpha) eps)^2");
}

inline CertifiedBound general_bound(double lmax, double kappa, double eps, double alpha,
                                    const APParams& params) {
  const double one_minus = 1.0 - alpha;
  return CertifiedBound::from_terms(
      {{"main_term", lmax},
       {"ap_error", -(params.c_l + params.c_u / (one_minus * one_minus)) * kappa / (eps * eps)},
       {"alpha_correction", std::log(one_minus)}},
      params.name, kappa, eps);
}

}  // namespace detail

/// General case: lambda_max((1/n) sum (log|L_k| + log|L_k^T|)/2)
///   - (c_l + c_u/(1-alpha)^2) kappa/eps^2 + log(1-alpha).
/// alpha defaults to the measured strange_alpha of the sequence; a supplied
/// alpha must dominate every measured deficit.
inline FiniteBound finite_lower_bound_general(std::span<const RealSquareMatrix> seq,
                                              const APParams& params, const APOverrides& ov = {},
                                              std::optional<double> alpha = std::nullopt,
                                              std::optional<double> abs_det = std::nullopt) {
  require(!seq.empty(), ErrorKind::DomainError, "empty sequence");
  const auto d = sequence_data(seq, abs_det);
  FiniteBound out;
  out.report = detail::require_hypotheses(d, params, ov);
  const auto measured_alpha = strange_alpha(seq).alpha;
  const double a = alpha.value_or(measured_alpha);
  require(measured_alpha <= a + 1e-12, ErrorKind::HypothesisNotMet,
          "measured alpha " + std::to_string(measured_alpha) + " exceeds supplied alpha");
  const double k = out.report.kappa, e = out.report.eps;
  detail::require_alpha_admissible(a, k, e, params);
  const double n = static_cast<double>(seq.size());
  SymmetricMatrix avg = SymmetricMatrix::zero(seq.front().dim());
  for (const auto& l : seq) {
    avg += log_abs(l, abs_det);
    avg += log_abs_adjoint(l, abs_det);
  }
  avg *= 0.5 / n;
  out.bound = detail::general_bound(lambda_max(avg), k, e, a, params);
  out.measured = finite_exponent(seq);
  detail::require_below_measured(out.bound, out.measured);
  return out;
}

/// Ergodic bound from exact expectations E log|L_1| and E log|L_1^T|.
inline CertifiedBound ergodic_lower_bound(const SymmetricMatrix& e_log_abs,
                                          const SymmetricMatrix& e_log_abs_adjoint,
                                          const APParams& params, double kappa, double eps,
                                          double alpha = 0.0) {
  require(kappa > 0.0 && eps > 0.0, ErrorKind::DomainError, "kappa and eps must be positive");
  require(eps <= params.eps0 * (1.0 + kBoundaryRelTol) &&
              kappa <= params.c0 * eps * eps * (1.0 + kBoundaryRelTol),
          ErrorKind::ApHypothesisViolated, params.name + " constants not admissible");
  detail::require_alpha_admissible(alpha, kappa, eps, params);
  SymmetricMatrix avg = e_log_abs + e_log_abs_adjoint;
  avg *= 0.5;
  return detail::general_bound(lambda_max(avg), kappa, eps, alpha, params);
}

// ---------------------------------------------------------------------------
// Two-symbol example: A_0 = diag(a, 1/a) with probability pp, and
// A_1 = R(pi/4) diag(b, 1/b) R(pi/4)^T.

inline RealSquareMatrix rotation(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return RealSquareMatrix{{c, -s}, {s, c}};
}

inline Cocycle example_cocycle(double a, double b) {
  const auto r = rotation(std::numbers::pi / 4.0);
  return Cocycle{{RealSquareMatrix::diagonal({a, 1.0 / a}),
                  r * RealSquareMatrix::diagonal({b, 1.0 / b}) * r.adjoint()},
                 true};
}

struct ExampleTriple {
  CertifiedBound worst_case;  // log a - log 10 - 500/a^2
  CertifiedBound gt_bound;    // lambda_max(pp log|A_0| + (1-pp) log|A_1|) - 1600/a^2
  double upper_bound = 0.0;   // pp log a + (1 - pp) log b
};

inline constexpr double kExampleMinA = 31.622776601683793;  // sqrt(1000)

inline ExampleTriple example_triple(double a, double b, double pp) {
  require(std::isfinite(a) && std::isfinite(b) && a >= kExampleMinA * (1.0 - 1e-12),
          ErrorKind::DomainError, "a must be at least sqrt(1000)");
  require(b >= a, ErrorKind::DomainError, "b must be at least a");
  require(pp >= 0.0 && pp <= 1.0, ErrorKind::DomainError, "probability must lie in [0,1]");
  const double kappa = 1.0 / (a * a);
  const double eps = 0.1;
  ExampleTriple t;
  t.worst_case = worst_case_lower_bound(kappa, eps, AP_V1);
  const auto coc = example_cocycle(a, b);
  const auto e = exact_expectations(coc, FiniteDistribution{{pp, 1.0 - pp}});
  // Normal matrices: log|A^T| = log|A|, so case (i) applies.
  t.gt_bound = ergodic_lower_bound(e.log_abs, e.log_abs, AP_V1, kappa, eps, 0.0);
  t.upper_bound = pp * std::log(a) + (1.0 - pp) * std::log(b);
  return t;
}

}  // namespace lyap
