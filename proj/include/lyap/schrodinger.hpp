#pragma once

// Schrodinger transfer matrices and polymer blocks: the F-function calculus
// for transfer-matrix powers, analytic norm brackets for block products, the
// Avalanche certificate for polymer sequences and the resulting lower bound
// on the Lyapunov exponent.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "avalanche.hpp"
#include "bound.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "gt_bounds.hpp"
#include "matan.hpp"
#include "matrix.hpp"
#include "transfer.hpp"

namespace lyap {

/// |a| must differ from 2 by at least this margin.
inline constexpr double kParabolicMargin = 1e-8;
/// z must stay this far from 0 and +-1 in F_q(z).
inline constexpr double kFSingularMargin = 1e-10;

/// Eigenvalues lambda_{+-} = (a +- sqrt(a^2 - 4))/2 of transfer(a).
struct TransferParams {
  double a = 0.0;
  Complex lambda_plus;
  Complex lambda_minus;
};

inline TransferParams transfer_params(double a) {
  require(std::isfinite(a), ErrorKind::DomainError, "transfer parameter must be finite");
  require(std::abs(std::abs(a) - 2.0) >= kParabolicMargin, ErrorKind::NearSingularArgument,
          "|a| is within 1e-8 of 2");
  TransferParams t{a, {}, {}};
  if (std::abs(a) < 2.0) {
    const double s = std::sqrt(4.0 - a * a);
    t.lambda_plus = Complex(0.5 * a, 0.5 * s);
    t.lambda_minus = Complex(0.5 * a, -0.5 * s);
  } else {
    // The root of larger modulus is formed without cancellation.
    const double big = 0.5 * (a + std::copysign(std::sqrt(a * a - 4.0), a));
    const double small = 1.0 / big;
    t.lambda_plus = Complex(a > 0.0 ? big : small, 0.0);
    t.lambda_minus = Complex(a > 0.0 ? small : big, 0.0);
  }
  return t;
}

/// mu = (b + sqrt(b^2 - 4))/2 for b > 2.
inline double mu_of(double b) {
  require(std::isfinite(b) && b > 2.0, ErrorKind::DomainError, "mu needs b > 2");
  return 0.5 * (b + std::sqrt(b * b - 4.0));
}

// ---------------------------------------------------------------------------
// F_q(z) = (z^q - z^{-q}) / (z - z^{-1}); F_q(1/z) = F_q(z), F_0 = 0, F_1 = 1.

namespace detail {

/// F_q(x) for real |x| > 1: x^{q-1} (1 - x^{-2q}) / (1 - x^{-2}).
inline double f_real_outside(double x, int q) {
  const double y = std::abs(x);
  const double ly = std::log(y);
  const double v = std::pow(y, q - 1) * std::expm1(-2.0 * q * ly) / std::expm1(-2.0 * ly);
  return (x < 0.0 && (q - 1) % 2 != 0) ? -v : v;
}

}  // namespace detail

/// Real-argument F_q with the z -> 1/z symmetry folding |x| < 1 outside.
inline double f_real(double x, int q) {
  require(q >= 0, ErrorKind::DomainError, "F index must be >= 0");
  require(std::isfinite(x) && std::abs(x) > kFSingularMargin &&
              std::abs(std::abs(x) - 1.0) > kFSingularMargin,
          ErrorKind::NearSingularArgument, "F_q argument too close to 0 or +-1");
  if (q == 0) return 0.0;
  return detail::f_real_outside(std::abs(x) > 1.0 ? x : 1.0 / x, q);
}

/// log F_q(x) for real x > 1, safe when x^q overflows.
inline double log_f_real(double x, int q) {
  require(q >= 1, ErrorKind::DomainError, "log F needs q >= 1");
  require(std::isfinite(x) && x > 1.0 + kFSingularMargin, ErrorKind::NearSingularArgument,
          "log F needs x > 1");
  const double lx = std::log(x);
  return (q - 1) * lx + std::log(-std::expm1(-2.0 * q * lx)) - std::log(-std::expm1(-2.0 * lx));
}

/// F_q on the unit circle, z = e^{i theta}: sin(q theta) / sin(theta).
inline double f_circle(double theta, int q) {
  require(q >= 0, ErrorKind::DomainError, "F index must be >= 0");
  const double s = std::sin(theta);
  require(std::abs(s) > kFSingularMargin, ErrorKind::NearSingularArgument,
          "F_q argument too close to +-1");
  return std::sin(q * theta) / s;
}

inline Complex f_function(Complex z, int q) {
  require(q >= 0, ErrorKind::DomainError, "F index must be >= 0");
  require(std::isfinite(z.real()) && std::isfinite(z.imag()), ErrorKind::DomainError,
          "F_q argument must be finite");
  const double r = std::abs(z);
  require(r > kFSingularMargin && std::abs(z - 1.0) > kFSingularMargin &&
              std::abs(z + 1.0) > kFSingularMargin,
          ErrorKind::NearSingularArgument, "F_q argument too close to 0 or +-1");
  if (z.imag() == 0.0) return f_real(z.real(), q);
  if (std::abs(r - 1.0) <= 1e-12) return f_circle(std::arg(z), q);
  const Complex zq = std::pow(z, q);
  return (zq - 1.0 / zq) / (z - 1.0 / z);
}

/// transfer(a)^p = [[F_{p+1}, -F_p], [F_p, -F_{p-1}]] evaluated at lambda_+.
inline RealSquareMatrix power_via_F(double a, unsigned p) {
  const auto t = transfer_params(a);
  if (p == 0) return RealSquareMatrix::identity(2);
  const int q = static_cast<int>(p);
  auto f = [&](int k) {
    if (std::abs(a) < 2.0) return f_circle(std::arg(t.lambda_plus), k);
    return f_real(t.lambda_plus.real(), k);
  };
  return RealSquareMatrix{{f(q + 1), -f(q)}, {f(q), -f(q - 1)}};
}

// ---------------------------------------------------------------------------
// Analytic brackets.

struct Bracket {
  std::string name;
  double log_lower = -std::numeric_limits<double>::infinity();
  double log_upper = std::numeric_limits<double>::infinity();
  double log_measured = 0.0;

  bool contains(double rel_tol = 1e-10) const {
    const double slack = std::log1p(rel_tol);
    return log_measured >= log_lower - slack && log_measured <= log_upper + slack;
  }
};

namespace detail {

inline void require_contains(const Bracket& b) {
  require(b.contains(), ErrorKind::CertificateBroken,
          b.name + ": measured log " + std::to_string(b.log_measured) + " outside [" +
              std::to_string(b.log_lower) + ", " + std::to_string(b.log_upper) + "]");
}

inline double log_or_neg_inf(double x) {
  return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
}

/// Distance from x to the lattice pi Z.
inline double dist_to_pi_lattice(double x) {
  const double pi = std::numbers::pi;
  return std::abs(x - pi * std::round(x / pi));
}

}  // namespace detail

/// Angle hypotheses for E = 2 cos(theta), theta in [0, pi]:
///   min(theta, pi - theta) >= delta1 and dist((p+1) theta, pi Z) >= delta2.
/// These give |sin theta| >= sin delta1 and |sin((p+1)theta)| >= sin delta2,
/// which is what the F-function estimates consume.
struct AngleCheck {
  double theta = 0.0;
  double sep1 = 0.0;  // min(theta, pi - theta)
  double sep2 = 0.0;  // dist((p+1) theta, pi Z)
  bool ok1 = false;
  bool ok2 = false;
  bool ok() const { return ok1 && ok2; }
};

inline AngleCheck check_angles(double energy, unsigned p, double delta1, double delta2) {
  require(std::isfinite(energy) && std::abs(energy) < 2.0, ErrorKind::HypothesisNotMet,
          "energy must lie in (-2, 2)");
  AngleCheck c;
  c.theta = std::acos(0.5 * energy);
  c.sep1 = std::min(c.theta, std::numbers::pi - c.theta);
  c.sep2 = detail::dist_to_pi_lattice((p + 1.0) * c.theta);
  c.ok1 = c.sep1 >= delta1;
  c.ok2 = c.sep2 >= delta2;
  return c;
}

inline void require_angles(const AngleCheck& c) {
  require(c.ok1, ErrorKind::HypothesisNotMet,
          "theta is within delta1 of 0 or pi (separation " + std::to_string(c.sep1) + ")");
  require(c.ok2, ErrorKind::HypothesisNotMet,
          "(p+1) theta is within delta2 of pi Z (separation " + std::to_string(c.sep2) + ")");
}

inline void require_deltas(double delta1, double delta2) {
  const double half_pi = 0.5 * std::numbers::pi;
  require(delta1 > 0.0 && delta1 < half_pi && delta2 > 0.0 && delta2 < half_pi,
          ErrorKind::DomainError, "delta1, delta2 must lie in (0, pi/2)");
}

/// Unit-circle F bracket at z = e^{i theta}: |F_q| <= 2/delta1 whenever
/// min(theta, pi - theta) >= delta1 (theta folded into [0, pi]), and
/// |F_q| >= delta2/2 whenever dist(q theta, pi Z) >= delta2.
inline Bracket f_bounds_circle(double theta, int q, double delta1,
                               std::optional<double> delta2 = std::nullopt) {
  require_deltas(delta1, delta2.value_or(delta1));
  const double pi = std::numbers::pi;
  double folded = std::fmod(std::abs(theta), 2.0 * pi);
  if (folded > pi) folded = 2.0 * pi - folded;
  require(std::min(folded, pi - folded) >= delta1, ErrorKind::HypothesisNotMet,
          "theta is within delta1 of 0 or pi");
  Bracket b;
  b.name = "F_" + std::to_string(q) + " on the unit circle";
  b.log_upper = std::log(2.0 / delta1);
  if (delta2) {
    require(detail::dist_to_pi_lattice(q * folded) >= *delta2, ErrorKind::HypothesisNotMet,
            "q theta is within delta2 of pi Z");
    b.log_lower = std::log(0.5 * *delta2);
  }
  b.log_measured = detail::log_or_neg_inf(std::abs(f_circle(folded, q)));
  detail::require_contains(b);
  return b;
}

/// Real F bracket: x^{q-1}(1 - x0^{-2q}) <= F_q(x) <= x^{q-1} / (1 - x0^{-2}), x > x0 > 1.
inline Bracket f_bounds_real(double x, int q, double x0) {
  require(q >= 1, ErrorKind::DomainError, "F index must be >= 1");
  require(x0 > 1.0 && x > x0, ErrorKind::HypothesisNotMet, "need x > x0 > 1");
  Bracket b;
  b.name = "F_" + std::to_string(q) + " on the real axis";
  const double lx = std::log(x), lx0 = std::log(x0);
  b.log_lower = (q - 1) * lx + std::log(-std::expm1(-2.0 * q * lx0));
  b.log_upper = (q - 1) * lx - std::log(-std::expm1(-2.0 * lx0));
  b.log_measured = log_f_real(x, q);
  detail::require_contains(b);
  return b;
}

/// Dispatches on the argument: unit circle (delta1, optional delta2) or real x > x0.
inline Bracket f_bounds(Complex z, int q, double delta1, std::optional<double> delta2,
                        std::optional<double> x0) {
  if (std::abs(std::abs(z) - 1.0) <= 1e-12 && z.imag() != 0.0)
    return f_bounds_circle(std::arg(z), q, delta1, delta2);
  if (z.imag() == 0.0 && x0) return f_bounds_real(z.real(), q, *x0);
  fail(ErrorKind::HypothesisNotMet, "F bracket needs |z| = 1 or real z > x0 > 1");
}

/// Threshold on b = E + v:
/// 1 + max{4, (20/9)^8/(d1 d2), (20/9)^8/(d1 d2)^2, (1e6/d2)^{2/(2p-1)}, (160/(9 d1))^{10/(p-1)}}.
inline double b0_threshold(unsigned p, double delta1, double delta2) {
  require(p >= 2, ErrorKind::DomainError, "b0 needs p >= 2");
  require_deltas(delta1, delta2);
  const double c = std::pow(20.0 / 9.0, 8);
  const double dd = delta1 * delta2;
  const double terms[] = {4.0, c / dd, c / (dd * dd),
                          std::pow(1e6 / delta2, 2.0 / (2.0 * p - 1.0)),
                          std::pow(160.0 / (9.0 * delta1), 10.0 / (p - 1.0))};
  return 1.0 + *std::max_element(std::begin(terms), std::end(terms));
}

struct BlockNormBrackets {
  Bracket b_q;           // ||B^q||
  Bracket ap_bq;         // ||A^p B^q||
  Bracket b2p_ap_bp;     // ||B^{2p} A^p B^p||, lower only
  Bracket ap_bp_ap_bp;   // ||A^p B^p A^p B^p||, lower only
  double mu = 0.0;
  double b = 0.0;
  double b0 = 0.0;
};

namespace detail {

inline double log_norm_of_word(std::initializer_list<std::pair<double, unsigned>> word) {
  // Factors listed left to right, so the rightmost is applied first.
  std::vector<std::pair<double, unsigned>> w(word);
  RenormProduct<double> prod(2);
  for (auto it = w.rbegin(); it != w.rend(); ++it)
    for (unsigned k = 0; k < it->second; ++k) prod.push(transfer(it->first));
  return prod.log_norm();
}

/// Angle hypotheses plus b = E + v >= b0; with `depth_condition` also
/// v >= b0 + E, the form in which the threshold is imposed on the depth.
inline AngleCheck require_admissible(double energy, double v, unsigned p, double delta1,
                                     double delta2, double& b0, bool depth_condition) {
  require_deltas(delta1, delta2);
  const auto angles = check_angles(energy, p, delta1, delta2);
  require_angles(angles);
  b0 = b0_threshold(p, delta1, delta2);
  require(std::isfinite(v) && energy + v >= b0, ErrorKind::HypothesisNotMet,
          "b = E + v = " + std::to_string(energy + v) + " is below b0 = " + std::to_string(b0));
  if (depth_condition)
    require(v >= b0 + energy, ErrorKind::HypothesisNotMet,
            "v = " + std::to_string(v) + " is below b0 + E = " + std::to_string(b0 + energy));
  return angles;
}

}  // namespace detail

/// Analytic norm brackets for powers and block words in A = transfer(E) and
/// B = transfer(E + v), each checked against directly multiplied products.
inline BlockNormBrackets block_norm_bounds(double energy, double v, unsigned p, unsigned q,
                                           double delta1, double delta2) {
  require(q >= 1, ErrorKind::DomainError, "q must be >= 1");
  BlockNormBrackets r;
  detail::require_admissible(energy, v, p, delta1, delta2, r.b0, false);
  const double a = energy;
  r.b = energy + v;
  r.mu = mu_of(r.b);
  const double lmu = std::log(r.mu);

  r.b_q.name = "||B^q||";
  r.b_q.log_lower = std::log(0.9) + q * lmu;
  r.b_q.log_upper = std::log(20.0 / 9.0) + q * lmu;
  r.b_q.log_measured = detail::log_norm_of_word({{r.b, q}});

  r.ap_bq.name = "||A^p B^q||";
  r.ap_bq.log_lower = std::log(9.0 * delta2 / 40.0) + q * lmu;
  r.ap_bq.log_upper = std::log(160.0 / (9.0 * delta1)) + q * lmu;
  r.ap_bq.log_measured = detail::log_norm_of_word({{a, p}, {r.b, q}});

  r.b2p_ap_bp.name = "||B^{2p} A^p B^p||";
  r.b2p_ap_bp.log_lower = std::log(0.25 * delta2 * 0.81) + 3.0 * p * lmu;
  r.b2p_ap_bp.log_measured = detail::log_norm_of_word({{r.b, 2 * p}, {a, p}, {r.b, p}});

  r.ap_bp_ap_bp.name = "||A^p B^p A^p B^p||";
  const double c = 9.0 * delta2 / 20.0;
  r.ap_bp_ap_bp.log_lower = std::log(0.5 * c * c) + 2.0 * p * lmu;
  r.ap_bp_ap_bp.log_measured =
      detail::log_norm_of_word({{a, p}, {r.b, p}, {a, p}, {r.b, p}});

  for (const Bracket* b : {&r.b_q, &r.ap_bq, &r.b2p_ap_bp, &r.ap_bp_ap_bp})
    detail::require_contains(*b);
  return r;
}

// ---------------------------------------------------------------------------
// Polymer certificate and bound.

struct PolymerCertificate {
  double energy = 0.0;
  double v = 0.0;
  unsigned p = 0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double theta = 0.0;
  double b = 0.0;
  double mu = 0.0;
  double b0 = 0.0;
  double kappa = 0.0;  // (5/delta2)^2 mu^{-2p}
  double eps = 0.0;    // 1e-4 min{1, (delta1 delta2)^2}
  double log_kappa = 0.0;
  double measured_log_kappa = 0.0;  // max over blocks of -log gr
  double measured_eps = 0.0;        // min rift over the four block pairs
};

/// Certified (kappa, eps) for polymer block sequences under AP_V2, after
/// checking the angle and threshold hypotheses. The two block matrices are
/// measured: every gap ratio must be at least 1/kappa and every block-pair
/// rift at least eps, otherwise CertificateBroken.
inline PolymerCertificate polymer_certificate(double energy, double v, unsigned p, double delta1,
                                              double delta2) {
  PolymerCertificate c{energy, v, p, delta1, delta2};
  c.theta = detail::require_admissible(energy, v, p, delta1, delta2, c.b0, true).theta;
  c.b = energy + v;
  c.mu = mu_of(c.b);
  c.log_kappa = 2.0 * std::log(5.0 / delta2) - 2.0 * p * std::log(c.mu);
  c.kappa = std::exp(c.log_kappa);
  const double dd = delta1 * delta2;
  c.eps = 1e-4 * std::min(1.0, dd * dd);

  const auto& v2 = AP_V2;
  require(c.eps <= v2.eps0 && c.kappa <= v2.c0 * c.eps * c.eps, ErrorKind::CertificateBroken,
          "certified (kappa, eps) violate kappa <= c0 eps^2");

  const auto coc = polymer_cocycle(energy, v, p);
  // Blocks are unimodular, so s_2 = 1/s_1 and log gr = 2 log||L||.
  std::vector<double> log_norms;
  c.measured_log_kappa = -std::numeric_limits<double>::infinity();
  for (const auto& l : coc.images) {
    log_norms.push_back(std::log(op_norm(l)));
    c.measured_log_kappa = std::max(c.measured_log_kappa, -2.0 * log_norms.back());
  }
  c.measured_eps = 1.0;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      const double lr = std::log(op_norm(coc.images[j] * coc.images[i])) - log_norms[i] -
                        log_norms[j];
      c.measured_eps = std::min(c.measured_eps, std::exp(lr));
    }
  require(c.measured_log_kappa <= c.log_kappa + 1e-10, ErrorKind::CertificateBroken,
          "measured block gap ratio is below 1/kappa");
  require(c.measured_eps >= c.eps * (1.0 - 1e-10), ErrorKind::CertificateBroken,
          "measured block rift is below eps");
  return c;
}

struct SpectralPoint {
  unsigned k = 0;
  double energy = 0.0;          // 2 cos(pi k/(p+1))
  double distance_bound = 0.0;  // 18 k / p^{3/2}
};

inline std::vector<SpectralPoint> spectral_points(unsigned p) {
  require(p >= 1, ErrorKind::DomainError, "p must be >= 1");
  std::vector<SpectralPoint> out;
  const double scale = std::pow(static_cast<double>(p), 1.5);
  for (unsigned k = 1; k <= p; ++k)
    out.push_back({k, 2.0 * std::cos(std::numbers::pi * k / (p + 1.0)), 18.0 * k / scale});
  return out;
}

/// max over consecutive pairs of |1 - ||L_{k+1}L_k|| / || |L_{k+1}^T| |L_k| |||.
inline double adjoint_identity_check(std::span<const RealSquareMatrix> seq) {
  double worst = 0.0;
  for (double d : strange_alpha(seq).deficits) worst = std::max(worst, std::abs(d));
  return worst;
}

struct PolymerBound {
  PolymerCertificate certificate;
  CertifiedBound bound;        // (pp/2) p log mu, per block of 2p sites
  CertifiedBound ergodic;      // lambda_max of exact expectations minus 22 kappa/eps^2
  CertifiedBound chain;        // explicit proof line, per block
  double stated_b_form = 0.0;  // (pp/2) p log b, per block
  std::size_t sites_per_block = 0;

  double per_site(double block_value) const {
    return block_value / static_cast<double>(sites_per_block);
  }
};

/// Lower bound on the block Lyapunov exponent of a polymer model with
/// probability pp of the all -v block. Returns the certified value
/// (pp/2) p log mu together with the two intermediate bounds it is derived
/// from; the ordering ergodic >= chain >= certified is asserted.
inline PolymerBound polymer_lower_bound(double energy, double v, unsigned p, double pp,
                                        double delta1, double delta2) {
  require(pp >= 0.5 && pp <= 1.0, ErrorKind::HypothesisNotMet,
          "block probability must lie in [1/2, 1]");
  PolymerBound r;
  r.certificate = polymer_certificate(energy, v, p, delta1, delta2);
  const auto& c = r.certificate;
  r.sites_per_block = 2 * p;
  const double lmu = std::log(c.mu);
  const double ap_error = (AP_V2.c_l + AP_V2.c_u) * c.kappa / (c.eps * c.eps);

  const auto coc = polymer_cocycle(energy, v, p);
  const auto e = exact_expectations(coc, FiniteDistribution{{pp, 1.0 - pp}});
  r.ergodic = ergodic_lower_bound(e.log_abs, e.log_abs_adjoint, AP_V2, c.kappa, c.eps, 0.0);

  // Literal error term of the chain; the exact 22 kappa/eps^2 is used when
  // it is larger.
  const double dd = delta1 * delta2;
  const double literal =
      1e11 * std::exp(-2.0 * p * lmu) / (delta2 * delta2) * std::max(1.0, 1.0 / (dd * dd));
  r.chain = CertifiedBound::from_terms(
      {{"main_term", pp * ((2.0 * p - 1.0) * lmu + std::log(0.9))},
       {"cross_term", -(1.0 - pp) * (p * lmu + std::log(160.0 / (9.0 * delta1)))},
       {"ap_error", -std::max(literal, ap_error)}},
      AP_V2.name, c.kappa, c.eps);

  r.bound = CertifiedBound::from_terms({{"main_term", 0.5 * pp * p * lmu}}, AP_V2.name, c.kappa,
                                       c.eps);
  r.stated_b_form = 0.5 * pp * p * std::log(c.b);

  const double tol = 1e-9 * std::max(1.0, std::abs(r.ergodic.value));
  require(r.ergodic.value >= r.chain.value - tol && r.chain.value >= r.bound.value - tol,
          ErrorKind::CertificateBroken,
          "polymer bound chain out of order: ergodic " + std::to_string(r.ergodic.value) +
              ", chain " + std::to_string(r.chain.value) + ", certified " +
              std::to_string(r.bound.value));
  require(r.bound.value > 0.0, ErrorKind::CertificateBroken, "certified bound is not positive");
  return r;
}

/// E = 2 cos(theta) and v = b0 + |E|, the smallest depth meeting both
/// v >= b0 + E and E + v >= b0.
struct PolymerPoint {
  double energy = 0.0;
  double v = 0.0;
  double b0 = 0.0;
};

inline PolymerPoint admissible_polymer_point(unsigned p, double delta1, double delta2,
                                             double theta) {
  PolymerPoint pt;
  pt.energy = 2.0 * std::cos(theta);
  pt.b0 = b0_threshold(p, delta1, delta2);
  pt.v = pt.b0 + std::abs(pt.energy);
  require_angles(check_angles(pt.energy, p, delta1, delta2));
  return pt;
}

}  // namespace lyap
