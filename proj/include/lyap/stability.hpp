#pragma once

// Stability of finite-n Lyapunov exponents near aligned sequences: rank-one
// dominated products, Schrodinger transfer matrices off the spectrum,
// perturbed aligned diagonal families amplified by blocking, and the Jacobi
// two-step transfer matrices at E = 0.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "avalanche.hpp"
#include "bound.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "matan.hpp"
#include "matrix.hpp"
#include "parallel.hpp"
#include "transfer.hpp"

namespace lyap {

/// Assertion slack on measured <= certified comparisons.
inline constexpr double kGapTol = 1e-9;

namespace detail {

inline void require_gap_within(double measured, double certified, const std::string& what) {
  require(measured <= certified + kGapTol, ErrorKind::BoundViolated,
          what + ": measured gap " + std::to_string(measured) + " exceeds certified " +
              std::to_string(certified));
}

/// log||L_n...L_1|| - sum_pairs log||L_{k+1}L_k|| + sum_{k=2}^{n-1} log||L_k||
/// with the AP prediction sum_pairs - sum_middle returned separately.
inline double ap_prediction(const SequenceData& d) {
  const std::size_t n = d.size();
  if (n == 1) return d.log_norms.front();
  std::vector<double> parts(d.log_pair_norms.begin(), d.log_pair_norms.end());
  for (std::size_t k = 1; k + 1 < n; ++k) parts.push_back(-d.log_norms[k]);
  return pairwise_sum(parts);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Rank-one dominated sequences L_k = r_k P + M_k.

struct RankOneFamily {
  RealSquareMatrix projection;
  std::vector<RealSquareMatrix> m;
  std::vector<double> r;
  double c0 = 1.0;  // ||M_k|| <= c0
  double c1 = 1.0;  // ||M_k^{-1}|| <= c1
};

inline void validate(const RankOneFamily& f) {
  const auto& p = f.projection;
  require_finite(p, "projection");
  const std::size_t d = p.dim();
  const double tol = 1e-12;
  double trace = 0.0;
  for (std::size_t i = 0; i < d; ++i) trace += p(i, i);
  require(max_abs_entry(p * p - p) <= tol && max_abs_entry(p - p.adjoint()) <= tol &&
              std::abs(trace - 1.0) <= tol,
          ErrorKind::DomainError, "P must be a symmetric rank-one projection");
  require(!f.m.empty() && f.m.size() == f.r.size(), ErrorKind::DomainError,
          "need one r_k per M_k");
  for (std::size_t k = 0; k < f.m.size(); ++k) {
    require(f.m[k].dim() == d, ErrorKind::InvalidMatrix, "M_k dimension differs from P");
    const auto s = singular_values(f.m[k]);
    require(s.largest() <= f.c0 * (1.0 + 1e-12) && s.smallest() > 0.0 &&
                1.0 / s.smallest() <= f.c1 * (1.0 + 1e-12),
            ErrorKind::HypothesisNotMet, "M_k outside the class ||M|| <= C0, ||M^-1|| <= C1");
    require(std::isfinite(f.r[k]), ErrorKind::DomainError, "r_k must be finite");
  }
}

inline std::vector<RealSquareMatrix> rankone_sequence(const RankOneFamily& f) {
  std::vector<RealSquareMatrix> seq;
  seq.reserve(f.m.size());
  for (std::size_t k = 0; k < f.m.size(); ++k) seq.push_back(f.r[k] * f.projection + f.m[k]);
  return seq;
}

struct GapResult {
  double measured_gap = 0.0;
  CertifiedBound certified;
  APReport report;
  double exponent = 0.0;   // (1/n) log||prod||
  double reference = 0.0;  // the exponent being compared against
};

/// |(1/n) log||prod L_k|| - (1/n) sum log|r_k|| against the AP chain
///   max(P + c_u kappa/eps^2 - R, R - P + c_l kappa/eps^2),
/// P = (1/n)(sum_pairs log||L_{k+1}L_k|| - sum_{k=2}^{n-1} log||L_k||),
/// R = (1/n) sum log|r_k|, with kappa and eps measured on the sequence.
inline GapResult rankone_sandwich(const RankOneFamily& fam, const APParams& params = AP_V1) {
  validate(fam);
  require(fam.m.size() >= 2, ErrorKind::DomainError, "need n >= 2");
  const auto seq = rankone_sequence(fam);
  const auto d = sequence_data(std::span<const RealSquareMatrix>(seq));
  GapResult g;
  g.report = check_ap(d, params);
  require_ap(g.report, params);
  const double n = static_cast<double>(seq.size());
  std::vector<double> logs;
  for (double r : fam.r) logs.push_back(std::log(std::abs(r)));
  g.reference = pairwise_sum(logs) / n;
  g.exponent = finite_exponent(std::span<const RealSquareMatrix>(seq));
  const double pred = detail::ap_prediction(d) / n;
  const double q = g.report.kappa / (g.report.eps * g.report.eps);
  const double upper = pred + params.c_u * q - g.reference;
  const double lower = g.reference - pred + params.c_l * q;
  g.certified = CertifiedBound::from_terms({{"chain", std::max(upper, lower)}}, params.name,
                                           g.report.kappa, g.report.eps);
  g.measured_gap = std::abs(g.exponent - g.reference);
  detail::require_gap_within(g.measured_gap, g.certified.value, "rank-one sandwich");
  return g;
}

/// Alternating worst-case family of length n for the class (C0, C1):
/// P = e1 e1^T, M_k = R(pi/2) diag(C0, 1/C1) and its transpose, r_k = (-1)^k r0.
inline RankOneFamily rankone_worst_family(double r0, double c0, double c1, std::size_t n) {
  require(c0 > 0.0 && c1 > 0.0 && c0 * c1 >= 1.0, ErrorKind::DomainError,
          "need C0 C1 >= 1 for a nonempty class");
  RankOneFamily f;
  f.projection = RealSquareMatrix{{1.0, 0.0}, {0.0, 0.0}};
  f.c0 = c0;
  f.c1 = c1;
  const RealSquareMatrix m = RealSquareMatrix{{0.0, -1.0}, {1.0, 0.0}} *
                             RealSquareMatrix::diagonal({c0, 1.0 / c1});
  for (std::size_t k = 0; k < n; ++k) {
    f.m.push_back(k % 2 == 0 ? m : m.adjoint());
    f.r.push_back(k % 2 == 0 ? r0 : -r0);
  }
  return f;
}

/// Smallest integer r0 in [1, hi] for which `passes(r0)` holds, by bisection
/// (resolution 1), assuming monotonicity. Throws HypothesisNotMet if hi fails.
inline double find_min_r0(const std::function<bool(double)>& passes, double hi = 1e8) {
  require(hi >= 1.0, ErrorKind::DomainError, "search bound must be >= 1");
  require(passes(hi), ErrorKind::HypothesisNotMet, "no admissible r0 below the search bound");
  double lo = 0.0;  // lo fails (or is out of range), hi passes
  hi = std::ceil(hi);
  while (hi - lo > 1.0) {
    const double mid = std::floor(0.5 * (lo + hi));
    if (mid >= 1.0 && passes(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

/// find_min_r0 over rankone_worst_family with AP_V1 and measured constants.
inline double find_min_r0(double c0, double c1, std::size_t n = 16) {
  return find_min_r0([&](double r0) {
    const auto f = rankone_worst_family(r0, c0, c1, n);
    const auto seq = rankone_sequence(f);
    return check_ap(std::span<const RealSquareMatrix>(seq), AP_V1).passed();
  });
}

// ---------------------------------------------------------------------------
// Schrodinger transfer matrices far from the spectrum.

/// psi(r) = 1 + (r^2 + |r| sqrt(4 + r^2))/2 = ||transfer(r)||^2.
inline double psi(double r) { return 1.0 + 0.5 * (r * r + std::abs(r) * std::hypot(2.0, r)); }

/// phi(x, y) = 2 + (x - y)^2 + x^2 y^2 = ||transfer(y) transfer(x)||_F^2.
inline double phi(double x, double y) { return 2.0 + (x - y) * (x - y) + x * x * y * y; }

inline double exact_transfer_norm(double r) { return std::sqrt(psi(r)); }

/// ||transfer(y) transfer(x)|| = sqrt((phi + sqrt(phi^2 - 4))/2).
inline double exact_pair_norm(double x, double y) {
  const double f = phi(x, y);
  const double excess = (x - y) * (x - y) + x * x * y * y;  // phi - 2
  return std::sqrt(0.5 * (f + std::sqrt(excess * (f + 2.0))));
}

struct OffSpectrum {
  double measured_gap = 0.0;
  double r0 = 0.0;
  CertifiedBound bound;  // boundary + ap terms
  double exponent = 0.0;
  double reference = 0.0;  // (1/n) sum log|r_k|
  APReport report;         // AP_V1 with kappa = r0^{-2}, eps = 1/10
};

inline constexpr double kOffSpectrumMinR0 = 32.0;

/// |(1/n) log||prod transfer(r_k)|| - (1/n) sum log|r_k||
///   <= log(|r_1||r_n|)/n + 1.2e3 r0^{-2}, with r0 = min |r_k| >= 32 unless given.
inline OffSpectrum off_spectrum_sandwich(std::span<const double> r,
                                         std::optional<double> r0_given = std::nullopt) {
  require(!r.empty(), ErrorKind::DomainError, "empty sequence");
  double rmin = std::numeric_limits<double>::infinity();
  for (double x : r) {
    require(std::isfinite(x), ErrorKind::DomainError, "r_k must be finite");
    rmin = std::min(rmin, std::abs(x));
  }
  OffSpectrum o;
  o.r0 = r0_given.value_or(rmin);
  require(o.r0 >= kOffSpectrumMinR0, ErrorKind::DomainError, "r0 must be at least 32");
  require(rmin >= o.r0, ErrorKind::DomainError, "some |r_k| is below r0");
  const std::size_t n = r.size();
  const double inv2 = 1.0 / (o.r0 * o.r0);

  std::vector<RealSquareMatrix> seq;
  seq.reserve(n);
  for (double x : r) seq.push_back(transfer(x));
  const auto d = sequence_data(std::span<const RealSquareMatrix>(seq), 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double lr = std::log(std::abs(r[k]));
    require(d.log_norms[k] >= lr - 1e-12 && d.log_norms[k] <= lr + std::log1p(inv2) + 1e-12,
            ErrorKind::CertificateBroken, "single-step norm outside [|r|, |r|(1 + r0^-2)]");
    if (k + 1 < n) {
      const double lp = lr + std::log(std::abs(r[k + 1]));
      require(d.log_pair_norms[k] >= lp - 1e-12 &&
                  d.log_pair_norms[k] <= lp + std::log1p(3.0 * inv2) + 1e-12,
              ErrorKind::CertificateBroken, "pair norm outside [|rr'|, |rr'|(1 + 3 r0^-2)]");
    }
  }
  o.report = check_ap(d, AP_V1, {inv2, 0.1});
  require_ap(o.report, AP_V1);

  std::vector<double> logs;
  for (double x : r) logs.push_back(std::log(std::abs(x)));
  const double dn = static_cast<double>(n);
  o.reference = pairwise_sum(logs) / dn;
  o.exponent = finite_exponent(std::span<const RealSquareMatrix>(seq));
  o.measured_gap = std::abs(o.exponent - o.reference);
  o.bound = CertifiedBound::from_terms(
      {{"boundary_term", (logs.front() + logs.back()) / dn}, {"ap_error", 1.2e3 * inv2}},
      AP_V1.name, inv2, 0.1);
  detail::require_gap_within(o.measured_gap, o.bound.value, "off-spectrum sandwich");
  return o;
}

// ---------------------------------------------------------------------------
// Aligned diagonal families and blocking.

struct DiagonalClass {
  double gamma = 0.5;  // |lambda_1| / max_{i>=2} |lambda_i| >= 1/gamma
  double eta = 1.0;    // min_{i>=2} |lambda_i| >= eta
  double c0 = 1.0;     // c0 <= |lambda_1| <= c1
  double c1 = 1.0;
};

inline void validate(const DiagonalClass& c) {
  require(c.gamma > 0.0 && c.gamma < 1.0, ErrorKind::DomainError, "Gamma must lie in (0,1)");
  require(c.eta > 0.0 && c.c0 > 0.0 && c.c1 >= c.c0, ErrorKind::DomainError,
          "need eta > 0 and 0 < C0 <= C1");
}

/// True when d is diagonal and in the class; lambda_1 is the (0,0) entry.
inline bool in_class(const RealSquareMatrix& d, const DiagonalClass& c) {
  const double tol = 1e-12;
  for (std::size_t i = 0; i < d.dim(); ++i)
    for (std::size_t j = 0; j < d.dim(); ++j)
      if (i != j && d(i, j) != 0.0) return false;
  const double l1 = std::abs(d(0, 0));
  double rest_max = 0.0, rest_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < d.dim(); ++i) {
    rest_max = std::max(rest_max, std::abs(d(i, i)));
    rest_min = std::min(rest_min, std::abs(d(i, i)));
  }
  return l1 * c.gamma >= rest_max * (1.0 - tol) && rest_min >= c.eta * (1.0 - tol) &&
         l1 >= c.c0 * (1.0 - tol) && l1 <= c.c1 * (1.0 + tol);
}

struct BlockingPlan {
  double eps1 = 0.0;
  DiagonalClass cls;
  unsigned nu = 1;  // ceil(log(4000/eps1) / log(1/Gamma))
  double c2 = 0.0;  // nu 2^nu C1^nu
  double c3 = 0.0;  // 2^nu C1^nu C2 / eta^nu
  double delta0 = 0.0;
  std::vector<BoundTerm> delta0_terms;
};

inline BlockingPlan blocking_plan(double eps1, const DiagonalClass& cls) {
  validate(cls);
  require(eps1 > 0.0 && eps1 < 1.0, ErrorKind::DomainError, "eps1 must lie in (0,1)");
  BlockingPlan p;
  p.eps1 = eps1;
  p.cls = cls;
  const double ratio = std::log(4000.0 / eps1) / std::log(1.0 / cls.gamma);
  p.nu = static_cast<unsigned>(std::max(1.0, std::ceil(ratio)));
  const double nu = p.nu;
  const double two_nu = std::pow(2.0, nu);
  const double c1_nu = std::pow(cls.c1, nu);
  p.c2 = nu * two_nu * c1_nu;
  p.c3 = two_nu * c1_nu * p.c2 / std::pow(cls.eta, nu);
  p.delta0_terms = {
      {"one", 1.0},
      {"eta/2", 0.5 * cls.eta},
      {"eta^nu/(2 C2)", std::pow(cls.eta, nu) / (2.0 * p.c2)},
      {"C0^{2nu}/(2^{nu+1} C1^nu C2)", std::pow(cls.c0, 2.0 * nu) / (2.0 * two_nu * c1_nu * p.c2)},
      {"Gamma^{-nu} C1^nu C3/3", std::pow(cls.gamma, -nu) * c1_nu * p.c3 / 3.0},
      {"eps1/(10 (C2+C2)^2)", eps1 / (10.0 * (p.c2 + p.c2) * (p.c2 + p.c2))},
  };
  p.delta0 = std::numeric_limits<double>::infinity();
  for (const auto& t : p.delta0_terms)
    if (!std::isnan(t.value)) p.delta0 = std::min(p.delta0, t.value);
  require(p.delta0 > 0.0 && std::isfinite(p.delta0), ErrorKind::DomainError,
          "delta0 underflows for these class parameters");
  return p;
}

struct StabilityResult {
  double measured_gap = 0.0;
  CertifiedBound certified;  // eps1 + (nu/n) log(3 C1)
  double delta = 0.0;        // max ||D_k - M_k||
  std::size_t blocks = 0;    // floor(n / nu)
  double min_log_block_gap = 0.0;  // min log gr over blocked D
  double max_block_perturbation_ratio = 0.0;  // max ||D~ - M~|| / (delta C2)
  APReport report_d;
  APReport report_m;
};

/// |(1/n) log||prod M_k|| - (1/n) log||prod D_k||| <= eps1 + (nu/n) log(3 C1)
/// for D_k in the plan's class and ||D_k - M_k|| <= delta < delta0.
/// Blocks of nu consecutive matrices are checked against AP_V1 with
/// kappa = eps1/2000, eps = 1/10; a trailing partial block is not blocked.
inline StabilityResult stability2_gap(std::span<const RealSquareMatrix> dseq,
                                      std::span<const RealSquareMatrix> mseq,
                                      const BlockingPlan& plan) {
  require(!dseq.empty() && dseq.size() == mseq.size(), ErrorKind::DomainError,
          "D and M sequences must be nonempty and of equal length");
  const std::size_t n = dseq.size();
  require(n >= plan.nu, ErrorKind::DomainError, "need n >= nu");
  StabilityResult r;
  std::vector<RealSquareMatrix> d, m;
  d.reserve(n);
  m.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    require(in_class(dseq[k], plan.cls), ErrorKind::HypothesisNotMet,
            "D_" + std::to_string(k + 1) + " is outside the diagonal class");
    require(mseq[k].dim() == dseq[k].dim(), ErrorKind::InvalidMatrix, "D_k and M_k dimensions differ");
    r.delta = std::max(r.delta, op_norm(dseq[k] - mseq[k]));
    // Sign normalization: lambda_1 > 0.
    const double s = dseq[k](0, 0) < 0.0 ? -1.0 : 1.0;
    d.push_back(s * dseq[k]);
    m.push_back(s * mseq[k]);
  }
  require(r.delta < plan.delta0, ErrorKind::PerturbationTooLarge,
          "max ||D_k - M_k|| = " + std::to_string(r.delta) + " is not below delta0 = " +
              std::to_string(plan.delta0));

  r.blocks = n / plan.nu;
  std::vector<RealSquareMatrix> db, mb;
  for (std::size_t b = 0; b < r.blocks; ++b) {
    const std::span<const RealSquareMatrix> dspan(d.data() + b * plan.nu, plan.nu);
    const std::span<const RealSquareMatrix> mspan(m.data() + b * plan.nu, plan.nu);
    db.push_back(ordered_product(dspan));
    mb.push_back(ordered_product(mspan));
  }
  r.min_log_block_gap = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < r.blocks; ++b) {
    r.min_log_block_gap = std::min(r.min_log_block_gap, std::log(gap_ratio(db[b])));
    if (r.delta > 0.0)
      r.max_block_perturbation_ratio = std::max(
          r.max_block_perturbation_ratio, op_norm(db[b] - mb[b]) / (r.delta * plan.c2));
  }
  require(r.min_log_block_gap >= std::log(4000.0 / plan.eps1) - 1e-12,
          ErrorKind::CertificateBroken, "blocked diagonal gap ratio is below 4000/eps1");
  require(r.max_block_perturbation_ratio <= 1.0 + 1e-9, ErrorKind::CertificateBroken,
          "blocked perturbation exceeds delta C2");
  const APOverrides ov{plan.eps1 / 2000.0, 0.1};
  r.report_d = check_ap(std::span<const RealSquareMatrix>(db), AP_V1, ov);
  require_ap(r.report_d, AP_V1);
  r.report_m = check_ap(std::span<const RealSquareMatrix>(mb), AP_V1, ov);
  require_ap(r.report_m, AP_V1);

  const double ld = log_product_norm(std::span<const RealSquareMatrix>(d));
  const double lm = log_product_norm(std::span<const RealSquareMatrix>(m));
  const double dn = static_cast<double>(n);
  r.measured_gap = std::abs(lm / dn - ld / dn);
  r.certified = CertifiedBound::from_terms(
      {{"eps1", plan.eps1}, {"remainder", plan.nu / dn * std::log(3.0 * plan.cls.c1)}},
      AP_V1.name, plan.eps1 / 2000.0, 0.1);
  detail::require_gap_within(r.measured_gap, r.certified.value, "blocked stability");
  return r;
}

// ---------------------------------------------------------------------------
// Jacobi two-step transfer matrices.

/// M(E) = [[(E^2 - 1)/theta, -E theta], [E/theta, -theta]].
inline RealSquareMatrix jacobi_transfer(double energy, double theta) {
  require(std::isfinite(theta) && theta > 0.0, ErrorKind::DomainError, "theta must be > 0");
  require(std::isfinite(energy), ErrorKind::DomainError, "energy must be finite");
  return RealSquareMatrix{{(energy * energy - 1.0) / theta, -energy * theta},
                          {energy / theta, -theta}};
}

enum class JacobiRegime { Below, Above };  // all theta in (0,1), or all in (1, inf)

struct JacobiPlan {
  JacobiRegime regime = JacobiRegime::Above;
  double theta_min = 0.0;
  double theta_max = 0.0;
  DiagonalClass cls;
  BlockingPlan blocking;
  double c = 0.0;   // ||M(E) - M(0)|| <= c |E| for |E| <= 1
  double e0 = 0.0;  // min(1, delta0 / c)
  double xi = 0.0;  // nu log(3 C1)
};

inline JacobiPlan jacobi_plan(std::span<const double> thetas, double eps1) {
  require(!thetas.empty(), ErrorKind::DomainError, "empty theta sequence");
  JacobiPlan j;
  j.theta_min = *std::min_element(thetas.begin(), thetas.end());
  j.theta_max = *std::max_element(thetas.begin(), thetas.end());
  require(j.theta_min > 0.0 && std::isfinite(j.theta_max), ErrorKind::DomainError,
          "theta values must be positive and finite");
  if (j.theta_min > 1.0) {
    j.regime = JacobiRegime::Above;
    j.cls = {1.0 / (j.theta_min * j.theta_min), 1.0 / j.theta_max, j.theta_min, j.theta_max};
  } else if (j.theta_max < 1.0) {
    j.regime = JacobiRegime::Below;
    j.cls = {j.theta_max * j.theta_max, j.theta_min, 1.0 / j.theta_max, 1.0 / j.theta_min};
  } else {
    fail(ErrorKind::MixedRegime, "theta values straddle 1");
  }
  j.blocking = blocking_plan(eps1, j.cls);
  j.c = std::sqrt(2.0 / (j.theta_min * j.theta_min) + j.theta_max * j.theta_max);
  j.e0 = std::min(1.0, j.blocking.delta0 / j.c);
  j.xi = j.blocking.nu * std::log(3.0 * j.cls.c1);
  return j;
}

struct JacobiResult {
  JacobiPlan plan;
  StabilityResult stability;
};

/// Finite exponents of M_k(E) and M_k(0) differ by at most eps1 + xi/n
/// when |E| < E0. In the theta > 1 regime both sequences are conjugated by
/// the coordinate swap so that the dominant diagonal entry comes first;
/// product norms are unchanged.
inline JacobiResult jacobi_stability(double energy, std::span<const double> thetas, double eps1) {
  JacobiResult out;
  out.plan = jacobi_plan(thetas, eps1);
  require(std::abs(energy) < out.plan.e0, ErrorKind::EnergyTooLarge,
          "|E| must be below E0 = " + std::to_string(out.plan.e0));
  const RealSquareMatrix swap{{0.0, 1.0}, {1.0, 0.0}};
  std::vector<RealSquareMatrix> d, m;
  for (double t : thetas) {
    auto d0 = jacobi_transfer(0.0, t);
    auto me = jacobi_transfer(energy, t);
    if (out.plan.regime == JacobiRegime::Above) {
      d0 = swap * d0 * swap;
      me = swap * me * swap;
    }
    d.push_back(std::move(d0));
    m.push_back(std::move(me));
  }
  out.stability = stability2_gap(d, m, out.plan.blocking);
  return out;
}

}  // namespace lyap
