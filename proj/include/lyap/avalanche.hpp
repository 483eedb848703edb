#pragma once

// Effective Avalanche Principle: constant presets, verification of the gap
// and alignment hypotheses, the two-sided sandwich on the rift ratio, and
// the worst-case lower bound it implies.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bound.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "matan.hpp"
#include "matrix.hpp"

namespace lyap {

struct APParams {
  double eps0 = 0.1;
  double c0 = 0.1;
  double c_l = 5.0;
  double c_u = 11.0;
  std::size_t min_len = 0;
  std::string name = "AP_V1";
};

inline const APParams AP_V1{0.1, 0.1, 5.0, 11.0, 0, "AP_V1"};
inline const APParams AP_V2{0.2, 1.0 / 6.0, 11.0, 11.0, 36, "AP_V2"};

inline APParams ap_preset(std::string_view name) {
  if (name == "AP_V1" || name == "v1") return AP_V1;
  if (name == "AP_V2" || name == "v2") return AP_V2;
  fail(ErrorKind::BadConfig, "unknown AP preset '" + std::string(name) + "'");
}

/// Relative slack on boundary comparisons such as kappa <= c0 eps^2, where
/// analytic certificates sit exactly on the boundary.
inline constexpr double kBoundaryRelTol = 1e-10;

struct APOverrides {
  std::optional<double> kappa;
  std::optional<double> eps;
};

/// Per-sequence norm data shared by the AP checks and bounds.
struct SequenceData {
  std::vector<double> log_norms;       // log||L_k||
  std::vector<double> log_pair_norms;  // log||L_{k+1} L_k||, k = 1..n-1
  std::vector<double> gap_ratios;      // gr(L_k)
  std::vector<double> rifts;           // rho(L_k, L_{k+1})

  std::size_t size() const { return log_norms.size(); }
};

template <Scalar T>
SequenceData sequence_data(std::span<const Matrix<T>> seq,
                           std::optional<double> abs_det = std::nullopt) {
  require(!seq.empty(), ErrorKind::DomainError, "empty sequence");
  SequenceData d;
  const std::size_t n = seq.size();
  d.log_norms.reserve(n);
  d.gap_ratios.reserve(n);
  for (const auto& l : seq) {
    require_finite(l);
    const auto s = singular_values(l, abs_det);
    require(s.smallest() > 0.0, ErrorKind::DegenerateMatrix, "singular matrix in sequence");
    d.log_norms.push_back(std::log(op_norm(l)));
    d.gap_ratios.push_back(l.dim() >= 2 ? s.values[0] / s.values[1] : 1.0);
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double pn = std::log(op_norm(seq[k + 1] * seq[k]));
    d.log_pair_norms.push_back(pn);
    d.rifts.push_back(std::min(1.0, std::exp(pn - d.log_norms[k] - d.log_norms[k + 1])));
  }
  return d;
}

struct APReport {
  double kappa = 0.0;
  double eps = 0.0;
  double kappa_measured = 0.0;  // max_i 1/gr(L_i)
  double eps_measured = 0.0;    // min_i rho(L_i, L_{i+1}); 1 when n = 1
  bool gap_ok = false;
  bool align_ok = false;
  bool kappa_ok = false;  // kappa <= c0 eps^2
  bool eps_ok = false;    // 0 < eps <= eps0
  bool len_ok = false;    // n >= min_len
  std::size_t worst_gap_index = 0;
  std::size_t worst_align_index = 0;
  std::size_t n = 0;
  std::string preset;

  bool passed() const { return gap_ok && align_ok && kappa_ok && eps_ok && len_ok; }
};

/// Verifies the gap and alignment hypotheses. Without overrides, kappa is
/// the measured max 1/gr and eps the measured min rift capped at eps0. The
/// gap condition is judged against the override kappa when given, otherwise
/// against the largest admissible kappa c0 eps^2.
inline APReport check_ap(const SequenceData& d, const APParams& params,
                         const APOverrides& ov = {}) {
  APReport r;
  r.n = d.size();
  r.preset = params.name;
  r.kappa_measured = 0.0;
  for (std::size_t i = 0; i < d.gap_ratios.size(); ++i) {
    const double k = 1.0 / d.gap_ratios[i];
    if (k > r.kappa_measured) {
      r.kappa_measured = k;
      r.worst_gap_index = i;
    }
  }
  r.eps_measured = 1.0;
  for (std::size_t i = 0; i < d.rifts.size(); ++i) {
    if (d.rifts[i] < r.eps_measured) {
      r.eps_measured = d.rifts[i];
      r.worst_align_index = i;
    }
  }
  r.kappa = ov.kappa.value_or(r.kappa_measured);
  r.eps = ov.eps.value_or(std::min(r.eps_measured, params.eps0));

  const double admissible = params.c0 * r.eps * r.eps;
  r.eps_ok = r.eps > 0.0 && r.eps <= params.eps0 * (1.0 + kBoundaryRelTol);
  r.kappa_ok = r.kappa > 0.0 && r.kappa <= admissible * (1.0 + kBoundaryRelTol);
  const double kappa_for_gap = ov.kappa ? r.kappa : admissible;
  r.gap_ok = r.kappa_measured <= kappa_for_gap * (1.0 + kBoundaryRelTol);
  r.align_ok = r.eps_measured >= r.eps * (1.0 - kBoundaryRelTol);
  r.len_ok = r.n >= params.min_len;
  return r;
}

template <Scalar T>
APReport check_ap(std::span<const Matrix<T>> seq, const APParams& params,
                  const APOverrides& ov = {}, std::optional<double> abs_det = std::nullopt) {
  return check_ap(sequence_data(seq, abs_det), params, ov);
}

inline std::string describe_failure(const APReport& r) {
  std::string why;
  auto add = [&](bool ok, const char* what) {
    if (!ok) why += (why.empty() ? "" : ", ") + std::string(what);
  };
  add(r.gap_ok, "gap");
  add(r.align_ok, "alignment");
  add(r.kappa_ok, "kappa <= c0 eps^2");
  add(r.eps_ok, "eps <= eps0");
  add(r.len_ok, "length");
  return r.preset + " hypotheses fail: " + why;
}

/// Throws unless the report passes. A short sequence under a preset with a
/// minimum length raises SequenceTooShort.
inline void require_ap(const APReport& r, const APParams& params) {
  require(r.len_ok, ErrorKind::SequenceTooShort,
          params.name + " needs n >= " + std::to_string(params.min_len) + ", got " +
              std::to_string(r.n));
  require(r.passed(), ErrorKind::ApHypothesisViolated, describe_failure(r));
}

struct Sandwich {
  double log_lower = 0.0;
  double log_middle = 0.0;
  double log_upper = 0.0;
  double lower() const { return std::exp(log_lower); }
  double middle() const { return std::exp(log_middle); }
  double upper() const { return std::exp(log_upper); }
  double slack() const { return std::min(log_middle - log_lower, log_upper - log_middle); }
};

/// Slack tolerance, in log scale, on the sandwich assertion.
inline constexpr double kSandwichLogTol = 1e-9;

/// log of rho(L_1..L_n) / prod rho(L_i, L_{i+1})
///   = log||prod|| - sum_pairs log||L_{k+1}L_k|| + sum_{k=2}^{n-1} log||L_k||.
/// Equal to 0 for n <= 2.
template <Scalar T>
double log_rift_ratio(std::span<const Matrix<T>> seq, const SequenceData& d) {
  const std::size_t n = seq.size();
  if (n <= 2) return 0.0;
  RenormProduct<T> prod(seq.front().dim());
  for (const auto& l : seq) prod.push(l);
  std::vector<double> parts;
  parts.reserve(2 * n);
  for (double x : d.log_pair_norms) parts.push_back(-x);
  for (std::size_t k = 1; k + 1 < n; ++k) parts.push_back(d.log_norms[k]);
  return prod.log_norm() + pairwise_sum(parts);
}

/// Two-sided sandwich exp(-c_l n kappa/eps^2) <= middle <= exp(c_u n kappa/eps^2)
/// for a sequence that satisfies the hypotheses with the given (kappa, eps).
template <Scalar T>
Sandwich ap_sandwich(std::span<const Matrix<T>> seq, const APParams& params, double kappa,
                     double eps, std::optional<double> abs_det = std::nullopt) {
  const auto d = sequence_data(seq, abs_det);
  require_ap(check_ap(d, params, {kappa, eps}), params);
  const double n = static_cast<double>(seq.size());
  Sandwich s;
  s.log_lower = -params.c_l * n * kappa / (eps * eps);
  s.log_upper = params.c_u * n * kappa / (eps * eps);
  s.log_middle = log_rift_ratio(seq, d);
  require(s.log_middle >= s.log_lower - kSandwichLogTol &&
              s.log_middle <= s.log_upper + kSandwichLogTol,
          ErrorKind::SandwichViolated,
          "rift ratio " + std::to_string(s.log_middle) + " outside [" +
              std::to_string(s.log_lower) + ", " + std::to_string(s.log_upper) + "]");
  return s;
}

/// (1/2) log(eps^2/kappa) - c_l kappa/eps^2.
inline CertifiedBound worst_case_lower_bound(double kappa, double eps, const APParams& params) {
  require(kappa > 0.0 && eps > 0.0 && std::isfinite(kappa) && std::isfinite(eps),
          ErrorKind::DomainError, "kappa and eps must be positive");
  return CertifiedBound::from_terms(
      {{"main_term", 0.5 * std::log(eps * eps / kappa)},
       {"ap_error", -params.c_l * kappa / (eps * eps)}},
      params.name, kappa, eps);
}

}  // namespace lyap
