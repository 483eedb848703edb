#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lyap {

struct BoundTerm {
  std::string name;
  double value = 0.0;
};

/// A bound value together with the terms it is assembled from. value is the
/// left-to-right sum of terms.
struct CertifiedBound {
  double value = 0.0;
  std::vector<BoundTerm> terms;
  std::string preset;
  double kappa = 0.0;
  double eps = 0.0;
  bool conditional = false;  // depends on an unverifiable user-supplied constant

  static CertifiedBound from_terms(std::vector<BoundTerm> terms, std::string preset = {},
                                   double kappa = 0.0, double eps = 0.0) {
    CertifiedBound b;
    for (const auto& t : terms) b.value += t.value;
    b.terms = std::move(terms);
    b.preset = std::move(preset);
    b.kappa = kappa;
    b.eps = eps;
    return b;
  }

  std::optional<double> term(std::string_view name) const {
    for (const auto& t : terms)
      if (t.name == name) return t.value;
    return std::nullopt;
  }
};

}  // namespace lyap
