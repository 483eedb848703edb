#pragma once

// Ergodic dynamics and cocycle sampling. A DynSystem is an immutable
// descriptor; every orbit is generated from its seed and a stream index, so
// identical (seed, stream) pairs give bitwise identical orbits.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "matan.hpp"
#include "matrix.hpp"
#include "rng.hpp"
#include "transfer.hpp"

namespace lyap {

using Symbol = std::uint32_t;

/// i.i.d. symbols with P(0) = p and P(1) = 1 - p.
struct Bernoulli {
  double p = 0.5;
};

/// Finite-state Markov chain; transition[i][j] = P(i -> j).
struct Markov {
  std::vector<std::vector<double>> transition;
  std::vector<double> initial;
};

/// x -> x + alpha (mod 1), observed through the partition [0, threshold).
struct Rotation {
  double alpha = 0.0;
  double threshold = 0.5;
  std::optional<double> x0;
};

/// (w, y) -> (w + alpha, y + w) (mod 1) with w_0 = beta, y_0 = x0, so that
/// y_k = x0 + k beta + k(k-1)/2 alpha (mod 1). y is observed.
struct SkewShift {
  double alpha = 0.0;
  std::optional<double> beta;
  double threshold = 0.5;
  std::optional<double> x0;
};

/// x -> 2x (mod 1), realized on a 64-bit window of the binary expansion of a
/// random initial point so the orbit never collapses to 0.
struct Doubling {
  double threshold = 0.5;
};

/// A fixed symbol list, repeated periodically when longer orbits are asked.
struct Explicit {
  std::vector<Symbol> symbols;
};

using DynKind = std::variant<Bernoulli, Markov, Rotation, SkewShift, Doubling, Explicit>;

struct DynSystem {
  DynKind kind;
  std::uint64_t seed = 0;
};

namespace detail {

inline void check_probability_row(std::span<const double> row, std::string_view what) {
  double s = 0.0;
  for (double x : row) {
    require(std::isfinite(x) && x >= 0.0 && x <= 1.0, ErrorKind::DomainError,
            std::string(what) + ": probabilities must lie in [0,1]");
    s += x;
  }
  require(std::abs(s - 1.0) <= 1e-12, ErrorKind::DomainError,
          std::string(what) + ": probabilities must sum to 1");
}

inline double frac(double x) { return x - std::floor(x); }

inline void check_unit(double x, std::string_view what) {
  require(std::isfinite(x), ErrorKind::DomainError, std::string(what) + " must be finite");
}

}  // namespace detail

inline void validate(const DynSystem& sys) {
  std::visit(
      [](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Bernoulli>) {
          require(std::isfinite(k.p) && k.p >= 0.0 && k.p <= 1.0, ErrorKind::DomainError,
                  "bernoulli p must lie in [0,1]");
        } else if constexpr (std::is_same_v<K, Markov>) {
          const std::size_t m = k.transition.size();
          require(m >= 1 && k.initial.size() == m, ErrorKind::DomainError,
                  "markov transition and initial distribution sizes differ");
          for (const auto& row : k.transition) {
            require(row.size() == m, ErrorKind::DomainError, "markov transition must be square");
            detail::check_probability_row(row, "markov transition row");
          }
          detail::check_probability_row(k.initial, "markov initial distribution");
        } else if constexpr (std::is_same_v<K, Rotation>) {
          detail::check_unit(k.alpha, "rotation alpha");
        } else if constexpr (std::is_same_v<K, SkewShift>) {
          detail::check_unit(k.alpha, "skew-shift alpha");
        } else if constexpr (std::is_same_v<K, Explicit>) {
          require(!k.symbols.empty(), ErrorKind::DomainError, "explicit symbol list is empty");
        }
      },
      sys.kind);
}

/// Number of distinct symbols the system can emit.
inline std::size_t alphabet_size(const DynSystem& sys) {
  return std::visit(
      [](const auto& k) -> std::size_t {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Markov>) {
          return k.transition.size();
        } else if constexpr (std::is_same_v<K, Explicit>) {
          Symbol mx = 0;
          for (Symbol s : k.symbols) mx = std::max(mx, s);
          return static_cast<std::size_t>(mx) + 1;
        } else {
          return 2;
        }
      },
      sys.kind);
}

/// Stationary distribution of a Markov chain (left Perron vector), by power
/// iteration on the averaged chain (P + I)/2, which is aperiodic.
inline std::vector<double> stationary_distribution(const Markov& m) {
  const std::size_t k = m.transition.size();
  std::vector<double> pi(k, 1.0 / static_cast<double>(k));
  for (int it = 0; it < 100000; ++it) {
    std::vector<double> next(k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        next[j] += pi[i] * 0.5 * (m.transition[i][j] + (i == j ? 1.0 : 0.0));
    double diff = 0.0;
    for (std::size_t j = 0; j < k; ++j) diff = std::max(diff, std::abs(next[j] - pi[j]));
    pi = std::move(next);
    if (diff < 1e-16) break;
  }
  return pi;
}

/// Two-state chain with stationary P(0) = p and lag-one correlation rho:
/// P(0 -> 0) = p + rho (1 - p), P(1 -> 0) = p (1 - rho). Starts stationary.
inline Markov markov_with_correlation(double p, double rho) {
  require(p > 0.0 && p < 1.0, ErrorKind::DomainError, "markov p must lie in (0,1)");
  const double stay0 = p + rho * (1.0 - p);
  const double enter0 = p * (1.0 - rho);
  require(stay0 >= 0.0 && stay0 <= 1.0 && enter0 >= 0.0 && enter0 <= 1.0 && rho < 1.0,
          ErrorKind::DomainError, "correlation outside the admissible range for p");
  return Markov{{{stay0, 1.0 - stay0}, {enter0, 1.0 - enter0}}, {p, 1.0 - p}};
}

namespace detail {

inline Symbol draw(Rng& rng, std::span<const double> probs) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<Symbol>(i);
  }
  return static_cast<Symbol>(probs.size() - 1);
}

}  // namespace detail

/// Observed states in [0,1) of the continuous systems (rotation, skew shift,
/// doubling map). DomainError for symbolic systems.
inline std::vector<double> orbit_states(const DynSystem& sys, std::size_t n,
                                        std::uint64_t stream = 0) {
  validate(sys);
  Rng rng(sys.seed, stream);
  std::vector<double> out;
  out.reserve(n);
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Rotation>) {
          double x = k.x0 ? detail::frac(*k.x0) : rng.uniform();
          for (std::size_t i = 0; i < n; ++i) {
            out.push_back(x);
            x = detail::frac(x + k.alpha);
          }
        } else if constexpr (std::is_same_v<K, SkewShift>) {
          double y = k.x0 ? detail::frac(*k.x0) : rng.uniform();
          double w = k.beta ? detail::frac(*k.beta) : rng.uniform();
          for (std::size_t i = 0; i < n; ++i) {
            out.push_back(y);
            y = detail::frac(y + w);
            w = detail::frac(w + k.alpha);
          }
        } else if constexpr (std::is_same_v<K, Doubling>) {
          std::uint64_t window = rng.bits();
          for (std::size_t i = 0; i < n; ++i) {
            out.push_back(static_cast<double>(window >> 11) * 0x1.0p-53);
            window = (window << 1) | (rng.bits() >> 63);
          }
        } else {
          fail(ErrorKind::DomainError, "system has no continuous state");
        }
      },
      sys.kind);
  return out;
}

/// Symbolic orbit of length n. Continuous systems emit 0 on [0, threshold)
/// and 1 otherwise.
inline std::vector<Symbol> orbit_symbols(const DynSystem& sys, std::size_t n,
                                         std::uint64_t stream = 0) {
  require(n >= 1, ErrorKind::DomainError, "orbit length must be >= 1");
  validate(sys);
  std::vector<Symbol> out;
  out.reserve(n);
  auto threshold_of = [](const auto& k) { return k.threshold; };
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Bernoulli>) {
          Rng rng(sys.seed, stream);
          for (std::size_t i = 0; i < n; ++i) out.push_back(rng.bernoulli(k.p) ? 0 : 1);
        } else if constexpr (std::is_same_v<K, Markov>) {
          Rng rng(sys.seed, stream);
          Symbol s = detail::draw(rng, k.initial);
          for (std::size_t i = 0; i < n; ++i) {
            out.push_back(s);
            s = detail::draw(rng, k.transition[s]);
          }
        } else if constexpr (std::is_same_v<K, Explicit>) {
          for (std::size_t i = 0; i < n; ++i) out.push_back(k.symbols[i % k.symbols.size()]);
        } else {
          const double thr = threshold_of(k);
          for (double x : orbit_states(sys, n, stream)) out.push_back(x < thr ? 0 : 1);
        }
      },
      sys.kind);
  return out;
}

/// Symbol-indexed matrices A(s). `unimodular` declares |det A(s)| = 1, which
/// lets singular values be recovered exactly from the largest one.
struct Cocycle {
  std::vector<RealSquareMatrix> images;
  bool unimodular = false;

  std::size_t dim() const { return images.front().dim(); }

  const RealSquareMatrix& operator()(Symbol s) const {
    require(s < images.size(), ErrorKind::UnknownSymbol,
            "symbol " + std::to_string(s) + " has no matrix");
    return images[s];
  }

  std::optional<double> abs_det() const {
    return unimodular ? std::optional<double>(1.0) : std::nullopt;
  }
};

inline void validate(const Cocycle& coc) {
  require(!coc.images.empty(), ErrorKind::InvalidMatrix, "cocycle has no matrices");
  for (const auto& m : coc.images) {
    require(m.dim() == coc.dim(), ErrorKind::InvalidMatrix, "cocycle matrices differ in size");
    require_invertible(m, coc.abs_det());
  }
}

inline std::vector<RealSquareMatrix> sample_cocycle(const DynSystem& sys, const Cocycle& coc,
                                                    std::size_t n, std::uint64_t stream = 0) {
  std::vector<RealSquareMatrix> out;
  out.reserve(n);
  for (Symbol s : orbit_symbols(sys, n, stream)) out.push_back(coc(s));
  return out;
}

/// Finite probability vector over symbols 0..k-1.
struct FiniteDistribution {
  std::vector<double> weights;
};

struct Expectations {
  SymmetricMatrix log_abs;          // E log|L_1|
  SymmetricMatrix log_abs_adjoint;  // E log|L_1^T|
};

/// Exact probability-weighted sums of log|A(s)| and log|A(s)^T|.
inline Expectations exact_expectations(const Cocycle& coc, const FiniteDistribution& dist) {
  detail::check_probability_row(dist.weights, "symbol distribution");
  require(dist.weights.size() <= coc.images.size(), ErrorKind::UnknownSymbol,
          "distribution has more symbols than the cocycle");
  Expectations e{SymmetricMatrix::zero(coc.dim()), SymmetricMatrix::zero(coc.dim())};
  for (std::size_t s = 0; s < dist.weights.size(); ++s) {
    if (dist.weights[s] == 0.0) continue;
    e.log_abs += dist.weights[s] * log_abs(coc.images[s], coc.abs_det());
    e.log_abs_adjoint += dist.weights[s] * log_abs_adjoint(coc.images[s], coc.abs_det());
  }
  return e;
}

// ---------------------------------------------------------------------------
// Polymer blocks. Symbol 0 is '-' (all sites at potential -v, block B^{2p});
// symbol 1 is '+' (p sites at 0 and p at -v, block A^p B^p), with A the
// transfer matrix at a = E and B at b = E + v.

inline constexpr Symbol kPolymerMinus = 0;
inline constexpr Symbol kPolymerPlus = 1;

struct PolymerSystem {
  unsigned p = 2;
  double v = 0.0;
  double pp = 0.5;  // probability of '-'
  DynSystem sampler;
};

/// Stationary probability of symbol 0 under the sampler, when it is known
/// in closed form.
inline std::optional<double> symbol0_probability(const DynSystem& sys) {
  if (const auto* b = std::get_if<Bernoulli>(&sys.kind)) return b->p;
  if (const auto* m = std::get_if<Markov>(&sys.kind)) return stationary_distribution(*m).front();
  return std::nullopt;
}

inline void validate(const PolymerSystem& ps) {
  require(ps.p >= 1, ErrorKind::DomainError, "polymer half-length must be >= 1");
  require(std::isfinite(ps.v) && ps.v > 0.0, ErrorKind::DomainError, "potential depth must be > 0");
  require(ps.pp >= 0.0 && ps.pp <= 1.0, ErrorKind::DomainError, "block probability must lie in [0,1]");
  validate(ps.sampler);
  require(alphabet_size(ps.sampler) <= 2, ErrorKind::UnknownSymbol,
          "polymer sampler must emit two symbols");
  if (const auto q = symbol0_probability(ps.sampler))
    require(std::abs(*q - ps.pp) <= 1e-12, ErrorKind::DomainError,
            "sampler stationary probability differs from the block probability");
}

/// Block matrices as direct 2p-fold products of transfer matrices, as a
/// unimodular two-symbol cocycle {'-': B^{2p}, '+': A^p B^p}.
inline Cocycle polymer_cocycle(double energy, double v, unsigned p) {
  const RealSquareMatrix a = transfer(energy);
  const RealSquareMatrix b = transfer(energy + v);
  RealSquareMatrix minus = RealSquareMatrix::identity(2);
  RealSquareMatrix plus = RealSquareMatrix::identity(2);
  for (unsigned k = 0; k < 2 * p; ++k) {
    minus = b * minus;
    plus = (k < p ? b : a) * plus;
  }
  require(minus.all_finite() && plus.all_finite(), ErrorKind::DomainError,
          "polymer block overflows double precision");
  return Cocycle{{std::move(minus), std::move(plus)}, true};
}

inline std::vector<RealSquareMatrix> polymer_blocks(const PolymerSystem& ps, double energy,
                                                    std::size_t n_blocks,
                                                    std::uint64_t stream = 0) {
  validate(ps);
  return sample_cocycle(ps.sampler, polymer_cocycle(energy, ps.v, ps.p), n_blocks, stream);
}

// ---------------------------------------------------------------------------
// Symbol strings: "+-" for polymer symbols, digits otherwise.

inline std::vector<Symbol> parse_symbols(std::string_view text) {
  std::vector<Symbol> out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == '-') {
      out.push_back(kPolymerMinus);
    } else if (c == '+') {
      out.push_back(kPolymerPlus);
    } else if (c >= '0' && c <= '9') {
      out.push_back(static_cast<Symbol>(c - '0'));
    } else {
      fail(ErrorKind::UnknownSymbol, std::string("cannot parse symbol '") + c + "'");
    }
  }
  return out;
}

inline std::string format_symbols(std::span<const Symbol> symbols, bool polymer = false) {
  std::string out;
  out.reserve(symbols.size());
  for (Symbol s : symbols) {
    if (polymer) {
      require(s <= 1, ErrorKind::UnknownSymbol, "polymer symbols are 0 and 1");
      out.push_back(s == kPolymerMinus ? '-' : '+');
    } else {
      require(s <= 9, ErrorKind::UnknownSymbol, "only symbols 0..9 have a text form");
      out.push_back(static_cast<char>('0' + s));
    }
  }
  return out;
}

}  // namespace lyap
