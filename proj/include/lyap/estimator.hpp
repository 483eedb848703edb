#pragma once

// Finite-n Lyapunov exponents through norm-renormalized products, and a
// seeded Monte Carlo harness whose results do not depend on thread count.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"
#include "matan.hpp"
#include "matrix.hpp"
#include "parallel.hpp"

namespace lyap {

struct MCResult {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(trials)
  std::size_t trials = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::vector<double> samples;  // per-trial values, trial order
};

namespace detail {

template <Scalar T>
bool is_singular(const Matrix<T>& m) {
  if constexpr (!is_complex<T>::value) {
    if (m.dim() == 2) return det2_accurate(m(0, 0), m(0, 1), m(1, 0), m(1, 1)) == 0.0;
  }
  return singular_values(m).smallest() == 0.0;
}

}  // namespace detail

/// log||L_n...L_1|| for a sequence in application order.
template <Scalar T>
double log_product_norm(std::span<const Matrix<T>> seq) {
  require(!seq.empty(), ErrorKind::DomainError, "empty sequence");
  RenormProduct<T> prod(seq.front().dim());
  for (const auto& l : seq) {
    require_finite(l);
    require(!detail::is_singular(l), ErrorKind::DegenerateMatrix, "singular matrix in sequence");
    prod.push(l);
  }
  return prod.log_norm();
}

/// (1/n) log||L_n...L_1||.
template <Scalar T>
double finite_exponent(std::span<const Matrix<T>> seq) {
  return log_product_norm(seq) / static_cast<double>(seq.size());
}

template <Scalar T>
double finite_exponent(const std::vector<Matrix<T>>& seq) {
  return finite_exponent(std::span<const Matrix<T>>(seq));
}

/// Mean and standard error of per-trial values. Sums are pairwise so the
/// result depends only on the values in trial order.
inline MCResult summarize(std::vector<double> samples, std::size_t n, std::uint64_t seed) {
  MCResult r;
  r.trials = samples.size();
  r.n = n;
  r.seed = seed;
  require(r.trials >= 1, ErrorKind::DomainError, "need at least one trial");
  r.mean = pairwise_sum(samples) / static_cast<double>(r.trials);
  if (r.trials > 1) {
    std::vector<double> dev(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double d = samples[i] - r.mean;
      dev[i] = d * d;
    }
    const double var = pairwise_sum(dev) / static_cast<double>(r.trials - 1);
    r.std_error = std::sqrt(var / static_cast<double>(r.trials));
  }
  r.samples = std::move(samples);
  return r;
}

/// Runs trial(i) for i in [0, trials) across worker threads.
inline MCResult mc_run(std::size_t trials, std::size_t n, std::uint64_t seed,
                       const std::function<double(std::uint64_t)>& trial) {
  require(trials >= 1 && n >= 1, ErrorKind::DomainError, "n and trials must be >= 1");
  auto values = parallel_map<double>(trials, [&](std::size_t i) { return trial(i); });
  return summarize(std::move(values), n, seed);
}

/// Exponent of one orbit of length n; trial `stream` of `seed`.
inline double orbit_exponent(const DynSystem& sys, const Cocycle& coc, std::size_t n,
                             std::uint64_t seed, std::uint64_t stream) {
  DynSystem s = sys;
  s.seed = seed;
  const auto symbols = orbit_symbols(s, n, stream);
  RenormProduct<double> prod(coc.dim());
  for (Symbol sym : symbols) prod.push(coc(sym));
  return prod.exponent();
}

/// Monte Carlo estimate of the top Lyapunov exponent: mean over trials of
/// (1/n) log||A(T^{n-1}x)...A(x)||, trial i seeded by derive_seed(seed, i).
inline MCResult mc_lyapunov(const DynSystem& sys, const Cocycle& coc, std::size_t n,
                            std::size_t trials, std::uint64_t seed) {
  validate(sys);
  validate(coc);
  return mc_run(trials, n, seed,
                [&](std::uint64_t i) { return orbit_exponent(sys, coc, n, seed, i); });
}

}  // namespace lyap
