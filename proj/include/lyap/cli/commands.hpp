#pragma once

// Subcommands: each maps validated parameters and a seed onto one module
// operation and records its inputs, certified values and measurements.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "../../lyap.hpp"
#include "config.hpp"
#include "report.hpp"

namespace lyap::cli {

using Runner = std::function<Report(const Params&, std::uint64_t seed)>;

struct Command {
  std::string name;
  std::string help;
  std::vector<KeySpec> keys;
  Runner run;
};

/// Slack of the 3-sigma Monte Carlo comparisons.
inline constexpr double kSigmas = 3.0;

namespace detail {

inline std::string indexed(const std::string& base, std::size_t i, const std::string& field) {
  return base + "[" + std::to_string(i) + "]." + field;
}

inline void add_mc(Report& r, const std::string& prefix, const MCResult& mc) {
  r.add(prefix + ".mean", mc.mean, prov::kMc);
  r.add(prefix + ".stderr", mc.std_error, prov::kMc);
  r.add(prefix + ".trials", static_cast<double>(mc.trials), prov::kInput);
  r.add(prefix + ".n", static_cast<double>(mc.n), prov::kInput);
}

inline void add_ap(Report& r, const std::string& prefix, const APReport& ap) {
  r.add(prefix + ".kappa", ap.kappa, prov::kMeasured);
  r.add(prefix + ".eps", ap.eps, prov::kMeasured);
  r.add(prefix + ".kappa_measured", ap.kappa_measured, prov::kMeasured);
  r.add(prefix + ".eps_measured", ap.eps_measured, prov::kMeasured);
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline Report cmd_example(const Params& p, std::uint64_t seed) {
  Report r;
  const double a = p.number("a"), b = p.number("b"), pp = p.number("pp");
  const auto n = p.count("n"), trials = p.count("trials");
  const auto t = example_triple(a, b, pp);
  r.add_bound("worst_case", t.worst_case);
  r.add_bound("gt_bound", t.gt_bound);
  r.add("upper_bound", t.upper_bound, prov::kFormula);
  const DynSystem sys{Bernoulli{pp}, seed};
  const auto mc = mc_lyapunov(sys, example_cocycle(a, b), n, trials, seed);
  detail::add_mc(r, "mc", mc);
  const double band = kSigmas * mc.std_error;
  r.check("worst_case_le_gt_bound", t.worst_case.value <= t.gt_bound.value + 1e-9);
  r.check("gt_bound_le_mc", t.gt_bound.value <= mc.mean + band);
  r.check("mc_le_upper_bound", mc.mean <= t.upper_bound + band);
  return r;
}

inline Report cmd_polymer(const Params& p, std::uint64_t seed) {
  Report r;
  const auto half = static_cast<unsigned>(p.count("p"));
  const double d1 = p.number("delta1"), d2 = p.number("delta2"), pp = p.number("pp");
  double energy = 0.0, v = 0.0;
  if (p.has("energy") || p.has("v")) {
    require(p.has("energy") && p.has("v"), ErrorKind::BadConfig,
            "energy and v must be given together");
    energy = p.number("energy");
    v = p.number("v");
  } else {
    const auto pt = admissible_polymer_point(half, d1, d2, p.number("theta"));
    energy = pt.energy;
    v = pt.v;
  }
  r.add("energy", energy, prov::kInput);
  r.add("v", v, prov::kInput);
  const auto pb = polymer_lower_bound(energy, v, half, pp, d1, d2);
  const auto& c = pb.certificate;
  r.add("theta", c.theta, prov::kMeasured);
  r.add("b", c.b, prov::kFormula);
  r.add("mu", c.mu, prov::kFormula);
  r.add("b0", c.b0, prov::kFormula);
  r.add("kappa", c.kappa, prov::kCertified);
  r.add("eps", c.eps, prov::kCertified);
  r.add("log_kappa", c.log_kappa, prov::kCertified);
  r.add("measured_log_kappa", c.measured_log_kappa, prov::kMeasured);
  r.add("measured_eps", c.measured_eps, prov::kMeasured);
  r.add_bound("ergodic_bound", pb.ergodic);
  r.add_bound("chain_bound", pb.chain);
  r.add_bound("certified_bound", pb.bound);
  r.add("certified_bound_per_site", pb.per_site(pb.bound.value), prov::kCertified);
  r.add("stated_bound_b", pb.stated_b_form, prov::kFormula);
  for (const auto& sp : spectral_points(half)) {
    r.add(detail::indexed("spectral_point", sp.k, "energy"), sp.energy, prov::kFormula);
    r.add(detail::indexed("spectral_point", sp.k, "distance_bound"), sp.distance_bound,
          prov::kFormula);
  }
  const auto sampler = p.text("sampler");
  DynSystem sys;
  sys.seed = seed;
  if (sampler == "bernoulli") {
    sys.kind = Bernoulli{pp};
  } else if (sampler == "markov") {
    sys.kind = markov_with_correlation(pp, p.number("rho"));
  } else {
    fail(ErrorKind::BadConfig, "sampler must be bernoulli or markov");
  }
  const PolymerSystem ps{half, v, pp, sys};
  validate(ps);
  const auto mc = mc_lyapunov(sys, polymer_cocycle(energy, v, half), p.count("n_blocks"),
                              p.count("trials"), seed);
  detail::add_mc(r, "mc_block_exponent", mc);
  r.check("certified_le_mc", pb.bound.value <= mc.mean + kSigmas * mc.std_error);
  return r;
}

inline std::vector<double> offspectrum_values(const Params& p, std::uint64_t seed) {
  const double r0 = p.number("r0"), r1 = p.number("r1");
  require(r1 >= r0, ErrorKind::BadConfig, "need r1 >= r0");
  const auto n = p.count("n");
  require(n >= 1, ErrorKind::BadConfig, "n must be >= 1");
  std::vector<double> r(n, r0);
  if (r1 > r0) {
    Rng rng(seed, 0);
    for (auto& x : r) x = (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(r0, r1);
  }
  return r;
}

inline Report cmd_offspectrum(const Params& p, std::uint64_t seed) {
  Report r;
  const auto values = offspectrum_values(p, seed);
  const auto o = off_spectrum_sandwich(values);
  r.add("r0", o.r0, prov::kMeasured);
  r.add("exponent", o.exponent, prov::kMeasured);
  r.add("reference", o.reference, prov::kFormula);
  r.add("measured_gap", o.measured_gap, prov::kMeasured);
  r.add_bound("bound", o.bound);
  detail::add_ap(r, "ap", o.report);
  double psi_err = 0.0, phi_err = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double direct = op_norm(transfer(values[k]));
    psi_err = std::max(psi_err, std::abs(exact_transfer_norm(values[k]) / direct - 1.0));
    if (k + 1 < values.size()) {
      const double pair = op_norm(transfer(values[k + 1]) * transfer(values[k]));
      phi_err = std::max(phi_err, std::abs(exact_pair_norm(values[k], values[k + 1]) / pair - 1.0));
    }
  }
  r.add("psi_max_rel_err", psi_err, prov::kMeasured);
  r.add("phi_max_rel_err", phi_err, prov::kMeasured);
  r.check("gap_le_bound", o.measured_gap <= o.bound.value + kGapTol);
  return r;
}

inline DiagonalClass diagonal_class(const Params& p) {
  return {p.number("gamma"), p.number("eta"), p.number("c0"), p.number("c1")};
}

inline Report cmd_stability(const Params& p, std::uint64_t seed) {
  Report r;
  const auto plan = blocking_plan(p.number("eps1"), diagonal_class(p));
  const auto dim = p.count("dim"), n = p.count("n"), families = p.count("families");
  require(families >= 1, ErrorKind::BadConfig, "families must be >= 1");
  const double delta = p.number("delta_fraction") * plan.delta0;
  r.add("nu", plan.nu, prov::kFormula);
  r.add("c2", plan.c2, prov::kFormula);
  r.add("c3", plan.c3, prov::kFormula);
  r.add("delta0", plan.delta0, prov::kFormula);
  r.add("delta", delta, prov::kInput);
  const auto results = parallel_map<StabilityResult>(families, [&](std::size_t i) {
    Rng rng(seed, i);
    const auto fam = random_diagonal_family(rng, plan.cls, dim, n, delta);
    return stability2_gap(fam.d, fam.m, plan);
  });
  double worst_gap = 0.0, min_slack = std::numeric_limits<double>::infinity();
  double worst_ratio = 0.0, min_log_gr = std::numeric_limits<double>::infinity();
  for (const auto& s : results) {
    worst_gap = std::max(worst_gap, s.measured_gap);
    min_slack = std::min(min_slack, s.certified.value - s.measured_gap);
    worst_ratio = std::max(worst_ratio, s.max_block_perturbation_ratio);
    min_log_gr = std::min(min_log_gr, s.min_log_block_gap);
  }
  r.add_bound("certified", results.front().certified);
  r.add("families", static_cast<double>(families), prov::kInput);
  r.add("blocks", static_cast<double>(results.front().blocks), prov::kMeasured);
  r.add("max_measured_gap", worst_gap, prov::kMeasured);
  r.add("min_slack", min_slack, prov::kMeasured);
  r.add("max_block_perturbation_ratio", worst_ratio, prov::kMeasured);
  r.add("min_log_block_gap_ratio", min_log_gr, prov::kMeasured);
  r.check("all_gaps_within_certified", min_slack >= -kGapTol);
  return r;
}

inline std::vector<double> jacobi_thetas(const Params& p, std::uint64_t seed) {
  const double lo = p.number("theta_lo"), hi = p.number("theta_hi");
  require(hi >= lo && lo > 0.0, ErrorKind::BadConfig, "need 0 < theta_lo <= theta_hi");
  Rng rng(seed, 0);
  std::vector<double> th(p.count("n"));
  for (auto& t : th) t = rng.uniform(lo, hi);
  return th;
}

inline Report cmd_jacobi(const Params& p, std::uint64_t seed) {
  Report r;
  const auto thetas = jacobi_thetas(p, seed);
  const double eps1 = p.number("eps1");
  const auto plan = jacobi_plan(thetas, eps1);
  const double energy = p.has("energy") ? p.number("energy") : p.number("energy_fraction") * plan.e0;
  r.add("regime_above_one", plan.regime == JacobiRegime::Above ? 1.0 : 0.0, prov::kMeasured);
  r.add("theta_min", plan.theta_min, prov::kMeasured);
  r.add("theta_max", plan.theta_max, prov::kMeasured);
  r.add("gamma", plan.cls.gamma, prov::kFormula);
  r.add("eta", plan.cls.eta, prov::kFormula);
  r.add("c0", plan.cls.c0, prov::kFormula);
  r.add("c1", plan.cls.c1, prov::kFormula);
  r.add("nu", plan.blocking.nu, prov::kFormula);
  r.add("delta0", plan.blocking.delta0, prov::kFormula);
  r.add("c", plan.c, prov::kFormula);
  r.add("e0", plan.e0, prov::kFormula);
  r.add("xi", plan.xi, prov::kFormula);
  r.add("energy", energy, prov::kInput);
  const auto res = jacobi_stability(energy, thetas, eps1);
  r.add("measured_gap", res.stability.measured_gap, prov::kMeasured);
  r.add_bound("certified", res.stability.certified);
  r.check("gap_le_certified", res.stability.measured_gap <= res.stability.certified.value + kGapTol);
  return r;
}

inline Report cmd_gt_check(const Params& p, std::uint64_t seed) {
  Report r;
  const auto families = p.count("families"), max_n = p.count("max_n"), max_d = p.count("max_d");
  require(families >= 1 && max_n >= 1 && max_d >= 1, ErrorKind::BadConfig,
          "families, max_n and max_d must be >= 1");
  const double scale = p.number("scale");
  const GTQuadrature quad{p.number("half_width"), p.count("nodes")};
  const auto checks = parallel_map<GTCheck>(families, [&](std::size_t i) {
    Rng rng(seed, i);
    const auto n = 1 + rng.below(max_n);
    const auto d = 1 + rng.below(max_d);
    const auto hs = random_hermitian_family(rng, n, d, scale);
    return gt_check(hs, quad);
  });
  double min_slack = std::numeric_limits<double>::infinity(), max_change = 0.0, max_tail = 0.0;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    if (checks[i].slack < min_slack) {
      min_slack = checks[i].slack;
      worst = i;
    }
    max_change = std::max(max_change, checks[i].doubling_change);
    max_tail = std::max(max_tail, checks[i].tail_allowance);
  }
  r.add("families", static_cast<double>(families), prov::kInput);
  r.add("min_slack", min_slack, prov::kMeasured);
  r.add("min_slack_family", static_cast<double>(worst), prov::kMeasured);
  r.add("max_doubling_change", max_change, prov::kMeasured);
  r.add("max_tail_allowance", max_tail, prov::kFormula);
  r.check("slack_nonnegative", min_slack >= -kGtSlackTol);
  r.check("quadrature_stable", max_change <= kGtDoublingTol);
  return r;
}

inline Report cmd_ap_check(const Params& p, std::uint64_t seed) {
  Report r;
  const auto params = ap_preset(p.text("preset"));
  std::vector<RealSquareMatrix> seq;
  if (p.has("matrices")) {
    seq = parse_matrices(p.raw("matrices"));
  } else {
    Rng rng(seed, 0);
    seq = aligned_diagonal_family(rng, p.count("n"), p.count("dim"), p.number("gap"),
                                  p.number("perturbation"));
  }
  const APOverrides ov{p.optional_number("kappa"), p.optional_number("eps")};
  const auto data = sequence_data(std::span<const RealSquareMatrix>(seq));
  const auto rep = check_ap(data, params, ov);
  r.add("n", static_cast<double>(seq.size()), prov::kInput);
  detail::add_ap(r, "ap", rep);
  r.add("ap.gap_ok", rep.gap_ok, prov::kMeasured);
  r.add("ap.align_ok", rep.align_ok, prov::kMeasured);
  r.add("ap.kappa_ok", rep.kappa_ok, prov::kMeasured);
  r.add("ap.eps_ok", rep.eps_ok, prov::kMeasured);
  r.add("ap.len_ok", rep.len_ok, prov::kMeasured);
  require_ap(rep, params);
  const auto s = ap_sandwich(std::span<const RealSquareMatrix>(seq), params, rep.kappa, rep.eps);
  r.add("sandwich.log_lower", s.log_lower, prov::kCertified);
  r.add("sandwich.log_middle", s.log_middle, prov::kMeasured);
  r.add("sandwich.log_upper", s.log_upper, prov::kCertified);
  r.add_bound("worst_case", worst_case_lower_bound(rep.kappa, rep.eps, params));
  r.add("exponent", finite_exponent(seq), prov::kMeasured);
  r.check("sandwich_holds", s.log_middle >= s.log_lower - kSandwichLogTol &&
                                s.log_middle <= s.log_upper + kSandwichLogTol);
  return r;
}

inline Report cmd_estimate(const Params& p, std::uint64_t seed) {
  Report r;
  Cocycle coc{parse_matrices(p.raw("matrices")), false};
  const auto sys = parse_sampler(p.raw("sampler"), seed);
  require(alphabet_size(sys) <= coc.images.size(), ErrorKind::BadConfig,
          "sampler emits more symbols than there are matrices");
  const auto mc = mc_lyapunov(sys, coc, p.count("n"), p.count("trials"), seed);
  detail::add_mc(r, "mc", mc);
  return r;
}

inline Report cmd_almost_commuting(const Params& p, std::uint64_t seed) {
  Report r;
  PDCocycleSample s;
  for (const auto& m : parse_matrices(p.raw("matrices"))) s.images.emplace_back(m);
  s.dist.weights = p.numbers("weights");
  s.c = p.number("c");
  const auto b = almost_commuting_bound(s);
  r.add_bound("bound", b);
  r.add("kappa_c", b.kappa, prov::kMeasured);
  DynSystem sys;
  sys.seed = seed;
  if (s.images.size() == 2) {
    sys.kind = Bernoulli{s.dist.weights[0]};
  } else {
    Markov m;
    for (std::size_t i = 0; i < s.images.size(); ++i) m.transition.push_back(s.dist.weights);
    m.initial = s.dist.weights;
    sys.kind = std::move(m);
  }
  const auto n = p.count("n"), trials = p.count("trials");
  const auto mc = gamma_t_probe(s, sys, 0.0, n, trials, seed);
  detail::add_mc(r, "gamma_0", mc);
  r.add("bound_le_mc", b.value <= mc.mean + kSigmas * mc.std_error, prov::kConditional);
  const auto ts = p.numbers("t_values");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto c = t_probe_check(s, sys, ts[i], n, trials, seed);
    r.add(detail::indexed("t_probe", i, "t"), c.t, prov::kInput);
    r.add(detail::indexed("t_probe", i, "gamma_t"), c.gamma_t, prov::kMc);
    r.add(detail::indexed("t_probe", i, "stderr"), c.std_error, prov::kMc);
    r.add(detail::indexed("t_probe", i, "penalty"), c.penalty, prov::kConditional);
    r.add(detail::indexed("t_probe", i, "holds"), c.holds, prov::kConditional);
  }
  return r;
}

// ---------------------------------------------------------------------------

inline const std::vector<Command>& commands() {
  static const std::vector<Command> table = {
      {"example",
       "two-symbol diagonal/rotated example: worst-case, Golden-Thompson and upper bounds vs Monte Carlo",
       {{"a", std::sqrt(1000.0), "diagonal entry of A_0"},
        {"b", std::sqrt(1000.0), "diagonal entry of A_1 before rotation"},
        {"pp", 0.5, "probability of A_0"},
        {"n", 100000, "orbit length"},
        {"trials", 20, "Monte Carlo trials"}},
       cmd_example},
      {"polymer",
       "certified lower bound for a polymer Schrodinger model vs Monte Carlo",
       {{"p", 4, "half block length"},
        {"delta1", 0.2, "angle margin from 0 and pi"},
        {"delta2", 0.2, "angle margin of (p+1) theta from the pi lattice"},
        {"theta", 1.0, "angle used to pick an admissible point when energy and v are unset"},
        {"energy", nullptr, "energy E"},
        {"v", nullptr, "potential depth"},
        {"pp", 0.6, "probability of the B^{2p} block"},
        {"sampler", "bernoulli", "bernoulli or markov"},
        {"rho", 0.8, "lag-one correlation of the markov sampler"},
        {"n_blocks", 10000, "blocks per orbit"},
        {"trials", 10, "Monte Carlo trials"}},
       cmd_polymer},
      {"offspectrum",
       "transfer matrices with |r_k| >= r0 >= 32: gap to (1/n) sum log|r_k|",
       {{"r0", 32.0, "smallest |r_k|"},
        {"r1", 32.0, "largest |r_k|; r1 > r0 draws |r_k| uniformly with random signs"},
        {"n", 10000, "sequence length"}},
       cmd_offspectrum},
      {"stability",
       "perturbed aligned diagonal families: blocked stability bound",
       {{"eps1", 0.4, "target accuracy"},
        {"gamma", 0.5, "gap constant Gamma"},
        {"eta", 0.1, "lower bound on the non-dominant moduli"},
        {"c0", 1.0, "lower bound on the dominant modulus"},
        {"c1", 2.0, "upper bound on the dominant modulus"},
        {"dim", 2, "matrix dimension"},
        {"n", 10000, "sequence length"},
        {"families", 1, "number of seeded families"},
        {"delta_fraction", 0.5, "perturbation size as a fraction of delta0"}},
       cmd_stability},
      {"jacobi",
       "Jacobi two-step transfer matrices near E = 0",
       {{"eps1", 0.3, "target accuracy"},
        {"theta_lo", 1.5, "theta drawn uniformly from [theta_lo, theta_hi]"},
        {"theta_hi", 2.5, ""},
        {"n", 10000, "sequence length"},
        {"energy", nullptr, "energy; defaults to energy_fraction * E0"},
        {"energy_fraction", 0.5, "energy as a fraction of E0"}},
       cmd_jacobi},
      {"gt-check",
       "n-matrix Golden-Thompson inequality on seeded random Hermitian families",
       {{"families", 1000, "number of families"},
        {"max_n", 5, "largest family size"},
        {"max_d", 4, "largest dimension"},
        {"scale", 0.5, "entry scale of the Hermitian matrices"},
        {"half_width", 9.0, "quadrature interval [-T, T]"},
        {"nodes", 4001, "coarse quadrature nodes"}},
       cmd_gt_check},
      {"ap-check",
       "Avalanche Principle hypotheses and sandwich on a sequence",
       {{"preset", "AP_V1", "AP_V1 or AP_V2"},
        {"n", 10, "generated sequence length"},
        {"dim", 2, "generated matrix dimension"},
        {"gap", 1e4, "dominant diagonal scale of generated matrices"},
        {"perturbation", 1e-3, "perturbation norm of generated matrices"},
        {"kappa", nullptr, "kappa override"},
        {"eps", nullptr, "eps override"},
        {"matrices", nullptr, "explicit sequence, replaces the generated one"}},
       cmd_ap_check},
      {"estimate",
       "Monte Carlo top Lyapunov exponent of a finite cocycle",
       {{"matrices", Json::parse("[[[2,0],[0,0.5]],[[1,1],[1,2]]]"), "symbol matrices"},
        {"sampler", Json::parse(R"({"kind":"bernoulli","p":0.5})"), "symbol dynamics"},
        {"n", 10000, "orbit length"},
        {"trials", 10, "Monte Carlo trials"}},
       cmd_estimate},
      {"almost-commuting",
       "positive definite almost-commuting cocycles (conditional on the rate constant c)",
       {{"matrices", Json::parse("[[[2,0],[0,0.5]],[[3,0.01],[0.01,1]]]"), "positive definite matrices"},
        {"weights", Json::parse("[0.5,0.5]"), "symbol probabilities"},
        {"c", 1.0, "convergence-rate constant c"},
        {"t_values", Json::parse("[0.5,1.0]"), "t values to probe"},
        {"n", 2000, "orbit length"},
        {"trials", 10, "Monte Carlo trials"}},
       cmd_almost_commuting},
  };
  return table;
}

inline const Command& find_command(const std::string& name) {
  for (const auto& c : commands())
    if (c.name == name) return c;
  fail(ErrorKind::BadConfig, "unknown command '" + name + "'");
}

/// Process exit code for a library error.
inline int exit_code(ErrorKind kind) {
  if (kind == ErrorKind::BadConfig) return 4;
  if (is_assertion_failure(kind)) return 3;
  return 2;
}

/// Runs a resolved configuration and renders the report.
inline std::string run_and_render(const RunConfig& rc, bool& pass) {
  const auto& cmd = find_command(rc.command);
  Report r = cmd.run(rc.params, rc.seed);
  r.command = rc.command;
  r.config = rc.echo();
  pass = r.pass;
  return render(r, rc.format, LYAP_VERSION);
}

}  // namespace lyap::cli
