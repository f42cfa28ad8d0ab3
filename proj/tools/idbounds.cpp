// idbounds: numerical bounds for identification via discrete memoryless
// channels.  Every subcommand emits a JSON (or CSV) report embedding a run
// manifest with the seed, generator name, input fingerprints, and
// tolerances, so all numbers are reproducible bit for bit.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "idbounds/io.hpp"
#include "idbounds/minimax.hpp"
#include "idbounds/parallel.hpp"
#include "idbounds/resolvability.hpp"
#include "idbounds/second_order.hpp"
#include "idbounds/selftest.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using idbounds::Json;

struct GlobalOpts {
  std::string format = "json";
  unsigned jobs = 1;
  std::uint64_t default_seed = 0;
};

Json distribution_json(const idbounds::Distribution& d) { return Json(d.probs()); }

Json manifest_json(const std::string& command_line, const GlobalOpts& g,
                   const Json& inputs, const Json& tolerances, std::uint64_t seed,
                   double duration_s) {
  Json m;
  m["command_line"] = command_line;
  m["tool"] = "idbounds";
  m["version"] = kVersion;
  m["generator"] = idbounds::kGeneratorName;
  m["inputs"] = inputs;
  m["tolerances"] = tolerances;
  m["seed"] = seed;
  m["jobs"] = g.jobs;
  m["duration_seconds"] = duration_s;
  return m;
}

void emit(const Json& report, const GlobalOpts& g) {
  if (g.format == "csv")
    std::cout << idbounds::io::to_csv(report);
  else
    std::cout << report.dump(2) << "\n";
}

Json converse_report_json(const idbounds::ConverseReport& rep) {
  Json j;
  j["bound_on_loglogN"] = rep.bound_on_loglogN;
  j["main_term"] = rep.main_term;
  j["slack"] = {{"loglog_alphabet", rep.slack.loglog_alphabet},
                {"eta_term", rep.slack.eta_term},
                {"constant", rep.slack.constant}};
  j["eta"] = rep.eta;
  j["variant"] = idbounds::to_string(rep.variant);
  if (std::isfinite(rep.surrogate_main)) j["surrogate_main"] = rep.surrogate_main;
  if (std::isfinite(rep.direct_grid_main)) j["direct_grid_main"] = rep.direct_grid_main;
  if (!rep.q_witness.empty()) j["q_witness"] = rep.q_witness;
  return j;
}

Json spectrum_json(const idbounds::SpectrumCDF& s, bool include_levels) {
  Json j;
  j["n"] = s.n;
  j["monte_carlo"] = s.monte_carlo;
  if (s.monte_carlo) {
    j["samples"] = s.samples;
    j["seed"] = s.seed;
  } else {
    j["merge_tolerance"] = s.merge_tol;
  }
  j["distinct_levels"] = s.values.size();
  j["mean"] = s.mean();
  j["variance"] = s.variance();
  if (include_levels) {
    j["values"] = s.values;
    j["probs"] = s.probs;
  }
  return j;
}

std::string join_argv(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += " ";
    s += argv[i];
  }
  return s;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

int run_selftest_cli() {
  auto results = idbounds::selfcheck::run_selftest();
  int failures = 0;
  for (const auto& r : results) {
    std::printf("[%s] %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    if (!r.pass) ++failures;
  }
  std::printf("%zu checks, %d failures\n", results.size(), failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace idbounds;
  const std::string command_line = join_argv(argc, argv);

  GlobalOpts g;
  if (const char* env_seed = std::getenv("IDBOUNDS_SEED"))
    g.default_seed = std::strtoull(env_seed, nullptr, 10);

  CLI::App app{"numerical bounds for identification via channels (all values in nats)"};
  app.set_version_flag("--version", kVersion);
  app.add_option("--format", g.format, "report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--jobs", g.jobs, "max parallel work items")->capture_default_str();
  bool selftest = false;
  app.add_flag("--selftest", selftest, "run the built-in verification battery and exit");
  app.require_subcommand(0, 1);

  // --- capacity ---
  std::string cap_channel;
  double cap_tol = 1e-8;
  auto* cap_cmd = app.add_subcommand("capacity", "channel capacity with duality certificate");
  cap_cmd->add_option("--channel", cap_channel, "channel file or builtin name")->required();
  cap_cmd->add_option("--tol", cap_tol, "certificate tolerance")->capture_default_str();

  // --- saddle ---
  std::string sad_channel;
  double sad_eps = 0.1, sad_tol = 1e-4;
  auto* sad_cmd = app.add_subcommand("saddle", "min-max / max-min of beta_eps(PxW, PxQ)");
  sad_cmd->add_option("--channel", sad_channel)->required();
  sad_cmd->add_option("--eps", sad_eps, "type-I error budget")->required();
  sad_cmd->add_option("--tol", sad_tol, "gap tolerance")->capture_default_str();

  // --- converse ---
  std::string con_channel, con_variant = "cor1";
  double con_eps = 0.1, con_delta = 0.1, con_eta = 0.05, con_tol = 1e-4, con_gamma = 0.0;
  std::int64_t con_m = 1;
  auto* con_cmd = app.add_subcommand("converse", "single-shot converse bounds on loglog N*");
  con_cmd->add_option("--channel", con_channel)->required();
  con_cmd->add_option("--eps", con_eps)->capture_default_str();
  con_cmd->add_option("--delta", con_delta)->capture_default_str();
  con_cmd->add_option("--eta", con_eta)->capture_default_str();
  con_cmd->add_option("--variant", con_variant)
      ->check(CLI::IsMember({"cor1", "cor2", "existing"}))
      ->capture_default_str();
  con_cmd->add_option("--tol", con_tol, "saddle tolerance (cor2)")->capture_default_str();
  con_cmd->add_option("--gamma", con_gamma, "threshold (existing variant)")->capture_default_str();
  con_cmd->add_option("--m", con_m, "type denominator M (existing variant)")->capture_default_str();

  // --- beta / dspec / lemma1 ---
  std::string b_p, b_q;
  double b_eps = 0.1;
  auto* beta_cmd = app.add_subcommand("beta", "optimal type-II error beta_eps(P, Q)");
  beta_cmd->add_option("--p", b_p, "null distribution file or name")->required();
  beta_cmd->add_option("--q", b_q, "alternative distribution file or name")->required();
  beta_cmd->add_option("--eps", b_eps)->required();

  std::string ds_p, ds_q;
  double ds_eps = 0.1;
  auto* ds_cmd = app.add_subcommand("dspec", "information-spectrum divergence D_s^eps(P || Q)");
  ds_cmd->add_option("--p", ds_p)->required();
  ds_cmd->add_option("--q", ds_q)->required();
  ds_cmd->add_option("--eps", ds_eps)->required();

  std::string l1_p, l1_q;
  double l1_eps = 0.2, l1_zeta = 0.1;
  int l1_sweep = 0;
  std::uint64_t l1_seed = g.default_seed;
  auto* l1_cmd = app.add_subcommand("lemma1", "sandwich between D_s^eps and -log beta_eps");
  l1_cmd->add_option("--p", l1_p);
  l1_cmd->add_option("--q", l1_q);
  l1_cmd->add_option("--eps", l1_eps)->capture_default_str();
  l1_cmd->add_option("--zeta", l1_zeta)->capture_default_str();
  l1_cmd->add_option("--sweep", l1_sweep, "random instances (overrides --p/--q)");
  l1_cmd->add_option("--seed", l1_seed);

  // --- softcover / thm1 ---
  std::string sc_channel, sc_input, sc_q;
  double sc_gamma = 0.0;
  std::int64_t sc_m = 100, sc_trials = 1000;
  std::uint64_t sc_seed = g.default_seed;
  auto* sc_cmd = app.add_subcommand("softcover", "random M-type covering of a partial response");
  sc_cmd->add_option("--channel", sc_channel)->required();
  sc_cmd->add_option("--input", sc_input, "input distribution P")->required();
  sc_cmd->add_option("--q", sc_q, "reference output distribution Q")->required();
  sc_cmd->add_option("--gamma", sc_gamma)->capture_default_str();
  sc_cmd->add_option("--m", sc_m, "type denominator M")->capture_default_str();
  sc_cmd->add_option("--trials", sc_trials)->capture_default_str();
  sc_cmd->add_option("--seed", sc_seed);

  std::string t1_channel, t1_q;
  double t1_gamma = 0.0;
  std::int64_t t1_m = 100;
  auto* t1_cmd = app.add_subcommand("thm1", "lower bound on eps+delta for N > |X|^M codes");
  t1_cmd->add_option("--channel", t1_channel)->required();
  t1_cmd->add_option("--q", t1_q)->required();
  t1_cmd->add_option("--gamma", t1_gamma)->capture_default_str();
  t1_cmd->add_option("--m", t1_m)->capture_default_str();

  // --- dispersion / second-order / spectrum / fbl ---
  std::string disp_channel;
  double disp_tol = 1e-8, disp_eps = 0.0;
  auto* disp_cmd = app.add_subcommand("dispersion", "capacity-achieving polytope and variances");
  disp_cmd->add_option("--channel", disp_channel)->required();
  disp_cmd->add_option("--tol", disp_tol)->capture_default_str();
  disp_cmd->add_option("--eps", disp_eps, "also report V_eps at this eps");

  std::string so_channel;
  double so_eps = 0.1;
  auto* so_cmd = app.add_subcommand("second-order", "sqrt(V_eps) Phi^{-1}(eps) coefficient");
  so_cmd->add_option("--channel", so_channel)->required();
  so_cmd->add_option("--eps", so_eps)->required();

  std::string sp_channel, sp_input, sp_q, sp_mode = "dp";
  std::int64_t sp_n = 1;
  std::size_t sp_samples = 100000;
  std::uint64_t sp_seed = g.default_seed;
  bool sp_levels = false;
  auto* sp_cmd = app.add_subcommand("spectrum", "finite-n information-spectrum CDF");
  sp_cmd->add_option("--channel", sp_channel)->required();
  sp_cmd->add_option("--input", sp_input)->required();
  sp_cmd->add_option("--q", sp_q)->required();
  sp_cmd->add_option("--n", sp_n)->required();
  sp_cmd->add_option("--mode", sp_mode)->check(CLI::IsMember({"dp", "mc"}))->capture_default_str();
  sp_cmd->add_option("--samples", sp_samples)->capture_default_str();
  sp_cmd->add_option("--seed", sp_seed);
  sp_cmd->add_flag("--levels", sp_levels, "include the full level list in the report");

  std::string fbl_channel, fbl_side = "converse";
  std::vector<std::int64_t> fbl_n;
  double fbl_eps = 0.1, fbl_delta = 0.0, fbl_eta = 0.0;
  std::size_t fbl_samples = 200000;
  std::uint64_t fbl_seed = g.default_seed;
  auto* fbl_cmd = app.add_subcommand("fbl", "finite-blocklength converse/achievability sweep");
  fbl_cmd->add_option("--channel", fbl_channel)->required();
  fbl_cmd->add_option("--n", fbl_n, "blocklengths (repeat or comma-separate)")
      ->required()
      ->delimiter(',');
  fbl_cmd->add_option("--eps", fbl_eps)->capture_default_str();
  fbl_cmd->add_option("--delta", fbl_delta)->capture_default_str();
  fbl_cmd->add_option("--eta", fbl_eta, "override the 1/sqrt(n) schedule (converse)");
  fbl_cmd->add_option("--side", fbl_side)
      ->check(CLI::IsMember({"converse", "achievability"}))
      ->capture_default_str();
  fbl_cmd->add_option("--samples", fbl_samples)->capture_default_str();
  fbl_cmd->add_option("--seed", fbl_seed);

  // --- idcode ---
  auto* idc_cmd = app.add_subcommand("idcode", "explicit identification codes");
  idc_cmd->require_subcommand(1);
  std::string ice_channel, ice_code;
  auto* ice_cmd = idc_cmd->add_subcommand("eval", "exact worst-case errors of a code file");
  ice_cmd->add_option("--channel", ice_channel)->required();
  ice_cmd->add_option("--code", ice_code)->required();
  std::string ics_channel;
  double ics_eps = 0.1, ics_delta = 0.1;
  std::uint64_t ics_budget = 20000, ics_seed = g.default_seed;
  auto* ics_cmd = idc_cmd->add_subcommand("search", "greedy lower-bound witness search");
  ics_cmd->add_option("--channel", ics_channel)->required();
  ics_cmd->add_option("--eps", ics_eps)->capture_default_str();
  ics_cmd->add_option("--delta", ics_delta)->capture_default_str();
  ics_cmd->add_option("--budget", ics_budget, "max candidate evaluations")->capture_default_str();
  ics_cmd->add_option("--seed", ics_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 64;
  }

  try {
    Timer timer;
    if (selftest) return run_selftest_cli();
    if (app.get_subcommands().empty()) {
      std::cerr << app.help() << "\n";
      return 64;
    }

    Json report;
    Json inputs, tolerances;
    std::uint64_t seed = g.default_seed;

    if (cap_cmd->parsed()) {
      io::LabeledChannel lc = io::load_channel(cap_channel);
      CapacityResult r = blahut_arimoto(lc.channel, cap_tol);
      report["command"] = "capacity";
      report["result"] = {{"capacity_nats", r.capacity},
                          {"input_dist", distribution_json(r.input_dist)},
                          {"output_dist", distribution_json(r.output_dist)},
                          {"iterations", r.iterations},
                          {"certificate_gap", r.gap}};
      inputs["channel"] = {{"source", lc.source}, {"hash", lc.hash}};
      tolerances["capacity"] = cap_tol;
    } else if (sad_cmd->parsed()) {
      io::LabeledChannel lc = io::load_channel(sad_channel);
      SaddleResult r = saddle_solve(lc.channel, sad_eps, sad_tol);
      report["command"] = "saddle";
      report["result"] = {{"minmax_value", r.minmax_value},
                          {"maxmin_value", r.maxmin_value},
                          {"gap", r.gap},
                          {"p_star", distribution_json(r.p_star)},
                          {"q_star", distribution_json(r.q_star)},
                          {"evaluations", r.evaluations},
                          {"eps", sad_eps}};
      inputs["channel"] = {{"source", lc.source}, {"hash", lc.hash}};
      tolerances["saddle_gap"] = sad_tol;
    } else if (con_cmd->parsed()) {
      io::LabeledChannel lc = io::load_channel(con_channel);
      report["command"] = "converse";
      inputs["channel"] = {{"source", lc.source}, {"hash", lc.hash}};
      if (con_variant == "cor1") {
        ConverseReport r = corollary1_bound(lc.channel, con_eps, con_delta, con_eta);
        report["result"] = converse_report_json(r);
        report["result"]["eps"] = con_eps;
        report["result"]["delta"] = con_delta;
      } else if (con_variant == "cor2") {
        Corollary2Result r = corollary2_bound(lc.channel, con_eps, con_delta, con_eta, con_tol);
        report["result"] = {{"minmax", converse_report_json(r.minmax)},
                            {"maxmin", converse_report_json(r.maxmin)},
                            {"saddle_gap", r.saddle.gap},
                            {"eps", con_eps},
                            {"delta", con_delta}};
        tolerances["saddle_gap"] = con_tol;
      } else {
        ExistingBoundReport r = existing_bound(lc.channel, con_gamma, con_m);
        report["result"] = {{"lower_bound_on_eps_plus_delta", r.value},
                            {"inf_term", r.inf_term},
                            {"penalty", r.penalty},
                            {"witness_p", r.witness_p},
                            {"gamma", r.gamma},
                            {"m", r.m},
                            {"variant", "existing_bound"}};
      }
    } else if (beta_cmd->parsed()) {
      Distribution p = io::load_distribution(b_p);
      Distribution q = io::load_distribution(b_q);
      BetaResult r = beta_epsilon(p, q, b_eps);
      report["command"] = "beta";
      report["result"] = {{"beta", r.beta},
                          {"type1", r.type1},
                          {"type2", r.type2},
                          {"threshold_nats", r.test.threshold},
                          {"reject_prob_at_threshold", r.test.reject_prob_at_threshold},
                          {"eps", b_eps}};
      inputs["p"] = b_p;
      inputs["q"] = b_q;
    } else if (ds_cmd->parsed()) {
      Distribution p = io::load_distribution(ds_p);
      Distribution q = io::load_distribution(ds_q);
      DsResult r = ds_epsilon(p, q, ds_eps);
      report["command"] = "dspec";
      report["result"] = {{"value_nats", r.value},
                          {"achieved_tail", r.achieved_tail},
                          {"infinite_ratio_present", r.infinite_ratio_present},
                          {"eps", ds_eps}};
      inputs["p"] = ds_p;
      inputs["q"] = ds_q;
    } else if (l1_cmd->parsed()) {
      report["command"] = "lemma1";
      seed = l1_seed;
      if (l1_sweep > 0) {
        RngStream rng{CounterRng{l1_seed}};
        int failures = 0;
        double worst_lower = kInf, worst_upper = kInf;
        for (int i = 0; i < l1_sweep; ++i) {
          std::size_t k = 2 + static_cast<std::size_t>(rng.next_word() % 7);
          Distribution p = selfcheck::random_distribution(rng, k, true);
          Distribution q = selfcheck::random_distribution(rng, k, true);
          double eps = 0.9 * rng.next_uniform();
          double zeta = 0.05 + 0.8 * rng.next_uniform() * (1.0 - eps - 0.1);
          if (!(zeta > 0.0 && zeta < 1.0 - eps)) zeta = 0.5 * (1.0 - eps);
          Lemma1Report rep = lemma1_check(p, q, eps, zeta);
          if (!rep.holds) ++failures;
          if (std::isfinite(rep.neg_log_beta)) {
            worst_lower = std::min(worst_lower, rep.neg_log_beta - rep.ds_eps);
            if (std::isfinite(rep.upper))
              worst_upper = std::min(worst_upper, rep.upper - rep.neg_log_beta);
          }
        }
        report["result"] = {{"instances", l1_sweep},
                            {"failures", failures},
                            {"holds", failures == 0},
                            {"worst_lower_margin", worst_lower},
                            {"worst_upper_margin", worst_upper}};
      } else {
        detail::check(!l1_p.empty() && !l1_q.empty(),
                      "lemma1: provide --p and --q, or --sweep <count>");
        Lemma1Report rep =
            lemma1_check(io::load_distribution(l1_p), io::load_distribution(l1_q), l1_eps,
                         l1_zeta);
        report["result"] = {{"ds_eps", rep.ds_eps},
                            {"neg_log_beta", rep.neg_log_beta},
                            {"ds_eps_plus_zeta", rep.ds_eps_plus_zeta},
                            {"log_inv_zeta", rep.log_inv_zeta},
                            {"upper", rep.upper},
                            {"holds", rep.holds},
                            {"eps", l1_eps},
                            {"zeta", l1_zeta}};
        inputs["p"] = l1_p;
        inputs["q"] = l1_q;
      }
    } else if (sc_cmd->parsed()) {
      io::LabeledChannel lc = io::load_channel(sc_channel);
      Distribution p = io::load_distribution(sc_input);
      Distribution q = io::load_distribution(sc_q);
      TruncationSet s = truncation_set(lc.channel, q, sc_gamma);
      seed = sc_seed;
      detail::check(sc_trials >= 1, "softcover: trials must be >= 1");
      std::vector<double> distances(static_cast<std::size_t>(sc_trials));
      CounterRng root{sc_seed};
      parallel_for(static_cast<std::size_t>(sc_trials), g.jobs, [&](std::size_t t) {
        distances[t] =
            soft_cover_sample(p, lc.channel, s, sc_m, root.split(t).seed).distance;
      });
      double mean = std::accumulate(distances.begin(), distances.end(), 0.0) /
                    static_cast<double>(sc_trials);
      double var = 0.0;
      double best = kInf;
      std::size_t best_t = 0;
      for (std::size_t t = 0; t < distances.size(); ++t) {
        var += (distances[t] - mean) * (distances[t] - mean);
        if (distances[t] < best) {
          best = distances[t];
          best_t = t;
        }
      }
      var /= std::max<double>(1.0, static_cast<double>(sc_trials - 1));
      double stderr_mean = std::sqrt(var / static_cast<double>(sc_trials));
      SoftCoverTrial best_trial =
          soft_cover_sample(p, lc.channel, s, sc_m, root.split(best_t).seed);
      report["command"] = "softcover";
      report["result"] = {
          {"bound", soft_cover_bound(sc_gamma, sc_m)},
          {"empirical_mean", mean},
          {"stderr_of_mean", stderr_mean},
          {"best_distance", best},
          {"best_trial_seed", best_trial.seed},
          {"best_mtype_counts", best_trial.mtype.counts()},
          {"trials", sc_trials},
          {"m", sc_m},
          {"gamma", sc_gamma},
          {"bound_claim_applies", best_trial.bound_claim_applies},
          {"mean_within_bound", mean <= soft_cover_bound(sc_gamma, sc_m) + 3.0 * stderr_mean}};
      inputs["channel"] = {{"source", lc.source}, {"hash", lc.hash}};
      inputs["input"] = sc_input;
      inputs["q"] = sc_q;
    } else if (t1_cmd->parsed()) {
      io::LabeledChannel lc = io::load_channel(t1_channel);
      Distribution q = io::load_distribution(t1_q);
      Theorem1Report r = theorem1_bound(lc.channel, q, t1_gamma, t1_m);
      report["command"] = "thm1";
      report["result"] = {{"lower_bound_on_eps_plus_delta", r.lower_bound_on_eps_plus_delta},
                          {"inf_term", r.inf_term},
                          {"penalty", r.penalty},
                          {"witness_x", r.witness_x},
                          {"gamma", r.gamma},
                          {"m", r.m},
                          {"applies_when_N_exceeds", "|X|^M"}};
      inputs["channel"] = {{"source", lc.source}, {"hash", lc.hash}};
      inputs["q"] = t1_q;
    } else if (disp_cmd->parsed()) {
      io::LabeledChannel lc = io::load_channel(disp_channel);
      DispersionReport r = dispersion_analysis(lc.channel, disp_tol);
      report["command"] = "dispersion";
      Json vertices = Json::array();
      for (const auto& v : r.pi_vertices) vertices.push_back(distribution_json(v));
      report["result"] = {{"capacity_nats", r.capacity},
                          {"output_dist", distribution_json(r.output_dist)},
                          {"active_inputs", r.active_inputs},
                          {"pi_vertices", vertices},
                          {"v_min", r.v_min},
                          {"v_max", r.v_max},
                          {"u_min", r.u_min},
                          {"u_max", r.u_max},
                          {"capacity_gap", r.capacity_gap}};
      if (disp_eps > 0.0) report["result"]["v_eps"] = r.v_eps_at(disp_eps);
      inputs["channel"] = {{"source", lc.source}, {"hash", lc.hash}};
      tolerances["capacity"] = disp_tol;
    } else if (so_cmd->parsed()) {
      io::LabeledChannel lc = io::load_channel(so_channel);
      double r = second_order_id_capacity(lc.channel, so_eps);
      report["command"] = "second-order";
      report["result"] = {{"coefficient_nats_per_sqrt_use", r}, {"eps", so_eps}};
      inputs["channel"] = {{"source", lc.source}, {"hash", lc.hash}};
    } else if (sp_cmd->parsed()) {
      io::LabeledChannel lc = io::load_channel(sp_channel);
      Distribution p = io::load_distribution(sp_input);
      Distribution q = io::load_distribution(sp_q);
      seed = sp_seed;
      SpectrumMode mode = sp_mode == "dp" ? SpectrumMode::dp()
                                          : SpectrumMode::mc(sp_samples, sp_seed);
      SpectrumCDF s = spectrum_cdf(p, lc.channel, q, sp_n, mode);
      report["command"] = "spectrum";
      report["result"] = spectrum_json(s, sp_levels || s.values.size() <= 64);
      inputs["channel"] = {{"source", lc.source}, {"hash", lc.hash}};
      inputs["input"] = sp_input;
      inputs["q"] = sp_q;
    } else if (fbl_cmd->parsed()) {
      io::LabeledChannel lc = io::load_channel(fbl_channel);
      seed = fbl_seed;
      report["command"] = "fbl";
      Json rows = Json::array();
      std::vector<Json> row_json(fbl_n.size());
      parallel_for(fbl_n.size(), g.jobs, [&](std::size_t i) {
        std::int64_t n = fbl_n[i];
        Json row;
        row["n"] = n;
        row["seed"] = fbl_seed;
        if (fbl_side == "converse") {
          FiniteNConverseOptions opts;
          opts.eta = fbl_eta;
          opts.mc_samples = fbl_samples;
          opts.seed = fbl_seed;
          FiniteNConverseReport r = finite_n_converse(lc.channel, n, fbl_eps, fbl_delta, opts);
          row["bound_on_loglogN"] = r.report.bound_on_loglogN;
          row["main_term"] = r.report.main_term;
          row["slack"] = r.report.slack.total();
          row["eta"] = r.report.eta;
          row["heuristic"] = r.heuristic;
          row["composition_invariant"] = r.composition_invariant;
          row["monte_carlo_spectrum"] = r.monte_carlo_spectrum;
          row["witness_composition"] = r.witness_composition;
        } else {
          AchievabilityOptions opts;
          opts.mc_samples = fbl_samples;
          opts.seed = fbl_seed;
          AchievabilityReport r = achievability_rate(lc.channel, n, fbl_eps, opts);
          row["loglogN"] = r.loglog_n;
          row["bound_on_loglogN"] = r.loglog_n;  // achieved value
          row["main_term"] = r.rate_r * static_cast<double>(n);
          row["slack"] = r.rate_r * static_cast<double>(n) - r.loglog_n;
          row["rate_r"] = r.rate_r;
          row["eps_n"] = r.eps_n;
          row["delta_n"] = r.delta_n_schedule;
          row["delta_bound_exact"] = r.delta_bound_exact;
          row["f_constant"] = r.f_constant;
          row["monte_carlo"] = r.monte_carlo;
        }
        row_json[i] = std::move(row);
      });
      for (auto& r : row_json) rows.push_back(std::move(r));
      report["result"] = {{"side", fbl_side},
                          {"eps", fbl_eps},
                          {"delta", fbl_delta},
                          {"rows", rows}};
      inputs["channel"] = {{"source", lc.source}, {"hash", lc.hash}};
      if (g.format == "csv") {
        // sweep table: n, bound, main term, slack, seed
        std::cout << "n,bound,main_term,slack,seed\n";
        for (const auto& row : rows) {
          std::cout << row.at("n").dump() << "," << row.at("bound_on_loglogN").dump() << ","
                    << row.at("main_term").dump() << "," << row.at("slack").dump() << ","
                    << row.at("seed").dump() << "\n";
        }
        return 0;
      }
    } else if (ice_cmd->parsed()) {
      io::LabeledChannel lc = io::load_channel(ice_channel);
      IDCode code = io::load_idcode(ice_code);
      IDCodeEvaluation ev = evaluate(code, lc.channel);
      report["command"] = "idcode eval";
      report["result"] = {{"type1", ev.type1},
                          {"type2", ev.type2},
                          {"worst_type1_index", ev.worst_type1_index},
                          {"worst_pair", {ev.worst_pair.first, ev.worst_pair.second}},
                          {"pair_defined", ev.pair_defined},
                          {"messages", code.size()}};
      inputs["channel"] = {{"source", lc.source}, {"hash", lc.hash}};
      inputs["code"] = ice_code;
    } else if (ics_cmd->parsed()) {
      io::LabeledChannel lc = io::load_channel(ics_channel);
      seed = ics_seed;
      SearchResult r = search_codes(lc.channel, ics_eps, ics_delta,
                                    SearchBudget{ics_budget, 0}, ics_seed);
      report["command"] = "idcode search";
      Json encoders = Json::array();
      for (const auto& e : r.code.encoders) encoders.push_back(distribution_json(e));
      report["result"] = {{"messages", r.code.size()},
                          {"type1", r.evaluation.type1},
                          {"type2", r.evaluation.type2},
                          {"encoders", encoders},
                          {"acceptors", r.code.acceptors},
                          {"candidates_examined", r.candidates_examined},
                          {"eps", ics_eps},
                          {"delta", ics_delta},
                          {"optimality_claimed", false}};
      inputs["channel"] = {{"source", lc.source}, {"hash", lc.hash}};
    }

    report["manifest"] =
        manifest_json(command_line, g, inputs, tolerances, seed, timer.seconds());
    emit(report, g);
    return 0;
  } catch (const idbounds::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const idbounds::CapExceededError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const idbounds::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
