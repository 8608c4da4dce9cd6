// blsac: reproducible experiment runner for the bandlimited soft actor-critic
// laboratory. Every subcommand is deterministic given --seed; outputs embed
// the fully resolved configuration and the tool version. Exit codes:
// 0 success, 2 configuration error, 3 numeric failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "blsac/blsac.hpp"
#include "blsac/parallel.hpp"
#include "blsac/serialize.hpp"

namespace {

using blsac::derive_seed;
using json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

void emit(const std::string& out_path, const std::string& payload) {
  if (out_path.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
  if (!file) throw ConfigError("cannot open output file: " + out_path);
  file << payload;
}

std::string csv_document(const std::string& command, const ConfigEcho& config,
                         const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::string doc = "# blsac " + std::string(blsac::kVersion) + "\n";
  doc += "# command=" + command + "\n";
  for (const auto& [key, value] : config) doc += "# " + key + "=" + value + "\n";
  for (std::size_t i = 0; i < header.size(); ++i)
    doc += (i ? "," : "") + header[i];
  doc += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) doc += (i ? "," : "") + row[i];
    doc += "\n";
  }
  return doc;
}

json json_preamble(const std::string& command, const ConfigEcho& config) {
  json j;
  j["tool"] = "blsac";
  j["version"] = blsac::kVersion;
  j["command"] = command;
  json cfg;
  for (const auto& [key, value] : config) cfg[key] = value;
  j["config"] = cfg;
  return j;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.begin(), v.end());
}

// Policy at a temperature token: "inf" is the exact uniform limit, otherwise
// the Boltzmann policy of the instance's reference soft values.
blsac::SoftPolicy policy_for_temperature(const blsac::DiscreteMdp& mdp, const std::string& token) {
  if (token == "inf" || token == "uniform")
    return blsac::uniform_policy(mdp.n_states, mdp.n_actions(), 1.0);
  const double alpha = std::stod(token);
  if (!(alpha > 0.0)) throw ConfigError("temperature must be positive (or 'inf'): " + token);
  return blsac::boltzmann_reference_policy(mdp, alpha);
}

// ---------------------------------------------------------------------------
// filter-response

struct FilterResponseCmd {
  double sigma = 0.5;
  int k = 4;
  int grid = 64;
  std::string boundary = "periodic";
  std::uint64_t seed = 0;
  std::string out, format = "csv";

  ConfigEcho config() const {
    return {{"sigma", fmt(sigma)}, {"k", std::to_string(k)},    {"grid", std::to_string(grid)},
            {"boundary", boundary}, {"seed", std::to_string(seed)}, {"format", format}};
  }

  int run() const {
    const auto filter = blsac::design_filter(sigma, k, blsac::boundary_mode_from_string(boundary));
    const Eigen::VectorXd gains = blsac::frequency_response(filter, grid);
    if (format == "csv") {
      std::vector<std::vector<std::string>> rows;
      for (Eigen::Index m = 0; m < gains.size(); ++m)
        rows.push_back({fmt(blsac::kPi * m), fmt(gains(m))});
      emit(out, csv_document("filter-response", config(), {"w", "gain"}, rows));
    } else {
      json j = json_preamble("filter-response", config());
      j["filter"] = {{"K", filter.half_width},
                     {"sigma", filter.sigma},
                     {"cutoff", filter.cutoff},
                     {"weights", to_vector(filter.weights)},
                     {"shifts", to_vector(filter.shifts)},
                     {"normalization", filter.normalization}};
      std::vector<double> w(gains.size());
      for (Eigen::Index m = 0; m < gains.size(); ++m) w[m] = blsac::kPi * m;
      j["w"] = w;
      j["gain"] = to_vector(gains);
      emit(out, j.dump(2) + "\n");
    }
    return 0;
  }
};

// ---------------------------------------------------------------------------
// gauss-conv

struct GaussConvCmd {
  double sigma = 0.5;
  double mu = 0.0;
  int grid = 64;
  long samples = 0;  // 0: skip the Monte Carlo column
  std::uint64_t seed = 0;
  std::string out, format = "csv";

  ConfigEcho config() const {
    return {{"sigma", fmt(sigma)},   {"mu", fmt(mu)},
            {"grid", std::to_string(grid)}, {"samples", std::to_string(samples)},
            {"seed", std::to_string(seed)}, {"format", format}};
  }

  int run() const {
    const Eigen::VectorXd grid_points = blsac::uniform_action_grid(grid);
    std::vector<std::string> header = {"w", "analytic_gain", "measured_attenuation"};
    if (samples > 0) {
      header.push_back("mc_estimate");
      header.push_back("mc_std_error");
    }
    std::vector<std::vector<std::string>> rows;
    json j = json_preamble("gauss-conv", config());
    json table = json::array();
    for (int m = 0; m <= grid / 2; ++m) {
      const double w = blsac::kPi * m;
      const auto probe = [&](double a) { return std::cos(w * (a - mu)); };
      Eigen::VectorXd q(grid);
      for (int i = 0; i < grid; ++i) q(i) = probe(grid_points(i));
      const double analytic = blsac::gaussian_kernel_gain(sigma, w);
      const double measured = blsac::conv_expected_q(q, mu, sigma);
      std::vector<std::string> row = {fmt(w), fmt(analytic), fmt(measured)};
      json entry = {{"w", w}, {"analytic_gain", analytic}, {"measured_attenuation", measured}};
      if (samples > 0) {
        const auto mc = blsac::mc_expected_q(probe, mu, sigma, samples, derive_seed(seed, m));
        row.push_back(fmt(mc.mean));
        row.push_back(fmt(mc.std_error));
        entry["mc_estimate"] = mc.mean;
        entry["mc_std_error"] = mc.std_error;
      }
      rows.push_back(row);
      table.push_back(entry);
    }
    if (format == "csv") {
      emit(out, csv_document("gauss-conv", config(), header, rows));
    } else {
      j["rows"] = table;
      emit(out, j.dump(2) + "\n");
    }
    return 0;
  }
};

// ---------------------------------------------------------------------------
// solve-fixedpoint

struct SolveFixedpointCmd {
  int states = 2;
  int actions = 8;
  int k = 0;   // 0: complete basis
  int kl = 0;  // 0: default split
  double gamma = 0.99;
  std::string alpha = "1";
  double eps_mix = 1e-3;
  std::uint64_t seed = 0;
  std::string out, format = "json";

  ConfigEcho config() const {
    return {{"states", std::to_string(states)}, {"actions", std::to_string(actions)},
            {"k", std::to_string(k)},           {"kl", std::to_string(kl)},
            {"gamma", fmt(gamma)},              {"alpha", alpha},
            {"eps_mix", fmt(eps_mix)},          {"seed", std::to_string(seed)},
            {"format", format}};
  }

  int run() const {
    const blsac::DiscreteMdp mdp = blsac::random_mdp(derive_seed(seed, 0), states, actions, gamma);
    const blsac::SoftPolicy policy = policy_for_temperature(mdp, alpha);
    const int k_eff = k > 0 ? k : actions;
    const int kl_eff = kl > 0 ? kl : blsac::default_split(actions, k_eff);
    const auto features = blsac::make_features(mdp, k_eff, kl_eff);
    const Eigen::MatrixXd p_pi = blsac::build_transition_matrix(mdp, policy);
    const Eigen::VectorXd density = blsac::visitation_density(p_pi, eps_mix);
    const auto coupling = blsac::build_coupling(features, density, p_pi, gamma);
    const auto soft_rewards = blsac::soft_reward_coefficients(
        features, density, p_pi, mdp.rewards,
        blsac::expand_per_state(policy.entropy_terms, actions), gamma);
    const auto classic = blsac::solve_classic(coupling, soft_rewards);
    const auto bandlimited = blsac::solve_bandlimited(coupling, soft_rewards);
    const auto lowres = blsac::solve_lowres(coupling, soft_rewards);
    const auto report = blsac::attenuation_report(coupling);
    const double decomposition = blsac::decomposition_identity_error(bandlimited, lowres, coupling);

    if (format == "json") {
      json j = json_preamble("solve-fixedpoint", config());
      j["instance"] = {{"k", k_eff}, {"kl", kl_eff}};
      j["norms"] = {{"v_lh_spectral", report.v_lh_spectral},
                    {"v_lh_frobenius", report.v_lh_frobenius},
                    {"delta_lh_spectral", report.delta_lh_spectral},
                    {"delta_lh_frobenius", report.delta_lh_frobenius},
                    {"gamma_lh_spectral", report.gamma_lh_spectral},
                    {"gamma_lh_frobenius", report.gamma_lh_frobenius},
                    {"delta_ll_condition", coupling.delta_ll_condition}};
      j["residuals"] = {{"classic", classic.residual_norm},
                        {"bandlimited", bandlimited.residual_norm},
                        {"lowres", lowres.residual_norm},
                        {"decomposition_identity", decomposition}};
      j["omega"] = {{"classic_low", to_vector(classic.omega_low)},
                    {"classic_high", to_vector(classic.omega_high)},
                    {"bandlimited_low", to_vector(bandlimited.omega_low)},
                    {"bandlimited_high", to_vector(bandlimited.omega_high)},
                    {"lowres_low", to_vector(lowres.omega_low)}};
      emit(out, j.dump(2) + "\n");
    } else {
      std::vector<std::vector<std::string>> rows{{
          std::to_string(seed), alpha, fmt(gamma), std::to_string(k_eff), std::to_string(kl_eff),
          fmt(report.v_lh_frobenius), fmt(report.delta_lh_frobenius), fmt(report.gamma_lh_frobenius),
          fmt(classic.residual_norm), fmt(bandlimited.residual_norm), fmt(lowres.residual_norm),
          fmt(decomposition)}};
      emit(out, csv_document("solve-fixedpoint", config(),
                             {"seed", "alpha", "gamma", "k", "kl", "v_lh_frobenius",
                              "delta_lh_frobenius", "gamma_lh_frobenius", "classic_residual",
                              "bandlimited_residual", "lowres_residual", "decomposition_identity"},
                             rows));
    }
    return 0;
  }
};

// ---------------------------------------------------------------------------
// decoupling-sweep

struct DecouplingSweepCmd {
  std::string alphas = "1e3,1,0.05";
  int states = 2;
  int actions = 8;
  int k = 0;
  int kl = 0;
  double gamma = 0.99;
  double eps_mix = 1e-3;
  int threads = 1;
  std::uint64_t seed = 0;
  std::string out, format = "csv";

  ConfigEcho config() const {
    return {{"alphas", alphas},  {"states", std::to_string(states)},
            {"actions", std::to_string(actions)}, {"k", std::to_string(k)},
            {"kl", std::to_string(kl)}, {"gamma", fmt(gamma)},
            {"eps_mix", fmt(eps_mix)},  {"threads", std::to_string(threads)},
            {"seed", std::to_string(seed)}, {"format", format}};
  }

  int run() const {
    std::vector<std::string> tokens;
    {
      std::string current;
      for (char c : alphas) {
        if (c == ',') {
          if (!current.empty()) tokens.push_back(current);
          current.clear();
        } else {
          current += c;
        }
      }
      if (!current.empty()) tokens.push_back(current);
    }
    if (tokens.empty()) throw ConfigError("alphas: empty temperature list");

    const blsac::DiscreteMdp mdp = blsac::random_mdp(derive_seed(seed, 0), states, actions, gamma);
    const int k_eff = k > 0 ? k : actions;
    const int kl_eff = kl > 0 ? kl : blsac::default_split(actions, k_eff);
    const auto features = blsac::make_features(mdp, k_eff, kl_eff);

    struct Row {
      std::string alpha;
      blsac::AttenuationReport report;
    };
    const auto rows = blsac::parallel_map<Row>(
        static_cast<int>(tokens.size()), threads, [&](int i) {
          const blsac::SoftPolicy policy = policy_for_temperature(mdp, tokens[i]);
          const Eigen::MatrixXd p_pi = blsac::build_transition_matrix(mdp, policy);
          const Eigen::VectorXd density = blsac::visitation_density(p_pi, eps_mix);
          const auto coupling = blsac::build_coupling(features, density, p_pi, gamma);
          return Row{tokens[i], blsac::attenuation_report(coupling)};
        });

    if (format == "csv") {
      std::vector<std::vector<std::string>> table;
      for (const auto& row : rows)
        table.push_back({row.alpha, fmt(row.report.v_lh_frobenius), fmt(row.report.delta_lh_frobenius),
                         fmt(row.report.gamma_lh_frobenius), fmt(row.report.v_lh_spectral),
                         fmt(row.report.delta_lh_spectral), fmt(row.report.gamma_lh_spectral)});
      emit(out, csv_document("decoupling-sweep", config(),
                             {"alpha", "v_lh_frobenius", "delta_lh_frobenius", "gamma_lh_frobenius",
                              "v_lh_spectral", "delta_lh_spectral", "gamma_lh_spectral"},
                             table));
    } else {
      json j = json_preamble("decoupling-sweep", config());
      json table = json::array();
      for (const auto& row : rows)
        table.push_back({{"alpha", row.alpha},
                         {"v_lh_frobenius", row.report.v_lh_frobenius},
                         {"delta_lh_frobenius", row.report.delta_lh_frobenius},
                         {"gamma_lh_frobenius", row.report.gamma_lh_frobenius},
                         {"v_lh_spectral", row.report.v_lh_spectral},
                         {"delta_lh_spectral", row.report.delta_lh_spectral},
                         {"gamma_lh_spectral", row.report.gamma_lh_spectral}});
      j["rows"] = table;
      emit(out, j.dump(2) + "\n");
    }
    return 0;
  }
};

// ---------------------------------------------------------------------------
// tabular-sac

struct TabularSacCmd {
  std::string variant = "classic";
  int states = 1;
  int actions = 16;
  int k = 0;
  int kl = 0;
  double alpha = 0.3;
  double gamma = 0.5;
  int iters = 20;
  int eval_iters = 4000;
  int filter_k = 2;
  double eps_mix = 1e-3;
  std::uint64_t seed = 0;
  std::string out, format = "csv";

  ConfigEcho config() const {
    return {{"variant", variant}, {"states", std::to_string(states)},
            {"actions", std::to_string(actions)}, {"k", std::to_string(k)},
            {"kl", std::to_string(kl)}, {"alpha", fmt(alpha)},
            {"gamma", fmt(gamma)},      {"iters", std::to_string(iters)},
            {"eval_iters", std::to_string(eval_iters)}, {"filter_k", std::to_string(filter_k)},
            {"eps_mix", fmt(eps_mix)},  {"seed", std::to_string(seed)},
            {"format", format}};
  }

  static blsac::EvalVariant parse_variant(const std::string& name) {
    if (name == "classic") return blsac::EvalVariant::kClassic;
    if (name == "bandlimited-ideal") return blsac::EvalVariant::kBandlimitedIdeal;
    if (name == "bandlimited-sinc") return blsac::EvalVariant::kBandlimitedSinc;
    if (name == "lowres") return blsac::EvalVariant::kLowRes;
    throw ConfigError("variant: expected classic|bandlimited-ideal|bandlimited-sinc|lowres, got " + name);
  }

  int run() const {
    const blsac::DiscreteMdp mdp = blsac::random_mdp(derive_seed(seed, 0), states, actions, gamma);
    blsac::SacOptions options;
    options.feature_count = k;
    options.low_count = kl;
    options.filter_half_width = filter_k;
    options.eval_iterations = eval_iters;
    options.outer_iterations = iters;
    options.eps_mix = eps_mix;
    const auto result = blsac::soft_policy_iteration(mdp, alpha, parse_variant(variant), options);

    if (format == "csv") {
      std::vector<std::vector<std::string>> rows;
      for (std::size_t i = 0; i < result.trace.size(); ++i)
        rows.push_back({std::to_string(i), fmt(result.trace[i].eval_residual),
                        fmt(result.trace[i].expected_return)});
      emit(out, csv_document("tabular-sac", config(), {"iteration", "residual", "return"}, rows));
    } else {
      json j = json_preamble("tabular-sac", config());
      json trace = json::array();
      for (std::size_t i = 0; i < result.trace.size(); ++i)
        trace.push_back({{"iteration", i},
                         {"residual", result.trace[i].eval_residual},
                         {"return", result.trace[i].expected_return},
                         {"mean_entropy", result.trace[i].mean_entropy},
                         {"filter_sigma", result.trace[i].filter_sigma}});
      j["trace"] = trace;
      json probs = json::array();
      for (int s = 0; s < result.policy.n_states(); ++s) {
        std::vector<double> row(result.policy.n_actions());
        for (int a = 0; a < result.policy.n_actions(); ++a) row[a] = result.policy.probs(s, a);
        probs.push_back(row);
      }
      j["final_policy"] = probs;
      j["final_q"] = to_vector(result.q_values);
      emit(out, j.dump(2) + "\n");
    }
    return 0;
  }
};

// ---------------------------------------------------------------------------
// noise-study

struct NoiseStudyCmd {
  std::string variant = "both";
  int instances = 10;
  int seeds = 30;
  int states = 2;
  int actions = 8;
  int k = 0;
  int kl = 0;
  double gamma = 0.99;
  std::string alpha = "1e3";
  double amplitude = 0.1;
  double eps_mix = 1e-3;
  int threads = 1;
  std::uint64_t seed = 0;
  std::string out, format = "json";

  ConfigEcho config() const {
    return {{"variant", variant}, {"instances", std::to_string(instances)},
            {"seeds", std::to_string(seeds)}, {"states", std::to_string(states)},
            {"actions", std::to_string(actions)}, {"k", std::to_string(k)},
            {"kl", std::to_string(kl)}, {"gamma", fmt(gamma)},
            {"alpha", alpha},           {"amplitude", fmt(amplitude)},
            {"eps_mix", fmt(eps_mix)},  {"threads", std::to_string(threads)},
            {"seed", std::to_string(seed)}, {"format", format}};
  }

  int run() const {
    const bool want_classic = variant == "both" || variant == "classic";
    const bool want_bandlimited = variant == "both" || variant == "bandlimited";
    if (!want_classic && !want_bandlimited)
      throw ConfigError("variant: expected both|classic|bandlimited, got " + variant);

    struct Item {
      int instance = 0, noise_seed = 0;
      double classic_norm = 0.0, bandlimited_norm = 0.0;
      double classic_gap = 0.0, bandlimited_gap = 0.0;
    };
    const int total = instances * seeds;
    const auto items = blsac::parallel_map<Item>(total, threads, [&](int idx) {
      const int instance = idx / seeds;
      const int noise_index = idx % seeds;
      const blsac::DiscreteMdp mdp =
          blsac::random_mdp(derive_seed(seed, 17 + instance), states, actions, gamma);
      const blsac::SoftPolicy policy = policy_for_temperature(mdp, alpha);
      const int k_eff = k > 0 ? k : actions;
      const int kl_eff = kl > 0 ? kl : blsac::default_split(actions, k_eff);
      const auto features = blsac::make_features(mdp, k_eff, kl_eff);
      blsac::Rng rng(derive_seed(seed, 1000003ULL * (instance + 1) + noise_index));
      const Eigen::VectorXd eps_r = blsac::random_high_frequency_noise(rng, features, amplitude);
      Item item;
      item.instance = instance;
      item.noise_seed = noise_index;
      if (want_classic) {
        const auto shift = blsac::noise_shift(mdp, policy, features, eps_r,
                                              blsac::FixedPointVariant::kClassic, eps_mix);
        item.classic_norm = shift.delta_low.norm();
        item.classic_gap = shift.closed_form_gap;
      }
      if (want_bandlimited) {
        const auto shift = blsac::noise_shift(mdp, policy, features, eps_r,
                                              blsac::FixedPointVariant::kBandlimited, eps_mix);
        item.bandlimited_norm = shift.delta_low.norm();
        item.bandlimited_gap = shift.closed_form_gap;
      }
      return item;
    });

    const auto median = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      const std::size_t n = v.size();
      return n == 0 ? 0.0 : (n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]));
    };
    std::vector<double> classic_norms, bandlimited_norms;
    for (const auto& item : items) {
      if (want_classic) classic_norms.push_back(item.classic_norm);
      if (want_bandlimited) bandlimited_norms.push_back(item.bandlimited_norm);
    }
    const double classic_median = median(classic_norms);
    const double bandlimited_median = median(bandlimited_norms);

    if (format == "json") {
      json j = json_preamble("noise-study", config());
      json table = json::array();
      for (const auto& item : items) {
        json entry = {{"instance", item.instance}, {"noise_seed", item.noise_seed}};
        if (want_classic) {
          entry["classic_delta_low_norm"] = item.classic_norm;
          entry["classic_closed_form_gap"] = item.classic_gap;
        }
        if (want_bandlimited) {
          entry["bandlimited_delta_low_norm"] = item.bandlimited_norm;
          entry["bandlimited_closed_form_gap"] = item.bandlimited_gap;
        }
        table.push_back(entry);
      }
      j["rows"] = table;
      json summary;
      if (want_classic) summary["classic_median"] = classic_median;
      if (want_bandlimited) summary["bandlimited_median"] = bandlimited_median;
      if (want_classic && want_bandlimited)
        summary["median_ratio_bandlimited_over_classic"] =
            classic_median > 0.0 ? bandlimited_median / classic_median : 0.0;
      j["summary"] = summary;
      emit(out, j.dump(2) + "\n");
    } else {
      std::vector<std::vector<std::string>> rows;
      for (const auto& item : items) {
        if (want_classic)
          rows.push_back({std::to_string(item.instance), std::to_string(item.noise_seed), "classic",
                          fmt(item.classic_norm), fmt(item.classic_gap)});
        if (want_bandlimited)
          rows.push_back({std::to_string(item.instance), std::to_string(item.noise_seed),
                          "bandlimited", fmt(item.bandlimited_norm), fmt(item.bandlimited_gap)});
      }
      emit(out, csv_document("noise-study", config(),
                             {"instance", "noise_seed", "variant", "delta_low_norm",
                              "closed_form_gap"},
                             rows));
    }
    return 0;
  }
};

// ---------------------------------------------------------------------------
// pendulum-cov

struct PendulumCovCmd {
  double z1 = 1.0, z2 = 1.0, z3 = 1.0, z4 = 0.5, z5 = 0.5;
  double alpha_r = -1.0, beta_r = -1.0;
  double u = 0.3, du = 0.0;
  std::string intervals = "0.04,0.02,0.01,0.005";
  int substeps = 8;
  double initial_angle = 0.1;
  long episodes = 10000;
  int field_points = 9;
  double field_theta = 1.0, field_sigma = 1.0, field_dt = 0.5, field_rho = 0.0;
  std::uint64_t seed = 0;
  std::string out, format = "csv";

  ConfigEcho config() const {
    return {{"z1", fmt(z1)}, {"z2", fmt(z2)}, {"z3", fmt(z3)}, {"z4", fmt(z4)}, {"z5", fmt(z5)},
            {"alpha_r", fmt(alpha_r)}, {"beta_r", fmt(beta_r)},
            {"u", fmt(u)}, {"du", fmt(du)}, {"intervals", intervals},
            {"substeps", std::to_string(substeps)}, {"initial_angle", fmt(initial_angle)},
            {"episodes", std::to_string(episodes)}, {"field_points", std::to_string(field_points)},
            {"field_theta", fmt(field_theta)}, {"field_sigma", fmt(field_sigma)},
            {"field_dt", fmt(field_dt)}, {"field_rho", fmt(field_rho)},
            {"seed", std::to_string(seed)}, {"format", format}};
  }

  int run() const {
    blsac::PendulumModel model;
    model.z1 = z1;
    model.z2 = z2;
    model.z3 = z3;
    model.z4 = z4;
    model.z5 = z5;
    model.alpha_r = alpha_r;
    model.beta_r = beta_r;
    blsac::GridNoiseFieldParams field;
    field.dimensions = 1;
    field.points_per_dim = field_points;
    field.theta = field_theta;
    field.sigma = field_sigma;
    field.dt = field_dt;
    field.cell_correlation = field_rho;
    blsac::CovarianceStudyOptions options;
    options.substeps = substeps;
    options.initial_angle = initial_angle;
    options.intervals.clear();
    {
      std::string current;
      for (char c : intervals + ",") {
        if (c == ',') {
          if (!current.empty()) options.intervals.push_back(std::stod(current));
          current.clear();
        } else {
          current += c;
        }
      }
    }
    if (options.intervals.empty()) throw ConfigError("intervals: empty ladder");

    const auto study = blsac::reward_covariance_study(model, u, du, field, episodes, seed, options);

    if (format == "csv") {
      std::vector<std::vector<std::string>> rows;
      for (const auto& point : study.points)
        rows.push_back({fmt(point.interval), fmt(du), fmt(point.mc_cov), fmt(point.predicted_cov),
                        fmt(point.mc_std_error)});
      emit(out, csv_document("pendulum-cov", config(),
                             {"dt", "du", "mc_cov", "predicted_cov", "stderr"}, rows));
    } else {
      json j = json_preamble("pendulum-cov", config());
      json table = json::array();
      for (const auto& point : study.points)
        table.push_back({{"dt", point.interval},
                         {"du", du},
                         {"mc_cov", point.mc_cov},
                         {"predicted_cov", point.predicted_cov},
                         {"stderr", point.mc_std_error},
                         {"eps_cov", point.eps_cov}});
      j["rows"] = table;
      j["loglog_slope"] = study.loglog_slope;
      emit(out, j.dump(2) + "\n");
    }
    return 0;
  }
};

void add_common(CLI::App* sub, std::uint64_t& seed, std::string& out, std::string& format) {
  sub->add_option("--seed", seed, "Master seed; every derived stream is deterministic");
  sub->add_option("--out", out, "Output file (stdout when omitted)");
  sub->add_option("--format", format, "Output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--config", "Key=value config file; command-line flags override")
      ->expected(1);
}

// Expand `--config file` into `--key value` tokens placed ahead of the
// explicit flags, so the command line takes precedence (every option keeps
// only its last occurrence). Lines are `key=value`; blank lines and
// #-comments are skipped.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot read config file: " + path);
  std::vector<std::string> expanded;
  if (!args.empty()) expanded.push_back(args.front());  // the subcommand
  std::string line;
  while (std::getline(file, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto split = line.find('=');
    if (split == std::string::npos)
      throw ConfigError("config line is not key=value: " + line);
    const std::string key = line.substr(0, split);
    if (key == "config") throw ConfigError("config files may not nest");
    expanded.push_back("--" + key);
    expanded.push_back(line.substr(split + 1));
  }
  expanded.insert(expanded.end(), args.begin() + 1, args.end());
  return expanded;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bandlimited soft actor-critic laboratory"};
  app.require_subcommand(1);

  FilterResponseCmd filter_response;
  auto* fr = app.add_subcommand("filter-response", "Frequency response of the adaptive sinc filter");
  fr->add_option("--sigma", filter_response.sigma, "Policy standard deviation");
  fr->add_option("--k", filter_response.k, "Filter half-width K");
  fr->add_option("--grid", filter_response.grid, "Grid size for the response measurement");
  fr->add_option("--boundary", filter_response.boundary, "periodic or inverse_logistic");
  add_common(fr, filter_response.seed, filter_response.out, filter_response.format);

  GaussConvCmd gauss_conv;
  auto* gc = app.add_subcommand("gauss-conv", "Gaussian smoothing attenuation per frequency");
  gc->add_option("--sigma", gauss_conv.sigma, "Gaussian kernel standard deviation");
  gc->add_option("--mu", gauss_conv.mu, "Evaluation point");
  gc->add_option("--grid", gauss_conv.grid, "Quadrature grid size");
  gc->add_option("--samples", gauss_conv.samples, "Monte Carlo samples per frequency (0: skip)");
  add_common(gc, gauss_conv.seed, gauss_conv.out, gauss_conv.format);

  SolveFixedpointCmd solve_fixedpoint;
  auto* sf = app.add_subcommand("solve-fixedpoint", "Closed-form fixed points on a random instance");
  sf->add_option("--states", solve_fixedpoint.states, "Number of states");
  sf->add_option("--actions", solve_fixedpoint.actions, "Action grid size");
  sf->add_option("--k", solve_fixedpoint.k, "Feature count (0: complete basis)");
  sf->add_option("--kl", solve_fixedpoint.kl, "Low-frequency column count (0: default split)");
  sf->add_option("--gamma", solve_fixedpoint.gamma, "Discount");
  sf->add_option("--alpha", solve_fixedpoint.alpha, "Temperature (number or 'inf' for uniform)");
  sf->add_option("--eps-mix", solve_fixedpoint.eps_mix, "Uniform restart mass for the density");
  add_common(sf, solve_fixedpoint.seed, solve_fixedpoint.out, solve_fixedpoint.format);

  DecouplingSweepCmd decoupling_sweep;
  auto* ds = app.add_subcommand("decoupling-sweep", "Cross-frequency coupling norms per temperature");
  ds->add_option("--alphas", decoupling_sweep.alphas, "Comma-separated temperatures ('inf' allowed)");
  ds->add_option("--states", decoupling_sweep.states, "Number of states");
  ds->add_option("--actions", decoupling_sweep.actions, "Action grid size");
  ds->add_option("--k", decoupling_sweep.k, "Feature count (0: complete basis)");
  ds->add_option("--kl", decoupling_sweep.kl, "Low-frequency column count (0: default split)");
  ds->add_option("--gamma", decoupling_sweep.gamma, "Discount");
  ds->add_option("--eps-mix", decoupling_sweep.eps_mix, "Uniform restart mass for the density");
  ds->add_option("--threads", decoupling_sweep.threads, "Worker pool size");
  add_common(ds, decoupling_sweep.seed, decoupling_sweep.out, decoupling_sweep.format);

  TabularSacCmd tabular_sac;
  auto* ts = app.add_subcommand("tabular-sac", "Soft policy iteration with a chosen evaluation variant");
  ts->add_option("--variant", tabular_sac.variant,
                 "classic|bandlimited-ideal|bandlimited-sinc|lowres");
  ts->add_option("--states", tabular_sac.states, "Number of states");
  ts->add_option("--actions", tabular_sac.actions, "Action grid size");
  ts->add_option("--k", tabular_sac.k, "Feature count (0: complete basis)");
  ts->add_option("--kl", tabular_sac.kl, "Low-frequency column count (0: default split)");
  ts->add_option("--alpha", tabular_sac.alpha, "Temperature");
  ts->add_option("--gamma", tabular_sac.gamma, "Discount");
  ts->add_option("--iters", tabular_sac.iters, "Outer policy-iteration steps");
  ts->add_option("--eval-iters", tabular_sac.eval_iters, "Evaluation budget per outer step");
  ts->add_option("--filter-k", tabular_sac.filter_k, "Sinc filter half-width (sinc variant)");
  ts->add_option("--eps-mix", tabular_sac.eps_mix, "Uniform restart mass for the density");
  add_common(ts, tabular_sac.seed, tabular_sac.out, tabular_sac.format);

  NoiseStudyCmd noise_study;
  auto* ns = app.add_subcommand("noise-study", "Fixed-point shift under high-frequency reward noise");
  ns->add_option("--variant", noise_study.variant, "both|classic|bandlimited");
  ns->add_option("--instances", noise_study.instances, "Instance family size");
  ns->add_option("--seeds", noise_study.seeds, "Noise draws per instance");
  ns->add_option("--states", noise_study.states, "Number of states");
  ns->add_option("--actions", noise_study.actions, "Action grid size");
  ns->add_option("--k", noise_study.k, "Feature count (0: complete basis)");
  ns->add_option("--kl", noise_study.kl, "Low-frequency column count (0: default split)");
  ns->add_option("--gamma", noise_study.gamma, "Discount");
  ns->add_option("--alpha", noise_study.alpha, "Temperature (number or 'inf')");
  ns->add_option("--amplitude", noise_study.amplitude, "Noise coefficient scale");
  ns->add_option("--eps-mix", noise_study.eps_mix, "Uniform restart mass for the density");
  ns->add_option("--threads", noise_study.threads, "Worker pool size");
  add_common(ns, noise_study.seed, noise_study.out, noise_study.format);

  PendulumCovCmd pendulum_cov;
  auto* pc = app.add_subcommand("pendulum-cov", "Reward covariance induced by correlated disturbances");
  pc->add_option("--z1", pendulum_cov.z1, "Angle feedback constant");
  pc->add_option("--z2", pendulum_cov.z2, "Control gain on angular acceleration");
  pc->add_option("--z3", pendulum_cov.z3, "Disturbance gain on angular acceleration");
  pc->add_option("--z4", pendulum_cov.z4, "Angle coupling into cart acceleration");
  pc->add_option("--z5", pendulum_cov.z5, "Control gain on cart acceleration");
  pc->add_option("--alpha-r", pendulum_cov.alpha_r, "Quadratic reward weight on angle");
  pc->add_option("--beta-r", pendulum_cov.beta_r, "Quadratic reward weight on position");
  pc->add_option("--u", pendulum_cov.u, "Base control");
  pc->add_option("--du", pendulum_cov.du, "Control offset for the second probe");
  pc->add_option("--intervals", pendulum_cov.intervals, "Comma-separated control intervals");
  pc->add_option("--substeps", pendulum_cov.substeps, "Euler substeps per interval");
  pc->add_option("--initial-angle", pendulum_cov.initial_angle, "Start angle");
  pc->add_option("--episodes", pendulum_cov.episodes, "Measured episodes per interval");
  pc->add_option("--field-points", pendulum_cov.field_points, "Noise grid points per dimension");
  pc->add_option("--field-theta", pendulum_cov.field_theta, "Field mean-reversion rate");
  pc->add_option("--field-sigma", pendulum_cov.field_sigma, "Field diffusion scale");
  pc->add_option("--field-dt", pendulum_cov.field_dt, "Field step size");
  pc->add_option("--field-rho", pendulum_cov.field_rho, "Cross-cell correlation in [0, 1]");
  add_common(pc, pendulum_cov.seed, pendulum_cov.out, pendulum_cov.format);

  for (CLI::App* sub : app.get_subcommands(nullptr))
    for (CLI::Option* option : sub->get_options())
      option->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(args);
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "blsac: configuration error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (fr->parsed()) return filter_response.run();
    if (gc->parsed()) return gauss_conv.run();
    if (sf->parsed()) return solve_fixedpoint.run();
    if (ds->parsed()) return decoupling_sweep.run();
    if (ts->parsed()) return tabular_sac.run();
    if (ns->parsed()) return noise_study.run();
    if (pc->parsed()) return pendulum_cov.run();
  } catch (const ConfigError& e) {
    std::cerr << "blsac: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "blsac: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "blsac: numeric failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
