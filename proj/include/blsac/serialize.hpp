#pragma once

#include <json.hpp>
#include <string>

#include "blsac/filter.hpp"
#include "blsac/mdp.hpp"

namespace blsac {

// JSON document layout for an MDP:
// {n_states, action_grid, rewards (flat, state-major),
//  transitions (nested state -> action -> next state), gamma}
inline nlohmann::json to_json(const DiscreteMdp& mdp) {
  nlohmann::json j;
  j["n_states"] = mdp.n_states;
  j["gamma"] = mdp.gamma;
  j["action_grid"] = std::vector<double>(mdp.action_grid.begin(), mdp.action_grid.end());
  j["rewards"] = std::vector<double>(mdp.rewards.begin(), mdp.rewards.end());
  auto& transitions = j["transitions"] = nlohmann::json::array();
  for (int s = 0; s < mdp.n_states; ++s) {
    nlohmann::json per_state = nlohmann::json::array();
    for (int a = 0; a < mdp.n_actions(); ++a) {
      std::vector<double> row(mdp.n_states);
      for (int k = 0; k < mdp.n_states; ++k) row[k] = mdp.transitions(sa_index(s, a, mdp.n_actions()), k);
      per_state.push_back(row);
    }
    transitions.push_back(per_state);
  }
  return j;
}

inline DiscreteMdp mdp_from_json(const nlohmann::json& j) {
  DiscreteMdp mdp;
  mdp.n_states = j.at("n_states").get<int>();
  mdp.gamma = j.at("gamma").get<double>();
  const auto grid = j.at("action_grid").get<std::vector<double>>();
  mdp.action_grid = Eigen::Map<const Eigen::VectorXd>(grid.data(), grid.size());
  const auto rewards = j.at("rewards").get<std::vector<double>>();
  mdp.rewards = Eigen::Map<const Eigen::VectorXd>(rewards.data(), rewards.size());
  const auto& transitions = j.at("transitions");
  const int m = static_cast<int>(grid.size());
  mdp.transitions.resize(static_cast<Eigen::Index>(mdp.n_states) * m, mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s)
    for (int a = 0; a < m; ++a) {
      const auto row = transitions.at(s).at(a).get<std::vector<double>>();
      for (int k = 0; k < mdp.n_states; ++k) mdp.transitions(sa_index(s, a, m), k) = row[k];
    }
  mdp.validate();
  return mdp;
}

inline std::string to_string(BoundaryMode mode) {
  return mode == BoundaryMode::kPeriodic ? "periodic" : "inverse_logistic";
}

inline BoundaryMode boundary_mode_from_string(const std::string& name) {
  if (name == "periodic") return BoundaryMode::kPeriodic;
  if (name == "inverse_logistic") return BoundaryMode::kInverseLogistic;
  throw std::invalid_argument("unknown boundary mode: " + name);
}

// Filter design parameters: {K, sigma, boundary_mode}. Weights and shifts are
// derived quantities and are not serialized.
inline nlohmann::json to_json(const SincFilter& filter) {
  return nlohmann::json{{"K", filter.half_width},
                        {"sigma", filter.sigma},
                        {"boundary_mode", to_string(filter.boundary_mode)}};
}

inline SincFilter filter_from_json(const nlohmann::json& j) {
  return design_filter(j.at("sigma").get<double>(), j.at("K").get<int>(),
                       boundary_mode_from_string(j.at("boundary_mode").get<std::string>()));
}

}  // namespace blsac
