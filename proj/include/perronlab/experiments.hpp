#ifndef PERRONLAB_EXPERIMENTS_HPP
#define PERRONLAB_EXPERIMENTS_HPP

#include <json.hpp>

#include <string>
#include <vector>

#include "perronlab/common.hpp"

namespace perronlab {

// Batch experiment description. The sub-objects (domain, operator,
// boundary, perturbation) keep their JSON form so configs round-trip
// verbatim; they are parsed when the experiment runs.
struct ExperimentConfig {
  std::string experiment;         // resolutivity | invariance | uniqueness |
                                  // monotone-convergence | monotone-data |
                                  // capacity-scaling | poisson-counterexample |
                                  // sobolev-data
  nlohmann::json domain;
  nlohmann::json op;
  nlohmann::json boundary;
  nlohmann::json perturbation;    // optional
  int mesh_levels = 3;
  double h0 = 0.1;
  int depth = 4;
  double tol = 0.0;               // 0 = solver defaults
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};

nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

// One checked claim; every assertion names the module invariant it
// instantiates.
struct Assertion {
  std::string name;
  std::string invariant;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct ExperimentResult {
  int exit_code = 0;  // 0 pass, 2 assertion failure, 3 solver failure, 4 config error
  nlohmann::json summary;
  std::vector<Assertion> assertions;
};

// Runs the experiment, writes its CSV tables and summary.json under
// config.out_dir, and returns the verdict. Solver failures keep partial
// artifacts on disk.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Exit-code contract shared with the CLI.
inline constexpr int kExitPass = 0;
inline constexpr int kExitAssertion = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitConfig = 4;

}  // namespace perronlab

#endif
