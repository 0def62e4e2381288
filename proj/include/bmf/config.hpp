#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bmf/harness.hpp"
#include "bmf/oplab.hpp"

namespace bmf {

/// Schema violation; `pointer` is a JSON pointer to the offending value.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : std::runtime_error(pointer + ": " + message), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

struct InitialSpec {
  double center = 0.0;
  double width = 1.0;
  double momentum = 0.0;
};

struct RunConfig {
  nlohmann::json document;  // as validated, after overrides

  GridSpec grid;
  double T = 0.25;
  double dt = 1e-3;
  Physics phys;
  InitialSpec initial;
  bool renormalize = true;

  MeanFieldMode mode = MeanFieldMode::picard;
  std::size_t M = 100;
  double picard_tol = 1e-4;
  int max_iters = 20;

  std::vector<std::size_t> N_list{1, 2, 3};
  std::size_t memory_budget_mb = 1024;
  bool pair_indicators = false;

  std::size_t repetitions = 100;
  std::uint64_t master_seed = 1;

  std::string directory;
  std::size_t sample_stride = 10;

  std::vector<std::size_t> delta_N_list{8, 16, 32, 64};
  int h1_power = 4;

  PropertySuiteConfig proptest;
  bool has_physics = false;

  ExperimentSetup setup() const;
  WaveFunction initial_state() const;
};

// Sections grid, time and physics are required unless `physics_optional`.
// Unknown keys anywhere are rejected.
RunConfig parse_config(const nlohmann::json& doc, bool physics_optional = false);
RunConfig load_config(const std::string& path, bool physics_optional = false);

// Replaces mc.master_seed and re-validates.
void override_seed(RunConfig& cfg, std::uint64_t seed);

}  // namespace bmf
