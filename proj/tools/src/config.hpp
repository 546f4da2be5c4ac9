#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "lsqtl/asymptotics.hpp"
#include "lsqtl/estimate.hpp"
#include "lsqtl/simharness.hpp"

namespace lsqtl::cli {

enum class Experiment { type1, power, asymptotic };
std::string_view to_string(Experiment e);

// Parsed `simulate` configuration. One scenario per entry of `n`.
struct SimConfig {
  Experiment experiment = Experiment::type1;
  std::vector<SimScenario> scenarios;
  Methods methods;
  FitConfig fit;
  CalibrationConfig calibration;
  nlohmann::json echo;  // the TOML document, for the manifest
};

// `full_budget` switches to 10,000 replicates and 10,000 null datasets.
SimConfig load_sim_config(const std::filesystem::path& path, bool full_budget);

struct KlConfig {
  IntervalConfig interval;
  double theta = 0.5;
  Component f1;
  Component f2;
  Kernel null_kernel = kNormal;
};

KlConfig load_kl_config(const std::filesystem::path& path);

}  // namespace lsqtl::cli
