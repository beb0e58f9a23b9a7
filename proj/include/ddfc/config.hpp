#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ddfc/grid.hpp"

namespace ddfc {

inline constexpr int kConfigSchemaVersion = 1;

/// Structured run configuration mirroring ScenarioConfig plus estimator
/// tuning, collection settings and output paths.  Unknown keys are
/// rejected; defaults follow the bundled three-area test system.
struct RunConfig {
  ScenarioConfig scenario;
  CollectOptions collect;  // target_area ignored: collection sweeps all areas
  std::vector<std::string> dataset_paths;
  std::string out_dir = "out";

  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);

  /// The bundled three-area test system with stock tuning.
  static RunConfig default_three_area();
};

}  // namespace ddfc
