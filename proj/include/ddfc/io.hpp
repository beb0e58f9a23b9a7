#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddfc/grid.hpp"
#include "ddfc/signal.hpp"

namespace ddfc {

struct CsvTable {
  std::vector<std::string> headers;
  Matrix data;  // one row per record

  std::vector<double> column(const std::string& name) const;
  Eigen::Index column_index(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

/// Atomic CSV write (temp file + rename).
void write_csv(const std::string& path, const std::vector<std::string>& headers,
               const Matrix& data);

/// Dataset file: CSV `t,delta_v,delta_f` plus a JSON sidecar
/// (`<path>.meta.json`) with seed, probe settings, PE-check results and the
/// per-unit base.
void write_dataset(const std::string& path, const CollectedDataset& dataset,
                   double dt_sample);

struct DatasetFile {
  TrajectoryDataset data;
  double base_mva = 100.0;
  std::uint64_t seed = 0;
  bool pe_recorded = false;
  bool pe_commanded = false;
  double probe_amplitude_mw = 1.0;
  std::string warning;
};

DatasetFile read_dataset(const std::string& path);

/// Result CSV: one row per sample, columns `area{i}_{signal}`.
void write_result(const std::string& path, const SimResult& result);

}  // namespace ddfc
