#pragma once

#include <limits>
#include <string>
#include <vector>

#include "ddfc/signal.hpp"

namespace ddfc {

/// Root mean squared deviation from zero over [begin, end).
double rmse(const Vector& series, Eigen::Index begin, Eigen::Index end);
double rmse(const Vector& series);

struct NadirSettling {
  double nadir = 0.0;         // signed extreme post-event deviation
  double nadir_time = 0.0;
  double settling_time = std::numeric_limits<double>::infinity();
  bool settled = false;
};

/// Post-event extreme deviation and first entry time into the +-band that
/// is never left again.  A series that never re-enters reports the
/// infinity sentinel with settled = false.
NadirSettling nadir_and_settling(const Vector& series, const Vector& time,
                                 double event_time, double band);

struct ControllerMetrics {
  std::string controller;
  std::vector<double> rmse_hz;  // one entry per area aggregate generator
  double total_rmse_hz = 0.0;
  NadirSettling contingent;     // frequency of the contingent area
};

struct MetricsReport {
  std::vector<ControllerMetrics> rows;
  double band_hz = 0.036;
  int contingent_area = 0;
};

/// Aligned plain-text comparison table (controllers x per-generator RMSE).
std::string to_table(const MetricsReport& report);

/// CSV form of the same table (atomic write).
void write_report_csv(const std::string& path, const MetricsReport& report);

}  // namespace ddfc
