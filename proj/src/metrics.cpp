#include "ddfc/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "ddfc/io.hpp"

namespace ddfc {

double rmse(const Vector& series, Eigen::Index begin, Eigen::Index end) {
  if (begin < 0 || end > series.size() || begin >= end)
    throw Error(ErrorCode::InvalidArgument, "rmse: empty or invalid window");
  return std::sqrt(series.segment(begin, end - begin).squaredNorm() /
                   static_cast<double>(end - begin));
}

double rmse(const Vector& series) { return rmse(series, 0, series.size()); }

NadirSettling nadir_and_settling(const Vector& series, const Vector& time,
                                 double event_time, double band) {
  if (series.size() != time.size() || series.size() == 0)
    throw Error(ErrorCode::InvalidArgument, "nadir_and_settling: bad series");
  if (event_time < time(0) || event_time > time(time.size() - 1))
    throw Error(ErrorCode::InvalidArgument,
                "nadir_and_settling: event time outside series");

  NadirSettling out;
  Eigen::Index first = 0;
  while (first < time.size() && time(first) < event_time) ++first;

  double lo = 0.0, hi = 0.0;
  double lo_t = event_time, hi_t = event_time;
  Eigen::Index last_outside = -1;
  for (Eigen::Index k = first; k < series.size(); ++k) {
    if (series(k) < lo) { lo = series(k); lo_t = time(k); }
    if (series(k) > hi) { hi = series(k); hi_t = time(k); }
    if (std::abs(series(k)) > band) last_outside = k;
  }
  if (-lo >= hi) { out.nadir = lo; out.nadir_time = lo_t; }
  else           { out.nadir = hi; out.nadir_time = hi_t; }

  if (last_outside < 0) {
    out.settling_time = event_time;
    out.settled = true;
  } else if (last_outside + 1 < series.size()) {
    out.settling_time = time(last_outside + 1);
    out.settled = true;
  }
  return out;
}

std::string to_table(const MetricsReport& report) {
  std::size_t gens = 0;
  for (const auto& r : report.rows) gens = std::max(gens, r.rmse_hz.size());

  std::ostringstream os;
  os << std::left << std::setw(22) << "Control type";
  for (std::size_t g = 0; g < gens; ++g)
    os << std::right << std::setw(10) << ("G" + std::to_string(g + 1));
  os << std::setw(12) << "Total (Hz)" << std::setw(12) << "Nadir (Hz)"
     << std::setw(14) << "Settling (s)" << "\n";
  os << std::string(22 + 10 * gens + 38, '-') << "\n";
  for (const auto& r : report.rows) {
    os << std::left << std::setw(22) << r.controller << std::right
       << std::setprecision(4) << std::fixed;
    for (std::size_t g = 0; g < gens; ++g)
      os << std::setw(10) << (g < r.rmse_hz.size() ? r.rmse_hz[g] : 0.0);
    os << std::setw(12) << r.total_rmse_hz << std::setw(12) << r.contingent.nadir;
    if (r.contingent.settled)
      os << std::setw(14) << r.contingent.settling_time;
    else
      os << std::setw(14) << "never";
    os << "\n";
  }
  return os.str();
}

void write_report_csv(const std::string& path, const MetricsReport& report) {
  std::size_t gens = 0;
  for (const auto& r : report.rows) gens = std::max(gens, r.rmse_hz.size());
  std::vector<std::string> headers{"controller_index"};
  for (std::size_t g = 0; g < gens; ++g)
    headers.push_back("rmse_g" + std::to_string(g + 1) + "_hz");
  headers.push_back("total_rmse_hz");
  headers.push_back("nadir_hz");
  headers.push_back("nadir_time_s");
  headers.push_back("settling_time_s");

  Matrix data(static_cast<Eigen::Index>(report.rows.size()),
              static_cast<Eigen::Index>(headers.size()));
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    const auto& row = report.rows[r];
    Eigen::Index c = 0;
    data(static_cast<Eigen::Index>(r), c++) = static_cast<double>(r);
    for (std::size_t g = 0; g < gens; ++g)
      data(static_cast<Eigen::Index>(r), c++) =
          g < row.rmse_hz.size() ? row.rmse_hz[g] : 0.0;
    data(static_cast<Eigen::Index>(r), c++) = row.total_rmse_hz;
    data(static_cast<Eigen::Index>(r), c++) = row.contingent.nadir;
    data(static_cast<Eigen::Index>(r), c++) = row.contingent.nadir_time;
    data(static_cast<Eigen::Index>(r), c++) = row.contingent.settling_time;
  }
  write_csv(path, headers, data);
}

}  // namespace ddfc
