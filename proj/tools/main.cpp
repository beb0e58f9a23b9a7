#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "ddfc/config.hpp"
#include "ddfc/grid.hpp"
#include "ddfc/io.hpp"
#include "ddfc/metrics.hpp"

namespace {

using namespace ddfc;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::DatasetRequired: return 2;
    case ErrorCode::NumericalDivergence: return 3;
    default: return 1;
  }
}

std::string dataset_path(const std::string& out_dir, int area) {
  return out_dir + "/area" + std::to_string(area + 1) + "_dataset.csv";
}

std::vector<TrajectoryDataset> load_datasets(const RunConfig& rc) {
  std::vector<std::string> paths = rc.dataset_paths;
  if (paths.empty())
    for (std::size_t i = 0; i < rc.scenario.areas.size(); ++i)
      paths.push_back(dataset_path(rc.out_dir, static_cast<int>(i)));
  if (paths.size() != rc.scenario.areas.size())
    throw Error(ErrorCode::DatasetRequired, "need one dataset per area");
  std::vector<TrajectoryDataset> out;
  for (const auto& p : paths) out.push_back(read_dataset(p).data);
  return out;
}

// earliest event drives the nadir/settling metrics
struct EventInfo {
  double time = 0.0;
  int area = 0;
};

EventInfo primary_event(const ScenarioConfig& sc) {
  EventInfo info;
  if (!sc.events.empty()) {
    info.time = sc.events.front().time_s;
    info.area = sc.events.front().area;
    for (const auto& e : sc.events)
      if (e.time_s < info.time) { info.time = e.time_s; info.area = e.area; }
  }
  return info;
}

ControllerMetrics metrics_for(const SimResult& res, const ScenarioConfig& sc,
                              ControllerKind kind) {
  const auto ev = primary_event(sc);
  ControllerMetrics row;
  row.controller = to_string(kind);
  double total = 0.0;
  for (const auto& area : res.areas) {
    const double r = rmse(area.delta_f_hz);
    row.rmse_hz.push_back(r);
    total += r;
  }
  row.total_rmse_hz = total;
  const double band = sc.areas[ev.area].deadband_hz;
  row.contingent = nadir_and_settling(res.areas[ev.area].delta_f_hz, res.time,
                                      ev.time, band);
  return row;
}

int cmd_collect(RunConfig rc) {
  std::filesystem::create_directories(rc.out_dir);
  const auto base_seed = rc.scenario.noise.seed;
  for (std::size_t i = 0; i < rc.scenario.areas.size(); ++i) {
    ScenarioConfig sc = rc.scenario;  // one area excited at a time
    sc.noise.seed = base_seed + 1000 * (i + 1);
    CollectOptions opt = rc.collect;
    opt.target_area = static_cast<int>(i);
    const auto ds = collect_dataset(sc, opt);
    const auto path = dataset_path(rc.out_dir, static_cast<int>(i));
    write_dataset(path, ds, sc.dt_sample);
    std::cout << "wrote " << path << " (" << ds.data.length() << " rows"
              << (ds.warning.empty() ? "" : ", warning: " + ds.warning) << ")\n";
  }
  return 0;
}

int cmd_simulate(RunConfig rc) {
  std::filesystem::create_directories(rc.out_dir);
  std::vector<TrajectoryDataset> datasets;
  const bool data_driven = rc.scenario.controller == ControllerKind::Ldde ||
                           rc.scenario.controller == ControllerKind::Odde;
  if (data_driven) datasets = load_datasets(rc);

  const auto result = run_scenario(rc.scenario, data_driven ? &datasets : nullptr);
  const auto name = to_string(rc.scenario.controller);
  write_result(rc.out_dir + "/result_" + name + ".csv", result);

  MetricsReport report;
  report.contingent_area = primary_event(rc.scenario).area;
  report.band_hz = rc.scenario.areas[report.contingent_area].deadband_hz;
  report.rows.push_back(metrics_for(result, rc.scenario, rc.scenario.controller));
  write_report_csv(rc.out_dir + "/metrics_" + name + ".csv", report);
  std::cout << to_table(report);
  for (const auto& line : result.event_log) std::cout << "event: " << line << "\n";
  return 0;
}

int cmd_compare(RunConfig rc, const std::vector<std::string>& controller_names,
                int seeds, int jobs) {
  std::filesystem::create_directories(rc.out_dir);
  std::vector<ControllerKind> kinds;
  for (const auto& n : controller_names) kinds.push_back(controller_from_string(n));
  if (kinds.empty()) throw Error(ErrorCode::ConfigError, "no controllers given");

  const bool any_data_driven =
      std::any_of(kinds.begin(), kinds.end(), [](ControllerKind k) {
        return k == ControllerKind::Ldde || k == ControllerKind::Odde;
      });
  std::vector<TrajectoryDataset> datasets;
  if (any_data_driven) datasets = load_datasets(rc);

  struct Job {
    ControllerKind kind;
    std::uint64_t seed;
    ControllerMetrics metrics;
    std::string error;
  };
  std::vector<Job> jobs_list;
  for (const auto k : kinds)
    for (int s = 0; s < seeds; ++s)
      jobs_list.push_back({k, rc.scenario.noise.seed + static_cast<std::uint64_t>(s),
                           {}, {}});

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const auto idx = next.fetch_add(1);
      if (idx >= jobs_list.size()) return;
      auto& job = jobs_list[idx];
      try {
        ScenarioConfig sc = rc.scenario;
        sc.controller = job.kind;
        sc.noise.seed = job.seed;
        const bool dd = job.kind == ControllerKind::Ldde ||
                        job.kind == ControllerKind::Odde;
        const auto result = run_scenario(sc, dd ? &datasets : nullptr);
        job.metrics = metrics_for(result, sc, job.kind);
        if (seeds == 1)
          write_result(rc.out_dir + "/result_" + to_string(job.kind) + ".csv",
                       result);
      } catch (const Error& e) {
        job.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_threads =
      std::max(1, std::min<int>(jobs, static_cast<int>(jobs_list.size())));
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (const auto& job : jobs_list)
    if (!job.error.empty())
      throw Error(ErrorCode::NumericalDivergence,
                  to_string(job.kind) + ": " + job.error);

  // aggregate per controller across seeds, ordered by total RMSE
  MetricsReport report;
  report.contingent_area = primary_event(rc.scenario).area;
  report.band_hz = rc.scenario.areas[report.contingent_area].deadband_hz;
  std::vector<std::pair<double, double>> spread;
  for (std::size_t c = 0; c < kinds.size(); ++c) {
    ControllerMetrics agg;
    agg.controller = to_string(kinds[c]);
    std::vector<double> totals;
    for (const auto& job : jobs_list) {
      if (job.kind != kinds[c]) continue;
      totals.push_back(job.metrics.total_rmse_hz);
      if (agg.rmse_hz.empty()) {
        agg.rmse_hz = job.metrics.rmse_hz;
        agg.contingent = job.metrics.contingent;
      } else {
        for (std::size_t g = 0; g < agg.rmse_hz.size(); ++g)
          agg.rmse_hz[g] += job.metrics.rmse_hz[g];
      }
    }
    const double n = static_cast<double>(totals.size());
    for (auto& v : agg.rmse_hz) v /= n;
    double mean = 0.0;
    for (const double v : totals) mean += v;
    mean /= n;
    double var = 0.0;
    for (const double v : totals) var += (v - mean) * (v - mean);
    agg.total_rmse_hz = mean;
    spread.emplace_back(mean, n > 1 ? std::sqrt(var / (n - 1)) : 0.0);
    report.rows.push_back(agg);
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const ControllerMetrics& a, const ControllerMetrics& b) {
              return a.total_rmse_hz < b.total_rmse_hz;
            });
  write_report_csv(rc.out_dir + "/compare_report.csv", report);
  std::cout << to_table(report);
  if (seeds > 1) {
    std::cout << "total RMSE across " << seeds << " seeds (mean +/- std):\n";
    for (std::size_t c = 0; c < kinds.size(); ++c)
      std::cout << "  " << to_string(kinds[c]) << ": " << spread[c].first
                << " +/- " << spread[c].second << " Hz\n";
  }
  {
    std::ofstream table(rc.out_dir + "/compare_report.txt");
    table << to_table(report);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"data-driven fast frequency control toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string controller;
  std::vector<std::string> controllers;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double duration = 0.0;
  bool duration_set = false;
  double probe_amplitude = 1.0;
  bool probe_set = false;
  int seeds = 1;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration")->required();
    cmd->add_option("--seed", seed, "measurement-noise seed override")
        ->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--out-dir", out_dir, "output directory override");
  };

  auto* collect =
      app.add_subcommand("collect", "record probing datasets, one area at a time");
  add_common(collect);
  collect->add_option("--duration", duration, "collection window in seconds")
      ->each([&](const std::string&) { duration_set = true; });
  collect
      ->add_option("--probe-amplitude", probe_amplitude,
                   "probing sinusoid amplitude in MW")
      ->each([&](const std::string&) { probe_set = true; });

  auto* simulate = app.add_subcommand("simulate", "run one closed-loop scenario");
  add_common(simulate);
  simulate->add_option("--controller", controller,
                       "none|agc|model_based|ldde|odde override");
  simulate->add_option("--duration", duration, "simulation length in seconds")
      ->each([&](const std::string&) { duration_set = true; });

  auto* compare =
      app.add_subcommand("compare", "run several controllers on the same scenario");
  add_common(compare);
  compare->add_option("--controllers", controllers, "controllers to compare")
      ->delimiter(',')
      ->required();
  compare->add_option("--seeds", seeds, "number of seeds (mean/std aggregation)");
  compare->add_option("--jobs", jobs, "parallel simulations");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig rc = RunConfig::from_json_file(config_path);
    if (seed_set) rc.scenario.noise.seed = seed;
    if (!out_dir.empty()) rc.out_dir = out_dir;
    if (duration_set && app.got_subcommand(collect)) rc.collect.duration_s = duration;
    if (duration_set && app.got_subcommand(simulate)) rc.scenario.duration = duration;
    if (probe_set) rc.collect.probe_amplitude_mw = probe_amplitude;
    if (!controller.empty())
      rc.scenario.controller = controller_from_string(controller);

    if (app.got_subcommand(collect)) return cmd_collect(std::move(rc));
    if (app.got_subcommand(simulate)) return cmd_simulate(std::move(rc));
    return cmd_compare(std::move(rc), controllers, std::max(1, seeds),
                       std::max(1, jobs));
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
