#include "ddfc/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>

namespace ddfc {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.contains(it.key()))
      throw Error(ErrorCode::ConfigError,
                  "config: unknown key '" + it.key() + "' in " + where);
}

IbrUnit parse_ibr(const json& j, const std::string& where) {
  reject_unknown(j, {"id", "p_min_pu", "p_max_pu", "lag_s"}, where);
  IbrUnit u;
  u.id = j.value("id", std::string{});
  u.p_min = j.value("p_min_pu", -0.5);
  u.p_max = j.value("p_max_pu", 0.5);
  u.lag_time_constant = j.value("lag_s", 0.05);
  if (u.p_min > u.p_max)
    throw Error(ErrorCode::ConfigError, "config: p_min > p_max in " + where);
  return u;
}

AreaParams parse_area(const json& j, const std::string& where) {
  reject_unknown(j,
                 {"inertia_h_s", "ibr_droop_pu", "gov_droop_pu", "turbine_tr_s",
                  "turbine_fh", "deadband_hz", "base_mva", "ibrs"},
                 where);
  AreaParams a;
  a.inertia_h = j.value("inertia_h_s", a.inertia_h);
  a.ibr_droop = j.value("ibr_droop_pu", a.ibr_droop);
  a.gov_droop = j.value("gov_droop_pu", a.gov_droop);
  a.turbine_tr = j.value("turbine_tr_s", a.turbine_tr);
  a.turbine_fh = j.value("turbine_fh", a.turbine_fh);
  a.deadband_hz = j.value("deadband_hz", a.deadband_hz);
  a.base_mva = j.value("base_mva", a.base_mva);
  return a;
}

DisturbanceEvent parse_event(const json& j, const std::string& where) {
  reject_unknown(j,
                 {"kind", "area", "magnitude_mw", "time_s", "trace_path", "scale",
                  "trip_fraction"},
                 where);
  DisturbanceEvent e;
  const std::string kind = j.value("kind", std::string{"step_load"});
  if (kind == "step_load") e.kind = EventKind::StepLoad;
  else if (kind == "trace") e.kind = EventKind::Trace;
  else if (kind == "generator_trip") e.kind = EventKind::GeneratorTrip;
  else throw Error(ErrorCode::ConfigError, "config: unknown event kind " + kind);
  e.area = j.value("area", 1) - 1;  // user-facing areas are 1-based
  e.magnitude_mw = j.value("magnitude_mw", 0.0);
  e.time_s = j.value("time_s", 10.0);
  e.trace_path = j.value("trace_path", std::string{});
  e.trace_scale = j.value("scale", 1.0);
  e.trip_fraction = j.value("trip_fraction", 1.0 / 3.0);
  if (e.kind == EventKind::Trace && e.trace_path.empty())
    throw Error(ErrorCode::ConfigError, "config: trace event needs trace_path");
  return e;
}

RunConfig parse(const json& j) {
  reject_unknown(j,
                 {"schema_version", "seed", "duration_s", "dt_sim_s", "dt_sample_s",
                  "system_base_mva", "controller", "areas", "tielines", "events",
                  "noise", "estimator", "agc", "collect", "datasets", "out_dir"},
                 "top level");
  if (j.contains("schema_version") && j["schema_version"].get<int>() != kConfigSchemaVersion)
    throw Error(ErrorCode::ConfigError, "config: unsupported schema_version");

  RunConfig rc = RunConfig::default_three_area();
  auto& sc = rc.scenario;

  if (j.contains("areas")) {
    sc.areas.clear();
    sc.ibrs.clear();
    int idx = 1;
    for (const auto& ja : j["areas"]) {
      const std::string where = "areas[" + std::to_string(idx) + "]";
      sc.areas.push_back(parse_area(ja, where));
      std::vector<IbrUnit> units;
      if (ja.contains("ibrs"))
        for (const auto& ju : ja["ibrs"]) units.push_back(parse_ibr(ju, where + ".ibrs"));
      sc.ibrs.push_back(std::move(units));
      ++idx;
    }
  }
  if (j.contains("tielines")) {
    sc.tielines.clear();
    for (const auto& jl : j["tielines"]) {
      reject_unknown(jl, {"from", "to", "coeff_pu_per_rad"}, "tielines");
      TieLine l;
      l.from_area = jl.value("from", 1) - 1;
      l.to_area = jl.value("to", 2) - 1;
      l.coeff = jl.value("coeff_pu_per_rad", 0.1);
      sc.tielines.push_back(l);
    }
  }
  if (j.contains("events")) {
    sc.events.clear();
    int idx = 1;
    for (const auto& je : j["events"])
      sc.events.push_back(parse_event(je, "events[" + std::to_string(idx++) + "]"));
  }
  if (j.contains("noise")) {
    const auto& jn = j["noise"];
    reject_unknown(jn,
                   {"freq_sigma_pu", "tie_sigma_pu", "freq_typical_pu",
                    "tie_typical_pu", "probe_noise_power_pu"},
                   "noise");
    sc.noise.freq_sigma = jn.value("freq_sigma_pu", sc.noise.freq_sigma);
    sc.noise.tie_sigma = jn.value("tie_sigma_pu", sc.noise.tie_sigma);
    sc.noise.freq_typical_pu = jn.value("freq_typical_pu", sc.noise.freq_typical_pu);
    sc.noise.tie_typical_pu = jn.value("tie_typical_pu", sc.noise.tie_typical_pu);
    sc.noise.probe_noise_power =
        jn.value("probe_noise_power_pu", sc.noise.probe_noise_power);
  }
  if (j.contains("estimator")) {
    const auto& je = j["estimator"];
    reject_unknown(je,
                   {"t_ini", "eps", "gain_override", "lambda1", "lambda2",
                    "solver_tol", "max_iters", "smooth_l2", "truncation_energy",
                    "truncation_rank", "tie_filter_tau_s"},
                   "estimator");
    auto& ec = sc.estimator;
    ec.t_ini = je.value("t_ini", static_cast<int>(ec.t_ini));
    ec.eps = je.value("eps", ec.eps);
    if (je.contains("gain_override") && !je["gain_override"].is_null())
      ec.gain_override = je["gain_override"].get<double>();
    ec.lambda1 = je.value("lambda1", ec.lambda1);
    ec.lambda2 = je.value("lambda2", ec.lambda2);
    ec.solver_tol = je.value("solver_tol", ec.solver_tol);
    ec.max_iters = je.value("max_iters", ec.max_iters);
    ec.smooth_l2 = je.value("smooth_l2", ec.smooth_l2);
    if (je.contains("truncation_energy") && !je["truncation_energy"].is_null())
      ec.truncation_energy = je["truncation_energy"].get<double>();
    if (je.contains("truncation_rank") && !je["truncation_rank"].is_null())
      ec.truncation_rank = je["truncation_rank"].get<Eigen::Index>();
    ec.tie_filter_tau = je.value("tie_filter_tau_s", ec.tie_filter_tau);
  }
  if (j.contains("agc")) {
    const auto& ja = j["agc"];
    reject_unknown(ja, {"gain", "bias_load"}, "agc");
    sc.agc.gain = ja.value("gain", sc.agc.gain);
    sc.agc.bias_load = ja.value("bias_load", sc.agc.bias_load);
  }
  if (j.contains("collect")) {
    const auto& jc = j["collect"];
    reject_unknown(jc, {"duration_s", "probe_amplitude_mw"}, "collect");
    rc.collect.duration_s = jc.value("duration_s", rc.collect.duration_s);
    rc.collect.probe_amplitude_mw =
        jc.value("probe_amplitude_mw", rc.collect.probe_amplitude_mw);
  }
  if (j.contains("datasets"))
    rc.dataset_paths = j["datasets"].get<std::vector<std::string>>();

  sc.noise.seed = j.value("seed", sc.noise.seed);
  sc.duration = j.value("duration_s", sc.duration);
  sc.dt_sim = j.value("dt_sim_s", sc.dt_sim);
  sc.dt_sample = j.value("dt_sample_s", sc.dt_sample);
  sc.system_base_mva = j.value("system_base_mva", sc.system_base_mva);
  if (j.contains("controller"))
    sc.controller = controller_from_string(j["controller"].get<std::string>());
  rc.out_dir = j.value("out_dir", rc.out_dir);

  sc.validate();
  return rc;
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("config: parse error: ") + e.what());
  }
  try {
    return parse(j);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("config: ") + e.what());
  }
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::ConfigError, "config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  return from_json_text(text);
}

RunConfig RunConfig::default_three_area() {
  RunConfig rc;
  auto& sc = rc.scenario;
  sc.areas.clear();
  sc.ibrs.clear();

  // Three aggregate areas totalling roughly 800 MVA, 5% machine-base droop
  // expressed on the area bases, 36 mHz deadband.
  const double bases[3] = {300.0, 250.0, 250.0};
  const double inertias[3] = {4.0, 3.5, 3.8};
  for (int i = 0; i < 3; ++i) {
    AreaParams a;
    a.base_mva = bases[i];
    a.inertia_h = inertias[i];
    a.gov_droop = 0.0625;  // 5% on the synchronous fleet share of the base
    a.ibr_droop = 0.15;    // 5% on the IBR fleet share of the base
    a.turbine_tr = 8.0;
    a.turbine_fh = 0.3;
    a.deadband_hz = 0.036;
    sc.areas.push_back(a);

    std::vector<IbrUnit> units(2);
    units[0].id = "area" + std::to_string(i + 1) + "-ibr1";
    units[1].id = "area" + std::to_string(i + 1) + "-ibr2";
    for (auto& u : units) {
      u.p_min = -0.4;
      u.p_max = 0.4;
      u.lag_time_constant = 0.05;
    }
    sc.ibrs.push_back(std::move(units));
  }
  sc.tielines = {{0, 1, 0.35}, {1, 2, 0.28}, {0, 2, 0.21}};
  sc.noise = NoiseModel{};
  sc.controller = ControllerKind::Odde;
  sc.dt_sim = 0.01;
  sc.dt_sample = 0.1;
  sc.duration = 40.0;
  sc.system_base_mva = 100.0;
  rc.collect.duration_s = 10.0;       // 101 samples at 0.1 s
  rc.collect.probe_amplitude_mw = 1.0;
  return rc;
}

}  // namespace ddfc
