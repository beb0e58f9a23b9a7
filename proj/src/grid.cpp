#include "ddfc/grid.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

#include "ddfc/io.hpp"

namespace ddfc {

void AreaParams::validate() const {
  if (!(inertia_h > 0.0) || !(turbine_tr > 0.0) || !(base_mva > 0.0))
    throw Error(ErrorCode::InvalidArgument, "AreaParams: H, T_R, base must be positive");
  if (!(turbine_fh >= 0.0 && turbine_fh <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "AreaParams: F_H must lie in [0, 1]");
  if (deadband_hz < 0.0)
    throw Error(ErrorCode::InvalidArgument, "AreaParams: deadband must be >= 0");
  if (!(ibr_droop > 0.0) || !(gov_droop > 0.0))
    throw Error(ErrorCode::InvalidArgument, "AreaParams: droops must be positive");
}

void ScenarioConfig::validate() const {
  if (areas.empty())
    throw Error(ErrorCode::ConfigError, "scenario: at least one area required");
  for (const auto& a : areas) a.validate();
  if (ibrs.size() != areas.size())
    throw Error(ErrorCode::ConfigError, "scenario: need one IBR list per area");
  if (!(dt_sim > 0.0) || !(dt_sample > 0.0) || dt_sim > dt_sample)
    throw Error(ErrorCode::ConfigError, "scenario: require 0 < dt_sim <= dt_sample");
  if (!(duration > 0.0))
    throw Error(ErrorCode::ConfigError, "scenario: duration must be positive");
  const int n = static_cast<int>(areas.size());
  for (const auto& l : tielines) {
    if (l.from_area == l.to_area)
      throw Error(ErrorCode::ConfigError, "scenario: tie line self-loop");
    if (l.from_area < 0 || l.from_area >= n || l.to_area < 0 || l.to_area >= n)
      throw Error(ErrorCode::ConfigError, "scenario: tie line references unknown area");
    if (!(l.coeff > 0.0))
      throw Error(ErrorCode::ConfigError, "scenario: tie coefficient must be positive");
  }
  for (const auto& e : events) {
    if (e.area < 0 || e.area >= n)
      throw Error(ErrorCode::ConfigError, "scenario: event references unknown area");
    if (e.time_s < 0.0 || !std::isfinite(e.magnitude_mw))
      throw Error(ErrorCode::ConfigError, "scenario: bad event time or magnitude");
  }
  if (noise.freq_sigma < 0.0 || noise.tie_sigma < 0.0 || noise.probe_noise_power < 0.0 ||
      noise.freq_typical_pu < 0.0 || noise.tie_typical_pu < 0.0)
    throw Error(ErrorCode::ConfigError, "scenario: noise sigmas must be >= 0");
}

std::string to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::None: return "none";
    case ControllerKind::Agc: return "agc";
    case ControllerKind::ModelBased: return "model_based";
    case ControllerKind::Ldde: return "ldde";
    case ControllerKind::Odde: return "odde";
  }
  return "none";
}

ControllerKind controller_from_string(const std::string& s) {
  if (s == "none" || s == "droop") return ControllerKind::None;
  if (s == "agc") return ControllerKind::Agc;
  if (s == "model_based") return ControllerKind::ModelBased;
  if (s == "ldde") return ControllerKind::Ldde;
  if (s == "odde") return ControllerKind::Odde;
  throw Error(ErrorCode::ConfigError, "unknown controller: " + s);
}

double apply_deadband(double delta_omega, double deadband) {
  if (deadband < 0.0)
    throw Error(ErrorCode::InvalidArgument, "apply_deadband: deadband must be >= 0");
  if (std::abs(delta_omega) <= deadband) return 0.0;
  return delta_omega > 0.0 ? delta_omega - deadband : delta_omega + deadband;
}

GridDynamics::GridDynamics(const ScenarioConfig& cfg) : cfg_(&cfg) {
  h_scale_.assign(cfg.areas.size(), 1.0);
  gov_scale_.assign(cfg.areas.size(), 1.0);
}

GridState GridDynamics::initial_state() const {
  const auto n = static_cast<Eigen::Index>(cfg_->areas.size());
  Eigen::Index max_units = 0;
  for (const auto& list : cfg_->ibrs)
    max_units = std::max<Eigen::Index>(max_units, list.size());
  GridState s;
  s.omega = Vector::Zero(n);
  s.gov = Vector::Zero(n);
  s.angle = Vector::Zero(n);
  s.ibr_out = Matrix::Zero(n, std::max<Eigen::Index>(max_units, 1));
  return s;
}

double GridDynamics::deadband_pu(int area) const {
  return cfg_->areas[area].deadband_hz / kNominalFrequencyHz;
}

Vector GridDynamics::tie_flows_area_pu(const GridState& s) const {
  const auto n = s.omega.size();
  Vector tie_sys = Vector::Zero(n);
  for (const auto& l : cfg_->tielines) {
    const double flow = l.coeff * (s.angle(l.from_area) - s.angle(l.to_area));
    tie_sys(l.from_area) += flow;
    tie_sys(l.to_area) -= flow;
  }
  Vector tie_area(n);
  for (Eigen::Index i = 0; i < n; ++i)
    tie_area(i) = tie_sys(i) * cfg_->system_base_mva / cfg_->areas[i].base_mva;
  return tie_area;
}

void GridDynamics::apply_trip(int area, double fraction) {
  fraction = std::clamp(fraction, 0.0, 0.95);
  h_scale_[area] *= (1.0 - fraction);
  gov_scale_[area] *= (1.0 - fraction);
}

void GridDynamics::rk4_step(GridState& s, double t, double dt,
                            const std::function<double(int, double)>& disturbance_pu,
                            const Matrix& ibr_commands, const Vector& agc_commands) const {
  const auto n = s.omega.size();

  auto deriv = [&](const GridState& x, double ti, GridState& dx) {
    const Vector tie = tie_flows_area_pu(x);
    dx.omega.resize(n);
    dx.gov.resize(n);
    dx.angle.resize(n);
    dx.ibr_out.resize(x.ibr_out.rows(), x.ibr_out.cols());
    dx.ibr_out.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& a = cfg_->areas[i];
      // the dead zone sits on the turbine-governor input; converter droop
      // responds across the whole band
      const double db = deadband_pu(static_cast<int>(i));
      const double w_db = apply_deadband(x.omega(i), db);
      const double gov_scale = gov_scale_[i];
      double p_ibr = 0.0;
      const auto& units = cfg_->ibrs[i];
      for (std::size_t k = 0; k < units.size(); ++k) {
        p_ibr += x.ibr_out(i, static_cast<Eigen::Index>(k));
        const double tau = std::max(1e-4, units[k].lag_time_constant);
        dx.ibr_out(i, static_cast<Eigen::Index>(k)) =
            (ibr_commands(i, static_cast<Eigen::Index>(k)) -
             x.ibr_out(i, static_cast<Eigen::Index>(k))) / tau;
      }
      const double p_u = disturbance_pu(static_cast<int>(i), ti);
      const double p_m = x.gov(i) - gov_scale * (a.turbine_fh / a.gov_droop) * w_db;
      const double two_h = 2.0 * a.inertia_h * h_scale_[i];
      dx.omega(i) =
          (-(1.0 / a.ibr_droop) * x.omega(i) + p_m - p_u - tie(i) + p_ibr) / two_h;
      dx.gov(i) = (-(x.gov(i) +
                     gov_scale * ((1.0 - a.turbine_fh) / a.gov_droop) * w_db) +
                   agc_commands(i)) / a.turbine_tr;
      dx.angle(i) = 2.0 * M_PI * kNominalFrequencyHz * x.omega(i);
    }
  };

  auto axpy = [&](const GridState& x, double h, const GridState& d) {
    GridState y;
    y.omega = x.omega + h * d.omega;
    y.gov = x.gov + h * d.gov;
    y.angle = x.angle + h * d.angle;
    y.ibr_out = x.ibr_out + h * d.ibr_out;
    return y;
  };

  GridState k1, k2, k3, k4;
  deriv(s, t, k1);
  deriv(axpy(s, dt / 2, k1), t + dt / 2, k2);
  deriv(axpy(s, dt / 2, k2), t + dt / 2, k3);
  deriv(axpy(s, dt, k3), t + dt, k4);
  s.omega += dt / 6.0 * (k1.omega + 2 * k2.omega + 2 * k3.omega + k4.omega);
  s.gov += dt / 6.0 * (k1.gov + 2 * k2.gov + 2 * k3.gov + k4.gov);
  s.angle += dt / 6.0 * (k1.angle + 2 * k2.angle + 2 * k3.angle + k4.angle);
  s.ibr_out += dt / 6.0 * (k1.ibr_out + 2 * k2.ibr_out + 2 * k3.ibr_out + k4.ibr_out);
}

double ProbeSignal::noise_std_mw(double amplitude_mw, double noise_power,
                                 double dt, double base_mva) {
  // noise power is a per-unit variance density on the given base
  // (variance = power / dt); the component scales with the probe amplitude
  // so a zero-amplitude probe is an exact zero signal
  return std::sqrt(noise_power / dt) * base_mva * std::abs(amplitude_mw);
}

ProbeSignal::ProbeSignal(double amplitude_mw, double noise_std_mw,
                         double dt_sample, std::uint64_t seed)
    : amplitude_mw_(amplitude_mw), noise_std_(noise_std_mw), rng_(seed) {
  const double f_half_nyquist = 0.25 / dt_sample;
  lp_alpha_ = std::exp(-2.0 * M_PI * f_half_nyquist * dt_sample);
}

double ProbeSignal::sample(double t) {
  std::normal_distribution<double> dist(0.0, 1.0);
  const double white = noise_std_ * dist(rng_);
  lp_state_ = lp_alpha_ * lp_state_ + (1.0 - lp_alpha_) * white;
  return amplitude_mw_ * std::sin(12.0 * M_PI * t) + lp_state_;
}

namespace {

struct TraceData {
  std::vector<double> t;
  std::vector<double> p;

  double interp(double time) const {
    if (t.empty()) return 0.0;
    if (time <= t.front()) return p.front();
    if (time >= t.back()) return p.back();
    auto it = std::upper_bound(t.begin(), t.end(), time);
    const auto k = static_cast<std::size_t>(it - t.begin());
    const double w = (time - t[k - 1]) / (t[k] - t[k - 1]);
    return (1.0 - w) * p[k - 1] + w * p[k];
  }
};

struct EventRuntime {
  const DisturbanceEvent* ev;
  TraceData trace;
  bool trip_applied = false;
};

class Simulator {
public:
  Simulator(const ScenarioConfig& cfg) : cfg_(cfg), dyn_(cfg) {
    cfg_.validate();
    n_ = static_cast<int>(cfg_.areas.size());
    steps_per_sample_ = static_cast<int>(std::llround(cfg_.dt_sample / cfg_.dt_sim));
    if (steps_per_sample_ < 1 ||
        std::abs(steps_per_sample_ * cfg_.dt_sim - cfg_.dt_sample) > 1e-9)
      throw Error(ErrorCode::ConfigError,
                  "scenario: dt_sample must be an integer multiple of dt_sim");
    for (const auto& e : cfg_.events) {
      EventRuntime rt;
      rt.ev = &e;
      if (e.kind == EventKind::Trace) rt.trace = load_trace(e.trace_path);
      events_.push_back(std::move(rt));
    }
  }

  // Discontinuous components (steps, trips) switch on integration-interval
  // starts so the effective event time is identical at every dt_sim;
  // traces interpolate continuously at the stage times.
  double step_disturbance_pu(int area, double interval_start) const {
    double total = 0.0;
    for (const auto& rt : events_) {
      const auto& e = *rt.ev;
      if (e.area != area || e.kind == EventKind::Trace) continue;
      if (interval_start >= e.time_s - 1e-9)
        total += e.magnitude_mw / cfg_.areas[area].base_mva;
    }
    return total;
  }

  double trace_disturbance_pu(int area, double t) const {
    double total = 0.0;
    for (const auto& rt : events_) {
      const auto& e = *rt.ev;
      if (e.area != area || e.kind != EventKind::Trace || t < e.time_s) continue;
      // positive trace values are extra injection, i.e. negative imbalance
      total -= e.trace_scale * rt.trace.interp(t - e.time_s);
    }
    return total;
  }

  void check_finite(const GridState& s, double t) const {
    for (Eigen::Index i = 0; i < s.omega.size(); ++i) {
      if (!std::isfinite(s.omega(i)) || std::abs(s.omega(i)) > 0.5) {
        std::ostringstream os;
        os << "NumericalDivergence in area " << i + 1 << " at t=" << t;
        throw Error(ErrorCode::NumericalDivergence, os.str());
      }
    }
  }

  ScenarioConfig cfg_;
  GridDynamics dyn_;
  int n_ = 0;
  int steps_per_sample_ = 0;
  std::vector<EventRuntime> events_;

  static TraceData load_trace(const std::string& path) {
    const auto table = read_csv(path);
    TraceData td;
    td.t = table.column("t");
    td.p = table.column("power_pu");
    return td;
  }
};

}  // namespace

CollectedDataset collect_dataset(const ScenarioConfig& cfg, const CollectOptions& opt) {
  ScenarioConfig quiet = cfg;
  quiet.events.clear();  // calm conditions by contract
  quiet.controller = ControllerKind::None;
  quiet.duration = opt.duration_s;
  Simulator sim(quiet);
  auto& dyn = sim.dyn_;

  const int target = opt.target_area;
  if (target < 0 || target >= sim.n_)
    throw Error(ErrorCode::ConfigError, "collect: target area out of range");
  const double base = quiet.areas[target].base_mva;
  const auto n_units = quiet.ibrs[target].size();

  const auto samples =
      static_cast<Eigen::Index>(std::llround(opt.duration_s / quiet.dt_sample)) + 1;

  std::mt19937_64 meas_rng(quiet.noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double noise_std =
      opt.probe_noise_std_mw
          ? *opt.probe_noise_std_mw
          : ProbeSignal::noise_std_mw(opt.probe_amplitude_mw,
                                      quiet.noise.probe_noise_power,
                                      quiet.dt_sample, quiet.system_base_mva);
  ProbeSignal probe(opt.probe_amplitude_mw, noise_std, quiet.dt_sample,
                    quiet.noise.seed ^ 0x9e3779b97f4a7c15ull);
  LowPassFilter tie_filter(quiet.estimator.tie_filter_tau, quiet.dt_sample);
  LowPassFilter ibr_filter(quiet.estimator.ibr_lag_comp, quiet.dt_sample);

  GridState state = dyn.initial_state();
  Matrix commands = Matrix::Zero(sim.n_, state.ibr_out.cols());
  const Vector agc = Vector::Zero(sim.n_);
  auto no_disturbance = [](int, double) { return 0.0; };

  Matrix delta_v(samples, 1), delta_f(samples, 1), commanded(samples, 1);
  for (Eigen::Index k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) * quiet.dt_sample;

    // measurement noise (frequency then tie flow, area-major, every sample)
    Vector freq_noise(sim.n_), tie_noise(sim.n_);
    for (int i = 0; i < sim.n_; ++i) {
      freq_noise(i) = quiet.noise.freq_std() * gauss(meas_rng);
      tie_noise(i) = quiet.noise.tie_std() * gauss(meas_rng);
    }

    delta_f(k, 0) = state.omega(target) + freq_noise(target);

    const double probe_mw = probe.sample(t);
    const double probe_pu = probe_mw / base;
    double setpoint_sum = 0.0;
    for (std::size_t u = 0; u < n_units; ++u) {
      commands(target, static_cast<Eigen::Index>(u)) = probe_pu;
      setpoint_sum += probe_pu;
    }
    commanded(k, 0) = setpoint_sum;

    const Vector tie = dyn.tie_flows_area_pu(state);
    const double tie_meas = tie_filter.step(tie(target) + tie_noise(target));
    delta_v(k, 0) = ibr_filter.step(setpoint_sum) - tie_meas;

    for (int s = 0; s < sim.steps_per_sample_ && k + 1 < samples; ++s)
      dyn.rk4_step(state, t + s * quiet.dt_sim, quiet.dt_sim, no_disturbance,
                   commands, agc);
    sim.check_finite(state, t);
  }

  CollectedDataset out;
  out.data.u = Signal(Matrix::Zero(samples, 0), quiet.dt_sample);
  out.data.d = Signal(delta_v, quiet.dt_sample);
  out.data.y = Signal(delta_f, quiet.dt_sample);
  out.data.noisy =
      quiet.noise.freq_sigma > 0.0 || quiet.noise.tie_sigma > 0.0 ||
      quiet.noise.probe_noise_power > 0.0;
  out.base_mva = base;
  out.seed = quiet.noise.seed;
  out.probe_amplitude_mw = opt.probe_amplitude_mw;

  const auto pe_order = quiet.estimator.t_ini + 1 + 8;
  const auto pe_cmd = is_persistently_exciting(Signal(commanded, quiet.dt_sample),
                                               pe_order);
  const auto pe_rec = is_persistently_exciting(out.data.d, pe_order);
  out.pe_commanded = pe_cmd.ok;
  out.pe_recorded = pe_rec.ok;
  out.pe_sigma_min = pe_rec.sigma_min;
  if (!pe_cmd.ok)
    out.warning = "commanded probe is not persistently exciting: " + pe_cmd.reason;
  return out;
}

SimResult run_scenario(const ScenarioConfig& cfg,
                       const std::vector<TrajectoryDataset>* datasets) {
  Simulator sim(cfg);
  auto& dyn = sim.dyn_;
  const int n = sim.n_;
  const bool data_driven = cfg.controller == ControllerKind::Ldde ||
                           cfg.controller == ControllerKind::Odde;

  // controllers
  std::vector<LcaController> controllers;
  if (data_driven) {
    if (datasets == nullptr || static_cast<int>(datasets->size()) != n)
      throw Error(ErrorCode::DatasetRequired,
                  "scenario: data-driven controller needs one dataset per area");
    LcaEstimatorConfig ec = cfg.estimator;
    ec.kind = cfg.controller == ControllerKind::Ldde ? LcaEstimatorKind::Ldde
                                                     : LcaEstimatorKind::Odde;
    for (int i = 0; i < n; ++i) {
      ec.base_mva = cfg.areas[i].base_mva;
      controllers.emplace_back(ec, (*datasets)[i], cfg.dt_sample);
    }
  } else if (cfg.controller == ControllerKind::ModelBased) {
    LcaEstimatorConfig ec = cfg.estimator;
    ec.kind = LcaEstimatorKind::ModelBased;
    for (int i = 0; i < n; ++i) {
      const auto& a = cfg.areas[i];
      Matrix ac(2, 2), bc(2, 2), bdc(2, 1), c(1, 2);
      const double two_h = 2.0 * a.inertia_h;
      ac << -(1.0 / a.ibr_droop + a.turbine_fh / a.gov_droop) / two_h, 1.0 / two_h,
          -(1.0 - a.turbine_fh) / (a.gov_droop * a.turbine_tr), -1.0 / a.turbine_tr;
      bc << 1.0 / two_h, -1.0 / two_h, 0.0, 0.0;
      bdc << -1.0 / two_h, 0.0;
      c << 1.0, 0.0;
      // zero-order hold over one sample period
      Matrix aug = Matrix::Zero(5, 5);
      aug.topLeftCorner(2, 2) = ac;
      aug.block(0, 2, 2, 2) = bc;
      aug.block(0, 4, 2, 1) = bdc;
      const Matrix expm = (aug * cfg.dt_sample).exp();
      LtiSystem model(expm.topLeftCorner(2, 2), expm.block(0, 2, 2, 2),
                      expm.block(0, 4, 2, 1), c, Matrix::Zero(1, 2));
      controllers.emplace_back(ec, model);
    }
  }

  std::mt19937_64 meas_rng(cfg.noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  GridState state = dyn.initial_state();
  Matrix commands = Matrix::Zero(n, state.ibr_out.cols());
  Vector agc_cmd = Vector::Zero(n);
  Vector agc_state = Vector::Zero(n);
  auto ibr_units = cfg.ibrs;  // mutable copy tracking setpoints

  const auto samples =
      static_cast<Eigen::Index>(std::llround(cfg.duration / cfg.dt_sample)) + 1;

  SimResult result;
  result.dt_sample = cfg.dt_sample;
  result.time = Vector::Zero(samples);
  result.areas.assign(n, AreaSeries{Vector::Zero(samples), Vector::Zero(samples),
                                    Vector::Zero(samples), Vector::Zero(samples),
                                    Vector::Zero(samples)});
  for (const auto& rt : sim.events_) {
    std::ostringstream os;
    os << "t=" << rt.ev->time_s << "s area=" << rt.ev->area + 1 << " ";
    switch (rt.ev->kind) {
      case EventKind::StepLoad:
        os << "step_load " << rt.ev->magnitude_mw << " MW";
        break;
      case EventKind::GeneratorTrip:
        os << "generator_trip " << rt.ev->magnitude_mw << " MW";
        break;
      case EventKind::Trace:
        os << "trace " << rt.ev->trace_path;
        break;
    }
    result.event_log.push_back(os.str());
  }

  for (Eigen::Index k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) * cfg.dt_sample;
    const Vector tie = dyn.tie_flows_area_pu(state);

    // sampled, noise-corrupted measurements (the only thing controllers see)
    Vector freq_meas(n), tie_meas(n);
    for (int i = 0; i < n; ++i) {
      freq_meas(i) = state.omega(i) + cfg.noise.freq_std() * gauss(meas_rng);
      tie_meas(i) = tie(i) + cfg.noise.tie_std() * gauss(meas_rng);
    }

    Vector d_hat = Vector::Zero(n);
    if (!controllers.empty()) {
      for (int i = 0; i < n; ++i) {
        double setpoint_sum = 0.0;
        for (const auto& u : ibr_units[i]) setpoint_sum += u.setpoint;
        LcaMeasurement meas{freq_meas(i), tie_meas(i), setpoint_sum};
        d_hat(i) = controllers[static_cast<std::size_t>(i)].step(meas);

        // redispatch local IBRs toward the estimated imbalance; a small
        // deadband keeps the units from hunting on estimate noise
        const double request = d_hat(i) - setpoint_sum;
        if (std::abs(request) * cfg.areas[i].base_mva >= cfg.dispatch_deadband_mw) {
          const auto alloc = allocate(request, ibr_units[i]);
          for (std::size_t u = 0; u < ibr_units[i].size(); ++u) {
            ibr_units[i][u].setpoint += alloc.deltas[u];
            commands(i, static_cast<Eigen::Index>(u)) = ibr_units[i][u].setpoint;
          }
        }
      }
    } else if (cfg.controller == ControllerKind::Agc) {
      for (int i = 0; i < n; ++i) {
        const auto& a = cfg.areas[i];
        const double bias = 1.0 / a.ibr_droop + 1.0 / a.gov_droop + cfg.agc.bias_load;
        const double ace = tie_meas(i) + bias * freq_meas(i);
        agc_state(i) -= cfg.agc.gain * ace * cfg.dt_sample;
        agc_cmd(i) = agc_state(i);
      }
    }

    // record the true sampled signals plus the controller estimates
    result.time(k) = t;
    for (int i = 0; i < n; ++i) {
      auto& series = result.areas[static_cast<std::size_t>(i)];
      series.delta_f_hz(k) = state.omega(i) * kNominalFrequencyHz;
      series.gen_speed_pu(k) = state.omega(i);
      series.delta_p_tie(k) = tie(i);
      series.delta_p_ibr(k) = state.ibr_out.row(i).sum();
      series.d_hat_u(k) = d_hat(i);
    }

    if (k + 1 >= samples) break;
    for (int s = 0; s < sim.steps_per_sample_; ++s) {
      const double ts = t + s * cfg.dt_sim;
      // generator trips change the aggregate parameters at the event time
      for (auto& rt : sim.events_) {
        if (rt.ev->kind == EventKind::GeneratorTrip && !rt.trip_applied &&
            ts >= rt.ev->time_s - 1e-9) {
          dyn.apply_trip(rt.ev->area, rt.ev->trip_fraction);
          rt.trip_applied = true;
        }
      }
      auto disturbance = [&sim, ts](int area, double stage_t) {
        return sim.step_disturbance_pu(area, ts) +
               sim.trace_disturbance_pu(area, stage_t);
      };
      dyn.rk4_step(state, ts, cfg.dt_sim, disturbance, commands, agc_cmd);
    }
    sim.check_finite(state, t + cfg.dt_sample);
  }
  return result;
}

}  // namespace ddfc
