#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ddfc/lca.hpp"
#include "ddfc/lti.hpp"
#include "ddfc/signal.hpp"

namespace ddfc {

inline constexpr double kNominalFrequencyHz = 60.0;

/// Aggregate second-order frequency-response parameters of one area
/// (per unit on the area base).
struct AreaParams {
  double inertia_h = 4.0;     // s
  double ibr_droop = 0.15;    // R_I
  double gov_droop = 0.05;    // R_g
  double turbine_tr = 8.0;    // T_R, s
  double turbine_fh = 0.3;    // F_H, high-pressure fraction
  double deadband_hz = 0.036; // governor/IBR droop deadband
  double base_mva = 100.0;

  void validate() const;
};

/// Linearized angle coupling dP_tie = sum_j coeff * (delta_i - delta_j),
/// in p.u. on the system base per radian.
struct TieLine {
  int from_area = 0;
  int to_area = 1;
  double coeff = 0.1;
};

enum class EventKind { StepLoad, Trace, GeneratorTrip };

struct DisturbanceEvent {
  EventKind kind = EventKind::StepLoad;
  int area = 0;
  double magnitude_mw = 0.0;   // step size or lost generation
  double time_s = 10.0;
  std::string trace_path;      // CSV `t,power_pu` for Trace events
  double trace_scale = 1.0;
  double trip_fraction = 1.0 / 3.0;  // share of area inertia/governor removed
};

/// Measurement-noise model.  Sigmas are relative to the typical magnitude
/// of each measured variable; the applied standard deviation is
/// sigma * typical (frequency deviations are already order-one in the
/// per-unit frame used here, so their typical value is 1).
struct NoiseModel {
  double freq_sigma = 1e-6;          // relative, frequency measurements
  double tie_sigma = 2e-2;           // relative, tie-flow measurements
  double freq_typical_pu = 1.0;      // typical frequency-deviation scale
  double tie_typical_pu = 0.05;      // typical tie-flow-deviation scale
  double probe_noise_power = 0.2e-3; // p.u., probing-signal noise power
  std::uint64_t seed = 1;

  double freq_std() const { return freq_sigma * freq_typical_pu; }
  double tie_std() const { return tie_sigma * tie_typical_pu; }
};

enum class ControllerKind { None, Agc, ModelBased, Ldde, Odde };

std::string to_string(ControllerKind k);
ControllerKind controller_from_string(const std::string& s);

struct AgcConfig {
  double gain = 0.08;       // integral gain K_I, 1/s
  double bias_load = 0.0;   // load-damping add-on to the frequency bias
};

struct ScenarioConfig {
  std::vector<AreaParams> areas;
  std::vector<TieLine> tielines;
  std::vector<std::vector<IbrUnit>> ibrs;  // dispatchable units per area
  std::vector<DisturbanceEvent> events;
  NoiseModel noise;
  ControllerKind controller = ControllerKind::None;
  LcaEstimatorConfig estimator;
  AgcConfig agc;
  double dt_sim = 0.01;
  double dt_sample = 0.1;
  double duration = 40.0;
  double system_base_mva = 100.0;
  double dispatch_deadband_mw = 0.5;  // skip IBR redispatch below this
  std::vector<std::string> dataset_paths;  // one per area, data-driven only

  void validate() const;
};

struct AreaSeries {
  Vector delta_f_hz;     // true frequency deviation, Hz
  Vector delta_p_tie;    // p.u. on the area base
  Vector delta_p_ibr;    // total dispatchable IBR output deviation, p.u.
  Vector d_hat_u;        // controller imbalance estimate, p.u.
  Vector gen_speed_pu;   // aggregate generator speed deviation, p.u.
};

struct SimResult {
  double dt_sample = 0.1;
  Vector time;
  std::vector<AreaSeries> areas;
  std::vector<std::string> event_log;

  Eigen::Index samples() const { return time.size(); }
};

/// Offset dead-zone: zero inside the band, shifted identity outside.
double apply_deadband(double delta_omega, double deadband);

/// Continuous-time dynamics state of the multi-area model.
struct GridState {
  Vector omega;   // p.u. speed deviation per area
  Vector gov;     // transformed governor-turbine state per area
  Vector angle;   // aggregate angle deviation per area, rad
  Matrix ibr_out; // actuated IBR output per area x unit, p.u.
};

/// One deterministic RK4 step of the coupled area dynamics.  Inputs that
/// are held over the step (IBR commands, disturbances, AGC commands) are
/// supplied by the caller.
class GridDynamics {
public:
  GridDynamics(const ScenarioConfig& cfg);

  GridState initial_state() const;
  void rk4_step(GridState& s, double t, double dt,
                const std::function<double(int, double)>& disturbance_pu,
                const Matrix& ibr_commands, const Vector& agc_commands) const;

  Vector tie_flows_area_pu(const GridState& s) const;  // per area, area base
  double deadband_pu(int area) const;

  // generator-trip handling: scale inertia and governor response
  void apply_trip(int area, double fraction);

private:
  Vector derivative_omega(const GridState& s, const Vector& p_u,
                          const Vector& tie, const Vector& p_ibr) const;

  const ScenarioConfig* cfg_;
  std::vector<double> h_scale_;    // remaining inertia fraction
  std::vector<double> gov_scale_;  // remaining governor fraction
};

/// The probing setpoint command for dataset collection, in MW:
/// amplitude * sin(12 pi t) plus band-limited white noise (discrete white
/// noise low-passed at half Nyquist).
class ProbeSignal {
public:
  ProbeSignal(double amplitude_mw, double noise_std_mw, double dt_sample,
              std::uint64_t seed);
  double sample(double t);

  /// White-noise standard deviation for a given noise power: the power is
  /// a per-unit variance density on the given base (var = power / dt),
  /// scaled by the sinusoid amplitude in MW.
  static double noise_std_mw(double amplitude_mw, double noise_power, double dt,
                             double base_mva);

private:
  double amplitude_mw_;
  double noise_std_;
  double lp_alpha_;
  double lp_state_ = 0.0;
  std::mt19937_64 rng_;
};

struct CollectOptions {
  int target_area = 0;
  double probe_amplitude_mw = 1.0;
  double duration_s = 10.0;
  std::optional<double> probe_noise_std_mw;  // default: from NoiseModel
};

struct CollectedDataset {
  TrajectoryDataset data;      // d = delta_v, y = delta_f (p.u.)
  bool pe_commanded = false;   // excitation check on the commanded probe
  bool pe_recorded = false;    // excitation check on the recorded channel
  double pe_sigma_min = 0.0;
  std::string warning;
  double base_mva = 100.0;
  std::uint64_t seed = 0;
  double probe_amplitude_mw = 1.0;
};

/// Simulate the quiet grid with probing applied to one area's IBRs and
/// record (delta_v, delta_f) at the sample rate.
CollectedDataset collect_dataset(const ScenarioConfig& cfg, const CollectOptions& opt);

/// Closed-loop scenario simulation; deterministic for a given (config, seed).
SimResult run_scenario(const ScenarioConfig& cfg,
                       const std::vector<TrajectoryDataset>* datasets = nullptr);

}  // namespace ddfc
