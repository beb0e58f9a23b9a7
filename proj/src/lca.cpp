#include "ddfc/lca.hpp"

#include <cmath>

namespace ddfc {

double aggregate_input(const LcaMeasurement& m, double d_hat_u) {
  return m.delta_p_ibr - m.delta_p_tie - d_hat_u;
}

Allocation allocate(double d_hat_u, const std::vector<IbrUnit>& ibrs) {
  Allocation out;
  out.deltas.assign(ibrs.size(), 0.0);
  if (!std::isfinite(d_hat_u))
    throw Error(ErrorCode::InvalidArgument, "allocate: request must be finite");
  if (d_hat_u == 0.0) return out;

  const double sign = d_hat_u > 0.0 ? 1.0 : -1.0;
  double total_headroom = 0.0;
  std::vector<double> headroom(ibrs.size());
  for (std::size_t i = 0; i < ibrs.size(); ++i) {
    headroom[i] = sign > 0.0 ? ibrs[i].p_max - ibrs[i].setpoint
                             : ibrs[i].setpoint - ibrs[i].p_min;
    headroom[i] = std::max(0.0, headroom[i]);
    total_headroom += headroom[i];
  }

  const double request = std::abs(d_hat_u);
  double served = 0.0;
  if (total_headroom > 0.0) {
    const double scale = std::min(1.0, request / total_headroom);
    for (std::size_t i = 0; i < ibrs.size(); ++i) {
      out.deltas[i] = sign * scale * headroom[i];
      served += out.deltas[i];
    }
  }
  out.remainder = d_hat_u - served;
  if (std::abs(out.remainder) < 1e-15 * std::max(1.0, request)) out.remainder = 0.0;
  return out;
}

LowPassFilter::LowPassFilter(double tau_s, double dt_s) {
  alpha_ = tau_s > 0.0 ? std::exp(-dt_s / tau_s) : 0.0;
}

double LowPassFilter::step(double x) {
  if (!primed_) {
    y_ = x * (1.0 - alpha_);  // start from rest (deviation variables)
    primed_ = true;
    return y_;
  }
  y_ = alpha_ * y_ + (1.0 - alpha_) * x;
  return y_;
}

namespace {

PredictorBlocks build_blocks(const LcaEstimatorConfig& cfg,
                             const TrajectoryDataset& dataset) {
  dataset.check_consistent();
  auto blocks = PredictorBlocks::partition(dataset.u, dataset.d, dataset.y,
                                           cfg.t_ini, cfg.output_row_weight);
  if (cfg.truncation_rank) return blocks.truncate(*cfg.truncation_rank);
  if (cfg.truncation_energy) return blocks.truncate_energy(*cfg.truncation_energy);
  if (cfg.truncation_threshold) {
    if (*cfg.truncation_threshold <= 0.0) return blocks;  // explicitly off
    return blocks.truncate_threshold(*cfg.truncation_threshold);
  }
  // noise-floor cutoff for noisy records; exact data keeps the full rank
  if (dataset.noisy) return blocks.truncate_threshold(1e-4);
  return blocks;
}

}  // namespace

LcaController::LcaController(const LcaEstimatorConfig& cfg,
                             const TrajectoryDataset& dataset, double dt_sample)
    : cfg_(cfg), unit_d_(cfg.base_mva), unit_y_(cfg.freq_unit) {
  if (cfg.kind == LcaEstimatorKind::ModelBased)
    throw Error(ErrorCode::InvalidArgument,
                "LcaController: model-based variant needs an area model");
  // work in MW / mHz numbers so the stock penalty weights act where the
  // measurement noise ends and real events begin
  TrajectoryDataset scaled = dataset;
  scaled.d = Signal(Matrix(dataset.d.samples() * unit_d_), dataset.d.period());
  scaled.y = Signal(Matrix(dataset.y.samples() * unit_y_), dataset.y.period());
  if (cfg.kind == LcaEstimatorKind::Odde) {
    // causal pairing for the joint estimator: row k holds the input applied
    // over the interval that produced the row-k output
    const auto T = scaled.length();
    scaled.d = Signal(Matrix(scaled.d.samples().topRows(T - 1)), scaled.d.period());
    scaled.y = Signal(Matrix(scaled.y.samples().bottomRows(T - 1)), scaled.y.period());
    scaled.u = Signal(Matrix::Zero(T - 1, 0), scaled.y.period());
  }
  blocks_ = build_blocks(cfg, scaled);
  state_.emplace(blocks_->input_width(), blocks_->disturbance_width(),
                 blocks_->output_width(), cfg.t_ini);
  if (cfg.tie_filter_tau > 0.0) tie_filter_.emplace(cfg.tie_filter_tau, dt_sample);
  if (cfg.ibr_lag_comp > 0.0) ibr_filter_.emplace(cfg.ibr_lag_comp, dt_sample);
  push_alpha_ = cfg.odde_push_tau > 0.0 ? std::exp(-dt_sample / cfg.odde_push_tau) : 0.0;

  // Gain on the lumped-input channel: pseudoinverse of the identified DC
  // gain unless overridden.
  double gain_v;
  if (cfg.gain_override) {
    gain_v = *cfg.gain_override;
  } else {
    // the constancy window must cover the slow interconnection dynamics,
    // which takes more depth than the estimator window needs
    const auto depth = std::max(cfg.t_ini, cfg.gain_ident_depth);
    const Matrix g1 = dc_gain_from_data(scaled, depth);
    const double g = g1(0, 0);
    if (std::abs(g) < 1e-12)
      throw Error(ErrorCode::DcGainIdentificationFailed,
                  "LcaController: identified DC gain is numerically zero");
    gain_v = 1.0 / g;
  }
  if (cfg.kind == LcaEstimatorKind::Ldde) {
    ldde_.emplace(cfg.eps, Matrix::Constant(1, 1, gain_v));
  } else {
    OddeConfig oc;
    oc.lambda1 = cfg.lambda1;
    oc.lambda2 = cfg.lambda2;
    oc.solver_tol = cfg.solver_tol;
    oc.max_iters = cfg.max_iters;
    oc.smooth_l2 = cfg.smooth_l2;
    odde_ = std::make_shared<RegularizedSolver>(*blocks_, oc);
  }
}

LcaController::LcaController(const LcaEstimatorConfig& cfg, const LtiSystem& area_model)
    : cfg_(cfg), model_(area_model) {
  if (cfg.kind != LcaEstimatorKind::ModelBased)
    throw Error(ErrorCode::InvalidArgument,
                "LcaController: data-driven variant needs a dataset");
  observer_ = ObserverState::zero(*model_);
  if (cfg.gain_override) {
    mb_gain_ = Matrix::Constant(1, 1, *cfg.gain_override);
  } else {
    const Matrix g1 = dc_gain_analytic(*model_);
    mb_gain_ = SvdPinv(g1).pinv();
  }
  // The observer runs at the model's sample rate; tie filtering matches the
  // data-driven controllers for a like-for-like comparison.
  if (cfg.tie_filter_tau > 0.0) tie_filter_.emplace(cfg.tie_filter_tau, 0.1);
}

double LcaController::step(const LcaMeasurement& m) {
  const double tie = tie_filter_ ? tie_filter_->step(m.delta_p_tie) : m.delta_p_tie;
  const double ibr = ibr_filter_ ? ibr_filter_->step(m.delta_p_ibr) : m.delta_p_ibr;

  if (model_) {
    // report the pre-update estimate, then absorb the new measurement
    d_hat_u_ = observer_->d_hat(*model_)(0);
    Vector u(2);
    u << m.delta_p_ibr, tie;
    model_based_observer_step(*model_, *observer_, u,
                              Vector::Constant(1, m.delta_f), cfg_.eps, mb_gain_);
    return d_hat_u_;
  }

  // The dataset pairs each frequency sample with the lumped input held over
  // the interval ending at that sample; online windows follow the same
  // convention, so the estimate refers to the imbalance that has already
  // acted on the measured frequency.  Internals run in the dataset's MW /
  // mHz numbers; the interface stays per unit.
  const double net_injection = (ibr - tie) * unit_d_;
  const Vector y_now = Vector::Constant(1, m.delta_f * unit_y_);
  const Vector u_now(0);
  const bool warm = state_->warmed_up();
  if (cfg_.kind == LcaEstimatorKind::Ldde) {
    // simultaneous pairing: the linear update works on the current lumped
    // input, exactly as recorded in the dataset
    const double d_hat_internal = warm ? d_hat_u_next_ : 0.0;
    d_hat_u_ = d_hat_internal / unit_d_;
    const double delta_v = net_injection - d_hat_internal;
    state_->set_d_hat(Vector::Constant(1, delta_v));
    const Vector v_next = ldde_step(*state_, *blocks_, *ldde_, u_now, y_now);
    // the update acted on delta_v; translate back to the imbalance estimate
    d_hat_u_next_ = warm ? net_injection - v_next(0) : 0.0;
    return d_hat_u_;
  }

  // optimization-based: the current estimate falls out of the solve.  The
  // buffers receive the optimizer's own (input, output) pair, which keeps
  // every window an exact trajectory of the identified behavior; windows
  // pinned to measured outputs turn the solve into a plant inversion whose
  // sampled zero dynamics ring violently.
  if (!warm) {
    state_->record(u_now, Vector::Constant(1, prev_net_injection_), y_now);
    prev_net_injection_ = net_injection;
    d_hat_u_ = 0.0;
    return d_hat_u_;
  }
  Vector rhs(blocks_->fixed_block().rows());
  rhs << state_->u_ini(), state_->d_ini(), state_->y_ini(), u_now;
  const auto sol = odde_->solve(rhs, y_now);
  last_cert_ = sol.certificate;
  const double v_opt = (blocks_->free_disturbance_rows() * sol.g)(0);
  // low-pass the jumpy per-step optimum; the buffers get the filtered value
  // with its own consistent prediction so the windows stay in-behavior
  v_bar_ = push_alpha_ * v_bar_ + (1.0 - push_alpha_) * v_opt;
  const Vector y_push = blocks_->predict(state_->u_ini(), state_->d_ini(),
                                         state_->y_ini(), u_now,
                                         Vector::Constant(1, v_bar_));
  state_->record(u_now, Vector::Constant(1, v_bar_), y_push);
  state_->set_d_hat(Vector::Constant(1, v_bar_));
  d_hat_u_ = (prev_net_injection_ - v_bar_) / unit_d_;
  prev_net_injection_ = net_injection;
  return d_hat_u_;
}

}  // namespace ddfc
