#include "ddfc/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace ddfc {

EstimatorState::EstimatorState(Eigen::Index m, Eigen::Index q, Eigen::Index p,
                               Eigen::Index t_ini)
    : t_ini_(t_ini) {
  if (t_ini < 1)
    throw Error(ErrorCode::InvalidArgument, "EstimatorState: T_ini must be >= 1");
  u_buf_.setZero(t_ini, m);
  d_buf_.setZero(t_ini, q);
  y_buf_.setZero(t_ini, p);
  d_hat_.setZero(q);
}

void EstimatorState::record(const Vector& u, const Vector& d, const Vector& y) {
  if (u.size() != u_buf_.cols() || d.size() != d_buf_.cols() ||
      y.size() != y_buf_.cols())
    throw Error(ErrorCode::InvalidArgument, "EstimatorState: record dimension mismatch");
  u_buf_.row(head_) = u.transpose();
  d_buf_.row(head_) = d.transpose();
  y_buf_.row(head_) = y.transpose();
  head_ = (head_ + 1) % t_ini_;
  if (count_ < t_ini_) ++count_;
}

Vector EstimatorState::stacked(const Matrix& buf) const {
  const auto k = buf.cols();
  Vector out(t_ini_ * k);
  for (Eigen::Index i = 0; i < t_ini_; ++i) {
    const auto row = (head_ + i) % t_ini_;  // head_ is the oldest entry
    out.segment(i * k, k) = buf.row(row).transpose();
  }
  return out;
}

void EstimatorState::set_d_hat(Vector d) {
  if (d.size() != d_buf_.cols())
    throw Error(ErrorCode::InvalidArgument, "EstimatorState: d_hat dimension mismatch");
  d_hat_ = std::move(d);
}

LddeConfig::LddeConfig(double eps_, Matrix gain_) : eps(eps_), gain(std::move(gain_)) {
  if (!(eps > 0.0 && eps < 1.0))
    throw Error(ErrorCode::InvalidArgument, "LddeConfig: eps must lie in (0, 1)");
}

void OddeConfig::validate() const {
  if (lambda1 < 0.0 || lambda2 < 0.0)
    throw Error(ErrorCode::InvalidArgument, "OddeConfig: lambda1, lambda2 must be >= 0");
  if (!(solver_tol > 0.0) || max_iters < 1)
    throw Error(ErrorCode::InvalidArgument, "OddeConfig: bad solver settings");
}

Vector ldde_step(EstimatorState& state, const PredictorBlocks& blocks,
                 const LddeConfig& cfg, const Vector& u_now, const Vector& y_now) {
  if (!state.warmed_up()) {
    // No prediction is available yet: seed the output buffer with the
    // measurement and keep d_hat at zero.
    state.record(u_now, state.d_hat(), y_now);
    return state.d_hat();
  }
  const Vector y_hat = blocks.predict(state.u_ini(), state.d_ini(), state.y_ini(),
                                      u_now, state.d_hat());
  const Vector d_next = state.d_hat() - cfg.eps * cfg.gain * (y_hat - y_now);
  state.record(u_now, state.d_hat(), y_hat);
  state.set_d_hat(d_next);
  return d_next;
}

namespace {

// prox of  t * sqrt(c^2 + ||z||^2)  at v: radial problem
//   min_s 0.5 (s - r)^2 + t sqrt(c^2 + s^2),  r = ||v||, s >= 0.
double radial_prox(double r, double t, double c) {
  if (r <= 0.0) return 0.0;
  if (c == 0.0) return std::max(0.0, r - t);  // plain norm shrinkage
  double s = std::max(0.0, r - t);            // bracket [max(0, r-t), r]
  for (int it = 0; it < 60; ++it) {
    const double root = std::sqrt(c * c + s * s);
    const double grad = s - r + t * s / root;
    const double hess = 1.0 + t * c * c / (root * root * root);
    double step = grad / hess;
    double s_new = s - step;
    s_new = std::clamp(s_new, 0.0, r);
    if (std::abs(s_new - s) <= 1e-16 * std::max(1.0, s)) return s_new;
    s = s_new;
  }
  return s;
}

}  // namespace

RegularizedSolver::RegularizedSolver(const PredictorBlocks& blocks,
                                     const OddeConfig& cfg)
    : blocks_(blocks), cfg_(cfg) {
  cfg_.validate();
  N_ = blocks_.fixed_svd().null_basis();
  A1_ = blocks_.y_future() * N_;
  IQ_ = Matrix::Identity(blocks_.columns(), blocks_.columns()) - blocks_.projector();
  A2_ = IQ_ * N_;

  // Rotate the reduced coordinates into the right singular basis of A2 so
  // the lambda1 block of the Hessian is exactly diagonal; this keeps the
  // huge penalty from amplifying rounding noise in the gradient.
  if (N_.cols() > 0) {
    Eigen::JacobiSVD<Matrix> a2svd(A2_, Eigen::ComputeFullV);
    const Matrix& rot = a2svd.matrixV();
    N_ = N_ * rot;
    A1_ = A1_ * rot;
    A2_ = A2_ * rot;
    Vector sigma2 = Vector::Zero(N_.cols());
    const auto& sv = a2svd.singularValues();
    for (Eigen::Index i = 0; i < sv.size(); ++i) sigma2(i) = sv(i) * sv(i);
    H_ = A1_.transpose() * A1_;
    H_ += cfg_.lambda1 * Matrix(sigma2.asDiagonal());
  } else {
    H_.resize(0, 0);
  }
  if (cfg_.smooth_l2)
    H_ += cfg_.lambda2 * Matrix::Identity(H_.rows(), H_.cols());
  Eigen::SelfAdjointEigenSolver<Matrix> es(H_);
  V_ = es.eigenvectors();
  evals_ = es.eigenvalues().cwiseMax(0.0);
  lipschitz_ = 2.0 * (evals_.size() > 0 ? evals_.maxCoeff() : 0.0);
}

double RegularizedSolver::objective(const Vector& g, const Vector& y_now) const {
  const double fit = (y_now - blocks_.y_future() * g).squaredNorm();
  const double proj = (IQ_ * g).squaredNorm();
  const double reg = cfg_.smooth_l2 ? g.squaredNorm() : g.norm();
  return fit + cfg_.lambda1 * proj + cfg_.lambda2 * reg;
}

RegularizedSolution RegularizedSolver::solve(const Vector& fixed_rhs,
                                             const Vector& y_now) const {
  const auto& fsvd = blocks_.fixed_svd();
  if (fixed_rhs.size() != blocks_.fixed_block().rows())
    throw Error(ErrorCode::InvalidArgument,
                "solve_regularized: fixed_rhs dimension mismatch");
  const Vector weights = blocks_.fixed_row_weights();
  const Vector rhs_w = weights.cwiseProduct(fixed_rhs);

  // Truncated blocks treat the window as data for the low-rank model:
  // solved in damped least squares, so inconsistent initialization (wrong
  // past estimates, measurement noise) cannot be amplified without bound.
  // Untruncated blocks reproduce the window exactly or reject it.
  Vector g0;
  if (blocks_.truncation_rank()) {
    const auto& sv = fsvd.singular_values();
    const double mu = sv.size() > 0 ? 1e-3 * sv(0) : 0.0;
    g0 = fsvd.solve_damped(rhs_w, mu);
  } else {
    g0 = fsvd.solve(rhs_w);
    const double feas =
        (weights.cwiseProduct(blocks_.fixed_block() * g0) - rhs_w).norm();
    if (feas > 1e-6 * std::max(1.0, rhs_w.norm()))
      throw Error(ErrorCode::InfeasibleInitialization,
                  "solve_regularized: initialization window is not consistent "
                  "with the recorded data");
  }

  const auto nz = N_.cols();
  const double c = g0.norm();  // g0 is orthogonal to the null space
  const Vector b1 = y_now - blocks_.y_future() * g0;
  // g0 lies in the row space of the (possibly low-rank) H_red, which is
  // inside range(Q), so (I-Q) g0 is exactly zero; computing it numerically
  // would inject lambda1-amplified rounding noise into the gradient
  const Vector a2c = Vector::Zero(blocks_.columns());
  // grad of the smooth part: 2 H z - 2 w
  const Vector w = A1_.transpose() * b1 - cfg_.lambda1 * (A2_.transpose() * a2c);

  const double lam2 = cfg_.smooth_l2 ? 0.0 : cfg_.lambda2;  // nonsmooth weight

  auto smooth_grad = [&](const Vector& z) -> Vector {
    return 2.0 * (H_ * z - w);
  };
  auto full_value = [&](const Vector& z) -> double {
    const double quad = z.dot(H_ * z) - 2.0 * w.dot(z);
    return quad + lam2 * std::sqrt(c * c + z.squaredNorm());
  };
  auto opt_residual = [&](const Vector& z) -> double {
    const Vector gs = smooth_grad(z);
    const double s = std::sqrt(c * c + z.squaredNorm());
    if (s > 0.0) return (gs + lam2 / s * z).norm();
    // kink at the origin: distance of -grad to the lam2 ball
    return std::max(0.0, gs.norm() - lam2);
  };

  SolveCertificate cert;
  Vector z = Vector::Zero(nz);

  if (lam2 == 0.0) {
    // quadratic case: minimum-norm minimizer through the eigenbasis
    const Vector wt = V_.transpose() * w;
    Vector zt = Vector::Zero(nz);
    const double cutoff = (evals_.size() > 0 ? evals_.maxCoeff() : 0.0) * 1e-14;
    for (Eigen::Index i = 0; i < nz; ++i)
      if (evals_(i) > cutoff) zt(i) = wt(i) / evals_(i);
    z = V_ * zt;
    cert.iterations = 1;
  } else if (c == 0.0 && (2.0 * w).norm() <= lam2) {
    z.setZero();  // the origin satisfies the subgradient condition exactly
    cert.iterations = 1;
  } else {
    // Phase 1: accelerated proximal gradient with function-value restart.
    const double step = lipschitz_ > 0.0 ? 1.0 / lipschitz_ : 1.0;
    Vector zk = z, yk = z;
    double tk = 1.0;
    double f_prev = full_value(zk);
    int it = 0;
    const int phase1 = std::min(cfg_.max_iters, 300);
    for (; it < phase1; ++it) {
      const Vector v = yk - step * smooth_grad(yk);
      const double r = v.norm();
      const double s = radial_prox(r, step * lam2, c);
      const Vector z_next = (r > 0.0) ? Vector(s / r * v) : Vector(Vector::Zero(nz));
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
      const double f_next = full_value(z_next);
      if (f_next > f_prev) {  // restart momentum
        yk = zk;
        tk = 1.0;
        continue;
      }
      yk = z_next + (tk - 1.0) / t_next * (z_next - zk);
      zk = z_next;
      tk = t_next;
      f_prev = f_next;
      if (opt_residual(zk) < cfg_.solver_tol) break;
    }
    z = zk;

    // Phase 2: damped Newton polish on the smooth (off-origin) objective.
    // Hessian = 2H + lam2 (I/s - z z^T / s^3); Sherman-Morrison on the
    // eigenbasis of H keeps each step O(n^2).
    for (; it < cfg_.max_iters && opt_residual(z) >= cfg_.solver_tol; ++it) {
      const double s = std::sqrt(c * c + z.squaredNorm());
      if (s == 0.0) break;  // origin already rejected above
      const Vector grad = smooth_grad(z) + lam2 / s * z;
      const double mu = lam2 / s;
      const double beta = lam2 / (s * s * s);
      auto k_solve = [&](const Vector& r) -> Vector {
        const Vector rt = V_.transpose() * r;
        return V_ * (rt.array() / (2.0 * evals_.array() + mu)).matrix();
      };
      const Vector kg = k_solve(grad);
      const Vector kz = k_solve(z);
      const double denom = 1.0 - beta * z.dot(kz);
      // at c = 0 the norm's Hessian is singular along z and the rank-one
      // correction can blow up; the preconditioned gradient still descends
      const Vector dir = denom > 1e-12
                             ? Vector(-(kg + (beta * z.dot(kg) / denom) * kz))
                             : Vector(-kg);

      // full step when it shrinks the gradient (objective differences are
      // below double resolution near the optimum); Armijo fallback otherwise
      const Vector z_full = z + dir;
      if (opt_residual(z_full) < grad.norm()) {
        z = z_full;
        continue;
      }
      double alpha = 1.0;
      const double f0 = full_value(z);
      const double slope = grad.dot(dir);
      Vector z_try = z + alpha * dir;
      int backtracks = 0;
      while (full_value(z_try) > f0 + 1e-4 * alpha * slope && backtracks < 60) {
        alpha *= 0.5;
        z_try = z + alpha * dir;
        ++backtracks;
      }
      if (backtracks >= 60) break;  // no resolvable progress left
      z = z_try;
    }
    cert.iterations = it;
  }

  cert.optimality_residual = opt_residual(z);
  cert.converged = cert.optimality_residual < cfg_.solver_tol;

  RegularizedSolution sol;
  sol.g = g0 + N_ * z;
  sol.objective = objective(sol.g, y_now);
  const Vector residual = blocks_.fixed_block() * sol.g - fixed_rhs;
  cert.constraint_residual =
      blocks_.truncation_rank()
          ? fsvd.projected_residual(weights.cwiseProduct(residual))
          : residual.norm();
  sol.certificate = cert;
  return sol;
}

RegularizedSolution solve_regularized(const PredictorBlocks& blocks,
                                      const Vector& fixed_rhs, const Vector& y_now,
                                      const OddeConfig& cfg) {
  return RegularizedSolver(blocks, cfg).solve(fixed_rhs, y_now);
}

OddeStepResult odde_step(EstimatorState& state, const RegularizedSolver& solver,
                         const Vector& u_now, const Vector& y_now) {
  const auto& blocks = solver.blocks();
  if (!state.warmed_up()) {
    state.record(u_now, state.d_hat(), y_now);
    OddeStepResult out;
    out.d_hat = state.d_hat();
    out.y_hat = Vector::Zero(blocks.output_width());
    return out;
  }
  Vector rhs(blocks.fixed_block().rows());
  rhs << state.u_ini(), state.d_ini(), state.y_ini(), u_now;
  const auto sol = solver.solve(rhs, y_now);

  OddeStepResult out;
  out.d_hat = blocks.free_disturbance_rows() * sol.g;
  out.y_hat = blocks.y_future() * sol.g;
  out.certificate = sol.certificate;
  state.record(u_now, out.d_hat, y_now);  // measured output per Eq. (8)
  state.set_d_hat(out.d_hat);
  return out;
}

Matrix dc_gain_from_data(const TrajectoryDataset& data, Eigen::Index t_ini) {
  data.check_consistent();
  const auto blocks = PredictorBlocks::partition(data.u, data.d, data.y, t_ini);
  const auto m = blocks.input_width();
  const auto q = blocks.disturbance_width();
  const auto p = blocks.output_width();
  const auto cols = blocks.columns();
  const auto L = t_ini + 1;

  // Unknowns [g; y_inf]: inputs zero, disturbance held at e_i, output held
  // at the unknown constant level across all block rows.  Rows are
  // channel-normalized like the predictor blocks, so small-magnitude output
  // channels are not sacrificed by the least-squares fit.
  auto channel_scale = [&](const Signal& w, Eigen::Index ch) {
    const double rms = w.samples().col(ch).norm() / std::sqrt(double(w.length()));
    return rms > 1e-300 ? rms : 1.0;
  };

  Matrix M(L * (m + q + p), cols + p);
  M.setZero();
  Vector weights = Vector::Ones(M.rows());
  Eigen::Index row = 0;
  if (m > 0) {
    M.block(row, 0, m * t_ini, cols) = blocks.u_past();
    M.block(row + m * t_ini, 0, m, cols) = blocks.u_future();
    for (Eigen::Index i = 0; i < L; ++i)
      for (Eigen::Index ch = 0; ch < m; ++ch)
        weights(row + i * m + ch) = 1.0 / channel_scale(data.u, ch);
    row += m * L;
  }
  M.block(row, 0, q * t_ini, cols) = blocks.d_past();
  M.block(row + q * t_ini, 0, q, cols) = blocks.d_future();
  const auto d_row = row;
  for (Eigen::Index i = 0; i < L; ++i)
    for (Eigen::Index ch = 0; ch < q; ++ch)
      weights(row + i * q + ch) = 1.0 / channel_scale(data.d, ch);
  row += q * L;
  M.block(row, 0, p * t_ini, cols) = blocks.y_past();
  M.block(row + p * t_ini, 0, p, cols) = blocks.y_future();
  // the level unknowns are substituted as y_inf = scale_y * z so the
  // minimum-norm trade-off between g and the level is unit-free
  for (Eigen::Index i = 0; i < L; ++i) {
    for (Eigen::Index ch = 0; ch < p; ++ch) {
      M(row + i * p + ch, cols + ch) = -channel_scale(data.y, ch);
      weights(row + i * p + ch) = 1.0 / channel_scale(data.y, ch);
    }
  }

  const Matrix Mw = weights.asDiagonal() * M;
  const SvdPinv msvd(Mw);
  Matrix gain(p, q);
  for (Eigen::Index ch = 0; ch < q; ++ch) {
    // probe with one RMS-unit of the disturbance channel, so the solved g
    // is order one in any unit system, then rescale the level
    const double s_d = channel_scale(data.d, ch);
    Vector rhs = Vector::Zero(M.rows());
    for (Eigen::Index i = 0; i < L; ++i) rhs(d_row + i * q + ch) = s_d;
    const Vector rhs_w = weights.cwiseProduct(rhs);
    const Vector sol = msvd.solve(rhs_w);
    const double residual = (Mw * sol - rhs_w).norm() / rhs_w.norm();
    const double gate = data.noisy ? 1e-1 : 1e-6;
    if (residual > gate)
      throw Error(ErrorCode::DcGainIdentificationFailed,
                  "dc_gain_from_data: constancy system residual too large");
    for (Eigen::Index yc = 0; yc < p; ++yc)
      gain(yc, ch) = channel_scale(data.y, yc) * sol(cols + yc) / s_d;
  }
  return gain;
}

}  // namespace ddfc
