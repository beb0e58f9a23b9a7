#pragma once

#include <Eigen/Dense>
#include <optional>

#include "ddfc/hankel.hpp"
#include "ddfc/signal.hpp"

namespace ddfc {

/// Ring buffers of the last T_ini inputs, disturbance estimates and
/// outputs.  The linear estimator stores predicted outputs here, the
/// optimization-based one stores measured outputs; both policies are
/// implemented by the caller through what it passes to record().
class EstimatorState {
public:
  EstimatorState(Eigen::Index m, Eigen::Index q, Eigen::Index p, Eigen::Index t_ini);

  bool warmed_up() const { return count_ >= t_ini_; }
  Eigen::Index t_ini() const { return t_ini_; }

  void record(const Vector& u, const Vector& d, const Vector& y);

  /// Stacked buffer contents, oldest sample first.
  Vector u_ini() const { return stacked(u_buf_); }
  Vector d_ini() const { return stacked(d_buf_); }
  Vector y_ini() const { return stacked(y_buf_); }

  const Vector& d_hat() const { return d_hat_; }
  void set_d_hat(Vector d);

private:
  Vector stacked(const Matrix& buf) const;
  Eigen::Index t_ini_, count_ = 0, head_ = 0;
  Matrix u_buf_, d_buf_, y_buf_;  // t_ini rows each
  Vector d_hat_;
};

struct LddeConfig {
  double eps = 0.2;
  Matrix gain;  // q x p, recommended: pseudoinverse of the identified DC gain

  LddeConfig(double eps_, Matrix gain_);
};

struct OddeConfig {
  double lambda1 = 1e8;
  double lambda2 = 1e2;
  double solver_tol = 1e-9;
  int max_iters = 5000;
  bool smooth_l2 = false;  // ablation: squared l2 regularizer instead of the norm

  void validate() const;
};

struct SolveCertificate {
  double constraint_residual = 0.0;
  double optimality_residual = 0.0;
  int iterations = 0;
  bool converged = true;
};

struct RegularizedSolution {
  Vector g;
  double objective = 0.0;
  SolveCertificate certificate;
};

/// Equality-constrained regularized problem behind the optimization-based
/// estimator:
///
///   minimize  ||y - Y_f g||^2 + lambda1 ||(I - Q) g||^2 + lambda2 ||g||_2
///   s.t.      [U_p; D_p; Y_p; U_f] g = fixed_rhs
///
/// The constraint is eliminated through an orthonormal null-space basis of
/// the fixed block; the reduced problem is solved by an accelerated
/// proximal gradient method with restart, followed by a damped Newton
/// polish on the (smooth off the origin) reduced objective so that the
/// optimality certificate reaches solver_tol.  Matrices depending only on
/// the blocks are cached, so per-sample solves are cheap.
class RegularizedSolver {
public:
  RegularizedSolver(const PredictorBlocks& blocks, const OddeConfig& cfg);

  RegularizedSolution solve(const Vector& fixed_rhs, const Vector& y_now) const;

  const PredictorBlocks& blocks() const { return blocks_; }

private:
  double objective(const Vector& g, const Vector& y_now) const;

  PredictorBlocks blocks_;
  OddeConfig cfg_;
  Matrix N_;             // null-space basis of the fixed block
  Matrix A1_;            // Y_f N
  Matrix A2_;            // (I - Q) N
  Matrix IQ_;            // I - Q
  Matrix H_;             // A1'A1 + lambda1 A2'A2 (+ lambda2 I when smooth_l2)
  Matrix V_;             // eigenvectors of H
  Vector evals_;         // eigenvalues of H
  double lipschitz_ = 0.0;
};

RegularizedSolution solve_regularized(const PredictorBlocks& blocks,
                                      const Vector& fixed_rhs, const Vector& y_now,
                                      const OddeConfig& cfg);

/// One step of the linear data-driven disturbance estimator: predict the
/// output with the cached prediction matrix, then move d_hat against the
/// prediction error.  Records (u, d_hat, y_hat) and returns d_hat(t+1).
Vector ldde_step(EstimatorState& state, const PredictorBlocks& blocks,
                 const LddeConfig& cfg, const Vector& u_now, const Vector& y_now);

struct OddeStepResult {
  Vector d_hat;
  Vector y_hat;
  SolveCertificate certificate;
};

/// One step of the optimization-based estimator: solve the regularized
/// program for (d_hat(t), y_hat(t)), record (u, d_hat, y_measured).
OddeStepResult odde_step(EstimatorState& state, const RegularizedSolver& solver,
                         const Vector& u_now, const Vector& y_now);

/// Identified DC gain from disturbance to output.  For each disturbance
/// channel the stacked-Hankel system is solved for a trajectory with
/// u = 0, d = e_i and an output held constant across all T_ini + 1 block
/// rows; the constant level is column i of the result.
Matrix dc_gain_from_data(const TrajectoryDataset& data, Eigen::Index t_ini);

}  // namespace ddfc
