#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

#include "ddfc/signal.hpp"

namespace ddfc {

/// Discrete-time LTI model
///   x(t+1) = A x(t) + B u(t) + B_d d(t)
///   y(t)   = C x(t) + D u(t)
/// used for simulation oracles and the model-based observer baseline.
class LtiSystem {
public:
  LtiSystem(Matrix A, Matrix B, Matrix Bd, Matrix C, Matrix D,
            bool require_stable = false);

  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  const Matrix& Bd() const { return Bd_; }
  const Matrix& C() const { return C_; }
  const Matrix& D() const { return D_; }

  Eigen::Index n() const { return A_.rows(); }
  Eigen::Index m() const { return B_.cols(); }
  Eigen::Index q() const { return Bd_.cols(); }
  Eigen::Index p() const { return C_.rows(); }

  double spectral_radius() const;

private:
  Matrix A_, B_, Bd_, C_, D_;
};

/// Forward recursion of the state equation.  Returns the output sequence
/// and the visited states, both of the input's length and period.
std::pair<Signal, Signal> simulate_lti(const LtiSystem& sys, const Vector& x0,
                                       const Signal& u, const Signal& d);

/// Steady-state disturbance-to-output gain C (I - A)^{-1} B_d.
/// Throws MarginallyStable when I - A is singular.
Matrix dc_gain_analytic(const LtiSystem& sys);

/// The estimation-error matrix [[A, B_d], [-eps*L*C, I]] whose Schur
/// stability governs convergence of the disturbance estimators.
class AugmentedEstimatorMatrix {
public:
  AugmentedEstimatorMatrix(const LtiSystem& sys, const Matrix& gain, double eps);

  const Matrix& matrix() const { return M_; }
  double eps() const { return eps_; }
  double spectral_radius() const;

private:
  Matrix M_;
  double eps_;
};

/// Luenberger observer state: stacked [x_hat; d_hat].
struct ObserverState {
  Vector xd;

  static ObserverState zero(const LtiSystem& sys) {
    return ObserverState{Vector::Zero(sys.n() + sys.q())};
  }
  Vector x_hat(const LtiSystem& sys) const { return xd.head(sys.n()); }
  Vector d_hat(const LtiSystem& sys) const { return xd.tail(sys.q()); }
};

/// One step of the augmented Luenberger recursion; the model-based
/// baseline standing in for a parametric disturbance observer.  Returns
/// (d_hat(t+1), x_hat(t+1)) and advances the state in place.
std::pair<Vector, Vector> model_based_observer_step(const LtiSystem& sys,
                                                    ObserverState& state,
                                                    const Vector& u, const Vector& y,
                                                    double eps, const Matrix& gain);

/// Seeded random Schur-stable test system: entries uniform, A rescaled to
/// spectral radius in [0.5, 0.9], D = 0, controllable from (u, d).
LtiSystem random_stable_system(std::uint64_t seed, Eigen::Index n, Eigen::Index m,
                               Eigen::Index q, Eigen::Index p);

}  // namespace ddfc
