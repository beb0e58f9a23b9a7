#include "ddfc/lti.hpp"

#include <random>
#include <string>

namespace ddfc {

namespace {

void require(bool ok, const std::string& operand, const std::string& what) {
  if (!ok)
    throw Error(ErrorCode::InvalidArgument, "LtiSystem: " + operand + " " + what);
}

}  // namespace

LtiSystem::LtiSystem(Matrix A, Matrix B, Matrix Bd, Matrix C, Matrix D,
                     bool require_stable)
    : A_(std::move(A)), B_(std::move(B)), Bd_(std::move(Bd)), C_(std::move(C)),
      D_(std::move(D)) {
  const auto n = A_.rows();
  require(A_.cols() == n, "A", "must be square");
  require(B_.rows() == n, "B", "row count must equal state dimension");
  require(Bd_.rows() == n, "B_d", "row count must equal state dimension");
  require(C_.cols() == n, "C", "column count must equal state dimension");
  require(D_.rows() == C_.rows(), "D", "row count must equal output dimension");
  require(D_.cols() == B_.cols(), "D", "column count must equal input dimension");
  if (require_stable && !(spectral_radius() < 1.0 + 1e-10))
    throw Error(ErrorCode::InvalidArgument,
                "LtiSystem: A is not Schur stable (spectral radius >= 1)");
}

double LtiSystem::spectral_radius() const {
  return A_.eigenvalues().cwiseAbs().maxCoeff();
}

std::pair<Signal, Signal> simulate_lti(const LtiSystem& sys, const Vector& x0,
                                       const Signal& u, const Signal& d) {
  if (x0.size() != sys.n())
    throw Error(ErrorCode::InvalidArgument, "simulate_lti: x0 dimension mismatch");
  if (u.channels() != sys.m())
    throw Error(ErrorCode::InvalidArgument, "simulate_lti: u channel mismatch");
  if (d.channels() != sys.q())
    throw Error(ErrorCode::InvalidArgument, "simulate_lti: d channel mismatch");
  if (u.length() != d.length() || u.period() != d.period())
    throw Error(ErrorCode::InvalidArgument,
                "simulate_lti: u and d must share length and period");

  const auto T = u.length();
  Matrix ys(T, sys.p());
  Matrix xs(T, sys.n());
  Vector x = x0;
  for (Eigen::Index t = 0; t < T; ++t) {
    xs.row(t) = x.transpose();
    ys.row(t) = (sys.C() * x + sys.D() * u.at(t)).transpose();
    x = sys.A() * x + sys.B() * u.at(t) + sys.Bd() * d.at(t);
  }
  return {Signal(std::move(ys), u.period()), Signal(std::move(xs), u.period())};
}

Matrix dc_gain_analytic(const LtiSystem& sys) {
  const Matrix ImA = Matrix::Identity(sys.n(), sys.n()) - sys.A();
  Eigen::FullPivLU<Matrix> lu(ImA);
  if (!lu.isInvertible())
    throw Error(ErrorCode::MarginallyStable,
                "dc_gain_analytic: I - A is singular (marginally stable system)");
  return sys.C() * lu.solve(sys.Bd());
}

AugmentedEstimatorMatrix::AugmentedEstimatorMatrix(const LtiSystem& sys,
                                                   const Matrix& gain, double eps)
    : eps_(eps) {
  if (gain.rows() != sys.q() || gain.cols() != sys.p())
    throw Error(ErrorCode::InvalidArgument,
                "AugmentedEstimatorMatrix: gain must be q x p");
  if (!(eps >= 0.0 && eps < 1.0))
    throw Error(ErrorCode::InvalidArgument,
                "AugmentedEstimatorMatrix: eps must lie in [0, 1)");
  const auto n = sys.n(), q = sys.q();
  M_.setZero(n + q, n + q);
  M_.topLeftCorner(n, n) = sys.A();
  M_.topRightCorner(n, q) = sys.Bd();
  M_.bottomLeftCorner(q, n) = -eps * gain * sys.C();
  M_.bottomRightCorner(q, q) = Matrix::Identity(q, q);
}

double AugmentedEstimatorMatrix::spectral_radius() const {
  return M_.eigenvalues().cwiseAbs().maxCoeff();
}

std::pair<Vector, Vector> model_based_observer_step(const LtiSystem& sys,
                                                    ObserverState& state,
                                                    const Vector& u, const Vector& y,
                                                    double eps, const Matrix& gain) {
  if (state.xd.size() != sys.n() + sys.q())
    throw Error(ErrorCode::InvalidArgument,
                "model_based_observer_step: state dimension must be n + q");
  if (u.size() != sys.m() || y.size() != sys.p())
    throw Error(ErrorCode::InvalidArgument,
                "model_based_observer_step: input/output dimension mismatch");

  const Vector x_hat = state.xd.head(sys.n());
  const Vector d_hat = state.xd.tail(sys.q());
  const Vector y_hat = sys.C() * x_hat + sys.D() * u;

  Vector next(sys.n() + sys.q());
  next.head(sys.n()) = sys.A() * x_hat + sys.B() * u + sys.Bd() * d_hat;
  next.tail(sys.q()) = d_hat - eps * gain * (y_hat - y);
  state.xd = next;
  return {next.tail(sys.q()), next.head(sys.n())};
}

LtiSystem random_stable_system(std::uint64_t seed, Eigen::Index n, Eigen::Index m,
                               Eigen::Index q, Eigen::Index p) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto fill = [&](Eigen::Index r, Eigen::Index c) {
    Matrix M(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) M(i, j) = unif(rng);
    return M;
  };

  // Controllability of (A, [B B_d]) via the Kalman rank test; regenerate on
  // the (measure-zero) degenerate draws.
  for (int attempt = 0; attempt < 64; ++attempt) {
    Matrix A = fill(n, n);
    const double rho = A.eigenvalues().cwiseAbs().maxCoeff();
    const double target = 0.5 + 0.4 * std::uniform_real_distribution<double>(0, 1)(rng);
    if (rho > 0) A *= target / rho;
    Matrix B = fill(n, m);
    Matrix Bd = fill(n, q);
    Matrix C = fill(p, n);
    Matrix D = Matrix::Zero(p, m);

    Matrix Bud(n, m + q);
    Bud << B, Bd;
    Matrix ctrb(n, (m + q) * n);
    Matrix blk = Bud;
    for (Eigen::Index k = 0; k < n; ++k) {
      ctrb.middleCols(k * (m + q), m + q) = blk;
      blk = A * blk;
    }
    Eigen::JacobiSVD<Matrix> svd(ctrb);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) > 1e-8 * sv(0))
      return LtiSystem(std::move(A), std::move(B), std::move(Bd), std::move(C),
                       std::move(D), /*require_stable=*/true);
  }
  throw Error(ErrorCode::InvalidArgument,
              "random_stable_system: could not draw a controllable system");
}

}  // namespace ddfc
