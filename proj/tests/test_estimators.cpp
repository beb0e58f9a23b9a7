#include <Eigen/Dense>
#include <cmath>

#include "ddfc/estimators.hpp"
#include "ddfc/hankel.hpp"
#include "ddfc/lti.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace ddfc;

namespace {

LtiSystem scalar_system(double a = 0.5) {
  return LtiSystem(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, 1.0),
                   Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0),
                   Matrix::Constant(1, 1, 0.0));
}

TrajectoryDataset exact_dataset(const LtiSystem& sys, std::uint64_t seed,
                                Eigen::Index length) {
  TrajectoryDataset ds;
  ds.u = oracles::random_signal(seed, length, sys.m());
  ds.d = oracles::random_signal(seed + 1, length, sys.q());
  auto [y, x] = simulate_lti(sys, Vector::Zero(sys.n()), ds.u, ds.d);
  ds.y = y;
  return ds;
}

// small seeded instance for the regularized solver
struct SolverInstance {
  PredictorBlocks blocks;
  Vector fixed_rhs;
  Vector y_now;
};

SolverInstance small_instance(std::uint64_t seed, Eigen::Index length = 24,
                              Eigen::Index t_ini = 4) {
  const auto u = oracles::random_signal(seed, length, 1);
  const auto d = oracles::random_signal(seed + 1, length, 1);
  const auto y = oracles::random_signal(seed + 2, length, 1);
  SolverInstance inst{PredictorBlocks::partition(u, d, y, t_ini), {}, {}};
  // a consistent right-hand side plus a fresh output sample
  const auto g_rand = oracles::random_signal(seed + 3, length - t_ini, 1);
  inst.fixed_rhs = inst.blocks.fixed_block() * g_rand.samples().col(0);
  inst.y_now = Vector::Constant(1, 0.3 * std::sin(double(seed)));
  return inst;
}

}  // namespace

TEST_SUITE_BEGIN("estimators");

TEST_CASE("dc gain from data: scalar system") {
  const auto sys = scalar_system();
  const auto ds = exact_dataset(sys, 5, 101);
  const auto gain = dc_gain_from_data(ds, 7);
  CHECK(std::abs(gain(0, 0) - 2.0) < 1e-8);
}

TEST_CASE("dc gain from data matches the analytic gain on seeded systems") {
  for (std::uint64_t seed : {2, 9, 23}) {
    const auto sys = random_stable_system(seed, 4, 1, 1, 1);
    const auto ds = exact_dataset(sys, seed * 7, 101);
    const auto est = dc_gain_from_data(ds, 7);
    const auto ref = dc_gain_analytic(sys);
    CHECK(std::abs(est(0, 0) - ref(0, 0)) < 1e-8);
  }
}

TEST_CASE("dc gain from noisy data stays within one percent relative") {
  const auto sys = random_stable_system(3, 4, 1, 1, 1);
  auto ds = exact_dataset(sys, 31, 101);
  ds.y = Signal(ds.y.samples() + oracles::random_signal(77, 101, 1, 1.0, 1e-4).samples(),
                1.0);
  ds.noisy = true;
  const auto est = dc_gain_from_data(ds, 7);
  const auto ref = dc_gain_analytic(sys);
  CHECK(std::abs(est(0, 0) - ref(0, 0)) < 1e-2 * std::abs(ref(0, 0)));
}

TEST_CASE("estimators stay quiet before warm-up and at rest") {
  const auto sys = scalar_system();
  const auto ds = exact_dataset(sys, 8, 101);
  const auto blocks = PredictorBlocks::partition(ds.u, ds.d, ds.y, 7);
  EstimatorState state(1, 1, 1, 7);
  const LddeConfig cfg(0.2, Matrix::Constant(1, 1, 0.5));

  for (int t = 0; t < 30; ++t) {
    const auto d_next = ldde_step(state, blocks, cfg, Vector::Zero(1), Vector::Zero(1));
    CHECK(d_next(0) == 0.0);  // fixed point of the update
    if (t < 6) CHECK_FALSE(state.warmed_up());
  }
  CHECK(state.warmed_up());
}

TEST_CASE("linear estimator converges at the eigenvalue-predicted rate on exact data") {
  const auto sys = scalar_system();
  const auto ds = exact_dataset(sys, 8, 101);
  const auto blocks = PredictorBlocks::partition(ds.u, ds.d, ds.y, 7);
  const double eps = 0.2;
  const Matrix gain = Matrix::Constant(1, 1, 0.5);
  const double rho = AugmentedEstimatorMatrix(sys, gain, eps).spectral_radius();

  EstimatorState state(1, 1, 1, 7);
  const LddeConfig cfg(eps, gain);

  // rest until t = 10, then a unit disturbance step
  Vector x = Vector::Zero(1);
  const int T = 300;
  Vector err(T);
  for (int t = 0; t < T; ++t) {
    const double d_true = t >= 10 ? 1.0 : 0.0;
    const Vector y = sys.C() * x;
    err(t) = std::abs(state.d_hat()(0) - d_true);
    ldde_step(state, blocks, cfg, Vector::Zero(1), y);
    x = sys.A() * x + sys.Bd() * Vector::Constant(1, d_true);
  }
  CHECK(err(T - 1) < 1e-9);
  const double slope = oracles::log_slope(err.tail(T - 15));
  CHECK(std::abs(slope - std::log(rho)) < 0.1 * std::abs(std::log(rho)));
}

TEST_CASE("linear estimator reproduces the state-space estimator trajectory") {
  // exactness on noise-free data: the data-driven prediction equals the
  // model's output estimate step for step
  const auto sys = random_stable_system(6, 3, 1, 1, 1);
  const auto ds = exact_dataset(sys, 60, 120);
  const auto blocks = PredictorBlocks::partition(ds.u, ds.d, ds.y, 7);
  const Matrix gain = SvdPinv(dc_gain_analytic(sys)).pinv();
  const double eps = 0.15;
  const LddeConfig cfg(eps, gain);

  EstimatorState state(1, 1, 1, 7);
  auto obs = ObserverState::zero(sys);

  Vector x = Vector::Zero(sys.n());
  const auto u_seq = oracles::random_signal(61, 80, 1);
  double max_gap = 0.0;
  for (int t = 0; t < 80; ++t) {
    const double d_true = t >= 20 ? 0.7 : 0.0;
    const Vector u = u_seq.at(t);
    const Vector y = sys.C() * x + sys.D() * u;

    ldde_step(state, blocks, cfg, u, y);
    const double y_hat_data = state.y_ini().tail(1)(0);  // last recorded value

    const Vector y_hat_model = sys.C() * obs.x_hat(sys) + sys.D() * u;
    model_based_observer_step(sys, obs, u, y, eps, gain);

    if (t >= 7)  // both warmed and consistently initialized from rest
      max_gap = std::max(max_gap, std::abs(y_hat_data - y_hat_model(0)));
    x = sys.A() * x + sys.B() * u + sys.Bd() * Vector::Constant(1, d_true);
  }
  const double y_scale = std::sqrt(ds.y.samples().squaredNorm() / 120.0);
  CHECK(max_gap < 1e-8 * std::max(1.0, y_scale));
}

TEST_CASE("theorem end-to-end: exponential decay across the stable grid") {
  for (std::uint64_t seed : {4, 14}) {
    const auto sys = random_stable_system(seed, 3, 1, 1, 1);
    const auto ds = exact_dataset(sys, seed + 50, 101);
    const auto blocks = PredictorBlocks::partition(ds.u, ds.d, ds.y, 7);
    const Matrix gain = SvdPinv(dc_gain_analytic(sys)).pinv();
    for (double eps : {0.05, 0.1, 0.2}) {
      if (AugmentedEstimatorMatrix(sys, gain, eps).spectral_radius() >= 1.0) continue;
      EstimatorState state(1, 1, 1, 7);
      const LddeConfig cfg(eps, gain);
      Vector x = Vector::Zero(sys.n());
      const int T = 400;
      Vector err(T);
      for (int t = 0; t < T; ++t) {
        const double d_true = t >= 10 ? 1.0 : 0.0;
        const Vector y = sys.C() * x;
        err(t) = std::abs(state.d_hat()(0) - d_true);
        ldde_step(state, blocks, cfg, Vector::Zero(1), y);
        x = sys.A() * x + sys.Bd() * Vector::Constant(1, d_true);
      }
      CHECK(oracles::log_slope(err.tail(T - 15)) < 0.0);
      CHECK(err(T - 1) < 1e-6);
    }
  }
}

TEST_CASE("buffer policies: linear stores predictions, regularized stores measurements") {
  const auto sys = scalar_system();
  const auto ds = exact_dataset(sys, 8, 101);
  const auto blocks = PredictorBlocks::partition(ds.u, ds.d, ds.y, 7);

  EstimatorState ldde_state(1, 1, 1, 7);
  const LddeConfig lcfg(0.2, Matrix::Constant(1, 1, 0.5));
  for (int t = 0; t < 7; ++t)
    ldde_step(ldde_state, blocks, lcfg, Vector::Zero(1), Vector::Zero(1));
  // warmed: feed an output that cannot match the rest prediction
  ldde_step(ldde_state, blocks, lcfg, Vector::Zero(1), Vector::Constant(1, 0.5));
  CHECK(ldde_state.y_ini().tail(1)(0) == doctest::Approx(0.0));  // prediction, not 0.5

  OddeConfig ocfg;
  ocfg.lambda1 = 1e4;
  ocfg.lambda2 = 1.0;
  ocfg.solver_tol = 1e-7;
  const RegularizedSolver solver(blocks, ocfg);
  EstimatorState odde_state(1, 1, 1, 7);
  for (int t = 0; t < 7; ++t)
    odde_step(odde_state, solver, Vector::Zero(1), Vector::Zero(1));
  odde_step(odde_state, solver, Vector::Zero(1), Vector::Constant(1, 0.5));
  CHECK(odde_state.y_ini().tail(1)(0) == doctest::Approx(0.5));  // measured
}

TEST_CASE("regularized estimator: zero history is optimal at zero") {
  const auto ds = exact_dataset(scalar_system(), 12, 60);
  const auto blocks = PredictorBlocks::partition(ds.u, ds.d, ds.y, 5);
  OddeConfig cfg;  // stock tuning
  const RegularizedSolver solver(blocks, cfg);
  EstimatorState state(1, 1, 1, 5);
  for (int t = 0; t < 5; ++t) odde_step(state, solver, Vector::Zero(1), Vector::Zero(1));
  const auto res = odde_step(state, solver, Vector::Zero(1), Vector::Zero(1));
  CHECK(std::abs(res.d_hat(0)) < 1e-12);
  CHECK(std::abs(res.y_hat(0)) < 1e-12);
  CHECK(res.certificate.converged);
}

TEST_CASE("with lambda2 = 0 and exact data the prediction matches the linear path") {
  const auto sys = random_stable_system(6, 3, 1, 1, 1);
  const auto ds = exact_dataset(sys, 60, 120);
  const auto blocks = PredictorBlocks::partition(ds.u, ds.d, ds.y, 7);

  OddeConfig cfg;
  cfg.lambda1 = 1e8;
  cfg.lambda2 = 0.0;
  const RegularizedSolver solver(blocks, cfg);

  // windows from a fresh exact trajectory
  const auto fresh = exact_dataset(sys, 61, 40);
  for (Eigen::Index t : {10, 20, 30}) {
    Vector u_ini(7), d_ini(7), y_ini(7);
    for (Eigen::Index i = 0; i < 7; ++i) {
      u_ini(i) = fresh.u.samples()(t - 7 + i, 0);
      d_ini(i) = fresh.d.samples()(t - 7 + i, 0);
      y_ini(i) = fresh.y.samples()(t - 7 + i, 0);
    }
    Vector rhs(blocks.fixed_block().rows());
    rhs << u_ini, d_ini, y_ini, fresh.u.at(t);
    const auto sol = solver.solve(rhs, fresh.y.at(t));
    const Vector y_7a = blocks.predict(u_ini, d_ini, y_ini, fresh.u.at(t),
                                       fresh.d.at(t));
    CHECK(std::abs((blocks.y_future() * sol.g)(0) - y_7a(0)) < 1e-6);
    CHECK(std::abs((blocks.y_future() * sol.g)(0) - fresh.y.at(t)(0)) < 1e-6);
  }
}

TEST_CASE("plain constrained least squares matches the dense oracle") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    auto inst = small_instance(seed);
    OddeConfig cfg;
    cfg.lambda1 = 0.0;
    cfg.lambda2 = 0.0;
    const auto sol = solve_regularized(inst.blocks, inst.fixed_rhs, inst.y_now, cfg);
    const auto oracle = oracles::constrained_ls(inst.blocks.fixed_block(),
                                                inst.fixed_rhs,
                                                inst.blocks.y_future(), inst.y_now);
    CHECK(std::abs(sol.objective - oracle.objective) < 1e-8);
    CHECK(std::abs((inst.blocks.y_future() * sol.g)(0) - oracle.y_hat(0)) < 1e-8);
    // minimum-norm among minimizers: the oracle minimizer cannot be shorter
    CHECK(sol.g.norm() <= oracle.g.norm() + 1e-8);
    CHECK(sol.certificate.constraint_residual < 1e-9);
  }
}

TEST_CASE("a very large norm penalty shrinks toward the minimum-norm feasible point") {
  auto inst = small_instance(11);
  OddeConfig cfg;
  cfg.lambda1 = 0.0;
  cfg.lambda2 = 1e8;
  const auto sol = solve_regularized(inst.blocks, inst.fixed_rhs, inst.y_now, cfg);
  const Vector g0 = inst.blocks.fixed_svd().solve(
      inst.blocks.fixed_row_weights().cwiseProduct(inst.fixed_rhs));
  CHECK((sol.g - g0).norm() < 1e-6 * std::max(1.0, g0.norm()));
}

TEST_CASE("infeasible initialization windows are rejected") {
  // exact data makes the past-output rows linearly dependent, so the fixed
  // block is row-rank deficient and inconsistent right-hand sides exist
  const auto sys = random_stable_system(2, 2, 1, 1, 1);
  const auto ds = exact_dataset(sys, 101, 60);
  const auto blocks = PredictorBlocks::partition(ds.u, ds.d, ds.y, 6);
  Eigen::JacobiSVD<Matrix> svd(blocks.fixed_block(),
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Index rank = blocks.fixed_svd().rank();
  REQUIRE(rank < blocks.fixed_block().rows());

  const auto g_rand = oracles::random_signal(5, blocks.columns(), 1);
  const Vector feasible = blocks.fixed_block() * g_rand.samples().col(0);
  const Vector bad = feasible + svd.matrixU().col(svd.matrixU().cols() - 1);
  OddeConfig cfg;
  CHECK_THROWS_AS(solve_regularized(blocks, bad, Vector::Zero(1), cfg), Error);
  // the feasible window itself is accepted
  CHECK_NOTHROW(solve_regularized(blocks, feasible, Vector::Zero(1), cfg));
}

TEST_CASE("solver certificates reach the stock tolerance") {
  for (std::uint64_t seed : {31, 32, 33}) {
    auto inst = small_instance(seed);
    OddeConfig cfg;  // lambda1 1e8, lambda2 1e2, tol 1e-9
    const auto sol = solve_regularized(inst.blocks, inst.fixed_rhs, inst.y_now, cfg);
    CHECK(sol.certificate.converged);
    CHECK(sol.certificate.optimality_residual < cfg.solver_tol);
    CHECK(sol.certificate.constraint_residual < 1e-9);
  }
}

TEST_CASE("objective matches a long-run subgradient-descent oracle") {
  for (std::uint64_t seed : {41, 42}) {
    auto inst = small_instance(seed);
    OddeConfig cfg;
    cfg.lambda1 = 1e2;
    cfg.lambda2 = 0.5;
    const auto sol = solve_regularized(inst.blocks, inst.fixed_rhs, inst.y_now, cfg);
    const double oracle = oracles::subgradient_descent_objective(
        inst.blocks.fixed_block(), inst.fixed_rhs, inst.blocks.y_future(),
        inst.blocks.projector(), inst.y_now, cfg.lambda1, cfg.lambda2, 200000, seed);
    CHECK(sol.objective <= oracle + 1e-6);
    CHECK(std::abs(sol.objective - oracle) < 1e-6);
  }
}

TEST_CASE("returned point beats random feasible perturbations") {
  auto inst = small_instance(51);
  OddeConfig cfg;
  cfg.lambda1 = 1e4;
  cfg.lambda2 = 10.0;
  const auto sol = solve_regularized(inst.blocks, inst.fixed_rhs, inst.y_now, cfg);

  const Matrix N = inst.blocks.fixed_svd().null_basis();
  const Matrix IQ = Matrix::Identity(inst.blocks.columns(), inst.blocks.columns()) -
                    inst.blocks.projector();
  auto objective = [&](const Vector& g) {
    return (inst.y_now - inst.blocks.y_future() * g).squaredNorm() +
           cfg.lambda1 * (IQ * g).squaredNorm() + cfg.lambda2 * g.norm();
  };
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    Vector z(N.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = 0.1 * gauss(rng);
    const Vector g_pert = sol.g + N * z;
    CHECK(objective(g_pert) >= sol.objective - 1e-12);
  }
}

TEST_CASE("smooth ablation variant solves the squared problem") {
  auto inst = small_instance(61);
  OddeConfig cfg;
  cfg.lambda1 = 1e2;
  cfg.lambda2 = 5.0;
  cfg.smooth_l2 = true;
  const auto sol = solve_regularized(inst.blocks, inst.fixed_rhs, inst.y_now, cfg);
  CHECK(sol.certificate.converged);
  // reference through the reduced normal equations
  const Matrix N = inst.blocks.fixed_svd().null_basis();
  const Vector g0 = inst.blocks.fixed_svd().solve(
      inst.blocks.fixed_row_weights().cwiseProduct(inst.fixed_rhs));
  const Matrix IQ = Matrix::Identity(inst.blocks.columns(), inst.blocks.columns()) -
                    inst.blocks.projector();
  const Matrix A1 = inst.blocks.y_future() * N;
  const Matrix A2 = IQ * N;
  const Matrix H = A1.transpose() * A1 + cfg.lambda1 * A2.transpose() * A2 +
                   cfg.lambda2 * Matrix::Identity(N.cols(), N.cols());
  const Vector w = A1.transpose() * (inst.y_now - inst.blocks.y_future() * g0) -
                   cfg.lambda1 * A2.transpose() * (IQ * g0) -
                   cfg.lambda2 * (N.transpose() * g0);
  const Vector z_ref = H.ldlt().solve(w);
  CHECK((sol.g - (g0 + N * z_ref)).norm() < 1e-7);
}

TEST_SUITE_END();
