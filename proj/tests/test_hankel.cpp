#include <Eigen/Dense>
#include <cmath>

#include "ddfc/hankel.hpp"
#include "ddfc/lti.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace ddfc;

namespace {

// exact (u, d, y) record from a seeded system driven by white noise
TrajectoryDataset exact_dataset(const LtiSystem& sys, std::uint64_t seed,
                                Eigen::Index length) {
  TrajectoryDataset ds;
  ds.u = oracles::random_signal(seed, length, sys.m());
  ds.d = oracles::random_signal(seed + 1, length, sys.q());
  auto [y, x] = simulate_lti(sys, Vector::Zero(sys.n()), ds.u, ds.d);
  ds.y = y;
  return ds;
}

}  // namespace

TEST_SUITE_BEGIN("hankel");

TEST_CASE("hankel matrix of a scalar signal, depth 2") {
  Matrix s(4, 1);
  s << 1, 2, 3, 4;
  const auto H = hankel(Signal(s, 1.0), 2);
  Matrix expect(2, 3);
  expect << 1, 2, 3, 2, 3, 4;
  CHECK(H.data.isApprox(expect));
  CHECK(H.depth == 2);
  CHECK(H.channel_width == 1);
}

TEST_CASE("depth-1 hankel of a two-channel signal is the sample matrix") {
  Matrix s(3, 2);
  s << 1, 4, 2, 5, 3, 6;
  const auto H = hankel(Signal(s, 1.0), 1);
  CHECK(H.data.isApprox(s.transpose()));
}

TEST_CASE("hankel windows of depth 3") {
  Matrix s(5, 1);
  s << 1, 2, 3, 4, 5;
  const auto H = hankel(Signal(s, 1.0), 3);
  Matrix expect(3, 3);
  expect << 1, 2, 3, 2, 3, 4, 3, 4, 5;
  CHECK(H.data.isApprox(expect));
}

TEST_CASE("depth beyond the data is rejected") {
  Matrix s(3, 1);
  s << 1, 2, 3;
  CHECK_THROWS_AS(hankel(Signal(s, 1.0), 4), Error);
  CHECK_THROWS_AS(hankel(Signal(s, 1.0), 0), Error);
}

TEST_CASE("hankel window property on random signals") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto w = oracles::random_signal(seed, 30, 2);
    for (Eigen::Index L : {1, 3, 7}) {
      const auto H = hankel(w, L);
      for (Eigen::Index j = 0; j < H.data.cols(); ++j)
        for (Eigen::Index i = 0; i < L; ++i)
          CHECK(H.data.col(j).segment(i * 2, 2)
                    .isApprox(w.samples().row(j + i).transpose()));
    }
  }
}

TEST_CASE("persistency of excitation on constants") {
  const Signal ones(Matrix::Ones(20, 1), 1.0);
  CHECK(is_persistently_exciting(ones, 1).ok);
  const auto r2 = is_persistently_exciting(ones, 2);
  CHECK_FALSE(r2.ok);  // both rows identical
  CHECK(r2.sigma_min < 1e-12);
}

TEST_CASE("white noise of the stock record length is exciting at order 12") {
  const auto w = oracles::random_signal(42, 101, 1);
  const auto r = is_persistently_exciting(w, 12);
  CHECK(r.ok);
  CHECK(r.sigma_min > 0.0);
}

TEST_CASE("too-short records report a reason") {
  const auto w = oracles::random_signal(1, 10, 2);
  const auto r = is_persistently_exciting(w, 4);  // needs 8 rows of 7 columns
  CHECK_FALSE(r.ok);
  CHECK(!r.reason.empty());
}

TEST_CASE("persistency is monotone in the order") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    // mix of rich and rank-deficient signals
    Signal w = seed % 2 ? oracles::random_signal(seed, 24, 1)
                        : Signal(Matrix::Ones(24, 1) * 0.5, 1.0);
    bool seen_false = false;
    for (Eigen::Index L = 1; L <= 12; ++L) {
      const bool ok = is_persistently_exciting(w, L).ok;
      if (seen_false) CHECK_FALSE(ok);
      if (!ok) seen_false = true;
    }
  }
}

TEST_CASE("partition shapes for the stock record length") {
  const auto u = oracles::random_signal(1, 101, 1);
  const auto d = oracles::random_signal(2, 101, 1);
  const auto y = oracles::random_signal(3, 101, 1);
  const auto blocks = PredictorBlocks::partition(u, d, y, 7);
  CHECK(blocks.columns() == 94);
  CHECK(blocks.u_past().rows() == 7);
  CHECK(blocks.u_future().rows() == 1);
  CHECK(blocks.hankel_reduced().rows() == 3 * 7 + 2);
  CHECK(blocks.prediction_matrix().rows() == 1);
  CHECK(blocks.prediction_matrix().cols() == 3 * 7 + 2);
  // the projector is idempotent
  const auto& Q = blocks.projector();
  CHECK((Q * Q - Q).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("partition with T_ini equal to the record length fails") {
  const auto u = oracles::random_signal(1, 20, 1);
  CHECK_THROWS_AS(PredictorBlocks::partition(u, u, u, 20), Error);
}

TEST_CASE("length mismatch is an inconsistent dataset") {
  const auto u = oracles::random_signal(1, 20, 1);
  const auto y = oracles::random_signal(2, 21, 1);
  CHECK_THROWS_AS(PredictorBlocks::partition(u, u, y, 5), Error);
}

TEST_CASE("fundamental lemma: fresh trajectories lie in the span of the data") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto sys = random_stable_system(seed, 4, 1, 1, 1);
    const auto ds = exact_dataset(sys, seed * 100, 120);
    const Eigen::Index L = 10;

    Matrix stacked(3 * L, 120 - L + 1);
    stacked << hankel(ds.u, L).data, hankel(ds.d, L).data, hankel(ds.y, L).data;

    // PE of order L + n on the joint input
    Matrix ud(120, 2);
    ud << ds.u.samples(), ds.d.samples();
    REQUIRE(is_persistently_exciting(Signal(ud, 1.0), L + 4).ok);

    const auto fresh = exact_dataset(sys, seed * 100 + 7, L);
    Vector w(3 * L);
    for (Eigen::Index t = 0; t < L; ++t) {
      w(t) = fresh.u.samples()(t, 0);
      w(L + t) = fresh.d.samples()(t, 0);
      w(2 * L + t) = fresh.y.samples()(t, 0);
    }
    CHECK(span_residual(stacked, w) < 1e-9);
  }
}

TEST_CASE("exact data predicts fresh outputs through the prediction matrix") {
  const auto sys = random_stable_system(4, 4, 1, 1, 1);
  const auto ds = exact_dataset(sys, 21, 101);
  const auto blocks = PredictorBlocks::partition(ds.u, ds.d, ds.y, 7);

  const auto fresh = exact_dataset(sys, 77, 40);
  // windows ending at every admissible t
  for (Eigen::Index t = 7; t < 40; ++t) {
    Vector u_ini(7), d_ini(7), y_ini(7);
    for (Eigen::Index i = 0; i < 7; ++i) {
      u_ini(i) = fresh.u.samples()(t - 7 + i, 0);
      d_ini(i) = fresh.d.samples()(t - 7 + i, 0);
      y_ini(i) = fresh.y.samples()(t - 7 + i, 0);
    }
    const Vector y_hat = blocks.predict(u_ini, d_ini, y_ini,
                                        fresh.u.at(t), fresh.d.at(t));
    CHECK(std::abs(y_hat(0) - fresh.y.samples()(t, 0)) < 1e-8);
  }
}

TEST_CASE("full-rank truncation leaves the prediction matrix unchanged") {
  const auto u = oracles::random_signal(5, 60, 1);
  const auto d = oracles::random_signal(6, 60, 1);
  const auto y = oracles::random_signal(7, 60, 1);
  const auto blocks = PredictorBlocks::partition(u, d, y, 5);
  const auto full = blocks.truncate(blocks.hankel_reduced().rows());
  CHECK((full.prediction_matrix() - blocks.prediction_matrix())
            .cwiseAbs().maxCoeff() < 1e-10);
  CHECK(full.truncation_rank().has_value());
}

TEST_CASE("truncation at the exact-data rank bound keeps predictions exact") {
  const auto sys = random_stable_system(9, 3, 1, 1, 1);
  const auto ds = exact_dataset(sys, 31, 101);
  const auto blocks = PredictorBlocks::partition(ds.u, ds.d, ds.y, 7);
  const Eigen::Index bound = 3 + (1 + 1 + 1) * 8;  // n + (m+q+p)(T_ini+1)
  const auto trunc = blocks.truncate(bound);

  const auto fresh = exact_dataset(sys, 55, 30);
  for (Eigen::Index t = 7; t < 30; ++t) {
    Vector u_ini(7), d_ini(7), y_ini(7);
    for (Eigen::Index i = 0; i < 7; ++i) {
      u_ini(i) = fresh.u.samples()(t - 7 + i, 0);
      d_ini(i) = fresh.d.samples()(t - 7 + i, 0);
      y_ini(i) = fresh.y.samples()(t - 7 + i, 0);
    }
    const Vector y_hat = trunc.predict(u_ini, d_ini, y_ini,
                                       fresh.u.at(t), fresh.d.at(t));
    CHECK(std::abs(y_hat(0) - fresh.y.samples()(t, 0)) < 1e-8);
  }
}

TEST_CASE("rank-0 truncation is rejected") {
  const auto u = oracles::random_signal(5, 30, 1);
  const auto blocks = PredictorBlocks::partition(u, u, u, 4);
  CHECK_THROWS_AS(blocks.truncate(0), Error);
  CHECK_THROWS_AS(blocks.truncate_energy(0.0), Error);
}

TEST_CASE("truncation helps one-step prediction on noisy data") {
  // noisy record and noisy held-out windows: the noise-floor cutoff should
  // beat the raw pseudoinverse on this instance
  const auto sys = random_stable_system(43, 4, 1, 1, 1);
  auto ds = exact_dataset(sys, 16, 101);
  auto noisy = ds;
  noisy.y = Signal(ds.y.samples() +
                       oracles::random_signal(17, 101, 1, 1.0, 1e-4).samples(),
                   1.0);

  const auto raw = PredictorBlocks::partition(noisy.u, noisy.d, noisy.y, 7);
  const auto trunc = raw.truncate_threshold(1e-4);
  // the cutoff keeps all dynamics directions: (m+q)(T_ini+1) + n = 20
  CHECK(trunc.truncation_rank().value() == 20);

  const auto held_out = exact_dataset(sys, 19, 60);
  const auto held_noise = oracles::random_signal(20, 60, 1, 1.0, 1e-4);
  double err_raw = 0.0, err_trunc = 0.0;
  for (Eigen::Index t = 7; t < 60; ++t) {
    Vector u_ini(7), d_ini(7), y_ini(7);
    for (Eigen::Index i = 0; i < 7; ++i) {
      u_ini(i) = held_out.u.samples()(t - 7 + i, 0);
      d_ini(i) = held_out.d.samples()(t - 7 + i, 0);
      y_ini(i) = held_out.y.samples()(t - 7 + i, 0) + held_noise.samples()(t - 7 + i, 0);
    }
    const double truth = held_out.y.samples()(t, 0);
    err_raw += std::abs(raw.predict(u_ini, d_ini, y_ini, held_out.u.at(t),
                                    held_out.d.at(t))(0) - truth);
    err_trunc += std::abs(trunc.predict(u_ini, d_ini, y_ini, held_out.u.at(t),
                                        held_out.d.at(t))(0) - truth);
  }
  CHECK(err_trunc <= err_raw);
}

TEST_CASE("simulated trajectories satisfy the data-based representation") {
  // cross-module consistency: behavior-core simulation against the span test
  const auto sys = random_stable_system(12, 4, 1, 1, 1);
  const auto ds = exact_dataset(sys, 90, 140);
  const Eigen::Index L = 12;
  Matrix stacked(3 * L, 140 - L + 1);
  stacked << hankel(ds.u, L).data, hankel(ds.d, L).data, hankel(ds.y, L).data;
  const auto fresh = exact_dataset(sys, 91, L);
  Vector w(3 * L);
  for (Eigen::Index t = 0; t < L; ++t) {
    w(t) = fresh.u.samples()(t, 0);
    w(L + t) = fresh.d.samples()(t, 0);
    w(2 * L + t) = fresh.y.samples()(t, 0);
  }
  CHECK(span_residual(stacked, w) < 1e-10);
}

TEST_SUITE_END();
