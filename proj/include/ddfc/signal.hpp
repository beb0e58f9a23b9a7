#pragma once

#include <Eigen/Dense>
#include <string>

#include "ddfc/error.hpp"

namespace ddfc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A finite multichannel sampled sequence: one row per time step, one
/// column per channel.
class Signal {
public:
  Signal() : period_(1.0) {}

  Signal(Matrix samples, double period)
      : samples_(std::move(samples)), period_(period) {
    if (samples_.rows() < 1)
      throw Error(ErrorCode::InvalidArgument, "Signal: need at least one sample");
    if (!(period_ > 0.0))
      throw Error(ErrorCode::InvalidArgument, "Signal: period must be positive");
  }

  static Signal zeros(Eigen::Index length, Eigen::Index channels, double period) {
    return Signal(Matrix::Zero(length, channels), period);
  }

  Eigen::Index length() const { return samples_.rows(); }
  Eigen::Index channels() const { return samples_.cols(); }
  double period() const { return period_; }

  const Matrix& samples() const { return samples_; }
  Matrix& samples() { return samples_; }

  /// Sample at time step t as a column vector.
  Vector at(Eigen::Index t) const { return samples_.row(t).transpose(); }

private:
  Matrix samples_;
  double period_;
};

/// Recorded (u, d, y) record used as the non-parametric model.  Channel
/// counts may be zero (the frequency-control specialization has no
/// separate u channel).
struct TrajectoryDataset {
  Signal u;
  Signal d;
  Signal y;
  bool noisy = false;  // drives the default truncation policy

  Eigen::Index length() const { return y.length(); }

  void check_consistent() const {
    const auto T = y.length();
    if (u.channels() > 0 && u.length() != T)
      throw Error(ErrorCode::InconsistentDataset, "dataset: u length differs from y");
    if (d.channels() > 0 && d.length() != T)
      throw Error(ErrorCode::InconsistentDataset, "dataset: d length differs from y");
  }
};

}  // namespace ddfc
