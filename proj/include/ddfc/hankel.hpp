#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>

#include "ddfc/signal.hpp"

namespace ddfc {

/// Relative singular-value threshold shared by all rank decisions and
/// pseudoinverses in this module.
inline constexpr double kRankRelTol = 1e-8;

/// SVD-backed pseudoinverse with an explicit retained rank, so the same
/// factorization serves the exact and the low-rank (truncated) variants.
class SvdPinv {
public:
  explicit SvdPinv(const Matrix& M, double rel_tol = kRankRelTol);

  Eigen::Index rank() const { return rank_; }
  const Vector& singular_values() const { return sv_; }

  /// Pseudoinverse of the rank-r best approximation (r = -1: threshold rank).
  Matrix pinv(Eigen::Index r = -1) const;

  /// Projector V_r V_r^T onto the dominant row space.
  Matrix row_space_projector(Eigen::Index r = -1) const;

  /// Orthonormal basis of the kernel (columns of V beyond the threshold rank).
  Matrix null_basis() const;

  Vector solve(const Vector& b, Eigen::Index r = -1) const;

  /// Damped least-squares solve: sigma / (sigma^2 + mu^2) in place of the
  /// reciprocal, bounding the amplification of inconsistent right-hand
  /// sides by 1 / (2 mu).
  Vector solve_damped(const Vector& b, double mu) const;

  /// Norm of a residual projected onto the retained left singular vectors.
  double projected_residual(const Vector& r) const;

  /// Rank-r best approximation of the decomposed matrix.
  Matrix low_rank(Eigen::Index r) const;

private:
  Eigen::Index clamp_rank(Eigen::Index r) const;
  Matrix U_, V_;
  Vector sv_;
  Eigen::Index rank_;
};

struct HankelMatrix {
  Matrix data;                // (k*L) x (T-L+1)
  Eigen::Index depth;         // L
  Eigen::Index channel_width; // k
};

/// Hankel matrix of depth L: block row i holds samples i .. i+T-L of the
/// signal, column j the length-L window starting at sample j.
HankelMatrix hankel(const Signal& w, Eigen::Index depth);

struct PeResult {
  bool ok = false;
  double sigma_min = 0.0;
  std::string reason;  // set when ok is false
};

/// Persistency of excitation of the given order: full row rank of the
/// depth-L Hankel matrix of the signal.
PeResult is_persistently_exciting(const Signal& w, Eigen::Index order);

/// Least-squares residual of w against the column span of H.
double span_residual(const Matrix& H, const Vector& w);

/// Past/future-partitioned Hankel blocks of depth T_ini + 1, with the
/// cached prediction matrix Y_f * pinv(H_red) and the row-space projector
/// used by the optimization-based estimator.  Immutable once built.
class PredictorBlocks {
public:
  /// output_row_weight scales the channel-normalized output rows in the
  /// window solves: 1 treats them like the inputs, smaller values soften
  /// the output pinning (the data-driven analogue of observer gain).
  static PredictorBlocks partition(const Signal& u, const Signal& d,
                                   const Signal& y, Eigen::Index t_ini,
                                   double output_row_weight = 1.0);

  /// Rebuild the prediction matrix and projector from the rank-r best
  /// approximation of H_red.  The constraint blocks stay untouched.
  PredictorBlocks truncate(Eigen::Index rank) const;

  /// Rank chosen as the smallest r whose singular values carry the given
  /// fraction of total squared singular-value energy.
  PredictorBlocks truncate_energy(double fraction) const;

  /// Rank chosen by a relative singular-value cutoff: keep sigma_i above
  /// rel_tol * sigma_max.  Separates dynamics from a measurement-noise
  /// floor without an explicit rank.
  PredictorBlocks truncate_threshold(double rel_tol) const;

  const Matrix& u_past() const { return U_p_; }
  const Matrix& d_past() const { return D_p_; }
  const Matrix& y_past() const { return Y_p_; }
  const Matrix& u_future() const { return U_f_; }
  const Matrix& d_future() const { return D_f_; }
  const Matrix& y_future() const { return Y_f_; }

  const Matrix& hankel_reduced() const { return H_red_; }
  const Matrix& prediction_matrix() const { return P_; }
  const Matrix& projector() const { return Q_; }
  std::optional<Eigen::Index> truncation_rank() const { return truncation_rank_; }

  Eigen::Index t_ini() const { return t_ini_; }
  Eigen::Index input_width() const { return m_; }
  Eigen::Index disturbance_width() const { return q_; }
  Eigen::Index output_width() const { return p_; }
  Eigen::Index columns() const { return H_red_.cols(); }

  /// Rows of H_red as the regularized estimator's constraint sees them:
  /// the raw data rows, or the rows of the low-rank approximation when the
  /// blocks are truncated (the constraint then lives inside range(Q), which
  /// keeps the penalty term and the hard rows from fighting each other).
  /// All window solves run in channel-normalized units: per-unit frequency
  /// rows are orders of magnitude smaller than power rows, and unweighted
  /// least squares would sacrifice exactly those rows under noise.
  Matrix fixed_block() const;
  Matrix free_disturbance_rows() const;
  const SvdPinv& fixed_svd() const { return *fixed_svd_; }

  /// Weights that take a raw fixed-row right-hand side into the normalized
  /// frame of fixed_svd().
  Vector fixed_row_weights() const {
    return row_weights_.head(H_red_.rows() - q_);
  }

  /// One-shot output prediction: P * col(u_ini, d_ini, y_ini, u_now, d_now).
  Vector predict(const Vector& u_ini, const Vector& d_ini, const Vector& y_ini,
                 const Vector& u_now, const Vector& d_now) const;

private:
  PredictorBlocks() = default;
  void rebuild(Eigen::Index rank);  // rank -1: threshold rank of H_red

  Eigen::Index t_ini_ = 0, m_ = 0, q_ = 0, p_ = 0;
  Matrix U_p_, D_p_, Y_p_, U_f_, D_f_, Y_f_;
  Matrix H_red_, H_weighted_, H_smoothed_weighted_, P_, Q_;
  Vector row_weights_;  // one entry per H_red row, 1 / channel scale
  std::optional<Eigen::Index> truncation_rank_;
  std::shared_ptr<const SvdPinv> h_red_svd_;  // of the weighted H_red
  std::shared_ptr<const SvdPinv> fixed_svd_;  // of the weighted fixed rows
};

}  // namespace ddfc
