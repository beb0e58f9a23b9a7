#include "ddfc/hankel.hpp"

#include <algorithm>
#include <memory>

namespace ddfc {

SvdPinv::SvdPinv(const Matrix& M, double rel_tol) {
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  U_ = svd.matrixU();
  V_ = svd.matrixV();
  sv_ = svd.singularValues();
  const double cutoff = sv_.size() > 0 ? rel_tol * sv_(0) : 0.0;
  rank_ = 0;
  for (Eigen::Index i = 0; i < sv_.size(); ++i)
    if (sv_(i) > cutoff) ++rank_;
}

Eigen::Index SvdPinv::clamp_rank(Eigen::Index r) const {
  if (r < 0 || r > rank_) return rank_;
  return r;
}

Matrix SvdPinv::pinv(Eigen::Index r) const {
  r = clamp_rank(r);
  if (r == 0) return Matrix::Zero(V_.rows(), U_.rows());
  return V_.leftCols(r) * sv_.head(r).cwiseInverse().asDiagonal() *
         U_.leftCols(r).transpose();
}

Matrix SvdPinv::row_space_projector(Eigen::Index r) const {
  r = clamp_rank(r);
  if (r == 0) return Matrix::Zero(V_.rows(), V_.rows());
  return V_.leftCols(r) * V_.leftCols(r).transpose();
}

Matrix SvdPinv::null_basis() const { return V_.rightCols(V_.cols() - rank_); }

Vector SvdPinv::solve_damped(const Vector& b, double mu) const {
  if (rank_ == 0) return Vector::Zero(V_.rows());
  const auto r = rank_;
  Vector coeff = U_.leftCols(r).transpose() * b;
  for (Eigen::Index i = 0; i < r; ++i)
    coeff(i) *= sv_(i) / (sv_(i) * sv_(i) + mu * mu);
  return V_.leftCols(r) * coeff;
}

double SvdPinv::projected_residual(const Vector& r) const {
  if (rank_ == 0) return 0.0;
  return (U_.leftCols(rank_).transpose() * r).norm();
}

Matrix SvdPinv::low_rank(Eigen::Index r) const {
  r = clamp_rank(r);
  if (r == 0) return Matrix::Zero(U_.rows(), V_.rows());
  return U_.leftCols(r) * sv_.head(r).asDiagonal() * V_.leftCols(r).transpose();
}

Vector SvdPinv::solve(const Vector& b, Eigen::Index r) const {
  r = clamp_rank(r);
  if (r == 0) return Vector::Zero(V_.rows());
  return V_.leftCols(r) *
         (sv_.head(r).cwiseInverse().asDiagonal() * (U_.leftCols(r).transpose() * b));
}

HankelMatrix hankel(const Signal& w, Eigen::Index depth) {
  const auto T = w.length();
  const auto k = w.channels();
  if (depth < 1 || depth > T)
    throw Error(ErrorCode::DepthExceedsData,
                "hankel: depth must satisfy 1 <= L <= T");
  const auto cols = T - depth + 1;
  Matrix H(k * depth, cols);
  for (Eigen::Index i = 0; i < depth; ++i)
    H.middleRows(i * k, k) =
        w.samples().middleRows(i, cols).transpose();
  return HankelMatrix{std::move(H), depth, k};
}

PeResult is_persistently_exciting(const Signal& w, Eigen::Index order) {
  const auto T = w.length();
  const auto k = w.channels();
  if (order < 1) return {false, 0.0, "order must be at least 1"};
  if (order > T || T - order + 1 < k * order)
    return {false, 0.0, "too few samples for full row rank at this order"};
  const auto H = hankel(w, order);
  Eigen::JacobiSVD<Matrix> svd(H.data);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin > kRankRelTol * sv(0)) return {true, smin, ""};
  return {false, smin, "Hankel matrix is row-rank deficient"};
}

double span_residual(const Matrix& H, const Vector& w) {
  const Vector g = SvdPinv(H).solve(w);
  return (H * g - w).norm();
}

PredictorBlocks PredictorBlocks::partition(const Signal& u, const Signal& d,
                                           const Signal& y, Eigen::Index t_ini,
                                           double output_row_weight) {
  const auto T = y.length();
  if ((u.channels() > 0 && u.length() != T) || (d.channels() > 0 && d.length() != T))
    throw Error(ErrorCode::InconsistentDataset,
                "partition: u, d, y must have the same length");
  if (t_ini < 1)
    throw Error(ErrorCode::InvalidArgument, "partition: T_ini must be >= 1");

  const auto L = t_ini + 1;
  PredictorBlocks b;
  b.t_ini_ = t_ini;
  b.m_ = u.channels();
  b.q_ = d.channels();
  b.p_ = y.channels();

  auto split = [&](const Signal& w, Eigen::Index k, Matrix& past, Matrix& fut) {
    if (k == 0) {
      past.resize(0, T - t_ini);
      fut.resize(0, T - t_ini);
      return;
    }
    const auto H = hankel(w, L);
    past = H.data.topRows(k * t_ini);
    fut = H.data.bottomRows(k);
  };
  split(u, b.m_, b.U_p_, b.U_f_);
  split(d, b.q_, b.D_p_, b.D_f_);
  split(y, b.p_, b.Y_p_, b.Y_f_);

  const auto cols = T - t_ini;
  Matrix H_red((b.m_ + b.q_) * L + b.p_ * t_ini, cols);
  H_red << b.U_p_, b.D_p_, b.Y_p_, b.U_f_, b.D_f_;
  b.H_red_ = std::move(H_red);

  // channel normalization: weight each row by the inverse RMS of its source
  // channel (layout: m*t_ini, q*t_ini, p*t_ini, m, q)
  auto channel_scale = [T](const Signal& w, Eigen::Index ch) {
    const double rms = w.samples().col(ch).norm() / std::sqrt(double(T));
    return rms > 1e-300 ? rms : 1.0;
  };
  if (!(output_row_weight > 0.0))
    throw Error(ErrorCode::InvalidArgument,
                "partition: output_row_weight must be positive");
  Vector wu(b.m_), wd(b.q_), wy(b.p_);
  for (Eigen::Index ch = 0; ch < b.m_; ++ch) wu(ch) = 1.0 / channel_scale(u, ch);
  for (Eigen::Index ch = 0; ch < b.q_; ++ch) wd(ch) = 1.0 / channel_scale(d, ch);
  for (Eigen::Index ch = 0; ch < b.p_; ++ch)
    wy(ch) = output_row_weight / channel_scale(y, ch);
  b.row_weights_.resize(b.H_red_.rows());
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < t_ini; ++i)
    for (Eigen::Index ch = 0; ch < b.m_; ++ch) b.row_weights_(row++) = wu(ch);
  for (Eigen::Index i = 0; i < t_ini; ++i)
    for (Eigen::Index ch = 0; ch < b.q_; ++ch) b.row_weights_(row++) = wd(ch);
  for (Eigen::Index i = 0; i < t_ini; ++i)
    for (Eigen::Index ch = 0; ch < b.p_; ++ch) b.row_weights_(row++) = wy(ch);
  for (Eigen::Index ch = 0; ch < b.m_; ++ch) b.row_weights_(row++) = wu(ch);
  for (Eigen::Index ch = 0; ch < b.q_; ++ch) b.row_weights_(row++) = wd(ch);

  b.H_weighted_ = b.row_weights_.asDiagonal() * b.H_red_;
  b.h_red_svd_ = std::make_shared<SvdPinv>(b.H_weighted_);
  b.fixed_svd_ =
      std::make_shared<SvdPinv>(b.H_weighted_.topRows(b.H_red_.rows() - b.q_));
  b.rebuild(-1);
  return b;
}

Matrix PredictorBlocks::fixed_block() const {
  const auto rows = H_red_.rows() - q_;
  if (H_smoothed_weighted_.size() == 0) return H_red_.topRows(rows);
  // smoothed rows mapped back to raw channel units
  return row_weights_.head(rows).cwiseInverse().asDiagonal() *
         H_smoothed_weighted_.topRows(rows);
}

Matrix PredictorBlocks::free_disturbance_rows() const {
  if (H_smoothed_weighted_.size() == 0) return D_f_;
  return row_weights_.tail(q_).cwiseInverse().asDiagonal() *
         H_smoothed_weighted_.bottomRows(q_);
}

void PredictorBlocks::rebuild(Eigen::Index rank) {
  // effective prediction matrix on raw windows: Y_f pinv(W H) W
  P_ = Y_f_ * h_red_svd_->pinv(rank) * row_weights_.asDiagonal();
  Q_ = h_red_svd_->row_space_projector(rank);
}

PredictorBlocks PredictorBlocks::truncate(Eigen::Index rank) const {
  if (rank < 1)
    throw Error(ErrorCode::EmptyTruncation, "truncate: rank must be at least 1");
  PredictorBlocks b = *this;
  const auto r = std::min<Eigen::Index>(rank, h_red_svd_->rank());
  b.truncation_rank_ = r;
  b.rebuild(r);
  b.H_smoothed_weighted_ = h_red_svd_->low_rank(r);
  b.fixed_svd_ = std::make_shared<SvdPinv>(
      b.H_smoothed_weighted_.topRows(b.H_red_.rows() - b.q_));
  return b;
}

PredictorBlocks PredictorBlocks::truncate_threshold(double rel_tol) const {
  if (!(rel_tol > 0.0 && rel_tol < 1.0))
    throw Error(ErrorCode::EmptyTruncation,
                "truncate_threshold: rel_tol must lie in (0, 1)");
  const auto& sv = h_red_svd_->singular_values();
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < h_red_svd_->rank(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++r;
  return truncate(std::max<Eigen::Index>(r, 1));
}

PredictorBlocks PredictorBlocks::truncate_energy(double fraction) const {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw Error(ErrorCode::EmptyTruncation,
                "truncate_energy: fraction must lie in (0, 1]");
  const auto& sv = h_red_svd_->singular_values();
  const double total = sv.squaredNorm();
  double acc = 0.0;
  Eigen::Index r = 0;
  while (r < h_red_svd_->rank() && acc < fraction * total) {
    acc += sv(r) * sv(r);
    ++r;
  }
  return truncate(std::max<Eigen::Index>(r, 1));
}

Vector PredictorBlocks::predict(const Vector& u_ini, const Vector& d_ini,
                                const Vector& y_ini, const Vector& u_now,
                                const Vector& d_now) const {
  if (u_ini.size() != m_ * t_ini_ || d_ini.size() != q_ * t_ini_ ||
      y_ini.size() != p_ * t_ini_ || u_now.size() != m_ || d_now.size() != q_)
    throw Error(ErrorCode::InvalidArgument, "predict: window dimension mismatch");
  Vector xi(P_.cols());
  xi << u_ini, d_ini, y_ini, u_now, d_now;
  return P_ * xi;
}

}  // namespace ddfc
