#pragma once

#include <Eigen/Dense>

#include "ffcs/block_signal.hpp"
#include "ffcs/fusion_frame.hpp"
#include "ffcs/measurement.hpp"
#include "ffcs/rng.hpp"

namespace ffcs::test {

inline MeasurementMatrix mm(const Eigen::MatrixXd& a) { return MeasurementMatrix(a); }

/// Orthonormal basis from raw columns via Householder QR.
inline SubspaceBasis orth(const Eigen::MatrixXd& b) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(b);
  return SubspaceBasis(Eigen::MatrixXd(qr.householderQ() *
                                       Eigen::MatrixXd::Identity(b.rows(), b.cols())));
}

/// Coordinate subspace spanned by e_first .. e_{first+m-1} in R^M.
inline SubspaceBasis coord(Eigen::Index M, Eigen::Index first, Eigen::Index m) {
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(M, m);
  for (Eigen::Index i = 0; i < m; ++i) u(first + i, i) = 1.0;
  return SubspaceBasis(u);
}

/// Dense A_U by the definition: block (i, j) = a_ij U_j.
inline Eigen::MatrixXd dense_au(const MeasurementMatrix& a, const FusionFrame& f) {
  const Eigen::Index M = f.ambient_dim();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.rows() * M, f.total_dim());
  Eigen::Index col = 0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      out.block(i * M, col, M, f[j].dim()) =
          a.entries()(i, static_cast<Eigen::Index>(j)) * f[j].basis();
    col += f[j].dim();
  }
  return out;
}

inline double rel_diff(const BlockCoefficients& x, const BlockCoefficients& y) {
  return (x.concatenated() - y.concatenated()).norm() / std::max(y.concatenated().norm(), 1e-300);
}

}  // namespace ffcs::test
