#include <cmath>

#include "doctest.h"

#include "ffcs/block_signal.hpp"
#include "ffcs/errors.hpp"
#include "ffcs/fusion_frame.hpp"
#include "test_util.hpp"

using namespace ffcs;
using ffcs::test::coord;
using ffcs::test::orth;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Largest eigenvalue of P_i P_j through a general eigen-solver on the M x M product.
double lambda_max_product(const SubspaceBasis& a, const SubspaceBasis& b) {
  const MatrixXd prod = projection_matrix(a) * projection_matrix(b);
  Eigen::EigenSolver<MatrixXd> es(prod);
  double best = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    best = std::max(best, es.eigenvalues()(i).real());
  return best;
}

SubspaceBasis line(double x, double y) {
  MatrixXd u(2, 1);
  u << x, y;
  return SubspaceBasis(u / u.norm());
}

}  // namespace

TEST_CASE("subspace basis validation") {
  CHECK_THROWS_AS(SubspaceBasis(MatrixXd(2, 0)), DimensionError);
  CHECK_THROWS_AS(SubspaceBasis(MatrixXd::Identity(3, 4)), DimensionError);
  MatrixXd bad(2, 1);
  bad << 1, 1;
  CHECK_THROWS_AS(SubspaceBasis{bad}, ArgumentError);
  CHECK_NOTHROW(SubspaceBasis(MatrixXd::Identity(3, 2)));
}

TEST_CASE("random subspace") {
  const SubspaceBasis full = random_subspace(3, 3, 11);
  CHECK((projection_matrix(full) - MatrixXd::Identity(3, 3)).norm() < 1e-10);
  const SubspaceBasis a = random_subspace(5, 2, 7);
  const SubspaceBasis b = random_subspace(5, 2, 7);
  CHECK(a.basis() == b.basis());
  CHECK((a.basis().transpose() * a.basis() - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <
        1e-10);
  CHECK(random_subspace(5, 2, 8).basis() != a.basis());
  CHECK_THROWS_AS(random_subspace(3, 4, 1), DimensionError);
  CHECK_THROWS_AS(random_subspace(3, 0, 1), DimensionError);
}

TEST_CASE("projection matrix") {
  MatrixXd p1(2, 2);
  p1 << 1, 0, 0, 0;
  CHECK((projection_matrix(coord(2, 0, 1)) - p1).norm() < 1e-15);
  MatrixXd p2(2, 2);
  p2 << .5, .5, .5, .5;
  CHECK((projection_matrix(line(1, 1)) - p2).norm() < 1e-15);
  const SubspaceBasis r = random_subspace(6, 3, 3);
  const MatrixXd p = projection_matrix(r);
  CHECK((p * p - p).norm() < 1e-10);
  CHECK((p - p.transpose()).norm() < 1e-10);
  CHECK(p.trace() == doctest::Approx(3.0));
}

TEST_CASE("frame bounds") {
  const FrameBounds ortho = frame_bounds(FusionFrame({coord(2, 0, 1), coord(2, 1, 1)}));
  CHECK(ortho.lower == doctest::Approx(1.0));
  CHECK(ortho.upper == doctest::Approx(1.0));
  CHECK(ortho.is_tight);
  CHECK(ortho.is_frame);
  const FrameBounds twice = frame_bounds(FusionFrame({coord(3, 0, 3), coord(3, 0, 3)}));
  CHECK(twice.lower == doctest::Approx(2.0));
  CHECK(twice.upper == doctest::Approx(2.0));
  const FrameBounds deg = frame_bounds(FusionFrame({coord(2, 0, 1), coord(2, 0, 1)}));
  CHECK(std::abs(deg.lower) < 1e-12);
  CHECK(deg.upper == doctest::Approx(2.0));
  CHECK_FALSE(deg.is_frame);

  // Frame inequality on random unit vectors, weighted.
  FusionFrame f({random_subspace(5, 2, 1), random_subspace(5, 3, 2), random_subspace(5, 2, 3)},
                {1.0, 0.5, 2.0});
  const FrameBounds fb = frame_bounds(f);
  RandomStream rs(9);
  for (int t = 0; t < 100; ++t) {
    VectorXd x = rs.normal_vector(5);
    x.normalize();
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j)
      s += f.weights()[j] * f.weights()[j] * (projection_matrix(f[j]) * x).squaredNorm();
    CHECK(s >= fb.lower - 1e-8);
    CHECK(s <= fb.upper + 1e-8);
  }
}

TEST_CASE("fusion frame construction checks") {
  CHECK_THROWS_AS(FusionFrame(std::vector<SubspaceBasis>{}), DimensionError);
  CHECK_THROWS_AS(FusionFrame({coord(2, 0, 1), coord(3, 0, 1)}), DimensionError);
  CHECK_THROWS_AS(FusionFrame({coord(2, 0, 1)}, {0.0}), ArgumentError);
  CHECK_THROWS(FusionFrame({coord(2, 0, 1)}, {1.0, 1.0}));
  const FusionFrame f({coord(4, 0, 1), coord(4, 1, 3)});
  CHECK(f.total_dim() == 4);
  CHECK(f.offsets() == std::vector<Eigen::Index>{0, 1});
  CHECK(f.common_dim() == 0);
  CHECK(f.unit_weights());
}

TEST_CASE("subspace overlap") {
  const FusionFrame same({coord(3, 0, 2), coord(3, 0, 2)});
  CHECK(subspace_overlap(same, 0, 1) == doctest::Approx(1.0));
  const FusionFrame orthf({coord(3, 0, 1), coord(3, 1, 2)});
  CHECK(subspace_overlap(orthf, 0, 1) == doctest::Approx(0.0));
  const FusionFrame diag({line(1, 0), line(1, 1)});
  CHECK(subspace_overlap(diag, 0, 1) == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-12));
  CHECK(subspace_overlap(diag, 0, 1) ==
        doctest::Approx(std::sqrt(lambda_max_product(diag[0], diag[1]))).epsilon(1e-8));
  CHECK_THROWS_AS(subspace_overlap(diag, 0, 0), IndexError);
  CHECK_THROWS_AS(subspace_overlap(diag, 0, 2), IndexError);

  // Cross-check against the eigenvalues of the projection product.
  const FusionFrame f = random_fusion_frame(6, {1, 2, 3, 2, 4}, 17);
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = 0; j < f.size(); ++j) {
      if (i == j) continue;
      const double o = subspace_overlap(f, i, j);
      CHECK(o >= 0.0);
      CHECK(o <= 1.0 + 1e-12);
      CHECK(std::abs(o * o - lambda_max_product(f[i], f[j])) <= 1e-8);
      CHECK(o == doctest::Approx(subspace_overlap(f, j, i)).epsilon(1e-12));
    }
}

TEST_CASE("theta of support") {
  const FusionFrame f = random_fusion_frame(5, {2, 2, 2, 2}, 3);
  CHECK(theta_of_support(f, SupportSet{2}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(theta_of_support(f, SupportSet{}), ArgumentError);
  const FusionFrame orthf({coord(6, 0, 2), coord(6, 2, 2), coord(6, 4, 2)});
  CHECK(theta_of_support(orthf, SupportSet{0, 1, 2}) == doctest::Approx(1.0));
  const SubspaceBasis u = random_subspace(6, 2, 1);
  const FusionFrame ident({u, u, u, u});
  CHECK(theta_of_support(ident, SupportSet{0, 1, 2, 3}) == doctest::Approx(4.0));

  // Oracle: 1 + max row sum of pairwise overlaps, and theta <= |S|.
  const FusionFrame g = random_fusion_frame(4, {2, 2, 2, 2, 2}, 8);
  const SupportSet s{0, 2, 3, 4};
  double best = 0.0;
  for (auto i : s.indices()) {
    double row = 0.0;
    for (auto j : s.indices())
      if (j != i) row += subspace_overlap(g, i, j);
    best = std::max(best, row);
  }
  CHECK(theta_of_support(g, s) == doctest::Approx(1.0 + best).epsilon(1e-12));
  CHECK(theta_of_support(g, s) <= 4.0 + 1e-12);
}
