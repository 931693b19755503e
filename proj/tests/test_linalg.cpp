#include "mpoforge/linalg.hpp"

#include <gtest/gtest.h>

#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "test_util.hpp"

using namespace mpoforge;
namespace tu = testutil;

TEST(Svd, ReconstructsRealAndComplex) {
  std::mt19937 rng(11);
  Mat a = tu::random_matrix(7, 5, rng);
  auto r = linalg::svd(a);
  EXPECT_LT(tu::max_abs(r.U * r.S.asDiagonal() * r.V.adjoint() - a), 1e-12);
  for (int i = 1; i < r.S.size(); ++i) EXPECT_LE(r.S(i), r.S(i - 1));
  EXPECT_LT(tu::max_abs(Mat(r.U.transpose() * r.U - Mat::Identity(5, 5))), 1e-12);

  CMat c = tu::random_cmatrix(5, 6, rng);
  auto rc = linalg::svd(c);
  EXPECT_LT(tu::max_abs(CMat(rc.U * rc.S.asDiagonal() * rc.V.adjoint() - c)), 1e-12);
}

TEST(EigGeneral, SortsByMagnitudeAndReconstructs) {
  Mat m(2, 2);
  m << 2, 1, 0, 1;
  auto r = linalg::eig_general(m);
  EXPECT_NEAR(r.values(0).real(), 2.0, 1e-13);
  EXPECT_NEAR(r.values(1).real(), 1.0, 1e-13);

  std::mt19937 rng(5);
  CMat c = tu::random_cmatrix(8, 8, rng);
  auto rc = linalg::eig_general(c);
  EXPECT_LT(tu::max_abs(CMat(c * rc.vectors - rc.vectors * rc.values.asDiagonal())), 1e-10);
  for (int i = 1; i < 8; ++i)
    EXPECT_LE(std::abs(rc.values(i)), std::abs(rc.values(i - 1)) + 1e-12);
}

TEST(Qr, EconomicalShape) {
  std::mt19937 rng(7);
  Mat a = tu::random_matrix(9, 4, rng);
  auto r = linalg::qr_economical(a);
  EXPECT_EQ(r.Q.rows(), 9);
  EXPECT_EQ(r.Q.cols(), 4);
  EXPECT_LT(tu::max_abs(Mat(r.Q.transpose() * r.Q - Mat::Identity(4, 4))), 1e-12);
  EXPECT_LT(tu::max_abs(Mat(r.Q * r.R - a)), 1e-12);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < i; ++j) EXPECT_EQ(r.R(i, j), 0.0);
}

TEST(LeastSquares, ConsistentOverdeterminedMinNorm) {
  std::mt19937 rng(3);
  Mat a = tu::random_matrix(6, 6, rng);
  Vec b = tu::random_matrix(6, 1, rng);
  EXPECT_LT((a * linalg::solve_least_squares(a, b) - b).norm(), 1e-10);

  // rank-deficient: min-norm solution is orthogonal to the null space
  Mat d(4, 3);
  d.setZero();
  d(0, 0) = 1;
  d(1, 1) = 2;  // third column zero
  Vec rhs(4);
  rhs << 1, 2, 0, 0;
  Vec x = linalg::solve_least_squares(d, rhs);
  EXPECT_NEAR(x(0), 1.0, 1e-12);
  EXPECT_NEAR(x(1), 1.0, 1e-12);
  EXPECT_NEAR(x(2), 0.0, 1e-12);
}

TEST(LeadingEigenpair, SymmetricMatchesDense) {
  std::mt19937 rng(17);
  Mat a = tu::random_symmetric(40, rng);
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  double dom = es.eigenvalues().cwiseAbs().maxCoeff();

  linalg::EigenPairOptions opts;
  opts.symmetric = true;
  auto r = linalg::leading_eigenpair(a, opts);
  EXPECT_NEAR(std::abs(r.value), dom, 1e-10 * dom);
  EXPECT_LT((a * r.vector - r.value * r.vector).norm(), 1e-9 * dom);

  // callback form agrees with matrix form
  auto rc = linalg::leading_eigenpair(
      40, [&](const Vec& v) { return Vec(a * v); }, opts);
  EXPECT_NEAR(rc.value, r.value, 1e-11 * dom);
}

TEST(LeadingEigenpair, WarmStartKeepsAnswer) {
  std::mt19937 rng(23);
  Mat a = tu::random_symmetric(30, rng);
  linalg::EigenPairOptions opts;
  opts.symmetric = true;
  auto r1 = linalg::leading_eigenpair(a, opts);
  Vec start = r1.vector;
  opts.start = &start;
  auto r2 = linalg::leading_eigenpair(a, opts);
  EXPECT_NEAR(r1.value, r2.value, 1e-12 * std::abs(r1.value));
  EXPECT_LE(r2.iterations, r1.iterations);
}

TEST(LeadingEigenpair, ComplexGeneral) {
  std::mt19937 rng(29);
  CMat a = tu::random_cmatrix(25, 25, rng);
  auto dense = linalg::eig_general(a);
  auto r = linalg::leading_eigenpair(a);
  EXPECT_NEAR(std::abs(r.value), std::abs(dense.values(0)), 1e-8 * std::abs(dense.values(0)));
  EXPECT_LT((a * r.vector - r.value * r.vector).norm(), 1e-8 * std::abs(r.value));
}

TEST(Expm2x2, MatchesPade) {
  Mat z = tu::pauli_z(), x = tu::pauli_x();
  Mat ez = linalg::expm_2x2(0.3 * z);
  EXPECT_NEAR(ez(0, 0), std::exp(0.3), 1e-14);
  EXPECT_NEAR(ez(1, 1), std::exp(-0.3), 1e-14);
  EXPECT_NEAR(ez(0, 1), 0.0, 1e-15);

  Mat ex = linalg::expm_2x2(0.7 * x);
  EXPECT_NEAR(ex(0, 0), std::cosh(0.7), 1e-14);
  EXPECT_NEAR(ex(0, 1), std::sinh(0.7), 1e-14);

  std::mt19937 rng(31);
  for (int t = 0; t < 5; ++t) {
    Mat m = tu::random_matrix(2, 2, rng);
    Mat ref = m.exp();
    EXPECT_LT(tu::max_abs(Mat(linalg::expm_2x2(m) - ref)), 1e-12 * ref.cwiseAbs().maxCoeff());
  }
}
