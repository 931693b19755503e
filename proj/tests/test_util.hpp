#pragma once

#include <random>
#include <vector>

#include "mpoforge/types.hpp"

namespace testutil {

using mpoforge::CMat;
using mpoforge::cplx;
using mpoforge::Mat;
using mpoforge::Vec;

inline Mat pauli_x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline Mat pauli_z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
inline Mat pauli_yt() {  // i * sigma_y, real
  Mat m(2, 2);
  m << 0, 1, -1, 0;
  return m;
}
inline CMat pauli_y() {
  CMat m(2, 2);
  m << cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0);
  return m;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}
inline CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Dense operator acting with `op` on site i of an n-site chain (identity
/// elsewhere). Site 0 is the leftmost kron factor.
inline Mat op_at(const Mat& op, int i, int n) {
  Mat out = Mat::Identity(1, 1);
  for (int s = 0; s < n; ++s) out = kron(out, s == i ? op : Mat::Identity(2, 2));
  return out;
}

/// Two-site term (4x4, ordered site (x) site+1) placed on the bond (i, i+1
/// mod n); the wrap-around bond uses explicit single-site factors.
inline Mat bond_at(const Mat& h2, int i, int n, bool ring) {
  int j = (i + 1) % n;
  if (j == i) throw std::runtime_error("bond_at: n < 2");
  if (!ring && j < i) throw std::runtime_error("bond_at: open chain overflow");
  if (j == i + 1) {
    Mat out = Mat::Identity(1, 1);
    for (int s = 0; s < n; ++s) {
      if (s == i) {
        out = kron(out, h2);
        ++s;  // h2 covers s and s+1
        continue;
      }
      out = kron(out, Mat::Identity(2, 2));
    }
    return out;
  }
  // wrap-around: expand h2 over the elementary |a><b| (x) |c><d| basis
  Mat out = Mat::Zero(1 << n, 1 << n);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) {
          double v = h2(2 * a + c, 2 * b + d);
          if (v == 0.0) continue;
          Mat ei = Mat::Zero(2, 2), ej = Mat::Zero(2, 2);
          ei(a, b) = 1.0;
          ej(c, d) = 1.0;
          out += v * (op_at(ei, i, n) * op_at(ej, j, n));
        }
  return out;
}

/// Dense ring/chain Hamiltonian sum of a two-site term plus a one-site term.
inline Mat dense_hamiltonian(const Mat& h2, const Mat& h1, int n, bool ring) {
  Mat out = Mat::Zero(1 << n, 1 << n);
  int bonds = ring ? n : n - 1;
  for (int i = 0; i < bonds; ++i) out += bond_at(h2, i, n, ring);
  if (h1.size() > 0)
    for (int i = 0; i < n; ++i) out += op_at(h1, i, n);
  return out;
}

inline Mat random_symmetric(int n, std::mt19937& rng, double scale = 1.0) {
  std::normal_distribution<double> g;
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  return scale * 0.5 * (m + m.transpose());
}

inline Mat random_matrix(int r, int c, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

inline CMat random_cmatrix(int r, int c, std::mt19937& rng) {
  std::normal_distribution<double> g;
  CMat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().maxCoeff();
}

}  // namespace testutil
