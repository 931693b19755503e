#pragma once

#include <vector>

#include "mpoforge/ham_mpo.hpp"
#include "mpoforge/types.hpp"
#include "mpoforge/umps.hpp"

namespace mpoforge::thermo {

/// Dominant left/right fixed points of E0 = sum_i A^i (x) A^i, scaled so
/// <x_l|x_r> = 1. For the real symmetric pipeline left equals right.
struct FixedPoints {
  Vec left, right;  ///< vec of the D x D fixed-point matrices
  double value = 0; ///< leading eigenvalue of E0
  int iterations = 0;
};
FixedPoints fixed_points(const imps::UniformMPS& mps);

/// Rank-2 Jordan evaluation of E_H = sum_ijk A_i (x) B_j (x) A_k <k|X_j|i>.
/// The dominant right eigenvector is x_r (x) |start>, the left is
/// x_l (x) |stop> (forced by B_0's invariant subspaces); the generalized
/// partners come from deflated least-squares chain solves with the Euclidean
/// gauge <q_r, qt_r> = 0. Energy density e = Q12 of Q = (Q_l^T Q_r)^-1,
/// equal to 1/<qt_l|q_r> in these conventions.
///
/// For our builders the middle marker block carries no unit diagonal, so the
/// dominant eigenvalue has algebraic multiplicity exactly 2 and chain_length
/// is 2 (generic) or 1 (the block is diagonal: e = 0 exactly, as for product
/// eigenstates; qt_*, pairing and q_small are then zero).
struct JordanEvaluation {
  double d0 = 0;          ///< dominant eigenvalue (from E0 of the state)
  double energy = 0;      ///< Q12
  cplx pairing = 0;       ///< <qt_l|q_r>, bilinear
  double chain_residual = 0;   ///< worst relative residual of (E-d0)qt = q
  double marker_residual = 0;  ///< ||E_H q_r - d0 q_r|| / ||q_r||
  double gauge_overlap = 0;    ///< |<q_r, qt_r>| after deflation (exact 0)
  int dim = 0;
  int chain_length = 2;
  bool complex_path = false;
  CVec q_r, q_l, qt_r, qt_l;
  CMat q_small;  ///< the 2x2 (or 3x3) Q matrix
};

JordanEvaluation energy_density(const imps::UniformMPS& mps, const ham::HamiltonianMPO& h);

/// <L| E_H^N |R> with |L> = x_l (x) v_l, |R> = x_r (x) v_r, by N successive
/// applications of E_H (E_H^N is never materialized).
double finite_window_expectation(const imps::UniformMPS& mps, const ham::HamiltonianMPO& h,
                                 int n);

/// Rank-3 Jordan evaluation of E_{H^2} for H' = H - lambda_shift * N:
/// <(H_N - N lambda)^2> ~ c0 + c1 N + c2 N(N-1)/2. For an eigenvalue
/// candidate at lambda = e, c1 is the variance density and c2 -> 0.
///
/// The chains adapt to the actual block structure: chain_length 3 (generic,
/// c2 = e'^2 != 0), 2 (e' = 0 but nonzero variance: c2 = 0 exactly) or 1
/// (product eigenstate: c1 = c2 = 0; c0 is then not determined by the chain
/// algebra and reported as 0). Size-1 blocks at the dominant eigenvalue that
/// pair with both window boundaries can shift the true constant c0; c1 and
/// c2 are unaffected.
struct VarianceResult {
  double c0 = 0, c1 = 0, c2 = 0;
  double chain_residual = 0;    ///< worst relative accepted chain residual
  double antisym_overlap = 0;   ///< window overlap of the dropped antisymmetric mode
  int dim = 0;
  int chain_length = 3;
};

VarianceResult variance_density(const imps::UniformMPS& mps, const ham::HamiltonianMPO& h,
                                double lambda_shift);

/// <(H_N - N lambda)^2> over an N-site window, by N successive applications
/// of E_{H^2} (matrix-free, no Jordan algebra). Converges to the
/// variance_density polynomial as the transfer transients eta^N die out.
double finite_window_variance(const imps::UniformMPS& mps, const ham::HamiltonianMPO& h,
                              double lambda_shift, int n);

/// Brute-force gradient descent on the energy density over symmetric A^i
/// entries: central differences (step 1e-6, symmetric pairs move together),
/// backtracking line search halving from 0.1, stop on |grad| < 1e-8.
struct GradientResult {
  imps::UniformMPS state;
  double energy = 0;
  int iterations = 0;
  bool gradient_converged = false;
  std::vector<double> trace;  ///< energy per accepted iteration, non-increasing
};

GradientResult gradient_optimize(const imps::UniformMPS& start, const ham::HamiltonianMPO& h,
                                 int max_iters);

/// Dense E_H for small problems; oracle/test hook (always complex-typed).
CMat dense_energy_transfer(const imps::UniformMPS& mps, const ham::HamiltonianMPO& h);

}  // namespace mpoforge::thermo
