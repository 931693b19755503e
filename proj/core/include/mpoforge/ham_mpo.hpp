#pragma once

#include <array>
#include <string>
#include <vector>

#include "mpoforge/types.hpp"

namespace mpoforge::ham {

/// Hamiltonian MPO in first-quantized transfer form: the finite open-chain
/// operator on N sites is
///   H = sum_{j1..jN} <v_l| B_{j1} ... B_{jN} |v_r>  X_{j1} (x) ... (x) X_{jN}
/// with real bond matrices B_j and 2x2 physical operators X_j (X_0 = 1).
/// Bond index 'start' marks "nothing placed yet", 'stop' marks "term closed";
/// decay channels sit strictly between the two markers.
struct HamiltonianMPO {
  std::vector<Mat> B;     ///< one bond matrix per symbol, D x D
  std::vector<CMat> ops;  ///< physical operators, 2x2 (sigma_y is complex)
  Vec v_left, v_right;    ///< boundary selectors |start>, |stop>
  int start = 0, stop = 0;
  std::string label;

  int bond() const { return B.empty() ? 0 : static_cast<int>(B[0].rows()); }
  int symbols() const { return static_cast<int>(B.size()); }
  bool real_ops() const;
};

/// Nearest-neighbour H = sum_i (mu_x XX + mu_y YY + mu_z ZZ)_{i,i+1}
///                     + sum_i field_i  with 2x2 field term; bond 5.
HamiltonianMPO build_nn_mpo(const std::array<double, 3>& mu, const Mat& field);

/// H = mu sum_i Z_i Z_{i+1} + sum_i field_i; bond 3.
HamiltonianMPO build_ising_mpo(double mu, const Mat& field);

/// Exponentially decaying couplings J_a(r) = mu_a lambda_a^{r-1} on the
/// XX/YY/ZZ channels plus a field term; requires |lambda_a| < 1; bond 5.
HamiltonianMPO build_expdecay_mpo(const std::array<double, 3>& mu,
                                  const std::array<double, 3>& lambda, const Mat& field);

/// H = sum_{i<j} J(j-i) op_i op_j with J(r) ~ r^-p fitted by a sum of n
/// decaying exponentials on r = 1..n_fit; bond n+2. Throws if the fit
/// produces a complex or non-decaying exponent.
HamiltonianMPO build_powerlaw_mpo(double p, int n, int n_fit, const Mat& op);

/// Realized coupling profile J(r) = <v_l| B_0^.. structure for two op
/// insertions at distance r; used to check fits against the MPO itself.
double realized_coupling(const HamiltonianMPO& h, int symbol, int r);

/// Append a per-site term c * 1 as an extra start->stop channel; used to
/// evaluate H - lambda N without touching the existing channels.
HamiltonianMPO with_site_shift(const HamiltonianMPO& h, double c);

/// Dense 2^N x 2^N open-chain operator; N <= 12. Imaginary parts must cancel
/// (paired sigma_y insertions) and are checked before being dropped.
Mat materialize_finite(const HamiltonianMPO& h, int n_sites);

/// Operator Schmidt rank of a dense operator on n sites across cut|rest:
/// singular values of the reshaped operator above tol * sigma_max.
int operator_schmidt_rank(const Mat& op, int n_sites, int cut, double tol = 1e-10);

}  // namespace mpoforge::ham
