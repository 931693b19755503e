#pragma once

#include <functional>
#include <vector>

#include "mpoforge/tensor.hpp"
#include "mpoforge/types.hpp"

namespace mpoforge::pepo {

/// Uniform PEPO tensor on the square lattice, entries indexed
/// [x][l][u][r][d] (physical symbol, then left/up/right/down virtual legs).
/// Open boundaries contract dangling legs with `boundary`, scaled so a
/// dangling leg contributes a factor 1 and small-lattice oracles are exact.
struct PepoTensor {
  RTensor t;
  std::vector<Mat> op_basis;
  Vec boundary;
  double epsilon = 0;
  bool tilde = false;

  int chi() const { return static_cast<int>(t.extent(1)); }
};

/// C^x_{lurd} = [l+u+r+d = x mod 2] b_l b_u b_r b_d with b = (sqrt(cosh eps),
/// sqrt(sinh eps)); represents exp(eps sum_<ij> Z_i Z_j). The tilde variant
/// multiplies by i^(x+l+u+r+d) (integer sum, always even, so entries stay
/// real) and represents exp(-eps sum_<ij> Y_i Y_j) over {1, Yt}.
PepoTensor build_zz_pepo(double eps, bool tilde = false);

/// Value split into mantissa * exp(log_scale) so row contractions of large
/// networks never overflow.
struct ScaledValue {
  double mantissa = 0;
  double log_scale = 0;
  double value() const;
  double log_abs() const;  ///< throws on exact zero
};

/// Contract an open rows x cols grid of rank-4 tensors [l][u][r][d] row by
/// row; every dangling leg is closed with `boundary`. cols <= 10.
ScaledValue contract_open_grid(int rows, int cols,
                               const std::function<const RTensor&(int, int)>& site,
                               const Vec& boundary);

/// Dense operator represented by the PEPO on an open grid, row-major site
/// order; rows*cols <= 10.
Mat materialize_lattice(const PepoTensor& p, int rows, int cols);

/// ln Z of the classical Ising model Z = sum_s exp(+beta sum_<ij> s_i s_j)
/// on the open grid: 2^(rows cols) times the all-C^0 network.
double classical_ising_log_partition(int rows, int cols, double beta);

/// Uniform W-type MPS: equal superposition of all basis states with exactly
/// `excitations` spins up; bond excitations+1, B_0 = 1, B_1 the shift.
struct WMps {
  Mat a0, a1;
  Vec v_left, v_right;
  int excitations = 1;
};
WMps build_w_mps(int excitations);
Vec w_state_vector(const WMps& w, int n_sites);
double w_basis_overlap(const WMps& w, const std::vector<int>& bits);

/// Nearest-neighbour Hamiltonian PEPS: entries [x][i][l][u][r][d] where i is
/// the selector leg paired with |W>. A selector-1 site emits a token right or
/// down carrying Z (x=1); a selector-0 site absorbs a token from left or up,
/// also with Z; otherwise x=0 and no tokens. Contracting the selector with
/// |W> gives H = sum_<ij> Z_i Z_j; combined bond (token x W-PEPS) is 4.
struct NnHamiltonianPeps {
  RTensor t;
  std::vector<Mat> op_basis;
  WMps selector;
  int combined_bond = 4;
};
NnHamiltonianPeps build_nn_hamiltonian_peps();

/// Dense operator for the nn Hamiltonian PEPS on an open grid; <= 10 sites.
Mat materialize_nn_peps(const NnHamiltonianPeps& p, int rows, int cols);

/// Power-law coefficient PEPS: |psi_beta> = exp(-beta sum_<ij> ZZ) |+...+>
/// stored as the bulk delta/Boltzmann tensor psi[z][l][u][r][d] (left/up legs
/// copy the neighbour spin, right/down legs broadcast z; dangling legs
/// contribute 1), paired with |W''> (two excitations, row-major site order).
/// Pairing <x^0| = <0|_W <+|_psi, <x^1| = <1|_W <-|_psi over {1, Z} gives
/// H = sum_{i<j} w(i,j) Z_i Z_j with w the unnormalized Ising correlator.
struct CoefficientPeps {
  double beta = 0;
  int rows = 0, cols = 0;
  RTensor psi;
  WMps wpp;
  int combined_bond = 6;
};
CoefficientPeps build_powerlaw_hamiltonian_peps(double beta, int rows, int cols);

/// Raw coupling w(i,j) = <-_i -_j +^rest | psi_beta> (sites row-major).
double coupling_weight(const CoefficientPeps& p, int i, int j);

/// w(i,j) divided by the partition-function contraction <+...+|psi_beta>.
double normalized_coupling(const CoefficientPeps& p, int i, int j);

/// Coefficient of the operator string Z^{bits}: W'' overlap times the
/// psi_beta contraction; vanishes unless exactly two bits are set.
double string_coefficient(const CoefficientPeps& p, const std::vector<int>& bits);

/// Dense H = sum over strings of string_coefficient * Z-string; <= 10 sites.
Mat materialize_coefficient_peps(const CoefficientPeps& p);

}  // namespace mpoforge::pepo
