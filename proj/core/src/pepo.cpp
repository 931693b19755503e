#include "mpoforge/pepo.hpp"

#include <cmath>

#include "mpoforge/gate_mpo.hpp"

namespace mpoforge::pepo {

double ScaledValue::value() const { return mantissa * std::exp(log_scale); }

double ScaledValue::log_abs() const {
  if (mantissa == 0.0) throw Error("ScaledValue: log of exact zero");
  return std::log(std::abs(mantissa)) + log_scale;
}

PepoTensor build_zz_pepo(double eps, bool tilde) {
  if (eps < 0) throw Error("pepo: eps must be >= 0");
  const double b[2] = {std::sqrt(std::cosh(eps)), std::sqrt(std::sinh(eps))};
  PepoTensor p;
  p.epsilon = eps;
  p.tilde = tilde;
  p.t = RTensor({2, 2, 2, 2, 2});
  for (int x = 0; x < 2; ++x)
    for (int l = 0; l < 2; ++l)
      for (int u = 0; u < 2; ++u)
        for (int r = 0; r < 2; ++r)
          for (int d = 0; d < 2; ++d) {
            if ((l + u + r + d) % 2 != x) continue;
            double v = b[l] * b[u] * b[r] * b[d];
            // i^(x+l+u+r+d): the exponent is even by the parity constraint.
            if (tilde && (x + l + u + r + d) % 4 != 0) v = -v;
            p.t(x, l, u, r, d) = v;
          }
  p.op_basis = {Mat::Identity(2, 2), tilde ? gate::pauli_yt() : gate::pauli_z()};
  // 1/b0 per dangling leg makes open-lattice contractions exactly the dense
  // exponential over interior bonds.
  p.boundary = Vec::Zero(2);
  p.boundary(0) = 1.0 / b[0];
  return p;
}

ScaledValue contract_open_grid(int rows, int cols,
                               const std::function<const RTensor&(int, int)>& site,
                               const Vec& boundary) {
  const int chi = static_cast<int>(boundary.size());
  if (rows < 1 || cols < 1 || cols > 10) throw Error("contract_open_grid: bad extents");
  long width = 1;
  for (int j = 0; j < cols; ++j) width *= chi;

  auto digit = [&](long conf, int j) {
    long v = conf;
    for (int k = 0; k < j; ++k) v /= chi;
    return static_cast<int>(v % chi);
  };
  auto leg_product = [&](long conf) {
    double v = 1.0;
    for (int j = 0; j < cols; ++j) v *= boundary(digit(conf, j));
    return v;
  };

  std::vector<double> state(width);
  for (long c = 0; c < width; ++c) state[c] = leg_product(c);

  ScaledValue out;
  for (int r = 0; r < rows; ++r) {
    std::vector<double> next(width, 0.0);
    for (long uc = 0; uc < width; ++uc) {
      if (state[uc] == 0.0) continue;
      // Sweep the row left to right; cur is indexed [d-prefix][right-leg].
      std::vector<double> cur(boundary.data(), boundary.data() + chi);
      long prefix = 1;
      for (int j = 0; j < cols; ++j) {
        const RTensor& t = site(r, j);
        const int uj = digit(uc, j);
        std::vector<double> grown(prefix * chi * chi, 0.0);
        for (long dp = 0; dp < prefix; ++dp)
          for (int l = 0; l < chi; ++l) {
            const double c = cur[dp * chi + l];
            if (c == 0.0) continue;
            for (int rr = 0; rr < chi; ++rr)
              for (int dd = 0; dd < chi; ++dd) {
                const double tv = t(l, uj, rr, dd);
                if (tv != 0.0) grown[(dp + dd * prefix) * chi + rr] += c * tv;
              }
          }
        cur = std::move(grown);
        prefix *= chi;
      }
      for (long dc = 0; dc < width; ++dc) {
        double v = 0.0;
        for (int rr = 0; rr < chi; ++rr) v += cur[dc * chi + rr] * boundary(rr);
        next[dc] += state[uc] * v;
      }
    }
    double peak = 0.0;
    for (double v : next) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) return out;
    for (double& v : next) v /= peak;
    out.log_scale += std::log(peak);
    state = std::move(next);
  }
  double total = 0.0;
  for (long c = 0; c < width; ++c) total += state[c] * leg_product(c);
  out.mantissa = total;
  return out;
}

namespace {

Mat op_string(const std::vector<Mat>& basis, const std::vector<int>& symbols) {
  Mat m = basis[symbols[0]];
  for (std::size_t s = 1; s < symbols.size(); ++s) m = kron(m, basis[symbols[s]]).eval();
  return m;
}

std::vector<int> unpack_config(long conf, int n, int base) {
  std::vector<int> out(n);
  for (int s = n - 1; s >= 0; --s) {
    out[s] = static_cast<int>(conf % base);
    conf /= base;
  }
  return out;
}

}  // namespace

Mat materialize_lattice(const PepoTensor& p, int rows, int cols) {
  const int n = rows * cols;
  if (n > 10) throw Error("materialize_lattice: too many sites");
  const int nsym = static_cast<int>(p.op_basis.size());
  const int chi = p.chi();
  std::vector<RTensor> slice(nsym, RTensor({static_cast<std::size_t>(chi),
                                            static_cast<std::size_t>(chi),
                                            static_cast<std::size_t>(chi),
                                            static_cast<std::size_t>(chi)}));
  for (int x = 0; x < nsym; ++x)
    for (int l = 0; l < chi; ++l)
      for (int u = 0; u < chi; ++u)
        for (int r = 0; r < chi; ++r)
          for (int d = 0; d < chi; ++d) slice[x](l, u, r, d) = p.t(x, l, u, r, d);

  long nconf = 1;
  for (int s = 0; s < n; ++s) nconf *= nsym;
  const long dim = 1L << n;
  Mat out = Mat::Zero(dim, dim);
  for (long conf = 0; conf < nconf; ++conf) {
    const std::vector<int> xs = unpack_config(conf, n, nsym);
    auto site = [&](int r, int c) -> const RTensor& { return slice[xs[r * cols + c]]; };
    const double coeff = contract_open_grid(rows, cols, site, p.boundary).value();
    if (coeff != 0.0) out += coeff * op_string(p.op_basis, xs);
  }
  return out;
}

double classical_ising_log_partition(int rows, int cols, double beta) {
  const PepoTensor p = build_zz_pepo(beta, false);
  RTensor c0({2, 2, 2, 2});
  for (int l = 0; l < 2; ++l)
    for (int u = 0; u < 2; ++u)
      for (int r = 0; r < 2; ++r)
        for (int d = 0; d < 2; ++d) c0(l, u, r, d) = p.t(0, l, u, r, d);
  auto site = [&](int, int) -> const RTensor& { return c0; };
  const double log_net = contract_open_grid(rows, cols, site, p.boundary).log_abs();
  return rows * cols * std::log(2.0) + log_net;
}

WMps build_w_mps(int excitations) {
  if (excitations < 1) throw Error("build_w_mps: excitations must be >= 1");
  const int d = excitations + 1;
  WMps w;
  w.excitations = excitations;
  w.a0 = Mat::Identity(d, d);
  w.a1 = Mat::Zero(d, d);
  for (int i = 0; i + 1 < d; ++i) w.a1(i, i + 1) = 1.0;
  w.v_left = Vec::Unit(d, 0);
  w.v_right = Vec::Unit(d, d - 1);
  return w;
}

double w_basis_overlap(const WMps& w, const std::vector<int>& bits) {
  Vec v = w.v_left;
  for (int b : bits) v = ((b ? w.a1 : w.a0).transpose() * v).eval();
  return v.dot(w.v_right);
}

Vec w_state_vector(const WMps& w, int n_sites) {
  if (n_sites < 1 || n_sites > 20) throw Error("w_state_vector: bad n_sites");
  const long dim = 1L << n_sites;
  Vec out(dim);
  for (long c = 0; c < dim; ++c) {
    std::vector<int> bits(n_sites);
    for (int s = 0; s < n_sites; ++s) bits[s] = static_cast<int>((c >> (n_sites - 1 - s)) & 1);
    out(c) = w_basis_overlap(w, bits);
  }
  return out;
}

NnHamiltonianPeps build_nn_hamiltonian_peps() {
  NnHamiltonianPeps p;
  p.t = RTensor({2, 2, 2, 2, 2, 2});
  p.t(0, 0, 0, 0, 0, 0) = 1.0;  // idle
  p.t(1, 1, 0, 0, 1, 0) = 1.0;  // selected: emit right, carry Z
  p.t(1, 1, 0, 0, 0, 1) = 1.0;  // selected: emit down, carry Z
  p.t(1, 0, 1, 0, 0, 0) = 1.0;  // absorb from left, carry Z
  p.t(1, 0, 0, 1, 0, 0) = 1.0;  // absorb from up, carry Z
  p.op_basis = {Mat::Identity(2, 2), gate::pauli_z()};
  p.selector = build_w_mps(1);
  p.combined_bond = 4;
  return p;
}

Mat materialize_nn_peps(const NnHamiltonianPeps& p, int rows, int cols) {
  const int n = rows * cols;
  if (n > 10) throw Error("materialize_nn_peps: too many sites");
  // Slices by (physical symbol, selector value).
  RTensor slice[2][2];
  for (int x = 0; x < 2; ++x)
    for (int i = 0; i < 2; ++i) {
      slice[x][i] = RTensor({2, 2, 2, 2});
      for (int l = 0; l < 2; ++l)
        for (int u = 0; u < 2; ++u)
          for (int r = 0; r < 2; ++r)
            for (int d = 0; d < 2; ++d) slice[x][i](l, u, r, d) = p.t(x, i, l, u, r, d);
    }
  const Vec e0 = Vec::Unit(2, 0);
  const long dim = 1L << n;
  Mat out = Mat::Zero(dim, dim);
  for (long conf = 0; conf < dim; ++conf) {
    const std::vector<int> xs = unpack_config(conf, n, 2);
    double coeff = 0.0;
    for (int sel = 0; sel < n; ++sel) {
      std::vector<int> onehot(n, 0);
      onehot[sel] = 1;
      auto site = [&](int r, int c) -> const RTensor& {
        const int s = r * cols + c;
        return slice[xs[s]][onehot[s]];
      };
      coeff += w_basis_overlap(p.selector, onehot) * contract_open_grid(rows, cols, site, e0).value();
    }
    if (coeff != 0.0) out += coeff * op_string(p.op_basis, xs);
  }
  return out;
}

CoefficientPeps build_powerlaw_hamiltonian_peps(double beta, int rows, int cols) {
  if (rows < 1 || cols < 1 || rows * cols < 2)
    throw Error("powerlaw peps: need at least two sites");
  CoefficientPeps p;
  p.beta = beta;
  p.rows = rows;
  p.cols = cols;
  p.psi = RTensor({2, 2, 2, 2, 2});
  auto spin = [](int a) { return 1.0 - 2.0 * a; };
  for (int z = 0; z < 2; ++z)
    for (int l = 0; l < 2; ++l)
      for (int u = 0; u < 2; ++u)
        p.psi(z, l, u, z, z) = std::exp(-beta * spin(l) * spin(z)) *
                               std::exp(-beta * spin(u) * spin(z));
  p.wpp = build_w_mps(2);
  p.combined_bond = 6;
  return p;
}

namespace {

/// <signs|psi_beta> by grid contraction; signs[site] = +1 for <+|, -1 for <-|.
double psi_grid_value(const CoefficientPeps& p, const std::vector<int>& signs) {
  const int rows = p.rows, cols = p.cols;
  auto boltz = [&](int a, int z) { return std::exp(-p.beta * (1.0 - 2.0 * a) * (1.0 - 2.0 * z)); };
  std::vector<RTensor> tiles(rows * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      RTensor t({2, 2, 2, 2});
      for (int z = 0; z < 2; ++z) {
        const double w = (signs[r * cols + c] < 0 && z == 1) ? -1.0 : 1.0;
        for (int l = 0; l < 2; ++l)
          for (int u = 0; u < 2; ++u) {
            // Dangling legs are neutral: pinned to 0 with unit factor.
            if (c == 0 && l != 0) continue;
            if (r == 0 && u != 0) continue;
            const double fl = (c == 0) ? 1.0 : boltz(l, z);
            const double fu = (r == 0) ? 1.0 : boltz(u, z);
            const int rleg = (c == cols - 1) ? 0 : z;
            const int dleg = (r == rows - 1) ? 0 : z;
            t(l, u, rleg, dleg) += w * fl * fu;
          }
      }
      tiles[r * cols + c] = std::move(t);
    }
  auto site = [&](int r, int c) -> const RTensor& { return tiles[r * cols + c]; };
  return contract_open_grid(rows, cols, site, Vec::Unit(2, 0)).value();
}

}  // namespace

double coupling_weight(const CoefficientPeps& p, int i, int j) {
  const int n = p.rows * p.cols;
  if (i < 0 || j < 0 || i >= n || j >= n || i == j) throw Error("coupling_weight: bad sites");
  std::vector<int> signs(n, 1);
  signs[i] = signs[j] = -1;
  std::vector<int> onehot(n, 0);
  onehot[i] = onehot[j] = 1;
  return w_basis_overlap(p.wpp, onehot) * psi_grid_value(p, signs);
}

double normalized_coupling(const CoefficientPeps& p, int i, int j) {
  return coupling_weight(p, i, j) / psi_grid_value(p, std::vector<int>(p.rows * p.cols, 1));
}

double string_coefficient(const CoefficientPeps& p, const std::vector<int>& bits) {
  const int n = p.rows * p.cols;
  if (static_cast<int>(bits.size()) != n) throw Error("string_coefficient: bad length");
  const double wov = w_basis_overlap(p.wpp, bits);
  if (wov == 0.0) return 0.0;
  std::vector<int> signs(n);
  for (int s = 0; s < n; ++s) signs[s] = bits[s] ? -1 : 1;
  return wov * psi_grid_value(p, signs);
}

Mat materialize_coefficient_peps(const CoefficientPeps& p) {
  const int n = p.rows * p.cols;
  if (n > 10) throw Error("materialize_coefficient_peps: too many sites");
  const std::vector<Mat> basis = {Mat::Identity(2, 2), gate::pauli_z()};
  const long dim = 1L << n;
  Mat out = Mat::Zero(dim, dim);
  for (long conf = 0; conf < dim; ++conf) {
    const std::vector<int> bits = unpack_config(conf, n, 2);
    const double coeff = string_coefficient(p, bits);
    if (coeff != 0.0) out += coeff * op_string(basis, bits);
  }
  return out;
}

}  // namespace mpoforge::pepo
