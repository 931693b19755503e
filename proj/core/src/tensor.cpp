#include "mpoforge/tensor.hpp"

#include <algorithm>
#include <sstream>

namespace mpoforge {

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i)
    os << shape[i] << (i + 1 < shape.size() ? "," : "");
  os << ")";
  return os.str();
}

template <class S>
std::size_t Tensor<S>::flatten(const std::vector<std::size_t>& idx) const {
  if (idx.size() != shape_.size())
    throw Error("tensor index rank " + std::to_string(idx.size()) +
                " does not match tensor rank " + std::to_string(shape_.size()));
  std::size_t flat = 0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    if (idx[a] >= shape_[a])
      throw Error("tensor index out of range on axis " + std::to_string(a) +
                  " for shape " + shape_string(shape_));
    flat = flat * shape_[a] + idx[a];
  }
  return flat;
}

template <class S>
Tensor<S> Tensor<S>::reshaped(std::vector<std::size_t> shape) const {
  Tensor<S> out(std::move(shape));
  if (out.size() != size())
    throw Error("reshape size mismatch: " + shape_string(shape_) + " -> " +
                shape_string(out.shape()));
  std::copy(data_.begin(), data_.end(), out.data());
  return out;
}

template <class S>
double Tensor<S>::max_abs() const {
  double m = 0;
  for (const S& v : data_) m = std::max(m, std::abs(v));
  return m;
}

namespace {

// Pack a tensor into a (rows x cols) column-major Eigen matrix with the axes
// in `row_axes` fused as the row index and `col_axes` as the column index.
template <class S>
Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> pack(
    const Tensor<S>& t, const std::vector<std::size_t>& row_axes,
    const std::vector<std::size_t>& col_axes) {
  std::size_t rows = 1, cols = 1;
  for (auto a : row_axes) rows *= t.extent(a);
  for (auto a : col_axes) cols *= t.extent(a);
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> m(rows, cols);

  const std::size_t rank = t.rank();
  std::vector<std::size_t> strides(rank, 1);
  for (std::size_t a = rank; a-- > 1;)
    strides[a - 1] = strides[a] * t.extent(a);

  std::vector<std::size_t> idx(rank, 0);
  const std::size_t n = t.size();
  for (std::size_t flat = 0; flat < n; ++flat) {
    std::size_t rem = flat;
    for (std::size_t a = 0; a < rank; ++a) {
      idx[a] = rem / strides[a];
      rem %= strides[a];
    }
    std::size_t r = 0, c = 0;
    for (auto a : row_axes) r = r * t.extent(a) + idx[a];
    for (auto a : col_axes) c = c * t.extent(a) + idx[a];
    m(r, c) = t[flat];
  }
  return m;
}

}  // namespace

template <class S>
Tensor<S> contract(const Tensor<S>& a, const Tensor<S>& b,
                   const std::vector<std::pair<std::size_t, std::size_t>>& axes) {
  std::vector<bool> a_contracted(a.rank(), false), b_contracted(b.rank(), false);
  std::vector<std::size_t> a_sum, b_sum;
  for (auto [ai, bi] : axes) {
    if (ai >= a.rank() || bi >= b.rank())
      throw Error("contract: axis out of range for shapes " +
                  shape_string(a.shape()) + " and " + shape_string(b.shape()));
    if (a.extent(ai) != b.extent(bi))
      throw Error("contract: extent mismatch on axes (" + std::to_string(ai) +
                  "," + std::to_string(bi) + ") for shapes " +
                  shape_string(a.shape()) + " and " + shape_string(b.shape()));
    if (a_contracted[ai] || b_contracted[bi])
      throw Error("contract: axis repeated in contraction list");
    a_contracted[ai] = true;
    b_contracted[bi] = true;
    a_sum.push_back(ai);
    b_sum.push_back(bi);
  }
  std::vector<std::size_t> a_free, b_free, out_shape;
  for (std::size_t i = 0; i < a.rank(); ++i)
    if (!a_contracted[i]) {
      a_free.push_back(i);
      out_shape.push_back(a.extent(i));
    }
  for (std::size_t i = 0; i < b.rank(); ++i)
    if (!b_contracted[i]) {
      b_free.push_back(i);
      out_shape.push_back(b.extent(i));
    }

  auto ma = pack(a, a_free, a_sum);   // free x sum
  auto mb = pack(b, b_sum, b_free);   // sum x free
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> mc = ma * mb;

  Tensor<S> out(out_shape);
  const std::size_t rows = static_cast<std::size_t>(mc.rows());
  const std::size_t cols = static_cast<std::size_t>(mc.cols());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = mc(r, c);
  return out;
}

double max_abs_diff(const RTensor& a, const RTensor& b) {
  if (a.shape() != b.shape())
    throw Error("max_abs_diff: shape mismatch " + shape_string(a.shape()) +
                " vs " + shape_string(b.shape()));
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs_diff(const CTensor& a, const CTensor& b) {
  if (a.shape() != b.shape())
    throw Error("max_abs_diff: shape mismatch " + shape_string(a.shape()) +
                " vs " + shape_string(b.shape()));
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

template <class M>
static M kron_impl(const M& a, const M& b) {
  M out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat kron(const Mat& a, const Mat& b) { return kron_impl(a, b); }
CMat kron(const CMat& a, const CMat& b) { return kron_impl(a, b); }

template class Tensor<double>;
template class Tensor<cplx>;
template RTensor contract(const RTensor&, const RTensor&,
                          const std::vector<std::pair<std::size_t, std::size_t>>&);
template CTensor contract(const CTensor&, const CTensor&,
                          const std::vector<std::pair<std::size_t, std::size_t>>&);

}  // namespace mpoforge
