#pragma once

#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "mpoforge/types.hpp"

namespace mpoforge {

/// Dense row-major tensor of arbitrary rank. Small: everything here is meant
/// for bond dimensions in the tens and physical dimension 2.
template <class S>
class Tensor {
public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)),
        data_(std::accumulate(shape_.begin(), shape_.end(), std::size_t{1},
                              std::multiplies<>()),
              S{}) {}

  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }

  S* data() { return data_.data(); }
  const S* data() const { return data_.data(); }
  S& operator[](std::size_t flat) { return data_[flat]; }
  const S& operator[](std::size_t flat) const { return data_[flat]; }

  template <class... Ix>
  S& operator()(Ix... ix) {
    return data_[flatten({static_cast<std::size_t>(ix)...})];
  }
  template <class... Ix>
  const S& operator()(Ix... ix) const {
    return data_[flatten({static_cast<std::size_t>(ix)...})];
  }

  std::size_t flatten(const std::vector<std::size_t>& idx) const;

  /// Same data, new shape; total size must match.
  Tensor<S> reshaped(std::vector<std::size_t> shape) const;

  double max_abs() const;

private:
  std::vector<std::size_t> shape_;
  std::vector<S> data_;
};

using RTensor = Tensor<double>;
using CTensor = Tensor<cplx>;

std::string shape_string(const std::vector<std::size_t>& shape);

/// Pairwise contraction. axes lists (axis of a, axis of b) pairs; the result
/// carries the free axes of a (in order) followed by the free axes of b.
/// Extent mismatch raises with both shapes in the message.
template <class S>
Tensor<S> contract(const Tensor<S>& a, const Tensor<S>& b,
                   const std::vector<std::pair<std::size_t, std::size_t>>& axes);

double max_abs_diff(const RTensor& a, const RTensor& b);
double max_abs_diff(const CTensor& a, const CTensor& b);

/// Kronecker product, row-major blocks: out((i*p+k),(j*q+l)) = a(i,j)*b(k,l).
Mat kron(const Mat& a, const Mat& b);
CMat kron(const CMat& a, const CMat& b);

}  // namespace mpoforge
