#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "layerscope/error.hpp"

namespace layerscope {

using Index = Eigen::Index;

/// Channels x samples activation block for one layer. Row c is feature map c.
template <typename Scalar>
using TimeSeriesBlock = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using TensorTS = TimeSeriesBlock<double>;

template <typename Scalar>
using Series = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Transpose-convolution kernel laid out as one C_in x C_out matrix per tap,
/// i.e. the logical tensor w[i, o, k] lives in taps[k](i, o).
template <typename Scalar>
class Kernel {
 public:
  using Tap = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Kernel() = default;
  Kernel(Index in_channels, Index out_channels, Index width)
      : taps_(static_cast<std::size_t>(width), Tap::Zero(in_channels, out_channels)),
        in_(in_channels),
        out_(out_channels) {}

  Index in_channels() const { return in_; }
  Index out_channels() const { return out_; }
  Index width() const { return static_cast<Index>(taps_.size()); }

  Scalar& operator()(Index i, Index o, Index k) { return taps_[static_cast<std::size_t>(k)](i, o); }
  Scalar operator()(Index i, Index o, Index k) const { return taps_[static_cast<std::size_t>(k)](i, o); }

  const Tap& tap(Index k) const { return taps_[static_cast<std::size_t>(k)]; }
  Tap& tap(Index k) { return taps_[static_cast<std::size_t>(k)]; }

  bool all_finite() const {
    for (const auto& t : taps_)
      if (!t.allFinite()) return false;
    return true;
  }

 private:
  std::vector<Tap> taps_;
  Index in_ = 0;
  Index out_ = 0;
};

/// Left crop used by SAME-style transpose convolution: floor((K - stride) / 2).
constexpr Index transpose_pad_left(Index width, Index stride) { return (width - stride) / 2; }

/// 1-D transpose convolution with SAME semantics: the output has stride x
/// input samples and
///   out[o, t] = bias[o] + sum_{i,u,k : u*stride + k - pad_left = t} in[i, u] * w[i, o, k].
template <typename Scalar>
TimeSeriesBlock<Scalar> transpose_conv1d(const TimeSeriesBlock<Scalar>& input, const Kernel<Scalar>& weights,
                                         const Series<Scalar>& bias, Index stride) {
  require(stride > 0, ErrorCode::Validation, "transpose_conv1d: stride must be positive");
  require(weights.in_channels() == input.rows(), ErrorCode::Dimension,
          "transpose_conv1d: kernel expects " + std::to_string(weights.in_channels()) + " input channels, got " +
              std::to_string(input.rows()));
  require(bias.size() == weights.out_channels(), ErrorCode::Dimension, "transpose_conv1d: bias length");
  require(weights.width() >= stride, ErrorCode::Validation, "transpose_conv1d: kernel narrower than stride");
  require(weights.all_finite() && bias.allFinite(), ErrorCode::Validation, "transpose_conv1d: non-finite weights");

  const Index in_len = input.cols();
  const Index out_len = in_len * stride;
  const Index pad = transpose_pad_left(weights.width(), stride);

  TimeSeriesBlock<Scalar> out(weights.out_channels(), out_len);
  out.colwise() = bias;

  // One GEMM per tap, then scatter the columns to their output positions.
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> contrib;
  for (Index k = 0; k < weights.width(); ++k) {
    contrib.noalias() = weights.tap(k).transpose() * input;
    for (Index u = 0; u < in_len; ++u) {
      const Index t = u * stride + k - pad;
      if (t >= 0 && t < out_len) out.col(t) += contrib.col(u);
    }
  }
  return out;
}

/// Affine map weights * input + bias.
template <typename Scalar>
Series<Scalar> dense(const Series<Scalar>& input, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& weights,
                     const Series<Scalar>& bias) {
  require(weights.cols() == input.size() && weights.rows() == bias.size(), ErrorCode::Dimension,
          "dense: weights " + std::to_string(weights.rows()) + "x" + std::to_string(weights.cols()) +
              " do not conform to input " + std::to_string(input.size()) + " and bias " +
              std::to_string(bias.size()));
  return weights * input + bias;
}

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& x) {
  return x.cwiseMax(typename Derived::Scalar(0));
}

template <typename Derived>
auto tanh_act(const Eigen::MatrixBase<Derived>& x) {
  return x.array().tanh().matrix();
}

/// Linear interpolation of `series` onto `target_len` evenly spaced points;
/// both endpoints are reproduced exactly.
Series<double> linear_resample(const Series<double>& series, Index target_len);

}  // namespace layerscope
