#pragma once

#include <vector>

#include "nn/tensor.hpp"

namespace hideseek::nn {

template <class Real>
struct LossResult {
  double value = 0.0;
  Tensor<Real> grad;  // d value / d pred
};

inline constexpr double kProbClamp = 1e-7;

// Mean of squared differences over every element.
template <class Real>
LossResult<Real> mse(const Tensor<Real>& pred, const Tensor<Real>& target);

// Weighted mean over the batch of -(v log p + (1 - v) log(1 - p)); `pred`
// holds one probability per item. Probabilities are clamped to
// [1e-7, 1 - 1e-7]; values outside [0, 1] raise Domain.
template <class Real>
LossResult<Real> bce(const Tensor<Real>& pred, const std::vector<float>& labels,
                     const std::vector<float>& weights = {});

}  // namespace hideseek::nn
