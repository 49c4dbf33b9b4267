#include "nn/loss.hpp"

#include <algorithm>
#include <cmath>

namespace hideseek::nn {

template <class Real>
LossResult<Real> mse(const Tensor<Real>& pred, const Tensor<Real>& target) {
  require_shape(target.shape, pred.shape, "mse");
  if (pred.size() == 0) fail(Errc::ShapeMismatch, "mse of empty tensors");
  LossResult<Real> r;
  r.grad = Tensor<Real>(pred.shape);
  const double inv = 1.0 / static_cast<double>(pred.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred.data[i]) - static_cast<double>(target.data[i]);
    sum += d * d;
    r.grad.data[i] = static_cast<Real>(2.0 * d * inv);
  }
  r.value = sum * inv;
  return r;
}

template <class Real>
LossResult<Real> bce(const Tensor<Real>& pred, const std::vector<float>& labels, const std::vector<float>& weights) {
  const int n = pred.shape.n;
  if (pred.shape.per_item() != 1) fail(Errc::ShapeMismatch, "bce expects one probability per item");
  if (static_cast<int>(labels.size()) != n) fail(Errc::ShapeMismatch, "bce label count differs from batch");
  if (!weights.empty() && static_cast<int>(weights.size()) != n) {
    fail(Errc::ShapeMismatch, "bce weight count differs from batch");
  }
  if (n == 0) fail(Errc::ShapeMismatch, "bce of an empty batch");
  double wsum = 0.0;
  for (int i = 0; i < n; ++i) wsum += weights.empty() ? 1.0 : weights[i];
  if (!(wsum > 0.0)) fail(Errc::InvalidArgument, "bce weights must have a positive sum");
  LossResult<Real> r;
  r.grad = Tensor<Real>(pred.shape);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double raw = pred.data[i];
    if (!(raw >= 0.0 && raw <= 1.0)) fail(Errc::Domain, "probability outside [0, 1]");
    const double p = std::clamp(raw, kProbClamp, 1.0 - kProbClamp);
    const double v = labels[i];
    const double w = (weights.empty() ? 1.0 : weights[i]) / wsum;
    sum += -w * (v * std::log(p) + (1.0 - v) * std::log(1.0 - p));
    r.grad.data[i] = static_cast<Real>(-w * (v / p - (1.0 - v) / (1.0 - p)));
  }
  r.value = sum;
  return r;
}

template LossResult<float> mse<float>(const Tensor<float>&, const Tensor<float>&);
template LossResult<double> mse<double>(const Tensor<double>&, const Tensor<double>&);
template LossResult<float> bce<float>(const Tensor<float>&, const std::vector<float>&, const std::vector<float>&);
template LossResult<double> bce<double>(const Tensor<double>&, const std::vector<float>&, const std::vector<float>&);

}  // namespace hideseek::nn
