#include "nn/optim.hpp"

#include <cmath>

namespace hideseek::nn {

void LrSchedule::validate() const {
  if (!(base_lr > 0.0)) fail(Errc::InvalidArgument, "learning rate must be positive");
  if (!(factor > 0.0)) fail(Errc::InvalidArgument, "decay factor must be positive");
  double prev = 0.0;
  for (double m : milestones) {
    if (!(m > prev && m < 1.0)) fail(Errc::InvalidArgument, "milestones must be strictly increasing in (0, 1)");
    prev = m;
  }
}

double LrSchedule::at(double progress) const {
  double lr = base_lr;
  for (double m : milestones) {
    if (progress >= m) lr *= factor;
  }
  return lr;
}

template <class Real>
Adam<Real>::Adam(std::vector<Param<Real>*> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  for (auto* p : params_) {
    if (p->grad.size() != p->value.size()) fail(Errc::ShapeMismatch, "gradient and parameter sizes differ");
    m_.emplace_back(p->value.size(), 0.0);
    v_.emplace_back(p->value.size(), 0.0);
  }
}

template <class Real>
void Adam<Real>::step(double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = *params_[i];
    if (p.grad.size() != m_[i].size() || p.value.size() != m_[i].size()) {
      fail(Errc::ShapeMismatch, "parameter shape changed under the optimizer");
    }
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const double g = p.grad[j];
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g;
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g * g;
      const double mh = m[j] / c1;
      const double vh = v[j] / c2;
      p.value[j] = static_cast<Real>(p.value[j] - lr * mh / (std::sqrt(vh) + cfg_.epsilon));
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace hideseek::nn
