#pragma once

#include <cstdint>
#include <vector>

#include "nn/layers.hpp"

namespace hideseek::nn {

// Step decay: the rate is multiplied by `factor` at each milestone (fraction
// of total progress) already reached.
struct LrSchedule {
  double base_lr = 0.001;
  std::vector<double> milestones;
  double factor = 0.9;

  void validate() const;
  double at(double progress) const;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <class Real>
class Adam {
 public:
  explicit Adam(std::vector<Param<Real>*> params, AdamConfig cfg = {});

  // One bias-corrected update at learning rate `lr` using the accumulated
  // gradients; gradients are left untouched.
  void step(double lr);
  long long steps() const { return t_; }
  const std::vector<std::vector<double>>& first_moment() const { return m_; }
  const std::vector<std::vector<double>>& second_moment() const { return v_; }

 private:
  std::vector<Param<Real>*> params_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  long long t_ = 0;
};

}  // namespace hideseek::nn
