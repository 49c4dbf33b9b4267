#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "common/error.hpp"

namespace hideseek::nn {

struct Shape {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  long count() const { return static_cast<long>(n) * c * h * w; }
  long per_item() const { return static_cast<long>(c) * h * w; }
  friend bool operator==(Shape, Shape) = default;
};

std::string to_string(Shape s);

// Dense NCHW tensor.
template <class Real>
struct Tensor {
  Shape shape;
  std::vector<Real> data;

  Tensor() = default;
  explicit Tensor(Shape s, Real fill = Real(0)) : shape(s), data(static_cast<std::size_t>(s.count()), fill) {}

  Real& at(int n, int c, int h, int w) { return data[((static_cast<std::size_t>(n) * shape.c + c) * shape.h + h) * shape.w + w]; }
  Real at(int n, int c, int h, int w) const {
    return data[((static_cast<std::size_t>(n) * shape.c + c) * shape.h + h) * shape.w + w];
  }
  Real* item(int n) { return data.data() + static_cast<std::size_t>(n) * shape.per_item(); }
  const Real* item(int n) const { return data.data() + static_cast<std::size_t>(n) * shape.per_item(); }
  std::size_t size() const { return data.size(); }
};

template <class Real>
void require_finite(const std::vector<Real>& v, const char* where) {
  for (Real x : v) {
    if (!std::isfinite(x)) fail(Errc::NonFiniteValue, std::string("non-finite value after ") + where);
  }
}

inline void require_shape(Shape got, Shape want, const char* where) {
  if (got != want) {
    fail(Errc::ShapeMismatch, std::string(where) + ": expected " + to_string(want) + ", got " + to_string(got));
  }
}

}  // namespace hideseek::nn
