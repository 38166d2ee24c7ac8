#pragma once

#include <cmath>
#include <concepts>

#include "rcpinn/tape.hpp"

namespace rcpinn {

// Forward-mode dual number carrying a value and one directional derivative.
// With T = double this is plain forward AD. With T = Var the tangent
// arithmetic itself lands on the tape, so a reverse sweep through a loss
// built from Dual<Var> terms differentiates the directional derivative too
// (forward-over-reverse); that is how the physics residual's dI/dt enters
// the parameter gradient.
template <class T>
struct Dual {
  T val{};
  T dot{};
};

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
  return {a.val + b.val, a.dot + b.dot};
}
template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
  return {a.val - b.val, a.dot - b.dot};
}
template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
  return {a.val * b.val, a.val * b.dot + a.dot * b.val};
}
template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  Dual<T> r;
  r.val = a.val / b.val;
  r.dot = (a.dot - r.val * b.dot) / b.val;
  return r;
}
template <class T>
Dual<T> operator-(const Dual<T>& a) {
  return {-a.val, -a.dot};
}

// tangent-free scalars on either side
template <class T>
Dual<T> operator*(const T& c, const Dual<T>& a) {
  return {c * a.val, c * a.dot};
}
template <class T>
Dual<T> operator*(const Dual<T>& a, const T& c) {
  return {a.val * c, a.dot * c};
}
template <class T>
Dual<T> operator+(const Dual<T>& a, const T& c) {
  return {a.val + c, a.dot};
}
template <class T>
Dual<T> operator-(const Dual<T>& a, const T& c) {
  return {a.val - c, a.dot};
}
template <class T>
  requires(!std::same_as<T, double>)
Dual<T> operator*(double c, const Dual<T>& a) {
  return {c * a.val, c * a.dot};
}
template <class T>
  requires(!std::same_as<T, double>)
Dual<T> operator-(const Dual<T>& a, double c) {
  return {a.val - c, a.dot};
}

template <class T>
Dual<T> exp(const Dual<T>& a) {
  using std::exp;
  T e = exp(a.val);
  return {e, e * a.dot};
}

template <class T>
Dual<T> tanh(const Dual<T>& a) {
  using std::tanh;
  T th = tanh(a.val);
  return {th, (1.0 - th * th) * a.dot};
}

}  // namespace rcpinn
