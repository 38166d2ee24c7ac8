#include "rcpinn/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace rcpinn {

namespace {

// Exact integer power by repeated squaring; keeps Powi partials free of pow().
double ipow(double x, int k) {
  if (k < 0) return 1.0 / ipow(x, -k);
  double r = 1.0, base = x;
  while (k) {
    if (k & 1) r *= base;
    base *= base;
    k >>= 1;
  }
  return r;
}

Tape* common_tape(Var a, Var b) {
  if (a.tape() != b.tape()) throw std::logic_error("Var arithmetic across different tapes");
  return a.tape();
}

}  // namespace

double Var::value() const { return tape_->value(*this); }

Var Tape::var(double v) { return record(Op::Leaf, -1, -1, v); }

void Tape::clear() {
  nodes_.clear();
  vals_.clear();
}

void Tape::reserve(std::size_t n) {
  nodes_.reserve(n);
  vals_.reserve(n);
}

Var Tape::record(Op op, std::int32_t a, std::int32_t b, double value, std::int32_t aux) {
  nodes_.push_back({op, a, b, aux});
  vals_.push_back(value);
  return Var(this, static_cast<std::int32_t>(nodes_.size() - 1));
}

std::vector<double> Tape::grad(Var output, std::span<const Var> inputs) const {
  if (output.tape() != this) throw std::logic_error("grad: output lives on a different tape");
  for (const Var& in : inputs)
    if (in.tape() != this) throw std::logic_error("grad: input lives on a different tape");

  std::vector<double> adj(nodes_.size(), 0.0);
  adj[static_cast<std::size_t>(output.index())] = 1.0;
  for (std::int32_t i = output.index(); i >= 0; --i) {
    const double g = adj[static_cast<std::size_t>(i)];
    if (g == 0.0) continue;
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::Add:
        adj[n.a] += g;
        adj[n.b] += g;
        break;
      case Op::Sub:
        adj[n.a] += g;
        adj[n.b] -= g;
        break;
      case Op::Mul:
        adj[n.a] += g * vals_[n.b];
        adj[n.b] += g * vals_[n.a];
        break;
      case Op::Div:
        adj[n.a] += g / vals_[n.b];
        adj[n.b] -= g * vals_[i] / vals_[n.b];
        break;
      case Op::Neg:
        adj[n.a] -= g;
        break;
      case Op::Exp:
        adj[n.a] += g * vals_[i];
        break;
      case Op::Tanh:
        adj[n.a] += g * (1.0 - vals_[i] * vals_[i]);
        break;
      case Op::Powi:
        adj[n.a] += g * n.aux * ipow(vals_[n.a], n.aux - 1);
        break;
    }
  }
  std::vector<double> out(inputs.size());
  for (std::size_t k = 0; k < inputs.size(); ++k)
    out[k] = adj[static_cast<std::size_t>(inputs[k].index())];
  return out;
}

double Tape::derivative(Var output, Var input) const {
  const Var ins[1] = {input};
  return grad(output, ins)[0];
}

std::vector<double> Tape::replay() const {
  std::vector<double> v(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::Leaf: v[i] = vals_[i]; break;
      case Op::Add: v[i] = v[n.a] + v[n.b]; break;
      case Op::Sub: v[i] = v[n.a] - v[n.b]; break;
      case Op::Mul: v[i] = v[n.a] * v[n.b]; break;
      case Op::Div: v[i] = v[n.a] / v[n.b]; break;
      case Op::Neg: v[i] = -v[n.a]; break;
      case Op::Exp: v[i] = std::exp(v[n.a]); break;
      case Op::Tanh: v[i] = std::tanh(v[n.a]); break;
      case Op::Powi: v[i] = ipow(v[n.a], n.aux); break;
    }
  }
  return v;
}

Var operator+(Var a, Var b) {
  Tape* t = common_tape(a, b);
  return t->record(Tape::Op::Add, a.index(), b.index(), a.value() + b.value());
}
Var operator-(Var a, Var b) {
  Tape* t = common_tape(a, b);
  return t->record(Tape::Op::Sub, a.index(), b.index(), a.value() - b.value());
}
Var operator*(Var a, Var b) {
  Tape* t = common_tape(a, b);
  return t->record(Tape::Op::Mul, a.index(), b.index(), a.value() * b.value());
}
Var operator/(Var a, Var b) {
  Tape* t = common_tape(a, b);
  return t->record(Tape::Op::Div, a.index(), b.index(), a.value() / b.value());
}
Var operator-(Var a) { return a.tape()->record(Tape::Op::Neg, a.index(), -1, -a.value()); }

Var operator+(Var a, double b) { return a + a.tape()->constant(b); }
Var operator+(double a, Var b) { return b.tape()->constant(a) + b; }
Var operator-(Var a, double b) { return a - a.tape()->constant(b); }
Var operator-(double a, Var b) { return b.tape()->constant(a) - b; }
Var operator*(Var a, double b) { return a * a.tape()->constant(b); }
Var operator*(double a, Var b) { return b.tape()->constant(a) * b; }
Var operator/(Var a, double b) { return a / a.tape()->constant(b); }
Var operator/(double a, Var b) { return b.tape()->constant(a) / b; }

Var exp(Var a) { return a.tape()->record(Tape::Op::Exp, a.index(), -1, std::exp(a.value())); }
Var tanh(Var a) { return a.tape()->record(Tape::Op::Tanh, a.index(), -1, std::tanh(a.value())); }
Var powi(Var a, int k) {
  return a.tape()->record(Tape::Op::Powi, a.index(), -1, ipow(a.value(), k), k);
}

}  // namespace rcpinn
