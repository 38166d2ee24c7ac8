#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rcpinn {

class Tape;

// Handle to one node of a Tape. Cheap to copy; arithmetic on Vars appends
// nodes to their tape. Mixing Vars from different tapes throws.
class Var {
 public:
  Var() = default;
  double value() const;
  Tape* tape() const { return tape_; }
  std::int32_t index() const { return idx_; }
  explicit operator bool() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* t, std::int32_t i) : tape_(t), idx_(i) {}
  Tape* tape_ = nullptr;
  std::int32_t idx_ = -1;
};

// Append-only scalar computational graph for reverse-mode differentiation.
// Nodes store (op, operand indices); primal values are evaluated eagerly at
// record time, and local partials are recomputed from the primals during the
// reverse sweep. Operands always precede their node, so one backward pass
// over the node array is a valid reverse topological order.
//
// Tape length for one PINN loss evaluation is linear in
// (#points) x (#network ops per point); an L-layer network with widths
// h_1..h_L records about 2*sum(h_i*h_{i-1}) nodes per plain forward pass and
// roughly 4x that when a time tangent rides along (see dual.hpp).
class Tape {
 public:
  enum class Op : std::uint8_t { Leaf, Add, Sub, Mul, Div, Neg, Exp, Tanh, Powi };

  // Leaf node: an input or trainable value.
  Var var(double v);
  // Constants are leaves too; the distinction only matters to the caller.
  Var constant(double v) { return var(v); }

  std::size_t size() const { return nodes_.size(); }
  void clear();
  void reserve(std::size_t n);
  double value(Var v) const { return vals_[static_cast<std::size_t>(v.index())]; }
  double value_at(std::size_t i) const { return vals_[i]; }

  // d(output)/d(input) for every input, via one reverse sweep from `output`.
  // Inputs the output does not depend on get gradient 0.
  std::vector<double> grad(Var output, std::span<const Var> inputs) const;

  // Derivative of one recorded scalar w.r.t. one leaf.
  double derivative(Var output, Var input) const;

  // Recomputes all primal values from the recorded structure; used to check
  // that the tape replays to identical values.
  std::vector<double> replay() const;

  Var record(Op op, std::int32_t a, std::int32_t b, double value, std::int32_t aux = 0);

 private:
  struct Node {
    Op op;
    std::int32_t a = -1;
    std::int32_t b = -1;
    std::int32_t aux = 0;  // integer exponent for Powi
  };
  std::vector<Node> nodes_;
  std::vector<double> vals_;
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
Var operator+(Var a, double b);
Var operator+(double a, Var b);
Var operator-(Var a, double b);
Var operator-(double a, Var b);
Var operator*(Var a, double b);
Var operator*(double a, Var b);
Var operator/(Var a, double b);
Var operator/(double a, Var b);
Var exp(Var a);
Var tanh(Var a);
Var powi(Var a, int k);

}  // namespace rcpinn
