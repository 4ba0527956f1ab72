#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

#include "unipid/numerics.hpp"

namespace unipid {

// Reverse-accumulation tape over scalar operations. Nodes store only the
// local partials and parent indices; forward values live in the Var handles.
// One reverse sweep yields d(root)/d(leaf) for every leaf.
class Tape {
 public:
  struct Node {
    double d0, d1;
    std::int32_t p0, p1;
  };

  int new_leaf() {
    nodes_.push_back({0.0, 0.0, -1, -1});
    return static_cast<int>(nodes_.size()) - 1;
  }
  int new_unary(int p, double d) {
    nodes_.push_back({d, 0.0, static_cast<std::int32_t>(p), -1});
    return static_cast<int>(nodes_.size()) - 1;
  }
  int new_binary(int pa, int pb, double da, double db) {
    nodes_.push_back({da, db, static_cast<std::int32_t>(pa), static_cast<std::int32_t>(pb)});
    return static_cast<int>(nodes_.size()) - 1;
  }

  void clear() { nodes_.clear(); }
  std::size_t size() const { return nodes_.size(); }
  void reserve(std::size_t n) { nodes_.reserve(n); }

  /// Reverse sweep from `root`; overwrites all adjoints. Linear in tape length.
  void backward(int root) {
    adj_.assign(nodes_.size(), 0.0);
    adj_[root] = 1.0;
    for (int i = root; i >= 0; --i) {
      const double a = adj_[i];
      if (a == 0.0) continue;
      const Node& n = nodes_[i];
      if (n.p0 >= 0) {
        adj_[n.p0] += n.d0 * a;
        if (n.p1 >= 0) adj_[n.p1] += n.d1 * a;
      }
    }
  }

  double adjoint(int i) const { return adj_[i]; }

 private:
  std::vector<Node> nodes_;
  std::vector<double> adj_;
};

struct Var {
  Tape* tape;
  std::int32_t id;
  double v;
};

inline Var make_leaf(Tape& t, double v) { return {&t, static_cast<std::int32_t>(t.new_leaf()), v}; }

inline double val(double x) { return x; }
inline double val(const Var& x) { return x.v; }

/// New leaf carrying x's value: gradients do not flow past it.
inline double detach(double x) { return x; }
inline Var detach(const Var& x) { return make_leaf(*x.tape, x.v); }

template <class S>
S like_const(const S&, double c) { return c; }
inline Var like_const(const Var& x, double c) { return make_leaf(*x.tape, c); }

// ---- arithmetic -----------------------------------------------------------

inline Var operator+(const Var& a, const Var& b) {
  return {a.tape, static_cast<std::int32_t>(a.tape->new_binary(a.id, b.id, 1.0, 1.0)), a.v + b.v};
}
inline Var operator+(const Var& a, double b) {
  return {a.tape, static_cast<std::int32_t>(a.tape->new_unary(a.id, 1.0)), a.v + b};
}
inline Var operator+(double a, const Var& b) { return b + a; }

inline Var operator-(const Var& a, const Var& b) {
  return {a.tape, static_cast<std::int32_t>(a.tape->new_binary(a.id, b.id, 1.0, -1.0)), a.v - b.v};
}
inline Var operator-(const Var& a, double b) {
  return {a.tape, static_cast<std::int32_t>(a.tape->new_unary(a.id, 1.0)), a.v - b};
}
inline Var operator-(double a, const Var& b) {
  return {b.tape, static_cast<std::int32_t>(b.tape->new_unary(b.id, -1.0)), a - b.v};
}
inline Var operator-(const Var& a) {
  return {a.tape, static_cast<std::int32_t>(a.tape->new_unary(a.id, -1.0)), -a.v};
}

inline Var operator*(const Var& a, const Var& b) {
  return {a.tape, static_cast<std::int32_t>(a.tape->new_binary(a.id, b.id, b.v, a.v)), a.v * b.v};
}
inline Var operator*(const Var& a, double b) {
  return {a.tape, static_cast<std::int32_t>(a.tape->new_unary(a.id, b)), a.v * b};
}
inline Var operator*(double a, const Var& b) { return b * a; }

inline Var operator/(const Var& a, const Var& b) {
  const double inv = 1.0 / b.v;
  return {a.tape, static_cast<std::int32_t>(a.tape->new_binary(a.id, b.id, inv, -a.v * inv * inv)),
          a.v * inv};
}
inline Var operator/(const Var& a, double b) { return a * (1.0 / b); }
inline Var operator/(double a, const Var& b) {
  const double inv = 1.0 / b.v;
  return {b.tape, static_cast<std::int32_t>(b.tape->new_unary(b.id, -a * inv * inv)), a * inv};
}

// ---- primitives -----------------------------------------------------------

inline Var exp(const Var& x) {
  const double e = std::exp(x.v);
  return {x.tape, static_cast<std::int32_t>(x.tape->new_unary(x.id, e)), e};
}

inline Var log(const Var& x) {
  return {x.tape, static_cast<std::int32_t>(x.tape->new_unary(x.id, 1.0 / x.v)), std::log(x.v)};
}

inline Var sqrt(const Var& x) {
  const double s = std::sqrt(x.v);
  return {x.tape, static_cast<std::int32_t>(x.tape->new_unary(x.id, 0.5 / s)), s};
}

inline Var tanh(const Var& x) {
  const double t = std::tanh(x.v);
  return {x.tape, static_cast<std::int32_t>(x.tape->new_unary(x.id, 1.0 - t * t)), t};
}

inline Var pow(const Var& x, double e) {
  const double p = std::pow(x.v, e);
  return {x.tape, static_cast<std::int32_t>(x.tape->new_unary(x.id, e * p / x.v)), p};
}

inline Var sigmoid(const Var& x) {
  const double s = sigmoid(x.v);
  return {x.tape, static_cast<std::int32_t>(x.tape->new_unary(x.id, s * (1.0 - s))), s};
}

inline Var logit(const Var& x) {
  const double u = clamp_unit(x.v);
  return {x.tape, static_cast<std::int32_t>(x.tape->new_unary(x.id, 1.0 / (u * (1.0 - u)))),
          logit(x.v)};
}

inline Var std_normal_cdf(const Var& x) {
  return {x.tape, static_cast<std::int32_t>(x.tape->new_unary(x.id, std_normal_pdf(x.v))),
          std_normal_cdf(x.v)};
}

inline Var std_normal_quantile(const Var& x) {
  const double q = std_normal_quantile(x.v);
  return {x.tape, static_cast<std::int32_t>(x.tape->new_unary(x.id, 1.0 / std_normal_pdf(q))), q};
}

inline Var std_normal_logpdf(const Var& x) {
  return {x.tape, static_cast<std::int32_t>(x.tape->new_unary(x.id, -x.v)), std_normal_logpdf(x.v)};
}

/// Clamp into the unit interval. Identity (derivative 1) strictly inside,
/// constant at the clamp.
inline Var clamp_unit(const Var& x) {
  const bool inside = x.v > kUnitEps && x.v < 1.0 - kUnitEps;
  return {x.tape, static_cast<std::int32_t>(x.tape->new_unary(x.id, inside ? 1.0 : 0.0)),
          clamp_unit(x.v)};
}

}  // namespace unipid
