#pragma once

#include <array>
#include <span>
#include <vector>

#include "unipid/numerics.hpp"
#include "unipid/tape.hpp"

namespace unipid {

inline Var softplus(const Var& x) {
  if (x.v > 0.0) return x + log(1.0 + exp(-x));
  return log(1.0 + exp(x));
}

// Conditional-copula parameter map theta(u_y) = tanh(sum_i w2_i tanh(w1_i u + b1_i) + b2).
// The output lives in (-1, 1) by construction. Layout: w1[16] b1[16] w2[16] b2.
struct ThetaNet {
  static constexpr int kHidden = 16;
  static constexpr int kParams = 3 * kHidden + 1;
  std::array<double, kParams> p{};

  /// Weights ~ Normal(0, 0.1^2), biases zero: starts near the independence copula.
  static ThetaNet random_init(RngStream& rng) {
    ThetaNet n;
    for (int i = 0; i < kHidden; ++i) n.p[i] = 0.1 * rng.normal();
    for (int i = 0; i < kHidden; ++i) n.p[2 * kHidden + i] = 0.1 * rng.normal();
    return n;
  }

  double eval(double u) const;
};

template <class S>
S theta_eval(std::span<const S> p, S u) {
  constexpr int h = ThetaNet::kHidden;
  S z = p[3 * h];
  for (int i = 0; i < h; ++i) z = z + p[2 * h + i] * tanh(p[i] * u + p[h + i]);
  return tanh(z);
}

inline double ThetaNet::eval(double u) const {
  return theta_eval(std::span<const double>(p.data(), p.size()), u);
}

// Inference distribution r_phi(u_y | u_1, u_2), parametrized through its CDF
//   R(u_y) = sigmoid(logit(u_y) * a + b),
// with (a, b) produced by a two-hidden-layer tanh network on (u_1, u_2) and
// a = softplus(s_a) + 1e-4 > 0 so R is increasing in u_y.
// Layout: W1[16x2] b1[16] W2[16x16] b2[16] W3[2x16] b3[2].
struct InferenceNet {
  static constexpr int kHidden = 16;
  static constexpr int kParams =
      2 * kHidden + kHidden + kHidden * kHidden + kHidden + 2 * kHidden + 2;
  std::array<double, kParams> p{};

  static InferenceNet random_init(RngStream& rng) {
    InferenceNet n;
    constexpr int h = kHidden;
    for (int i = 0; i < 2 * h; ++i) n.p[i] = 0.1 * rng.normal();
    for (int i = 0; i < h * h; ++i) n.p[3 * h + i] = 0.1 * rng.normal();
    for (int i = 0; i < 2 * h; ++i) n.p[3 * h + h * h + h + i] = 0.1 * rng.normal();
    return n;
  }
};

template <class S>
struct InferenceOut {
  S a, b;
};

template <class S>
InferenceOut<S> inference_eval(std::span<const S> p, S u1, S u2) {
  constexpr int h = InferenceNet::kHidden;
  const int ob1 = 2 * h, ow2 = 3 * h, ob2 = 3 * h + h * h, ow3 = ob2 + h, ob3 = ow3 + 2 * h;
  std::array<S, h> h1, h2;
  for (int i = 0; i < h; ++i) h1[i] = tanh(p[2 * i] * u1 + p[2 * i + 1] * u2 + p[ob1 + i]);
  for (int i = 0; i < h; ++i) {
    S z = p[ob2 + i];
    for (int j = 0; j < h; ++j) z = z + p[ow2 + h * i + j] * h1[j];
    h2[i] = tanh(z);
  }
  S sa = p[ob3 + 0];
  S sb = p[ob3 + 1];
  for (int j = 0; j < h; ++j) {
    sa = sa + p[ow3 + j] * h2[j];
    sb = sb + p[ow3 + h + j] * h2[j];
  }
  return {softplus(sa) + 1e-4, sb};
}

inline InferenceOut<double> inference_eval(const InferenceNet& n, double u1, double u2) {
  return inference_eval(std::span<const double>(n.p.data(), n.p.size()), u1, u2);
}

template <class S>
S r_cdf(S a, S b, S u_y) {
  return sigmoid(logit(clamp_unit(u_y)) * a + b);
}

template <class S>
S r_log_density(S a, S b, S u_y) {
  S u = clamp_unit(u_y);
  S r = r_cdf(a, b, u);
  return log(r) + log(1.0 - r) + log(a) + log(1.0 / u + 1.0 / (1.0 - u));
}

template <class S>
S r_density(S a, S b, S u_y) {
  return exp(r_log_density(a, b, u_y));
}

/// Inverse-CDF sample; eps is the uniform draw. Pathwise differentiable in (a, b).
template <class S>
S r_sample(S a, S b, double eps) {
  return sigmoid((logit(eps) - b) / a);
}

/// Lift a parameter vector onto a tape as leaves (in order, contiguous ids).
inline std::vector<Var> lift_params(Tape& t, std::span<const double> p) {
  std::vector<Var> out;
  out.reserve(p.size());
  for (double x : p) out.push_back(make_leaf(t, x));
  return out;
}

}  // namespace unipid
