#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

namespace unipid {

// Unit-interval values are clamped into [kUnitEps, 1 - kUnitEps] before they
// enter logs or quantile transforms. Clamping is idempotent.
inline constexpr double kUnitEps = 1e-12;

inline double clamp_unit(double u) {
  if (u < kUnitEps) return kUnitEps;
  if (u > 1.0 - kUnitEps) return 1.0 - kUnitEps;
  return u;
}

inline constexpr double kHalfLog2Pi = 0.91893853320467274178;

// Forwarders so generic code over double/Var can call these unqualified.
inline double exp(double x) { return std::exp(x); }
inline double log(double x) { return std::log(x); }
inline double sqrt(double x) { return std::sqrt(x); }
inline double tanh(double x) { return std::tanh(x); }
inline double pow(double x, double e) { return std::pow(x, e); }

/// Standard normal CDF, clamped into the open unit interval.
double std_normal_cdf(double x);

/// Standard normal quantile. Rational approximation refined by one Newton
/// step on the CDF; inputs are clamped, outputs are always finite.
double std_normal_quantile(double u);

inline double std_normal_pdf(double x) { return std::exp(-0.5 * x * x - kHalfLog2Pi); }
inline double std_normal_logpdf(double x) { return -0.5 * x * x - kHalfLog2Pi; }

inline double logit(double u) {
  u = clamp_unit(u);
  return std::log(u) - std::log1p(-u);
}

inline double sigmoid(double z) {
  double s = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  return clamp_unit(s);
}

inline double softplus(double z) {
  if (z > 30.0) return z;
  if (z < -30.0) return std::exp(z);
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
}  // namespace detail

// Counter-based generator: the k-th draw is a mix of seed + k * golden gamma
// (splitmix64 output function). Identical seeds give identical sequences on
// every platform, independent of how many values were drawn elsewhere.
class RngStream {
 public:
  RngStream() : RngStream(0) {}
  explicit RngStream(std::uint64_t seed) : seed_(seed), pos_(0) {}

  std::uint64_t next_u64() {
    ++pos_;
    return detail::mix64(seed_ + pos_ * 0x9E3779B97F4A7C15ull);
  }

  /// Uniform draw strictly inside (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via the inverse-CDF method (deterministic across platforms).
  double normal() { return std_normal_quantile(uniform()); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t position() const { return pos_; }

  /// Independent substream for job `index`, reproducible regardless of
  /// scheduling: seed' = mix(seed, index).
  RngStream derive(std::uint64_t index) const {
    return RngStream(detail::mix64(seed_ ^ detail::mix64(0xD1B54A32D192ED03ull + index)));
  }

 private:
  std::uint64_t seed_;
  std::uint64_t pos_;
};

struct BrentResult {
  double x;
  double fx;
};

/// Brent minimization of a unimodal 1-D function on [a, b].
template <class F>
BrentResult brent_minimize(F&& f, double a, double b, double tol, int max_iter = 200) {
  const double gold = 0.3819660112501051;
  double x = a + gold * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    double m = 0.5 * (a + b);
    double tol1 = tol * std::abs(x) + 1e-15;
    double tol2 = 2.0 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
    double p = 0.0, q = 0.0, r = 0.0;
    bool parabolic = false;
    if (std::abs(e) > tol1) {
      r = (x - w) * (fx - fv);
      q = (x - v) * (fx - fw);
      p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      double e_old = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_old) && p > q * (a - x) && p < q * (b - x)) {
        parabolic = true;
        d = p / q;
        double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = x < m ? tol1 : -tol1;
      }
    }
    if (!parabolic) {
      e = (x < m ? b : a) - x;
      d = gold * e;
    }
    double u = std::abs(d) >= tol1 ? x + d : x + (d > 0.0 ? tol1 : -tol1);
    double fu = f(u);
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx};
}

}  // namespace unipid
