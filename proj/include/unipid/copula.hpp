#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "unipid/numerics.hpp"
#include "unipid/tape.hpp"

namespace unipid {

// Bivariate one-parameter copula families. The 180-degree rotations are the
// survival copulas of Clayton/Gumbel. All families are exchangeable.
enum class CopulaFamily {
  Independence,
  Gaussian,
  Clayton,
  Clayton180,
  Gumbel,
  Gumbel180,
  Frank,
};

inline constexpr CopulaFamily kAllFamilies[] = {
    CopulaFamily::Independence, CopulaFamily::Gaussian,  CopulaFamily::Clayton,
    CopulaFamily::Clayton180,   CopulaFamily::Gumbel,    CopulaFamily::Gumbel180,
    CopulaFamily::Frank,
};

const char* family_name(CopulaFamily f);
CopulaFamily family_from_name(const std::string& name);

struct ParamDomain {
  double lo, hi;
};

/// Admissible parameter range used for validation and fitting.
ParamDomain family_domain(CopulaFamily f);
int family_param_count(CopulaFamily f);
void check_theta(CopulaFamily f, double theta);

// A fitted copula: family tag, parameter, log-likelihood (nats) and AIC.
struct CopulaModel {
  CopulaFamily family = CopulaFamily::Independence;
  double theta = 0.0;
  double loglik = 0.0;
  double aic = 0.0;
  int n_fitted = 0;
};

// ---------------------------------------------------------------------------
// Templated evaluators: S is double (plain evaluation) or Var (taped, for
// gradients through the arguments). The family parameter theta is a fitted
// constant here; the learned conditional Gaussian with variable theta has its
// own entry points below.
// ---------------------------------------------------------------------------

namespace cop_detail {

template <class S>
S gaussian_log_density(double theta, S u, S v) {
  const double om = 1.0 - theta * theta;
  const double c0 = -0.5 * std::log(om);
  const double a = theta * theta / (2.0 * om);
  const double b = theta / om;
  S x = std_normal_quantile(u);
  S y = std_normal_quantile(v);
  return c0 - a * (x * x + y * y) + b * (x * y);
}

template <class S>
S gaussian_h(double theta, S x, S cond) {
  const double s = std::sqrt(1.0 - theta * theta);
  S zx = std_normal_quantile(x);
  S zc = std_normal_quantile(cond);
  return std_normal_cdf((zx - theta * zc) * (1.0 / s));
}

template <class S>
S gaussian_h_inverse(double theta, S w, S cond) {
  const double s = std::sqrt(1.0 - theta * theta);
  S zw = std_normal_quantile(w);
  S zc = std_normal_quantile(cond);
  return std_normal_cdf(zw * s + theta * zc);
}

// log(u^-t + v^-t - 1) evaluated stably for large t.
template <class S>
S clayton_log_sum(double theta, S lu, S lv) {
  S a = -theta * lu;
  S b = -theta * lv;
  const double m = std::max(val(a), val(b));
  return m + log(exp(a - m) + exp(b - m) - std::exp(-m));
}

template <class S>
S clayton_log_density(double theta, S u, S v) {
  S lu = log(u);
  S lv = log(v);
  S ls = clayton_log_sum(theta, lu, lv);
  return std::log1p(theta) - (1.0 + theta) * (lu + lv) - (1.0 / theta + 2.0) * ls;
}

template <class S>
S clayton_h(double theta, S x, S cond) {
  S lx = log(x);
  S lc = log(cond);
  S ls = clayton_log_sum(theta, lx, lc);
  return clamp_unit(exp(-(theta + 1.0) * lc - (1.0 / theta + 1.0) * ls));
}

template <class S>
S clayton_h_inverse(double theta, S w, S cond) {
  S lw = log(w);
  S lc = log(cond);
  S t1 = (-theta / (theta + 1.0)) * lw - theta * lc;
  S t2 = -theta * lc;
  const double m = std::max({val(t1), val(t2), 0.0});
  S log_inner = m + log(exp(t1 - m) + std::exp(-m) - exp(t2 - m));
  return clamp_unit(exp((-1.0 / theta) * log_inner));
}

// log(lu^t + lv^t) via log-sum-exp, where llu = log(-log u), llv = log(-log v).
template <class S>
S gumbel_log_s(double theta, S llu, S llv) {
  S a = theta * llu;
  S b = theta * llv;
  const double m = std::max(val(a), val(b));
  return m + log(exp(a - m) + exp(b - m));
}

template <class S>
S gumbel_log_density(double theta, S u, S v) {
  S lu = -log(u);
  S lv = -log(v);
  S llu = log(lu);
  S llv = log(lv);
  S ls = gumbel_log_s(theta, llu, llv);
  S t = exp((1.0 / theta) * ls);
  return -t + lu + lv + (2.0 / theta - 2.0) * ls + (theta - 1.0) * (llu + llv) +
         log(1.0 + (theta - 1.0) / t);
}

template <class S>
S gumbel_h(double theta, S x, S cond) {
  S lx = -log(x);
  S lc = -log(cond);
  S ls = gumbel_log_s(theta, log(lx), log(lc));
  S t = exp((1.0 / theta) * ls);
  return clamp_unit(exp(-t + (1.0 / theta - 1.0) * ls + (theta - 1.0) * log(lc) + lc));
}

double gumbel_h_inverse_value(double theta, double w, double cond);
/// d h(x|v) / dv for the Gumbel family (used by the implicit inverse node).
double gumbel_dh_dcond(double theta, double x, double cond);

template <class S>
S gumbel_h_inverse(double theta, S w, S cond) {
  if constexpr (std::is_same_v<S, Var>) {
    // Implicit-function node: x solves h(x|cond) = w, so dx/dw = 1/c(x,cond)
    // and dx/dcond = -(dh/dcond)/c(x,cond).
    const double x = gumbel_h_inverse_value(theta, w.v, cond.v);
    const double dens = std::exp(gumbel_log_density(theta, x, cond.v));
    const double dw = 1.0 / dens;
    const double dc = -gumbel_dh_dcond(theta, x, cond.v) / dens;
    return {w.tape, static_cast<std::int32_t>(w.tape->new_binary(w.id, cond.id, dw, dc)), x};
  } else {
    return gumbel_h_inverse_value(theta, w, cond);
  }
}

template <class S>
S frank_log_density(double theta, S u, S v) {
  const double g1 = std::expm1(-theta);
  const double sign = theta > 0.0 ? -1.0 : 1.0;
  S gu = exp(-theta * u) - 1.0;
  S gv = exp(-theta * v) - 1.0;
  S den = gu * gv + g1;
  return std::log(-theta * g1) - theta * (u + v) - 2.0 * log(sign * den);
}

template <class S>
S frank_h(double theta, S x, S cond) {
  const double g1 = std::expm1(-theta);
  S gx = exp(-theta * x) - 1.0;
  S gc = exp(-theta * cond) - 1.0;
  return clamp_unit((gx * exp(-theta * cond)) / (gx * gc + g1));
}

template <class S>
S frank_h_inverse(double theta, S w, S cond) {
  // From w = g(x) e^{-theta c} / (g1 + g(x) g(c)):
  //   x = -(1/theta) log(num/den),
  //   num = (1-w) e^{-theta c} + w e^{-theta},  den = e^{-theta c} - w g(c).
  // Both num and den are sums of positive terms.
  const double e1 = std::exp(-theta);
  S ec = exp(-theta * cond);
  S gc = ec - 1.0;
  S num = (1.0 - w) * ec + w * e1;
  S den = ec - w * gc;
  return clamp_unit((-1.0 / theta) * (log(num) - log(den)));
}

}  // namespace cop_detail

/// log c(u, v; theta). Arguments are clamped into the open unit interval.
template <class S>
S copula_log_density(CopulaFamily f, double theta, S u, S v) {
  using namespace cop_detail;
  u = clamp_unit(u);
  v = clamp_unit(v);
  switch (f) {
    case CopulaFamily::Independence: return like_const(u, 0.0);
    case CopulaFamily::Gaussian: return gaussian_log_density(theta, u, v);
    case CopulaFamily::Clayton: return clayton_log_density(theta, u, v);
    case CopulaFamily::Clayton180: return clayton_log_density(theta, 1.0 - u, 1.0 - v);
    case CopulaFamily::Gumbel: return gumbel_log_density(theta, u, v);
    case CopulaFamily::Gumbel180: return gumbel_log_density(theta, 1.0 - u, 1.0 - v);
    case CopulaFamily::Frank: return frank_log_density(theta, u, v);
  }
  throw std::logic_error("copula_log_density: bad family");
}

template <class S>
S copula_density(CopulaFamily f, double theta, S u, S v) {
  using std::exp;
  return exp(copula_log_density(f, theta, u, v));
}

/// Conditional CDF h(x | cond) = dC(x, cond)/d cond.
template <class S>
S copula_h(CopulaFamily f, double theta, S x, S cond) {
  using namespace cop_detail;
  x = clamp_unit(x);
  cond = clamp_unit(cond);
  switch (f) {
    case CopulaFamily::Independence: return x;
    case CopulaFamily::Gaussian: return gaussian_h(theta, x, cond);
    case CopulaFamily::Clayton: return clayton_h(theta, x, cond);
    case CopulaFamily::Clayton180: return clamp_unit(1.0 - clayton_h(theta, 1.0 - x, 1.0 - cond));
    case CopulaFamily::Gumbel: return gumbel_h(theta, x, cond);
    case CopulaFamily::Gumbel180: return clamp_unit(1.0 - gumbel_h(theta, 1.0 - x, 1.0 - cond));
    case CopulaFamily::Frank: return frank_h(theta, x, cond);
  }
  throw std::logic_error("copula_h: bad family");
}

/// Inverse of copula_h in its first argument: h(h_inverse(w|cond) | cond) = w.
template <class S>
S copula_h_inverse(CopulaFamily f, double theta, S w, S cond) {
  using namespace cop_detail;
  w = clamp_unit(w);
  cond = clamp_unit(cond);
  switch (f) {
    case CopulaFamily::Independence: return w;
    case CopulaFamily::Gaussian: return gaussian_h_inverse(theta, w, cond);
    case CopulaFamily::Clayton: return clayton_h_inverse(theta, w, cond);
    case CopulaFamily::Clayton180:
      return clamp_unit(1.0 - clayton_h_inverse(theta, 1.0 - w, 1.0 - cond));
    case CopulaFamily::Gumbel: return gumbel_h_inverse(theta, w, cond);
    case CopulaFamily::Gumbel180:
      return clamp_unit(1.0 - gumbel_h_inverse(theta, 1.0 - w, 1.0 - cond));
    case CopulaFamily::Frank: return frank_h_inverse(theta, w, cond);
  }
  throw std::logic_error("copula_h_inverse: bad family");
}

// Model-argument conveniences.
template <class S>
S copula_log_density(const CopulaModel& m, S u, S v) {
  return copula_log_density(m.family, m.theta, u, v);
}
template <class S>
S copula_h(const CopulaModel& m, S x, S cond) {
  return copula_h(m.family, m.theta, x, cond);
}
template <class S>
S copula_h_inverse(const CopulaModel& m, S w, S cond) {
  return copula_h_inverse(m.family, m.theta, w, cond);
}
inline double copula_density(const CopulaModel& m, double u, double v) {
  return copula_density(m.family, m.theta, u, v);
}

// ---------------------------------------------------------------------------
// Learned conditional Gaussian copula: theta varies with the sample, so it is
// the same scalar type as the arguments.
// ---------------------------------------------------------------------------

template <class S>
S gauss_cond_log_density(S theta, S u, S v) {
  S x = std_normal_quantile(clamp_unit(u));
  S y = std_normal_quantile(clamp_unit(v));
  S t2 = theta * theta;
  S om = 1.0 - t2;
  return -0.5 * log(om) - (t2 * (x * x + y * y) - 2.0 * theta * (x * y)) / (2.0 * om);
}

template <class S>
S gauss_cond_h_inverse(S theta, S w, S cond) {
  S zw = std_normal_quantile(clamp_unit(w));
  S zc = std_normal_quantile(clamp_unit(cond));
  return std_normal_cdf(zw * sqrt(1.0 - theta * theta) + theta * zc);
}

template <class S>
S gauss_cond_h(S theta, S x, S cond) {
  S zx = std_normal_quantile(clamp_unit(x));
  S zc = std_normal_quantile(clamp_unit(cond));
  return std_normal_cdf((zx - theta * zc) / sqrt(1.0 - theta * theta));
}

// ---------------------------------------------------------------------------
// Fitting and selection.
// ---------------------------------------------------------------------------

/// Sum of log densities over pseudo-observation pairs (nats).
double copula_log_likelihood(CopulaFamily f, double theta, std::span<const double> u,
                             std::span<const double> v);

/// Maximum-likelihood fit of one family; theta located to 1e-6.
CopulaModel fit_copula(CopulaFamily f, std::span<const double> u, std::span<const double> v);

/// Fits every candidate family and returns the minimum-AIC model
/// (ties broken by family order).
CopulaModel select_copula(std::span<const double> u, std::span<const double> v,
                          std::span<const CopulaFamily> candidates = kAllFamilies);

/// Model-implied Kendall tau.
double model_kendall_tau(const CopulaModel& m);

/// Copula CDF C(u,v); closed forms for the Archimedean families and
/// Independence. Throws for Gaussian (no closed form).
double copula_cdf(CopulaFamily f, double theta, double u, double v);

}  // namespace unipid
