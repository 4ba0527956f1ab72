#include "unipid/copula.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace unipid {

const char* family_name(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::Independence: return "independence";
    case CopulaFamily::Gaussian: return "gaussian";
    case CopulaFamily::Clayton: return "clayton";
    case CopulaFamily::Clayton180: return "clayton180";
    case CopulaFamily::Gumbel: return "gumbel";
    case CopulaFamily::Gumbel180: return "gumbel180";
    case CopulaFamily::Frank: return "frank";
  }
  return "?";
}

CopulaFamily family_from_name(const std::string& name) {
  for (CopulaFamily f : kAllFamilies)
    if (name == family_name(f)) return f;
  throw std::invalid_argument("unknown copula family: " + name);
}

ParamDomain family_domain(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::Independence: return {0.0, 0.0};
    case CopulaFamily::Gaussian: return {-0.9999, 0.9999};
    case CopulaFamily::Clayton:
    case CopulaFamily::Clayton180: return {1e-4, 28.0};
    case CopulaFamily::Gumbel:
    case CopulaFamily::Gumbel180: return {1.0, 17.0};
    case CopulaFamily::Frank: return {-35.0, 35.0};
  }
  return {0.0, 0.0};
}

int family_param_count(CopulaFamily f) { return f == CopulaFamily::Independence ? 0 : 1; }

void check_theta(CopulaFamily f, double theta) {
  if (f == CopulaFamily::Independence) return;
  const ParamDomain d = family_domain(f);
  const bool ok = theta >= d.lo && theta <= d.hi &&
                  (f != CopulaFamily::Frank || std::abs(theta) >= 1e-8);
  if (!ok)
    throw std::invalid_argument(std::string("copula parameter out of domain for ") +
                                family_name(f) + ": " + std::to_string(theta));
}

namespace cop_detail {

double gumbel_h_inverse_value(double theta, double w, double cond) {
  w = clamp_unit(w);
  cond = clamp_unit(cond);
  // Safeguarded Newton on h(x|cond) - w with a bisection bracket.
  double lo = kUnitEps, hi = 1.0 - kUnitEps;
  double x = w;  // decent start: identity at theta = 1
  for (int it = 0; it < 200; ++it) {
    const double fx = gumbel_h(theta, x, cond) - w;
    if (std::abs(fx) < 1e-12) break;
    if (fx > 0.0) hi = x; else lo = x;
    const double dens = std::exp(gumbel_log_density(theta, x, cond));
    double step = dens > 1e-280 ? fx / dens : 0.0;
    double xn = x - step;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) < 1e-16 && hi - lo < 1e-12) {
      x = xn;
      break;
    }
    x = xn;
  }
  return clamp_unit(x);
}

double gumbel_dh_dcond(double theta, double x, double cond) {
  const double lx = -std::log(x);
  const double lc = -std::log(cond);
  const double sa = theta * std::log(lx), sb = theta * std::log(lc);
  const double m = std::max(sa, sb);
  const double ls = m + std::log(std::exp(sa - m) + std::exp(sb - m));
  const double s = std::exp(ls);
  const double t = std::exp(ls / theta);
  const double h = std::exp(-t + (1.0 / theta - 1.0) * ls + (theta - 1.0) * std::log(lc) + lc);
  const double lc_pow = std::exp((theta - 1.0) * std::log(lc));
  const double dlogh =
      std::exp((1.0 / theta - 1.0) * ls) * lc_pow / cond -
      (1.0 / theta - 1.0) * theta * lc_pow / (cond * s) - (theta - 1.0) / (cond * lc) -
      1.0 / cond;
  return h * dlogh;
}

}  // namespace cop_detail

double copula_log_likelihood(CopulaFamily f, double theta, std::span<const double> u,
                             std::span<const double> v) {
  check_theta(f, theta);
  double ll = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) ll += copula_log_density(f, theta, u[i], v[i]);
  return ll;
}

CopulaModel fit_copula(CopulaFamily f, std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("fit_copula: length mismatch");
  const int n = static_cast<int>(u.size());
  if (n < 50) throw std::invalid_argument("fit_copula: need at least 50 pairs");
  bool degenerate = true;
  for (std::size_t i = 1; i < u.size() && degenerate; ++i)
    degenerate = u[i] == u[0] && v[i] == v[0];
  if (degenerate) throw std::invalid_argument("fit_copula: degenerate data (all pairs identical)");

  if (f == CopulaFamily::Independence) return {f, 0.0, 0.0, 0.0, n};

  const auto nll = [&](double theta) { return -copula_log_likelihood(f, theta, u, v); };

  const ParamDomain dom = family_domain(f);
  std::vector<std::array<double, 2>> intervals;
  if (f == CopulaFamily::Frank) {
    intervals.push_back({dom.lo, -1e-4});
    intervals.push_back({1e-4, dom.hi});
  } else {
    intervals.push_back({dom.lo, dom.hi});
  }

  double best_theta = dom.lo;
  double best_nll = std::numeric_limits<double>::infinity();
  for (const auto& [lo, hi] : intervals) {
    // Coarse scan to bracket the optimum, then Brent inside the bracket.
    constexpr int kScan = 24;
    int best_i = 0;
    double best_f = std::numeric_limits<double>::infinity();
    std::array<double, kScan> grid{};
    for (int i = 0; i < kScan; ++i) {
      grid[i] = lo + (hi - lo) * static_cast<double>(i) / (kScan - 1);
      const double fi = nll(grid[i]);
      if (fi < best_f) {
        best_f = fi;
        best_i = i;
      }
    }
    const double a = grid[std::max(0, best_i - 1)];
    const double b = grid[std::min(kScan - 1, best_i + 1)];
    const BrentResult r = brent_minimize(nll, a, b, 1e-6);
    const double cand_theta = r.fx < best_f ? r.x : grid[best_i];
    const double cand_nll = std::min(r.fx, best_f);
    if (cand_nll < best_nll) {
      best_nll = cand_nll;
      best_theta = cand_theta;
    }
  }

  CopulaModel m;
  m.family = f;
  m.theta = best_theta;
  m.loglik = -best_nll;
  m.aic = 2.0 * family_param_count(f) - 2.0 * m.loglik;
  m.n_fitted = n;
  return m;
}

CopulaModel select_copula(std::span<const double> u, std::span<const double> v,
                          std::span<const CopulaFamily> candidates) {
  if (candidates.empty()) throw std::invalid_argument("select_copula: no candidates");
  CopulaModel best;
  bool have = false;
  for (CopulaFamily f : candidates) {
    CopulaModel m = fit_copula(f, u, v);
    if (!have || m.aic < best.aic) {
      best = m;
      have = true;
    }
  }
  return best;
}

namespace {

// Debye function D1(x) = (1/x) * integral_0^x t/(e^t - 1) dt, x > 0.
double debye1(double x) {
  const int n = 2000;
  const double h = x / n;
  auto f = [](double t) { return t < 1e-8 ? 1.0 - 0.5 * t : t / std::expm1(t); };
  double s = f(0.0) + f(x);
  for (int i = 1; i < n; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * f(i * h);
  return s * h / 3.0 / x;
}

}  // namespace

double model_kendall_tau(const CopulaModel& m) {
  switch (m.family) {
    case CopulaFamily::Independence: return 0.0;
    case CopulaFamily::Gaussian: return 2.0 / M_PI * std::asin(m.theta);
    case CopulaFamily::Clayton:
    case CopulaFamily::Clayton180: return m.theta / (m.theta + 2.0);
    case CopulaFamily::Gumbel:
    case CopulaFamily::Gumbel180: return 1.0 - 1.0 / m.theta;
    case CopulaFamily::Frank: {
      const double t = std::abs(m.theta);
      const double tau = 1.0 + 4.0 * (debye1(t) - 1.0) / t;
      return m.theta >= 0.0 ? tau : -tau;
    }
  }
  return 0.0;
}

double copula_cdf(CopulaFamily f, double theta, double u, double v) {
  u = clamp_unit(u);
  v = clamp_unit(v);
  switch (f) {
    case CopulaFamily::Independence: return u * v;
    case CopulaFamily::Clayton:
      return std::pow(std::pow(u, -theta) + std::pow(v, -theta) - 1.0, -1.0 / theta);
    case CopulaFamily::Clayton180:
      return u + v - 1.0 + copula_cdf(CopulaFamily::Clayton, theta, 1.0 - u, 1.0 - v);
    case CopulaFamily::Gumbel: {
      const double s = std::pow(-std::log(u), theta) + std::pow(-std::log(v), theta);
      return std::exp(-std::pow(s, 1.0 / theta));
    }
    case CopulaFamily::Gumbel180:
      return u + v - 1.0 + copula_cdf(CopulaFamily::Gumbel, theta, 1.0 - u, 1.0 - v);
    case CopulaFamily::Frank: {
      const double g1 = std::expm1(-theta);
      return -std::log1p(std::expm1(-theta * u) * std::expm1(-theta * v) / g1) / theta;
    }
    case CopulaFamily::Gaussian:
      throw std::invalid_argument("copula_cdf: no closed form for the Gaussian family");
  }
  throw std::logic_error("copula_cdf: bad family");
}

}  // namespace unipid
