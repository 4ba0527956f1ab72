#include "unipid/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace unipid {

void EstimatorConfig::validate() const {
  if (inner_samples < 1) throw std::invalid_argument("EstimatorConfig: A >= 1 required");
  if (batch_size < 1) throw std::invalid_argument("EstimatorConfig: M >= 1 required");
  if (iterations < 1) throw std::invalid_argument("EstimatorConfig: iterations >= 1 required");
  if (averaging_window < 1 || averaging_window > iterations)
    throw std::invalid_argument("EstimatorConfig: need 1 <= W <= iterations");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("EstimatorConfig: learning rate > 0");
}

double TrainingTrace::mean_last(int w) const {
  if (w < 1 || static_cast<std::size_t>(w) > bound.size())
    throw std::invalid_argument("TrainingTrace: bad window");
  double s = 0.0;
  for (std::size_t i = bound.size() - static_cast<std::size_t>(w); i < bound.size(); ++i)
    s += bound[i];
  return s / w;
}

double pairwise_sum(std::span<const double> x) {
  if (x.size() == 0) return 0.0;
  if (x.size() == 1) return x[0];
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

CopulaSample rosenblatt_sample(const FittedPair& pair, const ThetaNet& net, double v1, double vy,
                               double v2) {
  const double u1 = clamp_unit(v1);
  const double uy = copula_h_inverse(pair.c_y1.family, pair.c_y1.theta, clamp_unit(vy), u1);
  const double u1y = copula_h(pair.c_y1.family, pair.c_y1.theta, u1, uy);
  const double theta = net.eval(uy);
  const double u2y = gauss_cond_h_inverse(theta, clamp_unit(v2), u1y);
  const double u2 = copula_h_inverse(pair.c_y2.family, pair.c_y2.theta, u2y, uy);
  return {u1, uy, u2};
}

double bound_B1_value(std::span<const CopulaSample> batch, const FittedPair& pair,
                      const ThetaNet& net) {
  const std::span<const double> tp(net.p.data(), net.p.size());
  std::vector<double> terms;
  terms.reserve(batch.size());
  for (const CopulaSample& s : batch) {
    const double l1 = copula_log_density(pair.c_y1.family, pair.c_y1.theta, s.u_y, s.u_1);
    const double u1y = copula_h(pair.c_y1.family, pair.c_y1.theta, s.u_1, s.u_y);
    const double u2y = copula_h(pair.c_y2.family, pair.c_y2.theta, s.u_2, s.u_y);
    terms.push_back(l1 + gauss_cond_log_density(theta_eval(tp, s.u_y), u1y, u2y));
  }
  return pairwise_sum(terms) / static_cast<double>(batch.size());
}

double bound_B2_value(std::span<const CopulaSample> batch, const FittedPair& pair,
                      const ThetaNet& net, const InferenceNet& inf, int A, RngStream& rng) {
  if (A < 1) throw std::invalid_argument("bound_B2_value: A >= 1 required");
  const std::span<const double> tp(net.p.data(), net.p.size());
  std::vector<double> logw(static_cast<std::size_t>(A));
  std::vector<double> terms;
  terms.reserve(batch.size());
  for (const CopulaSample& s : batch) {
    const auto ab = inference_eval(inf, s.u_1, s.u_2);
    for (int a = 0; a < A; ++a) {
      const double uhat = r_sample(ab.a, ab.b, rng.uniform());
      logw[static_cast<std::size_t>(a)] = log_c_theta(pair, tp, uhat, s.u_1, s.u_2) -
                                          r_log_density(ab.a, ab.b, uhat);
    }
    const double mx = *std::max_element(logw.begin(), logw.end());
    double sum = 0.0;
    for (double lw : logw) sum += std::exp(lw - mx);
    terms.push_back(-(mx + std::log(sum) - std::log(static_cast<double>(A))));
  }
  return pairwise_sum(terms) / static_cast<double>(batch.size());
}

namespace {

struct InnerB2 {
  Var b2_std;     // -(logsumexp(logw) - log A); theta paths live
  Var dreg_root;  // -sum_a sg(wtilde^2) * logw with direct phi detached
  Var naive_root; // same as b2_std (phi fully live) - kept for clarity
};

// Builds the inner-sample block of B2 for one batch element. `u1`, `u2` are
// tape variables (u2 may carry the theta-dependent sample path).
InnerB2 build_b2(Tape& t, const FittedPair& pair, std::span<const Var> theta_leaves, Var u1,
                 Var u2, const InferenceOut<Var>& ab, std::span<const double> eps, int A) {
  const Var a_det = detach(ab.a);
  const Var b_det = detach(ab.b);
  std::vector<Var> logw_std(static_cast<std::size_t>(A));
  std::vector<Var> logw_dreg(static_cast<std::size_t>(A));
  for (int a = 0; a < A; ++a) {
    Var uhat = r_sample(ab.a, ab.b, eps[static_cast<std::size_t>(a)]);
    Var lc = log_c_theta(pair, theta_leaves, uhat, u1, u2);
    logw_std[a] = lc - r_log_density(ab.a, ab.b, uhat);
    logw_dreg[a] = lc - r_log_density(a_det, b_det, uhat);
  }
  double mx = val(logw_std[0]);
  for (int a = 1; a < A; ++a) mx = std::max(mx, val(logw_std[a]));
  Var sum = exp(logw_std[0] - mx);
  for (int a = 1; a < A; ++a) sum = sum + exp(logw_std[a] - mx);
  Var lse = log(sum) + mx;  // log sum_a w_a
  Var b2 = -(lse - std::log(static_cast<double>(A)));

  Var sur = like_const(b2, 0.0);
  for (int a = 0; a < A; ++a) {
    const double wt = std::exp(val(logw_std[a]) - val(lse));
    sur = sur + (-wt * wt) * logw_dreg[a];
  }
  return {b2, sur, b2};
}

struct GradAccum {
  // Per-batch-element gradient rows, reduced pairwise in fixed order.
  std::size_t n_theta, n_phi, m;
  std::vector<double> rows;  // m x (n_theta + n_phi)
  std::vector<double> bounds;

  GradAccum(std::size_t nt, std::size_t np, std::size_t m_)
      : n_theta(nt), n_phi(np), m(m_), rows(m_ * (nt + np), 0.0), bounds(m_, 0.0) {}

  double* row(std::size_t i) { return rows.data() + i * (n_theta + n_phi); }

  void reduce(std::vector<double>& g_theta, std::vector<double>& g_phi, double& bound) const {
    const std::size_t stride = n_theta + n_phi;
    std::vector<double> col(m);
    g_theta.assign(n_theta, 0.0);
    g_phi.assign(n_phi, 0.0);
    for (std::size_t j = 0; j < n_theta; ++j) {
      for (std::size_t i = 0; i < m; ++i) col[i] = rows[i * stride + j];
      g_theta[j] = pairwise_sum(col) / static_cast<double>(m);
    }
    for (std::size_t j = 0; j < n_phi; ++j) {
      for (std::size_t i = 0; i < m; ++i) col[i] = rows[i * stride + n_theta + j];
      g_phi[j] = pairwise_sum(col) / static_cast<double>(m);
    }
    bound = pairwise_sum(bounds) / static_cast<double>(m);
  }
};

}  // namespace

std::vector<double> dreg_phi_gradient(std::span<const CopulaSample> batch, const FittedPair& pair,
                                      const ThetaNet& net, const InferenceNet& inf, int A,
                                      RngStream& rng) {
  Tape t;
  std::vector<double> grad(InferenceNet::kParams, 0.0);
  std::vector<double> eps(static_cast<std::size_t>(A));
  for (const CopulaSample& s : batch) {
    for (double& e : eps) e = rng.uniform();
    t.clear();
    std::vector<Var> tl = lift_params(t, std::span<const double>(net.p.data(), net.p.size()));
    std::vector<Var> pl = lift_params(t, std::span<const double>(inf.p.data(), inf.p.size()));
    Var u1 = make_leaf(t, s.u_1);
    Var u2 = make_leaf(t, s.u_2);
    const auto ab = inference_eval(std::span<const Var>(pl.data(), pl.size()), u1, u2);
    InnerB2 inner = build_b2(t, pair, std::span<const Var>(tl.data(), tl.size()), u1, u2, ab,
                             eps, A);
    t.backward(inner.dreg_root.id);
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += t.adjoint(pl[j].id);
  }
  for (double& g : grad) g /= static_cast<double>(batch.size());
  return grad;
}

std::vector<double> naive_phi_gradient(std::span<const CopulaSample> batch,
                                       const FittedPair& pair, const ThetaNet& net,
                                       const InferenceNet& inf, int A, RngStream& rng) {
  Tape t;
  std::vector<double> grad(InferenceNet::kParams, 0.0);
  std::vector<double> eps(static_cast<std::size_t>(A));
  for (const CopulaSample& s : batch) {
    for (double& e : eps) e = rng.uniform();
    t.clear();
    std::vector<Var> tl = lift_params(t, std::span<const double>(net.p.data(), net.p.size()));
    std::vector<Var> pl = lift_params(t, std::span<const double>(inf.p.data(), inf.p.size()));
    Var u1 = make_leaf(t, s.u_1);
    Var u2 = make_leaf(t, s.u_2);
    const auto ab = inference_eval(std::span<const Var>(pl.data(), pl.size()), u1, u2);
    InnerB2 inner = build_b2(t, pair, std::span<const Var>(tl.data(), tl.size()), u1, u2, ab,
                             eps, A);
    t.backward(inner.naive_root.id);
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += t.adjoint(pl[j].id);
  }
  for (double& g : grad) g /= static_cast<double>(batch.size());
  return grad;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr, double beta1, double beta2, double eps) {
  if (params.size() != grads.size() || state.m.size() != params.size())
    throw std::invalid_argument("adam_step: size mismatch");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grads[i];
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

TrainResult train_unique_with_pair(const FittedPair& pair, const EstimatorConfig& config) {
  config.validate();
  const int m_count = config.batch_size;
  const int a_count = config.inner_samples;

  RngStream rng(config.seed);
  TrainResult res;
  res.pair = pair;
  res.theta_net = ThetaNet::random_init(rng);
  res.inf_net = InferenceNet::random_init(rng);

  AdamState theta_state(ThetaNet::kParams);
  AdamState phi_state(InferenceNet::kParams);
  std::vector<double> g_theta, g_phi;
  GradAccum accum(ThetaNet::kParams, InferenceNet::kParams,
                  static_cast<std::size_t>(m_count));
  std::vector<double> eps(static_cast<std::size_t>(a_count));
  Tape t;
  t.reserve(1 << 16);

  res.trace.bound.reserve(static_cast<std::size_t>(config.iterations));
  for (int iter = 0; iter < config.iterations; ++iter) {
    for (int m = 0; m < m_count; ++m) {
      const double v1 = rng.uniform();
      const double vy = rng.uniform();
      const double v2 = rng.uniform();
      for (double& e : eps) e = rng.uniform();

      t.clear();
      std::vector<Var> tl =
          lift_params(t, std::span<const double>(res.theta_net.p.data(), ThetaNet::kParams));
      std::vector<Var> pl =
          lift_params(t, std::span<const double>(res.inf_net.p.data(), InferenceNet::kParams));
      const std::span<const Var> tls(tl.data(), tl.size());

      // Sample path: u_y and u_1 do not depend on theta; u_2 does.
      const double u1d = clamp_unit(v1);
      const double uyd =
          copula_h_inverse(pair.c_y1.family, pair.c_y1.theta, clamp_unit(vy), u1d);
      const double u1yd = copula_h(pair.c_y1.family, pair.c_y1.theta, u1d, uyd);
      Var u1 = make_leaf(t, u1d);
      Var uy = make_leaf(t, uyd);
      Var u1y = make_leaf(t, u1yd);
      Var th = theta_eval(tls, uy);
      Var u2y = gauss_cond_h_inverse(th, make_leaf(t, clamp_unit(v2)), u1y);
      Var u2 = copula_h_inverse(pair.c_y2.family, pair.c_y2.theta, u2y, uy);

      const double b1_const =
          copula_log_density(pair.c_y1.family, pair.c_y1.theta, uyd, u1d);
      Var b1 = gauss_cond_log_density(th, u1y, u2y) + b1_const;

      const auto ab = inference_eval(std::span<const Var>(pl.data(), pl.size()), u1, u2);
      InnerB2 inner = build_b2(t, pair, tls, u1, u2, ab, eps, a_count);
      Var main_root = b1 + inner.b2_std;

      accum.bounds[static_cast<std::size_t>(m)] = val(main_root);
      double* row = accum.row(static_cast<std::size_t>(m));
      t.backward(main_root.id);
      for (int j = 0; j < ThetaNet::kParams; ++j) row[j] = t.adjoint(tl[j].id);
      t.backward(inner.dreg_root.id);
      for (int j = 0; j < InferenceNet::kParams; ++j)
        row[ThetaNet::kParams + j] = t.adjoint(pl[j].id);
    }

    double bound = 0.0;
    accum.reduce(g_theta, g_phi, bound);
    if (!std::isfinite(bound)) {
      std::ostringstream msg;
      msg << "train_unique: non-finite bound at iteration " << iter << "; last values:";
      const std::size_t nb = res.trace.bound.size();
      for (std::size_t i = nb > 5 ? nb - 5 : 0; i < nb; ++i) msg << ' ' << res.trace.bound[i];
      throw std::runtime_error(msg.str());
    }
    res.trace.bound.push_back(bound);

    adam_step(std::span<double>(res.theta_net.p.data(), ThetaNet::kParams), g_theta, theta_state,
              config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps);
    adam_step(std::span<double>(res.inf_net.p.data(), InferenceNet::kParams), g_phi, phi_state,
              config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps);
  }

  res.raw_estimate = res.trace.mean_last(config.averaging_window);
  res.u1 = std::max(0.0, res.raw_estimate);
  return res;
}

TrainResult train_unique(const PseudoDataset& pseudo, const EstimatorConfig& config) {
  config.validate();
  FittedPair pair;
  pair.c_y1 = select_copula(pseudo.u_y, pseudo.u_1);
  pair.c_y2 = select_copula(pseudo.u_y, pseudo.u_2);
  return train_unique_with_pair(pair, config);
}

}  // namespace unipid
