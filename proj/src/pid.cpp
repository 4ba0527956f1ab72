#include "unipid/pid.hpp"

#include <algorithm>
#include <cmath>

namespace unipid {

double mi_pair_raw(std::span<const double> u, std::span<const double> v,
                   const CopulaModel& model) {
  if (u.size() != v.size() || u.empty()) throw std::invalid_argument("mi_pair: bad input");
  std::vector<double> terms(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    terms[i] = copula_log_density(model.family, model.theta, u[i], v[i]);
  return pairwise_sum(terms) / static_cast<double>(u.size());
}

double mi_pair(std::span<const double> u, std::span<const double> v, const CopulaModel& model) {
  return std::max(0.0, mi_pair_raw(u, v, model));
}

MiJointResult mi_joint(const PseudoDataset& pseudo, const FittedPair& pair,
                       const EstimatorConfig& config) {
  config.validate();
  const std::size_t d = pseudo.size();
  MiJointResult out;
  out.c_12 = select_copula(pseudo.u_1, pseudo.u_2);

  // Conditioned coordinates are fixed by the fitted pair copulas.
  std::vector<double> u1y(d), u2y(d);
  for (std::size_t i = 0; i < d; ++i) {
    u1y[i] = copula_h(pair.c_y1.family, pair.c_y1.theta, pseudo.u_1[i], pseudo.u_y[i]);
    u2y[i] = copula_h(pair.c_y2.family, pair.c_y2.theta, pseudo.u_2[i], pseudo.u_y[i]);
  }

  // Maximum-likelihood fit of theta(u_y) on the conditional copula term,
  // minibatch ADAM with the same optimizer settings as the bound.
  RngStream rng(RngStream(config.seed).derive(0x6d69ull).seed());
  out.net = ThetaNet::random_init(rng);
  AdamState state(ThetaNet::kParams);
  std::vector<double> grad(ThetaNet::kParams);
  Tape t;
  t.reserve(1 << 15);
  const int m_count = std::min<int>(config.batch_size, static_cast<int>(d));
  for (int iter = 0; iter < config.iterations; ++iter) {
    t.clear();
    std::vector<Var> tl =
        lift_params(t, std::span<const double>(out.net.p.data(), ThetaNet::kParams));
    const std::span<const Var> tls(tl.data(), tl.size());
    Var acc = make_leaf(t, 0.0);
    for (int m = 0; m < m_count; ++m) {
      const std::size_t i =
          std::min<std::size_t>(d - 1, static_cast<std::size_t>(rng.uniform() * d));
      Var th = theta_eval(tls, make_leaf(t, pseudo.u_y[i]));
      acc = acc + gauss_cond_log_density(th, make_leaf(t, u1y[i]), make_leaf(t, u2y[i]));
    }
    Var loss = acc * (-1.0 / m_count);
    t.backward(loss.id);
    for (int j = 0; j < ThetaNet::kParams; ++j) grad[j] = t.adjoint(tl[j].id);
    adam_step(std::span<double>(out.net.p.data(), ThetaNet::kParams), grad, state,
              config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps);
  }

  const std::span<const double> tp(out.net.p.data(), ThetaNet::kParams);
  std::vector<double> terms(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double lc1 =
        copula_log_density(pair.c_y1.family, pair.c_y1.theta, pseudo.u_y[i], pseudo.u_1[i]);
    const double lc2 =
        copula_log_density(pair.c_y2.family, pair.c_y2.theta, pseudo.u_y[i], pseudo.u_2[i]);
    const double lcc = gauss_cond_log_density(theta_eval(tp, pseudo.u_y[i]), u1y[i], u2y[i]);
    const double l12 =
        copula_log_density(out.c_12.family, out.c_12.theta, pseudo.u_1[i], pseudo.u_2[i]);
    terms[i] = lc1 + lc2 + lcc - l12;
  }
  out.value = pairwise_sum(terms) / static_cast<double>(d);
  return out;
}

PidReport decompose(const Dataset& data, const EstimatorConfig& config) {
  data.validate();
  const PseudoDataset pseudo = pseudo_observations(data);
  const TrainResult train = train_unique(pseudo, config);

  PidReport rep;
  rep.raw_i_y_x1 = mi_pair_raw(pseudo.u_y, pseudo.u_1, train.pair.c_y1);
  rep.raw_i_y_x2 = mi_pair_raw(pseudo.u_y, pseudo.u_2, train.pair.c_y2);
  const MiJointResult mj = mi_joint(pseudo, train.pair, config);
  rep.raw_i_y_x12 = mj.value;
  rep.i_y_x1 = std::max(0.0, rep.raw_i_y_x1);
  rep.i_y_x2 = std::max(0.0, rep.raw_i_y_x2);
  rep.i_y_x12 = std::max(0.0, rep.raw_i_y_x12);

  rep.raw_u1 = train.raw_estimate;
  rep.u1 = train.u1;
  rep.raw_r = rep.i_y_x1 - rep.u1;
  rep.r = std::max(0.0, rep.raw_r);
  rep.raw_u2 = rep.i_y_x2 - rep.r;
  rep.u2 = std::max(0.0, rep.raw_u2);
  rep.raw_s = rep.i_y_x12 - rep.u1 - rep.u2 - rep.r;
  rep.s = std::max(0.0, rep.raw_s);
  rep.delta = rep.s - rep.r;

  rep.diag.c_y1 = train.pair.c_y1;
  rep.diag.c_y2 = train.pair.c_y2;
  rep.diag.c_12 = mj.c_12;
  rep.diag.bound_mean_last_w = train.raw_estimate;
  rep.diag.bound_first = train.trace.bound.front();
  rep.diag.bound_last = train.trace.bound.back();
  rep.diag.iterations = static_cast<int>(train.trace.bound.size());
  rep.diag.seed = config.seed;
  return rep;
}

ConsistencyResult consistency_check(const Dataset& data, const EstimatorConfig& config) {
  ConsistencyResult res;
  res.report = decompose(data, config);
  res.u2_indirect = res.report.u2;

  Dataset swapped;
  swapped.y = data.y;
  swapped.x1 = data.x2;
  swapped.x2 = data.x1;
  EstimatorConfig direct_cfg = config;
  direct_cfg.seed = RngStream(config.seed).derive(0x7332ull).seed();
  const PseudoDataset pseudo = pseudo_observations(swapped);
  res.u2_direct = train_unique(pseudo, direct_cfg).u1;
  res.gap = res.u2_direct - res.u2_indirect;
  return res;
}

}  // namespace unipid
