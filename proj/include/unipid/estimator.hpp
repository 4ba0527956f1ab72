#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "unipid/copula.hpp"
#include "unipid/nets.hpp"
#include "unipid/pseudoobs.hpp"

namespace unipid {

// Optimization hyperparameters. Defaults: A = 50 inner samples, fixed
// learning rate 1e-2 for 1200 iterations, estimate = mean of the bound over
// the last 100 iterations.
struct EstimatorConfig {
  int inner_samples = 50;  // A
  int batch_size = 128;    // M
  int iterations = 1200;
  double learning_rate = 1e-2;
  int averaging_window = 100;  // W
  std::uint64_t seed = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

// The two data copulas c(u_y, u_1) and c(u_y, u_2), fitted on the same
// pseudo-observations. Immutable after fitting.
struct FittedPair {
  CopulaModel c_y1;
  CopulaModel c_y2;
};

struct TrainingTrace {
  std::vector<double> bound;  // nats, one value per iteration
  double mean_last(int w) const;
};

struct CopulaSample {
  double u_1, u_y, u_2;
};

/// Inverse-Rosenblatt map from three independent uniforms to a sample of the
/// parametrized trivariate copula. Only u_2 depends on the theta network.
CopulaSample rosenblatt_sample(const FittedPair& pair, const ThetaNet& net, double v1, double vy,
                               double v2);

/// log c_theta(u_y, u_1, u_2): pair densities times the learned conditional
/// Gaussian copula evaluated at the conditioned coordinates.
template <class S>
S log_c_theta(const FittedPair& pair, std::span<const S> theta_params, S uy, S u1, S u2) {
  S l1 = copula_log_density(pair.c_y1.family, pair.c_y1.theta, uy, u1);
  S l2 = copula_log_density(pair.c_y2.family, pair.c_y2.theta, uy, u2);
  S u1y = copula_h(pair.c_y1.family, pair.c_y1.theta, u1, uy);
  S u2y = copula_h(pair.c_y2.family, pair.c_y2.theta, u2, uy);
  S th = theta_eval(theta_params, uy);
  return l1 + l2 + gauss_cond_log_density(th, u1y, u2y);
}

/// Monte Carlo estimate of B1 over a batch of c_theta samples (nats).
double bound_B1_value(std::span<const CopulaSample> batch, const FittedPair& pair,
                      const ThetaNet& net);

/// Monte Carlo estimate of B2 = -E D_A over a batch (nats). Inner samples are
/// drawn from rng (A per batch element).
double bound_B2_value(std::span<const CopulaSample> batch, const FittedPair& pair,
                      const ThetaNet& net, const InferenceNet& inf, int A, RngStream& rng);

/// Doubly-reparametrized gradient of B2 w.r.t. the inference parameters:
/// normalized importance weights are treated as constants and the gradient
/// flows only through the sample path.
std::vector<double> dreg_phi_gradient(std::span<const CopulaSample> batch, const FittedPair& pair,
                                      const ThetaNet& net, const InferenceNet& inf, int A,
                                      RngStream& rng);

/// Plain pathwise gradient of B2 w.r.t. phi (high variance for large A);
/// kept for variance comparisons.
std::vector<double> naive_phi_gradient(std::span<const CopulaSample> batch,
                                       const FittedPair& pair, const ThetaNet& net,
                                       const InferenceNet& inf, int A, RngStream& rng);

struct AdamState {
  std::vector<double> m, v;
  long t = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr, double beta1, double beta2, double eps);

struct TrainResult {
  double u1 = 0.0;            // clamped at >= 0, nats
  double raw_estimate = 0.0;  // mean of the bound over the last W iterations
  TrainingTrace trace;
  FittedPair pair;
  ThetaNet theta_net;
  InferenceNet inf_net;
};

/// Full estimation: fit the pair copulas by AIC selection, then minimize
/// B1 + B2 over (theta, phi) with ADAM. Deterministic given the seed.
TrainResult train_unique(const PseudoDataset& pseudo, const EstimatorConfig& config);

/// Same optimization for an externally supplied pair of copulas.
TrainResult train_unique_with_pair(const FittedPair& pair, const EstimatorConfig& config);

/// Fixed-order pairwise summation (bitwise independent of threading).
double pairwise_sum(std::span<const double> x);

}  // namespace unipid
