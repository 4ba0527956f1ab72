#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "unipid/estimator.hpp"

namespace unipid {

// Full decomposition in nats. Reported terms are clamped at zero; the raw
// values (which obey the consistency identities exactly) are kept alongside.
struct PidReport {
  double u1 = 0.0, u2 = 0.0, r = 0.0, s = 0.0;
  double i_y_x1 = 0.0, i_y_x2 = 0.0, i_y_x12 = 0.0;
  double delta = 0.0;  // s - r

  double raw_u1 = 0.0, raw_r = 0.0, raw_u2 = 0.0, raw_s = 0.0;
  double raw_i_y_x1 = 0.0, raw_i_y_x2 = 0.0, raw_i_y_x12 = 0.0;

  struct Diagnostics {
    CopulaModel c_y1, c_y2, c_12;
    double bound_mean_last_w = 0.0;
    double bound_first = 0.0, bound_last = 0.0;
    int iterations = 0;
    std::uint64_t seed = 0;
  } diag;
};

/// Mutual information of one pair as the sample mean of the fitted copula
/// log-density (nats, clamped at zero; the raw mean is also returned).
double mi_pair(std::span<const double> u, std::span<const double> v, const CopulaModel& model);
double mi_pair_raw(std::span<const double> u, std::span<const double> v,
                   const CopulaModel& model);

struct MiJointResult {
  double value = 0.0;  // raw estimate, nats
  CopulaModel c_12;
  ThetaNet net;
};

/// I(Y : (X1, X2)) through the pair-copula construction: fits c(u1, u2) by
/// AIC selection and a fresh theta(u_y) network by maximum likelihood of the
/// conditional copula, then averages the log density ratio over the data.
MiJointResult mi_joint(const PseudoDataset& pseudo, const FittedPair& pair,
                       const EstimatorConfig& config);

/// End-to-end decomposition of raw data.
PidReport decompose(const Dataset& data, const EstimatorConfig& config);

struct ConsistencyResult {
  double u2_direct = 0.0;    // train_unique with the source roles swapped
  double u2_indirect = 0.0;  // from the consistency relations
  double gap = 0.0;
  PidReport report;
};

ConsistencyResult consistency_check(const Dataset& data, const EstimatorConfig& config);

}  // namespace unipid
