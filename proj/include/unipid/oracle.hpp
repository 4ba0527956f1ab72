#pragma once

#include <vector>

namespace unipid {

enum class ModelKind { M1, M2 };

/// Unique information of X1 about Y for a trivariate Gaussian with the given
/// correlations (nats): 0.5*log((1-rho2^2)/(1-rho1^2)) when rho2 < rho1, else 0.
/// With compare_absolute, the indicator compares |rho2| < |rho1| instead.
double gaussian_unique_exact(double rho_y1, double rho_y2, bool compare_absolute = false);

// Finite trivariate distribution p(y, x1, x2), flattened y-major.
struct DiscreteJoint {
  int ny = 0, n1 = 0, n2 = 0;
  std::vector<double> p;

  double& at(int y, int x1, int x2) { return p[(static_cast<std::size_t>(y) * n1 + x1) * n2 + x2]; }
  double at(int y, int x1, int x2) const {
    return p[(static_cast<std::size_t>(y) * n1 + x1) * n2 + x2];
  }
  /// Throws on negative entries or total mass off 1 by more than 1e-12.
  void validate() const;
};

struct DiscretePid {
  double u1 = 0.0, u2 = 0.0, r = 0.0, s = 0.0;
  double i_y_x1 = 0.0, i_y_x2 = 0.0, i_y_x12 = 0.0;  // plug-in MIs, nats
  int iterations = 0;
  double marginal_error = 0.0;  // max total-variation violation of the constraints
  double objective = 0.0;       // final I_q(Y:X1|X2), nats
};

/// Minimizes I_q(Y:X1|X2) over joints with both (y,x_i) marginals fixed, by
/// projected gradient descent with Dykstra projections onto the marginal
/// constraints and the non-negative orthant. Remaining terms follow from the
/// consistency relations with plug-in MIs.
DiscretePid discrete_broja(const DiscreteJoint& joint);

/// Discretizes model M1/M2: X-range [-8, 8] in n_x equal cells with Gaussian
/// cell masses (Gauss-Legendre quadrature), Y deterministic on cell midpoints
/// and binned into n_y equal-probability segments (maximum-entropy binning,
/// ties to the lower bin).
DiscreteJoint quantize_model(ModelKind kind, double w1, double w2, double rho12, int n_x,
                             int n_y);

double model_y(ModelKind kind, double w1, double w2, double x1, double x2);

}  // namespace unipid
