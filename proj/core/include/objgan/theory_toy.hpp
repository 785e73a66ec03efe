#pragma once

// One-dimensional Gaussian model of objective-augmented GAN training.
//
// Legitimate data ~ N(mu_d, sigma_d), generated data ~ N(mu_g, sigma_g), generator
// loss (1 - alpha)(2 JSD - log 4) - alpha mu_g. Under gradient flow the generated
// mean obeys the linear system d mu_g / dt = -eta d (mu_g - mu_d) + eta alpha with
// d = (1 - alpha) / k and k = 2 (sigma_g^2 + sigma_d^2); its stable fixed point is
// mu_d + alpha / (1 - alpha) k.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace objgan::theory {

struct GaussianToyParams {
  double mu_d = 0.0;
  double sigma_d = 1.0;
  double mu_g = 0.0;
  double sigma_g = 1.0;
  double alpha = 0.0;
  double eta = 0.05;

  void validate() const;  // sigma_d, sigma_g > 0; eta > 0; 0 <= alpha <= 1
  double k() const { return 2.0 * (sigma_g * sigma_g + sigma_d * sigma_d); }
  double d() const { return (1.0 - alpha) / k(); }

  /// Equal variances with sigma_d^2 + sigma_g^2 = k / 2.
  static GaussianToyParams from_k(double mu_d, double k, double alpha, double eta = 0.05);
};

/// Thrown by fixed_point when alpha = 1 and the fixed point lies at infinity.
class DivergentFixedPoint : public std::domain_error {
 public:
  DivergentFixedPoint() : std::domain_error("alpha = 1: the fixed point is at infinity") {}
};

/// The closed-form divergence expression with sigma_m^2 = sigma_d^2 + sigma_g^2,
/// taken as written (it models the mixture by a single Gaussian).
double jsd_closed_form(const GaussianToyParams& p);

/// (mu_g - mu_d) / (4 sigma_g^2 + 4 sigma_d^2)
double jsd_gradient_mu_g(const GaussianToyParams& p);

/// (1 - alpha)(mu_g - mu_d) / k - alpha
double generator_loss_gradient(const GaussianToyParams& p);

/// mu_d + alpha / (1 - alpha) * k. Requires alpha < 1.
double fixed_point(const GaussianToyParams& p);

struct FlowTrajectory {
  std::vector<long> times;
  std::vector<double> mu_g_values;
  bool converged = false;
  double fixed_point_estimate = 0.0;
  long steps_to_converge = -1;  // first step index within tolerance, -1 if never
};

/// Explicit Euler on the gradient flow starting from p.mu_g. Records every
/// iterate (index 0 is the start). Stops early once within tolerance of the
/// fixed point when `stop_at_convergence` is set.
FlowTrajectory simulate_flow(const GaussianToyParams& p, long steps, double tolerance,
                             bool stop_at_convergence = false);

struct PhaseSample {
  double alpha;
  double mu_g;
  double velocity;  // d mu_g / dt = -eta * generator_loss_gradient
};

struct PhasePortrait {
  std::vector<PhaseSample> field;
  std::vector<std::pair<double, double>> fixed_point_curve;  // (alpha, mu_g*), +inf at alpha = 1
};

PhasePortrait phase_portrait(const std::vector<double>& mu_g_grid, const std::vector<double>& alpha_grid,
                             const GaussianToyParams& p);

/// Comma-separated text with header "kind,alpha,mu_g,velocity". Field rows
/// have kind "field"; fixed-point curve rows have kind "fixed_point" and zero
/// velocity. Values are written with round-trip precision.
void write_phase_csv(std::ostream& out, const PhasePortrait& portrait);
PhasePortrait read_phase_csv(std::istream& in);

/// Header "step,mu_g".
void write_trajectory_csv(std::ostream& out, const FlowTrajectory& trajectory);

}  // namespace objgan::theory
