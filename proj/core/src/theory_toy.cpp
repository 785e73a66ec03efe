#include "objgan/theory_toy.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace objgan::theory {

void GaussianToyParams::validate() const {
  if (!(sigma_d > 0.0) || !(sigma_g > 0.0)) throw std::invalid_argument("sigma_d and sigma_g must be positive");
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (!std::isfinite(mu_d) || !std::isfinite(mu_g)) throw std::invalid_argument("means must be finite");
}

GaussianToyParams GaussianToyParams::from_k(double mu_d, double k, double alpha, double eta) {
  if (!(k > 0.0)) throw std::invalid_argument("k must be positive");
  GaussianToyParams p;
  p.mu_d = mu_d;
  p.mu_g = mu_d;
  p.sigma_d = p.sigma_g = std::sqrt(k / 4.0);
  p.alpha = alpha;
  p.eta = eta;
  return p;
}

double jsd_closed_form(const GaussianToyParams& p) {
  if (!(p.sigma_d > 0.0) || !(p.sigma_g > 0.0)) throw std::invalid_argument("sigma_d and sigma_g must be positive");
  const double var_m = p.sigma_d * p.sigma_d + p.sigma_g * p.sigma_g;
  const double sigma_m = std::sqrt(var_m);
  const double mid = 0.5 * (p.mu_d + p.mu_g);
  const double data_dev = p.mu_d - mid;
  const double gen_dev = p.mu_g - mid;
  const double data_term = std::log(sigma_m / p.sigma_d) + (p.sigma_d * p.sigma_d + data_dev * data_dev) / (2.0 * var_m) - 0.5;
  const double gen_term = std::log(sigma_m / p.sigma_g) + (p.sigma_g * p.sigma_g + gen_dev * gen_dev) / (2.0 * var_m) - 0.5;
  return 0.5 * (data_term + gen_term);
}

double jsd_gradient_mu_g(const GaussianToyParams& p) {
  return (p.mu_g - p.mu_d) / (4.0 * p.sigma_g * p.sigma_g + 4.0 * p.sigma_d * p.sigma_d);
}

double generator_loss_gradient(const GaussianToyParams& p) {
  return (1.0 - p.alpha) * (p.mu_g - p.mu_d) / p.k() - p.alpha;
}

double fixed_point(const GaussianToyParams& p) {
  if (p.alpha >= 1.0) throw DivergentFixedPoint();
  return p.mu_d + p.alpha / (1.0 - p.alpha) * p.k();
}

FlowTrajectory simulate_flow(const GaussianToyParams& p, long steps, double tolerance, bool stop_at_convergence) {
  p.validate();
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (p.eta * p.d() >= 2.0) throw std::invalid_argument("unstable discretization: eta * d >= 2");

  FlowTrajectory traj;
  const bool finite_target = p.alpha < 1.0;
  traj.fixed_point_estimate = finite_target ? fixed_point(p) : std::numeric_limits<double>::infinity();

  GaussianToyParams state = p;
  traj.times.reserve(static_cast<std::size_t>(steps) + 1);
  traj.mu_g_values.reserve(static_cast<std::size_t>(steps) + 1);
  for (long t = 0; t <= steps; ++t) {
    traj.times.push_back(t);
    traj.mu_g_values.push_back(state.mu_g);
    if (finite_target && traj.steps_to_converge < 0 &&
        std::abs(state.mu_g - traj.fixed_point_estimate) < tolerance) {
      traj.steps_to_converge = t;
      if (stop_at_convergence) break;
    }
    if (t == steps) break;
    state.mu_g -= state.eta * generator_loss_gradient(state);
  }
  traj.converged = finite_target && std::abs(traj.mu_g_values.back() - traj.fixed_point_estimate) < tolerance;
  return traj;
}

PhasePortrait phase_portrait(const std::vector<double>& mu_g_grid, const std::vector<double>& alpha_grid,
                             const GaussianToyParams& p) {
  if (mu_g_grid.empty() || alpha_grid.empty()) throw std::invalid_argument("phase_portrait: empty grid");
  PhasePortrait portrait;
  portrait.field.reserve(mu_g_grid.size() * alpha_grid.size());
  for (double alpha : alpha_grid) {
    GaussianToyParams q = p;
    q.alpha = alpha;
    q.validate();
    for (double mu : mu_g_grid) {
      q.mu_g = mu;
      portrait.field.push_back({alpha, mu, -q.eta * generator_loss_gradient(q)});
    }
    portrait.fixed_point_curve.emplace_back(
        alpha, alpha < 1.0 ? fixed_point(q) : std::numeric_limits<double>::infinity());
  }
  return portrait;
}

namespace {

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_phase_csv(std::ostream& out, const PhasePortrait& portrait) {
  out << "kind,alpha,mu_g,velocity\n";
  for (const auto& s : portrait.field) {
    out << "field," << fmt(s.alpha) << ',' << fmt(s.mu_g) << ',' << fmt(s.velocity) << '\n';
  }
  for (const auto& [alpha, mu] : portrait.fixed_point_curve) {
    out << "fixed_point," << fmt(alpha) << ',' << fmt(mu) << ",0\n";
  }
}

PhasePortrait read_phase_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "kind,alpha,mu_g,velocity") {
    throw std::runtime_error("phase csv: unexpected header");
  }
  PhasePortrait portrait;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string kind, a, m, v;
    if (!std::getline(ss, kind, ',') || !std::getline(ss, a, ',') || !std::getline(ss, m, ',') ||
        !std::getline(ss, v, ',')) {
      throw std::runtime_error("phase csv: malformed row: " + line);
    }
    const double alpha = std::stod(a);
    const double mu = std::stod(m);
    if (kind == "field") {
      portrait.field.push_back({alpha, mu, std::stod(v)});
    } else if (kind == "fixed_point") {
      portrait.fixed_point_curve.emplace_back(alpha, mu);
    } else {
      throw std::runtime_error("phase csv: unknown row kind " + kind);
    }
  }
  return portrait;
}

void write_trajectory_csv(std::ostream& out, const FlowTrajectory& trajectory) {
  out << "step,mu_g\n";
  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    out << trajectory.times[i] << ',' << fmt(trajectory.mu_g_values[i]) << '\n';
  }
}

}  // namespace objgan::theory
