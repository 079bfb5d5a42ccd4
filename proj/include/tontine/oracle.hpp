#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "tontine/annuity.hpp"
#include "tontine/scenario.hpp"
#include "tontine/strategy.hpp"

namespace tontine::oracle {

enum class OdeMethod { RungeKutta4 };

/// Fixed-step integration window for the ODE oracles.
struct OdeSettings {
  double step = 1.0 / 256.0;
  OdeMethod method = OdeMethod::RungeKutta4;
  double start_age = 65.0;
  double end_age = 105.0;
};

void validate(const OdeSettings& settings);

/// Values on the fixed integration grid.
struct Trajectory {
  Eigen::ArrayXd age;
  Eigen::ArrayXd value;

  /// Value at a grid age (nearest node).
  double at(double t) const;
};

/// Integrates d ln c / dt = c (1 + k lambda) - lambda - beta forward from c(s) = 1 / m(s).
/// Throws NumericalFailure if c leaves (0, inf).
Trajectory integrate_consumption_ode(const ScenarioConfig& scenario, const OdeSettings& settings);

/// Same, starting from an explicit initial consumption rate.
Trajectory integrate_consumption_ode(const ScenarioConfig& scenario, const OdeSettings& settings,
                                     double initial_rate);

/// Largest |c_ode / c_closed - 1| over the given ages (each must be a grid node).
double max_relative_deviation(const Trajectory& ode, const ScenarioConfig& scenario,
                              const Eigen::ArrayXd& ages);

enum class Divergence { NegativeDenominator, BequestLimitViolated, Inconclusive };

std::string_view to_string(Divergence d);

struct DivergenceReport {
  Divergence kind = Divergence::Inconclusive;
  /// Age at which the violation was detected (end age when inconclusive).
  double age = 0.0;
  /// Largest |c / c* - 1| seen at whole-year ages before detection.
  double max_relative_deviation = 0.0;
};

/// Starts the consumption ODE from 1 / (m(s) + epsilon) and classifies how the
/// trajectory leaves the closed form: c blowing up (the price denominator crosses zero)
/// or c collapsing relative to c* (the terminal bequest condition fails).
DivergenceReport boundary_divergence_demo(const ScenarioConfig& scenario, double epsilon,
                                          const OdeSettings& settings);

/// Controls plugged into the HJB bracket.
struct Controls {
  double c = 0.0;
  double alpha = 0.0;
  double w = 0.0;
};

enum class TimeDerivative { Analytic, FiniteDifference };

/// Trial value function V = c*^(gamma-1) x^gamma / gamma and its partial derivatives.
struct ValueTerms {
  double v = 0.0;
  double v_t = 0.0;
  double v_x = 0.0;
  double v_xx = 0.0;
  Controls optimal;
};

/// Evaluates V and the optimal controls implied by `law`. Power utility only.
ValueTerms value_terms(const ScenarioConfig& scenario, const ControlLaw& law, double t, double x,
                       TimeDerivative mode = TimeDerivative::Analytic);

/// The maximand on the right-hand side of the HJB equation at the given controls;
/// -infinity when c <= 0, or alpha >= 1 with a bequest motive.
double hjb_bracket(const ScenarioConfig& scenario, const ValueTerms& value, double t, double x,
                   const Controls& controls);

/// (lambda + rho) V - bracket(optimal controls), using the scenario's own control law.
double hjb_residual(const ScenarioConfig& scenario, double t, double x,
                    TimeDerivative mode = TimeDerivative::Analytic);

/// Residual with an explicitly supplied control law (fault injection, comparisons).
double hjb_residual(const ScenarioConfig& scenario, const ControlLaw& law, double t, double x,
                    TimeDerivative mode = TimeDerivative::Analytic);

/// Pure decumulation with log utility: 1 / (b + (1 - b rho) A(t, rho)).
double decumulation_log(const Hazard& hazard, double t, double b, double rho,
                        const QuadratureSettings& settings = {});

/// Pure decumulation without bequest: 1 / int_t^inf exp(-int [lambda/(1-gamma) + beta]) du.
double decumulation_no_bequest(const Hazard& hazard, double t, double gamma, double beta,
                               const QuadratureSettings& settings = {});

/// Integrates d ln c / dt = c + b lambda c^(1-gamma) / (1-gamma) - psi(t),
/// psi = lambda + beta + gamma lambda / (1 - gamma), from `initial_rate`.
Trajectory integrate_decumulation_ode(const Hazard& hazard, double gamma, double beta, double b,
                                      double initial_rate, const OdeSettings& settings);

/// Annuity factor by 20-point Gauss-Legendre on unit panels; independent of the
/// adaptive Simpson route.
double annuity_factor_gauss_legendre(const Hazard& hazard, double t, double beta,
                                     const QuadratureSettings& settings = {});

struct CheckResult {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

struct VerifyOptions {
  /// Flip the sign of the risk-premium term in beta before the HJB check (test mode).
  bool inject_beta_sign_fault = false;
};

/// Runs every closed-form cross-check for `base` and a fixed set of regime scenarios.
VerificationReport run_verification(const ScenarioConfig& base, const VerifyOptions& options = {});

}  // namespace tontine::oracle
