#pragma once

#include <variant>

namespace tontine {

/// Gompertz-Makeham force of mortality: lambda(t) = v + exp((t - m) / q) / q.
struct GompertzMakehamParams {
  double m = 83.43;    ///< modal age (years)
  double q = 10.94;    ///< dispersion (years), must be positive
  double v = -0.0052;  ///< Makeham constant (per year)

  friend bool operator==(const GompertzMakehamParams&, const GompertzMakehamParams&) = default;
};

/// UK male fit used for the numerical examples.
inline constexpr GompertzMakehamParams kUkMale{83.43, 10.94, -0.0052};

/// Throws ConfigError unless q > 0 and all fields are finite.
void validate(const GompertzMakehamParams& params);

double hazard(const GompertzMakehamParams& params, double t);

/// Integral of the hazard over [s, t]. Throws ConfigError if s > t.
double cumulative_hazard(const GompertzMakehamParams& params, double s, double t);

/// Probability of surviving from age s to age t.
double survival(const GompertzMakehamParams& params, double s, double t);

/// First age >= t_min from which the hazard stays nonnegative.
double validate_hazard_domain(const GompertzMakehamParams& params, double t_min);

/// Age-independent hazard. Test double for analytic identities.
struct ConstantHazard {
  double rate = 0.0;
  friend bool operator==(const ConstantHazard&, const ConstantHazard&) = default;
};

double hazard(const ConstantHazard& h, double t);
double cumulative_hazard(const ConstantHazard& h, double s, double t);
double survival(const ConstantHazard& h, double s, double t);
double validate_hazard_domain(const ConstantHazard& h, double t_min);

/// Value-semantic handle over the supported hazard curves.
class Hazard {
 public:
  Hazard(GompertzMakehamParams p) : curve_(p) {}  // NOLINT: implicit by design of the API
  Hazard(ConstantHazard c) : curve_(c) {}         // NOLINT

  double rate(double t) const;
  double cumulative(double s, double t) const;
  double survival(double s, double t) const;
  /// Lowest age >= t_min from which rate() >= 0 for all later ages.
  double nonnegative_from(double t_min) const;

  /// Throws DomainError if the hazard is negative anywhere on [t, infinity).
  void require_nonnegative_from(double t) const;

 private:
  std::variant<GompertzMakehamParams, ConstantHazard> curve_;
};

}  // namespace tontine
