#pragma once

#include <functional>

#include "tontine/mortality.hpp"
#include "tontine/params.hpp"

namespace tontine {

/// Truncation and tolerance for the infinite-horizon annuity integrals.
struct QuadratureSettings {
  double max_age = 130.0;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;

  friend bool operator==(const QuadratureSettings&, const QuadratureSettings&) = default;
};

void validate(const QuadratureSettings& settings);

/// Age-indexed parameter curve.
using AgeCurve = std::function<double(double)>;

/// Fair price at age t of a unit-rate life annuity discounted at beta:
/// A(t, beta) = int_t^inf exp(-int_t^u [lambda(y) + beta] dy) du.
///
/// The inner integral is the analytic cumulative hazard; the outer one is adaptive
/// Simpson truncated at settings.max_age. Throws DomainError if the hazard is negative
/// on [t, max_age] and NumericalFailure if the integrand at max_age exceeds abs_tol.
double annuity_factor(const Hazard& hazard, double t, double beta,
                      const QuadratureSettings& settings = {});

/// Same integral with the hazard scaled by `hazard_scale` inside the exponent.
double annuity_factor_scaled(const Hazard& hazard, double t, double beta, double hazard_scale,
                             const QuadratureSettings& settings = {});

/// Price m(t) = k + (1 - beta k) A(t, beta), k = b^(1/(1-gamma)) (k = b for log utility).
double m_price(const Hazard& hazard, double t, double beta, const PreferenceParams& prefs,
               const QuadratureSettings& settings = {});

/// Annuity factor with an age-varying discount rate beta(y).
double annuity_factor_tv(const Hazard& hazard, double t, const AgeCurve& beta,
                         const QuadratureSettings& settings = {});

/// int_t^inf weight(u) exp(-int_t^u [lambda(y) + beta(y)] dy) du.
double discounted_integral_tv(const Hazard& hazard, double t, const AgeCurve& beta,
                              const AgeCurve& weight, const QuadratureSettings& settings = {});

}  // namespace tontine
