#include "tontine/annuity.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <sstream>
#include <vector>

#include "tontine/errors.hpp"
#include "tontine/quadrature.hpp"
#include "tontine/strategy.hpp"

namespace tontine {

namespace {

void check_range(const Hazard& hazard, double t, const QuadratureSettings& s) {
  if (!std::isfinite(t) || !(t < s.max_age)) {
    std::ostringstream os;
    os << "annuity age " << t << " must be below the truncation age " << s.max_age;
    throw ConfigError(os.str());
  }
  hazard.require_nonnegative_from(t);
}

void check_tail(double integrand_at_max, double t, const QuadratureSettings& s) {
  if (!(integrand_at_max <= s.abs_tol)) {
    std::ostringstream os;
    os << "annuity integrand from age " << t << " is " << integrand_at_max << " at max_age "
       << s.max_age << " (> abs_tol " << s.abs_tol << "); raise quadrature.max_age";
    throw NumericalFailure(os.str());
  }
}

/// Running integral of a curve from a fixed origin, via 10-point Gauss-Legendre on unit panels.
class CurveIntegral {
 public:
  CurveIntegral(const AgeCurve& curve, double origin, double end)
      : curve_(curve), origin_(origin) {
    const auto n = static_cast<std::size_t>(std::ceil(end - origin)) + 1;
    prefix_.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = origin + static_cast<double>(i);
      prefix_[i + 1] = prefix_[i] + panel(a, a + 1.0);
    }
  }

  double operator()(double u) const {
    const double offset = u - origin_;
    auto whole = static_cast<std::size_t>(std::floor(offset));
    if (whole >= prefix_.size()) whole = prefix_.size() - 1;
    const double a = origin_ + static_cast<double>(whole);
    return prefix_[whole] + (u > a ? panel(a, u) : 0.0);
  }

 private:
  double panel(double a, double b) const {
    return boost::math::quadrature::gauss<double, 10>::integrate(curve_, a, b);
  }

  const AgeCurve& curve_;
  double origin_;
  std::vector<double> prefix_;
};

}  // namespace

void validate(const QuadratureSettings& s) {
  if (!std::isfinite(s.max_age)) throw ConfigError("quadrature.max_age must be finite");
  if (!(s.rel_tol > 0.0)) throw ConfigError("quadrature.rel_tol must be positive");
  if (!(s.abs_tol > 0.0)) throw ConfigError("quadrature.abs_tol must be positive");
}

double annuity_factor_scaled(const Hazard& hazard, double t, double beta, double hazard_scale,
                             const QuadratureSettings& settings) {
  check_range(hazard, t, settings);
  auto integrand = [&](double u) {
    return std::exp(-hazard_scale * hazard.cumulative(t, u) - beta * (u - t));
  };
  check_tail(integrand(settings.max_age), t, settings);
  return quadrature::adaptive_simpson(integrand, t, settings.max_age, settings.rel_tol,
                                      settings.abs_tol)
      .value;
}

double annuity_factor(const Hazard& hazard, double t, double beta,
                      const QuadratureSettings& settings) {
  return annuity_factor_scaled(hazard, t, beta, 1.0, settings);
}

double m_price(const Hazard& hazard, double t, double beta, const PreferenceParams& prefs,
               const QuadratureSettings& settings) {
  const double k = bequest_multiple(prefs);
  const double a = annuity_factor(hazard, t, beta, settings);
  return k + (1.0 - beta * k) * a;
}

double discounted_integral_tv(const Hazard& hazard, double t, const AgeCurve& beta,
                              const AgeCurve& weight, const QuadratureSettings& settings) {
  check_range(hazard, t, settings);
  const CurveIntegral beta_mass(beta, t, settings.max_age);
  auto discount = [&](double u) { return std::exp(-hazard.cumulative(t, u) - beta_mass(u)); };
  check_tail(discount(settings.max_age), t, settings);
  auto integrand = [&](double u) { return weight(u) * discount(u); };
  return quadrature::adaptive_simpson(integrand, t, settings.max_age, settings.rel_tol,
                                      settings.abs_tol)
      .value;
}

double annuity_factor_tv(const Hazard& hazard, double t, const AgeCurve& beta,
                         const QuadratureSettings& settings) {
  return discounted_integral_tv(hazard, t, beta, [](double) { return 1.0; }, settings);
}

}  // namespace tontine
