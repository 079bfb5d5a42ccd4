#include "tontine/mortality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tontine/errors.hpp"

namespace tontine {

namespace {

void require_ordered(double s, double t) {
  if (!(s <= t)) {
    std::ostringstream os;
    os << "cumulative hazard requires s <= t (got s=" << s << ", t=" << t << ")";
    throw ConfigError(os.str());
  }
}

}  // namespace

void validate(const GompertzMakehamParams& p) {
  if (!std::isfinite(p.m) || !std::isfinite(p.q) || !std::isfinite(p.v)) {
    throw ConfigError("mortality parameters must be finite");
  }
  if (!(p.q > 0.0)) throw ConfigError("mortality.q must be positive");
}

double hazard(const GompertzMakehamParams& p, double t) {
  return p.v + std::exp((t - p.m) / p.q) / p.q;
}

double cumulative_hazard(const GompertzMakehamParams& p, double s, double t) {
  require_ordered(s, t);
  // exp((t-m)/q) - exp((s-m)/q) written with expm1 to keep precision for short intervals.
  const double gompertz = std::exp((s - p.m) / p.q) * std::expm1((t - s) / p.q);
  return p.v * (t - s) + gompertz;
}

double survival(const GompertzMakehamParams& p, double s, double t) {
  return std::exp(-cumulative_hazard(p, s, t));
}

double validate_hazard_domain(const GompertzMakehamParams& p, double t_min) {
  if (p.v >= 0.0) return t_min;
  // hazard is strictly increasing; its unique zero solves exp((t-m)/q) = -v q.
  const double zero = p.m + p.q * std::log(-p.v * p.q);
  return std::max(t_min, zero);
}

double hazard(const ConstantHazard& h, double) { return h.rate; }

double cumulative_hazard(const ConstantHazard& h, double s, double t) {
  require_ordered(s, t);
  return h.rate * (t - s);
}

double survival(const ConstantHazard& h, double s, double t) {
  return std::exp(-cumulative_hazard(h, s, t));
}

double validate_hazard_domain(const ConstantHazard& h, double t_min) {
  if (h.rate >= 0.0) return t_min;
  return std::numeric_limits<double>::infinity();
}

double Hazard::rate(double t) const {
  return std::visit([t](const auto& c) { return hazard(c, t); }, curve_);
}

double Hazard::cumulative(double s, double t) const {
  return std::visit([s, t](const auto& c) { return cumulative_hazard(c, s, t); }, curve_);
}

double Hazard::survival(double s, double t) const { return std::exp(-cumulative(s, t)); }

double Hazard::nonnegative_from(double t_min) const {
  return std::visit([t_min](const auto& c) { return validate_hazard_domain(c, t_min); }, curve_);
}

void Hazard::require_nonnegative_from(double t) const {
  const double from = nonnegative_from(t);
  if (from > t) {
    std::ostringstream os;
    os << "hazard is negative at age " << t << "; it is nonnegative only from age " << from;
    throw DomainError(os.str());
  }
}

}  // namespace tontine
