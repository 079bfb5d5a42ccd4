#pragma once

namespace tontine {

/// Capital market and time preference, all rates per year.
struct MarketParams {
  double r = 0.02;      ///< risk-free rate
  double mu = 0.05;     ///< risky drift
  double sigma = 0.2;   ///< risky volatility
  double rho = 0.02;    ///< subjective discount rate

  friend bool operator==(const MarketParams&, const MarketParams&) = default;
};

/// Throws ConfigError unless sigma > 0 and mu >= r.
void validate(const MarketParams& market);

/// CRRA preferences U(x) = x^gamma / gamma with bequest weight b.
///
/// gamma == 0 is only reachable through logarithmic(), which selects the
/// U(x) = ln x branch explicitly.
class PreferenceParams {
 public:
  static PreferenceParams power(double gamma, double b);
  static PreferenceParams logarithmic(double b);

  /// Risk exponent; 0 on the logarithmic branch.
  double gamma() const noexcept { return gamma_; }
  double b() const noexcept { return b_; }
  bool log_utility() const noexcept { return log_; }
  double relative_risk_aversion() const noexcept { return 1.0 - gamma_; }

  friend bool operator==(const PreferenceParams&, const PreferenceParams&) = default;

 private:
  PreferenceParams(double gamma, double b, bool log) : gamma_(gamma), b_(b), log_(log) {}
  double gamma_;
  double b_;
  bool log_;
};

}  // namespace tontine
