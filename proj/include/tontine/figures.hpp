#pragma once

#include <vector>

#include "tontine/annuity.hpp"
#include "tontine/mortality.hpp"
#include "tontine/params.hpp"
#include "tontine/strategy.hpp"
#include "tontine/table.hpp"

namespace tontine::figures {

/// Grids and parameters behind the six published charts.
struct FigureSpec {
  int id = 1;
  std::vector<double> mcbr_grid{0.01, 0.1, 1.0};
  std::vector<double> beta_grid{0.01, 0.02, 0.03, 0.04, 0.05};
  std::vector<double> b_grid{0.0, 1.0, 3.0, 10.0, 30.0, 60.0};
  std::vector<double> gamma_grid{0.8, 0.25, -0.08225, -10.0};
  AgeGrid ages{65.0, 105.0, 1.0};
  MarketParams market;
  GompertzMakehamParams mortality = kUkMale;
  double entry_age = 65.0;
  QuadratureSettings quadrature;
  /// Bequest-distribution chart: age, bequest parameter, risk exponents, density samples.
  double bequest_age = 95.0;
  double bequest_b = 3.0;
  std::vector<double> bequest_gammas{-0.08225, 0.8};
  int density_points = 200;
};

void validate(const FigureSpec& spec);

/// Bequest proportion 1 / (1 + (MCBR - beta) A(t, beta)) over age x MCBR x beta.
/// Cells failing the entry-age condition are null with a reason.
Table figure1(const FigureSpec& spec);

/// Bequest proportion, E[C], E[B] and E[I] over age x b x gamma.
Table figures2to5(const FigureSpec& spec);

/// Lognormal summary, quantiles and density of the present-valued bequest.
Table figure6(const FigureSpec& spec);

/// Dispatches on spec.id; ids 2-5 keep only that chart's quantity.
Table figure(const FigureSpec& spec);

}  // namespace tontine::figures
