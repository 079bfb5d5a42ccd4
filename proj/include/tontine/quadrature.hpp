#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "tontine/errors.hpp"

namespace tontine::quadrature {

namespace detail {

template <class F>
double simpson_step(const F& f, double a, double fa, double b, double fb, double m, double fm,
                    double whole, double eps, int depth, std::size_t& evals) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  evals += 2;
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * eps, depth - 1, evals) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * eps, depth - 1, evals);
}

}  // namespace detail

struct Result {
  double value = 0.0;
  std::size_t evaluations = 0;
};

/// Adaptive Simpson with Richardson correction over [a, b].
///
/// The interval is first cut into panels no wider than `panel`, a coarse pass fixes the
/// absolute target max(rel_tol * |I|, abs_tol), and each panel is then refined recursively.
template <class F>
Result adaptive_simpson(const F& f, double a, double b, double rel_tol, double abs_tol,
                        double panel = 1.0, int max_depth = 40) {
  Result out;
  if (b <= a) return out;
  const auto panels = static_cast<std::size_t>(std::ceil((b - a) / panel));
  const double h = (b - a) / static_cast<double>(panels);

  double coarse = 0.0;
  double f_left = f(a);
  ++out.evaluations;
  for (std::size_t i = 0; i < panels; ++i) {
    const double x0 = a + h * static_cast<double>(i);
    const double x1 = (i + 1 == panels) ? b : x0 + h;
    const double fm = f(0.5 * (x0 + x1));
    const double fr = f(x1);
    out.evaluations += 2;
    coarse += (x1 - x0) / 6.0 * (f_left + 4.0 * fm + fr);
    f_left = fr;
  }
  const double target = std::max(rel_tol * std::abs(coarse), abs_tol);
  const double eps = target / static_cast<double>(panels);

  f_left = f(a);
  ++out.evaluations;
  for (std::size_t i = 0; i < panels; ++i) {
    const double x0 = a + h * static_cast<double>(i);
    const double x1 = (i + 1 == panels) ? b : x0 + h;
    const double xm = 0.5 * (x0 + x1);
    const double fm = f(xm);
    const double fr = f(x1);
    out.evaluations += 2;
    const double whole = (x1 - x0) / 6.0 * (f_left + 4.0 * fm + fr);
    out.value += detail::simpson_step(f, x0, f_left, x1, fr, xm, fm, whole, eps, max_depth,
                                      out.evaluations);
    f_left = fr;
  }
  if (!std::isfinite(out.value)) throw NumericalFailure("adaptive Simpson produced a non-finite value");
  return out;
}

}  // namespace tontine::quadrature
