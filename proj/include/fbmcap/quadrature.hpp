#pragma once

#include <functional>

namespace fbmcap {

struct QuadResult {
  double value = 0.0;
  double est_error = 0.0;
  long evaluations = 0;
  bool converged = true;  // false when the budget ran out before tol
};

/// Closed form of the square double integral with a diagonal gap,
///   int int_{[a,a+1]^2, |shat-s| > x} |shat-s|^{-1} ds dshat
///     = 2 log(1/x) - 2(1-x),   0 < x < 1, any a.
double closed_form_log(double x);

/// Same region with the power integrand |shat-s|^{-hd}, hd > 1:
///   2(hd-1)^{-1} x^{-(hd-1)} + 2(2-hd)^{-1} x^{-(hd-2)} + 2/((1-hd)(2-hd)).
/// hd within 1e-9 of 2 is rejected: both trailing terms blow up individually
/// (the singularity is removable); use the quadrature oracle there.
double closed_form_power(double x, double hd);

enum class GapRelation { none, greater, less };

/// Adaptive 2-D quadrature of f(s, shat) over [a, a+1]^2 restricted to
/// |shat - s| > x (greater), < x (less), or the full square (none). Nested
/// adaptive Gauss-Kronrod with exact region bounds; absolute error target
/// tol. When the evaluation budget runs out, the result is flagged rather
/// than silently wrong.
QuadResult quad_region(const std::function<double(double, double)>& f,
                       double a, GapRelation rel, double x, double tol,
                       long max_evals = 2000000);

/// Exact 1-D reduction for integrands depending only on u = |shat - s|:
/// the gap integral equals 2 int (1-u) g(u) du over [x, 1] (greater) or
/// (0, x] (less).
QuadResult quad_gap_radial(const std::function<double(double)>& g,
                           GapRelation rel, double x, double tol,
                           long max_evals = 200000);

}  // namespace fbmcap
