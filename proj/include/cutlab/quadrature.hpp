#pragma once

#include <functional>
#include <span>

namespace cutlab::quad {

using Integrand = std::function<double(double)>;

struct Result {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) on [a,b]; bisects the interval with
/// the largest error estimate until the total estimate is below
/// max(abs_tol, rel_tol * |value|). Optional interior breakpoints seed the
/// initial partition (useful for known kinks and jumps).
Result integrate(const Integrand& f, double a, double b, double rel_tol = 1e-10,
                 double abs_tol = 1e-300, std::span<const double> breakpoints = {});

/// Integrates h(u) over u in (0, 1] where h may have an integrable power-law
/// singularity at u = 0. The interval is cut geometrically into
/// [2^-(j+1), 2^-j]; each piece is integrated adaptively and the series is
/// truncated once the pieces decay, with a geometric tail correction.
/// Callers pass functions of the distance to the singular endpoint so that no
/// precision is lost forming 1 - x near x = 1.
Result integrate_singular_at_zero(const Integrand& h, double rel_tol = 1e-10,
                                  std::span<const double> breakpoints = {});

/// Plain integral over [0,1] when `singular` is false, else the geometric
/// scheme above.
Result integrate_unit(const Integrand& h, bool singular, double rel_tol = 1e-10,
                      std::span<const double> breakpoints = {});

}  // namespace cutlab::quad
