#pragma once

#include <functional>
#include <string_view>

namespace aclock::numerics {

using ScalarFn = std::function<double(double)>;

/// Default absolute tolerance for all quadratures in the library.
inline constexpr double kQuadratureTolerance = 1e-10;

/// Adaptive Gauss-Kronrod (61 point) over a finite interval. Throws
/// NumericalError, naming `what`, when the error estimate exceeds
/// `abs_tol * max(1, L1 norm)`.
double integrate(const ScalarFn& f, double a, double b,
                 double abs_tol = kQuadratureTolerance, std::string_view what = "integral");

/// Integral over the whole real line. The integrand is recentred and
/// rescaled to (center, scale) before the infinite-interval mapping so that
/// narrow or displaced peaks are resolved.
double integrate_line(const ScalarFn& f, double center, double scale,
                      double abs_tol = kQuadratureTolerance, std::string_view what = "integral");

} // namespace aclock::numerics
