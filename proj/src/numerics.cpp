#include "aclock/numerics.hpp"

#include "aclock/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <sstream>

namespace aclock::numerics {

namespace {

using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;
constexpr unsigned kMaxDepth = 18;

double checked(double value, double error, double l1, double abs_tol, std::string_view what,
               double a, double b) {
  if (!std::isfinite(value) || error > abs_tol * std::max(1.0, l1)) {
    std::ostringstream msg;
    msg << "quadrature did not converge for " << what << " on [" << a << ", " << b
        << "]: value=" << value << " error_estimate=" << error << " L1=" << l1
        << " tolerance=" << abs_tol;
    throw NumericalError(msg.str());
  }
  return value;
}

} // namespace

double integrate(const ScalarFn& f, double a, double b, double abs_tol, std::string_view what) {
  if (!(a < b)) {
    if (a == b) {
      return 0.0;
    }
    throw InputError("integrate: lower limit above upper limit");
  }
  double error = 0.0;
  double l1 = 0.0;
  const double value = Rule::integrate(f, a, b, kMaxDepth, abs_tol, &error, &l1);
  return checked(value, error, l1, abs_tol, what, a, b);
}

double integrate_line(const ScalarFn& f, double center, double scale, double abs_tol,
                      std::string_view what) {
  if (!(scale > 0.0) || !std::isfinite(center)) {
    throw InputError("integrate_line: scale must be positive and centre finite");
  }
  const auto g = [&](double u) { return f(center + scale * u) * scale; };
  const double inf = std::numeric_limits<double>::infinity();
  double error = 0.0;
  double l1 = 0.0;
  const double value = Rule::integrate(g, -inf, inf, kMaxDepth, abs_tol, &error, &l1);
  return checked(value, error, l1, abs_tol, what, -inf, inf);
}

} // namespace aclock::numerics
