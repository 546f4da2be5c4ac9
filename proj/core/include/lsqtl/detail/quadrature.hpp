#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lsqtl/error.hpp"

namespace lsqtl {

template <class F>
double integrate_real_line(F&& fn, double tol) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double error = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      fn, -inf, inf, 25, tol, &error, &l1);
  if (!std::isfinite(value) || error > std::max(1e-8, 1e3 * tol) * std::max(1.0, l1)) {
    throw NumericalError("quadrature did not converge (error estimate " +
                         std::to_string(error) + ")");
  }
  return value;
}

}  // namespace lsqtl
