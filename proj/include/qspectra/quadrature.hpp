// Adaptive Gauss-Kronrod integration with an explicit failure signal.
#pragma once

#include <functional>

namespace qspectra {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Integrates f over [a,b] to relative tolerance rel_tol (absolute floor
/// abs_tol); throws QuadratureFailure when the estimate misses it.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                           double abs_tol = 0.0, unsigned max_depth = 18);

}  // namespace qspectra
