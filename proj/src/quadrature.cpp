#include "qspectra/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "qspectra/errors.hpp"

namespace qspectra {

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                           double abs_tol, unsigned max_depth) {
  QuadratureResult r;
  if (a == b) return r;
  double l1 = 0.0;
  r.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, rel_tol,
                                                                          &r.error_estimate, &l1);
  if (!std::isfinite(r.value)) throw QuadratureFailure("non-finite integral");
  if (r.error_estimate > std::max(rel_tol * std::max(std::abs(r.value), l1 * 1e-3), abs_tol) * 10.0) {
    throw QuadratureFailure("adaptive quadrature missed its tolerance");
  }
  return r;
}

}  // namespace qspectra
