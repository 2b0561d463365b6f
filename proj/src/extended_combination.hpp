// Quad-precision evaluation of the psi-combination form of varphi.
//
// For n well below the crossover 2 - log_q|x| the two terms of the
// combination are huge and nearly cancel; double precision loses up to
// eighteen digits there, so this path carries 113-bit mantissas.
#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include "qspectra/types.hpp"

namespace qspectra::detail {

using QuadReal = boost::multiprecision::cpp_bin_float_quad;
using QuadComplex = boost::multiprecision::cpp_complex_quad;

inline const QuadReal& quad_eps() {
  static const QuadReal eps = QuadReal(1e-34);
  return eps;
}

// (a;q)_inf
inline QuadComplex quad_qpoch_inf(const QuadComplex& a, const QuadReal& q) {
  QuadComplex prod(1);
  QuadReal qj(1);
  const QuadReal absa = abs(a);
  for (int j = 0; j < 100000; ++j) {
    if (absa * qj < quad_eps() * (1 - q)) return prod;
    prod *= QuadComplex(1) - a * qj;
    qj *= q;
  }
  throw NonConvergent("quad q-Pochhammer exceeded its term cap");
}

inline QuadComplex quad_theta(const QuadComplex& x, const QuadReal& q) {
  return quad_qpoch_inf(x, q) * quad_qpoch_inf(QuadComplex(q) / x, q);
}

// 1phi1(0;b;q,z)
inline QuadComplex quad_phi11(const QuadComplex& b, const QuadReal& q, const QuadComplex& z) {
  QuadComplex sum(1), t(1);
  QuadReal qk(1);
  int small = 0;
  for (int k = 0; k < 100000; ++k) {
    t *= -z * qk / ((1 - q * qk) * (QuadComplex(1) - b * qk));
    sum += t;
    qk *= q;
    bool past_peak = abs(z) * qk < 1;
    if (past_peak && abs(t) <= quad_eps() * abs(sum)) {
      if (++small >= 3) return sum;
    } else {
      small = 0;
    }
  }
  throw NonConvergent("quad 1phi1 exceeded its term cap");
}

/// theta_q(-i q^{-1/2} x) psi^-_n + theta_q(i q^{-1/2} x) psi^+_n.
inline Complex varphi_combination_quad(int n, Complex xd, double qd) {
  const QuadReal q(qd);
  const QuadReal sq = sqrt(q);
  const QuadComplex x(QuadReal(xd.real()), QuadReal(xd.imag()));
  const QuadComplex i(QuadReal(0), QuadReal(1));
  QuadReal qhalf_n(1);  // q^{n/2}
  for (int k = 0; k < std::abs(n); ++k) qhalf_n = n > 0 ? qhalf_n * sq : qhalf_n / sq;
  QuadComplex ipow_n(1), mipow_n(1);
  for (int k = 0; k < ((n % 4) + 4) % 4; ++k) {
    ipow_n *= i;
    mipow_n *= -i;
  }
  const QuadComplex arg = i * x * qhalf_n * qhalf_n * sq;  // i x q^{n+1/2}
  const QuadComplex psi_plus = ipow_n * qhalf_n * quad_phi11(QuadComplex(-q), q, -arg);
  const QuadComplex psi_minus = mipow_n * qhalf_n * quad_phi11(QuadComplex(-q), q, arg);
  const QuadComplex v = quad_theta(-i * x / sq, q) * psi_minus + quad_theta(i * x / sq, q) * psi_plus;
  return {static_cast<double>(v.real()), static_cast<double>(v.imag())};
}

}  // namespace qspectra::detail
