// q-Pochhammer symbols, theta functions and the basic hypergeometric series
// used by both operators.
#pragma once

#include <optional>

#include "qspectra/scaled.hpp"
#include "qspectra/types.hpp"

namespace qspectra::qkernel {

/// prod_{k<n} (1 - a q^k).
Complex qpochhammer_finite(Complex a, const QBase& q, int n);

/// (a;q)_inf, truncated once |a| q^N / (1-q) < rel_tol.
Complex qpochhammer_inf(Complex a, const QBase& q, const SeriesPolicy& pol = {});
Scaled qpochhammer_inf_scaled(Complex a, const QBase& q, const SeriesPolicy& pol = {});

enum class ThetaMethod { product, bilateral_sum };

/// theta_q(x) = (x, q/x; q)_inf.
Complex theta(Complex x, const QBase& q, ThetaMethod method = ThetaMethod::product,
              const SeriesPolicy& pol = {});

/// theta_q(x) for arguments of any size, reduced by quasi-periodicity.
Scaled theta_scaled(Complex x, const QBase& q, const SeriesPolicy& pol = {});

/// 1phi1(0;b;q,z); DomainError when b is a pole q^{-k}, k >= 0.
Complex phi11(Complex b, const QBase& q, Complex z, const SeriesPolicy& pol = {});

/// 1phi1(a;b;q,z) with a general numerator parameter.
Complex phi11_general(Complex a, Complex b, const QBase& q, Complex z, const SeriesPolicy& pol = {});

/// Lower parameter of the regularized series, optionally an exact power q^e.
///
/// When b is an exact nonpositive power of q the leading terms of the
/// regularized series vanish identically; pinning the exponent lets the
/// evaluator skip them instead of summing rounding noise.
struct RegParameter {
  Complex b;
  std::optional<int> exponent;

  /// Detects b within relative 1e-12 of q^e with integer e <= 0.
  static RegParameter detect(Complex b, const QBase& q);
  static RegParameter power(int e, const QBase& q);
};

struct SeriesValue {
  Scaled value;
  double log_mass = 0.0;  ///< ln of the sum of |terms|
  int terms = 0;
};

/// (b;q)_inf 1phi1(0;b;q,z) summed termwise; entire in b.
SeriesValue phi11_reg_series(const RegParameter& b, const QBase& q, Complex z, const SeriesPolicy& pol = {});
Complex phi11_reg(Complex b, const QBase& q, Complex z, const SeriesPolicy& pol = {});

/// 0phi1(-;0;q,z).
Complex phi01(const QBase& q, Complex z, const SeriesPolicy& pol = {});

/// A_q(z) = 0phi1(-;0;q,-qz). Large arguments go through the connection
/// formula with base q^{1/2}, where the power series would cancel.
Complex ramanujan_entire(Complex z, const QBase& q, const SeriesPolicy& pol = {});
Scaled ramanujan_entire_scaled(Complex z, const QBase& q, const SeriesPolicy& pol = {});

/// Third Jackson q-Bessel function J_n(z;q), integer order.
Complex jackson_qbessel3(int n, Complex z, const QBase& q, const SeriesPolicy& pol = {});
Scaled jackson_qbessel3_scaled(int n, Complex z, const QBase& q, const SeriesPolicy& pol = {});

enum class XiMethod { mittag_leffler, laurent, closed_form };

/// xi_q(z) = sum_n q^{n/2} / (1 + z q^{n-1/2}).
Complex xi(Complex z, const QBase& q, XiMethod method, const SeriesPolicy& pol = {});

struct ThetaFour {
  Complex v1, v2, v3, v4;
};

/// Jacobi theta functions at (z | q) from their theta_{q^2} product forms.
ThetaFour jacobi_thetas(Complex z, const QBase& q, const SeriesPolicy& pol = {});

}  // namespace qspectra::qkernel
