#include "qspectra/qkernel.hpp"

#include <algorithm>
#include <cmath>

#include "extended_combination.hpp"
#include "qspectra/summation.hpp"

namespace qspectra::qkernel {
namespace {

// A factor 1 - a q^j this close to zero is the exact zero of a q-power argument.
constexpr double kZeroFactor = 1e-14;
// Above this |log_q |x|| the plain theta product risks overflow.
constexpr long kPlainThetaShift = 12;

long nearest_shift(Complex x, const QBase& q) { return std::lround(std::log(std::abs(x)) / q.log()); }

Scaled sign_of_shift(long k) { return Scaled(k % 2 == 0 ? 1.0 : -1.0); }

// Relative distance test |b - q^{-k}| < tol q^{-k} for some k >= 0.
bool near_negative_power(Complex b, const QBase& q, double tol) {
  if (b == Complex(0.0, 0.0)) return false;
  long k = -nearest_shift(b, q);
  if (k < 0) return false;
  double pole = std::pow(q.value(), -static_cast<double>(k));
  return std::abs(b - pole) < tol * pole;
}

Complex theta_plain(Complex x, const QBase& q, const SeriesPolicy& pol) {
  return qpochhammer_inf(x, q, pol) * qpochhammer_inf(q.value() / x, q, pol);
}

// The bilateral sum cancels by orders of magnitude next to the zeros of theta,
// so the terms are accumulated in quad precision.
Complex theta_sum_reduced(Complex y, const QBase& q, const SeriesPolicy& pol) {
  using detail::QuadComplex;
  using detail::QuadReal;
  pol.validate();
  const QuadReal qq(q.value());
  const QuadComplex my = -QuadComplex(y.real(), y.imag());
  const QuadReal tol(std::min(pol.rel_tol, 1e-20));
  QuadComplex sum(1);
  // terms q^{n(n-1)/2} (-y)^n, generated outward from n = 0
  QuadComplex up(1), down(1);
  QuadReal q_up(1), q_down(1);
  int small_up = 0, small_down = 0;
  for (int n = 1; small_up < pol.consecutive_small || small_down < pol.consecutive_small; ++n) {
    if (n > pol.max_terms) throw NonConvergent("bilateral theta sum exceeded max_terms");
    if (small_up < pol.consecutive_small) {
      up *= my * q_up;  // q^{n-1}
      q_up *= qq;
      sum += up;
      small_up = abs(up) <= tol * abs(sum) ? small_up + 1 : 0;
    }
    if (small_down < pol.consecutive_small) {
      q_down *= qq;  // q^{n}
      down *= q_down / my;
      sum += down;
      small_down = abs(down) <= tol * abs(sum) ? small_down + 1 : 0;
    }
  }
  const Complex v(static_cast<double>(sum.real()), static_cast<double>(sum.imag()));
  return v / qpochhammer_inf(q.value(), q, pol);
}

}  // namespace

Complex qpochhammer_finite(Complex a, const QBase& q, int n) {
  if (n < 0) throw DomainError("finite q-Pochhammer needs n >= 0");
  Complex prod(1.0, 0.0);
  for (int k = 0; k < n; ++k) prod *= 1.0 - a * std::pow(q.value(), k);
  return prod;
}

Scaled qpochhammer_inf_scaled(Complex a, const QBase& q, const SeriesPolicy& pol) {
  pol.validate();
  if (a == Complex(0.0, 0.0)) return Scaled(1.0);
  const double absa = std::abs(a);
  Complex prod(1.0, 0.0);
  Scaled out(1.0);
  for (int j = 0; j < pol.max_terms; ++j) {
    double qj = std::pow(q.value(), j);
    if (absa * qj / (1.0 - q.value()) < pol.rel_tol) return out * Scaled(prod);
    Complex f = 1.0 - a * qj;
    if (std::abs(f) <= kZeroFactor) return Scaled();
    prod *= f;
    double m = std::abs(prod);
    if (m > 1e150 || m < 1e-150) {
      out *= Scaled(prod);
      prod = 1.0;
    }
  }
  throw NonConvergent("q-Pochhammer product exceeded max_terms");
}

Complex qpochhammer_inf(Complex a, const QBase& q, const SeriesPolicy& pol) {
  return qpochhammer_inf_scaled(a, q, pol).value();
}

Scaled theta_scaled(Complex x, const QBase& q, const SeriesPolicy& pol) {
  if (x == Complex(0.0, 0.0)) throw DomainError("theta is undefined at 0");
  long k = nearest_shift(x, q);
  if (k == 0) return Scaled(theta_plain(x, q, pol));
  // theta(q^k y) = (-1)^k y^{-k} q^{-k(k-1)/2} theta(y)
  Complex y = x / std::pow(q.value(), static_cast<double>(k));
  return Scaled(theta_plain(y, q, pol)) * ipow_scaled(y, -k) * qpow_scaled(q, -tri(k)) * sign_of_shift(k);
}

Complex theta(Complex x, const QBase& q, ThetaMethod method, const SeriesPolicy& pol) {
  if (x == Complex(0.0, 0.0)) throw DomainError("theta is undefined at 0");
  long k = nearest_shift(x, q);
  if (method == ThetaMethod::product) {
    if (std::labs(k) <= kPlainThetaShift) return checked(theta_plain(x, q, pol), "theta");
    return theta_scaled(x, q, pol).value();
  }
  if (k == 0) return checked(theta_sum_reduced(x, q, pol), "theta");
  Complex y = x / std::pow(q.value(), static_cast<double>(k));
  Scaled s = Scaled(theta_sum_reduced(y, q, pol)) * ipow_scaled(y, -k) * qpow_scaled(q, -tri(k)) *
             sign_of_shift(k);
  return s.value();
}

Complex phi11(Complex b, const QBase& q, Complex z, const SeriesPolicy& pol) {
  pol.validate();
  if (near_negative_power(b, q, 1e-10)) throw DomainError("1phi1 lower parameter at a pole q^{-k}");
  Complex t(1.0, 0.0);
  auto term = [&](int k) {
    if (k > 0) {
      double qk = std::pow(q.value(), k - 1);
      t *= (-z * qk) / ((1.0 - q.value() * qk) * (1.0 - b * qk));
    }
    return t;
  };
  return checked(sum_one_sided(term, 0, 1, pol).value, "1phi1");
}

Complex phi11_general(Complex a, Complex b, const QBase& q, Complex z, const SeriesPolicy& pol) {
  pol.validate();
  if (near_negative_power(b, q, 1e-10)) throw DomainError("1phi1 lower parameter at a pole q^{-k}");
  Complex t(1.0, 0.0);
  auto term = [&](int k) {
    if (k > 0) {
      double qk = std::pow(q.value(), k - 1);
      t *= (1.0 - a * qk) * (-z * qk) / ((1.0 - q.value() * qk) * (1.0 - b * qk));
    }
    return t;
  };
  return checked(sum_one_sided(term, 0, 1, pol).value, "1phi1");
}

RegParameter RegParameter::detect(Complex b, const QBase& q) {
  RegParameter r{b, std::nullopt};
  if (b.real() > 0.0 && std::abs(b.imag()) <= 1e-12 * std::abs(b)) {
    long k = nearest_shift(b, q);
    if (k <= 0) {
      double qk = std::pow(q.value(), static_cast<double>(k));
      if (std::abs(b - qk) <= 1e-12 * qk) r.exponent = static_cast<int>(k);
    }
  }
  return r;
}

RegParameter RegParameter::power(int e, const QBase& q) {
  return RegParameter{Complex(std::pow(q.value(), e), 0.0), e};
}

SeriesValue phi11_reg_series(const RegParameter& bp, const QBase& q, Complex z, const SeriesPolicy& pol) {
  pol.validate();
  const double qv = q.value();
  const double lq = q.log();
  const Complex b = bp.b;
  const double absb = std::abs(b);
  const bool exact = bp.exponent.has_value();
  const int e = exact ? *bp.exponent : 0;

  // (b q^k; q)_inf; for exact powers the factors are 1 - q^{e+k+j} with e+k >= 1.
  auto tail_product = [&](int k) -> Scaled {
    if (exact) {
      if (e + k <= 0) return Scaled();
      return qpochhammer_inf_scaled(std::pow(qv, e + k), q, pol);
    }
    return qpochhammer_inf_scaled(b * std::pow(qv, k), q, pol);
  };
  auto factor = [&](int k) -> Complex {
    if (exact) return 1.0 - std::pow(qv, e + k);
    return 1.0 - b * std::pow(qv, k);
  };

  const int k0 = exact && e <= 0 ? 1 - e : 0;
  if (z == Complex(0.0, 0.0)) {
    SeriesValue sv;
    sv.value = k0 == 0 ? tail_product(0) : Scaled();
    sv.log_mass = sv.value.log_abs();
    sv.terms = 1;
    return sv;
  }

  const double absz = std::abs(z);
  const double lz = std::log(absz);
  const Complex u = -z / absz;

  double log_s = k0 * lz + tri(k0) * lq;
  for (int i = 1; i <= k0; ++i) log_s -= std::log1p(-std::pow(qv, i));
  Complex phase = ipow(u, k0);

  double log_u = 0.0;  // ln (-|b| q^k; q)_inf, an upper bound for |P_k|
  for (int j = k0; j < k0 + pol.max_terms; ++j) {
    double v = absb * std::pow(qv, j);
    if (v < 1e-18) break;
    log_u += std::log1p(v);
  }

  Scaled p = tail_product(k0);
  Scaled sum;
  Scaled mass;
  int small = 0;
  const double log_tol = std::log(pol.rel_tol);
  for (int k = k0; k < k0 + pol.max_terms; ++k) {
    Scaled term = p * Scaled::polar_log(log_s, phase);
    sum += term;
    mass += Scaled::polar_log(term.log_abs(), term.is_zero() ? Complex(0.0, 0.0) : Complex(1.0, 0.0));

    const double qk = std::pow(qv, k);
    const bool past_peak = absz * qk < 1.0 - qk * qv;
    if (past_peak && !sum.is_zero() && log_s + log_u <= log_tol + sum.log_abs()) {
      if (++small >= pol.consecutive_small) {
        return SeriesValue{sum, mass.log_abs(), k - k0 + 1};
      }
    } else {
      small = 0;
    }

    Complex f = factor(k);
    if (std::abs(f) < 0.5) {
      p = tail_product(k + 1);
    } else {
      p /= Scaled(f);
    }
    log_u -= std::log1p(absb * qk);
    log_s += lz + k * lq - std::log1p(-qk * qv);
    phase *= u;
    phase /= std::abs(phase);
  }
  throw NonConvergent("regularized 1phi1 exceeded max_terms");
}

Complex phi11_reg(Complex b, const QBase& q, Complex z, const SeriesPolicy& pol) {
  return phi11_reg_series(RegParameter::detect(b, q), q, z, pol).value.value();
}

Complex phi01(const QBase& q, Complex z, const SeriesPolicy& pol) {
  pol.validate();
  Complex t(1.0, 0.0);
  auto term = [&](int k) {
    if (k > 0) {
      double qk = std::pow(q.value(), k - 1);
      t *= z * qk * qk / (1.0 - q.value() * qk);
    }
    return t;
  };
  return checked(sum_one_sided(term, 0, 1, pol).value, "0phi1");
}

Scaled ramanujan_entire_scaled(Complex z, const QBase& q, const SeriesPolicy& pol) {
  const double qv = q.value();
  if (std::abs(z) <= 1.0 / (qv * qv)) return Scaled(phi01(q, -qv * z, pol));
  // 0phi1(-;0;p^2,p^5 x^{-2}) (-1;p)_inf = theta_p(-x/p) 1phi1(0;-p;p,x) + theta_p(x/p) 1phi1(0;-p;p,-x)
  const QBase p = q.sqrt();
  const double pv = p.value();
  const Complex x = std::sqrt(Complex(-pv * pv * pv, 0.0) / z);
  Scaled s = theta_scaled(-x / pv, p, pol) * Scaled(phi11(-pv, p, x, pol)) +
             theta_scaled(x / pv, p, pol) * Scaled(phi11(-pv, p, -x, pol));
  return s / qpochhammer_inf_scaled(-1.0, p, pol);
}

Complex ramanujan_entire(Complex z, const QBase& q, const SeriesPolicy& pol) {
  return ramanujan_entire_scaled(z, q, pol).value();
}

Scaled jackson_qbessel3_scaled(int n, Complex z, const QBase& q, const SeriesPolicy& pol) {
  if (z == Complex(0.0, 0.0)) return Scaled(n == 0 ? 1.0 : 0.0);
  SeriesValue s = phi11_reg_series(RegParameter::power(n + 1, q), q, q.value() * z * z, pol);
  return ipow_scaled(z, n) * s.value / qpochhammer_inf_scaled(q.value(), q, pol);
}

Complex jackson_qbessel3(int n, Complex z, const QBase& q, const SeriesPolicy& pol) {
  return jackson_qbessel3_scaled(n, z, q, pol).value();
}

Complex xi(Complex z, const QBase& q, XiMethod method, const SeriesPolicy& pol) {
  if (z == Complex(0.0, 0.0)) throw DomainError("xi is undefined at 0");
  const double qv = q.value();
  const double sq = std::sqrt(qv);
  // poles at z = -q^{n+1/2}
  {
    long n = std::lround(std::log(std::abs(z)) / q.log() - 0.5);
    double pole = std::pow(qv, n + 0.5);
    if (std::abs(z + pole) < 1e-10 * pole) throw DomainError("xi evaluated at a pole");
  }
  switch (method) {
    case XiMethod::mittag_leffler: {
      auto term = [&](int n) { return std::pow(qv, 0.5 * n) / (1.0 + z * std::pow(qv, n - 0.5)); };
      return checked(sum_bilateral(term, 0, pol).value, "xi");
    }
    case XiMethod::laurent: {
      double a = std::abs(z);
      if (!(a > sq && a < 1.0 / sq)) throw DomainError("Laurent series of xi needs q^{1/2} < |z| < q^{-1/2}");
      auto term = [&](int k) {
        double c = std::pow(qv, 0.5 * (k + 1)) / (1.0 - std::pow(qv, k + 0.5));
        return c * ipow(-z, k);
      };
      return checked(sum_bilateral(term, 0, pol).value, "xi");
    }
    case XiMethod::closed_form: {
      Complex c = qpochhammer_inf(qv, q, pol) / qpochhammer_inf(sq, q, pol);
      Scaled r = theta_scaled(-z, q, pol) / theta_scaled(-z / sq, q, pol);
      return checked(c * c * r.value(), "xi");
    }
  }
  throw DomainError("unknown xi method");
}

ThetaFour jacobi_thetas(Complex z, const QBase& q, const SeriesPolicy& pol) {
  const double qv = q.value();
  const QBase q2(qv * qv);
  const Complex i(0.0, 1.0);
  const Complex w = std::exp(2.0 * i * z);
  const Complex c = qpochhammer_inf(qv * qv, q2, pol);
  const Complex pre = std::pow(qv, 0.25) * std::exp(-i * z) * c;
  ThetaFour t;
  t.v1 = checked(i * pre * theta(w, q2, ThetaMethod::product, pol), "theta1");
  t.v2 = checked(pre * theta(-w, q2, ThetaMethod::product, pol), "theta2");
  t.v3 = checked(c * theta(-qv * w, q2, ThetaMethod::product, pol), "theta3");
  t.v4 = checked(c * theta(qv * w, q2, ThetaMethod::product, pol), "theta4");
  return t;
}

}  // namespace qspectra::qkernel
