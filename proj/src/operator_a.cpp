#include "qspectra/operator_a.hpp"

#include <cmath>
#include <functional>

#include "extended_combination.hpp"
#include "qspectra/quadrature.hpp"
#include "qspectra/summation.hpp"

namespace qspectra::operator_a {
namespace {

using qkernel::theta;
using qkernel::theta_scaled;

const Complex kI(0.0, 1.0);

void require_nonzero(Complex x, const char* what) {
  if (x == Complex(0.0, 0.0)) throw DomainError(std::string(what) + " is undefined at 0");
}

IdentityCheck make_check(const SumResult& r, Complex rhs) {
  IdentityCheck c;
  c.lhs = r.value;
  c.rhs = rhs;
  double diff = std::abs(r.value - rhs);
  c.residual = diff / (1.0 + std::abs(rhs));
  c.mass_residual = diff / std::max({r.mass, std::abs(rhs), 1e-300});
  c.terms = r.terms;
  return c;
}

// Identity sums may cancel to zero; their tails are judged against the mass.
SumResult identity_sum(const std::function<Complex(int)>& term, const SeriesPolicy& pol) {
  return sum_bilateral(term, 0, pol, TailScale::mass, 8);
}

Scaled ramanujan_at(Complex z, const QBase& q, const SeriesPolicy& pol) {
  return qkernel::ramanujan_entire_scaled(z, q, pol);
}

}  // namespace

Complex psi_pm(int n, Complex x, const QBase& q, Sign sign, const SeriesPolicy& pol) {
  const double s = sign == Sign::plus ? 1.0 : -1.0;
  const Complex arg = -s * kI * x * q.power(n + 0.5);
  const Complex pre = ipow(s * kI, n) * q.power(0.5 * n);
  return checked(pre * qkernel::phi11(-q.value(), q, arg, pol), "psi");
}

double null_solution(int n, NullKind which, const QBase& q) {
  const bool even = n % 2 == 0;
  if (which == NullKind::p) return even ? ipow(-q.value(), n / 2) : 0.0;
  if (even) return 0.0;
  int half = (n - 1) / 2;  // n odd, so n - 1 is even and the division is exact
  return ipow(-q.value(), half);
}

Scaled varphi_scaled(int n, Complex x, const QBase& q, const SeriesPolicy& pol) {
  require_nonzero(x, "varphi");
  const QBase q2(q.value() * q.value());
  const Complex arg = q.power(2.0 - 2.0 * n) / (x * x);
  checked(arg, "varphi argument");
  Scaled pre = qkernel::qpochhammer_inf_scaled(-1.0, q, pol) * ipow_scaled(x, n) * qpow_scaled(q, tri(n));
  return pre * ramanujan_at(arg, q2, pol);
}

Complex varphi(int n, Complex x, const QBase& q, VarphiMethod method, const SeriesPolicy& pol) {
  require_nonzero(x, "varphi");
  switch (method) {
    case VarphiMethod::combination:
      return checked(detail::varphi_combination_quad(n, x, q.value()), "varphi");
    case VarphiMethod::ramanujan: {
      const QBase q2(q.value() * q.value());
      Scaled pre = qkernel::qpochhammer_inf_scaled(-1.0, q, pol) * ipow_scaled(x, n) * qpow_scaled(q, tri(n));
      Complex series = qkernel::phi01(q2, -q.power(4.0 - 2.0 * n) / (x * x), pol);
      return (pre * Scaled(series)).value();
    }
    case VarphiMethod::automatic:
      return varphi_scaled(n, x, q, pol).value();
  }
  throw DomainError("unknown varphi method");
}

Complex varphi_norm_sq(Complex x, const QBase& q, NormMethod method, const SeriesPolicy& pol) {
  require_nonzero(x, "varphi norm");
  if (method == NormMethod::closed_form) {
    const double qv = q.value();
    const QBase q2(qv * qv);
    Complex r = qkernel::qpochhammer_inf(qv * qv, q2, pol) / qkernel::qpochhammer_inf(qv, q2, pol);
    return (Scaled(4.0 * r * r) * theta_scaled(-x * x, q2, pol)).value();
  }
  auto term = [&](int n) {
    Scaled v = varphi_scaled(n, x, q, pol);
    return (v * v).value();
  };
  return sum_bilateral(term, 0, pol, TailScale::partial, 8).value;
}

Complex secular(Complex x, const ExtensionParam& t, const QBase& q) {
  require_nonzero(x, "secular function");
  const QBase q4 = q.pow(4);
  const Complex x2 = x * x;
  if (t.is_infinite()) return theta(x2, q4);
  return x * theta(q.power(2) * x2, q4) + t.value() * theta(x2, q4);
}

double secular_scale(Complex x, const ExtensionParam& t, const QBase& q) {
  require_nonzero(x, "secular function");
  const QBase q4 = q.pow(4);
  const Complex x2 = x * x;
  double weight = t.is_infinite() ? 1.0 : std::max(1.0, std::abs(t.value()));
  return std::abs(x * theta(q.power(2) * x2, q4)) + weight * std::abs(theta(x2, q4));
}

Complex phi_map_raw(double s, const QBase& q) {
  const QBase q2(q.value() * q.value());
  qkernel::ThetaFour th = qkernel::jacobi_thetas(Complex(0.0, s), q2);
  return kI * std::sqrt(q.value()) * th.v4 / th.v1;
}

ExtensionParam phi_map(double s, const QBase& q) {
  if (!(s >= 0.0 && s < -2.0 * q.log())) throw DomainError("Phi is defined on [0, -2 ln q)");
  if (s == 0.0) return ExtensionParam::infinity();
  Complex r = phi_map_raw(s, q);
  return ExtensionParam::finite(checked(r, "Phi").real());
}

double phi_inverse(const ExtensionParam& t, const QBase& q, InverseMethod method) {
  if (t.is_infinite()) return 0.0;
  const double tv = t.value();
  if (method == InverseMethod::monotone_inversion) {
    double lo = 1e-12;
    double hi = -2.0 * q.log() - 1e-12;
    if (!(phi_map(lo, q).value() > tv && phi_map(hi, q).value() < tv)) {
      throw NonConvergent("Phi does not bracket the requested t");
    }
    for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
      double mid = 0.5 * (lo + hi);
      if (phi_map(mid, q).value() > tv) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }
  // Phi^{-1}(t) = q^{1/2}/(th2 th3) int_t^inf [(a + x^2)(b + x^2)]^{-1/2} dx, x = tan u,
  // a = q th3^2/th2^2, b = q th2^2/th3^2, theta constants at (0|q^2). The second
  // factor follows from Phi = q^{1/2} (th3/th2) cs(s th3^2 | k').
  const QBase q2(q.value() * q.value());
  qkernel::ThetaFour th = qkernel::jacobi_thetas(0.0, q2);
  const double th2 = th.v2.real();
  const double th3 = th.v3.real();
  const double a = q.value() * th3 * th3 / (th2 * th2);
  const double b = q.value() * th2 * th2 / (th3 * th3);
  auto integrand = [&](double u) {
    double c = std::cos(u), s = std::sin(u);
    return 1.0 / std::sqrt((a * c * c + s * s) * (b * c * c + s * s));
  };
  QuadratureResult r = integrate(integrand, std::atan(tv), 0.5 * kPi, 1e-12);
  return std::sqrt(q.value()) / (th2 * th3) * r.value;
}

ASpectrum point_spectrum_a(const ExtensionParam& t, const QBase& q, const SpectrumWindow& window) {
  ASpectrum sp;
  sp.t = t;
  sp.s = phi_inverse(t, q);
  const double es = std::exp(sp.s);
  auto make = [&](int n, double x) {
    SpectrumPoint p;
    p.index = n;
    p.value = x;
    p.secular_residual = std::abs(secular(x, t, q)) / secular_scale(x, t, q);
    if (!(p.secular_residual <= kSecularTolerance)) {
      throw ValidationFailure("eigenvalue " + std::to_string(x) + " fails the secular equation");
    }
    return p;
  };
  for (int n = window.n_min; n <= window.n_max; ++n) {
    sp.positive_branch.push_back(make(n, es * q.power(2.0 * n)));
  }
  for (int m = window.n_min; m <= window.n_max; ++m) {
    sp.negative_branch.push_back(make(m, -q.power(2.0 * m) / es));
  }
  return sp;
}

ExtensionParam extension_for_eigenvalue(double omega, const QBase& q) {
  if (omega == 0.0 || !std::isfinite(omega)) throw DomainError("eigenvalue must be finite and nonzero");
  // Negative omega lies on the negative branch of the extension carrying -1/omega.
  const double w = omega > 0.0 ? omega : -1.0 / omega;
  const double c = std::log(w) / (2.0 * q.log());
  double level = std::ceil(c);
  if (std::abs(c - std::round(c)) < 1e-12) level = std::round(c);
  double s = std::log(w) - 2.0 * level * q.log();
  if (s < 0.0) s = 0.0;
  return phi_map(s, q);
}

double boundary_residual(Complex x, const ExtensionParam& t, const QBase& q, int n) {
  require_nonzero(x, "boundary residual");
  auto phi = [&](int k) { return varphi(k, x, q); };
  const double scale = q.power(-n);
  if (t.is_infinite()) return std::abs(scale * phi(2 * n));
  const double tv = t.value();
  double first = std::abs(scale * (phi(2 * n + 1) + tv * phi(2 * n)));
  double second = std::abs(scale * (q.value() * phi(2 * n - 1) - tv * phi(2 * n)));
  return std::max(first, second);
}

IdentityCheck og_ramanujan_first(Complex z, int l, const QBase& q, const SeriesPolicy& pol) {
  require_nonzero(z, "Ramanujan orthogonality");
  auto term = [&](int k) {
    Scaled t = ipow_scaled(z, k) * qpow_scaled(q, tri(k)) * ramanujan_at(z * q.power(k + l), q, pol) *
               ramanujan_at(z * q.power(k - l), q, pol);
    return t.value();
  };
  Complex rhs(0.0, 0.0);
  if (l == 0) {
    Complex c = qkernel::qpochhammer_inf(q.value(), q, pol);
    rhs = c * c * theta(-z, q);
  }
  return make_check(identity_sum(term, pol), rhs);
}

IdentityCheck og_ramanujan_second(Complex z, int l, const QBase& q, const SeriesPolicy& pol) {
  require_nonzero(z, "Ramanujan orthogonality");
  auto term = [&](int k) {
    Scaled t = Scaled(k % 2 == 0 ? 1.0 : -1.0) * qpow_scaled(q, tri(k)) *
               ramanujan_at(z * q.power(k + l), q, pol) * ramanujan_at(q.power(k - l) / z, q, pol);
    return t.value();
  };
  return make_check(identity_sum(term, pol), 0.0);
}

IdentityCheck og_ramanujan_third(Complex z, int k, int l, const QBase& q, const SeriesPolicy& pol) {
  require_nonzero(z, "Ramanujan orthogonality");
  const QBase q2(q.value() * q.value());
  // B_j(w) = w^j A_{q^2}(w^2 q^{2j+1})
  auto bfun = [&](int j, Complex w) { return ipow_scaled(w, j) * ramanujan_at(w * w * q.power(2.0 * j + 1), q2, pol); };
  const Complex zr = -1.0 / z;
  auto term = [&](int n) {
    Scaled w = qpow_scaled(q, static_cast<double>(n) * (n + k + l));
    Scaled t = w * (bfun(n + k, z) * bfun(n + l, z) + bfun(n + k, zr) * bfun(n + l, zr));
    return t.value();
  };
  Complex rhs(0.0, 0.0);
  if (k == l) {
    Complex c = qkernel::qpochhammer_inf(q.value() * q.value(), q2, pol);
    rhs = 2.0 * q.power(-static_cast<double>(k) * k) * c * c * theta(-q.value() * z * z, q2);
  }
  return make_check(identity_sum(term, pol), rhs);
}

IdentityCheck og_varphi_first(double omega, int m, int n, const QBase& q, const SeriesPolicy& pol) {
  require_nonzero(omega, "varphi orthogonality");
  const double xm = omega * q.power(2.0 * m);
  const double xn = omega * q.power(2.0 * n);
  auto term = [&](int k) { return (varphi_scaled(k, xm, q, pol) * varphi_scaled(k, xn, q, pol)).value(); };
  Complex rhs(0.0, 0.0);
  if (m == n) {
    Scaled pre = ipow_scaled(omega, -4 * n) * qpow_scaled(q, -2.0 * n * (2.0 * n - 1));
    rhs = (pre * Scaled(varphi_norm_sq(omega, q, NormMethod::closed_form, pol))).value();
  }
  return make_check(identity_sum(term, pol), rhs);
}

IdentityCheck og_varphi_second(double omega, int m, int n, const QBase& q, const SeriesPolicy& pol) {
  require_nonzero(omega, "varphi orthogonality");
  const double xm = omega * q.power(2.0 * m);
  const double yn = -q.power(2.0 * n) / omega;
  auto term = [&](int k) { return (varphi_scaled(k, xm, q, pol) * varphi_scaled(k, yn, q, pol)).value(); };
  return make_check(identity_sum(term, pol), 0.0);
}

IdentityCheck og_varphi_dual(double omega, int k, int l, const QBase& q, const SeriesPolicy& pol) {
  require_nonzero(omega, "varphi orthogonality");
  auto term = [&](int n) {
    const double a = omega * q.power(n);
    const double b = -q.power(1.0 - n) / omega;
    Scaled w = ipow_scaled(omega, 2 * n) * qpow_scaled(q, 2.0 * tri(n));
    Scaled t = w * (varphi_scaled(k, a, q, pol) * varphi_scaled(l, a, q, pol) +
                    varphi_scaled(k, b, q, pol) * varphi_scaled(l, b, q, pol));
    return t.value();
  };
  Complex rhs(0.0, 0.0);
  if (k == l) rhs = 2.0 * varphi_norm_sq(omega, q, NormMethod::closed_form, pol);
  return make_check(identity_sum(term, pol), rhs);
}

}  // namespace qspectra::operator_a
