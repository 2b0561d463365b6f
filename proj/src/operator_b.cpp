#include "qspectra/operator_b.hpp"

#include <algorithm>
#include <cmath>

#include "qspectra/quadrature.hpp"
#include "qspectra/summation.hpp"

namespace qspectra::operator_b {
namespace {

using qkernel::RegParameter;
using qkernel::SeriesValue;

const Complex kI(0.0, 1.0);

void require_alpha(const BParams& p) {
  if (p.is_free()) throw DomainError("solutions f and g need alpha != 0");
}

void require_nonzero(Complex z) {
  if (z == Complex(0.0, 0.0)) throw DomainError("z must be nonzero");
}

void require_index(int m, const BParams& p) {
  if (p.is_free()) throw DomainError("the free operator has no eigenvalues");
  if (m <= p.delta()) throw DomainError("index m must exceed Delta");
}

struct Evaluated {
  Scaled value;
  double log_mass;  // ln of the termwise magnitude, including the prefactor
};

Evaluated f_eval(int n, Complex z, const BParams& p, const RegParameter& b, const SeriesPolicy& pol) {
  const QBase& q = p.q();
  const double a = p.alpha();
  Scaled pre = ipow_scaled(Complex(-1.0 / a, 0.0), n) * qpow_scaled(q, tri(n + 1));
  const Complex arg = z * q.power(n + 1) / a;
  SeriesValue s = qkernel::phi11_reg_series(b, q, arg, pol);
  return {pre * s.value, pre.log_abs() + s.log_mass};
}

Evaluated f_general(int n, Complex z, const BParams& p, const SeriesPolicy& pol) {
  require_alpha(p);
  require_nonzero(z);
  const Complex b = p.q().power(n + 1) / (z * p.alpha());
  return f_eval(n, z, p, RegParameter::detect(b, p.q()), pol);
}

Evaluated g_general(int n, Complex z, const BParams& p, const SeriesPolicy& pol) {
  require_alpha(p);
  require_nonzero(z);
  const QBase& q = p.q();
  const Complex b = z * p.alpha() * q.power(1 - n);
  SeriesValue s = qkernel::phi11_reg_series(RegParameter::detect(b, q), q, q.value() * z * z, pol);
  Scaled pre = ipow_scaled(z, -n);
  return {pre * s.value, pre.log_abs() + s.log_mass};
}

Scaled theta_s(Complex x, const QBase& q, const SeriesPolicy& pol) { return qkernel::theta_scaled(x, q, pol); }

// (q;q)_inf
double qq(const QBase& q, const SeriesPolicy& pol) {
  return qkernel::qpochhammer_inf(q.value(), q, pol).real();
}

// A and B for beta in (q,1], the base case of the asymptotics.
DarbouxConstants darboux_base(double phi, double beta, const QBase& q, const SeriesPolicy& pol) {
  const double qv = q.value();
  const Complex e = std::exp(kI * phi);
  const Complex ec = std::conj(e);
  const Complex lead = qkernel::qpochhammer_inf(qv / beta * ec, q, pol) / qq(q, pol);
  const Complex first = -kI * e / (2.0 * std::sin(phi)) *
                        qkernel::phi11_general(qv, qv * ec * ec, q, beta * ec, pol);
  const Complex second = qkernel::phi11_general(qv, qv / beta * ec, q, qv / beta * e, pol);
  DarbouxConstants c;
  c.a = lead * (first + second - 1.0);
  c.b = qkernel::theta(beta * e, q, qkernel::ThetaMethod::product, pol) /
        qkernel::qpochhammer_inf(e * e, q, pol);
  return c;
}

std::vector<EnergyInterval> merged(std::vector<EnergyInterval> v) {
  for (auto& i : v) {
    if (!(i.lo <= i.hi)) throw DomainError("energy interval needs lo <= hi");
  }
  std::sort(v.begin(), v.end(), [](const EnergyInterval& x, const EnergyInterval& y) { return x.lo < y.lo; });
  std::vector<EnergyInterval> out;
  for (const auto& i : v) {
    if (!out.empty() && i.lo <= out.back().hi) {
      out.back().hi = std::max(out.back().hi, i.hi);
    } else {
      out.push_back(i);
    }
  }
  return out;
}

}  // namespace

BParams::BParams(double alpha, QBase q) : alpha_(alpha), q_(q) {
  if (!std::isfinite(alpha)) throw DomainError("alpha must be finite");
}

int BParams::delta() const {
  if (is_free()) throw DomainError("Delta is undefined for alpha = 0");
  const double a = std::abs(alpha_);
  const double x = std::log(a) / q_.log();
  const long k = std::lround(x);
  const double qk = q_.power(static_cast<double>(k));
  if (std::abs(a - qk) <= 1e-12 * qk) return static_cast<int>(k);
  return static_cast<int>(std::floor(x));
}

double BParams::beta() const { return alpha_ * q_.power(-static_cast<double>(delta())); }

JoukowskiPoint JoukowskiPoint::from_z(Complex z) {
  const double r = std::abs(z);
  if (!(r > 0.0) || r > 1.0 + 1e-14) throw DomainError("Joukowski point needs 0 < |z| <= 1");
  return {z, z + 1.0 / z};
}

JoukowskiPoint JoukowskiPoint::from_mu(Complex mu) {
  const Complex r = std::sqrt(mu - 2.0) * std::sqrt(mu + 2.0);
  const Complex plus = 0.5 * (mu + r);
  const Complex minus = 0.5 * (mu - r);
  // the larger root is computed without cancellation; the preimage is its reciprocal
  const Complex big = std::abs(plus) >= std::abs(minus) ? plus : minus;
  if (big == Complex(0.0, 0.0)) throw DomainError("Joukowski preimage undefined");
  JoukowskiPoint jp{1.0 / big, mu};
  if (std::abs(jp.z + 1.0 / jp.z - mu) > 1e-14 * std::max(1.0, std::abs(mu)) * 4.0) {
    throw ValidationFailure("Joukowski preimage inconsistent with mu");
  }
  return jp;
}

Scaled f_scaled(int n, Complex z, const BParams& p, const SeriesPolicy& pol) {
  return f_general(n, z, p, pol).value;
}

Complex f_n(int n, Complex z, const BParams& p, const SeriesPolicy& pol) {
  return checked(f_scaled(n, z, p, pol).value(), "f_n");
}

Scaled g_scaled(int n, Complex z, const BParams& p, const SeriesPolicy& pol) {
  return g_general(n, z, p, pol).value;
}

Complex g_n(int n, Complex z, const BParams& p, const SeriesPolicy& pol) {
  return checked(g_scaled(n, z, p, pol).value(), "g_n");
}

double recurrence_residual(const std::function<Scaled(int)>& v, int n, Complex z, const BParams& p) {
  const Scaled prev = v(n - 1);
  const Scaled cur = v(n);
  const Scaled next = v(n + 1);
  const Complex mu = z + 1.0 / z;
  const Scaled diag = Scaled(Complex(p.alpha() * p.q().power(-n), 0.0)) * cur;
  const Scaled shift = Scaled(mu) * cur;
  const Scaled total = prev + diag - shift + next;
  double scale_log = std::max({prev.log_abs(), diag.log_abs(), shift.log_abs(), next.log_abs()});
  if (!std::isfinite(scale_log)) return 0.0;
  if (total.is_zero()) return 0.0;
  return std::exp(total.log_abs() - scale_log);
}

Complex wronskian_at(int n, Complex z, const BParams& p, const SeriesPolicy& pol) {
  Scaled w = f_scaled(n + 1, z, p, pol) * g_scaled(n, z, p, pol) - f_scaled(n, z, p, pol) * g_scaled(n + 1, z, p, pol);
  return checked(w.value(), "Wronskian");
}

Complex wronskian_fg(Complex z, const BParams& p, WronskianMethod method, const SeriesPolicy& pol) {
  require_alpha(p);
  require_nonzero(z);
  if (method == WronskianMethod::closed_form) {
    return checked((-theta_s(p.alpha() * z, p.q(), pol) / Scaled(z)).value(), "Wronskian");
  }
  const int ns[] = {-10, 0, 10};
  Complex values[3];
  double scale = 0.0;
  for (int i = 0; i < 3; ++i) {
    const int n = ns[i];
    Scaled a = f_scaled(n + 1, z, p, pol) * g_scaled(n, z, p, pol);
    Scaled b = f_scaled(n, z, p, pol) * g_scaled(n + 1, z, p, pol);
    values[i] = (a - b).value();
    scale = std::max({scale, std::abs(a.value()), std::abs(b.value())});
  }
  double spread = std::max(std::abs(values[0] - values[1]), std::abs(values[2] - values[1]));
  if (spread > 1e-10 * scale) throw ValidationFailure("Wronskian is not constant in n");
  return values[1];
}

DarbouxConstants darboux_constants(double phi, const BParams& p, const SeriesPolicy& pol) {
  require_alpha(p);
  if (!(phi > 0.0 && phi < kPi)) throw DomainError("darboux_constants needs phi in (0,pi)");
  if (p.alpha() < 0.0) {
    // f_n(-a; -z) = (-1)^n f_n(a; z) swaps the two exponentials
    DarbouxConstants c = darboux_constants(kPi - phi, BParams(-p.alpha(), p.q()), pol);
    return {c.b, c.a};
  }
  const int d = p.delta();
  const double beta = p.beta();
  DarbouxConstants c = darboux_base(phi, beta, p.q(), pol);
  if (d == 0) return c;
  // f_n(alpha) = C f_{n-Delta}(beta)
  Scaled cst = ipow_scaled(Complex(-1.0 / beta, 0.0), d) * qpow_scaled(p.q(), -tri(d));
  const Complex shift = std::exp(kI * (static_cast<double>(d) * phi));
  return {(cst * Scaled(shift * c.a)).value(), (cst * Scaled(std::conj(shift) * c.b)).value()};
}

double darboux_residual(int n, double phi, const BParams& p, const SeriesPolicy& pol) {
  DarbouxConstants c = darboux_constants(phi, p, pol);
  const Complex e = std::exp(kI * (static_cast<double>(n) * phi));
  return std::abs(f_n(n, std::exp(kI * phi), p, pol) - std::conj(e) * c.a - e * c.b);
}

double darboux_boundary_slope(Endpoint e, const BParams& p, const SeriesPolicy& pol) {
  require_alpha(p);
  const double a = p.alpha();
  const double qv = p.q().value();
  if (!(a > qv && a <= 1.0)) throw DomainError("boundary slope needs alpha in (q,1]");
  const double x = e == Endpoint::zero ? a : -a;
  return qkernel::theta(x, p.q(), qkernel::ThetaMethod::product, pol).real() / qq(p.q(), pol);
}

std::vector<BEigenvalue> point_spectrum_b(const BParams& p, int m_max) {
  if (p.is_free()) return {};
  const int d = p.delta();
  if (m_max <= d) throw EmptySpectrum("m_max must exceed Delta");
  std::vector<BEigenvalue> out;
  const double a = p.alpha();
  for (int m = d + 1; m <= m_max; ++m) {
    out.push_back({m, p.q().power(m) / a + a * p.q().power(-m)});
  }
  return out;
}

Scaled eigenvector_entry(int m, int j, const BParams& p, const SeriesPolicy& pol) {
  require_index(m, p);
  const double a = p.alpha();
  const Complex z = p.q().power(m) / a;
  return f_eval(j, z, p, RegParameter::power(j + 1 - m, p.q()), pol).value;
}

std::vector<double> eigenvector_b(int m, const BParams& p, const SpectrumWindow& j_range, const SeriesPolicy& pol) {
  require_index(m, p);
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(j_range.size()));
  for (int j = j_range.n_min; j <= j_range.n_max; ++j) v.push_back(eigenvector_entry(m, j, p, pol).value().real());
  return v;
}

double eigenvector_norm(int m, const BParams& p, NormMethod method, const SeriesPolicy& pol) {
  require_index(m, p);
  const QBase& q = p.q();
  const double a = p.alpha();
  if (method == NormMethod::closed_form) {
    const double gap = 1.0 - q.power(2.0 * m) / (a * a);
    double log_norm = -m * std::log(std::abs(a)) + tri(m + 1) * q.log() + std::log(qq(q, pol)) - 0.5 * std::log(gap);
    return std::exp(log_norm);
  }
  const Scaled ref = eigenvector_entry(m, m, p, pol);
  if (ref.is_zero()) throw ValidationFailure("eigenvector vanishes at its reference entry");
  auto term = [&](int j) {
    Complex r = (eigenvector_entry(m, j, p, pol) / ref).value();
    return Complex(std::norm(r), 0.0);
  };
  SumResult s = sum_bilateral(term, m, pol, TailScale::partial, 8);
  return std::exp(ref.log_abs()) * std::sqrt(s.value.real());
}

Complex green_function(int k, int l, Complex z, const BParams& p, const SeriesPolicy& pol) {
  require_alpha(p);
  const double r = std::abs(z);
  if (!(r > 0.0 && r < 1.0)) throw DomainError("Green function needs 0 < |z| < 1");
  const Complex w = z * p.alpha();
  if (w.real() > 0.0 && std::abs(w.imag()) <= 1e-8 * std::abs(w)) {
    const long m = std::lround(std::log(std::abs(w)) / p.q().log());
    const double qm = p.q().power(static_cast<double>(m));
    if (m > p.delta() && std::abs(w - qm) <= 1e-8 * qm) throw PoleError("z is an eigenvalue parameter");
  }
  Scaled wr = -theta_s(w, p.q(), pol) / Scaled(z);
  Scaled g = g_scaled(std::min(k, l), z, p, pol) * f_scaled(std::max(k, l), z, p, pol);
  return checked((g / wr).value(), "Green function");
}

ConnectionCoefficients connection_coeffs(Complex z, const BParams& p, const SpectrumWindow& test,
                                         const SeriesPolicy& pol) {
  require_alpha(p);
  require_nonzero(z);
  const QBase& q = p.q();
  const Complex z2 = z * z;
  if (z2.real() > 0.0 && std::abs(z2.imag()) <= 2e-8 * std::abs(z2)) {
    const long j = std::lround(std::log(std::abs(z2)) / q.log());
    const double qj = q.power(static_cast<double>(j));
    if (std::abs(z2 - qj) <= 2e-8 * qj) throw DomainError("z lies on the excluded set q^{Z/2}");
  }
  auto coeff = [&](Complex x) { return theta_s(p.alpha() / x, q, pol) / theta_s(1.0 / (x * x), q, pol); };
  const Scaled az = coeff(z);
  const Scaled ai = coeff(1.0 / z);
  ConnectionCoefficients c{az.value(), ai.value(), 0.0};
  for (int n = test.n_min; n <= test.n_max; ++n) {
    const Scaled f = f_scaled(n, z, p, pol);
    const Scaled t1 = az * g_scaled(n, z, p, pol);
    const Scaled t2 = ai * g_scaled(n, 1.0 / z, p, pol);
    const Scaled diff = f - t1 - t2;
    const double scale_log = std::max({f.log_abs(), t1.log_abs(), t2.log_abs()});
    if (!diff.is_zero()) c.max_residual = std::max(c.max_residual, std::exp(diff.log_abs() - scale_log));
  }
  return c;
}

double ac_density(double phi, int k, int l, const BParams& p, const SeriesPolicy& pol) {
  if (!(phi > 0.0 && phi < kPi)) throw DomainError("ac_density needs phi in (0,pi)");
  if (p.is_free()) return std::cos(static_cast<double>(k - l) * phi) / kPi;
  const QBase& q = p.q();
  const double a = p.alpha();
  const Complex e = std::exp(kI * phi);
  const Evaluated fk = f_general(k, e, p, pol);
  const Evaluated fl = f_general(l, e, p, pol);
  const Complex prod = (fk.value * fl.value).value();
  const double err_scale = std::exp(std::max(fk.value.log_abs(), fk.log_mass) + std::max(fl.value.log_abs(), fl.log_mass));
  if (std::abs(prod.imag()) > 1e-10 * std::max(std::abs(prod), err_scale)) {
    throw ValidationFailure("spectral density has a non-negligible imaginary part");
  }
  const Complex num = qkernel::qpochhammer_inf(e * e, q, pol);
  const Complex den = qkernel::qpochhammer_inf(a * e, q, pol) * qkernel::qpochhammer_inf(q.value() / a * std::conj(e), q, pol);
  return prod.real() * std::norm(num / den) / (2.0 * kPi);
}

double ac_density_energy(double x, int k, int l, const BParams& p, const SeriesPolicy& pol) {
  if (!(x > -2.0 && x < 2.0)) throw DomainError("energy density needs x in (-2,2)");
  const double phi = std::acos(0.5 * x);
  return ac_density(phi, k, l, p, pol) / (2.0 * std::sin(phi));
}

double stieltjes_perron_density(double x, double eps, int k, int l, const BParams& p, const SeriesPolicy& pol) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  const JoukowskiPoint up = JoukowskiPoint::from_mu(Complex(x, eps));
  const JoukowskiPoint down = JoukowskiPoint::from_mu(Complex(x, -eps));
  // G here is the matrix element of (B - mu)^{-1}
  const Complex jump = green_function(k, l, up.z, p, pol) - green_function(k, l, down.z, p, pol);
  return (jump / (2.0 * kPi * kI)).real();
}

double atom_weight(int m, int k, int l, const BParams& p, const SeriesPolicy& pol) {
  require_index(m, p);
  const QBase& q = p.q();
  const double a = p.alpha();
  const double gap = 1.0 - q.power(2.0 * m) / (a * a);
  const double qqv = qq(q, pol);
  Scaled w = Scaled(gap) * Scaled::polar_log(2.0 * m * std::log(std::abs(a)) - 2.0 * tri(m + 1) * q.log() - 2.0 * std::log(qqv), 1.0);
  w *= eigenvector_entry(m, k, p, pol) * eigenvector_entry(m, l, p, pol);
  return w.value().real();
}

BSpectralMeasure spectral_measure_element(int k, int l, const BParams& p, const SeriesPolicy& pol) {
  BSpectralMeasure out;
  out.k = k;
  out.l = l;
  if (!p.is_free()) {
    const int d = p.delta();
    const int floor_m = std::max({k, l, d + 1}) + 2;
    double mass = 0.0;
    int small = 0;
    for (int m = d + 1;; ++m) {
      if (m - d > pol.max_terms) throw NonConvergent("atom series did not settle");
      const double w = atom_weight(m, k, l, p, pol);
      const double loc = p.q().power(m) / p.alpha() + p.alpha() * p.q().power(-m);
      out.atoms.push_back({m, loc, w});
      mass += std::abs(w);
      if (std::abs(w) <= pol.rel_tol * 1e-3 * std::max(mass, pol.abs_floor)) {
        if (++small >= pol.consecutive_small && m >= floor_m) break;
      } else {
        small = 0;
      }
    }
  }
  BParams copy = p;
  SeriesPolicy pc = pol;
  out.ac_density = [copy, pc, k, l](double phi) { return operator_b::ac_density(phi, k, l, copy, pc); };
  return out;
}

bool EnergySet::contains(double x) const {
  if (whole_line) return true;
  return std::any_of(intervals.begin(), intervals.end(),
                     [x](const EnergyInterval& i) { return i.lo <= x && x <= i.hi; });
}

double spectral_measure(int k, int l, const EnergySet& set, const BParams& p, const SeriesPolicy& pol) {
  BSpectralMeasure m = spectral_measure_element(k, l, p, pol);
  double total = 0.0;
  for (const Atom& a : m.atoms) {
    if (set.contains(a.location)) total += a.weight;
  }
  std::vector<EnergyInterval> ranges = set.whole_line ? std::vector<EnergyInterval>{{-2.0, 2.0}} : merged(set.intervals);
  for (const EnergyInterval& r : ranges) {
    const double lo = std::max(r.lo, -2.0);
    const double hi = std::min(r.hi, 2.0);
    if (lo >= hi) continue;
    // x = 2 cos phi is decreasing in phi
    const double a = std::max(std::acos(0.5 * hi), kEndpointInset);
    const double b = std::min(std::acos(0.5 * lo), kPi - kEndpointInset);
    if (a >= b) continue;
    total += integrate(m.ac_density, a, b, kMeasureQuadratureTol, 1e-13).value;
  }
  return total;
}

double qbessel_orthogonality(int m, int n, const BParams& p, const SeriesPolicy& pol) {
  require_index(m, p);
  require_index(n, p);
  const QBase& q = p.q();
  const double xm = q.power(m) / p.alpha();
  const double xn = q.power(n) / p.alpha();
  auto term = [&](int j) {
    return (qkernel::jackson_qbessel3_scaled(j + m, xm, q, pol) * qkernel::jackson_qbessel3_scaled(j + n, xn, q, pol))
        .value();
  };
  SumResult s = sum_bilateral(term, -(m + n) / 2, pol, TailScale::mass, 8);
  const double rhs = m == n ? 1.0 / (1.0 - xm * xm) : 0.0;
  return std::abs(s.value.real() - rhs);
}

double qbessel_square_sum(double x, const QBase& q, const SeriesPolicy& pol) {
  if (!(std::abs(x) < 1.0)) throw DomainError("the square sum needs |x| < 1");
  auto term = [&](int j) { return Complex(std::norm(qkernel::jackson_qbessel3(j, x, q, pol)), 0.0); };
  return sum_bilateral(term, 0, pol, TailScale::partial, 8).value.real();
}

}  // namespace qspectra::operator_b
