#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "qspectra/qkernel.hpp"
#include "qspectra/summation.hpp"

using namespace qspectra;
using namespace qspectra::qkernel;

namespace {

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("QBase rejects values outside (0,1) and flags slow bases") {
  CHECK_THROWS_AS(QBase(0.0), DomainError);
  CHECK_THROWS_AS(QBase(1.0), DomainError);
  CHECK_THROWS_AS(QBase(-0.3), DomainError);
  CHECK_FALSE(QBase(0.5).slow());
  CHECK(QBase(0.97).slow());
}

TEST_CASE("SeriesPolicy validation") {
  SeriesPolicy p;
  CHECK_NOTHROW(p.validate());
  p.rel_tol = 0.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = SeriesPolicy{};
  p.max_terms = 4;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = SeriesPolicy{};
  p.consecutive_small = 0;
  CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("finite q-Pochhammer symbol") {
  const QBase q(0.5);
  CHECK(qpochhammer_finite(Complex(3.7, 1.0), q, 0) == Complex(1.0, 0.0));
  CHECK(std::abs(qpochhammer_finite(0.5, q, 2) - 0.375) < 1e-15);
  CHECK(qpochhammer_finite(1.0, QBase(0.3), 4) == Complex(0.0, 0.0));
}

TEST_CASE("infinite q-Pochhammer symbol") {
  const QBase q(0.5);
  CHECK(qpochhammer_inf(0.0, q) == Complex(1.0, 0.0));
  for (int k = 0; k >= -4; --k) CHECK(qpochhammer_inf(std::pow(0.5, k), q) == Complex(0.0, 0.0));
  double log_sum = 0.0;
  for (int j = 0; j < 512; ++j) log_sum += std::log1p(-std::pow(0.5, j + 1));
  CHECK(std::abs(qpochhammer_inf(0.5, q).real() - std::exp(log_sum)) < 1e-13);
  CHECK(std::abs(qpochhammer_inf_scaled(0.5, q).value().real() - std::exp(log_sum)) < 1e-13);
}

TEST_CASE("theta function") {
  const QBase q(0.5);
  SUBCASE("zeros at integer powers of q") {
    for (int k = -3; k <= 3; ++k) CHECK(std::abs(theta(std::pow(0.5, k), q)) == 0.0);
  }
  SUBCASE("x = 0 is rejected") { CHECK_THROWS_AS(theta(0.0, q), DomainError); }
  SUBCASE("product and bilateral sum agree at x = -1") {
    CHECK(rel(theta(-1.0, q, ThetaMethod::bilateral_sum), theta(-1.0, q)) < 1e-13);
  }
  SUBCASE("triple product on random samples in the annulus") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (double qv : {0.3, 0.5, 0.8}) {
      const QBase qb(qv);
      for (int i = 0; i < 50; ++i) {
        const Complex x = std::polar(0.1 + 2.9 * uni(rng), 2.0 * kPi * uni(rng));
        const Complex a = theta(x, qb);
        const Complex b = theta(x, qb, ThetaMethod::bilateral_sum);
        CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)));
      }
    }
  }
  SUBCASE("quasi-periodicity and reciprocal argument") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (double qv : {0.3, 0.5, 0.8}) {
      const QBase qb(qv);
      for (int i = 0; i < 20; ++i) {
        const Complex x = std::polar(0.1 + 2.9 * uni(rng), 2.0 * kPi * uni(rng));
        const Complex tx = theta(x, qb);
        for (int k = -4; k <= 4; ++k) {
          const Complex lhs = theta(std::pow(qv, k) * x, qb);
          const Complex rhs = std::pow(-1.0, k) * ipow(x, -k) * std::pow(qv, -tri(k)) * tx;
          CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
        }
        CHECK(std::abs(tx + x * theta(1.0 / x, qb)) <= 1e-12 * (1.0 + std::abs(tx)));
      }
    }
  }
  SUBCASE("scaled evaluation far outside the annulus") {
    const Complex x(0.7, 0.2);
    const int k = -40;
    const Scaled lhs = theta_scaled(std::pow(0.5, k) * x, q);
    const Scaled rhs = Scaled(std::pow(-1.0, k)) * ipow_scaled(x, -k) * qpow_scaled(q, -tri(k)) * Scaled(theta(x, q));
    CHECK(std::abs(lhs.log_abs() - rhs.log_abs()) < 1e-12 * std::abs(rhs.log_abs()));
    CHECK(std::abs(lhs.phase() - rhs.phase()) < 1e-10);
  }
}

TEST_CASE("1phi1 series") {
  const QBase q(0.5);
  CHECK(phi11(0.3, q, 0.0) == Complex(1.0, 0.0));
  CHECK(rel(qpochhammer_inf(0.3, q) * phi11(0.3, q, 0.2), phi11_reg(0.3, q, 0.2)) < 1e-13);
  SUBCASE("three-term hand sum at a small argument") {
    const double b = -0.5;
    const double z = 1e-5;
    const double t1 = -z / ((1.0 - 0.5) * (1.0 - b));
    const double t2 = 0.5 * z * z / ((1.0 - 0.5) * (1.0 - 0.25) * (1.0 - b) * (1.0 - b * 0.5));
    CHECK(std::abs(phi11(b, q, z) - (1.0 + t1 + t2)) < 1e-12);
  }
  SUBCASE("poles of the lower parameter") {
    CHECK_THROWS_AS(phi11(1.0, q, 0.3), DomainError);
    CHECK_THROWS_AS(phi11(4.0, q, 0.3), DomainError);
  }
}

TEST_CASE("regularized 1phi1") {
  const QBase q(0.5);
  CHECK(rel(phi11_reg(0.3, q, 0.0), qpochhammer_inf(0.3, q)) < 1e-15);
  CHECK(rel(phi11_reg(0.7, q, 0.2), phi11_reg(0.2, q, 0.7)) < 1e-13);
  SUBCASE("finite at b = q^{-2}, matching the limit along b = q^{-2}(1 + eps)") {
    const Complex exact = phi11_reg(4.0, q, 0.3);
    // Richardson extrapolation of the regularized value along the approach
    const double e = 1e-6;
    const Complex a1 = phi11_reg(4.0 * (1.0 + e), q, 0.3);
    const Complex a2 = phi11_reg(4.0 * (1.0 + 0.5 * e), q, 0.3);
    const Complex limit = 2.0 * a2 - a1;
    CHECK(std::isfinite(exact.real()));
    CHECK(std::abs(exact - limit) < 1e-9);
    CHECK(std::abs(exact.real() - (-0.0027388264983159967)) < 1e-15);
  }
  SUBCASE("random parameter-argument symmetry") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-1.5, 1.5);
    for (int i = 0; i < 20; ++i) {
      const Complex a(uni(rng), uni(rng));
      const Complex z(uni(rng), uni(rng));
      CHECK(std::abs(phi11_reg(a, q, z) - phi11_reg(z, q, a)) < 1e-12 * (1.0 + std::abs(phi11_reg(a, q, z))));
    }
  }
}

TEST_CASE("0phi1 and the Ramanujan entire function") {
  const QBase q(0.5);
  CHECK(phi01(q, 0.0) == Complex(1.0, 0.0));
  CHECK(ramanujan_entire(0.0, q) == Complex(1.0, 0.0));
  SUBCASE("four-term partial sum of 0phi1 at z = 0.1") {
    // terms q^{k(k-1)} z^k / (q;q)_k
    double s = 0.0;
    double den = 1.0;
    for (int k = 0; k < 4; ++k) {
      if (k > 0) den *= 1.0 - std::pow(0.5, k);
      s += std::pow(0.5, k * (k - 1)) * std::pow(0.1, k) / den;
    }
    // four terms leave the fifth (about 8e-8) as truncation error
    const double fifth = std::pow(0.5, 12) * std::pow(0.1, 4) / (den * (1.0 - std::pow(0.5, 4)));
    CHECK(std::abs(phi01(q, 0.1).real() - s) < 1.01 * fifth);
    double longer = s;
    for (int k = 4; k < 12; ++k) {
      den *= 1.0 - std::pow(0.5, k);
      longer += std::pow(0.5, k * (k - 1)) * std::pow(0.1, k) / den;
    }
    CHECK(std::abs(phi01(q, 0.1).real() - longer) < 1e-15);
  }
  SUBCASE("six-term partial sum of A_{1/4}(1)") {
    const double qq = 0.25;
    double s = 0.0;
    double den = 1.0;
    for (int k = 0; k < 6; ++k) {
      if (k > 0) den *= 1.0 - std::pow(qq, k);
      s += std::pow(qq, k * (k - 1)) * std::pow(-qq, k) / den;
    }
    CHECK(std::abs(ramanujan_entire(1.0, QBase(qq)).real() - s) < 1e-12);
  }
  SUBCASE("large argument matches a 50-digit reference") {
    const Complex v = ramanujan_entire(3000.0, QBase(0.25));
    CHECK(std::abs(v.real() - (-72766.963374917472303)) < 1e-12 * 72766.96);
    CHECK(std::abs(v.imag()) < 1e-12 * std::abs(v));
  }
  SUBCASE("connection formula with 1phi1") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
      const Complex x = std::polar(0.2 + 3.0 * uni(rng), 2.0 * kPi * uni(rng));
      const Complex lhs = qpochhammer_inf(-1.0, q) * phi01(QBase(0.25), std::pow(0.5, 5) / (x * x));
      const Complex rhs = theta(-x / 0.5, q) * phi11(-0.5, q, x) + theta(x / 0.5, q) * phi11(-0.5, q, -x);
      CHECK(std::abs(lhs - rhs) <= 1e-11 * (1.0 + std::abs(lhs)));
    }
  }
}

TEST_CASE("third Jackson q-Bessel function") {
  const QBase q(0.5);
  CHECK(jackson_qbessel3(0, 0.0, q) == Complex(1.0, 0.0));
  for (int n = 1; n <= 3; ++n) CHECK(jackson_qbessel3(n, 0.0, q) == Complex(0.0, 0.0));
  SUBCASE("reflection of the order") {
    const int n = 2;
    const double z = 0.3;
    const Complex rhs = std::pow(-1.0, n) * std::pow(0.5, -0.5 * n) * jackson_qbessel3(-n, z * std::pow(0.5, -0.5 * n), q);
    CHECK(rel(jackson_qbessel3(n, z, q), rhs) < 1e-12);
  }
  SUBCASE("square sum over |j| <= 60") {
    double s = 0.0;
    for (int j = -60; j <= 60; ++j) s += std::norm(jackson_qbessel3(j, 0.5, q));
    CHECK(std::abs(s - 1.0 / 0.75) < 1e-12);
  }
}

TEST_CASE("xi function") {
  const QBase q(0.5);
  const double sq = std::sqrt(0.5);
  SUBCASE("closed form at z = 1") {
    const Complex qq = qpochhammer_inf(0.5, q);
    const Complex qh = qpochhammer_inf(sq, q);
    const Complex expect = qq * qq / (qh * qh) * theta(-1.0, q) / theta(-1.0 / sq, q);
    CHECK(rel(xi(1.0, q, XiMethod::closed_form), expect) < 1e-13);
  }
  CHECK(rel(xi(1.0, q, XiMethod::mittag_leffler), xi(1.0, q, XiMethod::laurent)) < 1e-12);
  CHECK_THROWS_AS(xi(-sq, q, XiMethod::mittag_leffler), DomainError);
  CHECK_THROWS_AS(xi(-sq, q, XiMethod::closed_form), DomainError);
  CHECK_THROWS_AS(xi(0.0, q, XiMethod::closed_form), DomainError);
  CHECK_THROWS_AS(xi(3.0, q, XiMethod::laurent), DomainError);
  SUBCASE("methods agree on the annulus and beyond it") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
      const Complex z = std::polar(sq + (1.0 / sq - sq) * (0.05 + 0.9 * uni(rng)), 2.0 * kPi * uni(rng));
      const Complex ml = xi(z, q, XiMethod::mittag_leffler);
      CHECK(rel(xi(z, q, XiMethod::laurent), ml) < 1e-11);
      CHECK(rel(xi(z, q, XiMethod::closed_form), ml) < 1e-11);
    }
    for (double r : {0.05, 0.2, 2.0, 9.0}) {
      const Complex z = std::polar(r, 0.4);
      CHECK(rel(xi(z, q, XiMethod::closed_form), xi(z, q, XiMethod::mittag_leffler)) < 1e-11);
    }
  }
}

TEST_CASE("Jacobi theta functions") {
  const QBase q(0.5);
  const ThetaFour t = jacobi_thetas(0.0, q);
  CHECK(std::abs(t.v1) == 0.0);
  const Complex expect3 = qpochhammer_inf(0.25, QBase(0.25)) * theta(-0.5, QBase(0.25));
  CHECK(rel(t.v3, expect3) < 1e-14);
  SUBCASE("modulus relation k^2 + k'^2 = 1 at q = 0.25") {
    const ThetaFour u = jacobi_thetas(0.0, QBase(0.25));
    const Complex k = u.v2 * u.v2 / (u.v3 * u.v3);
    const Complex kp = u.v4 * u.v4 / (u.v3 * u.v3);
    CHECK(std::abs(k * k + kp * kp - 1.0) < 1e-13);
  }
  SUBCASE("series forms of the four thetas") {
    const Complex z(0.3, 0.1);
    const ThetaFour v = jacobi_thetas(z, q);
    Complex s1(0.0), s2(0.0), s3(0.0), s4(0.0);
    for (int n = -30; n <= 30; ++n) {
      const double h = n + 0.5;
      s1 += std::pow(-1.0, n) * std::pow(0.5, h * h) * std::sin((2.0 * n + 1.0) * z) * (n >= 0 ? 2.0 : 0.0);
      s2 += std::pow(0.5, h * h) * std::cos((2.0 * n + 1.0) * z);
      s3 += std::pow(0.5, n * n) * std::cos(2.0 * n * z);
      s4 += std::pow(-1.0, n) * std::pow(0.5, n * n) * std::cos(2.0 * n * z);
    }
    CHECK(rel(v.v1, s1) < 1e-13);
    CHECK(rel(v.v2, s2) < 1e-13);
    CHECK(rel(v.v3, s3) < 1e-13);
    CHECK(rel(v.v4, s4) < 1e-13);
  }
}

TEST_CASE("evaluators are pure") {
  const QBase q(0.5);
  const Complex x(0.37, -1.2);
  CHECK(theta(x, q) == theta(x, q));
  CHECK(phi11_reg(x, q, 0.4) == phi11_reg(x, q, 0.4));
  CHECK(xi(x, q, XiMethod::closed_form) == xi(x, q, XiMethod::closed_form));
}

TEST_CASE("summation engine") {
  SeriesPolicy pol;
  SUBCASE("geometric series") {
    auto r = sum_one_sided([](int n) { return Complex(std::pow(0.5, n)); }, 0, 1, pol);
    CHECK(std::abs(r.value.real() - 2.0) < 1e-13);
  }
  SUBCASE("non-convergent sum hits the term budget") {
    CHECK_THROWS_AS(sum_one_sided([](int) { return Complex(1.0); }, 0, 1, pol), NonConvergent);
  }
  SUBCASE("bilateral Gaussian sum") {
    auto r = sum_bilateral([](int n) { return Complex(std::pow(0.5, n * n)); }, 0, pol);
    CHECK(std::abs(r.value.real() - (1.0 + 2.0 * (0.5 + std::pow(0.5, 4) + std::pow(0.5, 9) + std::pow(0.5, 16) +
                                              std::pow(0.5, 25) + std::pow(0.5, 36) + std::pow(0.5, 49)))) < 1e-14);
  }
  SUBCASE("non-finite summands are reported") {
    CHECK_THROWS_AS(sum_one_sided([](int) { return Complex(NAN); }, 0, 1, pol), RangeError);
  }
}

TEST_CASE("scaled arithmetic") {
  const Scaled big = Scaled::polar_log(800.0, 1.0);
  const Scaled small = Scaled::polar_log(-800.0, 1.0);
  CHECK(std::abs((big * small).value().real() - 1.0) < 1e-12);
  CHECK_THROWS_AS(big.value(), RangeError);
  CHECK(small.value() == Complex(0.0, 0.0));
  CHECK(std::abs((Scaled(3.0) + Scaled(-1.0)).value().real() - 2.0) < 1e-15);
  CHECK_THROWS_AS(Scaled(1.0) / Scaled(), DomainError);
  CHECK(std::abs(ipow_scaled(Complex(0.0, 2.0), 3).value() - Complex(0.0, -8.0)) < 1e-14);
}
