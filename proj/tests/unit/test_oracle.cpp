#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "qspectra/oracle.hpp"
#include "qspectra/qkernel.hpp"

using namespace qspectra;
using namespace qspectra::oracle;

namespace {

const QBase kQ(0.5);

double residual(const TridiagonalMatrix& m, double lambda, const std::vector<double>& v) {
  const std::vector<double> mv = m.apply(v);
  double r = 0.0, n = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    r += (mv[i] - lambda * v[i]) * (mv[i] - lambda * v[i]);
    n += v[i] * v[i];
  }
  return std::sqrt(r / n);
}

}  // namespace

TEST_CASE("truncation of A") {
  const TridiagonalMatrix a = truncate_a(kQ, SpectrumWindow(0, 2));
  CHECK(a.index_offset == 0);
  CHECK(a.diag == std::vector<double>{0.0, 0.0, 0.0});
  REQUIRE(a.offdiag.size() == 2);
  CHECK(a.offdiag[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(a.offdiag[1] == doctest::Approx(2.0).epsilon(1e-15));
  // entry (n, n+1) = q^{-n} for n = -1, 0
  const TridiagonalMatrix b = truncate_a(kQ, SpectrumWindow(-1, 1));
  CHECK(b.index_offset == -1);
  CHECK(b.offdiag[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(b.offdiag[1] == doctest::Approx(1.0).epsilon(1e-15));
  // symmetric by storage: M e_{n+1} has q^{-n} in row n, and M e_n has it in row n+1
  const std::vector<double> e1 = a.apply({0.0, 1.0, 0.0});
  const std::vector<double> e0 = a.apply({1.0, 0.0, 0.0});
  CHECK(e1[0] == e0[1]);
  CHECK_THROWS_AS(truncate_a(kQ, SpectrumWindow(3, 3)), WindowTooSmall);
}

TEST_CASE("truncation of B") {
  const operator_b::BParams p(0.8, kQ);
  const TridiagonalMatrix b = truncate_b(p, SpectrumWindow(-1, 1));
  REQUIRE(b.size() == 3);
  CHECK(b.diag[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(b.diag[1] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(b.diag[2] == doctest::Approx(1.6).epsilon(1e-15));
  CHECK(b.offdiag == std::vector<double>{1.0, 1.0});
  SUBCASE("2x2 closed form") {
    const TridiagonalMatrix m = truncate_b(p, SpectrumWindow(0, 1));
    const double a = m.diag[0], d = m.diag[1];
    const double c = 0.5 * (a + d), r = std::sqrt(0.25 * (a - d) * (a - d) + 1.0);
    const EigenDecomposition ed = eigen_tridiag(m);
    CHECK(std::abs(ed.values[0] - (c - r)) < 1e-15);
    CHECK(std::abs(ed.values[1] - (c + r)) < 1e-15);
  }
  CHECK_THROWS_AS(truncate_b(p, SpectrumWindow(0, 0)), WindowTooSmall);
}

TEST_CASE("eigenvalues") {
  SUBCASE("free operator") {
    const operator_b::BParams free(0.0, kQ);
    const EigenDecomposition ed = eigen_tridiag(truncate_b(free, SpectrumWindow(1, 10)));
    REQUIRE(ed.values.size() == 10);
    for (int k = 1; k <= 10; ++k) CHECK(std::abs(ed.values[10 - k] - 2.0 * std::cos(k * kPi / 11.0)) < 1e-12);
  }
  SUBCASE("B at N = 80 contains 2.225") {
    const EigenDecomposition ed = eigen_tridiag(truncate_b(operator_b::BParams(0.8, kQ), SpectrumWindow(-80, 80)));
    CHECK(std::is_sorted(ed.values.begin(), ed.values.end()));
    const bool found =
        std::any_of(ed.values.begin(), ed.values.end(), [](double v) { return std::abs(v - 2.225) <= 1e-8; });
    CHECK(found);
  }
  SUBCASE("diagonal shift") {
    TridiagonalMatrix m = truncate_b(operator_b::BParams(0.8, kQ), SpectrumWindow(-20, 10));
    const EigenDecomposition a = eigen_tridiag(m);
    for (double& d : m.diag) d += 0.37;
    const EigenDecomposition b = eigen_tridiag(m);
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(std::abs(b.values[i] - a.values[i] - 0.37) < 1e-12);
  }
  SUBCASE("relative accuracy across many binades") {
    // A on a window has eigenvalues spread over q^{+-40}; the small ones are kept to full relative precision
    const EigenDecomposition ed = eigen_tridiag(truncate_a(kQ, SpectrumWindow(-40, 40)));
    int small = 0;
    for (double v : ed.values) {
      const double a = std::abs(v);
      if (a > 1e-8 && a < 1e-4) {
        const double j = std::round(std::log(a) / kQ.log());
        CHECK(std::abs(a - kQ.power(j)) <= 1e-10 * a);
        ++small;
      }
    }
    CHECK(small > 0);
  }
}

TEST_CASE("Sturm counts") {
  const TridiagonalMatrix m = truncate_b(operator_b::BParams(0.8, kQ), SpectrumWindow(-15, 15));
  const double nb = m.norm_bound();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uni(-nb, nb);
  std::vector<double> pivots(20);
  for (double& x : pivots) x = uni(rng);
  std::sort(pivots.begin(), pivots.end());
  int prev = 0;
  for (double x : pivots) {
    const int c = sturm_count(m, x);
    CHECK(c >= prev);
    prev = c;
  }
  CHECK(sturm_count(m, nb + 1.0) == static_cast<int>(m.size()));
  CHECK(sturm_count(m, -nb - 1.0) == 0);
  const EigenDecomposition ed = eigen_tridiag(m);
  for (std::size_t i = 0; i < ed.values.size(); ++i) {
    const double v = ed.values[i];
    const double h = 1e-9 * std::max(1.0, std::abs(v));
    CHECK(sturm_count(m, v - h) <= static_cast<int>(i));
    CHECK(sturm_count(m, v + h) >= static_cast<int>(i) + 1);
  }
}

TEST_CASE("interlacing of nested truncations") {
  const operator_b::BParams p(0.8, kQ);
  const std::vector<double> a = eigen_tridiag(truncate_b(p, SpectrumWindow(-20, 20))).values;
  const std::vector<double> b = eigen_tridiag(truncate_b(p, SpectrumWindow(-21, 21))).values;
  REQUIRE(b.size() == a.size() + 2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double tol = 1e-12 * std::max(1.0, std::abs(a[i]));
    CHECK(b[i] <= a[i] + tol);
    CHECK(a[i] <= b[i + 2] + tol);
  }
}

TEST_CASE("eigenvectors") {
  EigenOptions opt;
  opt.want_vectors = true;
  for (double alpha : {0.0, 0.8, -1.3}) {
    const TridiagonalMatrix m = truncate_b(operator_b::BParams(alpha, kQ), SpectrumWindow(-30, 30));
    const EigenDecomposition ed = eigen_tridiag(m, opt);
    REQUIRE(ed.vectors.has_value());
    CHECK(ed.seed == opt.seed);
    CHECK(ed.residual_bound <= kResidualFactor * m.norm_bound());
    for (std::size_t i = 0; i < ed.values.size(); ++i) {
      CHECK(residual(m, ed.values[i], (*ed.vectors)[i]) <= ed.residual_bound);
    }
  }
  SUBCASE("orthogonality for the free operator") {
    const TridiagonalMatrix m = truncate_b(operator_b::BParams(0.0, kQ), SpectrumWindow(0, 39));
    const EigenDecomposition ed = eigen_tridiag(m, opt);
    const auto& v = *ed.vectors;
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t j = i; j < v.size(); ++j) {
        double d = 0.0;
        for (std::size_t k = 0; k < v[i].size(); ++k) d += v[i][k] * v[j][k];
        CHECK(std::abs(d - (i == j ? 1.0 : 0.0)) < 1e-10);
      }
    }
  }
  SUBCASE("deterministic across worker counts") {
    const TridiagonalMatrix m = truncate_b(operator_b::BParams(0.8, kQ), SpectrumWindow(-40, 40));
    EigenOptions one = opt, four = opt;
    one.threads = 1;
    four.threads = 4;
    const EigenDecomposition a = eigen_tridiag(m, one);
    const EigenDecomposition b = eigen_tridiag(m, four);
    CHECK(a.values == b.values);
    CHECK(*a.vectors == *b.vectors);
  }
  CHECK(worker_count(3) == 3);
  CHECK(worker_count(0) >= 1);
}

TEST_CASE("tail-bounded sums") {
  SUBCASE("geometric series") {
    const TailBoundedSum s =
        tail_bounded_sum([](int n) { return Complex(std::pow(0.5, n), 0.0); }, [](int) { return 0.5; }, 0);
    CHECK(std::abs(s.value - 2.0) < 1e-13);
    CHECK(s.bound < 1e-13);
    CHECK(std::abs(s.value - 2.0) <= s.bound + 1e-15);
  }
  SUBCASE("ratio bound above one at first") {
    double fact = 1.0;
    std::vector<double> terms;
    for (int n = 0; n < 60; ++n) {
      terms.push_back(std::pow(3.0, n) / fact);
      fact *= n + 1;
    }
    const TailBoundedSum s = tail_bounded_sum([&](int n) { return Complex(terms.at(n), 0.0); },
                                              [](int n) { return 3.0 / (n + 1.0); }, 0);
    CHECK(std::abs(s.value - std::exp(3.0)) < 1e-13 * std::exp(3.0));
  }
  SUBCASE("bilateral theta sum matches the product") {
    const double x = 0.7;
    auto term = [&](int n) { return Complex(std::exp(tri(n) * kQ.log()) * ipow(-x, n), 0.0); };
    auto up = [&](int n) { return kQ.power(n) * x; };
    auto down = [&](int n) { return kQ.power(1.0 - n) / x; };
    const TailBoundedSum s = tail_bounded_bilateral(term, up, down, 0);
    const Complex theta = s.value / qkernel::qpochhammer_inf(kQ.value(), kQ);
    CHECK(std::abs(theta - qkernel::theta(x, kQ)) < 1e-14);
  }
  SUBCASE("constant term never converges") {
    CHECK_THROWS_AS(tail_bounded_sum([](int) { return Complex(1.0, 0.0); }, [](int) { return 1.0; }, 0),
                    NonConvergent);
  }
}
