#include "qspectra/oracle.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <random>
#include <string>
#include <thread>

namespace qspectra::oracle {
namespace {

void require_window(const SpectrumWindow& w) {
  if (w.size() < 2) throw WindowTooSmall("truncation window needs at least two sites");
}

double pivot_floor(const TridiagonalMatrix& m) {
  double e2 = 1.0;
  for (double e : m.offdiag) e2 = std::max(e2, e * e);
  return DBL_MIN * e2;
}

// Last pivot of the LDL^T factorization of M - lambda; vanishes at eigenvalues.
double last_pivot(const TridiagonalMatrix& m, double lambda, double pivmin) {
  double p = m.diag[0] - lambda;
  for (std::size_t i = 1; i < m.size(); ++i) {
    if (std::abs(p) < pivmin) p = -pivmin;
    p = m.diag[i] - lambda - m.offdiag[i - 1] * m.offdiag[i - 1] / p;
  }
  return p;
}

int count_below(const TridiagonalMatrix& m, double lambda, double pivmin) {
  int c = 0;
  double p = m.diag[0] - lambda;
  for (std::size_t i = 0;;) {
    if (std::abs(p) < pivmin) p = -pivmin;
    if (p < 0.0) ++c;
    if (++i == m.size()) break;
    p = m.diag[i] - lambda - m.offdiag[i - 1] * m.offdiag[i - 1] / p;
  }
  return c;
}

double midpoint(double lo, double hi) {
  // geometric steps when the bracket spans many binades of one sign
  if (lo > 0.0 && hi > 2.0 * lo) return std::sqrt(lo) * std::sqrt(hi);
  if (hi < 0.0 && lo < 2.0 * hi) return -std::sqrt(-lo) * std::sqrt(-hi);
  return lo + 0.5 * (hi - lo);
}

bool converged(double lo, double hi) {
  const double w = hi - lo;
  return w <= 4.0 * DBL_EPSILON * std::max(std::abs(lo), std::abs(hi)) || w <= DBL_MIN;
}

// Eigenvalues with indices [first, last) by shared-bracket bisection.
void bisect_range(const TridiagonalMatrix& m, int first, int last, double norm, double pivmin,
                  std::vector<double>& values, double& max_width) {
  const int n = last - first;
  std::vector<double> lo(static_cast<std::size_t>(n), -norm);
  std::vector<double> hi(static_cast<std::size_t>(n), norm);
  double width = 0.0;
  auto record = [&](double lambda, int c) {
    for (int j = 0; j < n; ++j) {
      if (first + j < c) {
        hi[j] = std::min(hi[j], lambda);
      } else {
        lo[j] = std::max(lo[j], lambda);
      }
    }
  };
  for (int j = 0; j < n; ++j) {
    int it = 0;
    for (; it < kMaxBisections && !converged(lo[j], hi[j]); ++it) {
      const double mid = midpoint(lo[j], hi[j]);
      if (mid <= lo[j] || mid >= hi[j]) break;
      record(mid, count_below(m, mid, pivmin));
    }
    if (hi[j] - lo[j] > 1e-13 * norm) throw ConvergenceFailure("eigenvalue bracket failed to shrink");
    // secant polish on the last pivot, kept only if it stays inside the bracket
    double a = lo[j];
    double b = hi[j];
    double x = 0.5 * (a + b);
    double fa = last_pivot(m, a, pivmin);
    double fb = last_pivot(m, b, pivmin);
    if (std::isfinite(fa) && std::isfinite(fb) && fa != fb && (fa < 0.0) != (fb < 0.0)) {
      const double s = b - fb * (b - a) / (fb - fa);
      if (s > a && s < b) x = s;
    }
    values[static_cast<std::size_t>(first + j)] = x;
    width = std::max(width, hi[j] - lo[j]);
  }
  max_width = width;
}

// Solves (M - lambda) x = b by Gaussian elimination with partial pivoting.
std::vector<double> shifted_solve(const TridiagonalMatrix& m, double lambda, std::vector<double> b, double tiny) {
  const std::size_t n = m.size();
  std::vector<double> d(n), dl(n > 0 ? n - 1 : 0), du(n > 0 ? n - 1 : 0), du2(n > 1 ? n - 2 : 0, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i] = m.diag[i] - lambda;
  for (std::size_t i = 0; i + 1 < n; ++i) dl[i] = du[i] = m.offdiag[i];
  std::vector<char> swapped(n, 0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] == 0.0) d[i] = tiny;
      const double f = dl[i] / d[i];
      dl[i] = f;
      d[i + 1] -= f * du[i];
    } else {
      const double f = d[i] / dl[i];
      d[i] = dl[i];
      dl[i] = f;
      const double t = du[i];
      du[i] = d[i + 1];
      d[i + 1] = t - f * d[i + 1];
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -f * du[i + 1];
      }
      swapped[i] = 1;
    }
  }
  if (d[n - 1] == 0.0) d[n - 1] = tiny;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (swapped[i]) std::swap(b[i], b[i + 1]);
    b[i + 1] -= dl[i] * b[i];
  }
  b[n - 1] /= d[n - 1];
  if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
  for (std::size_t k = n - 2; k-- > 0;) b[k] = (b[k] - du[k] * b[k + 1] - du2[k] * b[k + 2]) / d[k];
  return b;
}

double normalize(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::hypot(s, x);
  if (s == 0.0 || !std::isfinite(s)) return s;
  for (double& x : v) x /= s;
  return s;
}

double residual(const TridiagonalMatrix& m, const std::vector<double>& v, double lambda) {
  std::vector<double> r = m.apply(v);
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s = std::hypot(s, r[i] - lambda * v[i]);
  return s;
}

}  // namespace

double TridiagonalMatrix::norm_bound() const {
  double g = 0.0;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    double r = std::abs(diag[i]);
    if (i > 0) r += std::abs(offdiag[i - 1]);
    if (i + 1 < diag.size()) r += std::abs(offdiag[i]);
    g = std::max(g, r);
  }
  return g;
}

std::vector<double> TridiagonalMatrix::apply(const std::vector<double>& v) const {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double s = diag[i] * v[i];
    if (i > 0) s += offdiag[i - 1] * v[i - 1];
    if (i + 1 < v.size()) s += offdiag[i] * v[i + 1];
    r[i] = s;
  }
  return r;
}

TridiagonalMatrix truncate_a(const QBase& q, const SpectrumWindow& window) {
  require_window(window);
  TridiagonalMatrix m;
  m.index_offset = window.n_min;
  m.diag.assign(static_cast<std::size_t>(window.size()), 0.0);
  for (int n = window.n_min; n < window.n_max; ++n) m.offdiag.push_back(q.power(-n));
  return m;
}

TridiagonalMatrix truncate_b(const operator_b::BParams& p, const SpectrumWindow& window) {
  require_window(window);
  TridiagonalMatrix m;
  m.index_offset = window.n_min;
  for (int n = window.n_min; n <= window.n_max; ++n) m.diag.push_back(p.alpha() * p.q().power(-n));
  m.offdiag.assign(static_cast<std::size_t>(window.size() - 1), 1.0);
  return m;
}

int sturm_count(const TridiagonalMatrix& m, double lambda) { return count_below(m, lambda, pivot_floor(m)); }

unsigned worker_count(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("QSPECTRA_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

EigenDecomposition eigen_tridiag(const TridiagonalMatrix& m, const EigenOptions& opt) {
  const std::size_t n = m.size();
  if (n < 2 || m.offdiag.size() + 1 != n) throw WindowTooSmall("tridiagonal matrix needs L >= 2 and L-1 off-diagonals");
  const double norm = m.norm_bound();
  const double bracket = norm * (1.0 + 1e-12) + DBL_MIN;
  const double pivmin = pivot_floor(m);

  EigenDecomposition out;
  out.seed = opt.seed;
  out.values.assign(n, 0.0);
  const unsigned workers = std::min<unsigned>(worker_count(opt.threads), static_cast<unsigned>(n));
  std::vector<double> widths(workers, 0.0);
  auto chunk = [&](unsigned w) {
    const int first = static_cast<int>(n * w / workers);
    const int last = static_cast<int>(n * (w + 1) / workers);
    bisect_range(m, first, last, bracket, pivmin, out.values, widths[w]);
  };
  if (workers == 1) {
    chunk(0);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          chunk(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::sort(out.values.begin(), out.values.end());
  out.residual_bound = *std::max_element(widths.begin(), widths.end());
  if (!opt.want_vectors) return out;

  const double tiny = DBL_EPSILON * std::max(norm, DBL_MIN);
  const double limit = kResidualFactor * norm;
  std::vector<std::vector<double>> vecs;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lambda = out.values[i];
    // earlier vectors whose eigenvalues are numerically indistinct
    std::size_t cluster = i;
    while (cluster > 0 && out.values[i] - out.values[cluster - 1] <= 1e-7 * std::max(std::abs(lambda), 1e-300)) --cluster;
    std::vector<double> v;
    double res = 0.0;
    for (int attempt = 0; attempt < 2; ++attempt) {
      std::mt19937_64 rng(opt.seed + i + attempt * n);
      std::uniform_real_distribution<double> uni(-1.0, 1.0);
      v.assign(n, 0.0);
      for (double& x : v) x = uni(rng);
      normalize(v);
      for (int it = 0; it < 4; ++it) {
        v = shifted_solve(m, lambda, v, tiny);
        for (std::size_t j = cluster; j < i; ++j) {
          double dot = 0.0;
          for (std::size_t k = 0; k < n; ++k) dot += v[k] * vecs[j][k];
          for (std::size_t k = 0; k < n; ++k) v[k] -= dot * vecs[j][k];
        }
        normalize(v);
      }
      res = residual(m, v, lambda);
      if (std::isfinite(res) && res <= limit) break;
    }
    if (!(std::isfinite(res) && res <= limit)) throw ConvergenceFailure("inverse iteration did not converge");
    worst = std::max(worst, res);
    vecs.push_back(std::move(v));
  }
  out.residual_bound = std::max(out.residual_bound, worst);
  out.vectors = std::move(vecs);
  return out;
}

TailBoundedSum tail_bounded_sum(const std::function<Complex(int)>& term, const std::function<double(int)>& ratio_bound,
                                int start, const SeriesPolicy& pol) {
  pol.validate();
  TailBoundedSum s;
  for (int n = start; s.terms < pol.max_terms; ++n) {
    const Complex t = term(n);
    if (!std::isfinite(std::abs(t))) throw RangeError("non-finite summand");
    s.value += t;
    ++s.terms;
    const double r = ratio_bound(n);
    if (r < 1.0) {
      const double tail = std::abs(t) * r / (1.0 - r);
      if (tail < pol.rel_tol * std::max(std::abs(s.value), pol.abs_floor)) {
        s.bound = tail;
        return s;
      }
    }
  }
  throw NonConvergent("tail bound never certified");
}

TailBoundedSum tail_bounded_bilateral(const std::function<Complex(int)>& term,
                                      const std::function<double(int)>& ratio_up,
                                      const std::function<double(int)>& ratio_down, int center,
                                      const SeriesPolicy& pol) {
  pol.validate();
  TailBoundedSum s;
  s.value = term(center);
  s.terms = 1;
  int up = center;
  int down = center;
  double tail_up = std::numeric_limits<double>::infinity();
  double tail_down = std::numeric_limits<double>::infinity();
  auto certified = [&](double tail) { return tail < pol.rel_tol * std::max(std::abs(s.value), pol.abs_floor); };
  auto bound_at = [](Complex t, double r) {
    return r < 1.0 ? std::abs(t) * r / (1.0 - r) : std::numeric_limits<double>::infinity();
  };
  tail_up = bound_at(s.value, ratio_up(center));
  tail_down = bound_at(s.value, ratio_down(center));
  while (!(certified(tail_up) && certified(tail_down))) {
    if (s.terms >= pol.max_terms) throw NonConvergent("tail bound never certified");
    if (!certified(tail_up)) {
      const Complex t = term(++up);
      if (!std::isfinite(std::abs(t))) throw RangeError("non-finite summand");
      s.value += t;
      ++s.terms;
      tail_up = bound_at(t, ratio_up(up));
    }
    if (!certified(tail_down)) {
      const Complex t = term(--down);
      if (!std::isfinite(std::abs(t))) throw RangeError("non-finite summand");
      s.value += t;
      ++s.terms;
      tail_down = bound_at(t, ratio_down(down));
    }
  }
  s.bound = tail_up + tail_down;
  return s;
}

}  // namespace qspectra::oracle
