// Brute-force reference machinery: finite truncations of the operators, a
// Sturm-bisection tridiagonal eigensolver and tail-bounded summation.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qspectra/operator_b.hpp"
#include "qspectra/types.hpp"

namespace qspectra::oracle {

/// Symmetric tridiagonal matrix over the lattice indices index_offset, ..., index_offset + L - 1.
struct TridiagonalMatrix {
  std::vector<double> diag;
  std::vector<double> offdiag;
  int index_offset = 0;

  std::size_t size() const { return diag.size(); }
  /// Gershgorin bound on the spectral radius.
  double norm_bound() const;
  /// (M v)_i
  std::vector<double> apply(const std::vector<double>& v) const;
};

/// Entry (n, n+1) = q^{-n}; Dirichlet cut-off outside the window.
TridiagonalMatrix truncate_a(const QBase& q, const SpectrumWindow& window);
/// Diagonal alpha q^{-n}, unit off-diagonal.
TridiagonalMatrix truncate_b(const operator_b::BParams& p, const SpectrumWindow& window);

/// Number of eigenvalues strictly below lambda.
int sturm_count(const TridiagonalMatrix& m, double lambda);

struct EigenOptions {
  bool want_vectors = false;
  std::uint64_t seed = 0x5eed5eedULL;
  /// Worker cap; 0 reads QSPECTRA_THREADS, falling back to the hardware count.
  unsigned threads = 0;
};

struct EigenDecomposition {
  std::vector<double> values;                              ///< ascending
  std::optional<std::vector<std::vector<double>>> vectors;  ///< unit eigenvectors, one per value
  double residual_bound = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr int kMaxBisections = 200;
inline constexpr double kResidualFactor = 1e-10;

EigenDecomposition eigen_tridiag(const TridiagonalMatrix& m, const EigenOptions& opt = {});

/// Worker count after applying QSPECTRA_THREADS.
unsigned worker_count(unsigned requested);

struct TailBoundedSum {
  Complex value{0.0, 0.0};
  double bound = 0.0;  ///< certified bound on the omitted tail(s)
  int terms = 0;
};

/// sum_{n >= start} term(n); ratio_bound(n) must bound |term(k+1)/term(k)| for all k >= n.
TailBoundedSum tail_bounded_sum(const std::function<Complex(int)>& term, const std::function<double(int)>& ratio_bound,
                                int start, const SeriesPolicy& pol = {});

/// sum over all integers; ratio_up(n) bounds |term(k+1)/term(k)| for k >= n and
/// ratio_down(n) bounds |term(k-1)/term(k)| for k <= n.
TailBoundedSum tail_bounded_bilateral(const std::function<Complex(int)>& term,
                                      const std::function<double(int)>& ratio_up,
                                      const std::function<double(int)>& ratio_down, int center,
                                      const SeriesPolicy& pol = {});

}  // namespace qspectra::oracle
