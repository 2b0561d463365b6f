// Value types shared by the q-kernel and the operator modules.
#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include "qspectra/errors.hpp"

namespace qspectra {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Throws RangeError unless both components are finite.
Complex checked(Complex v, const char* what);

/// Base q of all q-series, 0 < q < 1.
class QBase {
 public:
  explicit QBase(double q);

  double value() const { return q_; }
  double log() const { return log_q_; }
  /// q above the recommended range; series still converge, only slower.
  bool slow() const { return q_ > 0.95; }

  QBase pow(int k) const;
  QBase sqrt() const;
  /// q^e for real e, computed from ln q.
  double power(double e) const { return std::exp(e * log_q_); }

 private:
  double q_;
  double log_q_;
};

/// Truncation contract for every infinite sum and product.
struct SeriesPolicy {
  double rel_tol = 1e-14;
  double abs_floor = 1e-300;
  int max_terms = 10000;
  int consecutive_small = 3;

  void validate() const;
};

/// Self-adjoint extension label t in R or the symbol infinity.
class ExtensionParam {
 public:
  static ExtensionParam finite(double t);
  static ExtensionParam infinity() { return ExtensionParam(); }
  /// Accepts a decimal number or "inf".
  static ExtensionParam parse(const std::string& text);

  bool is_infinite() const { return !value_.has_value(); }
  double value() const;
  std::string to_string() const;

 private:
  ExtensionParam() = default;
  std::optional<double> value_;
};

/// Inclusive integer index range.
struct SpectrumWindow {
  int n_min = 0;
  int n_max = 0;

  SpectrumWindow() = default;
  SpectrumWindow(int lo, int hi);
  int size() const { return n_max - n_min + 1; }
  bool contains(int n) const { return n >= n_min && n <= n_max; }
  /// Parses "a:b".
  static SpectrumWindow parse(const std::string& text);
};

/// z^n by repeated squaring; z = 0 with n < 0 raises DomainError.
Complex ipow(Complex z, int n);
double ipow(double x, int n);

/// n(n-1)/2 as a double without overflow for large |n|.
inline double tri(long n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1); }

}  // namespace qspectra
