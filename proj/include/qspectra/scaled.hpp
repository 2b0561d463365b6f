// Complex numbers carried as unit phase times exp(log magnitude).
//
// Theta functions at extreme arguments and the q^{n(n-1)/2} prefactors of the
// operator solutions overflow or underflow doubles long before their products
// do; the arithmetic here keeps the exponent separately.
#pragma once

#include <cmath>
#include <limits>

#include "qspectra/types.hpp"

namespace qspectra {

class Scaled {
 public:
  Scaled() = default;
  explicit Scaled(Complex v) { assign(v, 0.0); }
  Scaled(double v) : Scaled(Complex(v, 0.0)) {}  // NOLINT(google-explicit-constructor)

  /// Value exp(log_abs) * phase; phase need not be normalized.
  static Scaled polar_log(double log_abs, Complex phase) {
    Scaled s;
    s.assign(phase, log_abs);
    return s;
  }

  bool is_zero() const { return phase_ == Complex(0.0, 0.0); }
  Complex phase() const { return phase_; }
  /// ln|value|, -inf for zero.
  double log_abs() const { return is_zero() ? -std::numeric_limits<double>::infinity() : log_; }

  /// Converts to a double; underflow gives 0, overflow raises RangeError.
  Complex value() const {
    if (is_zero()) return {0.0, 0.0};
    if (log_ > 709.0) throw RangeError("value exceeds double range");
    if (log_ < -745.0) return {0.0, 0.0};
    return phase_ * std::exp(log_);
  }

  Scaled& operator*=(const Scaled& o) {
    if (is_zero() || o.is_zero()) {
      *this = Scaled();
      return *this;
    }
    assign(phase_ * o.phase_, log_ + o.log_);
    return *this;
  }
  Scaled& operator/=(const Scaled& o) {
    if (o.is_zero()) throw DomainError("division by zero");
    if (is_zero()) return *this;
    assign(phase_ / o.phase_, log_ - o.log_);
    return *this;
  }
  Scaled& operator+=(const Scaled& o) {
    if (o.is_zero()) return *this;
    if (is_zero()) {
      *this = o;
      return *this;
    }
    if (log_ >= o.log_) {
      assign(phase_ + o.phase_ * std::exp(o.log_ - log_), log_);
    } else {
      assign(o.phase_ + phase_ * std::exp(log_ - o.log_), o.log_);
    }
    return *this;
  }
  Scaled operator-() const {
    Scaled s = *this;
    s.phase_ = -s.phase_;
    return s;
  }
  Scaled& operator-=(const Scaled& o) { return *this += -o; }

  friend Scaled operator*(Scaled a, const Scaled& b) { return a *= b; }
  friend Scaled operator/(Scaled a, const Scaled& b) { return a /= b; }
  friend Scaled operator+(Scaled a, const Scaled& b) { return a += b; }
  friend Scaled operator-(Scaled a, const Scaled& b) { return a -= b; }

 private:
  void assign(Complex m, double extra_log) {
    double a = std::abs(m);
    if (a == 0.0 || !std::isfinite(a)) {
      if (!std::isfinite(a)) throw RangeError("non-finite scaled mantissa");
      phase_ = {0.0, 0.0};
      log_ = 0.0;
      return;
    }
    phase_ = m / a;
    log_ = extra_log + std::log(a);
  }

  Complex phase_{0.0, 0.0};
  double log_ = 0.0;
};

/// q^{e} for real exponent, as a Scaled positive number.
inline Scaled qpow_scaled(const QBase& q, double e) { return Scaled::polar_log(e * q.log(), {1.0, 0.0}); }

/// z^n for integer n without overflow.
inline Scaled ipow_scaled(Complex z, long n) {
  if (n == 0) return Scaled(1.0);
  double a = std::abs(z);
  if (a == 0.0) {
    if (n < 0) throw DomainError("zero raised to a negative power");
    return Scaled();
  }
  return Scaled::polar_log(static_cast<double>(n) * std::log(a), ipow(z / a, static_cast<int>(n)));
}

}  // namespace qspectra
