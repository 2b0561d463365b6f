#include "qspectra/types.hpp"

#include <charconv>
#include <sstream>

namespace qspectra {

Complex checked(Complex v, const char* what) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
    throw RangeError(std::string("non-finite value in ") + what);
  }
  return v;
}

QBase::QBase(double q) : q_(q), log_q_(0.0) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0,1)");
  log_q_ = std::log(q);
}

QBase QBase::pow(int k) const {
  if (k <= 0) throw DomainError("q^k needs k >= 1 to remain a base");
  return QBase(std::exp(k * log_q_));
}

QBase QBase::sqrt() const { return QBase(std::sqrt(q_)); }

void SeriesPolicy::validate() const {
  if (!(rel_tol > 0.0)) throw DomainError("rel_tol must be positive");
  if (max_terms < 8) throw DomainError("max_terms must be at least 8");
  if (consecutive_small < 1) throw DomainError("consecutive_small must be at least 1");
}

ExtensionParam ExtensionParam::finite(double t) {
  if (!std::isfinite(t)) throw DomainError("finite extension parameter must be finite");
  ExtensionParam e;
  e.value_ = t;
  return e;
}

ExtensionParam ExtensionParam::parse(const std::string& text) {
  if (text == "inf" || text == "+inf" || text == "infinity") return infinity();
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw DomainError("cannot parse extension parameter '" + text + "'");
  }
  return finite(v);
}

double ExtensionParam::value() const {
  if (!value_) throw DomainError("extension parameter is infinite");
  return *value_;
}

std::string ExtensionParam::to_string() const {
  if (!value_) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << *value_;
  return os.str();
}

SpectrumWindow::SpectrumWindow(int lo, int hi) : n_min(lo), n_max(hi) {
  if (lo > hi) throw DomainError("window needs n_min <= n_max");
}

SpectrumWindow SpectrumWindow::parse(const std::string& text) {
  auto colon = text.find(':', text.size() > 0 && text[0] == '-' ? 1 : 0);
  if (colon == std::string::npos) throw DomainError("window must be written a:b");
  int lo = 0, hi = 0;
  auto a = std::from_chars(text.data(), text.data() + colon, lo);
  auto b = std::from_chars(text.data() + colon + 1, text.data() + text.size(), hi);
  if (a.ec != std::errc() || b.ec != std::errc() || a.ptr != text.data() + colon ||
      b.ptr != text.data() + text.size()) {
    throw DomainError("cannot parse window '" + text + "'");
  }
  return SpectrumWindow(lo, hi);
}

Complex ipow(Complex z, int n) {
  if (n < 0) {
    if (z == Complex(0.0, 0.0)) throw DomainError("zero raised to a negative power");
    return 1.0 / ipow(z, -n);
  }
  Complex result(1.0, 0.0);
  Complex base = z;
  unsigned m = static_cast<unsigned>(n);
  while (m) {
    if (m & 1u) result *= base;
    base *= base;
    m >>= 1u;
  }
  return result;
}

double ipow(double x, int n) { return ipow(Complex(x, 0.0), n).real(); }

}  // namespace qspectra
