// Policy-driven truncation of one-sided and bilateral sums.
#pragma once

#include <cmath>
#include <string>

#include "qspectra/scaled.hpp"
#include "qspectra/types.hpp"

namespace qspectra {

/// What a term is compared against when deciding it is negligible.
enum class TailScale {
  partial,  ///< |partial sum|, the default contract
  mass,     ///< running sum of |terms|, for sums that cancel to zero
};

struct SumResult {
  Complex value{0.0, 0.0};
  double mass = 0.0;  ///< sum of |terms|, an error scale for cancelling sums
  int terms = 0;
  int lowest = 0;     ///< smallest index included
  int highest = 0;    ///< largest index included
};

namespace detail {

struct Direction {
  int next;
  int step;
  int small = 0;
  int taken = 0;
  bool done = false;
};

inline bool negligible(double a, const SumResult& r, const SeriesPolicy& pol, TailScale scale) {
  double ref = scale == TailScale::mass ? r.mass : std::abs(r.value);
  if (scale == TailScale::mass && r.mass == 0.0) return false;
  return a <= pol.rel_tol * std::max(ref, pol.abs_floor);
}

inline void include(SumResult& r, Complex t, int n) {
  if (!std::isfinite(t.real()) || !std::isfinite(t.imag())) throw RangeError("non-finite summand");
  r.value += t;
  r.mass += std::abs(t);
  ++r.terms;
  r.lowest = std::min(r.lowest, n);
  r.highest = std::max(r.highest, n);
}

}  // namespace detail

/// Sums term(start) + term(start + step) + ... until `consecutive_small` terms
/// in a row are negligible, after at least `min_terms` terms.
template <class F>
SumResult sum_one_sided(F&& term, int start, int step, const SeriesPolicy& pol,
                        TailScale scale = TailScale::partial, int min_terms = 4) {
  SumResult r;
  r.lowest = r.highest = start;
  int small = 0;
  for (int i = 0, n = start; i < pol.max_terms; ++i, n += step) {
    Complex t = term(n);
    detail::include(r, t, n);
    if (detail::negligible(std::abs(t), r, pol, scale)) {
      if (++small >= pol.consecutive_small && i + 1 >= min_terms) return r;
    } else {
      small = 0;
    }
  }
  throw NonConvergent("one-sided sum exceeded max_terms");
}

/// Sums term(n) over all integers, walking outward from `center` in both
/// directions; each tail stops on its own consecutive-small rule.
template <class F>
SumResult sum_bilateral(F&& term, int center, const SeriesPolicy& pol,
                        TailScale scale = TailScale::partial, int min_terms = 6) {
  SumResult r;
  r.lowest = r.highest = center;
  detail::include(r, term(center), center);
  detail::Direction dirs[2] = {{center + 1, 1}, {center - 1, -1}};
  int total = 1;
  while (!(dirs[0].done && dirs[1].done)) {
    for (auto& d : dirs) {
      if (d.done) continue;
      Complex t = term(d.next);
      detail::include(r, t, d.next);
      ++d.taken;
      d.next += d.step;
      if (detail::negligible(std::abs(t), r, pol, scale)) {
        if (++d.small >= pol.consecutive_small && d.taken >= min_terms) d.done = true;
      } else {
        d.small = 0;
      }
      if (++total > pol.max_terms) throw NonConvergent("bilateral sum exceeded max_terms");
    }
  }
  return r;
}

}  // namespace qspectra
