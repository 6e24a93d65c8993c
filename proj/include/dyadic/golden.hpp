#pragma once

#include <cmath>
#include <utility>

namespace dyadic {

struct LineMinimum {
  double argument = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

/// Golden-section search for the minimum of a unimodal `fn` on [lo, hi].
/// Stops once the bracket is narrower than `tol` or after `max_evaluations`.
template <class Fn>
LineMinimum golden_section_minimize(Fn&& fn, double lo, double hi, double tol, int max_evaluations = 400) {
  constexpr double kInvPhi = 0.6180339887498948482;  // (sqrt 5 - 1) / 2
  double c = hi - kInvPhi * (hi - lo);
  double d = lo + kInvPhi * (hi - lo);
  double fc = fn(c);
  double fd = fn(d);
  int evaluations = 2;
  while (hi - lo > tol && evaluations < max_evaluations) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = fn(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = fn(d);
    }
    ++evaluations;
  }
  return fc <= fd ? LineMinimum{c, fc, evaluations} : LineMinimum{d, fd, evaluations};
}

}  // namespace dyadic
