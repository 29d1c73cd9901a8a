#pragma once

#include <algorithm>
#include <cmath>

namespace diffint {

struct LineMinimum {
  double x = 0.0;
  double value = 0.0;
  int iterations = 0;
};

/// Golden-section search for a unimodal f on [a, b]. Stops when the bracket
/// is narrower than `x_tol` and the two probe values agree to `f_rel_tol`.
template <typename F>
LineMinimum golden_section_minimize(F&& f, double a, double b, double x_tol, double f_rel_tol = 0.0,
                                    int max_iterations = 500) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  int it = 0;
  for (; it < max_iterations; ++it) {
    const bool x_done = std::abs(b - a) < x_tol;
    const bool f_done = std::abs(fc - fd) <= f_rel_tol * std::abs(std::min(fc, fd));
    if (x_done && f_done) break;
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x), it};
}

}  // namespace diffint
