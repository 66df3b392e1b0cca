#ifndef CRITMET_ROOTFIND_HPP
#define CRITMET_ROOTFIND_HPP

#include <cmath>
#include <limits>
#include <utility>

#include "critmet/errors.hpp"

namespace critmet {

/// Brent's method on a bracketing interval [a, b] with f(a)*f(b) <= 0.
/// Returns the root to absolute tolerance `tol` in the argument.
template <class F>
double brent_root(F&& f, double a, double b, double tol, int max_iter = 200) {
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (fa * fb > 0.0)
    fail(ErrorCode::numeric_error, "brent_root: interval does not bracket");

  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int iter = 0; iter < max_iter; ++iter) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double eps = std::numeric_limits<double>::epsilon();
    double tol1 = 2.0 * eps * std::abs(b) + 0.5 * tol;
    double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double s = fb / fa, p, q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        double qq = fa / fc, r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
    fb = f(b);
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
  }
  fail(ErrorCode::numeric_error, "brent_root: no convergence");
}

/// Golden-section maximization on [a, b] followed by a few parabolic
/// refinement steps. Assumes a single interior maximum (callers bracket one
/// by a coarse scan first). Returns {argmax, max}.
template <class F>
std::pair<double, double> golden_max(F&& f, double a, double b, double tol,
                                     int max_iter = 400) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
    if (fc > fd) {
      b = d; d = c; fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  double x = 0.5 * (a + b);
  double fx = f(x);
  // one parabolic polish using the last golden triple
  double x1 = c, x2 = x, x3 = d;
  double f1 = fc, f2 = fx, f3 = fd;
  double den = (x2 - x1) * (f2 - f3) - (x2 - x3) * (f2 - f1);
  if (std::abs(den) > 0) {
    double num = (x2 - x1) * (x2 - x1) * (f2 - f3) -
                 (x2 - x3) * (x2 - x3) * (f2 - f1);
    double xp = x2 - 0.5 * num / den;
    if (std::isfinite(xp) && xp > x1 && xp < x3) {
      double fp = f(xp);
      if (fp > fx) { x = xp; fx = fp; }
    }
  }
  return {x, fx};
}

/// Coarse-scan a function on [a, b] with `n` points and return the grid
/// argmax; used to bracket a maximum before golden_max.
template <class F>
double scan_argmax(F&& f, double a, double b, int n) {
  double best_x = a, best_f = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    double x = a + (b - a) * static_cast<double>(i) / n;
    double fx = f(x);
    if (fx > best_f) { best_f = fx; best_x = x; }
  }
  return best_x;
}

}  // namespace critmet

#endif
