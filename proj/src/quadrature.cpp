#include "nematic/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nematic {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  GaussRule r;
  r.x.assign(n, 0.0);
  r.w.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess for the i-th largest root.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.x[n - 1 - i] = x;
    r.x[i] = -x;
    r.w[n - 1 - i] = w;
    r.w[i] = w;
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

namespace {

const GaussRule& rule20() {
  static const GaussRule r = gauss_legendre(20);
  return r;
}

double gl_panel(const std::function<double(double)>& f, double a, double b) {
  const GaussRule& r = rule20();
  double c = 0.5 * (a + b), h = 0.5 * (b - a), s = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(c + h * r.x[i]);
  return s * h;
}

double adapt(const std::function<double(double)>& f, double a, double b, double whole,
             double abs_tol, int depth) {
  double m = 0.5 * (a + b);
  double left = gl_panel(f, a, m), right = gl_panel(f, m, b);
  double diff = std::abs(left + right - whole);
  // The roundoff floor stops the bisection once halves agree to working precision.
  if (depth <= 0 || diff <= abs_tol || diff <= 64.0 * 2.2e-16 * std::abs(left + right)) return left + right;
  return adapt(f, a, m, left, 0.5 * abs_tol, depth - 1) +
         adapt(f, m, b, right, 0.5 * abs_tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, int max_depth) {
  double whole = gl_panel(f, a, b);
  // The one-panel value can badly underestimate a sharply peaked integrand, so
  // the absolute target comes from an 8-panel pass.
  double scale = 0.0, h = (b - a) / 8.0;
  for (int i = 0; i < 8; ++i) scale += gl_panel(f, a + i * h, a + (i + 1) * h);
  return adapt(f, a, b, whole, std::max(std::abs(scale) * rel_tol, 1e-300), max_depth);
}

}  // namespace nematic
