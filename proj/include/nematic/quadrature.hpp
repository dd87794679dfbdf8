#pragma once

#include <functional>
#include <vector>

namespace nematic {

struct GaussRule {
  std::vector<double> x;  // increasing in (-1, 1)
  std::vector<double> w;
};

GaussRule gauss_legendre(int n);

// Adaptive Gauss-Legendre on [a, b]: bisect until the 20-point rule on an
// interval agrees with the sum over its halves.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-14, int max_depth = 40);

}  // namespace nematic
