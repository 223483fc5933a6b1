#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace gravae {

// Compares an analytic gradient against central finite differences of a
// scalar function. Returns the worst relative error
// |g_a - g_fd| / max(1, |g_a|, |g_fd|) over all coordinates.
inline double grad_check(const std::function<double(const std::vector<double>&)>& f,
                         const std::vector<double>& x0,
                         const std::vector<double>& analytic,
                         double eps = 1e-6) {
  if (x0.size() != analytic.size())
    throw std::invalid_argument("grad_check: gradient size mismatch");
  std::vector<double> x = x0;
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double orig = x[i];
    x[i] = orig + eps;
    double fp = f(x);
    x[i] = orig - eps;
    double fm = f(x);
    x[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::runtime_error("grad_check: non-finite function value");
    double fd = (fp - fm) / (2.0 * eps);
    double ga = analytic[i];
    double rel = std::abs(ga - fd) / std::max({1.0, std::abs(ga), std::abs(fd)});
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace gravae
