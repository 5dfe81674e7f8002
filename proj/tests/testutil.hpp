#pragma once

// Shared independent oracles for the test suites: central finite differences
// for gradients, golden-section search for 1-D maxima. These never call into
// the implementation paths they are used to check.

#include <cmath>
#include <functional>
#include <vector>

#include "alice/autodiff.hpp"

namespace testutil {

inline double rel_err(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-3});
  return std::abs(a - b) / denom;
}

struct FdResult {
  double max_rel_err = 0.0;
  int checked = 0;
};

/// Central-difference check of every coordinate of every parameter.
/// loss_value() must recompute the scalar loss from the parameters' current
/// values; compute_grads() must zero the grads and run one backward pass.
inline FdResult fd_check(const std::vector<alice::ad::Parameter*>& params,
                         const std::function<double()>& loss_value,
                         const std::function<void()>& compute_grads, double h = 1e-5) {
  compute_grads();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (auto* p : params) analytic.push_back(p->grad);

  FdResult res;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    alice::ad::Parameter& p = *params[pi];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + h;
      const double fp = loss_value();
      p.value[i] = saved - h;
      const double fm = loss_value();
      p.value[i] = saved;
      const double numeric = (fp - fm) / (2.0 * h);
      res.max_rel_err = std::max(res.max_rel_err, rel_err(analytic[pi][i], numeric));
      ++res.checked;
    }
  }
  return res;
}

/// Golden-section maximizer on (lo, hi). Comparisons of nearly equal values
/// near a quadratic maximum limit the attainable argmax precision to about
/// sqrt(eps); evaluating in long double pushes that below 1e-9.
inline double golden_max(const std::function<long double(long double)>& f, long double lo,
                         long double hi, int iters = 200) {
  const long double phi = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  long double a = lo, b = hi;
  long double c = b - phi * (b - a), d = a + phi * (b - a);
  long double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return static_cast<double>(0.5L * (a + b));
}

}  // namespace testutil
