#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace situ::testing {

struct GradCheck {
  int probes = 0;
  double worst = 0.0;      // max relative error
  std::size_t worst_index = 0;
};

// |a - n| / max(|a|, |n|, floor)
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Central differences of `f` at `probes` random coordinates of `x`.
inline GradCheck check_gradient(Eigen::VectorXd& x, const Eigen::VectorXd& analytic,
                                const std::function<double()>& f, int probes, std::uint64_t seed,
                                double eps = 1e-5) {
  GradCheck out;
  std::mt19937_64 g(seed);
  std::uniform_int_distribution<std::size_t> pick(0, static_cast<std::size_t>(x.size()) - 1);
  for (int p = 0; p < probes; ++p) {
    const std::size_t i = pick(g);
    const double keep = x[i];
    x[i] = keep + eps;
    const double up = f();
    x[i] = keep - eps;
    const double down = f();
    x[i] = keep;
    const double err = relative_error(analytic[i], (up - down) / (2 * eps));
    if (err > out.worst) {
      out.worst = err;
      out.worst_index = i;
    }
    ++out.probes;
  }
  return out;
}

}  // namespace situ::testing
