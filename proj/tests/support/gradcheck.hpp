#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

#include "hifreq/core/rng.hpp"
#include "hifreq/core/tensor.hpp"

namespace hifreq::testing {

// |a - n| / max(|a|, |n|, floor). The floor keeps near-zero gradients from
// turning round-off into large relative errors.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

// Central differences of `loss` w.r.t. entries of `param`, compared with
// `analytic`. Checks every entry, or `limit` entries drawn from `rng`.
template <typename T>
GradCheck check_gradient(BasicTensor<T>& param, const BasicTensor<T>& analytic, const std::function<double()>& loss,
                         double eps, std::size_t limit = 0, Rng* rng = nullptr, double floor = 1e-6) {
  std::vector<std::size_t> idx(param.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (limit > 0 && limit < idx.size() && rng) {
    rng->shuffle(idx);
    idx.resize(limit);
  }
  GradCheck out;
  for (std::size_t i : idx) {
    const T saved = param[i];
    param[i] = static_cast<T>(saved + eps);
    const double up = loss();
    param[i] = static_cast<T>(saved - eps);
    const double down = loss();
    // Use the step actually representable in T.
    const double step = static_cast<double>(static_cast<T>(saved + eps)) - static_cast<double>(static_cast<T>(saved - eps));
    param[i] = saved;
    const double numeric = (up - down) / step;
    out.max_rel_error = std::max(out.max_rel_error, relative_error(static_cast<double>(analytic[i]), numeric, floor));
    ++out.checked;
  }
  return out;
}

template <typename T>
BasicTensor<T> random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  BasicTensor<T> t(shape);
  for (T& v : t.values()) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

// Uniform values with |v| >= margin, for inputs of kinked functions.
template <typename T>
BasicTensor<T> random_away_from_zero(const Shape& shape, Rng& rng, double margin) {
  BasicTensor<T> t(shape);
  for (T& v : t.values()) {
    const double m = rng.uniform(margin, 1.0);
    v = static_cast<T>(rng.uniform() < 0.5 ? -m : m);
  }
  return t;
}

template <typename T>
double weighted_sum(const BasicTensor<T>& y, const BasicTensor<T>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += static_cast<double>(y[i]) * static_cast<double>(w[i]);
  return s;
}

}  // namespace hifreq::testing
