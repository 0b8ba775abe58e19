#ifndef HAMFLOW_NUMERIC_HPP
#define HAMFLOW_NUMERIC_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hamflow/errors.hpp"

namespace hamflow::num {

// Composite trapezoid rule over uniformly spaced samples.
inline double trapezoid(std::span<const double> values, double step) {
  if (values.size() < 2) return 0.0;
  double sum = 0.5 * (values.front() + values.back());
  for (std::size_t k = 1; k + 1 < values.size(); ++k) sum += values[k];
  return sum * step;
}

// d/dt of a uniformly sampled series: central differences in the interior,
// one-sided O(h) at the two ends.
inline std::vector<double> derivative_series(std::span<const double> values,
                                             double step) {
  const std::size_t n = values.size();
  if (n < 2) {
    throw Error(ErrorCode::Validation, "need at least 2 samples to differentiate");
  }
  std::vector<double> out(n);
  out.front() = (values[1] - values[0]) / step;
  out.back() = (values[n - 1] - values[n - 2]) / step;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    out[k] = (values[k + 1] - values[k - 1]) / (2.0 * step);
  }
  return out;
}

// Solves a small dense system A x = b by LU with partial pivoting.
// A is row-major n x n and is consumed. A pivot below pivot_tol raises
// SingularMassMatrix (the only caller class is mass-matrix shaped).
inline std::vector<double> lu_solve(std::vector<double> a, std::vector<double> b,
                                    double pivot_tol = 1e-12) {
  const std::size_t n = b.size();
  if (a.size() != n * n) {
    throw Error(ErrorCode::Validation, "matrix/vector size mismatch");
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot_row = col;
    double best = std::abs(a[col * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double mag = std::abs(a[r * n + col]);
      if (mag > best) {
        best = mag;
        pivot_row = r;
      }
    }
    if (best < pivot_tol) {
      throw Error(ErrorCode::SingularMassMatrix,
                  "singular matrix: pivot " + std::to_string(best) +
                      " below threshold");
    }
    if (pivot_row != col) {
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(a[col * n + c], a[pivot_row * n + c]);
      }
      std::swap(b[col], b[pivot_row]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] / a[col * n + col];
      a[r * n + col] = 0.0;
      for (std::size_t c = col + 1; c < n; ++c) {
        a[r * n + c] -= factor * a[col * n + c];
      }
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double sum = b[i];
    for (std::size_t c = i + 1; c < n; ++c) sum -= a[i * n + c] * x[c];
    x[i] = sum / a[i * n + i];
  }
  return x;
}

// Seeded uniform samples inside a per-coordinate box.
inline std::vector<std::vector<double>> sample_points(
    const std::vector<std::pair<double, double>>& box, std::size_t count,
    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> points(count);
  for (auto& point : points) {
    point.resize(box.size());
    for (std::size_t c = 0; c < box.size(); ++c) {
      std::uniform_real_distribution<double> dist(box[c].first, box[c].second);
      point[c] = dist(rng);
    }
  }
  return points;
}

inline std::vector<std::pair<double, double>> unit_box(std::size_t dims) {
  return std::vector<std::pair<double, double>>(dims, {-1.0, 1.0});
}

struct Rk4Result {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  double step = 0.0;
};

// Classical fixed-step RK4. The requested step is rounded so that an
// integral number of equal steps lands exactly on t1; every step is
// recorded. Aborts with the last good time when the state leaves the
// finite range.
template <typename RhsFn>
Rk4Result rk4_integrate(RhsFn&& rhs, double t0, std::span<const double> y0,
                        double t1, double requested_step) {
  if (!(requested_step > 0.0)) {
    throw Error(ErrorCode::Validation, "step must be positive");
  }
  if (!(t1 > t0)) {
    throw Error(ErrorCode::Validation, "t1 must exceed t0");
  }
  const double raw = (t1 - t0) / requested_step;
  if (raw > 1e7) {
    throw Error(ErrorCode::Validation, "more than 1e7 steps requested");
  }
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::round(raw)));
  const double h = (t1 - t0) / static_cast<double>(steps);

  const std::size_t dim = y0.size();
  Rk4Result result;
  result.step = h;
  result.times.reserve(steps + 1);
  result.states.reserve(steps + 1);
  std::vector<double> y(y0.begin(), y0.end());
  result.times.push_back(t0);
  result.states.push_back(y);

  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = t0 + static_cast<double>(s) * h;
    rhs(t, y, k1);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    rhs(t + 0.5 * h, tmp, k2);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    rhs(t + 0.5 * h, tmp, k3);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + h * k3[i];
    rhs(t + h, tmp, k4);
    for (std::size_t i = 0; i < dim; ++i) {
      y[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    }
    for (double v : y) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFiniteState,
                    "state became non-finite; last good t = " +
                        std::to_string(t));
      }
    }
    result.times.push_back(t0 + static_cast<double>(s + 1) * h);
    result.states.push_back(y);
  }
  return result;
}

}  // namespace hamflow::num

#endif  // HAMFLOW_NUMERIC_HPP
