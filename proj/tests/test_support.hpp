#ifndef HAMFLOW_TEST_SUPPORT_HPP
#define HAMFLOW_TEST_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hamflow/expr.hpp"
#include "hamflow/mechanics.hpp"
#include "hamflow/numeric.hpp"

namespace testsup {

using hamflow::expr::ChartKind;
using hamflow::expr::ChartSpec;
using hamflow::expr::ScalarField;

// Random polynomial with integer-free coefficients in [-1, 1]; skips the
// time coordinate unless asked for.
inline ScalarField random_polynomial(std::mt19937_64& rng, const ChartSpec& chart,
                                     int max_degree, bool allow_time = false) {
  const auto coords = chart.size();
  std::uniform_int_distribution<int> term_count(2, 4);
  std::uniform_int_distribution<int> degree(0, max_degree);
  std::uniform_int_distribution<std::size_t> coord(allow_time ? 0 : 1, coords - 1);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);

  ScalarField sum = ScalarField::constant(chart, 0.0);
  const int terms = term_count(rng);
  for (int term = 0; term < terms; ++term) {
    ScalarField mono = ScalarField::constant(chart, coeff(rng));
    const int d = degree(rng);
    for (int k = 0; k < d; ++k) {
      mono = mono * ScalarField::coordinate(chart, chart.name_of(coord(rng)));
    }
    sum = sum + mono;
  }
  return sum;
}

// Random expression source text over safe operations (keeps every point
// of [-1,1]^d admissible and derivatives moderate).
inline std::string random_expression(std::mt19937_64& rng, const ChartSpec& chart,
                                     int depth) {
  std::uniform_int_distribution<int> pick_leaf(0, 1);
  std::uniform_int_distribution<std::size_t> coord(0, chart.size() - 1);
  std::uniform_real_distribution<double> constant(-2.0, 2.0);
  if (depth <= 0) {
    if (pick_leaf(rng) == 0) return chart.name_of(coord(rng));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", constant(rng));
    return buf;
  }
  std::uniform_int_distribution<int> pick_op(0, 6);
  const auto sub = [&] { return random_expression(rng, chart, depth - 1); };
  switch (pick_op(rng)) {
    case 0: return "(" + sub() + " + " + sub() + ")";
    case 1: return "(" + sub() + " - " + sub() + ")";
    case 2: return "(" + sub() + ")*(" + sub() + ")";
    case 3: return "sin(" + sub() + ")";
    case 4: return "cos(" + sub() + ")";
    case 5: return "exp(0.5*(" + sub() + "))";
    default: return "(" + sub() + ")^2";
  }
}

// 1-jet prolongation of closed-form x(t), sampled uniformly.
inline hamflow::mech::Trajectory prolong(
    const ChartSpec& chart, const std::vector<std::function<double(double)>>& x,
    const std::vector<std::function<double(double)>>& xdot, double t0, double t1,
    double step) {
  const auto n = static_cast<std::size_t>(chart.dimension());
  const auto steps =
      static_cast<std::size_t>(std::max(1.0, std::round((t1 - t0) / step)));
  const double h = (t1 - t0) / static_cast<double>(steps);
  std::vector<std::vector<double>> states(steps + 1, std::vector<double>(2 * n));
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = t0 + static_cast<double>(k) * h;
    for (std::size_t i = 0; i < n; ++i) {
      states[k][i] = x[i](t);
      states[k][n + i] = xdot[i](t);
    }
  }
  return hamflow::mech::Trajectory::uniform(chart, t0, h, std::move(states));
}

// Closed-form underdamped oscillator xddot + gamma xdot + x = 0.
struct DampedSolution {
  double gamma;
  double x0;
  double p0;

  double omega() const { return std::sqrt(1.0 - gamma * gamma / 4.0); }

  double x(double t) const {
    const double a = x0;
    const double b = (p0 + 0.5 * gamma * x0) / omega();
    return std::exp(-0.5 * gamma * t) *
           (a * std::cos(omega() * t) + b * std::sin(omega() * t));
  }

  double p(double t) const {
    const double a = x0;
    const double b = (p0 + 0.5 * gamma * x0) / omega();
    const double envelope = std::exp(-0.5 * gamma * t);
    const double osc = a * std::cos(omega() * t) + b * std::sin(omega() * t);
    const double osc_dot = omega() * (-a * std::sin(omega() * t) + b * std::cos(omega() * t));
    return envelope * (osc_dot - 0.5 * gamma * osc);
  }
};

}  // namespace testsup

#endif  // HAMFLOW_TEST_SUPPORT_HPP
