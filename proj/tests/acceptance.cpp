// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion enforces its own runtime budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hamflow/expr.hpp"
#include "hamflow/geometry.hpp"
#include "hamflow/hj.hpp"
#include "hamflow/mechanics.hpp"
#include "hamflow/numeric.hpp"
#include "hamflow/scenario.hpp"
#include "test_support.hpp"

using namespace hamflow;
using expr::ChartKind;
using expr::ChartSpec;
using expr::ScalarField;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
  if (!condition) throw Failure(message);
}

std::string fmt(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3e", value);
  return buf;
}

ScalarField f(const char* src, const ChartSpec& chart) { return expr::parse(src, chart); }

// --------------------------------------------------------------------------
// 1. canonical relations, n in {1, 2, 3}

void criterion_canonical_relations() {
  for (int n = 1; n <= 3; ++n) {
    const ChartSpec chart(ChartKind::Momentum, n);
    const auto points = num::sample_points(num::unit_box(chart.size()), 32, 100 + n);
    auto coord = [&](std::size_t index) {
      return ScalarField::coordinate(chart, chart.name_of(index));
    };
    auto check = [&](const ScalarField& a, const ScalarField& b, double want) {
      const auto bracket = geom::poisson_bracket(a, b);
      if (bracket.is_constant(want)) return;
      for (const auto& point : points) {
        const double got = bracket(point);
        require(std::abs(got - want) <= 1e-12,
                "bracket deviates by " + fmt(std::abs(got - want)));
      }
    };
    const auto nn = static_cast<std::size_t>(n);
    for (std::size_t i = 1; i <= nn; ++i) {
      for (std::size_t j = 1; j <= nn; ++j) {
        check(coord(i), coord(j), 0.0);
        check(coord(nn + i), coord(nn + j), 0.0);
        check(coord(i), coord(nn + j), i == j ? 1.0 : 0.0);
      }
    }
  }
}

// --------------------------------------------------------------------------
// 2. bracket decomposition vs direct Lie bracket

geom::NormalFormVectorField random_nfvf(std::mt19937_64& rng, const ChartSpec& chart,
                                        std::size_t terms) {
  std::vector<geom::NormalFormTerm> list;
  for (std::size_t a = 0; a < terms; ++a) {
    list.push_back({testsup::random_polynomial(rng, chart, 2),
                    testsup::random_polynomial(rng, chart, 2)});
  }
  return geom::NormalFormVectorField(testsup::random_polynomial(rng, chart, 2),
                                     std::move(list));
}

void criterion_bracket_decomposition() {
  std::mt19937_64 rng(20202);
  int pair_index = 0;
  for (int n = 1; n <= 2; ++n) {
    const ChartSpec chart(ChartKind::Momentum, n);
    const auto points = num::sample_points(num::unit_box(chart.size()), 64, 200 + n);
    for (int pair = 0; pair < 10; ++pair, ++pair_index) {
      const auto a = random_nfvf(rng, chart, pair_index % 3);
      const auto b = random_nfvf(rng, chart, (pair_index / 3) % 3);
      const auto decomposed = geom::bracket_decomposition(a, b);
      const auto direct = geom::lie_bracket(geom::realize(a), geom::realize(b));
      for (const auto& point : points) {
        const auto va = decomposed.eval(point);
        const auto vb = direct.eval(point);
        for (std::size_t c = 0; c < va.size(); ++c) {
          if (std::abs(vb[c]) > 10.0) continue;
          require(std::abs(va[c] - vb[c]) <= 1e-9,
                  "decomposition deviates by " + fmt(std::abs(va[c] - vb[c])));
        }
      }
    }
  }
}

// --------------------------------------------------------------------------
// 3. homomorphism and Jacobi identity

void criterion_homomorphism_jacobi() {
  const ChartSpec chart(ChartKind::Momentum, 2);
  std::mt19937_64 rng(30303);
  const auto points = num::sample_points(num::unit_box(chart.size()), 64, 303);
  for (int round = 0; round < 20; ++round) {
    const auto a = testsup::random_polynomial(rng, chart, 3);
    const auto b = testsup::random_polynomial(rng, chart, 3);
    const auto c = testsup::random_polynomial(rng, chart, 3);

    const auto lhs = geom::symplectic_gradient(geom::poisson_bracket(a, b));
    const auto rhs = geom::lie_bracket(geom::symplectic_gradient(a),
                                       geom::symplectic_gradient(b));
    const auto jacobi = geom::poisson_bracket(a, geom::poisson_bracket(b, c)) +
                        geom::poisson_bracket(b, geom::poisson_bracket(c, a)) +
                        geom::poisson_bracket(c, geom::poisson_bracket(a, b));
    for (const auto& point : points) {
      const auto va = lhs.eval(point);
      const auto vb = rhs.eval(point);
      for (std::size_t k = 0; k < va.size(); ++k) {
        require(std::abs(va[k] - vb[k]) <= 1e-9,
                "homomorphism deviates by " + fmt(std::abs(va[k] - vb[k])));
      }
      require(std::abs(jacobi(point)) <= 1e-9,
              "jacobi sum is " + fmt(std::abs(jacobi(point))));
    }
  }
}

// --------------------------------------------------------------------------
// 4. classical reduction at scenario level

std::vector<std::vector<double>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

void criterion_classical_reduction() {
  const auto dir = std::filesystem::temp_directory_path() / "hamflow_acceptance_c4";
  std::filesystem::remove_all(dir);

  const char* harmonic = R"json({
    "name": "harmonic", "dimension": 1,
    "system": {"normal_form": {"H": "(x1^2 + p1^2)/2", "terms": []}},
    "initial": {"t0": 0.0, "x": [1.0], "p": [0.0]},
    "run": {"t1": 6.283185307179586, "h": 0.001},
    "checks": ["classical_reduction"], "seed": 1
  })json";
  const char* damped_zero = R"json({
    "name": "damped_zero", "dimension": 1,
    "system": {"normal_form": {"H": "(x1^2 + p1^2)/2",
                               "terms": [{"mu": "0*p1", "v": "x1"}]}},
    "initial": {"t0": 0.0, "x": [1.0], "p": [0.0]},
    "run": {"t1": 6.283185307179586, "h": 0.001},
    "checks": ["energy_balance"], "seed": 1
  })json";

  const auto report1 = scenario::run(harmonic, dir.string());
  const auto report2 = scenario::run(damped_zero, dir.string());
  require(report1.passed() && report2.passed(), "scenario checks failed");

  const auto a = read_csv(dir / "harmonic_trajectory.csv");
  const auto b = read_csv(dir / "damped_zero_trajectory.csv");
  require(a.size() == b.size(), "trajectory lengths differ");
  double worst = 0.0;
  double drift = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t c = 0; c < 3; ++c) {  // t, x1, p1
      worst = std::max(worst, std::abs(a[k][c] - b[k][c]));
    }
    drift = std::max(drift, std::abs(a[k][3] - a[0][3]));  // H column
  }
  require(worst <= 1e-12, "gamma = 0 trajectories differ by " + fmt(worst));
  require(drift <= 1e-9, "energy drift " + fmt(drift));
  std::filesystem::remove_all(dir);
}

// --------------------------------------------------------------------------
// 5. generalized energy balance for the damped oscillator

void criterion_energy_balance() {
  const ChartSpec chart(ChartKind::Momentum, 1);
  mech::NormalForm damped(f("(x1^2 + p1^2)/2", chart),
                          {{f("-0.1*p1", chart), f("x1", chart)}});
  const auto traj = mech::integrate_hamilton(damped, 0.0, std::vector<double>{1.0},
                                             std::vector<double>{0.0}, 10.0, 1e-3);

  // measured dH/dt against -gamma p^2
  std::vector<double> h_values(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto state = traj.state(k);
    h_values[k] = 0.5 * (state[0] * state[0] + state[1] * state[1]);
  }
  const auto dh_dt = num::derivative_series(h_values, traj.step());
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
    const double p = traj.state(k)[1];
    worst = std::max(worst, std::abs(dh_dt[k] + 0.1 * p * p));
  }
  require(worst <= 1e-6, "dH/dt vs -gamma p^2 deviates by " + fmt(worst));

  const testsup::DampedSolution closed{0.1, 1.0, 0.0};
  double mismatch = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    mismatch = std::max(mismatch, std::abs(traj.state(k)[0] - closed.x(traj.time(k))));
    mismatch = std::max(mismatch, std::abs(traj.state(k)[1] - closed.p(traj.time(k))));
  }
  require(mismatch <= 1e-6, "closed-form mismatch " + fmt(mismatch));
}

// --------------------------------------------------------------------------
// 6. cross-picture agreement

void criterion_cross_picture() {
  const ChartSpec velocity(ChartKind::Velocity, 1);
  const ChartSpec momentum(ChartKind::Momentum, 1);
  const std::vector<ScalarField> forces{f("-0.1*v1 - x1", velocity)};
  const auto lagrange_side = mech::integrate_lagrange(
      f("0.5*v1^2", velocity), forces, 0.0, std::vector<double>{1.0},
      std::vector<double>{0.0}, 10.0, 1e-3);

  mech::NormalForm damped(f("(x1^2 + p1^2)/2", momentum),
                          {{f("-0.1*p1", momentum), f("x1", momentum)}});
  const auto hamilton_side = mech::integrate_hamilton(
      damped, 0.0, std::vector<double>{1.0}, std::vector<double>{0.0}, 10.0, 1e-3);

  require(lagrange_side.size() == hamilton_side.size(), "step counts differ");
  double worst = 0.0;
  for (std::size_t k = 0; k < lagrange_side.size(); ++k) {
    worst = std::max(worst,
                     std::abs(lagrange_side.state(k)[0] - hamilton_side.state(k)[0]));
  }
  require(worst <= 1e-6, "pictures disagree in x by " + fmt(worst));
}

// --------------------------------------------------------------------------
// 7. Legendre transform on seeded convex quadratics

void criterion_legendre() {
  std::mt19937_64 rng(70707);
  std::uniform_real_distribution<double> entry(-0.5, 0.5);
  for (int round = 0; round < 10; ++round) {
    const int n = 1 + round % 2;
    const ChartSpec chart(ChartKind::Velocity, n);

    // L = 1/2 v^T A v + b.v - c(x), A = M M^T + I
    std::vector<double> m(n * n), a(n * n, 0.0), b(n);
    for (auto& value : m) value = entry(rng);
    for (auto& value : b) value = entry(rng);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) a[i * n + j] += m[i * n + k] * m[j * n + k];
      }
      a[i * n + i] += 1.0;
    }
    ScalarField lagrangian = ScalarField::constant(chart, 0.0);
    for (int i = 0; i < n; ++i) {
      const auto vi = ScalarField::coordinate(chart, chart.name_of(1 + n + i));
      const auto xi = ScalarField::coordinate(chart, chart.name_of(1 + i));
      for (int j = 0; j < n; ++j) {
        const auto vj = ScalarField::coordinate(chart, chart.name_of(1 + n + j));
        lagrangian = lagrangian + (0.5 * a[i * n + j]) * (vi * vj);
      }
      lagrangian = lagrangian + b[i] * vi - 0.5 * (xi * xi);
    }

    // independent inverse of A for n <= 2
    std::vector<double> inverse(n * n);
    if (n == 1) {
      inverse[0] = 1.0 / a[0];
    } else {
      const double det = a[0] * a[3] - a[1] * a[2];
      inverse = {a[3] / det, -a[1] / det, -a[2] / det, a[0] / det};
    }

    const auto momenta = mech::momentum_map(lagrangian);
    const mech::LegendreTransform legendre(lagrangian);
    const auto points = num::sample_points(num::unit_box(chart.size()), 64,
                                           700 + static_cast<std::uint64_t>(round));
    for (const auto& point : points) {
      std::vector<double> p(n);
      for (int i = 0; i < n; ++i) p[i] = momenta[i](point);
      const std::span<const double> x(point.data() + 1, n);

      const auto v_back = legendre.velocity_of(point[0], x, p);
      for (int i = 0; i < n; ++i) {
        require(std::abs(v_back[i] - point[1 + n + i]) <= 1e-10,
                "round trip misses by " + fmt(std::abs(v_back[i] - point[1 + n + i])));
      }

      // hand-derived H = 1/2 (p - b)^T A^-1 (p - b) + c(x)
      double hand = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          hand += 0.5 * (p[i] - b[i]) * inverse[i * n + j] * (p[j] - b[j]);
        }
        hand += 0.5 * x[i] * x[i];
      }
      const double got = legendre.hamiltonian(point[0], x, p);
      require(std::abs(got - hand) <= 1e-10,
              "H misses the quadratic form by " + fmt(std::abs(got - hand)));
    }
  }

  // degenerate Lagrangian raises the singular-mass-matrix error
  const ChartSpec line(ChartKind::Velocity, 1);
  mech::LegendreTransform degenerate(f("v1", line));
  bool raised = false;
  try {
    degenerate.velocity_of(0.0, std::vector<double>{0.0}, std::vector<double>{1.0});
  } catch (const Error& e) {
    raised = e.code() == ErrorCode::SingularMassMatrix;
  }
  require(raised, "L = v1 did not raise singular-mass-matrix");
}

// --------------------------------------------------------------------------
// 8. Euler-Lagrange / first-variation duality

void criterion_first_variation() {
  const ChartSpec chart(ChartKind::Velocity, 1);
  const auto lagrangian = f("0.5*v1^2", chart);
  const auto extremal = testsup::prolong(chart, {[](double t) { return t; }},
                                         {[](double) { return 1.0; }}, 0.0, 1.0, 1e-3);

  std::mt19937_64 rng(80808);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  for (int round = 0; round < 10; ++round) {
    char source[160];
    std::snprintf(source, sizeof(source), "t*(1 - t)*(%.4f + %.4f*t + %.4f*t^2)",
                  amp(rng), amp(rng), amp(rng));
    const mech::VariationField delta({f(source, chart)});
    const auto result = mech::first_variation(lagrangian, extremal, delta);
    require(std::abs(result.interior) <= 1e-5,
            "extremal interior variation " + fmt(std::abs(result.interior)));
  }

  const auto parabola = testsup::prolong(chart, {[](double t) { return t * t; }},
                                         {[](double t) { return 2.0 * t; }}, 0.0, 1.0,
                                         1e-3);
  const auto result = mech::first_variation(lagrangian, parabola,
                                            mech::VariationField({f("1", chart)}));
  require(std::abs(result.interior + 2.0) <= 1e-4,
          "non-extremal interior is " + fmt(result.interior));
}

// --------------------------------------------------------------------------
// 9. Hamilton-Jacobi residuals

void criterion_hamilton_jacobi() {
  const ChartSpec config1(ChartKind::Config, 1);
  const ChartSpec momentum1(ChartKind::Momentum, 1);
  const auto points = num::sample_points(num::unit_box(config1.size()), 128, 909);

  // free-particle complete integral
  mech::NormalForm free_nf(f("0.5*p1^2", momentum1), {});
  const hj::GeneratingFunction complete(f("2*x1 - 2*t", config1));
  const double conventional = hj::hj_residual(complete, f("0.5*p1^2", momentum1), points);
  require(conventional <= 1e-10, "hj residual " + fmt(conventional));
  const auto reduced = hj::generalized_hj_residual(complete.contact_field(), free_nf,
                                                   points);
  require(reduced.a_max <= 1e-10 && reduced.b_max <= 1e-10,
          "generalized residual (" + fmt(reduced.a_max) + ", " + fmt(reduced.b_max) + ")");

  // constructed witness with mu != 0: S = 0.15 x^2, mu = 0.3 p, v = x
  mech::NormalForm witness(f("0.5*p1^2", momentum1),
                           {{f("0.3*p1", momentum1), f("x1", momentum1)}});
  const hj::GeneratingFunction s(f("0.15*x1^2", config1));
  const auto generalized = hj::generalized_hj_residual(s.contact_field(), witness,
                                                       points);
  require(generalized.a_max <= 1e-8,
          "witness spatial-gradient equation misses by " + fmt(generalized.a_max));
  require(generalized.b_max <= 1e-12, "witness closure " + fmt(generalized.b_max));

  // closure negative control in n = 2
  const ChartSpec config2(ChartKind::Config, 2);
  const hj::ContactField swirl({f("x2", config2), f("-x1", config2)});
  const auto points2 = num::sample_points(num::unit_box(config2.size()), 128, 910);
  const double closure = hj::closure_residual(swirl, points2);
  require(std::abs(closure - 2.0) <= 1e-12, "negative control B = " + fmt(closure));
}

// --------------------------------------------------------------------------
// 10. symbolic-vs-finite-difference oracle

void criterion_fd_oracle() {
  const ChartSpec chart(ChartKind::Momentum, 2);
  std::mt19937_64 rng(101010);
  const auto points = num::sample_points(num::unit_box(chart.size()), 16, 1010);
  for (int round = 0; round < 50; ++round) {
    const auto field = expr::parse(testsup::random_expression(rng, chart, 3), chart);
    for (std::size_t c = 0; c < chart.size(); ++c) {
      const auto name = chart.name_of(c);
      for (const auto& point : points) {
        expr::FdCheck result;
        try {
          result = expr::fd_check(field, name, point);
        } catch (const Error&) {
          continue;  // inadmissible point
        }
        if (!std::isfinite(result.symbolic) || std::abs(result.symbolic) > 1e6) continue;
        require(std::abs(result.symbolic - result.numeric) <=
                    1e-5 * std::max(1.0, std::abs(result.symbolic)),
                "partial d/d" + name + " deviates by " +
                    fmt(std::abs(result.symbolic - result.numeric)));
      }
    }
  }
}

// --------------------------------------------------------------------------
// 11. RK4 order check

void criterion_rk4_order() {
  const ChartSpec chart(ChartKind::Momentum, 1);
  mech::NormalForm harmonic(f("(x1^2 + p1^2)/2", chart), {});
  auto endpoint_error = [&](double h) {
    const auto traj = mech::integrate_hamilton(harmonic, 0.0, std::vector<double>{1.0},
                                               std::vector<double>{0.0}, 2 * M_PI, h);
    const auto last = traj.state(traj.size() - 1);
    return std::max(std::abs(last[0] - 1.0), std::abs(last[1]));
  };
  const double ratio = endpoint_error(0.05) / endpoint_error(0.025);
  require(ratio >= 12.0 && ratio <= 20.0, "halving ratio is " + fmt(ratio));
}

struct Criterion {
  int id;
  const char* label;
  double budget_seconds;
  std::function<void()> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "canonical relations, n in {1,2,3}", 1.0, criterion_canonical_relations},
      {2, "bracket decomposition vs direct Lie bracket", 30.0,
       criterion_bracket_decomposition},
      {3, "homomorphism and Jacobi identity", 10.0, criterion_homomorphism_jacobi},
      {4, "classical reduction of the damped scenario", 5.0,
       criterion_classical_reduction},
      {5, "generalized energy balance, damped oscillator", 5.0,
       criterion_energy_balance},
      {6, "cross-picture agreement", 5.0, criterion_cross_picture},
      {7, "Legendre transform round trip and closed form", 5.0, criterion_legendre},
      {8, "Euler-Lagrange / first-variation duality", 5.0, criterion_first_variation},
      {9, "Hamilton-Jacobi residuals", 5.0, criterion_hamilton_jacobi},
      {10, "symbolic vs finite-difference derivatives", 5.0, criterion_fd_oracle},
      {11, "RK4 order under step halving", 5.0, criterion_rk4_order},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      criterion.body();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (error.empty() && elapsed > criterion.budget_seconds) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "exceeded %.0f s budget", criterion.budget_seconds);
      error = buf;
    }
    if (error.empty()) {
      std::printf("PASS  criterion %2d  %-48s (%.2f s)\n", criterion.id,
                  criterion.label, elapsed);
    } else {
      std::printf("FAIL  criterion %2d  %-48s (%.2f s): %s\n", criterion.id,
                  criterion.label, elapsed, error.c_str());
      ++failures;
    }
  }
  if (failures == 0) {
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
  } else {
    std::printf("%d acceptance criteria FAILED\n", failures);
  }
  return failures;
}
