#include "hamflow/mechanics.hpp"

#include <cmath>
#include <utility>

#include "hamflow/numeric.hpp"

namespace hamflow::mech {

namespace {

void require_kind(const ChartSpec& chart, ChartKind kind, const char* what) {
  if (chart.kind() != kind) {
    throw Error(ErrorCode::ChartMismatch,
                std::string(what) + " requires a " +
                    (kind == ChartKind::Velocity ? "velocity" : "momentum") +
                    " chart");
  }
}

void require_integrable(const Trajectory& traj, double tol) {
  const double residual = max_integrability_residual(traj);
  if (residual > tol) {
    throw Error(ErrorCode::NonIntegrable,
                "trajectory is not integrable: max |v - xdot| = " +
                    std::to_string(residual));
  }
}

// Values of a field along every sample of a trajectory.
std::vector<double> along(const ScalarField& f, const Trajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto point = traj.point(k);
    out.push_back(f(point));
  }
  return out;
}

double max_abs_interior(std::span<const double> values) {
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < values.size(); ++k) {
    worst = std::max(worst, std::abs(values[k]));
  }
  return worst;
}

}  // namespace

// ---------------------------------------------------------------------------
// Trajectory

Trajectory::Trajectory(ChartSpec chart, std::vector<double> times,
                       std::vector<std::vector<double>> states, double step)
    : chart_(chart), times_(std::move(times)), states_(std::move(states)), step_(step) {
  if (chart_.kind() == expr::ChartKind::Config) {
    throw Error(ErrorCode::Validation, "trajectories live on velocity or momentum charts");
  }
  if (times_.empty() || times_.size() != states_.size()) {
    throw Error(ErrorCode::Validation, "trajectory times/states size mismatch");
  }
  if (!(step_ > 0.0)) {
    throw Error(ErrorCode::Validation, "trajectory step must be positive");
  }
  const auto row = 2 * static_cast<std::size_t>(chart_.dimension());
  for (std::size_t k = 0; k < times_.size(); ++k) {
    if (states_[k].size() != row) {
      throw Error(ErrorCode::Validation, "trajectory state row has wrong width");
    }
    for (double v : states_[k]) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFiniteState, "trajectory contains a non-finite state");
      }
    }
    if (k > 0 && std::abs(times_[k] - times_[k - 1] - step_) > 1e-12) {
      throw Error(ErrorCode::Validation, "trajectory samples are not uniformly spaced");
    }
  }
}

Trajectory Trajectory::uniform(const ChartSpec& chart, double t0, double step,
                               std::vector<std::vector<double>> states) {
  std::vector<double> times(states.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    times[k] = t0 + static_cast<double>(k) * step;
  }
  return Trajectory(chart, std::move(times), std::move(states), step);
}

std::vector<double> Trajectory::point(std::size_t k) const {
  std::vector<double> out;
  out.reserve(chart_.size());
  out.push_back(times_.at(k));
  const auto& row = states_.at(k);
  out.insert(out.end(), row.begin(), row.end());
  return out;
}

// ---------------------------------------------------------------------------
// VariationField / FundamentalForm / NormalForm

VariationField::VariationField(std::vector<ScalarField> components)
    : components_(std::move(components)) {
  if (components_.empty()) {
    throw Error(ErrorCode::Validation, "variation field needs at least one component");
  }
  const ChartSpec& chart = components_.front().chart();
  for (const auto& f : components_) {
    if (!(f.chart() == chart)) {
      throw Error(ErrorCode::ChartMismatch, "variation components on different charts");
    }
    for (std::size_t i = 1; i < chart.size(); ++i) {
      if (f.depends_on(i)) {
        throw Error(ErrorCode::Validation,
                    "variation component '" + f.str() + "' depends on " +
                        chart.name_of(i) + "; only t is allowed");
      }
    }
  }
}

FundamentalForm::FundamentalForm(ScalarField power, std::vector<ScalarField> force,
                                 std::vector<ScalarField> momentum)
    : power_(std::move(power)), force_(std::move(force)), momentum_(std::move(momentum)) {
  require_kind(power_.chart(), ChartKind::Velocity, "FundamentalForm");
  const auto n = static_cast<std::size_t>(power_.chart().dimension());
  if (force_.size() != n || momentum_.size() != n) {
    throw Error(ErrorCode::Validation, "fundamental form component count mismatch");
  }
  for (const auto& f : force_) {
    if (!(f.chart() == power_.chart())) {
      throw Error(ErrorCode::ChartMismatch, "fundamental form components on different charts");
    }
  }
  for (const auto& f : momentum_) {
    if (!(f.chart() == power_.chart())) {
      throw Error(ErrorCode::ChartMismatch, "fundamental form components on different charts");
    }
  }
}

FundamentalForm FundamentalForm::from_lagrangian(const ScalarField& lagrangian) {
  require_kind(lagrangian.chart(), ChartKind::Velocity, "from_lagrangian");
  const auto n = static_cast<std::size_t>(lagrangian.chart().dimension());
  std::vector<ScalarField> force, momentum;
  force.reserve(n);
  momentum.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) force.push_back(lagrangian.diff_index(i));
  for (std::size_t i = 1; i <= n; ++i) momentum.push_back(lagrangian.diff_index(n + i));
  return FundamentalForm(lagrangian.diff_index(0), std::move(force), std::move(momentum));
}

NormalForm::NormalForm(ScalarField hamiltonian, std::vector<NormalFormTerm> terms)
    : hamiltonian_(std::move(hamiltonian)), terms_(std::move(terms)) {
  require_kind(hamiltonian_.chart(), ChartKind::Momentum, "NormalForm");
  const ChartSpec& chart = hamiltonian_.chart();
  for (const auto& term : terms_) {
    if (!(term.mu.chart() == chart) || !(term.v.chart() == chart)) {
      throw Error(ErrorCode::ChartMismatch, "normal form terms on a different chart");
    }
  }
  const auto n = static_cast<std::size_t>(chart.dimension());
  xdot_.reserve(n);
  pdot_.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) {
    ScalarField xdot = hamiltonian_.diff_index(n + i);
    ScalarField pdot = -hamiltonian_.diff_index(i);
    for (const auto& term : terms_) {
      xdot = xdot - term.mu * term.v.diff_index(n + i);
      pdot = pdot + term.mu * term.v.diff_index(i);
    }
    xdot_.push_back(std::move(xdot));
    pdot_.push_back(std::move(pdot));
  }
}

// ---------------------------------------------------------------------------
// Curve diagnostics

std::vector<std::vector<double>> integrability_residual(const Trajectory& traj) {
  require_kind(traj.chart(), ChartKind::Velocity, "integrability_residual");
  if (traj.size() < 3) {
    throw Error(ErrorCode::Validation, "need at least 3 samples");
  }
  const auto n = static_cast<std::size_t>(traj.dimension());
  std::vector<std::vector<double>> out(traj.size(), std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> xs(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) xs[k] = traj.state(k)[i];
    const auto xdot = num::derivative_series(xs, traj.step());
    for (std::size_t k = 0; k < traj.size(); ++k) {
      out[k][i] = traj.state(k)[n + i] - xdot[k];
    }
  }
  return out;
}

double max_integrability_residual(const Trajectory& traj) {
  // Endpoint estimates are one-sided O(h); only interior samples count.
  const auto rows = integrability_residual(traj);
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
    for (double r : rows[k]) worst = std::max(worst, std::abs(r));
  }
  return worst;
}

double action_value(const ScalarField& lagrangian, const Trajectory& traj,
                    double integrable_tol) {
  require_kind(traj.chart(), ChartKind::Velocity, "action_value");
  require_integrable(traj, integrable_tol);
  return num::trapezoid(along(lagrangian, traj), traj.step());
}

std::vector<std::vector<double>> variational_derivative(const ScalarField& lagrangian,
                                                        const Trajectory& traj,
                                                        double integrable_tol) {
  require_kind(traj.chart(), ChartKind::Velocity, "variational_derivative");
  require_integrable(traj, integrable_tol);
  const auto n = static_cast<std::size_t>(traj.dimension());
  std::vector<std::vector<double>> out(traj.size(), std::vector<double>(n));
  for (std::size_t i = 1; i <= n; ++i) {
    const auto dl_dv = along(lagrangian.diff_index(n + i), traj);
    const auto dl_dx = along(lagrangian.diff_index(i), traj);
    const auto ddt = num::derivative_series(dl_dv, traj.step());
    for (std::size_t k = 0; k < traj.size(); ++k) {
      out[k][i - 1] = ddt[k] - dl_dx[k];
    }
  }
  return out;
}

double euler_lagrange_residual(const ScalarField& lagrangian, const Trajectory& traj,
                               double integrable_tol) {
  const auto rows = variational_derivative(lagrangian, traj, integrable_tol);
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
    for (double r : rows[k]) worst = std::max(worst, std::abs(r));
  }
  return worst;
}

BoundaryPair first_variation(const ScalarField& lagrangian, const Trajectory& traj,
                             const VariationField& variation, double integrable_tol) {
  const auto n = static_cast<std::size_t>(traj.dimension());
  if (variation.dimension() != n || !(variation.chart() == traj.chart())) {
    throw Error(ErrorCode::ChartMismatch, "variation does not match trajectory chart");
  }
  const auto var_der = variational_derivative(lagrangian, traj, integrable_tol);

  std::vector<double> integrand(traj.size(), 0.0);
  std::vector<std::vector<double>> delta(n);
  for (std::size_t i = 0; i < n; ++i) delta[i] = along(variation.component(i), traj);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) integrand[k] += var_der[k][i] * delta[i][k];
  }

  BoundaryPair out;
  out.interior = -num::trapezoid(integrand, traj.step());
  for (std::size_t i = 1; i <= n; ++i) {
    const ScalarField dl_dv = lagrangian.diff_index(n + i);
    const auto first = traj.point(0);
    const auto last = traj.point(traj.size() - 1);
    out.boundary += dl_dv(last) * delta[i - 1].back() - dl_dv(first) * delta[i - 1].front();
  }
  return out;
}

std::vector<double> total_energy(const ScalarField& lagrangian, const Trajectory& traj,
                                 double integrable_tol) {
  require_kind(traj.chart(), ChartKind::Velocity, "total_energy");
  require_integrable(traj, integrable_tol);
  const auto n = static_cast<std::size_t>(traj.dimension());
  std::vector<double> energy(traj.size(), 0.0);
  const auto l_values = along(lagrangian, traj);
  for (std::size_t i = 1; i <= n; ++i) {
    const auto dl_dv = along(lagrangian.diff_index(n + i), traj);
    for (std::size_t k = 0; k < traj.size(); ++k) {
      energy[k] += dl_dv[k] * traj.state(k)[n + i - 1];
    }
  }
  for (std::size_t k = 0; k < traj.size(); ++k) energy[k] -= l_values[k];
  return energy;
}

double energy_theorem_residual(const ScalarField& lagrangian, const Trajectory& traj,
                               double integrable_tol) {
  const auto energy = total_energy(lagrangian, traj, integrable_tol);
  const auto dedt = num::derivative_series(energy, traj.step());
  const auto dl_dt = along(lagrangian.diff_index(0), traj);
  std::vector<double> residual(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) residual[k] = dedt[k] + dl_dt[k];
  return max_abs_interior(residual);
}

BoundaryPair virtual_work_total(const FundamentalForm& phi, const Trajectory& traj,
                                const VariationField& variation, double integrable_tol) {
  require_kind(traj.chart(), ChartKind::Velocity, "virtual_work_total");
  require_integrable(traj, integrable_tol);
  const auto n = static_cast<std::size_t>(traj.dimension());
  if (variation.dimension() != n || !(variation.chart() == traj.chart())) {
    throw Error(ErrorCode::ChartMismatch, "variation does not match trajectory chart");
  }

  std::vector<double> integrand(traj.size(), 0.0);
  BoundaryPair out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto force = along(phi.force(i), traj);
    const auto momentum = along(phi.momentum(i), traj);
    const auto delta = along(variation.component(i), traj);
    const auto dpdt = num::derivative_series(momentum, traj.step());
    for (std::size_t k = 0; k < traj.size(); ++k) {
      integrand[k] += (force[k] - dpdt[k]) * delta[k];
    }
    out.boundary += momentum.back() * delta.back() - momentum.front() * delta.front();
  }
  out.interior = num::trapezoid(integrand, traj.step());
  return out;
}

double newtonian_residual(const FundamentalForm& phi, const Trajectory& traj,
                          double integrable_tol) {
  require_kind(traj.chart(), ChartKind::Velocity, "newtonian_residual");
  require_integrable(traj, integrable_tol);
  const auto n = static_cast<std::size_t>(traj.dimension());
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto force = along(phi.force(i), traj);
    const auto momentum = along(phi.momentum(i), traj);
    const auto dpdt = num::derivative_series(momentum, traj.step());
    for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
      worst = std::max(worst, std::abs(force[k] - dpdt[k]));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Lagrangian-side dynamics

namespace {

// Symbolic ingredients of the first-form equations, built once per
// integration rather than per step.
struct LagrangeSystem {
  ChartSpec chart;
  std::vector<ScalarField> forces;        // Q_i (zero if absent)
  std::vector<ScalarField> dT_dx;         // dT/dx^i
  std::vector<ScalarField> d2T_dtdv;      // d2T/dt dv^i
  std::vector<ScalarField> d2T_dxdv;      // row-major [i][j] = d2T/dx^j dv^i
  std::vector<ScalarField> mass;          // row-major m_ij

  LagrangeSystem(const ScalarField& kinetic, std::span<const ScalarField> q)
      : chart(kinetic.chart()) {
    require_kind(chart, ChartKind::Velocity, "lagrange_first_form_rhs");
    const auto n = static_cast<std::size_t>(chart.dimension());
    if (!q.empty() && q.size() != n) {
      throw Error(ErrorCode::Validation, "force count does not match dimension");
    }
    for (std::size_t i = 0; i < n; ++i) {
      forces.push_back(q.empty() ? ScalarField::constant(chart, 0.0) : q[i]);
      if (!(forces.back().chart() == chart)) {
        throw Error(ErrorCode::ChartMismatch, "force components on a different chart");
      }
    }
    for (std::size_t i = 1; i <= n; ++i) {
      dT_dx.push_back(kinetic.diff_index(i));
      const ScalarField dT_dvi = kinetic.diff_index(n + i);
      d2T_dtdv.push_back(dT_dvi.diff_index(0));
      for (std::size_t j = 1; j <= n; ++j) d2T_dxdv.push_back(dT_dvi.diff_index(j));
    }
    mass = mass_matrix(kinetic);
  }

  std::vector<double> accelerations(double t, std::span<const double> x,
                                    std::span<const double> v) const {
    const auto n = static_cast<std::size_t>(chart.dimension());
    std::vector<double> point;
    point.reserve(2 * n + 1);
    point.push_back(t);
    point.insert(point.end(), x.begin(), x.end());
    point.insert(point.end(), v.begin(), v.end());

    std::vector<double> rhs(n), m(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      double value = forces[i](point) + dT_dx[i](point) - d2T_dtdv[i](point);
      for (std::size_t j = 0; j < n; ++j) {
        value -= d2T_dxdv[i * n + j](point) * v[j];
        m[i * n + j] = mass[i * n + j](point);
      }
      rhs[i] = value;
    }
    return num::lu_solve(std::move(m), std::move(rhs));
  }
};

Trajectory velocity_trajectory_from(const num::Rk4Result& run, const ChartSpec& chart) {
  return Trajectory(chart, run.times, run.states, run.step);
}

}  // namespace

std::vector<double> lagrange_first_form_rhs(const ScalarField& kinetic,
                                            std::span<const ScalarField> forces,
                                            double t, std::span<const double> x,
                                            std::span<const double> v) {
  return LagrangeSystem(kinetic, forces).accelerations(t, x, v);
}

Trajectory integrate_lagrange(const ScalarField& kinetic,
                              std::span<const ScalarField> forces, double t0,
                              std::span<const double> x0, std::span<const double> v0,
                              double t1, double step) {
  const LagrangeSystem system(kinetic, forces);
  const auto n = static_cast<std::size_t>(system.chart.dimension());
  if (x0.size() != n || v0.size() != n) {
    throw Error(ErrorCode::Validation, "initial state does not match dimension");
  }
  std::vector<double> y0;
  y0.insert(y0.end(), x0.begin(), x0.end());
  y0.insert(y0.end(), v0.begin(), v0.end());
  auto rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
    const auto acc = system.accelerations(t, y.subspan(0, n), y.subspan(n, n));
    for (std::size_t i = 0; i < n; ++i) {
      dy[i] = y[n + i];
      dy[n + i] = acc[i];
    }
  };
  return velocity_trajectory_from(num::rk4_integrate(rhs, t0, y0, t1, step),
                                  system.chart);
}

Trajectory integrate_fundamental(const FundamentalForm& phi, double t0,
                                 std::span<const double> x0,
                                 std::span<const double> v0, double t1, double step) {
  const ChartSpec& chart = phi.chart();
  const auto n = static_cast<std::size_t>(chart.dimension());
  if (x0.size() != n || v0.size() != n) {
    throw Error(ErrorCode::Validation, "initial state does not match dimension");
  }

  // dp_i/dt expanded along an integrable curve:
  // (dp_i/dv^j) vdot^j = F_i - dp_i/dt - dp_i/dx^j v^j.
  std::vector<ScalarField> dp_dt, dp_dx, dp_dv;
  for (std::size_t i = 0; i < n; ++i) {
    dp_dt.push_back(phi.momentum(i).diff_index(0));
    for (std::size_t j = 1; j <= n; ++j) dp_dx.push_back(phi.momentum(i).diff_index(j));
    for (std::size_t j = 1; j <= n; ++j) dp_dv.push_back(phi.momentum(i).diff_index(n + j));
  }

  auto rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
    std::vector<double> point;
    point.reserve(2 * n + 1);
    point.push_back(t);
    point.insert(point.end(), y.begin(), y.end());
    std::vector<double> b(n), m(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      double value = phi.force(i)(point) - dp_dt[i](point);
      for (std::size_t j = 0; j < n; ++j) {
        value -= dp_dx[i * n + j](point) * y[n + j];
        m[i * n + j] = dp_dv[i * n + j](point);
      }
      b[i] = value;
    }
    const auto acc = num::lu_solve(std::move(m), std::move(b));
    for (std::size_t i = 0; i < n; ++i) {
      dy[i] = y[n + i];
      dy[n + i] = acc[i];
    }
  };

  std::vector<double> y0;
  y0.insert(y0.end(), x0.begin(), x0.end());
  y0.insert(y0.end(), v0.begin(), v0.end());
  return velocity_trajectory_from(num::rk4_integrate(rhs, t0, y0, t1, step), chart);
}

// ---------------------------------------------------------------------------
// Legendre transform

std::vector<ScalarField> momentum_map(const ScalarField& lagrangian) {
  require_kind(lagrangian.chart(), ChartKind::Velocity, "momentum_map");
  const auto n = static_cast<std::size_t>(lagrangian.chart().dimension());
  std::vector<ScalarField> out;
  out.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) out.push_back(lagrangian.diff_index(n + i));
  return out;
}

std::vector<ScalarField> mass_matrix(const ScalarField& lagrangian) {
  require_kind(lagrangian.chart(), ChartKind::Velocity, "mass_matrix");
  const auto n = static_cast<std::size_t>(lagrangian.chart().dimension());
  std::vector<ScalarField> out;
  out.reserve(n * n);
  for (std::size_t i = 1; i <= n; ++i) {
    const ScalarField dl_dvi = lagrangian.diff_index(n + i);
    for (std::size_t j = 1; j <= n; ++j) out.push_back(dl_dvi.diff_index(n + j));
  }
  return out;
}

LegendreTransform::LegendreTransform(ScalarField lagrangian)
    : lagrangian_(std::move(lagrangian)),
      momentum_(momentum_map(lagrangian_)),
      mass_(mass_matrix(lagrangian_)) {}

ChartSpec LegendreTransform::momentum_chart() const {
  return ChartSpec(expr::ChartKind::Momentum, lagrangian_.chart().dimension());
}

std::vector<double> LegendreTransform::velocity_of(double t, std::span<const double> x,
                                                   std::span<const double> p) const {
  const auto n = static_cast<std::size_t>(lagrangian_.chart().dimension());
  if (x.size() != n || p.size() != n) {
    throw Error(ErrorCode::Validation, "state does not match dimension");
  }
  std::vector<double> point;
  point.reserve(2 * n + 1);
  point.push_back(t);
  point.insert(point.end(), x.begin(), x.end());
  std::vector<double> v(p.begin(), p.end());  // exact for unit mass
  point.insert(point.end(), v.begin(), v.end());

  // The transform is licensed by an invertible mass matrix; check it at
  // the starting point even when the residual already vanishes there.
  {
    std::vector<double> jacobian(n * n);
    for (std::size_t k = 0; k < n * n; ++k) jacobian[k] = mass_[k](point);
    num::lu_solve(std::move(jacobian), std::vector<double>(n, 0.0));
  }

  for (int iteration = 0; iteration < 50; ++iteration) {
    std::vector<double> residual(n);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      residual[i] = momentum_[i](point) - p[i];
      worst = std::max(worst, std::abs(residual[i]));
    }
    if (worst <= 1e-12) return v;
    std::vector<double> jacobian(n * n);
    for (std::size_t k = 0; k < n * n; ++k) jacobian[k] = mass_[k](point);
    const auto delta = num::lu_solve(std::move(jacobian), std::move(residual));
    for (std::size_t i = 0; i < n; ++i) {
      v[i] -= delta[i];
      if (!std::isfinite(v[i])) {
        throw Error(ErrorCode::NewtonDivergence, "momentum-map inversion diverged");
      }
      point[1 + n + i] = v[i];
    }
  }
  throw Error(ErrorCode::NewtonDivergence,
              "momentum-map inversion did not converge in 50 iterations");
}

double LegendreTransform::hamiltonian(double t, std::span<const double> x,
                                      std::span<const double> p) const {
  const auto n = static_cast<std::size_t>(lagrangian_.chart().dimension());
  const auto v = velocity_of(t, x, p);
  std::vector<double> point;
  point.reserve(2 * n + 1);
  point.push_back(t);
  point.insert(point.end(), x.begin(), x.end());
  point.insert(point.end(), v.begin(), v.end());
  double pv = 0.0;
  for (std::size_t i = 0; i < n; ++i) pv += p[i] * v[i];
  return pv - lagrangian_(point);
}

// ---------------------------------------------------------------------------
// Generalized Hamiltonian side

geom::OneForm eta_components(const NormalForm& nf) {
  const ChartSpec& chart = nf.chart();
  const auto n = static_cast<std::size_t>(chart.dimension());
  auto coefficient = [&](std::size_t index) {
    ScalarField out = nf.hamiltonian().diff_index(index);
    for (const auto& term : nf.terms()) {
      out = out - term.mu * term.v.diff_index(index);
    }
    return out;
  };
  std::vector<ScalarField> dx, dp;
  dx.reserve(n);
  dp.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) dx.push_back(coefficient(i));
  for (std::size_t i = 1; i <= n; ++i) dp.push_back(coefficient(n + i));
  return geom::OneForm(coefficient(0), std::move(dx), std::move(dp));
}

double normal_form_consistency(const NormalForm& nf, const geom::OneForm& given,
                               std::span<const std::vector<double>> points) {
  if (!(given.chart() == nf.chart())) {
    throw Error(ErrorCode::ChartMismatch, "one-form chart does not match normal form");
  }
  const geom::OneForm eta = eta_components(nf);
  double worst = 0.0;
  for (const auto& point : points) {
    const auto lhs = eta.eval(point);
    const auto rhs = given.eval(point);
    for (std::size_t c = 0; c < lhs.size(); ++c) {
      worst = std::max(worst, std::abs(lhs[c] - rhs[c]));
    }
  }
  return worst;
}

PhaseRates hamilton_rhs(const NormalForm& nf, double t, std::span<const double> x,
                        std::span<const double> p) {
  const auto n = static_cast<std::size_t>(nf.dimension());
  if (x.size() != n || p.size() != n) {
    throw Error(ErrorCode::Validation, "state does not match dimension");
  }
  std::vector<double> point;
  point.reserve(2 * n + 1);
  point.push_back(t);
  point.insert(point.end(), x.begin(), x.end());
  point.insert(point.end(), p.begin(), p.end());
  PhaseRates rates;
  rates.xdot.reserve(n);
  rates.pdot.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    rates.xdot.push_back(nf.xdot_field(i)(point));
    rates.pdot.push_back(nf.pdot_field(i)(point));
  }
  return rates;
}

Trajectory integrate_hamilton(const NormalForm& nf, double t0,
                              std::span<const double> x0, std::span<const double> p0,
                              double t1, double step) {
  const auto n = static_cast<std::size_t>(nf.dimension());
  if (x0.size() != n || p0.size() != n) {
    throw Error(ErrorCode::Validation, "initial state does not match dimension");
  }
  std::vector<double> y0;
  y0.insert(y0.end(), x0.begin(), x0.end());
  y0.insert(y0.end(), p0.begin(), p0.end());

  std::vector<double> point(2 * n + 1);
  auto rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
    point[0] = t;
    for (std::size_t i = 0; i < 2 * n; ++i) point[1 + i] = y[i];
    for (std::size_t i = 0; i < n; ++i) {
      dy[i] = nf.xdot_field(i)(point);
      dy[n + i] = nf.pdot_field(i)(point);
    }
  };
  const auto run = num::rk4_integrate(rhs, t0, y0, t1, step);
  return Trajectory(nf.chart(), run.times, run.states, run.step);
}

double energy_balance_residual(const NormalForm& nf, const Trajectory& traj) {
  require_kind(traj.chart(), ChartKind::Momentum, "energy_balance_residual");
  if (!(traj.chart() == nf.chart())) {
    throw Error(ErrorCode::ChartMismatch, "trajectory chart does not match normal form");
  }
  if (traj.size() < 3) {
    throw Error(ErrorCode::Validation, "need at least 3 samples");
  }
  const ScalarField dh_dt_partial = nf.hamiltonian().diff_index(0);
  std::vector<ScalarField> dissipation;  // mu_a {H, v^a}
  for (const auto& term : nf.terms()) {
    dissipation.push_back(term.mu * geom::poisson_bracket(nf.hamiltonian(), term.v));
  }

  const auto h_values = along(nf.hamiltonian(), traj);
  const auto dh_dt = num::derivative_series(h_values, traj.step());
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
    const auto point = traj.point(k);
    double expected = dh_dt_partial(point);
    for (const auto& term : dissipation) expected -= term(point);
    worst = std::max(worst, std::abs(dh_dt[k] - expected));
  }
  return worst;
}

}  // namespace hamflow::mech
