#ifndef HAMFLOW_MECHANICS_HPP
#define HAMFLOW_MECHANICS_HPP

#include <span>
#include <vector>

#include "hamflow/expr.hpp"
#include "hamflow/geometry.hpp"

namespace hamflow::mech {

using expr::ChartKind;
using expr::ChartSpec;
using expr::ScalarField;
using geom::NormalFormTerm;

// Trajectories that fail the integrability test worse than this are
// rejected by the curve functionals below.
inline constexpr double kIntegrableTolerance = 1e-4;

// Uniformly sampled curve in a velocity or momentum chart. State rows
// hold (x1..xn, v1..vn) or (x1..xn, p1..pn).
class Trajectory {
 public:
  Trajectory(ChartSpec chart, std::vector<double> times,
             std::vector<std::vector<double>> states, double step);

  // Times generated as t0 + k*step.
  static Trajectory uniform(const ChartSpec& chart, double t0, double step,
                            std::vector<std::vector<double>> states);

  const ChartSpec& chart() const noexcept { return chart_; }
  int dimension() const noexcept { return chart_.dimension(); }
  std::size_t size() const noexcept { return times_.size(); }
  double step() const noexcept { return step_; }
  double time(std::size_t k) const { return times_.at(k); }
  std::span<const double> state(std::size_t k) const { return states_.at(k); }

  // Full chart point (t, x.., v-or-p..) for sample k.
  std::vector<double> point(std::size_t k) const;

 private:
  ChartSpec chart_;
  std::vector<double> times_;
  std::vector<std::vector<double>> states_;
  double step_;
};

// Variation delta-x^i(t): components may depend on t only.
class VariationField {
 public:
  explicit VariationField(std::vector<ScalarField> components);

  std::size_t dimension() const noexcept { return components_.size(); }
  const ScalarField& component(std::size_t i) const { return components_.at(i); }
  const ChartSpec& chart() const noexcept { return components_.front().chart(); }

 private:
  std::vector<ScalarField> components_;
};

// phi = P dt + F_i dx^i + p_i dv^i on a velocity chart. The components
// act as the constitutive data (power, force, momentum) of the system.
class FundamentalForm {
 public:
  FundamentalForm(ScalarField power, std::vector<ScalarField> force,
                  std::vector<ScalarField> momentum);

  // phi = dL.
  static FundamentalForm from_lagrangian(const ScalarField& lagrangian);

  const ChartSpec& chart() const noexcept { return power_.chart(); }
  const ScalarField& power() const noexcept { return power_; }
  const ScalarField& force(std::size_t i) const { return force_.at(i); }
  const ScalarField& momentum(std::size_t i) const { return momentum_.at(i); }

 private:
  ScalarField power_;
  std::vector<ScalarField> force_;
  std::vector<ScalarField> momentum_;
};

// eta = dH - mu_a dv^a on a momentum chart. With no terms this is the
// exact (classical Hamiltonian) case. The generalized Hamilton equation
// right-hand sides are built symbolically on construction.
class NormalForm {
 public:
  NormalForm(ScalarField hamiltonian, std::vector<NormalFormTerm> terms);

  const ChartSpec& chart() const noexcept { return hamiltonian_.chart(); }
  int dimension() const noexcept { return chart().dimension(); }
  const ScalarField& hamiltonian() const noexcept { return hamiltonian_; }
  const std::vector<NormalFormTerm>& terms() const noexcept { return terms_; }

  const ScalarField& xdot_field(std::size_t i) const { return xdot_.at(i); }
  const ScalarField& pdot_field(std::size_t i) const { return pdot_.at(i); }

 private:
  ScalarField hamiltonian_;
  std::vector<NormalFormTerm> terms_;
  std::vector<ScalarField> xdot_;
  std::vector<ScalarField> pdot_;
};

// --- curve diagnostics (velocity chart) ------------------------------------

// r^i(t_k) = v^i(t_k) - finite-difference xdot^i(t_k); zero for 1-jet
// prolongations up to O(h^2).
std::vector<std::vector<double>> integrability_residual(const Trajectory& traj);
double max_integrability_residual(const Trajectory& traj);

// Integral of L along the (integrable) curve by composite trapezoid.
double action_value(const ScalarField& lagrangian, const Trajectory& traj,
                    double integrable_tol = kIntegrableTolerance);

// delta L / delta x^i = d/dt(dL/dv^i) - dL/dx^i along the curve; the
// outer time derivative is a central difference of the sampled series.
std::vector<std::vector<double>> variational_derivative(
    const ScalarField& lagrangian, const Trajectory& traj,
    double integrable_tol = kIntegrableTolerance);

// Max-norm of the variational derivative over interior samples.
double euler_lagrange_residual(const ScalarField& lagrangian, const Trajectory& traj,
                               double integrable_tol = kIntegrableTolerance);

struct BoundaryPair {
  double interior = 0.0;
  double boundary = 0.0;
  double total() const noexcept { return interior + boundary; }
};

// First variation split into -integral(deltaL/deltax . deltax) dt and the
// endpoint bracket [dL/dv^i deltax^i]. Fixed-endpoint variations kill the
// boundary part; the transversality alternative instead inspects it.
BoundaryPair first_variation(const ScalarField& lagrangian, const Trajectory& traj,
                             const VariationField& variation,
                             double integrable_tol = kIntegrableTolerance);

// E = dL/dv^i xdot^i - L per sample.
std::vector<double> total_energy(const ScalarField& lagrangian, const Trajectory& traj,
                                 double integrable_tol = kIntegrableTolerance);

// Max interior |dE/dt + dL/dt|; vanishes along extremals.
double energy_theorem_residual(const ScalarField& lagrangian, const Trajectory& traj,
                               double integrable_tol = kIntegrableTolerance);

// Total virtual work: integral((F_i - dp_i/dt) deltax^i) dt plus the
// endpoint bracket [p_i deltax^i].
BoundaryPair virtual_work_total(const FundamentalForm& phi, const Trajectory& traj,
                                const VariationField& variation,
                                double integrable_tol = kIntegrableTolerance);

// Max interior |F_i - dp_i/dt| along the prolonged curve.
double newtonian_residual(const FundamentalForm& phi, const Trajectory& traj,
                          double integrable_tol = kIntegrableTolerance);

// --- Lagrangian-side dynamics ----------------------------------------------

// Accelerations from m_ij vdot^j = Q_i + dT/dx^i - d2T/dtdv^i -
// d2T/dx^j dv^i v^j. Forces may be empty (treated as zero).
std::vector<double> lagrange_first_form_rhs(const ScalarField& kinetic,
                                            std::span<const ScalarField> forces,
                                            double t, std::span<const double> x,
                                            std::span<const double> v);

Trajectory integrate_lagrange(const ScalarField& kinetic,
                              std::span<const ScalarField> forces, double t0,
                              std::span<const double> x0, std::span<const double> v0,
                              double t1, double step);

// Dynamics of a fundamental form in Newtonian form F_i = dp_i/dt,
// solved for the accelerations through dp_i/dv^j.
Trajectory integrate_fundamental(const FundamentalForm& phi, double t0,
                                 std::span<const double> x0,
                                 std::span<const double> v0, double t1, double step);

// --- Legendre transform ----------------------------------------------------

// p_i = dL/dv^i.
std::vector<ScalarField> momentum_map(const ScalarField& lagrangian);

// m_ij = d2L/dv^i dv^j, row-major n*n.
std::vector<ScalarField> mass_matrix(const ScalarField& lagrangian);

// Numeric Legendre transform: velocity_of inverts the momentum map by
// Newton iteration (initial guess v = p, residual tolerance 1e-12, at
// most 50 iterations); hamiltonian composes H = p.v - L.
class LegendreTransform {
 public:
  explicit LegendreTransform(ScalarField lagrangian);

  std::vector<double> velocity_of(double t, std::span<const double> x,
                                  std::span<const double> p) const;
  double hamiltonian(double t, std::span<const double> x,
                     std::span<const double> p) const;

  ChartSpec momentum_chart() const;

 private:
  ScalarField lagrangian_;
  std::vector<ScalarField> momentum_;
  std::vector<ScalarField> mass_;
};

// --- generalized Hamiltonian side ------------------------------------------

// Coefficients of eta = dH - mu_a dv^a as a one-form.
geom::OneForm eta_components(const NormalForm& nf);

// Max componentwise deviation between eta_components(nf) and a given
// one-form over the sample points.
double normal_form_consistency(const NormalForm& nf, const geom::OneForm& given,
                               std::span<const std::vector<double>> points);

struct PhaseRates {
  std::vector<double> xdot;
  std::vector<double> pdot;
};

// xdot^i = dH/dp_i - mu_a dv^a/dp_i, pdot_i = -dH/dx^i + mu_a dv^a/dx^i.
PhaseRates hamilton_rhs(const NormalForm& nf, double t, std::span<const double> x,
                        std::span<const double> p);

// Fixed-step RK4 on hamilton_rhs, every step recorded.
Trajectory integrate_hamilton(const NormalForm& nf, double t0,
                              std::span<const double> x0, std::span<const double> p0,
                              double t1, double step);

// Max interior |dH/dt - dH/dt_partial + mu_a {H, v^a}| along the
// trajectory, with dH/dt measured by central differences.
double energy_balance_residual(const NormalForm& nf, const Trajectory& traj);

}  // namespace hamflow::mech

#endif  // HAMFLOW_MECHANICS_HPP
