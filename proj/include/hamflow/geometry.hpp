#ifndef HAMFLOW_GEOMETRY_HPP
#define HAMFLOW_GEOMETRY_HPP

#include <span>
#include <vector>

#include "hamflow/expr.hpp"

namespace hamflow::geom {

using expr::ChartSpec;
using expr::ScalarField;

// Vector field X^t d/dt + X^i d/dx^i + X_i d/dp_i on a momentum chart.
class PhaseVectorField {
 public:
  PhaseVectorField(ScalarField component_t, std::vector<ScalarField> components_x,
                   std::vector<ScalarField> components_p);

  static PhaseVectorField zero(const ChartSpec& chart);

  const ChartSpec& chart() const noexcept { return component_t_.chart(); }
  int dimension() const noexcept { return chart().dimension(); }

  const ScalarField& component_t() const noexcept { return component_t_; }
  const ScalarField& component_x(std::size_t i) const { return components_x_.at(i); }
  const ScalarField& component_p(std::size_t i) const { return components_p_.at(i); }

  // All 2n+1 component values at a point, ordered (t, x.., p..).
  std::vector<double> eval(std::span<const double> point) const;

  PhaseVectorField scaled(const ScalarField& factor) const;
  friend PhaseVectorField operator+(const PhaseVectorField& a, const PhaseVectorField& b);
  friend PhaseVectorField operator-(const PhaseVectorField& a, const PhaseVectorField& b);

 private:
  ScalarField component_t_;
  std::vector<ScalarField> components_x_;
  std::vector<ScalarField> components_p_;
};

// a_t dt + a_i dx^i + b^i dp_i on a momentum chart.
class OneForm {
 public:
  OneForm(ScalarField coefficient_t, std::vector<ScalarField> coefficients_x,
          std::vector<ScalarField> coefficients_p);

  const ChartSpec& chart() const noexcept { return coefficient_t_.chart(); }
  int dimension() const noexcept { return chart().dimension(); }

  const ScalarField& coefficient_t() const noexcept { return coefficient_t_; }
  const ScalarField& coefficient_x(std::size_t i) const { return coefficients_x_.at(i); }
  const ScalarField& coefficient_p(std::size_t i) const { return coefficients_p_.at(i); }

  std::vector<double> eval(std::span<const double> point) const;

 private:
  ScalarField coefficient_t_;
  std::vector<ScalarField> coefficients_x_;
  std::vector<ScalarField> coefficients_p_;
};

struct NormalFormTerm {
  ScalarField mu;
  ScalarField v;
};

// Normal-form presentation of a vector field: the symplectic dual of
// f's differential plus mu_a times the duals of the v^a differentials.
class NormalFormVectorField {
 public:
  NormalFormVectorField(ScalarField f, std::vector<NormalFormTerm> terms);

  const ChartSpec& chart() const noexcept { return f_.chart(); }
  const ScalarField& f() const noexcept { return f_; }
  const std::vector<NormalFormTerm>& terms() const noexcept { return terms_; }

 private:
  ScalarField f_;
  std::vector<NormalFormTerm> terms_;
};

// Contraction of the symplectic 2-form with X: X_i dx^i - X^i dp_i.
// The t-component of X plays no role.
OneForm interior_product(const PhaseVectorField& x_field);

// Inverse of interior_product on forms with no dt part. The dt
// coefficient is checked symbolically, then at 16 seeded points.
PhaseVectorField iota_inverse(const OneForm& alpha);

// Symplectic dual of df: the unique X with interior_product(X) = df
// (dt part dropped). Components: X^i = -df/dp_i, X_i = df/dx^i.
PhaseVectorField symplectic_gradient(const ScalarField& f);

// df/dx^i dg/dp_i - df/dp_i dg/dx^i, built symbolically.
ScalarField poisson_bracket(const ScalarField& f, const ScalarField& g);

// Same bracket routed through the vector-field machinery: the
// directional derivative of g along the symplectic gradient of f,
// evaluated at a point. Cross-validates poisson_bracket.
double poisson_via_omega(const ScalarField& f, const ScalarField& g,
                         std::span<const double> point);

// (X lambda): sum of components times partials over all 2n+1 coordinates.
ScalarField directional_derivative(const PhaseVectorField& x_field,
                                   const ScalarField& fn);

// Commutator [X,Y]^k = X^j d_j Y^k - Y^j d_j X^k over all coordinates.
PhaseVectorField lie_bracket(const PhaseVectorField& a, const PhaseVectorField& b);

// grad(f) + sum_a mu_a grad(v^a).
PhaseVectorField realize(const NormalFormVectorField& a);

// Lie bracket of two normal-form fields assembled term by term from
// Poisson brackets and directional derivatives of the normal-form data;
// equals lie_bracket(realize(a), realize(b)).
PhaseVectorField bracket_decomposition(const NormalFormVectorField& a,
                                       const NormalFormVectorField& b);

// df as a OneForm.
OneForm differential(const ScalarField& f);

}  // namespace hamflow::geom

#endif  // HAMFLOW_GEOMETRY_HPP
