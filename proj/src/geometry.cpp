#include "hamflow/geometry.hpp"

#include <cmath>
#include <utility>

#include "hamflow/numeric.hpp"

namespace hamflow::geom {

namespace {

void require_momentum_chart(const ChartSpec& chart, const char* what) {
  if (chart.kind() != expr::ChartKind::Momentum) {
    throw Error(ErrorCode::ChartMismatch,
                std::string(what) + " requires a momentum chart");
  }
}

void require_same_chart(const ChartSpec& a, const ChartSpec& b) {
  if (!(a == b)) {
    throw Error(ErrorCode::ChartMismatch, "operands live on different charts");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// PhaseVectorField / OneForm

PhaseVectorField::PhaseVectorField(ScalarField component_t,
                                   std::vector<ScalarField> components_x,
                                   std::vector<ScalarField> components_p)
    : component_t_(std::move(component_t)),
      components_x_(std::move(components_x)),
      components_p_(std::move(components_p)) {
  const ChartSpec& c = component_t_.chart();
  require_momentum_chart(c, "PhaseVectorField");
  const auto n = static_cast<std::size_t>(c.dimension());
  if (components_x_.size() != n || components_p_.size() != n) {
    throw Error(ErrorCode::Validation, "component count does not match chart dimension");
  }
  for (const auto& f : components_x_) require_same_chart(c, f.chart());
  for (const auto& f : components_p_) require_same_chart(c, f.chart());
}

PhaseVectorField PhaseVectorField::zero(const ChartSpec& chart) {
  const auto n = static_cast<std::size_t>(chart.dimension());
  const ScalarField z = ScalarField::constant(chart, 0.0);
  return PhaseVectorField(z, std::vector<ScalarField>(n, z),
                          std::vector<ScalarField>(n, z));
}

std::vector<double> PhaseVectorField::eval(std::span<const double> point) const {
  std::vector<double> out;
  out.reserve(chart().size());
  out.push_back(component_t_(point));
  for (const auto& f : components_x_) out.push_back(f(point));
  for (const auto& f : components_p_) out.push_back(f(point));
  return out;
}

PhaseVectorField PhaseVectorField::scaled(const ScalarField& factor) const {
  std::vector<ScalarField> xs, ps;
  xs.reserve(components_x_.size());
  ps.reserve(components_p_.size());
  for (const auto& f : components_x_) xs.push_back(factor * f);
  for (const auto& f : components_p_) ps.push_back(factor * f);
  return PhaseVectorField(factor * component_t_, std::move(xs), std::move(ps));
}

PhaseVectorField operator+(const PhaseVectorField& a, const PhaseVectorField& b) {
  require_same_chart(a.chart(), b.chart());
  std::vector<ScalarField> xs, ps;
  for (std::size_t i = 0; i < a.components_x_.size(); ++i) {
    xs.push_back(a.components_x_[i] + b.components_x_[i]);
    ps.push_back(a.components_p_[i] + b.components_p_[i]);
  }
  return PhaseVectorField(a.component_t_ + b.component_t_, std::move(xs), std::move(ps));
}

PhaseVectorField operator-(const PhaseVectorField& a, const PhaseVectorField& b) {
  require_same_chart(a.chart(), b.chart());
  std::vector<ScalarField> xs, ps;
  for (std::size_t i = 0; i < a.components_x_.size(); ++i) {
    xs.push_back(a.components_x_[i] - b.components_x_[i]);
    ps.push_back(a.components_p_[i] - b.components_p_[i]);
  }
  return PhaseVectorField(a.component_t_ - b.component_t_, std::move(xs), std::move(ps));
}

OneForm::OneForm(ScalarField coefficient_t, std::vector<ScalarField> coefficients_x,
                 std::vector<ScalarField> coefficients_p)
    : coefficient_t_(std::move(coefficient_t)),
      coefficients_x_(std::move(coefficients_x)),
      coefficients_p_(std::move(coefficients_p)) {
  const ChartSpec& c = coefficient_t_.chart();
  require_momentum_chart(c, "OneForm");
  const auto n = static_cast<std::size_t>(c.dimension());
  if (coefficients_x_.size() != n || coefficients_p_.size() != n) {
    throw Error(ErrorCode::Validation, "coefficient count does not match chart dimension");
  }
  for (const auto& f : coefficients_x_) require_same_chart(c, f.chart());
  for (const auto& f : coefficients_p_) require_same_chart(c, f.chart());
}

std::vector<double> OneForm::eval(std::span<const double> point) const {
  std::vector<double> out;
  out.reserve(chart().size());
  out.push_back(coefficient_t_(point));
  for (const auto& f : coefficients_x_) out.push_back(f(point));
  for (const auto& f : coefficients_p_) out.push_back(f(point));
  return out;
}

NormalFormVectorField::NormalFormVectorField(ScalarField f,
                                             std::vector<NormalFormTerm> terms)
    : f_(std::move(f)), terms_(std::move(terms)) {
  require_momentum_chart(f_.chart(), "NormalFormVectorField");
  for (const auto& term : terms_) {
    require_same_chart(f_.chart(), term.mu.chart());
    require_same_chart(f_.chart(), term.v.chart());
  }
}

// ---------------------------------------------------------------------------
// Operations

OneForm interior_product(const PhaseVectorField& x_field) {
  const ChartSpec& chart = x_field.chart();
  const auto n = static_cast<std::size_t>(chart.dimension());
  std::vector<ScalarField> dx, dp;
  dx.reserve(n);
  dp.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    dx.push_back(x_field.component_p(i));
    dp.push_back(-x_field.component_x(i));
  }
  return OneForm(ScalarField::constant(chart, 0.0), std::move(dx), std::move(dp));
}

PhaseVectorField iota_inverse(const OneForm& alpha) {
  const ScalarField& dt = alpha.coefficient_t();
  if (!dt.is_constant_zero()) {
    // Light simplification cannot always cancel a symbolic zero; fall
    // back to evaluation at seeded points.
    const auto points = num::sample_points(num::unit_box(alpha.chart().size()), 16,
                                           0x1d7a0c5u);
    for (const auto& point : points) {
      if (std::abs(dt(point)) > 1e-10) {
        throw Error(ErrorCode::NonZeroDt,
                    "one-form has a non-zero dt component ('" + dt.str() +
                        "'), outside the image of the interior product");
      }
    }
  }
  const auto n = static_cast<std::size_t>(alpha.chart().dimension());
  std::vector<ScalarField> xs, ps;
  xs.reserve(n);
  ps.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs.push_back(-alpha.coefficient_p(i));
    ps.push_back(alpha.coefficient_x(i));
  }
  return PhaseVectorField(ScalarField::constant(alpha.chart(), 0.0), std::move(xs),
                          std::move(ps));
}

OneForm differential(const ScalarField& f) {
  const ChartSpec& chart = f.chart();
  require_momentum_chart(chart, "differential");
  const auto n = static_cast<std::size_t>(chart.dimension());
  std::vector<ScalarField> dx, dp;
  dx.reserve(n);
  dp.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) dx.push_back(f.diff_index(i));
  for (std::size_t i = 1; i <= n; ++i) dp.push_back(f.diff_index(n + i));
  return OneForm(f.diff_index(0), std::move(dx), std::move(dp));
}

PhaseVectorField symplectic_gradient(const ScalarField& f) {
  const ChartSpec& chart = f.chart();
  require_momentum_chart(chart, "symplectic_gradient");
  const auto n = static_cast<std::size_t>(chart.dimension());
  std::vector<ScalarField> xs, ps;
  xs.reserve(n);
  ps.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) xs.push_back(-f.diff_index(n + i));
  for (std::size_t i = 1; i <= n; ++i) ps.push_back(f.diff_index(i));
  return PhaseVectorField(ScalarField::constant(chart, 0.0), std::move(xs),
                          std::move(ps));
}

ScalarField poisson_bracket(const ScalarField& f, const ScalarField& g) {
  require_same_chart(f.chart(), g.chart());
  require_momentum_chart(f.chart(), "poisson_bracket");
  const auto n = static_cast<std::size_t>(f.chart().dimension());
  ScalarField sum = ScalarField::constant(f.chart(), 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    sum = sum + f.diff_index(i) * g.diff_index(n + i) -
          f.diff_index(n + i) * g.diff_index(i);
  }
  return sum;
}

double poisson_via_omega(const ScalarField& f, const ScalarField& g,
                         std::span<const double> point) {
  require_same_chart(f.chart(), g.chart());
  return directional_derivative(symplectic_gradient(f), g)(point);
}

ScalarField directional_derivative(const PhaseVectorField& x_field,
                                   const ScalarField& fn) {
  require_same_chart(x_field.chart(), fn.chart());
  const auto n = static_cast<std::size_t>(x_field.dimension());
  ScalarField sum = x_field.component_t() * fn.diff_index(0);
  for (std::size_t i = 0; i < n; ++i) {
    sum = sum + x_field.component_x(i) * fn.diff_index(1 + i);
    sum = sum + x_field.component_p(i) * fn.diff_index(1 + n + i);
  }
  return sum;
}

PhaseVectorField lie_bracket(const PhaseVectorField& a, const PhaseVectorField& b) {
  require_same_chart(a.chart(), b.chart());
  const ChartSpec& chart = a.chart();
  const auto n = static_cast<std::size_t>(chart.dimension());

  auto component = [&](const PhaseVectorField& v, std::size_t slot) -> const ScalarField& {
    if (slot == 0) return v.component_t();
    if (slot <= n) return v.component_x(slot - 1);
    return v.component_p(slot - n - 1);
  };

  auto bracket_component = [&](std::size_t slot) {
    ScalarField sum = ScalarField::constant(chart, 0.0);
    for (std::size_t j = 0; j < chart.size(); ++j) {
      sum = sum + component(a, j) * component(b, slot).diff_index(j) -
            component(b, j) * component(a, slot).diff_index(j);
    }
    return sum;
  };

  ScalarField ct = bracket_component(0);
  std::vector<ScalarField> xs, ps;
  xs.reserve(n);
  ps.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) xs.push_back(bracket_component(i));
  for (std::size_t i = 1; i <= n; ++i) ps.push_back(bracket_component(n + i));
  return PhaseVectorField(std::move(ct), std::move(xs), std::move(ps));
}

PhaseVectorField realize(const NormalFormVectorField& a) {
  PhaseVectorField out = symplectic_gradient(a.f());
  for (const auto& term : a.terms()) {
    out = out + symplectic_gradient(term.v).scaled(term.mu);
  }
  return out;
}

PhaseVectorField bracket_decomposition(const NormalFormVectorField& a,
                                       const NormalFormVectorField& b) {
  require_same_chart(a.chart(), b.chart());
  const ScalarField& f = a.f();
  const ScalarField& g = b.f();

  std::vector<PhaseVectorField> grad_v, grad_sigma;
  for (const auto& term : a.terms()) grad_v.push_back(symplectic_gradient(term.v));
  for (const auto& term : b.terms()) grad_sigma.push_back(symplectic_gradient(term.v));
  const PhaseVectorField grad_f = symplectic_gradient(f);
  const PhaseVectorField grad_g = symplectic_gradient(g);

  PhaseVectorField out = symplectic_gradient(poisson_bracket(f, g));

  for (std::size_t big_a = 0; big_a < b.terms().size(); ++big_a) {
    const auto& [rho, sigma] = b.terms()[big_a];
    out = out + symplectic_gradient(poisson_bracket(f, sigma)).scaled(rho);
  }
  for (std::size_t small_a = 0; small_a < a.terms().size(); ++small_a) {
    const auto& [mu, v] = a.terms()[small_a];
    out = out + symplectic_gradient(poisson_bracket(v, g)).scaled(mu);
    for (std::size_t big_a = 0; big_a < b.terms().size(); ++big_a) {
      const auto& [rho, sigma] = b.terms()[big_a];
      out = out + symplectic_gradient(poisson_bracket(v, sigma)).scaled(mu * rho);
    }
  }

  // -((grad g) mu_a + rho_A (grad sigma^A mu_a)) grad v^a
  for (std::size_t small_a = 0; small_a < a.terms().size(); ++small_a) {
    const auto& [mu, v] = a.terms()[small_a];
    ScalarField weight = directional_derivative(grad_g, mu);
    for (std::size_t big_a = 0; big_a < b.terms().size(); ++big_a) {
      const auto& [rho, sigma] = b.terms()[big_a];
      weight = weight + rho * directional_derivative(grad_sigma[big_a], mu);
    }
    out = out - grad_v[small_a].scaled(weight);
  }

  // +((grad f) rho_A + mu_a (grad v^a rho_A)) grad sigma^A
  for (std::size_t big_a = 0; big_a < b.terms().size(); ++big_a) {
    const auto& [rho, sigma] = b.terms()[big_a];
    ScalarField weight = directional_derivative(grad_f, rho);
    for (std::size_t small_a = 0; small_a < a.terms().size(); ++small_a) {
      const auto& [mu, v] = a.terms()[small_a];
      weight = weight + mu * directional_derivative(grad_v[small_a], rho);
    }
    out = out + grad_sigma[big_a].scaled(weight);
  }

  return out;
}

}  // namespace hamflow::geom
