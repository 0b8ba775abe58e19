#ifndef HAMFLOW_HJ_HPP
#define HAMFLOW_HJ_HPP

#include <span>
#include <vector>

#include "hamflow/expr.hpp"
#include "hamflow/mechanics.hpp"

namespace hamflow::hj {

using expr::ChartSpec;
using expr::ScalarField;

// Momentum covector field p_i(t, x) over extended configuration space
// (a config chart).
class ContactField {
 public:
  explicit ContactField(std::vector<ScalarField> components);

  const ChartSpec& chart() const noexcept { return components_.front().chart(); }
  int dimension() const noexcept { return chart().dimension(); }
  const ScalarField& component(std::size_t i) const { return components_.at(i); }

 private:
  std::vector<ScalarField> components_;
};

// S(t, x); the induced contact field is the spatial gradient of S.
class GeneratingFunction {
 public:
  explicit GeneratingFunction(ScalarField s);

  const ScalarField& s() const noexcept { return s_; }
  const ChartSpec& chart() const noexcept { return s_.chart(); }
  ContactField contact_field() const;

 private:
  ScalarField s_;
};

// Max over points and index pairs i<j of |d_i p_j - d_j p_i|; zero iff
// the field is spatially closed there.
double closure_residual(const ContactField& p,
                        std::span<const std::vector<double>> points);

// Max over points of |dS/dt + H(t, x, grad_x S)|.
double hj_residual(const GeneratingFunction& s, const ScalarField& hamiltonian,
                   std::span<const std::vector<double>> points);

// Pullback of the generalized 2-form through a contact field. The
// dt^dx^i coefficients compose the normal-form data with p(t,x); spatial
// derivatives of compositions are expanded by the chain rule. The
// dx^i^dx^j coefficients are the closure defects.
class PulledBackTheta {
 public:
  PulledBackTheta(const ContactField& p, const mech::NormalForm& nf);

  int dimension() const noexcept { return contact_.dimension(); }

  // Coefficient of dt ^ dx^i at a config point.
  double dt_dx(std::size_t i, std::span<const double> config_point) const;

  // Coefficient of dx^i ^ dx^j (i < j) at a config point.
  double dx_dx(std::size_t i, std::size_t j, std::span<const double> config_point) const;

 private:
  std::vector<double> momentum_point(std::span<const double> config_point) const;

  ContactField contact_;
  std::vector<ScalarField> dp_dt_;       // dp_i/dt on the config chart
  std::vector<ScalarField> dp_dx_;       // row-major [i][j] = dp_i/dx^j
  std::vector<ScalarField> h_dx_;        // dH/dx^i on the momentum chart
  std::vector<ScalarField> h_dp_;        // dH/dp_j
  std::vector<ScalarField> mu_;          // mu_a
  std::vector<ScalarField> v_dx_;        // [a][i] = dv^a/dx^i
  std::vector<ScalarField> v_dp_;        // [a][j] = dv^a/dp_j
};

PulledBackTheta pullback_theta(const ContactField& p, const mech::NormalForm& nf);

struct GeneralizedHjResidual {
  double a_max = 0.0;  // dt^dx coefficients
  double b_max = 0.0;  // closure defect
};

// A contact field solves the generalized system when both maxima vanish
// over the sample points.
GeneralizedHjResidual generalized_hj_residual(const ContactField& p,
                                              const mech::NormalForm& nf,
                                              std::span<const std::vector<double>> points);

struct XiRow {
  double t = 0.0;
  double value = 0.0;   // mean of dS/dt + H over the spatial samples
  double spread = 0.0;  // max - min over the spatial samples
};

struct XiExtraction {
  std::vector<XiRow> rows;
  double max_spread = 0.0;
};

// Evaluates dS/dt + H(t, x, grad_x S) over a grid of times and spatial
// points; a small spread per time certifies the residual is a function
// of t alone.
XiExtraction xi_extraction(const GeneratingFunction& s, const ScalarField& hamiltonian,
                           std::span<const double> times,
                           std::span<const std::vector<double>> spatial_points);

}  // namespace hamflow::hj

#endif  // HAMFLOW_HJ_HPP
