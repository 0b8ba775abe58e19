#include "hamflow/hj.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace hamflow::hj {

namespace {

void require_config_chart(const ChartSpec& chart, const char* what) {
  if (chart.kind() != expr::ChartKind::Config) {
    throw Error(ErrorCode::ChartMismatch,
                std::string(what) + " requires a config chart (t, x1..xn)");
  }
}

void check_point(const ChartSpec& chart, std::span<const double> point) {
  if (point.size() != chart.size()) {
    throw Error(ErrorCode::Validation, "config point has wrong width");
  }
}

}  // namespace

ContactField::ContactField(std::vector<ScalarField> components)
    : components_(std::move(components)) {
  if (components_.empty()) {
    throw Error(ErrorCode::Validation, "contact field needs at least one component");
  }
  const ChartSpec& chart = components_.front().chart();
  require_config_chart(chart, "ContactField");
  if (components_.size() != static_cast<std::size_t>(chart.dimension())) {
    throw Error(ErrorCode::Validation, "contact field component count mismatch");
  }
  for (const auto& f : components_) {
    if (!(f.chart() == chart)) {
      throw Error(ErrorCode::ChartMismatch, "contact components on different charts");
    }
  }
}

GeneratingFunction::GeneratingFunction(ScalarField s) : s_(std::move(s)) {
  require_config_chart(s_.chart(), "GeneratingFunction");
}

ContactField GeneratingFunction::contact_field() const {
  const auto n = static_cast<std::size_t>(chart().dimension());
  std::vector<ScalarField> components;
  components.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) components.push_back(s_.diff_index(i));
  return ContactField(std::move(components));
}

double closure_residual(const ContactField& p,
                        std::span<const std::vector<double>> points) {
  const auto n = static_cast<std::size_t>(p.dimension());
  if (n < 2) return 0.0;
  std::vector<ScalarField> curls;  // d_i p_j - d_j p_i for i < j
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = i + 1; j <= n; ++j) {
      curls.push_back(p.component(j - 1).diff_index(i) -
                      p.component(i - 1).diff_index(j));
    }
  }
  double worst = 0.0;
  for (const auto& point : points) {
    check_point(p.chart(), point);
    for (const auto& curl : curls) {
      worst = std::max(worst, std::abs(curl(point)));
    }
  }
  return worst;
}

double hj_residual(const GeneratingFunction& s, const ScalarField& hamiltonian,
                   std::span<const std::vector<double>> points) {
  if (hamiltonian.chart().kind() != expr::ChartKind::Momentum ||
      hamiltonian.chart().dimension() != s.chart().dimension()) {
    throw Error(ErrorCode::ChartMismatch,
                "hamiltonian must live on the matching momentum chart");
  }
  const auto n = static_cast<std::size_t>(s.chart().dimension());
  const ScalarField ds_dt = s.s().diff_index(0);
  std::vector<ScalarField> ds_dx;
  for (std::size_t i = 1; i <= n; ++i) ds_dx.push_back(s.s().diff_index(i));

  double worst = 0.0;
  std::vector<double> mpoint(2 * n + 1);
  for (const auto& point : points) {
    check_point(s.chart(), point);
    for (std::size_t c = 0; c <= n; ++c) mpoint[c] = point[c];
    for (std::size_t i = 0; i < n; ++i) mpoint[1 + n + i] = ds_dx[i](point);
    worst = std::max(worst, std::abs(ds_dt(point) + hamiltonian(mpoint)));
  }
  return worst;
}

PulledBackTheta::PulledBackTheta(const ContactField& p, const mech::NormalForm& nf)
    : contact_(p) {
  if (nf.dimension() != p.dimension()) {
    throw Error(ErrorCode::ChartMismatch,
                "normal form dimension does not match contact field");
  }
  const auto n = static_cast<std::size_t>(p.dimension());
  for (std::size_t i = 0; i < n; ++i) {
    dp_dt_.push_back(p.component(i).diff_index(0));
    for (std::size_t j = 1; j <= n; ++j) {
      dp_dx_.push_back(p.component(i).diff_index(j));
    }
  }
  const ScalarField& h = nf.hamiltonian();
  for (std::size_t i = 1; i <= n; ++i) h_dx_.push_back(h.diff_index(i));
  for (std::size_t j = 1; j <= n; ++j) h_dp_.push_back(h.diff_index(n + j));
  for (const auto& term : nf.terms()) {
    mu_.push_back(term.mu);
    for (std::size_t i = 1; i <= n; ++i) v_dx_.push_back(term.v.diff_index(i));
    for (std::size_t j = 1; j <= n; ++j) v_dp_.push_back(term.v.diff_index(n + j));
  }
}

std::vector<double> PulledBackTheta::momentum_point(
    std::span<const double> config_point) const {
  const auto n = static_cast<std::size_t>(dimension());
  check_point(contact_.chart(), config_point);
  std::vector<double> mpoint(2 * n + 1);
  for (std::size_t c = 0; c <= n; ++c) mpoint[c] = config_point[c];
  for (std::size_t i = 0; i < n; ++i) {
    mpoint[1 + n + i] = contact_.component(i)(config_point);
  }
  return mpoint;
}

double PulledBackTheta::dt_dx(std::size_t i, std::span<const double> config_point) const {
  const auto n = static_cast<std::size_t>(dimension());
  if (i >= n) throw Error(ErrorCode::Validation, "index out of range");
  const auto mpoint = momentum_point(config_point);

  // Spatial derivative of a composition G(t, x, p(t, x)) by chain rule.
  auto composed_dx = [&](std::span<const ScalarField> g_dx,
                         std::span<const ScalarField> g_dp) {
    double value = g_dx[i](mpoint);
    for (std::size_t j = 0; j < n; ++j) {
      value += g_dp[j](mpoint) * dp_dx_[j * n + i](config_point);
    }
    return value;
  };

  double out = dp_dt_[i](config_point) + composed_dx(h_dx_, h_dp_);
  for (std::size_t a = 0; a < mu_.size(); ++a) {
    out -= mu_[a](mpoint) *
           composed_dx(std::span(v_dx_).subspan(a * n, n),
                       std::span(v_dp_).subspan(a * n, n));
  }
  return out;
}

double PulledBackTheta::dx_dx(std::size_t i, std::size_t j,
                              std::span<const double> config_point) const {
  const auto n = static_cast<std::size_t>(dimension());
  if (i >= j || j >= n) throw Error(ErrorCode::Validation, "need indices i < j < n");
  check_point(contact_.chart(), config_point);
  return dp_dx_[j * n + i](config_point) - dp_dx_[i * n + j](config_point);
}

PulledBackTheta pullback_theta(const ContactField& p, const mech::NormalForm& nf) {
  return PulledBackTheta(p, nf);
}

GeneralizedHjResidual generalized_hj_residual(const ContactField& p,
                                              const mech::NormalForm& nf,
                                              std::span<const std::vector<double>> points) {
  const PulledBackTheta theta(p, nf);
  const auto n = static_cast<std::size_t>(p.dimension());
  GeneralizedHjResidual out;
  for (const auto& point : points) {
    for (std::size_t i = 0; i < n; ++i) {
      out.a_max = std::max(out.a_max, std::abs(theta.dt_dx(i, point)));
    }
  }
  out.b_max = closure_residual(p, points);
  return out;
}

XiExtraction xi_extraction(const GeneratingFunction& s, const ScalarField& hamiltonian,
                           std::span<const double> times,
                           std::span<const std::vector<double>> spatial_points) {
  if (hamiltonian.chart().kind() != expr::ChartKind::Momentum ||
      hamiltonian.chart().dimension() != s.chart().dimension()) {
    throw Error(ErrorCode::ChartMismatch,
                "hamiltonian must live on the matching momentum chart");
  }
  if (spatial_points.empty()) {
    throw Error(ErrorCode::Validation, "need at least one spatial sample");
  }
  const auto n = static_cast<std::size_t>(s.chart().dimension());
  const ScalarField ds_dt = s.s().diff_index(0);
  std::vector<ScalarField> ds_dx;
  for (std::size_t i = 1; i <= n; ++i) ds_dx.push_back(s.s().diff_index(i));

  XiExtraction out;
  std::vector<double> cpoint(n + 1);
  std::vector<double> mpoint(2 * n + 1);
  for (double t : times) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double sum = 0.0;
    for (const auto& xs : spatial_points) {
      if (xs.size() != n) {
        throw Error(ErrorCode::Validation, "spatial sample has wrong width");
      }
      cpoint[0] = t;
      std::copy(xs.begin(), xs.end(), cpoint.begin() + 1);
      mpoint[0] = t;
      std::copy(xs.begin(), xs.end(), mpoint.begin() + 1);
      for (std::size_t i = 0; i < n; ++i) mpoint[1 + n + i] = ds_dx[i](cpoint);
      const double value = ds_dt(cpoint) + hamiltonian(mpoint);
      lo = std::min(lo, value);
      hi = std::max(hi, value);
      sum += value;
    }
    XiRow row;
    row.t = t;
    row.value = sum / static_cast<double>(spatial_points.size());
    row.spread = hi - lo;
    out.rows.push_back(row);
    out.max_spread = std::max(out.max_spread, row.spread);
  }
  return out;
}

}  // namespace hamflow::hj
