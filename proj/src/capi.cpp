#include "hamflow/hamflow.h"

#include <cstdio>
#include <cstring>
#include <exception>
#include <string>
#include <utility>
#include <vector>

#include "hamflow/errors.hpp"
#include "hamflow/expr.hpp"
#include "hamflow/geometry.hpp"
#include "hamflow/mechanics.hpp"
#include "hamflow/scenario.hpp"

using hamflow::Error;
using hamflow::ErrorCode;

struct hamflow_chart {
  hamflow::expr::ChartSpec spec;
};

struct hamflow_field {
  hamflow::expr::ScalarField field;
};

struct hamflow_normal_form {
  hamflow::mech::NormalForm nf;
};

struct hamflow_trajectory {
  hamflow::mech::Trajectory traj;
};

namespace {

thread_local std::string g_last_error;

hamflow_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse: return HAMFLOW_ERR_PARSE;
    case ErrorCode::UnknownIdentifier: return HAMFLOW_ERR_UNKNOWN_IDENTIFIER;
    case ErrorCode::Domain: return HAMFLOW_ERR_DOMAIN;
    case ErrorCode::ChartMismatch: return HAMFLOW_ERR_CHART_MISMATCH;
    case ErrorCode::NonZeroDt: return HAMFLOW_ERR_NONZERO_DT;
    case ErrorCode::NonIntegrable: return HAMFLOW_ERR_NON_INTEGRABLE;
    case ErrorCode::SingularMassMatrix: return HAMFLOW_ERR_SINGULAR_MASS_MATRIX;
    case ErrorCode::NewtonDivergence: return HAMFLOW_ERR_NEWTON_DIVERGENCE;
    case ErrorCode::NonFiniteState: return HAMFLOW_ERR_NON_FINITE_STATE;
    case ErrorCode::Validation: return HAMFLOW_ERR_VALIDATION;
    case ErrorCode::UnknownCheck: return HAMFLOW_ERR_UNKNOWN_CHECK;
    case ErrorCode::Io: return HAMFLOW_ERR_IO;
  }
  return HAMFLOW_ERR_INTERNAL;
}

hamflow_status fail(const char* message) {
  g_last_error = message;
  return HAMFLOW_ERR_INVALID_ARGUMENT;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
hamflow_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return HAMFLOW_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HAMFLOW_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return HAMFLOW_ERR_INTERNAL;
  }
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

hamflow::expr::ChartKind chart_kind_of(hamflow_chart_kind kind) {
  switch (kind) {
    case HAMFLOW_CHART_VELOCITY: return hamflow::expr::ChartKind::Velocity;
    case HAMFLOW_CHART_MOMENTUM: return hamflow::expr::ChartKind::Momentum;
    case HAMFLOW_CHART_CONFIG: return hamflow::expr::ChartKind::Config;
  }
  throw Error(ErrorCode::Validation, "unknown chart kind");
}

hamflow_status report_entry(const char* config_json, const char* out_dir, int jobs,
                            int* checks_failed, char** report_json, bool do_run) {
  if (!config_json) return fail("config_json is NULL");
  if (do_run && !out_dir) return fail("out_dir is NULL");
  if (jobs < 1) return fail("jobs must be >= 1");
  int failed = 0;
  const hamflow_status status = guarded([&] {
    const hamflow::scenario::Report report =
        do_run ? hamflow::scenario::run(config_json, out_dir, jobs)
               : hamflow::scenario::verify(config_json, jobs);
    failed = report.failed_count();
    if (report_json) *report_json = copy_string(report.to_json());
  });
  if (checks_failed) *checks_failed = failed;
  if (status != HAMFLOW_OK) return status;
  if (failed > 0) {
    g_last_error = std::to_string(failed) + " check(s) failed";
    return HAMFLOW_ERR_CHECK_FAILED;
  }
  return HAMFLOW_OK;
}

}  // namespace

extern "C" {

const char* hamflow_version(void) { return HAMFLOW_VERSION_STRING; }

const char* hamflow_last_error(void) { return g_last_error.c_str(); }

void hamflow_string_free(char* s) { delete[] s; }

hamflow_status hamflow_chart_new(hamflow_chart_kind kind, int dimension,
                                 hamflow_chart** out) {
  if (!out) return fail("out is NULL");
  return guarded([&] {
    *out = new hamflow_chart{hamflow::expr::ChartSpec(chart_kind_of(kind), dimension)};
  });
}

void hamflow_chart_free(hamflow_chart* chart) { delete chart; }

hamflow_status hamflow_chart_size(const hamflow_chart* chart, size_t* out) {
  if (!chart || !out) return fail("NULL argument");
  *out = chart->spec.size();
  return HAMFLOW_OK;
}

hamflow_status hamflow_field_parse(const hamflow_chart* chart, const char* source,
                                   hamflow_field** out) {
  if (!chart || !source || !out) return fail("NULL argument");
  return guarded([&] {
    *out = new hamflow_field{hamflow::expr::parse(source, chart->spec)};
  });
}

void hamflow_field_free(hamflow_field* field) { delete field; }

hamflow_status hamflow_field_eval(const hamflow_field* field, const double* point,
                                  size_t point_len, double* out) {
  if (!field || !point || !out) return fail("NULL argument");
  return guarded([&] { *out = field->field({point, point_len}); });
}

hamflow_status hamflow_field_diff(const hamflow_field* field, const char* coordinate,
                                  hamflow_field** out) {
  if (!field || !coordinate || !out) return fail("NULL argument");
  return guarded([&] {
    *out = new hamflow_field{field->field.diff(coordinate)};
  });
}

hamflow_status hamflow_field_str(const hamflow_field* field, char** out) {
  if (!field || !out) return fail("NULL argument");
  return guarded([&] { *out = copy_string(field->field.str()); });
}

hamflow_status hamflow_poisson_bracket(const hamflow_field* f, const hamflow_field* g,
                                       hamflow_field** out) {
  if (!f || !g || !out) return fail("NULL argument");
  return guarded([&] {
    *out = new hamflow_field{hamflow::geom::poisson_bracket(f->field, g->field)};
  });
}

hamflow_status hamflow_normal_form_new(const hamflow_chart* chart,
                                       const char* hamiltonian,
                                       const char* const* mu_sources,
                                       const char* const* v_sources, size_t term_count,
                                       hamflow_normal_form** out) {
  if (!chart || !hamiltonian || !out) return fail("NULL argument");
  if (term_count > 0 && (!mu_sources || !v_sources)) return fail("NULL term sources");
  return guarded([&] {
    std::vector<hamflow::geom::NormalFormTerm> terms;
    terms.reserve(term_count);
    for (size_t a = 0; a < term_count; ++a) {
      if (!mu_sources[a] || !v_sources[a]) {
        throw Error(ErrorCode::Validation, "NULL term source");
      }
      terms.push_back({hamflow::expr::parse(mu_sources[a], chart->spec),
                       hamflow::expr::parse(v_sources[a], chart->spec)});
    }
    *out = new hamflow_normal_form{hamflow::mech::NormalForm(
        hamflow::expr::parse(hamiltonian, chart->spec), std::move(terms))};
  });
}

void hamflow_normal_form_free(hamflow_normal_form* nf) { delete nf; }

hamflow_status hamflow_hamilton_rhs(const hamflow_normal_form* nf, double t,
                                    const double* x, const double* p, double* xdot,
                                    double* pdot) {
  if (!nf || !x || !p || !xdot || !pdot) return fail("NULL argument");
  return guarded([&] {
    const auto n = static_cast<size_t>(nf->nf.dimension());
    const auto rates = hamflow::mech::hamilton_rhs(nf->nf, t, {x, n}, {p, n});
    for (size_t i = 0; i < n; ++i) {
      xdot[i] = rates.xdot[i];
      pdot[i] = rates.pdot[i];
    }
  });
}

hamflow_status hamflow_integrate(const hamflow_normal_form* nf, double t0,
                                 const double* x0, const double* p0, double t1,
                                 double step, hamflow_trajectory** out) {
  if (!nf || !x0 || !p0 || !out) return fail("NULL argument");
  return guarded([&] {
    const auto n = static_cast<size_t>(nf->nf.dimension());
    *out = new hamflow_trajectory{
        hamflow::mech::integrate_hamilton(nf->nf, t0, {x0, n}, {p0, n}, t1, step)};
  });
}

void hamflow_trajectory_free(hamflow_trajectory* trajectory) { delete trajectory; }

hamflow_status hamflow_trajectory_length(const hamflow_trajectory* trajectory,
                                         size_t* out) {
  if (!trajectory || !out) return fail("NULL argument");
  *out = trajectory->traj.size();
  return HAMFLOW_OK;
}

hamflow_status hamflow_trajectory_dimension(const hamflow_trajectory* trajectory,
                                            int* out) {
  if (!trajectory || !out) return fail("NULL argument");
  *out = trajectory->traj.dimension();
  return HAMFLOW_OK;
}

hamflow_status hamflow_trajectory_step(const hamflow_trajectory* trajectory,
                                       double* out) {
  if (!trajectory || !out) return fail("NULL argument");
  *out = trajectory->traj.step();
  return HAMFLOW_OK;
}

hamflow_status hamflow_trajectory_sample(const hamflow_trajectory* trajectory, size_t k,
                                         double* t, double* state) {
  if (!trajectory || !t || !state) return fail("NULL argument");
  return guarded([&] {
    if (k >= trajectory->traj.size()) {
      throw Error(ErrorCode::Validation, "sample index out of range");
    }
    *t = trajectory->traj.time(k);
    const auto row = trajectory->traj.state(k);
    for (size_t c = 0; c < row.size(); ++c) state[c] = row[c];
  });
}

hamflow_status hamflow_trajectory_write_csv(const hamflow_trajectory* trajectory,
                                            const char* path) {
  if (!trajectory || !path) return fail("NULL argument");
  return guarded([&] {
    FILE* out = std::fopen(path, "w");
    if (!out) throw Error(ErrorCode::Io, std::string("cannot open '") + path + "'");
    const auto& traj = trajectory->traj;
    const auto n = static_cast<size_t>(traj.dimension());
    const char prefix = traj.chart().kind() == hamflow::expr::ChartKind::Momentum ? 'p' : 'v';
    std::fprintf(out, "t");
    for (size_t i = 1; i <= n; ++i) std::fprintf(out, ",x%zu", i);
    for (size_t i = 1; i <= n; ++i) std::fprintf(out, ",%c%zu", prefix, i);
    std::fprintf(out, "\n");
    for (size_t k = 0; k < traj.size(); ++k) {
      std::fprintf(out, "%.17g", traj.time(k));
      for (double v : traj.state(k)) std::fprintf(out, ",%.17g", v);
      std::fprintf(out, "\n");
    }
    std::fclose(out);
  });
}

hamflow_status hamflow_energy_balance_residual(const hamflow_normal_form* nf,
                                               const hamflow_trajectory* trajectory,
                                               double* out) {
  if (!nf || !trajectory || !out) return fail("NULL argument");
  return guarded([&] {
    *out = hamflow::mech::energy_balance_residual(nf->nf, trajectory->traj);
  });
}

hamflow_status hamflow_run(const char* config_json, const char* out_dir, int jobs,
                           int* checks_failed, char** report_json) {
  return report_entry(config_json, out_dir, jobs, checks_failed, report_json, true);
}

hamflow_status hamflow_verify(const char* config_json, int jobs, int* checks_failed,
                              char** report_json) {
  return report_entry(config_json, nullptr, jobs, checks_failed, report_json, false);
}

hamflow_status hamflow_builtin_list(char** out) {
  if (!out) return fail("out is NULL");
  return guarded([&] { *out = copy_string(hamflow::scenario::builtin_listing()); });
}

hamflow_status hamflow_builtin_scenario(const char* name, char** out) {
  if (!name || !out) return fail("NULL argument");
  return guarded([&] {
    *out = copy_string(hamflow::scenario::builtin_scenario_json(name));
  });
}

}  // extern "C"
