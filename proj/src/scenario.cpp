#include "hamflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "hamflow/expr.hpp"
#include "hamflow/geometry.hpp"
#include "hamflow/hj.hpp"
#include "hamflow/mechanics.hpp"
#include "hamflow/numeric.hpp"

namespace hamflow::scenario {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Config parsing

[[noreturn]] void bad_config(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::Validation, "config field '" + field + "': " + why);
}

const json& require_key(const json& j, const std::string& path, const std::string& key) {
  if (!j.is_object()) bad_config(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) bad_config(path + "." + key, "missing");
  return *it;
}

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) bad_config(path, "expected a number");
  return j.get<double>();
}

std::string string_at(const json& j, const std::string& path) {
  if (!j.is_string()) bad_config(path, "expected a string");
  return j.get<std::string>();
}

std::vector<std::string> string_array_at(const json& j, const std::string& path,
                                         std::size_t want) {
  if (!j.is_array()) bad_config(path, "expected an array");
  if (want != 0 && j.size() != want) {
    bad_config(path, "expected " + std::to_string(want) + " entries, got " +
                         std::to_string(j.size()));
  }
  std::vector<std::string> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    out.push_back(string_at(j[k], path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

std::vector<double> number_array_at(const json& j, const std::string& path,
                                    std::size_t want) {
  if (!j.is_array()) bad_config(path, "expected an array");
  if (j.size() != want) {
    bad_config(path, "expected " + std::to_string(want) + " entries, got " +
                         std::to_string(j.size()));
  }
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    out.push_back(number_at(j[k], path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

enum class SystemKind { Lagrangian, Fundamental, Normal };

struct ScenarioData {
  std::string name;
  int dimension = 1;
  SystemKind kind = SystemKind::Normal;
  std::optional<expr::ScalarField> lagrangian;
  std::optional<mech::FundamentalForm> fundamental;
  std::optional<mech::NormalForm> normal;

  double t0 = 0.0, t1 = 1.0, step = 1e-3;
  std::vector<double> x0;
  std::vector<double> vp0;  // v for velocity-picture systems, p otherwise

  std::vector<std::string> checks;
  std::map<std::string, double> tolerances;
  std::uint64_t seed = 0;
  std::map<std::string, std::pair<double, double>> sample_box;

  std::optional<geom::OneForm> eta;
  std::optional<expr::ScalarField> hj_s;        // on the config chart
  std::optional<hj::ContactField> hj_contact;   // explicit p_i(t, x)

  expr::ChartSpec velocity_chart() const {
    return expr::ChartSpec(expr::ChartKind::Velocity, dimension);
  }
  expr::ChartSpec momentum_chart() const {
    return expr::ChartSpec(expr::ChartKind::Momentum, dimension);
  }
  expr::ChartSpec config_chart() const {
    return expr::ChartSpec(expr::ChartKind::Config, dimension);
  }

  std::vector<std::pair<double, double>> box_for(const expr::ChartSpec& chart) const {
    std::vector<std::pair<double, double>> out;
    out.reserve(chart.size());
    for (std::size_t c = 0; c < chart.size(); ++c) {
      auto it = sample_box.find(chart.name_of(c));
      out.push_back(it == sample_box.end() ? std::pair{-1.0, 1.0} : it->second);
    }
    return out;
  }

  std::uint64_t check_seed(const std::string& check) const {
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a over the check name
    for (char c : check) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    return h ^ (seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull);
  }

  bool velocity_picture() const { return kind != SystemKind::Normal; }
};

std::vector<expr::ScalarField> parse_fields(const json& j, const std::string& path,
                                            const expr::ChartSpec& chart,
                                            std::size_t want) {
  const auto sources = string_array_at(j, path, want);
  std::vector<expr::ScalarField> out;
  out.reserve(sources.size());
  for (std::size_t k = 0; k < sources.size(); ++k) {
    try {
      out.push_back(expr::parse(sources[k], chart));
    } catch (const Error& e) {
      bad_config(path + "[" + std::to_string(k) + "]", e.what());
    }
  }
  return out;
}

expr::ScalarField parse_field(const json& j, const std::string& path,
                              const expr::ChartSpec& chart) {
  const auto source = string_at(j, path);
  try {
    return expr::parse(source, chart);
  } catch (const Error& e) {
    bad_config(path, e.what());
  }
}

ScenarioData parse_scenario(const std::string& config_json) {
  json root;
  try {
    root = json::parse(config_json);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Validation, std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) {
    throw Error(ErrorCode::Validation, "config root must be a JSON object");
  }

  static const std::vector<std::string> known_keys = {
      "name", "dimension", "system", "initial", "run",
      "checks", "seed", "sample_box", "tolerances", "eta", "hj"};
  for (const auto& [key, value] : root.items()) {
    (void)value;
    if (std::find(known_keys.begin(), known_keys.end(), key) == known_keys.end()) {
      bad_config(key, "unknown top-level field");
    }
  }

  ScenarioData sc;
  sc.name = string_at(require_key(root, "", "name"), "name");
  if (sc.name.empty()) bad_config("name", "must be non-empty");

  const json& dim = require_key(root, "", "dimension");
  if (!dim.is_number_integer() || dim.get<int>() < 1) {
    bad_config("dimension", "expected an integer >= 1");
  }
  sc.dimension = dim.get<int>();
  const auto n = static_cast<std::size_t>(sc.dimension);

  // system: exactly one variant.
  const json& system = require_key(root, "", "system");
  if (!system.is_object() || system.size() != 1) {
    bad_config("system",
               "expected exactly one of lagrangian | fundamental_form | normal_form");
  }
  if (system.contains("lagrangian")) {
    sc.kind = SystemKind::Lagrangian;
    sc.lagrangian = parse_field(system["lagrangian"], "system.lagrangian",
                                sc.velocity_chart());
  } else if (system.contains("fundamental_form")) {
    sc.kind = SystemKind::Fundamental;
    const json& ff = system["fundamental_form"];
    auto power = parse_field(require_key(ff, "system.fundamental_form", "P"),
                             "system.fundamental_form.P", sc.velocity_chart());
    auto force = parse_fields(require_key(ff, "system.fundamental_form", "F"),
                              "system.fundamental_form.F", sc.velocity_chart(), n);
    auto momentum = parse_fields(require_key(ff, "system.fundamental_form", "p"),
                                 "system.fundamental_form.p", sc.velocity_chart(), n);
    sc.fundamental = mech::FundamentalForm(std::move(power), std::move(force),
                                           std::move(momentum));
  } else if (system.contains("normal_form")) {
    sc.kind = SystemKind::Normal;
    const json& nf = system["normal_form"];
    auto hamiltonian = parse_field(require_key(nf, "system.normal_form", "H"),
                                   "system.normal_form.H", sc.momentum_chart());
    std::vector<geom::NormalFormTerm> terms;
    if (nf.contains("terms")) {
      const json& jt = nf["terms"];
      if (!jt.is_array()) bad_config("system.normal_form.terms", "expected an array");
      for (std::size_t k = 0; k < jt.size(); ++k) {
        const std::string path = "system.normal_form.terms[" + std::to_string(k) + "]";
        terms.push_back({parse_field(require_key(jt[k], path, "mu"), path + ".mu",
                                     sc.momentum_chart()),
                         parse_field(require_key(jt[k], path, "v"), path + ".v",
                                     sc.momentum_chart())});
      }
    }
    sc.normal = mech::NormalForm(std::move(hamiltonian), std::move(terms));
  } else {
    bad_config("system",
               "expected one of lagrangian | fundamental_form | normal_form");
  }

  // initial state.
  const json& initial = require_key(root, "", "initial");
  sc.t0 = number_at(require_key(initial, "initial", "t0"), "initial.t0");
  sc.x0 = number_array_at(require_key(initial, "initial", "x"), "initial.x", n);
  const char* vp_key = sc.velocity_picture() ? "v" : "p";
  if (!initial.contains(vp_key)) {
    bad_config(std::string("initial.") + vp_key,
               std::string("missing (this system kind needs '") + vp_key + "')");
  }
  sc.vp0 = number_array_at(initial[vp_key], std::string("initial.") + vp_key, n);

  // run window.
  const json& runj = require_key(root, "", "run");
  sc.t1 = number_at(require_key(runj, "run", "t1"), "run.t1");
  sc.step = number_at(require_key(runj, "run", "h"), "run.h");
  if (!(sc.t1 > sc.t0)) bad_config("run.t1", "must exceed initial.t0");
  if (!(sc.step > 0.0)) bad_config("run.h", "must be positive");
  if ((sc.t1 - sc.t0) / sc.step > 1e7) bad_config("run.h", "more than 1e7 steps");

  sc.checks = string_array_at(require_key(root, "", "checks"), "checks", 0);
  for (const auto& check : sc.checks) {
    if (std::count(sc.checks.begin(), sc.checks.end(), check) != 1) {
      bad_config("checks", "'" + check + "' requested more than once");
    }
  }

  if (root.contains("seed")) {
    const json& s = root["seed"];
    if (!s.is_number_unsigned() && !s.is_number_integer()) {
      bad_config("seed", "expected an integer");
    }
    sc.seed = s.get<std::uint64_t>();
  }
  if (const char* env_seed = std::getenv("HAMFLOW_SEED")) {
    try {
      sc.seed = std::stoull(env_seed);
    } catch (const std::exception&) {
      throw Error(ErrorCode::Validation, "HAMFLOW_SEED is not an integer");
    }
  }

  if (root.contains("sample_box")) {
    const json& box = root["sample_box"];
    if (!box.is_object()) bad_config("sample_box", "expected an object");
    for (const auto& [coord, bounds] : box.items()) {
      const bool known = sc.velocity_chart().index_of(coord).has_value() ||
                         sc.momentum_chart().index_of(coord).has_value();
      if (!known) bad_config("sample_box." + coord, "not a coordinate of this scenario");
      const auto lohi = number_array_at(bounds, "sample_box." + coord, 2);
      if (!(lohi[0] <= lohi[1])) bad_config("sample_box." + coord, "expected [lo, hi]");
      sc.sample_box[coord] = {lohi[0], lohi[1]};
    }
  }

  if (root.contains("tolerances")) {
    const json& tols = root["tolerances"];
    if (!tols.is_object()) bad_config("tolerances", "expected an object");
    for (const auto& [check, value] : tols.items()) {
      sc.tolerances[check] = number_at(value, "tolerances." + check);
    }
  }

  if (root.contains("eta")) {
    const json& eta = root["eta"];
    auto power = parse_field(require_key(eta, "eta", "P"), "eta.P", sc.momentum_chart());
    auto force = parse_fields(require_key(eta, "eta", "F"), "eta.F",
                              sc.momentum_chart(), n);
    auto velocity = parse_fields(require_key(eta, "eta", "v"), "eta.v",
                                 sc.momentum_chart(), n);
    // eta = -P dt - F_i dx^i + v^i dp_i.
    std::vector<expr::ScalarField> dx, dp;
    for (std::size_t i = 0; i < n; ++i) dx.push_back(-force[i]);
    for (std::size_t i = 0; i < n; ++i) dp.push_back(velocity[i]);
    sc.eta = geom::OneForm(-power, std::move(dx), std::move(dp));
  }

  if (root.contains("hj")) {
    const json& hjj = root["hj"];
    if (!hjj.is_object()) bad_config("hj", "expected an object");
    if (hjj.contains("S")) {
      sc.hj_s = parse_field(hjj["S"], "hj.S", sc.config_chart());
    }
    if (hjj.contains("p")) {
      sc.hj_contact = hj::ContactField(
          parse_fields(hjj["p"], "hj.p", sc.config_chart(), n));
    }
    if (!sc.hj_s && !sc.hj_contact) bad_config("hj", "needs 'S' and/or 'p'");
  }

  return sc;
}

// ---------------------------------------------------------------------------
// Random fields for the bracket suites

expr::ScalarField random_polynomial(std::mt19937_64& rng, const expr::ChartSpec& chart,
                                    int max_degree) {
  const auto n = static_cast<std::size_t>(chart.dimension());
  std::uniform_int_distribution<int> term_count(2, 4);
  std::uniform_int_distribution<int> degree(0, max_degree);
  std::uniform_int_distribution<std::size_t> coord(1, 2 * n);  // x and p slots
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);

  expr::ScalarField sum = expr::ScalarField::constant(chart, 0.0);
  const int terms = term_count(rng);
  for (int term = 0; term < terms; ++term) {
    expr::ScalarField mono = expr::ScalarField::constant(chart, coeff(rng));
    const int d = degree(rng);
    for (int k = 0; k < d; ++k) {
      mono = mono * expr::ScalarField::coordinate(chart, chart.name_of(coord(rng)));
    }
    sum = sum + mono;
  }
  return sum;
}

geom::NormalFormVectorField random_normal_form_field(std::mt19937_64& rng,
                                                     const expr::ChartSpec& chart,
                                                     std::size_t term_count,
                                                     int max_degree) {
  std::vector<geom::NormalFormTerm> terms;
  for (std::size_t a = 0; a < term_count; ++a) {
    terms.push_back({random_polynomial(rng, chart, max_degree),
                     random_polynomial(rng, chart, max_degree)});
  }
  return geom::NormalFormVectorField(random_polynomial(rng, chart, max_degree),
                                     std::move(terms));
}

double max_component_difference(const geom::PhaseVectorField& a,
                                const geom::PhaseVectorField& b,
                                std::span<const std::vector<double>> points,
                                double magnitude_cap = 0.0) {
  double worst = 0.0;
  for (const auto& point : points) {
    const auto va = a.eval(point);
    const auto vb = b.eval(point);
    for (std::size_t c = 0; c < va.size(); ++c) {
      if (magnitude_cap > 0.0 && std::abs(vb[c]) > magnitude_cap) continue;
      worst = std::max(worst, std::abs(va[c] - vb[c]));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Checks

struct CheckContext {
  const ScenarioData& sc;
  const mech::Trajectory* traj = nullptr;  // null under verify
};

[[noreturn]] void check_needs(const std::string& check, const std::string& what) {
  throw Error(ErrorCode::Validation, "check '" + check + "' requires " + what);
}

const mech::NormalForm& need_normal_form(const CheckContext& ctx, const char* check) {
  if (!ctx.sc.normal) check_needs(check, "a normal_form system");
  return *ctx.sc.normal;
}

const expr::ScalarField& need_lagrangian(const CheckContext& ctx, const char* check) {
  if (!ctx.sc.lagrangian) check_needs(check, "a lagrangian system");
  return *ctx.sc.lagrangian;
}

const mech::Trajectory& need_trajectory(const CheckContext& ctx, const char* check) {
  if (!ctx.traj) check_needs(check, "a trajectory (run, not verify)");
  return *ctx.traj;
}

hj::ContactField need_contact_field(const CheckContext& ctx, const char* check) {
  if (ctx.sc.hj_contact) return *ctx.sc.hj_contact;
  if (ctx.sc.hj_s) return hj::GeneratingFunction(*ctx.sc.hj_s).contact_field();
  check_needs(check, "an hj section with 'p' or 'S'");
}

double check_energy_balance(const CheckContext& ctx) {
  return mech::energy_balance_residual(need_normal_form(ctx, "energy_balance"),
                                       need_trajectory(ctx, "energy_balance"));
}

double check_classical_reduction(const CheckContext& ctx) {
  const auto& nf = need_normal_form(ctx, "classical_reduction");
  if (!nf.terms().empty()) {
    check_needs("classical_reduction", "a normal form with no terms");
  }
  const auto& traj = need_trajectory(ctx, "classical_reduction");
  const auto first = traj.point(0);
  const double h0 = nf.hamiltonian()(first);
  double drift = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto point = traj.point(k);
    drift = std::max(drift, std::abs(nf.hamiltonian()(point) - h0));
  }
  return drift;
}

double check_trajectory_integrability(const CheckContext& ctx) {
  return mech::max_integrability_residual(
      need_trajectory(ctx, "trajectory_integrability"));
}

double check_euler_lagrange(const CheckContext& ctx) {
  return mech::euler_lagrange_residual(need_lagrangian(ctx, "euler_lagrange"),
                                       need_trajectory(ctx, "euler_lagrange"));
}

double check_energy_theorem(const CheckContext& ctx) {
  return mech::energy_theorem_residual(need_lagrangian(ctx, "energy_theorem"),
                                       need_trajectory(ctx, "energy_theorem"));
}

double check_newtonian_residual(const CheckContext& ctx) {
  if (!ctx.sc.fundamental) check_needs("newtonian_residual", "a fundamental_form system");
  return mech::newtonian_residual(*ctx.sc.fundamental,
                                  need_trajectory(ctx, "newtonian_residual"));
}

// Demonstrates the rotating-frame curve: its 1-jet prolongation is
// integrable while the rotated velocity assignment misses by |omega x| = 1.
double check_rotating_frame(const CheckContext& ctx) {
  const expr::ChartSpec chart(expr::ChartKind::Velocity, 2);
  const double t0 = ctx.sc.t0;
  const auto steps = static_cast<std::size_t>(
      std::max(1.0, std::round((ctx.sc.t1 - t0) / ctx.sc.step)));
  const double h = (ctx.sc.t1 - t0) / static_cast<double>(steps);

  std::vector<std::vector<double>> prolonged(steps + 1), rotated(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = t0 + static_cast<double>(k) * h;
    const double x1 = std::cos(t), x2 = std::sin(t);
    const double v1 = -std::sin(t), v2 = std::cos(t);
    prolonged[k] = {x1, x2, v1, v2};
    // constant rotation rate 1: v = xdot + omega x with omega = [[0,-1],[1,0]]
    rotated[k] = {x1, x2, v1 - x2, v2 + x1};
  }
  const auto jet = mech::Trajectory::uniform(chart, t0, h, std::move(prolonged));
  const auto frame = mech::Trajectory::uniform(chart, t0, h, std::move(rotated));

  const double jet_residual = mech::max_integrability_residual(jet);
  const double frame_residual = mech::max_integrability_residual(frame);
  // jet residual should vanish; frame residual should equal max |omega x| = 1
  return std::max(jet_residual, std::abs(frame_residual - 1.0));
}

double check_canonical_relations(const CheckContext& ctx) {
  const auto chart = ctx.sc.momentum_chart();
  const auto n = static_cast<std::size_t>(chart.dimension());
  const auto points = num::sample_points(ctx.sc.box_for(chart), 64,
                                         ctx.sc.check_seed("canonical_relations"));
  auto coord = [&](std::size_t index) {
    return expr::ScalarField::coordinate(chart, chart.name_of(index));
  };
  double worst = 0.0;
  auto check_bracket = [&](const expr::ScalarField& f, const expr::ScalarField& g,
                           double want) {
    const auto bracket = geom::poisson_bracket(f, g);
    if (bracket.is_constant(want)) return;
    for (const auto& point : points) {
      worst = std::max(worst, std::abs(bracket(point) - want));
    }
  };
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      check_bracket(coord(i), coord(j), 0.0);
      check_bracket(coord(n + i), coord(n + j), 0.0);
      check_bracket(coord(i), coord(n + j), i == j ? 1.0 : 0.0);
    }
  }
  return worst;
}

double check_homomorphism(const CheckContext& ctx) {
  const auto chart = ctx.sc.momentum_chart();
  std::mt19937_64 rng(ctx.sc.check_seed("homomorphism"));
  const auto points = num::sample_points(ctx.sc.box_for(chart), 64,
                                         ctx.sc.check_seed("homomorphism") ^ 0xabcd);
  double worst = 0.0;
  for (int pair = 0; pair < 20; ++pair) {
    const auto f = random_polynomial(rng, chart, 3);
    const auto g = random_polynomial(rng, chart, 3);
    const auto lhs = geom::symplectic_gradient(geom::poisson_bracket(f, g));
    const auto rhs = geom::lie_bracket(geom::symplectic_gradient(f),
                                       geom::symplectic_gradient(g));
    worst = std::max(worst, max_component_difference(lhs, rhs, points));
  }
  return worst;
}

double check_jacobi(const CheckContext& ctx) {
  const auto chart = ctx.sc.momentum_chart();
  std::mt19937_64 rng(ctx.sc.check_seed("jacobi"));
  const auto points = num::sample_points(ctx.sc.box_for(chart), 64,
                                         ctx.sc.check_seed("jacobi") ^ 0xabcd);
  double worst = 0.0;
  for (int triple = 0; triple < 20; ++triple) {
    const auto f = random_polynomial(rng, chart, 3);
    const auto g = random_polynomial(rng, chart, 3);
    const auto h = random_polynomial(rng, chart, 3);
    const auto cyclic = geom::poisson_bracket(f, geom::poisson_bracket(g, h)) +
                        geom::poisson_bracket(g, geom::poisson_bracket(h, f)) +
                        geom::poisson_bracket(h, geom::poisson_bracket(f, g));
    for (const auto& point : points) {
      worst = std::max(worst, std::abs(cyclic(point)));
    }
  }
  return worst;
}

double check_bracket_decomposition(const CheckContext& ctx) {
  const auto chart = ctx.sc.momentum_chart();
  std::mt19937_64 rng(ctx.sc.check_seed("bracket_decomposition"));
  const auto points = num::sample_points(ctx.sc.box_for(chart), 64,
                                         ctx.sc.check_seed("bracket_decomposition") ^ 0xabcd);
  double worst = 0.0;
  for (int pair = 0; pair < 20; ++pair) {
    const auto a = random_normal_form_field(rng, chart, pair % 3, 2);
    const auto b = random_normal_form_field(rng, chart, (pair / 3) % 3, 2);
    const auto decomposed = geom::bracket_decomposition(a, b);
    const auto direct = geom::lie_bracket(geom::realize(a), geom::realize(b));
    worst = std::max(worst,
                     max_component_difference(decomposed, direct, points, 10.0));
  }
  return worst;
}

double check_normal_form_consistency(const CheckContext& ctx) {
  const auto& nf = need_normal_form(ctx, "normal_form_consistency");
  if (!ctx.sc.eta) check_needs("normal_form_consistency", "an 'eta' section");
  const auto points = num::sample_points(ctx.sc.box_for(nf.chart()), 64,
                                         ctx.sc.check_seed("normal_form_consistency"));
  return mech::normal_form_consistency(nf, *ctx.sc.eta, points);
}

double check_hj_residual(const CheckContext& ctx) {
  if (!ctx.sc.hj_s) check_needs("hj_residual", "an hj section with 'S'");
  const auto& nf = need_normal_form(ctx, "hj_residual");
  const auto points = num::sample_points(ctx.sc.box_for(ctx.sc.config_chart()), 128,
                                         ctx.sc.check_seed("hj_residual"));
  return hj::hj_residual(hj::GeneratingFunction(*ctx.sc.hj_s), nf.hamiltonian(),
                         points);
}

double check_generalized_hj(const CheckContext& ctx) {
  const auto contact = need_contact_field(ctx, "generalized_hj");
  const auto& nf = need_normal_form(ctx, "generalized_hj");
  const auto points = num::sample_points(ctx.sc.box_for(ctx.sc.config_chart()), 128,
                                         ctx.sc.check_seed("generalized_hj"));
  const auto residual = hj::generalized_hj_residual(contact, nf, points);
  return std::max(residual.a_max, residual.b_max);
}

double check_closure(const CheckContext& ctx) {
  const auto contact = need_contact_field(ctx, "closure");
  const auto points = num::sample_points(ctx.sc.box_for(ctx.sc.config_chart()), 128,
                                         ctx.sc.check_seed("closure"));
  return hj::closure_residual(contact, points);
}

double check_legendre_roundtrip(const CheckContext& ctx) {
  const auto& lagrangian = need_lagrangian(ctx, "legendre_roundtrip");
  const auto chart = lagrangian.chart();
  const auto n = static_cast<std::size_t>(chart.dimension());
  const auto points = num::sample_points(ctx.sc.box_for(chart), 64,
                                         ctx.sc.check_seed("legendre_roundtrip"));
  const auto momenta = mech::momentum_map(lagrangian);
  const mech::LegendreTransform legendre(lagrangian);
  double worst = 0.0;
  for (const auto& point : points) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = momenta[i](point);
    const std::span<const double> x(point.data() + 1, n);
    const std::span<const double> v(point.data() + 1 + n, n);
    const auto v_back = legendre.velocity_of(point[0], x, p);
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(v_back[i] - v[i]));
    }
  }
  return worst;
}

struct CheckSpec {
  const char* name;
  bool pointwise;  // runnable under verify (no trajectory)
  double default_tolerance;
  double (*measure)(const CheckContext&);
};

constexpr CheckSpec kChecks[] = {
    {"canonical_relations", true, 1e-12, check_canonical_relations},
    {"homomorphism", true, 1e-9, check_homomorphism},
    {"jacobi", true, 1e-9, check_jacobi},
    {"bracket_decomposition", true, 1e-9, check_bracket_decomposition},
    {"normal_form_consistency", true, 1e-9, check_normal_form_consistency},
    {"hj_residual", true, 1e-10, check_hj_residual},
    {"generalized_hj", true, 1e-8, check_generalized_hj},
    {"closure", true, 1e-10, check_closure},
    {"legendre_roundtrip", true, 1e-10, check_legendre_roundtrip},
    {"energy_balance", false, 1e-6, check_energy_balance},
    {"classical_reduction", false, 1e-9, check_classical_reduction},
    {"trajectory_integrability", false, 1e-4, check_trajectory_integrability},
    {"euler_lagrange", false, 1e-4, check_euler_lagrange},
    {"energy_theorem", false, 1e-4, check_energy_theorem},
    {"newtonian_residual", false, 1e-5, check_newtonian_residual},
    {"rotating_frame", false, 1e-3, check_rotating_frame},
};

const CheckSpec& find_check(const std::string& name) {
  for (const auto& spec : kChecks) {
    if (name == spec.name) return spec;
  }
  std::string valid;
  for (const auto& spec : kChecks) {
    if (!valid.empty()) valid += ", ";
    valid += spec.name;
  }
  throw Error(ErrorCode::UnknownCheck,
              "unknown check '" + name + "'; valid checks: " + valid);
}

std::vector<CheckResult> execute_checks(const ScenarioData& sc,
                                        const std::vector<std::string>& names,
                                        const mech::Trajectory* traj, int jobs) {
  const CheckContext ctx{sc, traj};
  auto one = [&](const std::string& name) {
    const CheckSpec& spec = find_check(name);
    CheckResult result;
    result.name = name;
    auto it = sc.tolerances.find(name);
    result.tolerance = it == sc.tolerances.end() ? spec.default_tolerance : it->second;
    result.measured = spec.measure(ctx);
    result.passed = result.measured <= result.tolerance;
    return result;
  };

  std::vector<CheckResult> results;
  if (jobs > 1) {
    std::vector<std::future<CheckResult>> futures;
    futures.reserve(names.size());
    for (const auto& name : names) {
      futures.push_back(std::async(std::launch::async, one, name));
    }
    for (auto& f : futures) results.push_back(f.get());
  } else {
    for (const auto& name : names) results.push_back(one(name));
  }
  return results;
}

// ---------------------------------------------------------------------------
// Trajectory integration and output files

mech::Trajectory integrate_scenario(const ScenarioData& sc) {
  switch (sc.kind) {
    case SystemKind::Lagrangian:
      return mech::integrate_lagrange(*sc.lagrangian, {}, sc.t0, sc.x0, sc.vp0,
                                      sc.t1, sc.step);
    case SystemKind::Fundamental:
      return mech::integrate_fundamental(*sc.fundamental, sc.t0, sc.x0, sc.vp0,
                                         sc.t1, sc.step);
    case SystemKind::Normal:
      return mech::integrate_hamilton(*sc.normal, sc.t0, sc.x0, sc.vp0, sc.t1,
                                      sc.step);
  }
  throw Error(ErrorCode::Validation, "corrupt system kind");
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_trajectory_csv(const std::filesystem::path& path, const ScenarioData& sc,
                          const mech::Trajectory& traj) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  }
  const auto n = static_cast<std::size_t>(traj.dimension());
  const bool momentum = traj.chart().kind() == expr::ChartKind::Momentum;

  out << "t";
  for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
  for (std::size_t i = 1; i <= n; ++i) out << "," << (momentum ? 'p' : 'v') << i;
  if (momentum) out << ",H";
  out << "\n";

  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << format_double(traj.time(k));
    for (double v : traj.state(k)) out << "," << format_double(v);
    if (momentum) {
      const auto point = traj.point(k);
      out << "," << format_double(sc.normal->hamiltonian()(point));
    }
    out << "\n";
  }
  if (!out) {
    throw Error(ErrorCode::Io, "failed while writing '" + path.string() + "'");
  }
}

std::string iso8601_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Report make_report(const ScenarioData& sc, std::vector<CheckResult> checks,
                   std::string trajectory_file) {
  Report report;
  report.scenario = sc.name;
  report.tool_version = kToolVersion;
  report.seed = sc.seed;
  report.trajectory_file = std::move(trajectory_file);
  report.checks = std::move(checks);
  return report;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public surface

bool Report::passed() const { return failed_count() == 0; }

int Report::failed_count() const {
  int failed = 0;
  for (const auto& check : checks) {
    if (!check.passed) ++failed;
  }
  return failed;
}

std::string Report::to_json(bool include_timestamp) const {
  ordered_json j;
  j["scenario"] = scenario;
  j["tool_version"] = tool_version;
  j["seed"] = seed;
  if (include_timestamp) j["generated_at"] = iso8601_now();
  if (trajectory_file.empty()) {
    j["trajectory"] = nullptr;
  } else {
    j["trajectory"] = trajectory_file;
  }
  j["status"] = passed() ? "pass" : "fail";
  j["checks"] = ordered_json::array();
  for (const auto& check : checks) {
    ordered_json jc;
    jc["name"] = check.name;
    jc["status"] = check.passed ? "pass" : "fail";
    jc["measured"] = check.measured;
    jc["tolerance"] = check.tolerance;
    j["checks"].push_back(std::move(jc));
  }
  return j.dump(2) + "\n";
}

Report run(const std::string& config_json, const std::string& out_dir, int jobs) {
  const ScenarioData sc = parse_scenario(config_json);
  for (const auto& name : sc.checks) find_check(name);  // fail early on unknowns

  const mech::Trajectory traj = integrate_scenario(sc);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw Error(ErrorCode::Io, "cannot create output directory '" + out_dir + "'");
  }
  const std::string csv_name = sc.name + "_trajectory.csv";
  write_trajectory_csv(std::filesystem::path(out_dir) / csv_name, sc, traj);

  auto results = execute_checks(sc, sc.checks, &traj, jobs);
  Report report = make_report(sc, std::move(results), csv_name);

  const auto report_path = std::filesystem::path(out_dir) / (sc.name + "_report.json");
  std::ofstream out(report_path);
  if (!out) {
    throw Error(ErrorCode::Io, "cannot open '" + report_path.string() + "' for writing");
  }
  out << report.to_json();
  return report;
}

Report verify(const std::string& config_json, int jobs) {
  const ScenarioData sc = parse_scenario(config_json);
  std::vector<std::string> pointwise;
  for (const auto& name : sc.checks) {
    if (find_check(name).pointwise) pointwise.push_back(name);
  }
  if (pointwise.empty()) {
    throw Error(ErrorCode::Validation,
                "scenario requests no pointwise checks; nothing to verify");
  }
  auto results = execute_checks(sc, pointwise, nullptr, jobs);
  return make_report(sc, std::move(results), {});
}

std::vector<std::string> known_check_names() {
  std::vector<std::string> out;
  for (const auto& spec : kChecks) out.emplace_back(spec.name);
  return out;
}

// ---------------------------------------------------------------------------
// Built-in scenarios

namespace {

struct Builtin {
  const char* name;
  const char* description;
  const char* config;
};

constexpr Builtin kBuiltins[] = {
    {"harmonic", "unit harmonic oscillator, classical Hamiltonian picture", R"json({
  "name": "harmonic",
  "dimension": 1,
  "system": {"normal_form": {"H": "(x1^2 + p1^2)/2", "terms": []}},
  "initial": {"t0": 0.0, "x": [1.0], "p": [0.0]},
  "run": {"t1": 6.283185307179586, "h": 0.001},
  "checks": ["energy_balance", "classical_reduction", "canonical_relations"],
  "seed": 1
})json"},
    {"damped", "damped oscillator via the inexact term mu = -0.1 p, v = x", R"json({
  "name": "damped",
  "dimension": 1,
  "system": {"normal_form": {"H": "(x1^2 + p1^2)/2",
                             "terms": [{"mu": "-0.1*p1", "v": "x1"}]}},
  "initial": {"t0": 0.0, "x": [1.0], "p": [0.0]},
  "run": {"t1": 10.0, "h": 0.001},
  "checks": ["energy_balance", "normal_form_consistency"],
  "eta": {"P": "0", "F": ["-x1 - 0.1*p1"], "v": ["p1"]},
  "seed": 2
})json"},
    {"rotating_frame", "free particle plus the rotating-frame integrability demo", R"json({
  "name": "rotating_frame",
  "dimension": 2,
  "system": {"lagrangian": "0.5*(v1^2 + v2^2)"},
  "initial": {"t0": 0.0, "x": [1.0, 0.0], "v": [0.0, 1.0]},
  "run": {"t1": 6.283185307179586, "h": 0.001},
  "checks": ["rotating_frame", "trajectory_integrability", "euler_lagrange"],
  "seed": 3
})json"},
    {"free_hj", "free-particle complete integral S = k x - k^2 t / 2 with k = 2", R"json({
  "name": "free_hj",
  "dimension": 1,
  "system": {"normal_form": {"H": "p1^2/2", "terms": []}},
  "initial": {"t0": 0.0, "x": [0.0], "p": [2.0]},
  "run": {"t1": 1.0, "h": 0.001},
  "checks": ["hj_residual", "generalized_hj", "closure", "canonical_relations"],
  "hj": {"S": "2*x1 - 2*t"},
  "seed": 4
})json"},
    {"legendre_quadratic", "anisotropic quadratic Lagrangian exercising the Legendre transform", R"json({
  "name": "legendre_quadratic",
  "dimension": 2,
  "system": {"lagrangian": "v1^2 + 0.5*v2^2 - 0.5*(x1^2 + x2^2)"},
  "initial": {"t0": 0.0, "x": [1.0, 0.0], "v": [0.0, 1.0]},
  "run": {"t1": 5.0, "h": 0.001},
  "checks": ["legendre_roundtrip", "euler_lagrange", "energy_theorem", "trajectory_integrability"],
  "seed": 5
})json"},
};

}  // namespace

std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const auto& builtin : kBuiltins) out.emplace_back(builtin.name);
  return out;
}

std::string builtin_scenario_json(const std::string& name) {
  for (const auto& builtin : kBuiltins) {
    if (name == builtin.name) return builtin.config;
  }
  throw Error(ErrorCode::Validation, "no built-in scenario named '" + name + "'");
}

std::string builtin_listing() {
  std::string out;
  for (const auto& builtin : kBuiltins) {
    out += builtin.name;
    out += "  -  ";
    out += builtin.description;
    out += "\n";
  }
  return out;
}

}  // namespace hamflow::scenario
