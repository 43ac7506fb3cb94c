#include "dkg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <thread>

#include "dkg/errors.hpp"

namespace dkg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Json complex_json(std::complex<double> z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

// --- config helpers --------------------------------------------------------

[[noreturn]] void bad(const std::string& msg) { throw ConfigError(msg); }

const Json& require(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) bad(where + ": missing required field '" + key + "'");
  return obj.at(key);
}

double as_number(const Json& v, const std::string& what) {
  if (!v.is_number()) bad(what + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(what + " must be finite");
  return x;
}

int as_int(const Json& v, const std::string& what) {
  if (!v.is_number_integer()) bad(what + " must be an integer");
  return v.get<int>();
}

std::vector<int> int_list(const Json& v, const std::string& what) {
  if (!v.is_array()) bad(what + " must be a list of integers");
  std::vector<int> out;
  for (const auto& x : v) out.push_back(as_int(x, what + " entry"));
  return out;
}

double param(const Json& p, const char* key, double fallback) {
  return p.contains(key) ? as_number(p.at(key), std::string("params.") + key) : fallback;
}

int param_int(const Json& p, const char* key, int fallback) {
  return p.contains(key) ? as_int(p.at(key), std::string("params.") + key) : fallback;
}

bool is_multi(const SeedSpec& s) { return s.kind == SeedKind::multikink || s.kind == SeedKind::kink_kink; }

ModeLabel mode_from(const Json& p) {
  const std::string m = p.contains("mode") ? p.at("mode").get<std::string>() : "goldstone";
  if (m == "goldstone") return ModeLabel::goldstone;
  if (m == "edge") return ModeLabel::edge;
  bad("params.mode must be 'goldstone' or 'edge'");
}

Model model_at(const ExperimentConfig& c, double d, Grid g) {
  return Model(d, Nonlinearity::from_family(c.model.family), g, c.model.boundary);
}

Json model_json(const Model& m) {
  return Json{{"family", std::string(to_string(m.nonlinearity().family()))},
              {"d", m.d()},
              {"grid", {{"lo", m.grid().lo}, {"hi", m.grid().hi}, {"size", m.grid().size()}}},
              {"boundary", "neumann"}};
}

Table profile_table(const LatticeField& u) {
  Table t{{"n", "u"}, {}};
  for (int x = u.first(); x <= u.last(); ++x) t.add({static_cast<long long>(x), u.at(x)});
  return t;
}

Json crossings_json(const LatticeField& u) {
  Json a = Json::array();
  for (const auto& c : zero_crossings(u)) {
    a.push_back({{"position", c.position}, {"site", std::string(to_string(c.site))}, {"direction", c.direction}});
  }
  return a;
}

Table spectrum_table(const SpectrumResult& s, const std::string& tag = "") {
  Table t{{"structure", "index", "omega", "lambda_re", "lambda_im", "label", "parity"}, {}};
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::string label = "band";
    for (std::size_t k = 0; k < s.point_modes.size(); ++k) {
      if (s.point_modes[k] == i) label = std::string(to_string(s.labels[k]));
    }
    if (!s.classified) label = "";
    const double parity = s.vectors.empty() ? std::nan("") : reflection_parity(s.vectors[i]);
    t.add({tag, static_cast<long long>(i), s.omegas[i], s.lambda(i).real(), s.lambda(i).imag(), label, parity});
  }
  return t;
}

// Long format: one row per (mode, site).
Table eigenvector_table(const SpectrumResult& s) {
  Table t{{"index", "n", "v"}, {}};
  for (std::size_t i = 0; i < s.vectors.size(); ++i) {
    const LatticeField& v = s.vectors[i];
    for (int n = v.first(); n <= v.last(); ++n) t.add({static_cast<long long>(i), static_cast<long long>(n), v.at(n)});
  }
  return t;
}

Json spectrum_json(const SpectrumResult& s, const Model& m) {
  Json r;
  Json pts = Json::array();
  for (std::size_t k = 0; k < s.point_modes.size(); ++k) {
    const std::size_t i = s.point_modes[k];
    pts.push_back({{"index", i},
                   {"omega", s.omegas[i]},
                   {"lambda_abs", std::abs(s.lambda(i))},
                   {"label", std::string(to_string(s.labels[k]))}});
  }
  r["point_modes"] = pts;
  if (auto g = s.find(ModeLabel::goldstone)) r["goldstone_lambda"] = std::abs(s.lambda(*g));
  if (auto e = s.find(ModeLabel::edge)) r["edge_lambda"] = std::abs(s.lambda(*e));
  r["unstable_count"] = s.unstable_count();
  r["computed_band"] = {std::sqrt(std::max(0.0, -s.band_upper)), std::sqrt(std::max(0.0, -s.band_lower))};
  const auto band = continuous_spectrum_bands(m);
  r["continuous_band"] = {band.lower, band.upper};
  r["hypothesis_gap_holds"] = s.hypothesis_gap_holds;
  return r;
}

Table error_rows_table(const std::vector<SweepRow>& rows) {
  Table t{{"d", "N", "distances", "mode", "component", "lambda_pred_im", "lambda_true_im", "relative_error",
           "log10_relative_error"},
          {}};
  for (const auto& r : rows) {
    std::string ds;
    for (std::size_t i = 0; i < r.distances.size(); ++i) ds += (i ? ";" : "") + std::to_string(r.distances[i]);
    t.add({r.d, static_cast<long long>(r.N), ds, r.row.mode, static_cast<long long>(r.row.component),
           r.row.lambda_predicted.imag(), r.row.lambda_computed.imag(), r.row.relative_error,
           std::log10(r.row.relative_error)});
  }
  return t;
}

Table slopes_table(const std::vector<SlopeFit>& fits, double r0, double r) {
  Table t{{"component", "slope", "intercept", "r_squared", "samples", "minus_2_log10_r0", "minus_2_log10_r"}, {}};
  for (const auto& f : fits) {
    t.add({static_cast<long long>(f.component), f.fit.slope, f.fit.intercept, f.fit.r_squared,
           static_cast<long long>(f.fit.samples), -2.0 * std::log10(r0), -2.0 * std::log10(r)});
  }
  return t;
}

void add_branch_rows(Table& t, Table& ev, const std::string& name, const Branch& b) {
  for (std::size_t i = 0; i < b.points.size(); ++i) {
    const auto& p = b.points[i];
    t.add({name, static_cast<long long>(i), p.d, p.l2_norm, static_cast<long long>(p.stability_index), p.arclength,
           p.critical_omega, pair_type(p.field)});
  }
  for (const auto& e : b.events) {
    ev.add({name, std::string(to_string(e.kind)), e.d, static_cast<long long>(e.index), e.note});
  }
}

Table trajectory_table(const Trajectory& tr) {
  Table t;
  t.columns.push_back("t");
  for (int p : tr.probe_sites) t.columns.push_back("probe_" + std::to_string(p));
  t.columns.push_back("H");
  t.columns.push_back("relH_dev");
  const double h0 = tr.energy.empty() ? 1.0 : tr.energy.front();
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    std::vector<Cell> row{tr.times[k]};
    for (const auto& series : tr.probes) row.emplace_back(series[k]);
    row.emplace_back(tr.energy[k]);
    row.emplace_back(h0 != 0.0 ? std::abs(tr.energy[k] - h0) / std::abs(h0) : 0.0);
    t.add(std::move(row));
  }
  return t;
}

std::vector<double> d_list(const ExperimentConfig& c) {
  if (!c.model.d_values.empty()) return c.model.d_values;
  return {*c.model.d};
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names{"kink",        "spectrum",  "multikink", "predict",
                                              "bifurcation", "fold_sweep", "evolve",    "error_sweep"};
  return names;
}

ExperimentConfig parse_config(const Json& j, const std::string& task) {
  if (!j.is_object()) bad("config must be a JSON object");
  ExperimentConfig c;
  c.raw = j;
  std::string file_task = j.contains("task") ? j.at("task").get<std::string>() : "";
  if (!task.empty() && !file_task.empty() && task != file_task) {
    bad("task '" + task + "' on the command line disagrees with config task '" + file_task + "'");
  }
  c.task = task.empty() ? file_task : task;
  if (c.task.empty()) bad("no task given");
  if (std::find(task_names().begin(), task_names().end(), c.task) == task_names().end()) {
    bad("unknown task '" + c.task + "'");
  }

  const Json& m = require(j, "model", "config");
  try {
    c.model.family = m.contains("family") ? family_from_string(m.at("family").get<std::string>()) : Family::sine_gordon;
  } catch (const Error& e) {
    bad(std::string("model.family: ") + e.what());
  }
  if (c.model.family == Family::custom) bad("model.family 'custom' is not available from a config file");
  if (m.contains("d")) {
    c.model.d = as_number(m.at("d"), "model.d");
    if (*c.model.d < 0.0) bad("model.d must be >= 0");
  }
  if (m.contains("d_values")) {
    if (!m.at("d_values").is_array()) bad("model.d_values must be a list");
    for (const auto& x : m.at("d_values")) {
      const double d = as_number(x, "model.d_values entry");
      if (d <= 0.0) bad("model.d_values entries must be > 0");
      c.model.d_values.push_back(d);
    }
  }
  if (m.contains("grid")) c.model.grid = as_int(m.at("grid"), "model.grid");
  if (c.model.grid < 4) bad("model.grid must be >= 4");
  if (m.contains("boundary") && m.at("boundary") != "neumann") bad("model.boundary must be 'neumann'");

  if (j.contains("seed")) {
    const Json& s = j.at("seed");
    SeedSpec spec;
    try {
      spec.kind = seed_kind_from_string(require(s, "kind", "seed").get<std::string>());
    } catch (const InvalidArgumentError& e) {
      bad(std::string("seed.kind: ") + e.what());
    }
    if (s.contains("distances")) spec.distances = int_list(s.at("distances"), "seed.distances");
    if (s.contains("sites")) {
      for (const auto& x : s.at("sites")) {
        const std::string v = x.get<std::string>();
        if (v == "intersite") spec.sites.push_back(KinkSite::intersite);
        else if (v == "onsite") spec.sites.push_back(KinkSite::onsite);
        else bad("seed.sites entries must be 'intersite' or 'onsite'");
      }
    }
    if (s.contains("center")) spec.center = as_int(s.at("center"), "seed.center");
    if (spec.kind == SeedKind::onsite_kink || spec.kind == SeedKind::onsite_antikink) {
      if (spec.sites.empty()) spec.sites = {KinkSite::onsite};
    }
    try {
      spec.validate();
    } catch (const InvalidArgumentError& e) {
      bad(std::string("seed: ") + e.what());
    }
    if (spec.kind == SeedKind::kink_kink && c.model.family != Family::sine_gordon) {
      bad("seed.kind kink_kink needs the sine_gordon family");
    }
    c.seed = spec;
  }

  if (j.contains("tolerances")) {
    const Json& t = j.at("tolerances");
    if (t.contains("newton_tol")) c.newton.tol = as_number(t.at("newton_tol"), "tolerances.newton_tol");
    if (t.contains("newton_max_iter")) c.newton.max_iter = as_int(t.at("newton_max_iter"), "tolerances.newton_max_iter");
    if (t.contains("d_step")) c.d_step = as_number(t.at("d_step"), "tolerances.d_step");
    if (!(c.newton.tol > 0.0) || c.newton.max_iter < 1 || !(c.d_step > 0.0)) bad("tolerances must be positive");
  }
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("random_seed")) c.random_seed = j.at("random_seed").get<long long>();
  if (j.contains("params")) {
    if (!j.at("params").is_object()) bad("params must be an object");
    c.params = j.at("params");
  }
  const Json& p = c.params;

  // Per-task requirements.
  const std::string& t = c.task;
  const bool needs_d = t == "kink" || t == "spectrum" || t == "multikink" || t == "predict" || t == "evolve";
  if (needs_d && !c.model.d) bad("task " + t + " requires model.d");
  const bool needs_seed = needs_d || t == "bifurcation";
  if (needs_seed && !c.seed) bad("task " + t + " requires a seed block");
  if ((t == "multikink" || t == "predict") && !is_multi(*c.seed)) bad("task " + t + " requires a multikink seed");
  if (t == "predict") {
    mode_from(p);
    if (*c.model.d <= 0.0) bad("task predict requires model.d > 0");
  }
  if (t == "bifurcation") {
    if (c.seed->kind != SeedKind::multikink || c.seed->distances.size() != 1) {
      bad("task bifurcation requires a two-component multikink seed");
    }
  }
  if (t == "fold_sweep") {
    const auto seps = int_list(require(p, "separations", "params"), "params.separations");
    if (seps.empty()) bad("params.separations must not be empty");
    for (int s : seps) {
      if (s < 2) bad("params.separations entries must be >= 2");
    }
  }
  if (t == "evolve") {
    if (as_number(require(p, "t_end", "params"), "params.t_end") <= 0.0) bad("params.t_end must be > 0");
    IntegratorConfig ic;
    ic.h = param(p, "h", ic.h);
    ic.stages = param_int(p, "stages", ic.stages);
    ic.stage_solver_tol = param(p, "stage_solver_tol", ic.stage_solver_tol);
    try {
      ic.validate();
    } catch (const InvalidArgumentError& e) {
      bad(std::string("params: ") + e.what());
    }
    if (p.contains("perturbation")) {
      if (!p.at("perturbation").is_array()) bad("params.perturbation must be a list of [site, amount]");
      for (const auto& e : p.at("perturbation")) {
        if (!e.is_array() || e.size() != 2) bad("params.perturbation entries must be [site, amount]");
        as_int(e[0], "perturbation site");
        as_number(e[1], "perturbation amount");
      }
    }
    if (p.contains("probes")) int_list(p.at("probes"), "params.probes");
    if (param_int(p, "sample_stride", 1) < 1) bad("params.sample_stride must be >= 1");
  }
  if (t == "error_sweep") {
    if (c.model.d_values.empty() && !c.model.d) bad("task error_sweep requires model.d_values");
    const Json& dl = require(p, "distances_list", "params");
    if (!dl.is_array() || dl.empty()) bad("params.distances_list must be a non-empty list of lists");
    for (const auto& x : dl) {
      for (int n : int_list(x, "params.distances_list entry")) {
        if (n < 2) bad("params.distances_list distances must be >= 2");
      }
    }
    mode_from(p);
  }
  return c;
}

// ---------------------------------------------------------------------------

Model sine_gordon_model(double d, Grid grid) { return Model(d, Nonlinearity::sine_gordon(), grid); }

double reflection_parity(const LatticeField& v) {
  const LatticeField r = reflect(v);
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v.values[i] * r.values[i];
  return s;
}

DecayReport decay_report(double d, int n, int first, int last) {
  DecayReport rep;
  rep.first = first;
  rep.last = last;
  const Model m = sine_gordon_model(d, Grid::centered(n));
  rep.kink = solve_kink(m, KinkSite::intersite);
  rep.spectrum = classify(compute_spectrum(rep.kink, m, true), m);
  const double us = m.nonlinearity().u_star();
  {
    DecayReport::Row r;
    r.series = "kink";
    r.fit = decay_fit(window(rep.kink, first, last), us);
    r.theory_rate = std::log(saddle_rate_r(m));
    r.relative_error = std::abs(r.fit.rate - r.theory_rate) / r.theory_rate;
    rep.rows.push_back(r);
  }
  for (ModeLabel label : {ModeLabel::goldstone, ModeLabel::edge}) {
    const auto idx = rep.spectrum.find(label);
    if (!idx) continue;
    DecayReport::Row r;
    r.series = std::string(to_string(label));
    r.fit = decay_fit(window(rep.spectrum.vectors[*idx], first, last), 0.0);
    r.theory_rate = std::log(linearized_rate_r0(rep.spectrum.omegas[*idx], m));
    r.relative_error = std::abs(r.fit.rate - r.theory_rate) / r.theory_rate;
    rep.rows.push_back(r);
  }
  return rep;
}

ErrorSweep error_sweep(const std::vector<double>& d_values, const std::vector<std::vector<int>>& distances,
                       ModeLabel mode, int n, int workers, SeedKind kind) {
  struct Job {
    double d;
    std::vector<int> dist;
    std::vector<SweepRow> rows;
    std::string warning;
  };
  std::vector<Job> jobs;
  for (double d : d_values) {
    for (const auto& dist : distances) jobs.push_back({d, dist, {}, {}});
  }
  // One base mode per d, computed up front.
  std::map<double, BaseMode> bases;
  for (double d : d_values) {
    const Model m = sine_gordon_model(d, Grid::centered(n));
    bases.emplace(d, base_mode(solve_kink(m, KinkSite::intersite), m, mode));
  }
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      Job& job = jobs[i];
      SeedSpec spec = kind == SeedKind::kink_kink ? SeedSpec::kink_kink(job.dist) : SeedSpec::multikink(job.dist);
      const Model m = sine_gordon_model(job.d, grid_for(spec, n));
      try {
        const LatticeField u = build_multikink(spec, m).field;
        const BaseMode& b = bases.at(job.d);
        const TheoryPrediction p = predict(b.omega0, b.v0, job.dist, m);
        const int N = *std::min_element(job.dist.begin(), job.dist.end()) / 2;
        for (auto& row : error_table(u, p, m, job.dist, std::string(to_string(mode)))) {
          job.rows.push_back({job.d, N, job.dist, row, p.regime_warning});
        }
      } catch (const Error& e) {
        job.warning = "d = " + std::to_string(job.d) + ": " + e.what();
      }
    }
  };
  const int k = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < k; ++i) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  ErrorSweep out;
  for (auto& job : jobs) {
    for (auto& r : job.rows) out.rows.push_back(std::move(r));
    if (!job.warning.empty()) out.warnings.push_back(job.warning);
  }
  return out;
}

std::vector<SlopeFit> error_slopes(const ErrorSweep& sweep) {
  std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> by;
  for (const auto& r : sweep.rows) {
    by[r.row.component].first.push_back(r.N);
    by[r.row.component].second.push_back(std::log10(r.row.relative_error));
  }
  std::vector<SlopeFit> out;
  for (const auto& [j, xy] : by) {
    if (xy.first.size() >= 2) out.push_back({j, fit_line(xy.first, xy.second)});
  }
  return out;
}

std::string pair_type(const LatticeField& u) {
  const auto cs = zero_crossings(u);
  if (cs.empty()) return "none";
  std::string s;
  for (std::size_t i = 0; i < cs.size(); ++i) s += (i ? "-" : "") + std::string(to_string(cs[i].site));
  return s;
}

BifurcationDiagram bifurcation_diagram(int separation, int n, double d_start) {
  const SeedSpec spec = SeedSpec::multikink({separation});
  BifurcationDiagram bd{separation, {}, {}, {}, {}, {}, sine_gordon_model(0.0, grid_for(spec, n))};
  const Model m = bd.model;
  LatticeField u = ac_seed(spec, m);
  const int steps = static_cast<int>(std::lround(d_start / 0.01));
  for (int k = 1; k <= steps; ++k) u = newton_solve(u, m.with_coupling(k * d_start / steps)).field;
  ArclengthOptions opts;
  opts.step = 0.01;
  opts.max_step = 0.05;
  opts.max_points = 1500;
  bd.main = continue_arclength(make_branch_point(u, m.with_coupling(d_start)), m, opts);
  if (auto f = bd.main.events_of(EventKind::fold); !f.empty()) bd.fold = f.front();
  if (auto p = bd.main.events_of(EventKind::pitchfork); !p.empty()) {
    bd.pitchfork = p.front();
    bd.asym_plus = switch_branch(bd.main, p.front(), m, +1, opts);
    bd.asym_minus = switch_branch(bd.main, p.front(), m, -1, opts);
  }
  return bd;
}

PhaseRun kak_phase_run(int sign, double d, int n, int separation, double t_end) {
  const SeedSpec spec = SeedSpec::multikink({separation});
  PhaseRun run{sign, sine_gordon_model(d, grid_for(spec, n)), {}, {}, {}, {}, {}, 0.0, 0.0, 0.0};
  run.equilibrium = build_multikink(spec, run.model).field;
  const SpectrumResult s = compute_spectrum(run.equilibrium, run.model, true);
  // The two Goldstone-split modes: the pair of gap modes nearest the single-kink Goldstone.
  const Model single = run.model.with_grid(Grid::centered(n));
  const BaseMode g = base_mode(solve_kink(single, KinkSite::intersite), single, ModeLabel::goldstone);
  std::vector<std::size_t> idx(s.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::partial_sort(idx.begin(), idx.begin() + 2, idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(s.omegas[a] - g.omega0) < std::abs(s.omegas[b] - g.omega0);
  });
  for (int k = 0; k < 2; ++k) {
    const double lam = std::abs(s.lambda(idx[static_cast<std::size_t>(k)]));
    if (reflection_parity(s.vectors[idx[static_cast<std::size_t>(k)]]) > 0) run.lambda_symmetric = lam;
    else run.lambda_antisymmetric = lam;
  }
  run.lambda_expected = sign > 0 ? run.lambda_symmetric : run.lambda_antisymmetric;
  // Site 0 and its mirror are the inner central nodes of the two kinks.
  const int mirror = run.model.grid().lo + run.model.grid().hi;
  const std::vector<std::pair<int, double>> kicks{{0, 0.1}, {mirror, sign * 0.1}};
  EvolveOptions eo;
  eo.probes = {-1, 0, mirror, mirror + 1};
  eo.sample_stride = 10;
  IntegratorConfig cfg;
  run.trajectory = evolve(perturb(run.equilibrium, kicks), run.model, cfg, t_end, eo);
  run.drift = energy_drift(run.trajectory);
  Trajectory head = run.trajectory;
  const auto cut = static_cast<std::size_t>(std::upper_bound(head.times.begin(), head.times.end(), 100.0 + 1e-9) -
                                            head.times.begin());
  head.times.resize(cut);
  head.energy.resize(cut);
  head.boundary_left.resize(cut);
  head.boundary_right.resize(cut);
  run.drift_100 = energy_drift(head);
  run.peak = periodogram_peak(run.trajectory.probes[1], cfg.h * eo.sample_stride, 2.0);
  return run;
}

DestabRun onsite_destab_run(double d, int n, int separation, double t_end) {
  const SeedSpec onsite = SeedSpec::multikink({separation}, {KinkSite::onsite, KinkSite::onsite});
  DestabRun run{sine_gordon_model(d, grid_for(onsite, n)), {}, {}, 0, {}, 0.0, {}};
  run.onsite = build_multikink(onsite, run.model).field;
  run.onsite_unstable = compute_spectrum(run.onsite, run.model, false).unstable_count();
  run.intersite = build_multikink(SeedSpec::multikink({separation}), run.model).field;
  run.reference = run.intersite.at(0);
  const std::vector<std::pair<int, double>> kicks{{0, 0.1}, {separation, 0.1}};
  EvolveOptions eo;
  eo.probes = {0, separation};
  eo.sample_stride = 10;
  run.trajectory = evolve(perturb(run.onsite, kicks), run.model, IntegratorConfig{}, t_end, eo);
  run.drift = energy_drift(run.trajectory);
  return run;
}

// ---------------------------------------------------------------------------
// Task pipelines

RunOutput run_task(const ExperimentConfig& c, int workers) {
  const auto t0 = Clock::now();
  RunOutput out;
  out.config = c.raw;
  const Json& p = c.params;
  const std::string& t = c.task;

  if (t == "kink" || t == "spectrum" || t == "multikink" || t == "evolve") {
    const Model m = model_at(c, *c.model.d, grid_for(*c.seed, c.model.grid));
    const NewtonSolution sol = build_equilibrium(*c.seed, m, c.newton, c.d_step);
    const LatticeField& u = sol.field;
    out.results["model"] = model_json(m);
    out.results["seed_kind"] = std::string(to_string(c.seed->kind));
    out.results["residual_inf"] = max_abs(residual(u, m));
    out.results["newton_iterations"] = sol.iterations;
    out.results["crossings"] = crossings_json(u);
    out.results["static_energy"] = static_energy(u, m);
    out.results["l2_norm"] = l2_norm(u);
    out.tables.emplace_back("profile.csv", profile_table(u));
    if (t == "spectrum") {
      SpectrumResult s = compute_spectrum(u, m, true);
      if (m.d() > 0.0) s = classify(std::move(s), m);
      out.results["spectrum"] = spectrum_json(s, m);
      out.tables.emplace_back("spectrum.csv", spectrum_table(s));
      out.tables.emplace_back("eigenvectors.csv", eigenvector_table(s));
    }
    if (t == "multikink" && m.d() > 0.0 && c.seed->kind != SeedKind::kink_kink) {
      PrimaryKinks kinks;
      const Model single = m.with_grid(Grid::centered(c.model.grid));
      kinks.intersite = solve_kink(single, KinkSite::intersite, 1, c.d_step);
      kinks.onsite = solve_kink(single, KinkSite::onsite, 1, c.d_step);
      out.results["splice_deviation"] = splice_deviation(u, *c.seed, m, kinks);
    }
    if (t == "evolve") {
      std::vector<std::pair<int, double>> kicks;
      if (p.contains("perturbation")) {
        for (const auto& e : p.at("perturbation")) kicks.emplace_back(e[0].get<int>(), e[1].get<double>());
      }
      IntegratorConfig ic;
      ic.h = param(p, "h", ic.h);
      ic.stages = param_int(p, "stages", ic.stages);
      ic.stage_solver_tol = param(p, "stage_solver_tol", ic.stage_solver_tol);
      EvolveOptions eo;
      if (p.contains("probes")) {
        eo.probes = int_list(p.at("probes"), "params.probes");
      } else {
        // Central nodes: the two sites straddling each crossing.
        for (const auto& cr : zero_crossings(u)) {
          const int left = static_cast<int>(std::floor(cr.position));
          eo.probes.push_back(left);
          eo.probes.push_back(left + 1);
        }
        eo.probes.erase(std::remove_if(eo.probes.begin(), eo.probes.end(), [&](int s) { return !u.contains(s); }),
                        eo.probes.end());
      }
      eo.sample_stride = param_int(p, "sample_stride", 10);
      eo.snapshot_stride = param_int(p, "snapshot_stride", 0);
      const Trajectory tr = evolve(perturb(u, kicks), m, ic, p.at("t_end").get<double>(), eo);
      const EnergyDrift dr = energy_drift(tr);
      out.results["energy_drift"] = dr.max_relative;
      out.results["boundary_onset"] = dr.boundary_onset ? Json(*dr.boundary_onset) : Json(nullptr);
      Json peaks = Json::array();
      const double omega_max = param(p, "omega_max", 3.0);
      for (std::size_t k = 0; k < tr.probe_sites.size(); ++k) {
        if (tr.probes[k].size() < 8) continue;
        const SpectralPeak pk = periodogram_peak(tr.probes[k], ic.h * eo.sample_stride, omega_max);
        peaks.push_back({{"site", tr.probe_sites[k]}, {"omega", pk.omega}, {"bin_width", pk.bin_width}});
      }
      out.results["probe_peaks"] = peaks;
      if (tr.failure) throw StepError("evolve aborted: " + *tr.failure, 0, 0.0);
      out.tables.emplace_back("trajectory.csv", trajectory_table(tr));
      for (const auto& [time, field] : tr.snapshots) {
        out.tables.emplace_back("snapshot_t" + format_double(time) + ".csv", profile_table(field));
      }
    }
  } else if (t == "predict") {
    const double d = *c.model.d;
    const ModeLabel mode = mode_from(p);
    const Model single = model_at(c, d, Grid::centered(c.model.grid));
    const KinkSite site = c.seed->site(0);
    const BaseMode b = base_mode(solve_kink(single, site, 1, c.d_step), single, mode);
    const Model m = model_at(c, d, grid_for(*c.seed, c.model.grid));
    const LatticeField u = build_equilibrium(*c.seed, m, c.newton, c.d_step).field;
    const TheoryPrediction pr = predict(b.omega0, b.v0, c.seed->distances, m);
    const SpectrumResult s = compute_spectrum(u, m, false);
    const auto rows = error_table(s, pr, m, c.seed->distances, std::string(to_string(mode)));
    Table tab{{"d", "distances", "mode", "component", "mu", "omega_pred", "lambda_pred_im", "lambda_true_im",
               "relative_error"},
              {}};
    std::string ds;
    for (std::size_t i = 0; i < c.seed->distances.size(); ++i) ds += (i ? ";" : "") + std::to_string(c.seed->distances[i]);
    Json jr = Json::array();
    for (const auto& r : rows) {
      tab.add({d, ds, r.mode, static_cast<long long>(r.component), pr.mu[r.component], pr.omega_pred[r.component],
               r.lambda_predicted.imag(), r.lambda_computed.imag(), r.relative_error});
      jr.push_back({{"component", r.component},
                    {"lambda_predicted", complex_json(r.lambda_predicted)},
                    {"lambda_computed", complex_json(r.lambda_computed)},
                    {"relative_error", r.relative_error}});
    }
    out.results["model"] = model_json(m);
    out.results["base_omega"] = pr.base_omega;
    out.results["base_lambda"] = pr.base_lambda;
    out.results["a"] = pr.a;
    out.results["M"] = pr.M;
    out.results["mu"] = pr.mu;
    out.results["omega_pred"] = pr.omega_pred;
    out.results["distinct"] = pr.distinct;
    out.results["all_imaginary"] = pr.all_imaginary;
    out.results["errors"] = jr;
    out.results["splitting_count"] = splitting_count(s, pr.base_omega, default_window(pr, m));
    for (const auto& w : pr.warnings) out.warnings.push_back(w);
    out.tables.emplace_back("prediction.csv", tab);
  } else if (t == "error_sweep") {
    std::vector<std::vector<int>> dl;
    for (const auto& x : p.at("distances_list")) dl.push_back(x.get<std::vector<int>>());
    const SeedKind kind = c.seed && c.seed->kind == SeedKind::kink_kink ? SeedKind::kink_kink : SeedKind::multikink;
    const ErrorSweep sw = error_sweep(d_list(c), dl, mode_from(p), c.model.grid, workers, kind);
    out.warnings = sw.warnings;
    out.tables.emplace_back("errors.csv", error_rows_table(sw.rows));
    Json fits = Json::array();
    if (c.model.d_values.size() <= 1) {
      for (const auto& f : error_slopes(sw)) {
        fits.push_back({{"component", f.component}, {"slope", f.fit.slope}, {"r_squared", f.fit.r_squared}});
      }
    }
    out.results["rows"] = sw.rows.size();
    out.results["slopes"] = fits;
  } else if (t == "bifurcation") {
    const int sep = c.seed->distances[0];
    const Model m = model_at(c, 0.0, grid_for(*c.seed, c.model.grid));
    LatticeField u = ac_seed(*c.seed, m);
    const double d_start = param(p, "d_start", 0.05);
    const int steps = std::max(1, static_cast<int>(std::lround(d_start / c.d_step)));
    for (int k = 1; k <= steps; ++k) u = newton_solve(u, m.with_coupling(k * d_start / steps), c.newton).field;
    ArclengthOptions opts;
    opts.step = param(p, "step", 0.01);
    opts.max_step = param(p, "max_step", 0.05);
    opts.max_points = param_int(p, "max_points", 1500);
    opts.corrector.tol = c.newton.tol;
    const Branch main = continue_arclength(make_branch_point(u, m.with_coupling(d_start)), m, opts);
    Table bt{{"branch", "point", "d", "l2_norm", "stability_index", "arclength", "critical_omega", "type"}, {}};
    Table et{{"branch", "kind", "d", "index", "note"}, {}};
    add_branch_rows(bt, et, "main", main);
    out.results["separation"] = sep;
    if (auto f = main.events_of(EventKind::fold); !f.empty()) out.results["fold_d"] = f.front().d;
    if (auto pf = main.events_of(EventKind::pitchfork); !pf.empty()) {
      out.results["pitchfork_d"] = pf.front().d;
      const double eps = param(p, "epsilon", 1e-3);
      add_branch_rows(bt, et, "asym_plus", switch_branch(main, pf.front(), m, +1, opts, eps));
      add_branch_rows(bt, et, "asym_minus", switch_branch(main, pf.front(), m, -1, opts, eps));
    }
    out.tables.emplace_back("branch.csv", bt);
    out.tables.emplace_back("events.csv", et);
  } else if (t == "fold_sweep") {
    const auto seps = p.at("separations").get<std::vector<int>>();
    const Model base = model_at(c, 0.0, Grid::centered(c.model.grid));
    const FoldSweep sw = fold_vs_distance(seps, base, workers);
    Table ft{{"separation", "ok", "d0", "error"}, {}};
    for (const auto& s : sw.samples) {
      ft.add({static_cast<long long>(s.separation), static_cast<long long>(s.ok), s.d0, s.error});
      if (!s.ok) out.warnings.push_back("separation " + std::to_string(s.separation) + ": " + s.error);
    }
    out.tables.emplace_back("folds.csv", ft);
    out.results["fit"] = {{"slope", sw.fit.slope},
                          {"intercept", sw.fit.intercept},
                          {"r_squared", sw.fit.r_squared},
                          {"samples", sw.fit.samples}};
  }
  out.timings["total_s"] = seconds_since(t0);
  return out;
}

// ---------------------------------------------------------------------------
// Figure bundles

const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"kink_profiles",    "kink_spectrum", "decay_fit",        "bifurcation",
                                            "kak_spectrum",     "error_vs_N",    "error_vs_d",       "threekink",
                                            "kinkkink",         "timestep_inphase", "timestep_outphase",
                                            "onsite_destab"};
  return ids;
}

RunOutput reproduce_figure(const std::string& id, int workers) {
  if (std::find(figure_ids().begin(), figure_ids().end(), id) == figure_ids().end()) {
    throw InvalidArgumentError("unknown figure id '" + id + "'");
  }
  const auto t0 = Clock::now();
  RunOutput out;
  out.figure = id;
  const int n = 60;

  if (id == "kink_profiles") {
    out.config = {{"figure", id}, {"d", 0.5}, {"grid", n}};
    const Model m = sine_gordon_model(0.5, Grid::centered(n));
    const LatticeField ki = solve_kink(m, KinkSite::intersite);
    const LatticeField ko = solve_kink(m, KinkSite::onsite);
    const LatticeField ac = ac_seed(SeedSpec::kink(), m);
    Table t{{"n", "ac_intersite", "intersite", "onsite"}, {}};
    for (int x = m.grid().lo; x <= m.grid().hi; ++x) t.add({static_cast<long long>(x), ac.at(x), ki.at(x), ko.at(x)});
    out.tables.emplace_back("profiles.csv", t);
    out.results["intersite_crossings"] = crossings_json(ki);
    out.results["onsite_crossings"] = crossings_json(ko);
  } else if (id == "kink_spectrum") {
    out.config = {{"figure", id}, {"d", 0.5}, {"grid", n}};
    const Model m = sine_gordon_model(0.5, Grid::centered(n));
    const SpectrumResult si = classify(compute_spectrum(solve_kink(m, KinkSite::intersite), m), m);
    const SpectrumResult so = classify(compute_spectrum(solve_kink(m, KinkSite::onsite), m), m);
    Table t = spectrum_table(si, "intersite");
    for (auto& row : spectrum_table(so, "onsite").rows) t.rows.push_back(row);
    out.tables.emplace_back("spectra.csv", t);
    out.results["intersite"] = spectrum_json(si, m);
    out.results["onsite"] = spectrum_json(so, m);
    const std::vector<double> grid_d{0.2, 0.22, 0.24, 0.26, 0.28, 0.3, 0.32};
    const EdgeOnset on = edge_mode_onset(sine_gordon_model(0.2, Grid::centered(n)), grid_d);
    out.results["edge_onset"] = {{"found", on.found}, {"d", on.d}, {"bracket", {on.bracket_lo, on.bracket_hi}}};
  } else if (id == "decay_fit") {
    out.config = {{"figure", id}, {"d", 0.5}, {"grid", n}, {"window", {2, 12}}};
    const DecayReport rep = decay_report(0.5, n);
    const double us = std::numbers::pi;
    Table pts{{"series", "n", "log_distance"}, {}};
    for (int x = 0; x <= rep.kink.last(); ++x) {
      const double dk = std::abs(rep.kink.at(x) - us);
      if (dk > 0) pts.add({"kink", static_cast<long long>(x), std::log(dk)});
    }
    for (ModeLabel label : {ModeLabel::goldstone, ModeLabel::edge}) {
      if (auto idx = rep.spectrum.find(label)) {
        const LatticeField& v = rep.spectrum.vectors[*idx];
        for (int x = 0; x <= v.last(); ++x) {
          if (v.at(x) != 0.0) pts.add({std::string(to_string(label)), static_cast<long long>(x), std::log(std::abs(v.at(x)))});
        }
      }
    }
    Table fits{{"series", "rate", "intercept", "r_squared", "samples", "theory_rate", "relative_error"}, {}};
    for (const auto& r : rep.rows) {
      fits.add({r.series, r.fit.rate, r.fit.intercept, r.fit.r_squared, static_cast<long long>(r.fit.samples),
                r.theory_rate, r.relative_error});
      out.results[r.series] = {{"rate", r.fit.rate}, {"theory", r.theory_rate}, {"relative_error", r.relative_error}};
    }
    out.tables.emplace_back("decay_points.csv", pts);
    out.tables.emplace_back("decay_fits.csv", fits);
  } else if (id == "bifurcation") {
    out.config = {{"figure", id}, {"separation", 8}, {"grid", n}};
    const BifurcationDiagram bd = bifurcation_diagram(8, n);
    Table bt{{"branch", "point", "d", "l2_norm", "stability_index", "arclength", "critical_omega", "type"}, {}};
    Table et{{"branch", "kind", "d", "index", "note"}, {}};
    add_branch_rows(bt, et, "main", bd.main);
    add_branch_rows(bt, et, "asym_plus", bd.asym_plus);
    add_branch_rows(bt, et, "asym_minus", bd.asym_minus);
    out.tables.emplace_back("branch.csv", bt);
    out.tables.emplace_back("events.csv", et);
    if (bd.fold) out.results["fold_d"] = bd.fold->d;
    if (bd.pitchfork) out.results["pitchfork_d"] = bd.pitchfork->d;
    const std::vector<int> seps{4, 6, 8, 10, 12};
    const FoldSweep sw = fold_vs_distance(seps, sine_gordon_model(0.0, Grid::centered(n)), workers);
    Table ft{{"separation", "d0"}, {}};
    for (const auto& s : sw.samples) ft.add({static_cast<long long>(s.separation), s.ok ? s.d0 : std::nan("")});
    out.tables.emplace_back("fold_vs_separation.csv", ft);
    out.results["fold_fit"] = {{"slope", sw.fit.slope}, {"intercept", sw.fit.intercept}, {"r_squared", sw.fit.r_squared}};
  } else if (id == "kak_spectrum" || id == "kinkkink") {
    const double d = 0.25;
    out.config = {{"figure", id}, {"d", d}, {"grid", n}, {"separation", 8}};
    const SeedSpec kak = SeedSpec::multikink({8});
    const Model mk = sine_gordon_model(d, grid_for(kak, n));
    const SpectrumResult s1 = compute_spectrum(build_multikink(kak, mk).field, mk);
    Table t = spectrum_table(s1, "kink_antikink");
    if (id == "kinkkink") {
      const SeedSpec kk = SeedSpec::kink_kink({8});
      const SpectrumResult s2 = compute_spectrum(build_multikink(kk, mk).field, mk, false);
      for (auto& row : spectrum_table(s2, "kink_kink").rows) t.rows.push_back(row);
      double worst = 0.0;
      for (std::size_t i = 0; i < s1.size(); ++i) {
        worst = std::max(worst, std::abs(s1.lambda(i) - s2.lambda(i)) / std::max(1e-300, std::abs(s1.lambda(i))));
      }
      out.results["max_relative_lambda_difference"] = worst;
    } else {
      const Model single = sine_gordon_model(d, Grid::centered(n));
      const SpectrumResult s0 = classify(compute_spectrum(solve_kink(single, KinkSite::intersite), single), single);
      for (auto& row : spectrum_table(s0, "single_kink").rows) t.rows.push_back(row);
    }
    out.tables.emplace_back("spectra.csv", t);
  } else if (id == "error_vs_N" || id == "threekink") {
    const double d = 0.25;
    std::vector<std::vector<int>> dl;
    const int nmax = id == "threekink" ? 6 : 8;
    for (int N = 2; N <= nmax; ++N) {
      if (id == "threekink") dl.push_back({2 * N, 2 * N});
      else dl.push_back({2 * N});
    }
    out.config = {{"figure", id}, {"d", d}, {"grid", n}, {"distances", dl}};
    const ErrorSweep sw = error_sweep({d}, dl, ModeLabel::goldstone, n, workers);
    out.tables.emplace_back("errors.csv", error_rows_table(sw.rows));
    const Model single = sine_gordon_model(d, Grid::centered(n));
    const BaseMode b = base_mode(solve_kink(single, KinkSite::intersite), single, ModeLabel::goldstone);
    out.tables.emplace_back("slopes.csv", slopes_table(error_slopes(sw), linearized_rate_r0(b.omega0, single),
                                                       saddle_rate_r(single)));
    out.warnings = sw.warnings;
  } else if (id == "error_vs_d") {
    std::vector<double> ds;
    for (int k = 1; k <= 10; ++k) ds.push_back(0.1 * k);
    out.config = {{"figure", id}, {"d_values", ds}, {"grid", n}, {"separation", 8}};
    const ErrorSweep sw = error_sweep(ds, {{8}}, ModeLabel::goldstone, n, workers);
    out.tables.emplace_back("errors.csv", error_rows_table(sw.rows));
    out.warnings = sw.warnings;
  } else if (id == "timestep_inphase" || id == "timestep_outphase") {
    const int sign = id == "timestep_inphase" ? 1 : -1;
    out.config = {{"figure", id}, {"d", 0.5}, {"grid", 400}, {"separation", 8}, {"t_end", 600.0}, {"h", 0.01}};
    const PhaseRun run = kak_phase_run(sign);
    out.tables.emplace_back("trajectory.csv", trajectory_table(run.trajectory));
    out.results["energy_drift_t100"] = run.drift_100.max_relative;
    out.results["energy_drift"] = run.drift.max_relative;
    out.results["boundary_onset"] = run.drift.boundary_onset ? Json(*run.drift.boundary_onset) : Json(nullptr);
    out.results["fft_peak"] = run.peak.omega;
    out.results["bin_width"] = run.peak.bin_width;
    out.results["lambda_symmetric"] = run.lambda_symmetric;
    out.results["lambda_antisymmetric"] = run.lambda_antisymmetric;
  } else if (id == "onsite_destab") {
    out.config = {{"figure", id}, {"d", 0.5}, {"grid", 400}, {"separation", 8}, {"t_end", 300.0}, {"h", 0.01}};
    const DestabRun run = onsite_destab_run();
    out.tables.emplace_back("trajectory.csv", trajectory_table(run.trajectory));
    out.results["onsite_unstable_count"] = run.onsite_unstable;
    out.results["intersite_reference"] = run.reference;
    out.results["energy_drift"] = run.drift.max_relative;
  }
  out.timings["total_s"] = seconds_since(t0);
  return out;
}

}  // namespace dkg
