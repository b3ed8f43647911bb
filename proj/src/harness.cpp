#include "flagcount/harness.hpp"

#include "flagcount/counting.hpp"
#include "flagcount/enumeration.hpp"
#include "flagcount/flow.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

namespace flagcount {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json num_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Appends timestamped lines to <output_dir>/flagcount.log and mirrors them to
// the diagnostic stream. Timestamps never reach the result files.
class RunLog {
public:
  RunLog(const fs::path& dir, std::ostream& err) : err_(err) {
    file_.open(dir / "flagcount.log", std::ios::app);
  }

  void operator()(const std::string& msg) {
    err_ << msg << '\n';
    if (!file_) return;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    file_ << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << ' ' << msg << '\n';
  }

private:
  std::ostream& err_;
  std::ofstream file_;
};

class Outputs {
public:
  Outputs(const RunConfig& cfg, std::string stem) : cfg_(cfg), stem_(std::move(stem)) {}

  bool csv() const { return cfg_.format != "json"; }
  bool json_out() const { return cfg_.format != "csv"; }

  void write_csv(const std::vector<std::string>& columns, const std::vector<std::vector<std::string>>& rows) const {
    if (!csv()) return;
    std::ofstream f = open(".csv");
    f << "# schema_version: " << kSchemaVersion << '\n';
    f << "# config: " << cfg_.to_json().dump() << '\n';
    write_row(f, columns);
    for (const auto& r : rows) write_row(f, r);
    finish(f, ".csv");
  }

  void write_json(json summary) const {
    if (!json_out()) return;
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["config"] = cfg_.to_json();
    for (auto& [k, v] : summary.items()) doc[k] = v;
    std::ofstream f = open(".json");
    f << doc.dump(2) << '\n';
    finish(f, ".json");
  }

private:
  static void write_row(std::ofstream& f, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) f << (i ? "," : "") << cells[i];
    f << '\n';
  }

  std::ofstream open(const std::string& ext) const {
    const fs::path p = fs::path(cfg_.output_dir) / (stem_ + ext);
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
  }

  void finish(std::ofstream& f, const std::string& ext) const {
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + stem_ + ext);
  }

  const RunConfig& cfg_;
  std::string stem_;
};

fs::path cache_directory(const RunConfig& cfg) {
  if (const char* env = std::getenv("FLAGCOUNT_CACHE"); env && *env) return env;
  return cfg.cache_dir;
}

PointSet obtain_points(const RunConfig& cfg, const VarietyModel& model, double T, RunLog& log) {
  const fs::path dir = cache_directory(cfg);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cache directory " + dir.string() + " is not usable: " + ec.message());
  const fs::path file = dir / cache_file_name(model, T);
  if (fs::exists(file)) {
    try {
      PointSet pts = cache_load(model, T, file);
      log("cache hit: reusing " + file.string() + " (" + std::to_string(pts.size()) + " points)");
      return pts;
    } catch (const CacheError& e) {
      log("cache entry " + file.string() + " rejected (" + e.what() + "); enumerating again");
    }
  }
  EnumerationOptions opt;
  opt.workers = cfg.workers;
  PointSet pts = enumerate_points(model, T, opt);
  try {
    cache_store(pts, file);
  } catch (const CacheError& e) {
    throw std::runtime_error(std::string("cannot write cache: ") + e.what());
  }
  log("enumerated " + std::to_string(pts.size()) + " points; cached at " + file.string());
  return pts;
}

json model_json(const VarietyModel& m) {
  json j;
  j["descriptor"] = m.descriptor();
  j["d"] = m.dim();
  j["beta"] = m.beta();
  j["ambient_dim"] = m.ambient_dim();
  return j;
}

std::string backend_name(CountBackend b) {
  switch (b) {
    case CountBackend::automatic:
      return "auto";
    case CountBackend::scan:
      return "scan";
    case CountBackend::cone:
      return "cone";
  }
  return "?";
}

int cmd_enumerate(const RunConfig& cfg, std::ostream& out, RunLog& log) {
  const VarietyModel model = VarietyModel::parse(cfg.model);
  const PointSet pts = obtain_points(cfg, model, cfg.tmax, log);
  std::vector<std::string> cols;
  for (int i = 0; i < model.ambient_dim(); ++i) cols.push_back("x" + std::to_string(i));
  cols.push_back("norm_sq");
  cols.push_back("height");
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : pts.points()) {
    std::vector<std::string> r;
    for (const auto& c : p.rep) r.push_back(c.get_str());
    r.push_back(p.norm_sq.get_str());
    r.push_back(num(p.height));
    rows.push_back(std::move(r));
  }
  Outputs o(cfg, "enumerate");
  o.write_csv(cols, rows);
  const ShellSpec sh = shells(cfg.tmax);
  std::vector<std::size_t> per_shell(sh.shell_count(), 0);
  for (const auto& p : pts.points()) ++per_shell[shell_of(sh, p)];
  json s;
  s["model"] = model_json(model);
  s["count"] = pts.size();
  s["shell_counts"] = per_shell;
  o.write_json(s);
  out << "count " << pts.size() << '\n';
  return kExitOk;
}

ExperimentConfig experiment(const RunConfig& cfg, const VarietyModel& model) {
  ExperimentConfig e;
  e.model = model;
  e.psi = ApproxFunction(cfg.c, *cfg.tau);
  e.ladder = dyadic_ladder(cfg.tmax, cfg.ladder_depth);
  e.num_samples = cfg.samples;
  e.base_seed = cfg.seed;
  e.radii = cfg.radii;
  e.workers = cfg.workers;
  e.mc_samples = cfg.mc_samples;
  e.backend = cfg.backend == "scan" ? CountBackend::scan : cfg.backend == "cone" ? CountBackend::cone : CountBackend::automatic;
  return e;
}

int cmd_count(const RunConfig& cfg, std::ostream& out, RunLog& log) {
  const VarietyModel model = VarietyModel::parse(cfg.model);
  ExperimentConfig e = experiment(cfg, model);
  const bool cone_ok = cone_supported(model, e.psi);
  if (e.backend == CountBackend::cone && !cone_ok)
    throw ValidationError("backend cone needs a projective-space model (projline or grassmannian:1:n)");
  std::optional<PointSet> pts;
  if (e.backend == CountBackend::scan || (e.backend == CountBackend::automatic && !cone_ok))
    pts.emplace(obtain_points(cfg, model, cfg.tmax, log));
  const KhintchineResult res = run_khintchine(e, pts ? &*pts : nullptr);

  std::vector<std::vector<std::string>> rows;
  for (const auto& r : res.records)
    rows.push_back({std::to_string(r.sample_index), num(r.T), std::to_string(r.N), num(r.Psi), num(r.logT), num(r.logN),
                    num(r.logPsi)});
  Outputs o(cfg, cfg.command);
  o.write_csv({"sample_index", "T", "N", "Psi", "logT", "logN", "logPsi"}, rows);

  json s;
  s["model"] = model_json(model);
  s["tau"] = e.psi.tau;
  s["critical"] = res.critical;
  s["backend"] = backend_name(res.backend_used);
  s["expected_slope"] = res.expected_slope;
  s["median_slope"] = num_json(res.median_slope);
  s["median_kappa"] = num_json(res.median_kappa);
  s["top_ratio"] = num_json(res.top_ratio);
  s["second_ratio"] = num_json(res.second_ratio);
  s["top_ratio_change"] = num_json(res.top_ratio_change);
  s["fitted_samples"] = res.fitted_samples;
  if (res.critical) {
    s["median_log_r2"] = num_json(res.median_log_r2);
    s["median_log_slope"] = num_json(res.median_log_slope);
    s["median_half_ratio"] = num_json(res.median_half_ratio);
  }
  json per = json::array();
  for (const auto& smp : res.samples) {
    json j;
    j["sample_index"] = smp.sample_index;
    j["slope"] = smp.growth ? num_json(smp.growth->slope) : json(nullptr);
    j["r_squared"] = smp.growth ? num_json(smp.growth->r_squared) : json(nullptr);
    j["kappa_hat"] = smp.kappa ? num_json(smp.kappa->kappa_hat) : json(nullptr);
    j["kappa_spread"] = smp.kappa ? num_json(smp.kappa->spread) : json(nullptr);
    j["degenerate"] = smp.kappa ? smp.kappa->degenerate : false;
    if (res.critical) {
      j["log_slope"] = smp.log_law ? num_json(smp.log_law->slope) : json(nullptr);
      j["log_r2"] = smp.log_law ? num_json(smp.log_law->r_squared) : json(nullptr);
      j["half_slope_ratio"] = smp.half_slope_ratio ? num_json(*smp.half_slope_ratio) : json(nullptr);
    }
    per.push_back(j);
  }
  s["samples"] = per;
  o.write_json(s);

  out << (res.critical ? "critical" : "subcritical") << " run, " << cfg.samples << " samples, backend "
      << backend_name(res.backend_used) << '\n';
  if (res.critical)
    out << "median r2 " << num(res.median_log_r2) << ", median slope per doubling " << num(res.median_log_slope)
        << ", half-slope ratio " << num(res.median_half_ratio) << '\n';
  else
    out << "median slope " << num(res.median_slope) << " (expected " << num(res.expected_slope) << "), median kappa "
        << num(res.median_kappa) << '\n';
  return kExitOk;
}

int cmd_equidist(const RunConfig& cfg, std::ostream& out, RunLog& log) {
  const VarietyModel model = VarietyModel::parse(cfg.model);
  ExperimentConfig e = experiment(cfg, model);
  e.ladder = {cfg.tmax};
  const PointSet pts = obtain_points(cfg, model, cfg.tmax, log);
  const EquidistResult res = run_equidistribution(e, pts);
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : res.rows) rows.push_back({num(r.r), std::to_string(r.count), num(r.vol), num(r.ratio)});
  Outputs o(cfg, "equidist");
  o.write_csv({"r", "count", "vol", "ratio"}, rows);
  json s;
  s["model"] = model_json(model);
  s["T"] = res.T;
  json radii = json::array();
  for (std::size_t k = 0; k < cfg.radii.size(); ++k) {
    json j;
    j["r"] = cfg.radii[k];
    j["vol"] = res.volumes[k].value;
    j["vol_std_error"] = res.volumes[k].std_error;
    j["median_ratio"] = num_json(res.median_ratio[k]);
    radii.push_back(j);
  }
  s["radii"] = radii;
  s["relative_spread"] = num_json(res.relative_spread);
  o.write_json(s);
  out << "relative spread of median ratios " << num(res.relative_spread) << '\n';
  return kExitOk;
}

int cmd_volume(const RunConfig& cfg, std::ostream& out) {
  const VarietyModel model = VarietyModel::parse(cfg.model);
  const ApproxFunction psi(cfg.c, *cfg.tau);
  const double k1 = unit_ball_volume(model.dim());
  std::vector<std::vector<std::string>> rows;
  json levels = json::array();
  for (double T : dyadic_ladder(cfg.tmax, cfg.ladder_depth)) {
    const VolumeEstimate v = volume_E_T(model, psi, T, cfg.mc_samples, cfg.seed);
    const double ref = k1 * psi_integral(model, psi, T);
    rows.push_back({num(T), num(v.value), num(v.std_error), num(ref)});
    json j;
    j["T"] = T;
    j["vol"] = v.value;
    j["std_error"] = v.std_error;
    j["kappa1_psi"] = ref;
    j["z"] = v.std_error > 0 ? num_json((v.value - ref) / v.std_error) : json(nullptr);
    levels.push_back(j);
  }
  Outputs o(cfg, "volume");
  o.write_csv({"T", "vol", "std_error", "kappa1_psi"}, rows);
  json s;
  s["model"] = model_json(model);
  s["levels"] = levels;
  o.write_json(s);
  const auto& last = rows.back();
  out << "vol(E_T) " << last[1] << " +- " << last[2] << " vs kappa1 Psi " << last[3] << '\n';
  return kExitOk;
}

int cmd_flow(const RunConfig& cfg, std::ostream& out) {
  const VarietyModel p1 = VarietyModel::projective_line();
  json s;
  if (cfg.diagnostic == "lambda1") {
    const double tau = *cfg.tau;
    const auto ladder = dyadic_ladder(cfg.tmax, cfg.ladder_depth);
    std::vector<std::vector<std::string>> rows;
    std::vector<double> finals;
    double worst = 0;
    for (std::size_t i = 0; i < cfg.samples; ++i) {
      Rng rng = make_rng(cfg.seed, i);
      const auto track = lambda1_track(sample_sigma(p1, rng), ladder, tau);
      for (const auto& r : track) {
        rows.push_back({num(r.T), num(r.lambda1), num(r.stat)});
        if (r.T > 1) worst = std::max(worst, r.stat);
      }
      finals.push_back(track.back().stat);
    }
    Outputs o(cfg, "flow_lambda1");
    o.write_csv({"T", "lambda1", "stat"}, rows);
    s["tau"] = tau;
    s["max_stat"] = worst;
    s["max_final_stat"] = *std::max_element(finals.begin(), finals.end());
    s["median_final_stat"] = num_json(median(finals));
    o.write_json(s);
    out << "max log(1/lambda1)/log T at T = " << num(cfg.tmax) << ": " << num(s["max_final_stat"].get<double>())
        << '\n';
  } else if (cfg.diagnostic == "sandwich") {
    SandwichConfig sc;
    sc.ell = cfg.ell;
    sc.T = cfg.tmax;
    sc.C0 = cfg.c0;
    sc.perturbations = cfg.perturbations;
    sc.lattice_points = cfg.points;
    sc.seed = cfg.seed;
    const SandwichReport rep = sandwich_check(sc);
    std::vector<std::vector<std::string>> rows;
    for (const auto& w : rep.witnesses)
      rows.push_back({std::to_string(w.inclusion), num(w.p[0][0]), num(w.p[0][1]), num(w.p[1][0]), num(w.p[1][1]),
                      num(w.v[0]), num(w.v[1]), num(w.image[0]), num(w.image[1])});
    Outputs o(cfg, "flow_sandwich");
    o.write_csv({"inclusion", "p11", "p12", "p21", "p22", "v1", "v2", "image1", "image2"}, rows);
    s["c_ell"] = rep.c_ell;
    s["points"] = rep.points;
    s["inner_checked"] = rep.inner_checked;
    s["outer_checked"] = rep.outer_checked;
    s["violations"] = rep.violations;
    o.write_json(s);
    out << "sandwich: " << rep.violations << " violations (" << rep.inner_checked << " inner, " << rep.outer_checked
        << " outer checks)\n";
  } else if (cfg.diagnostic == "birkhoff") {
    const Mat2 id{{{1, 0}, {0, 1}}};
    std::vector<std::vector<std::string>> rows;
    std::vector<double> finals;
    for (std::size_t i = 0; i < cfg.samples; ++i) {
      Rng rng = make_rng(cfg.seed, i);
      const BirkhoffResult b = birkhoff_average(cfg.c, sample_sigma(p1, rng), id, cfg.steps);
      for (std::size_t j = 0; j < b.values.size(); ++j)
        rows.push_back({std::to_string(i), std::to_string(j), std::to_string(b.values[j]), num(b.averages[j])});
      finals.push_back(b.averages.back());
    }
    Outputs o(cfg, "flow_birkhoff");
    o.write_csv({"sample_index", "j", "F", "average"}, rows);
    s["median_average"] = num_json(median(finals));
    s["iqr_average"] = num_json(quantile(finals, 0.75) - quantile(finals, 0.25));
    o.write_json(s);
    out << "median Birkhoff average " << num(median(finals)) << '\n';
  } else {
    const TessellationReport rep = tessellation_check(cfg.c, cfg.steps, cfg.tmax);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t j = 0; j < rep.window_counts.size(); ++j)
      rows.push_back({std::to_string(j), std::to_string(rep.window_counts[j])});
    Outputs o(cfg, "flow_tessellation");
    o.write_csv({"j", "count"}, rows);
    s["T"] = rep.T;
    s["checked"] = rep.checked;
    s["in_region"] = rep.in_region;
    s["mismatches"] = rep.mismatches;
    o.write_json(s);
    out << "tessellation: " << rep.mismatches << " mismatches over " << rep.checked << " points\n";
  }
  return kExitOk;
}

void validate(RunConfig& cfg) {
  static const std::vector<std::string> commands{"enumerate", "count", "equidist", "critical", "flow", "volume"};
  if (std::find(commands.begin(), commands.end(), cfg.command) == commands.end())
    throw UsageError("unknown command '" + cfg.command + "'");
  if (cfg.command != "flow" && cfg.model.empty()) throw UsageError("--model is required for " + cfg.command);
  if ((cfg.command == "count" || cfg.command == "volume") && !cfg.tau)
    throw UsageError("--tau is required for " + cfg.command);

  auto fail = [](const std::string& m) { throw ValidationError(m); };
  std::optional<VarietyModel> model;
  if (!cfg.model.empty()) {
    try {
      model = VarietyModel::parse(cfg.model);
    } catch (const std::exception& e) {
      fail(std::string("invalid model spec: ") + e.what());
    }
  }
  if (!(cfg.c > 0) || !std::isfinite(cfg.c)) fail("--c must be positive");
  if (cfg.tau && (!(*cfg.tau >= 0) || !std::isfinite(*cfg.tau))) fail("--tau must be non-negative");
  if (cfg.command == "critical" && cfg.tau && model && std::abs(*cfg.tau - model->beta()) > 1e-12)
    fail("critical runs use tau = beta = " + num(model->beta()) + "; drop --tau or set it to beta");
  if (cfg.command == "critical" && model) cfg.tau = model->beta();
  if (cfg.command == "flow" && cfg.diagnostic == "lambda1" && !cfg.tau) cfg.tau = 2.0;
  if (!(cfg.tmax > 1) || !std::isfinite(cfg.tmax)) fail("--tmax must exceed 1");
  if (cfg.ladder_depth < 1 || cfg.ladder_depth > 60) fail("--ladder-depth must lie in [1, 60]");
  if ((cfg.command == "count" || cfg.command == "critical" || cfg.command == "volume" ||
       (cfg.command == "flow" && cfg.diagnostic == "lambda1")) &&
      !(std::ldexp(cfg.tmax, -static_cast<int>(cfg.ladder_depth - 1)) > 1))
    fail("the bottom ladder level tmax / 2^(ladder_depth - 1) must exceed 1; lower --ladder-depth");
  if (cfg.samples < 1) fail("--samples must be at least 1");
  if (cfg.mc_samples < 1) fail("--mc-samples must be at least 1");
  for (double r : cfg.radii)
    if (!(r > 0) || r > std::numbers::pi / 2) fail("--radii must lie in (0, pi/2]");
  if (cfg.command == "equidist" && cfg.radii.empty()) fail("--radii needs at least one value");
  if (cfg.format != "csv" && cfg.format != "json" && cfg.format != "both") fail("--format must be csv, json or both");
  if (cfg.backend != "auto" && cfg.backend != "scan" && cfg.backend != "cone") fail("--backend must be auto, scan or cone");
  if (model && (cfg.command == "count" || cfg.command == "critical" || cfg.command == "equidist" || cfg.command == "volume") &&
      !model->samplable())
    fail("model " + cfg.model + " has no sigma_X sampler (quadrics need a diagonal +-1 form)");
  if (cfg.command == "flow") {
    const std::vector<std::string> diags{"lambda1", "sandwich", "birkhoff", "tessellation"};
    if (std::find(diags.begin(), diags.end(), cfg.diagnostic) == diags.end())
      fail("--diagnostic must be lambda1, sandwich, birkhoff or tessellation");
    if (cfg.diagnostic == "lambda1" && cfg.tau && (!(*cfg.tau > 0) || *cfg.tau > 2)) fail("flow --tau must lie in (0, 2]");
    if (cfg.diagnostic == "birkhoff" && (!(cfg.c <= 2) || cfg.steps < 1 || cfg.steps > 32))
      fail("birkhoff needs c in (0, 2] and --steps in [1, 32]");
    if (cfg.diagnostic == "tessellation" && (cfg.steps < 1 || cfg.steps > 62 || cfg.tmax > 1e4))
      fail("tessellation needs --steps in [1, 62] and --tmax <= 1e4 (the point radius)");
    if (cfg.ell < 1) fail("--ell must be positive");
    if (!(cfg.c0 > 0)) fail("--c0 must be positive");
  }
}

}  // namespace

json RunConfig::to_json() const {
  json j;
  j["command"] = command;
  j["model"] = model;
  j["c"] = c;
  j["tau"] = tau ? json(*tau) : json(nullptr);
  j["tmax"] = tmax;
  j["ladder_depth"] = ladder_depth;
  j["samples"] = samples;
  j["seed"] = seed;
  j["radii"] = radii;
  j["format"] = format;
  j["backend"] = backend;
  j["mc_samples"] = mc_samples;
  if (command == "flow") {
    j["diagnostic"] = diagnostic;
    j["ell"] = ell;
    j["c0"] = c0;
    j["perturbations"] = perturbations;
    j["points"] = points;
    j["steps"] = steps;
  }
  return j;
}

RunConfig parse_config(int argc, const char* const* argv, bool* help, std::string* help_text) {
  RunConfig cfg;
  CLI::App app{"flagcount: rational points of bounded height on flag varieties and their counting laws"};
  app.set_config("--config", "", "flat TOML key = value file; flags override it");
  app.add_option("command", cfg.command, "enumerate | count | equidist | critical | flow | volume")->required();
  app.add_option("--model", cfg.model, "projline | quadric:sphere:<n> | quadric:diag:<signs> | grassmannian:<l>:<n>");
  app.add_option("--c", cfg.c, "prefactor of psi(y) = c y^-tau")->capture_default_str();
  double tau = 0;
  auto* tau_opt = app.add_option("--tau", tau, "exponent of psi; critical runs use beta");
  app.add_option("--tmax", cfg.tmax, "top of the height ladder")->capture_default_str();
  app.add_option("--ladder-depth", cfg.ladder_depth, "number of dyadic levels")->capture_default_str();
  app.add_option("--samples", cfg.samples, "number of sigma_X samples")->capture_default_str();
  app.add_option("--seed", cfg.seed, "base seed; sample i uses seed + i")->capture_default_str();
  app.add_option("--radii", cfg.radii, "comma separated radii in (0, pi/2]")->delimiter(',')->capture_default_str();
  app.add_option("--output-dir", cfg.output_dir, "directory for result files")->capture_default_str();
  app.add_option("--cache-dir", cfg.cache_dir, "enumeration cache (FLAGCOUNT_CACHE overrides)")->capture_default_str();
  app.add_option("--format", cfg.format, "csv | json | both")->capture_default_str();
  app.add_option("--workers", cfg.workers, "worker threads (0 = all processors)")->capture_default_str();
  app.add_option("--backend", cfg.backend, "counting backend: auto | scan | cone")->capture_default_str();
  app.add_option("--mc-samples", cfg.mc_samples, "Monte Carlo draws for volumes")->capture_default_str();
  app.add_option("--diagnostic", cfg.diagnostic, "flow: lambda1 | sandwich | birkhoff | tessellation")
      ->capture_default_str();
  app.add_option("--ell", cfg.ell, "sandwich: ell")->capture_default_str();
  app.add_option("--c0", cfg.c0, "sandwich: C0")->capture_default_str();
  app.add_option("--perturbations", cfg.perturbations, "sandwich: random p per run")->capture_default_str();
  app.add_option("--points", cfg.points, "sandwich: lattice points")->capture_default_str();
  app.add_option("--steps", cfg.steps, "birkhoff / tessellation: N")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    if (help) *help = true;
    if (help_text) *help_text = app.help();
    return cfg;
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string(e.what()) + "\n" + app.help());
  }
  if (tau_opt->count() > 0) cfg.tau = tau;
  try {
    validate(cfg);
  } catch (const UsageError& e) {
    throw UsageError(std::string(e.what()) + "\n" + app.help());
  }
  return cfg;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + cfg.output_dir + ": " + ec.message());
    RunLog log(cfg.output_dir, err);
    log("run " + cfg.to_json().dump());
    if (cfg.command == "enumerate") return cmd_enumerate(cfg, out, log);
    if (cfg.command == "count" || cfg.command == "critical") return cmd_count(cfg, out, log);
    if (cfg.command == "equidist") return cmd_equidist(cfg, out, log);
    if (cfg.command == "volume") return cmd_volume(cfg, out);
    if (cfg.command == "flow") return cmd_flow(cfg, out);
    throw UsageError("unknown command " + cfg.command);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    bool help = false;
    std::string text;
    const RunConfig cfg = parse_config(argc, argv, &help, &text);
    if (help) {
      out << text;
      return kExitOk;
    }
    return run(cfg, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace flagcount
