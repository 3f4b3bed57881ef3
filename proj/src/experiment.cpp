#include "tvreg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tvreg/io.hpp"
#include "tvreg/phantom.hpp"
#include "tvreg/spec_string.hpp"

namespace tvreg {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error("config: " + key + " must be true or false, got '" + v + "'");
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  return p.is_absolute() ? p : base / p;
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) {
    throw Error("config: " + what + " not found: " + p.string());
  }
}

std::string fmt(double v) { return io::format_double(v); }

std::string fmt(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string resolve_operator_spec(const std::string& spec,
                                  const fs::path& base_dir) {
  SpecString s = SpecString::parse(spec);
  if (s.name != "matrix" || !s.has("path")) return spec;
  const fs::path p = resolve(s.text("path"), base_dir);
  require_file(p, "operator matrix file");
  std::string out = "matrix:path=" + p.string();
  for (const auto& [k, v] : s.params) {
    if (k != "path") out += "," + k + "=" + v;
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text,
                              const fs::path& base_dir) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("config line " + std::to_string(lineno) +
                  ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw Error("config line " + std::to_string(lineno) + ": empty key");
    }
    if (!kv.emplace(key, value).second) {
      throw Error("config: duplicate key '" + key + "'");
    }
  }

  static const std::set<std::string> known = {
      "grid",       "extent",    "phantom",     "truth_file", "operator",
      "beta",       "deltas",    "delta_scale", "rule",       "seed",
      "method",     "grad_tol",  "max_outer",   "cg_tol",     "cg_max",
      "tau",        "kappa",     "slope_min",   "slope_max",  "require_monotone",
      "verify",     "out_dir"};
  for (const auto& [k, v] : kv) {
    if (!known.count(k)) throw Error("config: unknown key '" + k + "'");
  }
  auto get = [&](const std::string& k) -> const std::string* {
    const auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };

  ExperimentConfig cfg;
  if (const auto* v = get("truth_file")) {
    if (get("phantom")) {
      throw Error("config: give either phantom or truth_file, not both");
    }
    cfg.truth_file = resolve(*v, base_dir);
    require_file(cfg.truth_file, "truth_file");
  } else if (const auto* v = get("phantom")) {
    cfg.phantom = *v;
    const auto* g = get("grid");
    if (!g) throw Error("config: phantom needs a grid");
    for (double n : parse_double_list(*g, "grid")) {
      if (n < 2 || n != std::floor(n)) {
        throw Error("config: grid entries must be integers >= 2");
      }
      cfg.shape.push_back(static_cast<std::size_t>(n));
    }
    if (const auto* e = get("extent")) {
      cfg.extent = parse_double_list(*e, "extent");
    } else {
      cfg.extent.assign(cfg.shape.size(), 1.0);
    }
    if (cfg.extent.size() != cfg.shape.size()) {
      throw Error("config: grid and extent have different lengths");
    }
  } else {
    throw Error("config: phantom or truth_file is required");
  }

  if (const auto* v = get("operator")) {
    cfg.op = resolve_operator_spec(*v, base_dir);
  }
  if (const auto* v = get("beta")) cfg.beta = parse_double(*v, "beta");
  if (!(cfg.beta > 0.0)) throw Error("config: beta must be > 0");
  const auto* d = get("deltas");
  if (!d) throw Error("config: deltas is required");
  cfg.deltas = parse_double_list(*d, "deltas");
  if (const auto* v = get("delta_scale")) {
    if (*v == "relative") {
      cfg.relative_deltas = true;
    } else if (*v == "absolute") {
      cfg.relative_deltas = false;
    } else {
      throw Error("config: delta_scale must be relative or absolute");
    }
  }
  if (const auto* v = get("rule")) cfg.rule = parse_rule(*v);
  if (const auto* v = get("seed")) {
    const long long s = parse_int(*v, "seed");
    if (s < 0) throw Error("config: seed must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (const auto* v = get("method")) cfg.solve.method = parse_method(*v);
  if (const auto* v = get("grad_tol")) {
    cfg.solve.grad_tol = parse_double(*v, "grad_tol");
  }
  if (const auto* v = get("max_outer")) {
    cfg.solve.max_outer = static_cast<std::size_t>(parse_int(*v, "max_outer"));
  }
  if (const auto* v = get("cg_tol")) cfg.solve.cg_tol = parse_double(*v, "cg_tol");
  if (const auto* v = get("cg_max")) {
    cfg.solve.cg_max = static_cast<std::size_t>(parse_int(*v, "cg_max"));
  }
  if (const auto* v = get("tau")) {
    const double t = parse_double(*v, "tau");
    if (!(t >= 1.0)) {
      throw Error("config: tau must be >= 1 for the discrepancy principle, "
                  "got " + fmt(t));
    }
    cfg.tau = t;
  }
  if (const auto* v = get("kappa")) {
    if (*v != "auto") {
      const double k = parse_double(*v, "kappa");
      if (!(k > 0.0)) throw Error("config: kappa must be > 0");
      cfg.kappa = k;
    }
  }
  if (const auto* v = get("slope_min")) cfg.slope_min = parse_double(*v, "slope_min");
  if (const auto* v = get("slope_max")) cfg.slope_max = parse_double(*v, "slope_max");
  if (const auto* v = get("require_monotone")) {
    cfg.require_monotone = parse_bool(*v, "require_monotone");
  }
  if (const auto* v = get("verify")) cfg.verify = parse_bool(*v, "verify");
  if (const auto* v = get("out_dir")) cfg.out_dir = *v;
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) {
    throw Error("config file not found: " + path.string());
  }
  const std::vector<std::uint8_t> bytes = io::read_bytes(path);
  try {
    return parse_config(std::string(bytes.begin(), bytes.end()),
                        path.parent_path());
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

CorpusVerification verify_corpus(const std::vector<CorpusField>& corpus,
                                 double beta) {
  CorpusVerification out;
  bool have_morrey = false;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const ScalarField& u = corpus[i].field;
    const std::size_t dim = u.grid().dim();
    std::size_t j = i;
    for (std::size_t s = 1; s < corpus.size(); ++s) {
      const std::size_t c = (i + s) % corpus.size();
      if (corpus[c].field.grid() == u.grid()) {
        j = c;
        break;
      }
    }
    const ScalarField& v = corpus[j].field;
    const std::string& name = corpus[i].name;
    const std::string pair = name + "|" + corpus[j].name;
    const double L = lipschitz_L(u.grid()).value;
    const double gamma = dim == 3 ? 0.25 : 0.5;

    std::vector<NamedCheck> local;
    if (dim == 2 || dim == 3) {
      local.push_back({name, check_holder_vs_tv(u)});
    }
    local.push_back({name, check_grad_l1(u)});
    local.push_back({name, check_grad_l2_sq(u)});
    local.push_back({name, check_l1_embedding(u, gamma)});
    local.push_back({pair, check_successive_tv(u, v, beta)});
    local.push_back({pair, check_lipschitz_successive_tv(u, v, beta, L)});
    for (auto& c : local) {
      out.all_passed = out.all_passed && c.report.passed;
      out.checks.push_back(std::move(c));
    }
    if (const auto r = morrey_ratio(u)) {
      if (!have_morrey || *r > out.morrey_max) {
        out.morrey_max = *r;
        out.morrey_argmax = name;
        have_morrey = true;
      }
    }
  }
  return out;
}

std::vector<CorpusField> load_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error("corpus directory not found: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".tvf") {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw Error("corpus directory holds no .tvf files: " + dir.string());
  }
  std::vector<CorpusField> out;
  for (const auto& f : files) {
    out.push_back({f.stem().string(), io::read_field(f)});
  }
  return out;
}

void write_standard_corpus(const fs::path& dir) {
  fs::create_directories(dir);
  std::string manifest = "name,spec,grid\n";
  for (const CorpusEntry& e : standard_corpus()) {
    io::write_field(dir / (e.name + ".tvf"), make_phantom(e.spec, e.grid).field);
    manifest += csv_escape(e.name) + "," + csv_escape(e.spec) + "," +
                csv_escape(e.grid.describe()) + "\n";
  }
  io::write_text(dir / "corpus.csv", manifest);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string checks_csv(const std::vector<NamedCheck>& checks) {
  std::string out = "check_name,instance,lhs,rhs,slack,passed\n";
  for (const NamedCheck& c : checks) {
    out += csv_escape(c.report.name) + "," + csv_escape(c.instance) + "," +
           fmt(c.report.lhs) + "," + fmt(c.report.rhs) + "," +
           fmt(c.report.slack) + "," + fmt(c.report.passed) + "\n";
  }
  return out;
}

std::string sweep_csv(const SweepResult& s) {
  std::string out =
      "delta,alpha,tau,discrepancy,tau_delta,margin,admissible,error,"
      "solution_digest\n";
  for (std::size_t i = 0; i < s.deltas.size(); ++i) {
    const double bound = s.taus[i] * s.deltas[i];
    out += fmt(s.deltas[i]) + "," + fmt(s.alphas[i]) + "," + fmt(s.taus[i]) +
           "," + fmt(s.discrepancies[i]) + "," + fmt(bound) + "," +
           fmt(bound - s.discrepancies[i]) + "," + fmt(bool(s.admissible[i])) +
           "," + fmt(s.errors[i]) + "," + s.solution_digests[i] + "\n";
  }
  return out;
}

std::string solve_report_json(const SolveResult& r) {
  json j;
  j["method"] = to_string(r.method);
  j["alpha"] = r.alpha;
  j["beta"] = r.beta;
  j["iterations"] = r.outer_iterations;
  j["objective_trace"] = r.objective_trace;
  j["grad_norm"] = r.grad_norm;
  j["discrepancy"] = r.discrepancy;
  j["optimality_residual"] = r.optimality_residual;
  j["converged"] = r.converged;
  j["ill_posed"] = r.ill_posed;
  j["message"] = r.message;
  j["inner_iterations"] = r.inner_iterations;
  j["armijo_c1"] = r.armijo_c1;
  j["cg_tol"] = r.cg_tol;
  j["solution_digest"] = io::digest(r.phi_alpha);
  return j.dump(2) + "\n";
}

RunOutcome run_experiment(const ExperimentConfig& cfg,
                          const fs::path& out_dir) {
  ScalarField truth;
  if (!cfg.truth_file.empty()) {
    truth = io::read_field(cfg.truth_file);
  } else {
    truth = make_phantom(cfg.phantom, Grid::box(cfg.shape, cfg.extent)).field;
  }
  const Grid& grid = truth.grid();

  SweepExperiment ex{parse_operator(cfg.op, grid), truth, {}, cfg.rule,
                     cfg.beta, cfg.seed, cfg.solve, {}, cfg.tau};
  ex.fixed_point.kappa_override = cfg.kappa;
  const double scale =
      cfg.relative_deltas ? lp_norm(ex.T.apply(truth), 2.0) : 1.0;
  for (double d : cfg.deltas) ex.deltas.push_back(d * scale);

  RunOutcome out;
  out.sweep = delta_sweep(ex);
  const SweepResult& s = out.sweep;

  if (s.aborted) out.failures.push_back(s.message);
  for (std::size_t i = 0; i < s.deltas.size(); ++i) {
    if (!s.admissible[i]) {
      out.failures.push_back("discrepancy exceeds tau*delta at delta=" +
                             fmt(s.deltas[i]));
    }
  }
  if (cfg.slope_min && !(s.fitted_slope >= *cfg.slope_min)) {
    out.failures.push_back("fitted slope " + fmt(s.fitted_slope) +
                           " below slope_min");
  }
  if (cfg.slope_max && !(s.fitted_slope <= *cfg.slope_max)) {
    out.failures.push_back("fitted slope " + fmt(s.fitted_slope) +
                           " above slope_max");
  }
  if (cfg.require_monotone && !s.errors_monotone) {
    out.failures.push_back("error is not monotone in delta");
  }

  if (cfg.verify) {
    std::vector<NamedCheck> checks;
    if (grid.dim() == 2 || grid.dim() == 3) {
      checks.push_back({"truth", check_holder_vs_tv(truth)});
    }
    checks.push_back({"truth", check_grad_l1(truth)});
    checks.push_back({"truth", check_grad_l2_sq(truth)});
    checks.push_back(
        {"truth", check_l1_embedding(truth, grid.dim() == 3 ? 0.25 : 0.5)});
    const double L = lipschitz_L(grid).value;
    for (std::size_t i = 0; i + 1 < s.solutions.size(); ++i) {
      const std::string inst =
          "solution_" + std::to_string(i + 1) + "|solution_" + std::to_string(i);
      checks.push_back(
          {inst, check_successive_tv(s.solutions[i + 1], s.solutions[i], cfg.beta)});
      checks.push_back({inst, check_lipschitz_successive_tv(
                                  s.solutions[i + 1], s.solutions[i], cfg.beta, L)});
    }
    for (const NamedCheck& c : checks) {
      if (!c.report.passed) {
        out.failures.push_back("check " + c.report.name + " failed on " +
                               c.instance);
      }
    }
    out.checks = std::move(checks);
  }

  fs::create_directories(out_dir);
  io::write_text(out_dir / "sweep.csv", sweep_csv(s));
  io::write_text(out_dir / "verify.csv", checks_csv(out.checks));
  for (std::size_t i = 0; i < s.solutions.size(); ++i) {
    io::write_field(out_dir / ("solution_" + std::to_string(i) + ".tvf"),
                    s.solutions[i]);
  }

  json j;
  json c;
  if (cfg.truth_file.empty()) {
    c["phantom"] = cfg.phantom;
  } else {
    c["truth_file"] = cfg.truth_file.filename().string();
  }
  c["grid"] = grid.describe();
  c["operator"] = ex.T.describe();
  c["beta"] = cfg.beta;
  c["deltas"] = ex.deltas;
  c["rule"] = to_string(cfg.rule);
  c["method"] = to_string(cfg.solve.method);
  c["grad_tol"] = cfg.solve.grad_tol;
  c["seed"] = cfg.seed;
  c["kappa"] = cfg.kappa ? json(*cfg.kappa) : json("auto");
  j["config"] = c;
  j["truth_digest"] = io::digest(truth);
  j["operator_adjoint_norm"] = s.T_adjoint_norm;
  j["predicted_constant"] = s.predicted_constant;
  json sw;
  sw["fitted_slope"] = s.fitted_slope;
  sw["errors_monotone"] = s.errors_monotone;
  sw["aborted"] = s.aborted;
  sw["message"] = s.message;
  json entries = json::array();
  for (std::size_t i = 0; i < s.deltas.size(); ++i) {
    json e;
    e["delta"] = s.deltas[i];
    e["alpha"] = s.alphas[i];
    e["tau"] = s.taus[i];
    e["discrepancy"] = s.discrepancies[i];
    e["admissible"] = bool(s.admissible[i]);
    e["error"] = s.errors[i];
    e["solution_digest"] = s.solution_digests[i];
    entries.push_back(e);
  }
  sw["entries"] = entries;
  j["sweep"] = sw;
  std::size_t failed_checks = 0;
  for (const NamedCheck& ch : out.checks) failed_checks += !ch.report.passed;
  j["verify"] = {{"checks", out.checks.size()}, {"failed", failed_checks}};
  j["failures"] = out.failures;
  j["passed"] = out.failures.empty();
  io::write_text(out_dir / "report.json", j.dump(2) + "\n");

  out.exit_code = out.failures.empty() ? 0 : 2;
  return out;
}

}  // namespace tvreg
