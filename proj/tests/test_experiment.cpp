#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "tvreg/experiment.hpp"
#include "tvreg/io.hpp"
#include "tvreg/phantom.hpp"

using namespace tvreg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& tag) {
  static std::atomic<int> counter{0};
  const fs::path p = fs::temp_directory_path() /
                     ("tvreg_test_" + tag + "_" + std::to_string(::getpid()) +
                      "_" + std::to_string(counter++));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

const char* kBaseConfig =
    "grid = 16, 16\n"
    "extent = 1, 1\n"
    "phantom = sine:k=1\n"
    "operator = identity\n"
    "beta = 0.01\n"
    "deltas = 0.1, 0.05\n"
    "rule = rule3\n"
    "seed = 7\n";

}  // namespace

TEST_CASE("TVF1 round trip and layout") {
  const Grid g({3, 2}, {0.5, 0.25}, {1.0, -2.0});
  ScalarField f(g);
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = 0.1 * static_cast<double>(i) - 0.3;
  const std::vector<std::uint8_t> bytes = io::encode_field(f);
  CHECK(bytes.size() == 4 + 4 + 2 * 4 + 2 * 8 + 2 * 8 + 6 * 8);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "TVF1");
  CHECK(bytes[4] == 2);
  CHECK(bytes[8] == 3);
  const ScalarField back = io::decode_field(bytes);
  CHECK(back.grid() == g);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(back[i] == f[i]);
  CHECK(io::digest(back) == io::digest(f));

  std::vector<std::uint8_t> bad = bytes;
  bad[3] = '2';
  CHECK_THROWS_AS(io::decode_field(bad), Error);
  bad = bytes;
  bad.pop_back();
  CHECK_THROWS_AS(io::decode_field(bad), Error);
  bad = bytes;
  bad.push_back(0);
  CHECK_THROWS_AS(io::decode_field(bad), Error);

  const fs::path dir = scratch("tvf");
  io::write_field(dir / "f.tvf", f);
  CHECK(io::read_field(dir / "f.tvf").grid() == g);
  CHECK_THROWS_AS(io::read_field(dir / "missing.tvf"), Error);
  fs::remove_all(dir);
}

TEST_CASE("TVM1 round trip") {
  const io::DenseMatrix m{2, 3, {1, -2, 3.5, 0, 1e-300, -7}};
  const std::vector<std::uint8_t> bytes = io::encode_matrix(m);
  CHECK(bytes.size() == 12 + 6 * 8);
  const io::DenseMatrix back = io::decode_matrix(bytes);
  CHECK(back.rows == 2);
  CHECK(back.cols == 3);
  CHECK(back.entries == m.entries);
  std::vector<std::uint8_t> bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(io::decode_matrix(bad), Error);
  CHECK_THROWS_AS(io::decode_field(bytes), Error);
}

TEST_CASE("digest depends on grid and values") {
  const Grid g = Grid::box({4, 4}, {1, 1});
  const ScalarField a(g, 1.0);
  ScalarField b(g, 1.0);
  CHECK(io::digest(a) == io::digest(b));
  CHECK(io::digest(a).size() == 16);
  b[5] = std::nextafter(1.0, 2.0);
  CHECK(io::digest(a) != io::digest(b));
  CHECK(io::digest(a) != io::digest(ScalarField(Grid::box({4, 4}, {2, 1}), 1.0)));
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 1e300, 0.0}) {
    CHECK(std::stod(io::format_double(v)) == v);
  }
  CHECK(io::format_double(0.5) == "0.5");
}

TEST_CASE("csv escaping") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("config parsing") {
  const fs::path dir = scratch("cfg");
  const ExperimentConfig cfg = parse_config(
      std::string(kBaseConfig) + "# comment\ntau = 1.25 # trailing\nkappa = 3\n"
                                 "delta_scale = absolute\nmethod = gd\n",
      dir);
  CHECK(cfg.shape == std::vector<std::size_t>{16, 16});
  CHECK(cfg.deltas == std::vector<double>{0.1, 0.05});
  CHECK(cfg.rule == AlphaRule::rule3_delta);
  CHECK(cfg.seed == 7);
  CHECK(cfg.tau == 1.25);
  CHECK(cfg.kappa == 3.0);
  CHECK_FALSE(cfg.relative_deltas);
  CHECK(cfg.solve.method == Method::gradient_descent);

  CHECK_THROWS_WITH_AS(parse_config(std::string(kBaseConfig) + "colour = red\n", dir),
                       doctest::Contains("colour"), Error);
  CHECK_THROWS_WITH_AS(parse_config(std::string(kBaseConfig) + "beta = 0.1\n", dir),
                       doctest::Contains("duplicate"), Error);
  CHECK_THROWS_AS(parse_config(std::string(kBaseConfig) + "tau = 0.5\n", dir), Error);
  CHECK_THROWS_AS(parse_config(std::string(kBaseConfig) + "rule = lcurve\n", dir), Error);
  CHECK_THROWS_AS(parse_config("grid = 16, 16\nextent = 1, 1\n", dir), Error);
  CHECK_THROWS_AS(parse_config(std::string(kBaseConfig) + "no equals sign\n", dir), Error);

  std::string no_phantom = kBaseConfig;
  no_phantom.replace(no_phantom.find("phantom = sine:k=1"), 18, "truth_file = gone.tvf");
  CHECK_THROWS_WITH_AS(parse_config(no_phantom, dir),
                       doctest::Contains((dir / "gone.tvf").string().c_str()), Error);

  std::string matrix = kBaseConfig;
  matrix.replace(matrix.find("operator = identity"), 19, "operator = matrix:path=m.tvm");
  CHECK_THROWS_WITH_AS(parse_config(matrix, dir), doctest::Contains("m.tvm"), Error);
  io::write_matrix(dir / "m.tvm", {2, 2, {1, 0, 0, 1}});
  CHECK(resolve_operator_spec("matrix:path=m.tvm", dir) ==
        "matrix:path=" + (dir / "m.tvm").string());
  CHECK(resolve_operator_spec("identity", dir) == "identity");

  CHECK_THROWS_WITH_AS(load_config(dir / "nope.cfg"),
                       doctest::Contains("nope.cfg"), Error);
  fs::remove_all(dir);
}

TEST_CASE("phantoms") {
  const Grid cube = Grid::box({16, 16, 16}, {1, 1, 1});
  const Phantom r = make_phantom("ramp:a=2", cube);
  CHECK(r.analytic_kappa == 2.0);
  CHECK(std::abs(holder_coefficient(r.field, 1.0).value - 2.0) <= 1e-12);

  const Phantom z = make_phantom("gaussian_bumps:n=3,width=0.2,amplitude=0", cube);
  for (double v : z.field.values()) CHECK(v == 0.0);

  const Phantom a = make_phantom("bumps:n=4,width=0.15,seed=9", cube);
  const Phantom b = make_phantom("bumps:n=4,width=0.15,seed=9", cube);
  CHECK(io::encode_field(a.field) == io::encode_field(b.field));
  CHECK(io::digest(a.field) != io::digest(make_phantom("bumps:n=4,width=0.15,seed=10", cube).field));

  CHECK(make_phantom("product_sine:k=1", cube).spec == "product_sine:k=1");
  CHECK(io::digest(make_phantom("smoothed_step:width=0.2", cube).field) ==
        io::digest(make_phantom("step:width=0.2", cube).field));

  CHECK_THROWS_AS(make_phantom("ramp", cube), Error);
  CHECK_THROWS_AS(make_phantom("ramp:a=1,b=2", cube), Error);
  CHECK_THROWS_AS(make_phantom("step:width=-1", cube), Error);
  CHECK_THROWS_AS(make_phantom("ramp:a=1,axis=3", cube), Error);
  CHECK_THROWS_AS(make_phantom("spiral:r=1", cube), Error);
}

TEST_CASE("phantom fields have no jumps beyond their analytic slope") {
  for (const CorpusEntry& e : standard_corpus()) {
    const Phantom p = make_phantom(e.spec, e.grid);
    if (!p.analytic_kappa) continue;
    const VectorField g = gradient(p.field);
    double worst = 0.0;
    for (std::size_t a = 0; a < e.grid.dim(); ++a) {
      for (std::size_t i = 0; i < e.grid.size(); ++i) {
        const double jump = std::abs(g.component(a)[i]) * e.grid.spacing(a);
        worst = std::max(worst, jump / (e.grid.spacing(a) * *p.analytic_kappa));
      }
    }
    INFO(e.name);
    CHECK(worst <= 1.5);
    // The discrete Lipschitz coefficient never exceeds the continuum one.
    CHECK(holder_coefficient(p.field, 1.0).value <= *p.analytic_kappa * (1 + 1e-12));
  }
}

TEST_CASE("noise has the requested norm") {
  const Grid g = Grid::box({16, 16}, {1, 1});
  const ScalarField f = make_phantom("sine:k=1", g).field;
  const ScalarField clean = add_noise(f, 0.0, 3);
  CHECK(io::digest(clean) == io::digest(f));
  const ScalarField a = add_noise(f, 0.05, 1);
  const ScalarField b = add_noise(f, 0.05, 2);
  CHECK(std::abs(lp_norm(a - f, 2.0) - 0.05) <= 1e-12);
  CHECK(std::abs(lp_norm(b - f, 2.0) - 0.05) <= 1e-12);
  CHECK(io::digest(a) != io::digest(b));
  CHECK(io::digest(a) == io::digest(add_noise(f, 0.05, 1)));
  CHECK_THROWS_AS(add_noise(f, -0.1, 1), Error);
}

TEST_CASE("standard corpus verification") {
  const fs::path dir = scratch("corpus");
  write_standard_corpus(dir);
  const std::vector<CorpusField> corpus = load_corpus(dir);
  REQUIRE(corpus.size() == 12);
  CHECK(fs::exists(dir / "corpus.csv"));
  for (std::size_t i = 1; i < corpus.size(); ++i) CHECK(corpus[i - 1].name < corpus[i].name);

  const CorpusVerification v = verify_corpus(corpus, 0.01);
  CHECK(v.checks.size() == 12 * 6);
  for (const NamedCheck& c : v.checks) {
    INFO(c.report.name << " on " << c.instance << ": " << c.report.lhs << " vs " << c.report.rhs);
    CHECK(c.report.passed);
  }
  CHECK(v.all_passed);
  CHECK(v.morrey_max > 0.0);
  CHECK_FALSE(v.morrey_argmax.empty());

  const std::string csv = checks_csv(v.checks);
  CHECK(csv.rfind("check_name,instance,lhs,rhs,slack,passed\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 12 * 6 + 1);
  CHECK(csv.find("\r") == std::string::npos);
  CHECK_THROWS_AS(load_corpus(dir / "absent"), Error);
  fs::remove_all(dir);
}

TEST_CASE("solve report keeps a stable key order") {
  SolveResult r;
  r.alpha = 0.5;
  r.beta = 0.01;
  r.objective_trace = {2.0, 1.0};
  const auto j = nlohmann::ordered_json::parse(solve_report_json(r));
  std::vector<std::string> keys;
  for (const auto& [k, _] : j.items()) keys.push_back(k);
  keys.resize(9);
  CHECK(keys == std::vector<std::string>{"method", "alpha", "beta", "iterations",
                                         "objective_trace", "grad_norm", "discrepancy",
                                         "optimality_residual", "converged"});
  CHECK(j["objective_trace"].size() == 2);
}

TEST_CASE("end-to-end run is deterministic") {
  const fs::path dir = scratch("run");
  const ExperimentConfig cfg = parse_config(
      std::string(kBaseConfig) + "grad_tol = 1e-10\nslope_min = 0.5\nslope_max = 1.5\n", dir);
  const RunOutcome a = run_experiment(cfg, dir / "a");
  const RunOutcome b = run_experiment(cfg, dir / "b");
  for (const std::string& f : a.failures) MESSAGE(f);
  CHECK(a.exit_code == 0);
  CHECK(a.failures.empty());
  for (const char* name : {"sweep.csv", "verify.csv", "report.json", "solution_0.tvf",
                           "solution_1.tvf"}) {
    INFO(name);
    REQUIRE(fs::exists(dir / "a" / name));
    CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
  }
  const std::string sweep = slurp(dir / "a" / "sweep.csv");
  CHECK(sweep.rfind("delta,alpha,tau,discrepancy,tau_delta,margin,admissible,error,solution_digest\n", 0) == 0);
  CHECK(slurp(dir / "a" / "report.json").find(dir.string()) == std::string::npos);

  // An impossible slope window fails the run without an operational error.
  const ExperimentConfig strict = parse_config(
      std::string(kBaseConfig) + "slope_min = 5\n", dir);
  const RunOutcome s = run_experiment(strict, dir / "strict");
  CHECK(s.exit_code == 2);
  CHECK_FALSE(s.failures.empty());
  fs::remove_all(dir);
}
