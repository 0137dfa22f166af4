#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "geoflow/experiments.hpp"

using namespace geoflow;

namespace {

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

int line_count(const std::string& text) {
  int n = 0;
  for (const char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("experiment names") {
  CHECK(experiment_from_name("trotter") == ExperimentKind::trotter);
  CHECK(experiment_from_name("linearity") == ExperimentKind::linearity);
  CHECK_THROWS_AS(experiment_from_name("frobnicate"), ConfigError);
}

TEST_CASE("trotter experiment: header, rows and pass flag") {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::trotter;
  const ExperimentReport report = run_trotter(cfg);
  CHECK(report.pass);
  CHECK(first_line(report.csv) == "n,error,ratio_vs_prev");
  CHECK(line_count(report.csv) == 6);  // header + default n_list {4,8,16,32,64}

  // single n: one row with an empty trailing ratio cell
  cfg.n_list = {4};
  const ExperimentReport single = run_trotter(cfg);
  CHECK(line_count(single.csv) == 2);
  const std::string row = single.csv.substr(single.csv.find('\n') + 1);
  CHECK(row.back() == '\n');
  CHECK(row[row.size() - 2] == ',');

  // commuting fields: errors at rounding level
  ExperimentConfig commuting;
  commuting.experiment = ExperimentKind::trotter;
  commuting.manifold = "torus2";
  const ExperimentReport torus_report = run_trotter(commuting);
  CHECK(torus_report.pass);
  std::istringstream rows(torus_report.csv);
  std::string line;
  std::getline(rows, line);  // header
  while (std::getline(rows, line)) {
    const auto first_comma = line.find(',');
    const auto second_comma = line.find(',', first_comma + 1);
    const double err = std::stod(line.substr(first_comma + 1, second_comma - first_comma - 1));
    CHECK(err <= 1e-9);
  }
}

TEST_CASE("trotter experiment: config validation") {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::trotter;
  cfg.fields = {"rot:z"};
  CHECK_THROWS_AS(run_trotter(cfg), ConfigError);
  cfg.fields = {"rot:z", "rot:x"};
  cfg.n_list = {8, 4};
  CHECK_THROWS_AS(run_trotter(cfg), ConfigError);
  cfg.n_list = {4, 4};
  CHECK_THROWS_AS(run_trotter(cfg), ConfigError);
  cfg.n_list = {0, 4};
  CHECK_THROWS_AS(run_trotter(cfg), ConfigError);
}

TEST_CASE("holonomy experiment") {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::holonomy;
  const ExperimentReport sphere_report = run_holonomy(cfg);
  CHECK(sphere_report.pass);
  CHECK(first_line(sphere_report.csv) == "loop,angle,expected,abs_err");

  cfg.manifold = "torus2";
  CHECK(run_holonomy(cfg).pass);

  cfg.manifold = "sphere2";
  cfg.path = "equator-arc:1";  // open arc: not a loop
  CHECK_THROWS_AS(run_holonomy(cfg), ConfigError);
}

TEST_CASE("roundtrip experiment emits h and h/2 rows per case") {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::roundtrip;
  cfg.manifold = "torus2";
  const ExperimentReport report = run_roundtrip(cfg);
  CHECK(report.pass);
  CHECK(first_line(report.csv) == "case_id,h,residual");
  CHECK(line_count(report.csv) == 1 + 200);
  CHECK_THROWS_AS(
      [] {
        ExperimentConfig bad;
        bad.experiment = ExperimentKind::roundtrip;
        bad.h = 0.0;
        return run_roundtrip(bad);
      }(),
      ConfigError);
}

TEST_CASE("axioms experiment") {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::axioms;
  cfg.manifold = "torus2";
  const ExperimentReport report = run_axioms(cfg);
  CHECK(report.pass);
  CHECK(first_line(report.csv) == "axiom,case_id,residual");
  CHECK(line_count(report.csv) == 1 + 150);
}

TEST_CASE("linearity experiment") {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::linearity;
  const ExperimentReport report = run_linearity(cfg);
  CHECK(report.pass);
  CHECK(first_line(report.csv) == "law,case_id,n_or_f,residual");
  CHECK(line_count(report.csv) == 1 + 20 * 3 + 20 * 3);
}

namespace {

// residual = last comma-separated cell of each data row
std::vector<double> last_column(const std::string& csv) {
  std::vector<double> out;
  std::istringstream rows(csv);
  std::string line;
  std::getline(rows, line);  // header
  while (std::getline(rows, line)) out.push_back(std::stod(line.substr(line.rfind(',') + 1)));
  return out;
}

}  // namespace

TEST_CASE("roundtrip rows are at rounding level for the flat connection") {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::roundtrip;
  cfg.manifold = "torus2";
  cfg.connection = "zero";
  cfg.section = "const:e1";
  const ExperimentReport report = run_roundtrip(cfg);
  CHECK(report.pass);
  for (const double residual : last_column(report.csv)) CHECK(residual <= 1e-9);
}

TEST_CASE("linearity additivity rows vanish when the second field is zero") {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::linearity;
  cfg.manifold = "torus2";
  cfg.fields = {"const:1,0", "zero"};
  const ExperimentReport report = run_linearity(cfg);
  CHECK(report.pass);
  std::istringstream rows(report.csv);
  std::string line;
  std::getline(rows, line);
  while (std::getline(rows, line)) {
    if (line.rfind("additivity,", 0) != 0) continue;
    CHECK(std::stod(line.substr(line.rfind(',') + 1)) <= 1e-6);
  }
}

TEST_CASE("experiments are deterministic for a fixed config") {
  for (const ExperimentKind kind :
       {ExperimentKind::trotter, ExperimentKind::holonomy, ExperimentKind::roundtrip,
        ExperimentKind::axioms, ExperimentKind::linearity}) {
    ExperimentConfig cfg;
    cfg.experiment = kind;
    cfg.manifold = kind == ExperimentKind::linearity ? "torus2" : "sphere2";
    cfg.seed = 1234;
    const ExperimentReport a = run_experiment(cfg);
    const ExperimentReport b = run_experiment(cfg);
    CHECK(a.csv == b.csv);
    CHECK(a.pass == b.pass);
  }
}

TEST_CASE("different seeds change seeded experiments") {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::roundtrip;
  cfg.manifold = "torus2";
  ExperimentConfig other = cfg;
  other.seed = cfg.seed + 1;
  CHECK(run_experiment(cfg).csv != run_experiment(other).csv);
}

TEST_CASE("CSV floats are printed in shortest round-trip form") {
  Rng rng(31337);
  for (int i = 0; i < 2000; ++i) {
    double v = 0.0;
    switch (i % 4) {
      case 0:
        v = rng.uniform(-1.0, 1.0);
        break;
      case 1:
        v = rng.gaussian() * 1e-9;
        break;
      case 2:
        v = rng.gaussian() * 1e9;
        break;
      default:
        v = rng.uniform() * std::pow(10.0, rng.uniform(-300.0, 300.0));
        break;
    }
    const std::string text = detail::format_double(v);
    CHECK(std::stod(text) == v);
    // shortest form: strictly shorter than the maximal fixed digit count
    CHECK(text.size() <= 24);
  }
  CHECK_THROWS_AS(detail::format_double(std::nan("")), Error);
  CHECK_THROWS_AS(detail::format_double(std::numeric_limits<double>::infinity()), Error);
}
