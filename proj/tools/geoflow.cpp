// geoflow: experiment runner for flows, parallel transport and the
// connection/transport correspondence. Emits one CSV table per run; exit code
// 0 means every residual stayed inside its baked-in threshold, 1 flags a
// threshold failure, 2 a configuration problem.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "geoflow/geoflow.hpp"

namespace {

struct RawOptions {
  std::string config_file;
  std::string manifold;
  std::vector<std::string> fields;
  std::string connection;
  std::string section;
  std::string path;
  std::optional<double> t;
  std::optional<double> h;
  std::string n_list;
  std::optional<int> steps_per_unit;
  std::optional<std::uint64_t> seed;
  std::string out;
};

std::vector<int> parse_n_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw geoflow::ConfigError("");
      out.push_back(v);
    } catch (const std::exception&) {
      throw geoflow::ConfigError("could not parse n_list entry '" + item + "'");
    }
  }
  if (out.empty()) throw geoflow::ConfigError("n_list must not be empty");
  return out;
}

/// Flat key=value config file; '#' starts a comment. Flags that were given on
/// the command line take precedence over file entries.
void apply_config_file(const std::string& file, RawOptions& opt, const RawOptions& provided) {
  std::ifstream in(file);
  if (!in) throw geoflow::ConfigError("could not open config file '" + file + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw geoflow::ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto parse_double = [&](const std::string& v) {
      return geoflow::detail::parse_real(v, "config key " + key);
    };
    if (key == "manifold") {
      if (provided.manifold.empty()) opt.manifold = value;
    } else if (key == "field") {
      if (provided.fields.empty()) opt.fields.push_back(value);
    } else if (key == "connection") {
      if (provided.connection.empty()) opt.connection = value;
    } else if (key == "section") {
      if (provided.section.empty()) opt.section = value;
    } else if (key == "path") {
      if (provided.path.empty()) opt.path = value;
    } else if (key == "t") {
      if (!provided.t) opt.t = parse_double(value);
    } else if (key == "h") {
      if (!provided.h) opt.h = parse_double(value);
    } else if (key == "n_list") {
      if (provided.n_list.empty()) opt.n_list = value;
    } else if (key == "steps_per_unit") {
      if (!provided.steps_per_unit)
        opt.steps_per_unit = static_cast<int>(geoflow::detail::parse_u64(value, "config"));
    } else if (key == "seed") {
      if (!provided.seed) opt.seed = geoflow::detail::parse_u64(value, "config");
    } else if (key == "out") {
      if (provided.out.empty()) opt.out = value;
    } else {
      throw geoflow::ConfigError("config line " + std::to_string(lineno) + ": unknown key '" +
                                 key + "'");
    }
  }
}

geoflow::ExperimentConfig build_config(geoflow::ExperimentKind kind, RawOptions opt) {
  if (!opt.config_file.empty()) apply_config_file(opt.config_file, opt, opt);
  geoflow::ExperimentConfig cfg;
  cfg.experiment = kind;
  cfg.manifold = opt.manifold;
  cfg.fields = opt.fields;
  cfg.connection = opt.connection;
  cfg.section = opt.section;
  cfg.path = opt.path;
  if (opt.t) cfg.t = *opt.t;
  if (opt.h) cfg.h = *opt.h;
  if (!opt.n_list.empty()) cfg.n_list = parse_n_list(opt.n_list);
  if (opt.steps_per_unit) {
    if (*opt.steps_per_unit < 1) throw geoflow::ConfigError("steps_per_unit must be >= 1");
    cfg.steps_per_unit = *opt.steps_per_unit;
  }
  if (opt.seed) cfg.seed = *opt.seed;
  cfg.out = opt.out;
  return cfg;
}

int run(geoflow::ExperimentKind kind, const RawOptions& raw_cli) {
  // two-pass: the same struct holds what the CLI provided so config-file
  // values only fill the gaps
  RawOptions merged = raw_cli;
  const geoflow::ExperimentConfig cfg = build_config(kind, merged);
  const geoflow::ExperimentReport report = geoflow::run_experiment(cfg);
  if (cfg.out.empty()) {
    std::cout << report.csv;
  } else {
    std::ofstream out(cfg.out, std::ios::binary);
    if (!out) throw geoflow::ConfigError("could not open output file '" + cfg.out + "'");
    out << report.csv;
  }
  if (!report.pass) {
    std::cerr << "FAIL " << report.summary << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geoflow: flows, parallel transport and connection experiments"};
  app.require_subcommand(1);
  // --h is taken by the step-size option, so help stays long-form only
  app.set_help_flag("--help", "print help");

  RawOptions opt;
  geoflow::ExperimentKind kind = geoflow::ExperimentKind::trotter;

  const std::vector<std::pair<std::string, std::string>> experiments = {
      {"trotter", "zig-zag flow composition against the flow of X+Y"},
      {"holonomy", "loop transport against analytic holonomy values"},
      {"roundtrip", "connection -> transport -> connection residuals"},
      {"axioms", "the three parallel-transport axioms on seeded paths"},
      {"linearity", "additivity and f-linearity of the transport lift"},
  };
  for (const auto& [name, description] : experiments) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->set_help_flag("--help", "print help");
    sub->add_option("--config", opt.config_file, "flat key=value config file");
    sub->add_option("--manifold", opt.manifold, "manifold name (torus2, sphere2)");
    sub->add_option("--field", opt.fields, "vector field name (repeatable)");
    sub->add_option("--connection", opt.connection, "connection name");
    sub->add_option("--section", opt.section, "section name");
    sub->add_option("--path", opt.path, "path name");
    sub->add_option("--t", opt.t, "flow time");
    sub->add_option("--h", opt.h, "finite-difference step");
    sub->add_option("--n-list", opt.n_list, "comma-separated factor counts");
    sub->add_option("--steps-per-unit", opt.steps_per_unit, "integrator steps per unit time");
    sub->add_option("--seed", opt.seed, "seed for the case generator");
    sub->add_option("--out", opt.out, "output CSV path (default: stdout)");
    const std::string sub_name = name;
    sub->callback([&kind, sub_name] { kind = geoflow::experiment_from_name(sub_name); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return run(kind, opt);
  } catch (const geoflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const geoflow::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
