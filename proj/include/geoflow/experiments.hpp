#pragma once

#include <charconv>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "geoflow/registry.hpp"

namespace geoflow {

enum class ExperimentKind { trotter, holonomy, roundtrip, axioms, linearity };

inline ExperimentKind experiment_from_name(const std::string& name) {
  if (name == "trotter") return ExperimentKind::trotter;
  if (name == "holonomy") return ExperimentKind::holonomy;
  if (name == "roundtrip") return ExperimentKind::roundtrip;
  if (name == "axioms") return ExperimentKind::axioms;
  if (name == "linearity") return ExperimentKind::linearity;
  throw ConfigError("unknown experiment '" + name + "'");
}

/// Everything a run needs; unset strings/lists fall back to per-experiment
/// defaults documented in the README.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::trotter;
  std::string manifold;
  std::vector<std::string> fields;
  std::string connection;
  std::string section;
  std::string path;
  double t = 1.0;
  double h = 1e-3;
  std::vector<int> n_list;
  int steps_per_unit = 1000;
  std::uint64_t seed = 42;
  std::string out;
};

struct ExperimentReport {
  std::string csv;
  bool pass = true;
  std::string summary;
};

namespace detail {

/// Shortest decimal form that round-trips to the same double.
inline std::string format_double(double v) {
  if (!std::isfinite(v)) throw Error("experiment produced a non-finite cell");
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

class CsvWriter {
 public:
  explicit CsvWriter(std::string header) { os_ << header << "\n"; }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) os_ << ",";
      os_ << quoted(cells[i]);
    }
    os_ << "\n";
  }

  std::string str() const { return os_.str(); }

 private:
  // registry names may contain commas (rect:L,H); quote per RFC 4180
  static std::string quoted(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (const char c : cell) {
      if (c == '"') out += '"';
      out += c;
    }
    out += '"';
    return out;
  }

  std::ostringstream os_;
};

struct PassTracker {
  bool pass = true;
  std::string first_failure;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      first_failure = what;
    }
  }
};

inline std::vector<int> default_n_list(ExperimentKind kind) {
  if (kind == ExperimentKind::linearity) return {8, 16, 32};
  return {4, 8, 16, 32, 64};
}

inline void check_n_list(const std::vector<int>& ns) {
  if (ns.empty()) throw ConfigError("n_list must not be empty");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 1) throw ConfigError("n_list entries must be >= 1");
    if (i > 0 && ns[i] <= ns[i - 1]) throw ConfigError("n_list must be strictly increasing");
  }
}

inline std::string default_manifold(ExperimentKind kind) {
  return kind == ExperimentKind::linearity ? "torus2" : "sphere2";
}

inline std::string default_connection(const Manifold& m) {
  return m.name == "sphere2" ? "levi-civita" : "rotJ:0.3";
}

inline std::vector<std::string> default_field_pair(const Manifold& m) {
  if (m.name == "sphere2") return {"rot:z", "rot:x"};
  return {"const:1,0", "const:0,1"};
}

inline ManifoldPoint default_start(const Manifold& m) {
  Vec x = Vec::Zero(m.ambient_dim);
  if (m.name == "sphere2") x(1) = 1.0;
  return make_point(m, x);
}

/// Below this, two error columns are considered indistinct from rounding noise
/// and monotonicity/ratio checks are skipped.
inline constexpr double kNoiseFloor = 1e-9;

/// Additivity residual sequences converge to a positive O(h^2) estimator
/// floor and may approach it from below, so "nonincreasing in n" only binds
/// above the floor zone: increases are tolerated within a 5% band or while
/// the whole sequence sits under ~1 * h^2 (a structural failure lands orders
/// of magnitude higher).
inline bool monotone_within_floor(double next, double prev, double h) {
  return next <= prev * 1.05 + 1e-8 || next <= h * h;
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline ExperimentReport run_trotter(const ExperimentConfig& cfg) {
  const Manifold m = manifold_from_name(cfg.manifold.empty() ? detail::default_manifold(cfg.experiment)
                                                             : cfg.manifold);
  std::vector<std::string> field_names =
      cfg.fields.empty() ? detail::default_field_pair(m) : cfg.fields;
  if (field_names.size() != 2)
    throw ConfigError("trotter needs exactly two --field names");
  const VectorField X = vector_field_from_name(m, field_names[0]);
  const VectorField Y = vector_field_from_name(m, field_names[1]);
  std::vector<int> ns = cfg.n_list.empty() ? detail::default_n_list(cfg.experiment) : cfg.n_list;
  detail::check_n_list(ns);
  const FlowParams params{cfg.steps_per_unit};
  const ManifoldPoint x = detail::default_start(m);
  const ManifoldPoint reference = flow(add_fields(X, Y), cfg.t, x, params);

  detail::CsvWriter csv("n,error,ratio_vs_prev");
  detail::PassTracker check;
  double prev_error = 0.0;
  int prev_n = 0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const int n = ns[i];
    const double error =
        distance(m, trotter_flow(X, Y, cfg.t, x, n, params), reference);
    std::string ratio_cell;
    if (i > 0) {
      const bool above_noise =
          error > detail::kNoiseFloor || prev_error > detail::kNoiseFloor;
      if (error > 0.0) ratio_cell = detail::format_double(prev_error / error);
      if (above_noise) {
        check.require(error <= prev_error, "error increased at n=" + std::to_string(n));
        if (n == 2 * prev_n && prev_n >= 8 && error > 0.0) {
          const double ratio = prev_error / error;
          check.require(ratio >= 1.5 && ratio <= 2.5,
                        "ratio out of [1.5, 2.5] at n=" + std::to_string(n));
        }
      }
    }
    csv.row({std::to_string(n), detail::format_double(error), ratio_cell});
    prev_error = error;
    prev_n = n;
  }
  return ExperimentReport{csv.str(), check.pass,
                          check.pass ? "trotter: ok" : "trotter: " + check.first_failure};
}

// ---------------------------------------------------------------------------

namespace detail {

struct HolonomyOracle {
  double expected_angle = 0.0;
  double tolerance = 0.0;
  bool identity_check = false;  // measure ||M - I|| instead of the angle gap
};

inline HolonomyOracle holonomy_oracle(const std::string& path_name) {
  const auto parsed = parse_name(path_name);
  if (parsed.head == "octant") return {kPi / 2.0, 1e-4, false};
  if (parsed.head == "rect") return {0.0, 1e-8, true};
  if (parsed.head == "const") return {0.0, 1e-12, true};
  if (parsed.head == "equator-arc") return {0.0, 1e-6, true};
  throw ConfigError("no holonomy oracle for path '" + path_name +
                    "' (supported: octant, rect:L,H, const, equator-arc:2pi)");
}

}  // namespace detail

inline ExperimentReport run_holonomy(const ExperimentConfig& cfg) {
  const Manifold m = manifold_from_name(cfg.manifold.empty() ? detail::default_manifold(cfg.experiment)
                                                             : cfg.manifold);
  const std::string connection_name =
      cfg.connection.empty() ? detail::default_connection(m) : cfg.connection;
  const Connection C = connection_from_name(bundle_for_connection(connection_name, m),
                                            connection_name);
  std::vector<std::string> loops;
  if (!cfg.path.empty()) {
    loops = {cfg.path};
  } else if (m.name == "sphere2") {
    loops = {"octant", "const"};
  } else {
    loops = {"rect:1,0.7", "const"};
  }
  const FlowParams params{cfg.steps_per_unit};

  detail::CsvWriter csv("loop,angle,expected,abs_err");
  detail::PassTracker check;
  for (const auto& loop_name : loops) {
    const PathCurve loop = path_from_name(m, loop_name);
    const auto oracle = detail::holonomy_oracle(loop_name);
    TransportMap H;
    try {
      H = holonomy(C, loop, params);
    } catch (const NotALoopError& e) {
      throw ConfigError(std::string("holonomy: ") + e.what());
    }
    const double angle = rotation_angle(H);
    const double err =
        oracle.identity_check
            ? operator_norm(H.matrix - Mat::Identity(H.matrix.rows(), H.matrix.cols()))
            : std::abs(rotation_angle_from_trace(H) - oracle.expected_angle);
    check.require(err <= oracle.tolerance, "holonomy residual too large for " + loop_name);
    csv.row({loop_name, detail::format_double(angle), detail::format_double(oracle.expected_angle),
             detail::format_double(err)});
  }
  return ExperimentReport{csv.str(), check.pass,
                          check.pass ? "holonomy: ok" : "holonomy: " + check.first_failure};
}

// ---------------------------------------------------------------------------

namespace detail {

struct SeededCase {
  ManifoldPoint x;
  VectorField field;
  Section section;
};

inline SeededCase make_seeded_case(const Manifold& m, const VectorBundle& bundle,
                                   const std::string& section_name, std::uint64_t batch_seed,
                                   std::uint64_t index) {
  Rng rng(case_seed(batch_seed, index));
  const ManifoldPoint x = random_point(m, rng.next_u64());
  VectorField X = seeded_vector_field(m, rng.next_u64());
  Section s = section_name.empty() ? seeded_section(bundle, rng.next_u64())
                                   : section_from_name(bundle, section_name);
  return SeededCase{x, std::move(X), std::move(s)};
}

}  // namespace detail

inline ExperimentReport run_roundtrip(const ExperimentConfig& cfg) {
  const Manifold m = manifold_from_name(cfg.manifold.empty() ? detail::default_manifold(cfg.experiment)
                                                             : cfg.manifold);
  const std::string connection_name =
      cfg.connection.empty() ? detail::default_connection(m) : cfg.connection;
  const VectorBundle bundle = bundle_for_connection(connection_name, m);
  const Connection C = connection_from_name(bundle, connection_name);
  if (!(cfg.h > 0.0)) throw ConfigError("roundtrip needs h > 0");
  const FlowParams params{cfg.steps_per_unit};
  constexpr int kCases = 100;

  detail::CsvWriter csv("case_id,h,residual");
  detail::PassTracker check;
  for (int i = 0; i < kCases; ++i) {
    const auto c = detail::make_seeded_case(m, bundle, cfg.section, cfg.seed,
                                            static_cast<std::uint64_t>(i));
    const double coarse = roundtrip_residual(C, c.field, c.section, c.x, cfg.h, params);
    const double fine = roundtrip_residual(C, c.field, c.section, c.x, cfg.h / 2.0, params);
    check.require(coarse <= 1e-5, "residual above 1e-5 in case " + std::to_string(i));
    check.require(fine <= 1e-5, "residual above 1e-5 in case " + std::to_string(i));
    if (coarse >= 1e-8)
      check.require(fine <= 0.6 * coarse,
                    "h-halving contraction failed in case " + std::to_string(i));
    csv.row({std::to_string(i), detail::format_double(cfg.h), detail::format_double(coarse)});
    csv.row({std::to_string(i), detail::format_double(cfg.h / 2.0), detail::format_double(fine)});
  }
  return ExperimentReport{csv.str(), check.pass,
                          check.pass ? "roundtrip: ok" : "roundtrip: " + check.first_failure};
}

// ---------------------------------------------------------------------------

inline ExperimentReport run_axioms(const ExperimentConfig& cfg) {
  const Manifold m = manifold_from_name(cfg.manifold.empty() ? detail::default_manifold(cfg.experiment)
                                                             : cfg.manifold);
  const std::string connection_name =
      cfg.connection.empty() ? detail::default_connection(m) : cfg.connection;
  const Connection C = connection_from_name(bundle_for_connection(connection_name, m),
                                            connection_name);
  const FlowParams params{cfg.steps_per_unit};
  constexpr int kCases = 50;

  detail::CsvWriter csv("axiom,case_id,residual");
  detail::PassTracker check;
  for (int i = 0; i < kCases; ++i) {
    Rng rng(case_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    const ManifoldPoint x = random_point(m, rng.next_u64());
    const PathCurve path = seeded_path(m, rng.next_u64());
    const Reparametrization phi = reparam_from_name(path, i % 2 == 0 ? "affine" : "sine");
    const double t_split =
        path.t_begin() + (path.t_end() - path.t_begin()) * rng.uniform(0.2, 0.8);

    const double constant = check_constant_axiom(C, x, params);
    const double reparam = check_reparam_axiom(C, path, phi, params);
    const double juxt = check_juxtaposition_axiom(C, path, t_split, params);

    check.require(constant <= 1e-12, "constant-path residual in case " + std::to_string(i));
    check.require(reparam <= 1e-6, "reparametrization residual in case " + std::to_string(i));
    check.require(juxt <= 1e-6, "juxtaposition residual in case " + std::to_string(i));

    csv.row({"constant", std::to_string(i), detail::format_double(constant)});
    csv.row({"reparam", std::to_string(i), detail::format_double(reparam)});
    csv.row({"juxtaposition", std::to_string(i), detail::format_double(juxt)});
  }
  return ExperimentReport{csv.str(), check.pass,
                          check.pass ? "axioms: ok" : "axioms: " + check.first_failure};
}

// ---------------------------------------------------------------------------

inline ExperimentReport run_linearity(const ExperimentConfig& cfg) {
  const Manifold m = manifold_from_name(cfg.manifold.empty() ? detail::default_manifold(cfg.experiment)
                                                             : cfg.manifold);
  const std::string connection_name =
      cfg.connection.empty() ? detail::default_connection(m) : cfg.connection;
  const VectorBundle bundle = bundle_for_connection(connection_name, m);
  const Connection C = connection_from_name(bundle, connection_name);
  std::vector<std::string> field_names =
      cfg.fields.empty() ? detail::default_field_pair(m) : cfg.fields;
  if (field_names.size() != 2)
    throw ConfigError("linearity needs exactly two --field names");
  const VectorField X = vector_field_from_name(m, field_names[0]);
  const VectorField Y = vector_field_from_name(m, field_names[1]);
  std::vector<int> ns = cfg.n_list.empty() ? detail::default_n_list(cfg.experiment) : cfg.n_list;
  detail::check_n_list(ns);
  if (!(cfg.h > 0.0)) throw ConfigError("linearity needs h > 0");
  const FlowParams params{cfg.steps_per_unit};
  constexpr int kCases = 20;
  const std::vector<std::string> scalar_names{"one", "const:2",
                                              m.name == "torus2" ? "2+sin1" : "2+z"};

  detail::CsvWriter csv("law,case_id,n_or_f,residual");
  detail::PassTracker check;
  for (int i = 0; i < kCases; ++i) {
    const auto c = detail::make_seeded_case(m, bundle, cfg.section, cfg.seed,
                                            static_cast<std::uint64_t>(i));
    double prev = 0.0;
    for (std::size_t k = 0; k < ns.size(); ++k) {
      const double res = additivity_residual(C, X, Y, c.section, c.x, cfg.h, ns[k], params);
      if (k > 0)
        check.require(detail::monotone_within_floor(res, prev, cfg.h),
                      "additivity residual increased with n in case " + std::to_string(i));
      if (k + 1 == ns.size() && m.name == "torus2")
        check.require(res <= 1e-5, "additivity residual above 1e-5 in case " + std::to_string(i));
      csv.row({"additivity", std::to_string(i), std::to_string(ns[k]),
               detail::format_double(res)});
      prev = res;
    }
  }
  for (int i = 0; i < kCases; ++i) {
    const auto c = detail::make_seeded_case(m, bundle, cfg.section,
                                            cfg.seed ^ 0x5bd1e995u, static_cast<std::uint64_t>(i));
    for (const auto& fname : scalar_names) {
      const ScalarField f = scalar_field_from_name(m, fname);
      const double res = f_linearity_residual(C, f, X, c.section, c.x, cfg.h, params);
      const double tol = fname == "one" ? 1e-9 : 1e-5;
      check.require(res <= tol, "f-linearity residual for f=" + fname + " in case " +
                                    std::to_string(i));
      csv.row({"f_linearity", std::to_string(i), fname, detail::format_double(res)});
    }
  }
  return ExperimentReport{csv.str(), check.pass,
                          check.pass ? "linearity: ok" : "linearity: " + check.first_failure};
}

// ---------------------------------------------------------------------------

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (!cfg.n_list.empty()) detail::check_n_list(cfg.n_list);
  switch (cfg.experiment) {
    case ExperimentKind::trotter:
      return run_trotter(cfg);
    case ExperimentKind::holonomy:
      return run_holonomy(cfg);
    case ExperimentKind::roundtrip:
      return run_roundtrip(cfg);
    case ExperimentKind::axioms:
      return run_axioms(cfg);
    case ExperimentKind::linearity:
      return run_linearity(cfg);
  }
  throw ConfigError("unknown experiment");
}

}  // namespace geoflow
