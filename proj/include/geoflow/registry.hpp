#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geoflow/correspondence.hpp"

namespace geoflow {

// ---------------------------------------------------------------------------
// Name parsing helpers ("kind:arg1,arg2").

namespace detail {

struct ParsedName {
  std::string head;
  std::vector<std::string> args;
};

inline ParsedName parse_name(const std::string& name) {
  ParsedName out;
  const auto colon = name.find(':');
  out.head = name.substr(0, colon);
  if (colon != std::string::npos) {
    std::string rest = name.substr(colon + 1);
    std::size_t pos = 0;
    while (true) {
      const auto comma = rest.find(',', pos);
      out.args.push_back(rest.substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  return out;
}

inline double parse_real(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw ConfigError("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("could not parse '" + text + "' as a real number in " + what);
  }
}

inline std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (used != text.size()) throw ConfigError("");
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("could not parse '" + text + "' as an integer in " + what);
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Manifolds: "torus2", "sphere2".

inline Manifold manifold_from_name(const std::string& name) {
  if (name == "torus2") return make_flat_torus(2);
  if (name == "sphere2") return make_sphere2();
  throw ConfigError("unknown manifold '" + name + "' (expected torus2 or sphere2)");
}

// ---------------------------------------------------------------------------
// Vector fields: "zero", "const:a,b", "rot:x|y|z", "shear".

inline VectorField vector_field_from_name(const Manifold& m, const std::string& name) {
  const auto parsed = detail::parse_name(name);
  if (parsed.head == "zero") {
    const int d = m.ambient_dim;
    return VectorField{m, name, [d](const Vec&) { return Vec(Vec::Zero(d)); }};
  }
  if (parsed.head == "const") {
    if (static_cast<int>(parsed.args.size()) != m.ambient_dim)
      throw ConfigError("field '" + name + "' needs " + std::to_string(m.ambient_dim) +
                        " components on " + m.name);
    if (m.name != "torus2")
      throw ConfigError("constant fields are only defined on the flat torus");
    Vec c(m.ambient_dim);
    for (int i = 0; i < m.ambient_dim; ++i)
      c(i) = detail::parse_real(parsed.args[static_cast<std::size_t>(i)], "field " + name);
    return VectorField{m, name, [c](const Vec&) { return c; }};
  }
  if (parsed.head == "rot") {
    if (m.name != "sphere2")
      throw ConfigError("rotation fields are only defined on the sphere");
    if (parsed.args.size() != 1 ||
        (parsed.args[0] != "x" && parsed.args[0] != "y" && parsed.args[0] != "z"))
      throw ConfigError("field '" + name + "': expected rot:x, rot:y or rot:z");
    Vec axis = Vec::Zero(3);
    axis(parsed.args[0] == "x" ? 0 : parsed.args[0] == "y" ? 1 : 2) = 1.0;
    return VectorField{m, name, [axis](const Vec& x) { return cross3(axis, x); }};
  }
  if (parsed.head == "shear") {
    if (m.name != "torus2") throw ConfigError("field 'shear' is only defined on the flat torus");
    return VectorField{m, name, [](const Vec& x) {
                         Vec v(2);
                         v << 0.0, 2.0 + std::sin(x(0));
                         return v;
                       }};
  }
  throw ConfigError("unknown vector field '" + name + "'");
}

// ---------------------------------------------------------------------------
// Scalar fields: "one", "const:c", "2+sin1", "2+z".

inline ScalarField scalar_field_from_name(const Manifold& m, const std::string& name) {
  const auto parsed = detail::parse_name(name);
  if (parsed.head == "one") return ScalarField{m, name, [](const Vec&) { return 1.0; }, 1.0};
  if (parsed.head == "const") {
    if (parsed.args.size() != 1) throw ConfigError("scalar field '" + name + "': expected const:c");
    const double c = detail::parse_real(parsed.args[0], "scalar field " + name);
    if (c <= 0.0) throw PositivityError("scalar field '" + name + "' must be positive");
    return ScalarField{m, name, [c](const Vec&) { return c; }, c};
  }
  if (parsed.head == "2+sin1")
    return ScalarField{m, name, [](const Vec& x) { return 2.0 + std::sin(x(0)); }, 1.0};
  if (parsed.head == "2+z") {
    if (m.ambient_dim < 3)
      throw ConfigError("scalar field '2+z' needs a third ambient coordinate");
    return ScalarField{m, name, [](const Vec& x) { return 2.0 + x(2); }, 1.0};
  }
  throw ConfigError("unknown scalar field '" + name + "'");
}

// ---------------------------------------------------------------------------
// Bundles and connections: bundles "torus-triv2", "sphere-tangent";
// connections "zero", "rotJ:a", "levi-civita".

inline VectorBundle bundle_from_name(const std::string& name) {
  if (name == "torus-triv2") return make_trivialized_bundle(make_flat_torus(2), 2, name);
  if (name == "sphere-tangent") return make_sphere_tangent_bundle();
  throw ConfigError("unknown bundle '" + name + "' (expected torus-triv2 or sphere-tangent)");
}

inline Connection connection_from_name(const VectorBundle& bundle, const std::string& name) {
  const auto parsed = detail::parse_name(name);
  if (parsed.head == "levi-civita") {
    if (bundle.kind != BundleKind::sphere_tangent)
      throw ConfigError("levi-civita requires the sphere-tangent bundle");
    return make_levi_civita_connection();
  }
  if (bundle.kind != BundleKind::trivialized)
    throw ConfigError("connection '" + name + "' requires a trivialized bundle");
  if (parsed.head == "zero") {
    const int r = bundle.rank;
    return make_form_connection(bundle, name,
                                [r](const Vec&, const Vec&) { return Mat(Mat::Zero(r, r)); });
  }
  if (parsed.head == "rotJ") {
    if (bundle.rank != 2) throw ConfigError("rotJ needs a rank-2 bundle");
    if (parsed.args.size() != 1) throw ConfigError("connection '" + name + "': expected rotJ:a");
    const double a = detail::parse_real(parsed.args[0], "connection " + name);
    Mat j(2, 2);
    j << 0.0, -1.0, 1.0, 0.0;
    // A(x, v) = a * v_1 * J, linear in v
    return make_form_connection(bundle, name,
                                [a, j](const Vec&, const Vec& v) { return Mat(a * v(0) * j); });
  }
  throw ConfigError("unknown connection '" + name + "'");
}

/// The bundle a connection name naturally lives on, for CLI inference.
inline VectorBundle bundle_for_connection(const std::string& connection_name,
                                          const Manifold& manifold) {
  if (detail::parse_name(connection_name).head == "levi-civita") {
    if (manifold.name != "sphere2")
      throw ConfigError("levi-civita requires --manifold sphere2");
    return bundle_from_name("sphere-tangent");
  }
  if (manifold.name != "torus2")
    throw ConfigError("connection '" + connection_name + "' requires --manifold torus2");
  return bundle_from_name("torus-triv2");
}

// ---------------------------------------------------------------------------
// Sections: "const:e1|e2|a,b", "rotfield", "seeded:k".

inline Section seeded_section(const VectorBundle& bundle, std::uint64_t seed);

inline Section section_from_name(const VectorBundle& bundle, const std::string& name) {
  const auto parsed = detail::parse_name(name);
  if (parsed.head == "const") {
    if (bundle.kind != BundleKind::trivialized)
      throw ConfigError("constant sections need a trivialized bundle");
    Vec c = Vec::Zero(bundle.rank);
    if (parsed.args.size() == 1 && parsed.args[0].size() == 2 && parsed.args[0][0] == 'e') {
      const int idx = parsed.args[0][1] - '1';
      if (idx < 0 || idx >= bundle.rank)
        throw ConfigError("section '" + name + "': basis index out of range");
      c(idx) = 1.0;
    } else if (static_cast<int>(parsed.args.size()) == bundle.rank) {
      for (int i = 0; i < bundle.rank; ++i)
        c(i) = detail::parse_real(parsed.args[static_cast<std::size_t>(i)], "section " + name);
    } else {
      throw ConfigError("section '" + name + "': expected const:e1 or const:a,b");
    }
    return Section{bundle, name, [c](const Vec&) { return c; }};
  }
  if (parsed.head == "rotfield") {
    if (bundle.kind != BundleKind::sphere_tangent)
      throw ConfigError("section 'rotfield' lives on the sphere-tangent bundle");
    Vec ez = Vec::Zero(3);
    ez(2) = 1.0;
    return Section{bundle, name, [ez](const Vec& x) { return cross3(ez, x); }};
  }
  if (parsed.head == "seeded") {
    if (parsed.args.size() != 1) throw ConfigError("section '" + name + "': expected seeded:k");
    return seeded_section(bundle, detail::parse_u64(parsed.args[0], "section " + name));
  }
  throw ConfigError("unknown section '" + name + "'");
}

// ---------------------------------------------------------------------------
// Paths: "equator-arc:theta", "octant", "rect:L,H", "coord-line:axis,L",
// "const[:coords]". Geodesic arcs are exact slerps with exact velocities.

/// Great-circle arc from unit vector a to unit vector b (not antipodal),
/// parametrized over [t0, t0 + angle] at unit speed.
inline PathPiece geodesic_arc_piece(const Vec& a, const Vec& b, double t0) {
  const double cosang = std::clamp(a.dot(b), -1.0, 1.0);
  const double angle = std::acos(cosang);
  if (angle < 1e-12 || kPi - angle < 1e-9)
    throw DomainError("geodesic arc needs distinct, non-antipodal endpoints");
  // orthonormalize: run along a cos(u) + w sin(u), w the unit tangent at a
  Vec w = b - cosang * a;
  w.normalize();
  auto pos = [a, w, t0](double t) -> Vec { return std::cos(t - t0) * a + std::sin(t - t0) * w; };
  auto vel = [a, w, t0](double t) -> Vec { return -std::sin(t - t0) * a + std::cos(t - t0) * w; };
  return PathPiece{t0, t0 + angle, pos, vel};
}

inline PathCurve geodesic_polygon(const Manifold& sphere, const std::vector<Vec>& vertices,
                                  const std::string& name) {
  std::vector<PathPiece> pieces;
  double t = 0.0;
  for (std::size_t i = 0; i + 1 < vertices.size(); ++i) {
    pieces.push_back(geodesic_arc_piece(vertices[i], vertices[i + 1], t));
    t = pieces.back().t_end;
  }
  return PathCurve(sphere, std::move(pieces), name);
}

/// Straight segment between torus coordinates (given unwrapped), over [t0, t0+1].
inline PathPiece torus_segment_piece(const Vec& a, const Vec& b, double t0) {
  const Vec d = b - a;
  auto pos = [a, d, t0](double t) -> Vec { return a + (t - t0) * d; };
  auto vel = [d](double) { return d; };
  return PathPiece{t0, t0 + 1.0, pos, vel};
}

inline PathCurve path_from_name(const Manifold& m, const std::string& name) {
  const auto parsed = detail::parse_name(name);
  if (parsed.head == "const") {
    Vec x;
    if (parsed.args.empty()) {
      x = Vec::Zero(m.ambient_dim);
      if (m.name == "sphere2") x(0) = 1.0;
    } else {
      if (static_cast<int>(parsed.args.size()) != m.ambient_dim)
        throw ConfigError("path '" + name + "': wrong number of coordinates");
      x.resize(m.ambient_dim);
      for (int i = 0; i < m.ambient_dim; ++i)
        x(i) = detail::parse_real(parsed.args[static_cast<std::size_t>(i)], "path " + name);
    }
    return make_constant_path(m, make_point(m, x));
  }
  if (parsed.head == "equator-arc") {
    if (m.name != "sphere2") throw ConfigError("path '" + name + "' lives on the sphere");
    if (parsed.args.size() != 1)
      throw ConfigError("path '" + name + "': expected equator-arc:theta");
    const double theta = detail::parse_real(parsed.args[0], "path " + name);
    if (!(theta > 0.0)) throw ConfigError("path '" + name + "': theta must be positive");
    auto pos = [](double t) -> Vec {
      Vec x(3);
      x << std::cos(t), std::sin(t), 0.0;
      return x;
    };
    auto vel = [](double t) -> Vec {
      Vec v(3);
      v << -std::sin(t), std::cos(t), 0.0;
      return v;
    };
    return PathCurve(m, {PathPiece{0.0, theta, pos, vel}}, name);
  }
  if (parsed.head == "octant") {
    if (m.name != "sphere2") throw ConfigError("path 'octant' lives on the sphere");
    Vec e1 = Vec::Zero(3), e2 = Vec::Zero(3), e3 = Vec::Zero(3);
    e1(0) = 1.0;
    e2(1) = 1.0;
    e3(2) = 1.0;
    return geodesic_polygon(m, {e1, e2, e3, e1}, name);
  }
  if (parsed.head == "rect") {
    if (m.name != "torus2") throw ConfigError("path '" + name + "' lives on the torus");
    if (parsed.args.size() != 2) throw ConfigError("path '" + name + "': expected rect:L,H");
    const double L = detail::parse_real(parsed.args[0], "path " + name);
    const double H = detail::parse_real(parsed.args[1], "path " + name);
    Vec c0(2), c1(2), c2(2), c3(2);
    c0 << 0.0, 0.0;
    c1 << L, 0.0;
    c2 << L, H;
    c3 << 0.0, H;
    std::vector<PathPiece> pieces{torus_segment_piece(c0, c1, 0.0), torus_segment_piece(c1, c2, 1.0),
                                  torus_segment_piece(c2, c3, 2.0),
                                  torus_segment_piece(c3, c0, 3.0)};
    return PathCurve(m, std::move(pieces), name);
  }
  if (parsed.head == "coord-line") {
    if (m.name != "torus2") throw ConfigError("path '" + name + "' lives on the torus");
    if (parsed.args.size() != 2)
      throw ConfigError("path '" + name + "': expected coord-line:axis,L");
    const auto axis = detail::parse_u64(parsed.args[0], "path " + name);
    if (axis < 1 || axis > 2) throw ConfigError("path '" + name + "': axis must be 1 or 2");
    const double L = detail::parse_real(parsed.args[1], "path " + name);
    Vec a = Vec::Zero(2), b = Vec::Zero(2);
    b(static_cast<int>(axis) - 1) = L;
    return PathCurve(m, {torus_segment_piece(a, b, 0.0)}, name);
  }
  throw ConfigError("unknown path '" + name + "'");
}

// ---------------------------------------------------------------------------
// Reparametrizations: "affine" (domain rescale) and "sine" (wobbled rescale),
// both orientation-preserving.

inline Reparametrization reparam_from_name(const PathCurve& path, const std::string& name) {
  const double a = path.t_begin();
  const double b = path.t_end();
  if (name == "affine") {
    const double len = b - a;
    return Reparametrization{0.0, 1.0, [a, len](double u) { return a + len * u; },
                             [len](double) { return len; }, name};
  }
  if (name == "sine") {
    const double len = b - a;
    auto psi = [](double u) { return u + 0.1 * std::sin(kTwoPi * u); };
    auto dpsi = [](double u) { return 1.0 + 0.1 * kTwoPi * std::cos(kTwoPi * u); };
    return Reparametrization{0.0, 1.0, [a, len, psi](double u) { return a + len * psi(u); },
                             [len, dpsi](double u) { return len * dpsi(u); }, name};
  }
  throw ConfigError("unknown reparametrization '" + name + "' (expected affine or sine)");
}

// ---------------------------------------------------------------------------
// Seeded generators: smooth objects with O(1) derivatives, deterministic in
// the seed, used by property tests and seeded experiment cases.

inline VectorField seeded_vector_field(const Manifold& m, std::uint64_t seed) {
  Rng rng(seed);
  const std::string name = "seeded-field:" + std::to_string(seed);
  if (m.name == "sphere2") {
    Vec w1 = rng.gaussian_vec(3);
    w1.normalize();
    Vec w2 = rng.gaussian_vec(3);
    w2.normalize();
    Vec w3 = rng.gaussian_vec(3);
    w3.normalize();
    // unit-scale speeds keep finite-difference truncation inside the
    // documented h = 1e-3 error budget
    const double c1 = rng.uniform(0.3, 0.7);
    const double c2 = rng.uniform(-0.3, 0.3);
    return VectorField{m, name, [w1, w2, w3, c1, c2](const Vec& x) -> Vec {
                         return c1 * cross3(w1, x) + (c2 * w3.dot(x)) * cross3(w2, x);
                       }};
  }
  const int d = m.ambient_dim;
  Vec a(d), b(d), phase(d);
  std::vector<int> idx(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    a(i) = rng.uniform(-0.8, 0.8);
    b(i) = rng.uniform(-0.5, 0.5);
    phase(i) = rng.uniform(0.0, kTwoPi);
    idx[static_cast<std::size_t>(i)] = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(d));
  }
  return VectorField{m, name, [a, b, phase, idx, d](const Vec& x) {
                       Vec v(d);
                       for (int i = 0; i < d; ++i)
                         v(i) = a(i) + b(i) * std::sin(x(idx[static_cast<std::size_t>(i)]) +
                                                       phase(i));
                       return v;
                     }};
}

/// Strictly positive scalar field with unit-scale oscillation.
inline ScalarField seeded_scalar_field(const Manifold& m, std::uint64_t seed) {
  Rng rng(seed);
  const double base = rng.uniform(1.8, 3.0);
  const double amp = rng.uniform(0.2, 0.7);
  const double phase = rng.uniform(0.0, kTwoPi);
  const int coord = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(m.ambient_dim));
  const std::string name = "seeded-scalar:" + std::to_string(seed);
  return ScalarField{m, name,
                     [base, amp, phase, coord](const Vec& x) {
                       return base + amp * std::sin(x(coord) + phase);
                     },
                     base - amp};
}

inline Section seeded_section(const VectorBundle& bundle, std::uint64_t seed) {
  Rng rng(seed);
  const std::string name = "seeded:" + std::to_string(seed);
  const int d = bundle.base.ambient_dim;
  const int stored = bundle.fiber_storage_dim();
  Vec a(stored);
  Mat b(stored, d), phase(stored, d);
  for (int i = 0; i < stored; ++i) {
    a(i) = rng.uniform(-1.0, 1.0);
    for (int j = 0; j < d; ++j) {
      b(i, j) = rng.uniform(-0.35, 0.35);
      phase(i, j) = rng.uniform(0.0, kTwoPi);
    }
  }
  auto ambient = [a, b, phase, stored, d](const Vec& x) {
    Vec v(stored);
    for (int i = 0; i < stored; ++i) {
      double acc = a(i);
      for (int j = 0; j < d; ++j) acc += b(i, j) * std::sin(x(j) + phase(i, j));
      v(i) = acc;
    }
    return v;
  };
  if (bundle.kind == BundleKind::sphere_tangent) {
    auto project = bundle.base.tangent_project;
    return Section{bundle, name,
                   [ambient, project](const Vec& x) -> Vec { return project(x, ambient(x)); }};
  }
  return Section{bundle, name, ambient};
}

/// Invertible rank x rank matrix with condition number at most `max_cond`.
inline Mat seeded_group_element(int rank, std::uint64_t seed, double max_cond = 100.0) {
  Rng rng(seed);
  for (int attempt = 0; attempt < 64; ++attempt) {
    Mat g(rank, rank);
    for (int i = 0; i < rank; ++i)
      for (int j = 0; j < rank; ++j) g(i, j) = rng.uniform(-2.0, 2.0);
    if (condition_number(g) <= max_cond) return g;
  }
  return Mat(Mat::Identity(rank, rank));
}

/// Registry path with seeded parameters, suitable for axiom sweeps.
inline PathCurve seeded_path(const Manifold& m, std::uint64_t seed) {
  Rng rng(seed);
  if (m.name == "sphere2") {
    switch (rng.next_u64() % 3) {
      case 0:
        return path_from_name(m, "equator-arc:" + std::to_string(rng.uniform(0.6, 3.0)));
      case 1:
        return path_from_name(m, "octant");
      default: {
        // seeded geodesic triangle with well-separated vertices
        for (int attempt = 0; attempt < 64; ++attempt) {
          Vec v1 = rng.gaussian_vec(3), v2 = rng.gaussian_vec(3), v3 = rng.gaussian_vec(3);
          v1.normalize();
          v2.normalize();
          v3.normalize();
          const double lo = 0.4, hi = kPi - 0.4;
          auto ok = [lo, hi](const Vec& a, const Vec& b) {
            const double ang = std::acos(std::clamp(a.dot(b), -1.0, 1.0));
            return ang > lo && ang < hi;
          };
          if (ok(v1, v2) && ok(v2, v3) && ok(v3, v1))
            return geodesic_polygon(m, {v1, v2, v3, v1}, "seeded-triangle");
        }
        return path_from_name(m, "octant");
      }
    }
  }
  switch (rng.next_u64() % 3) {
    case 0:
      return path_from_name(m, "rect:" + std::to_string(rng.uniform(0.5, 2.5)) + "," +
                                   std::to_string(rng.uniform(0.5, 2.5)));
    case 1:
      return path_from_name(m, "coord-line:" + std::to_string(1 + rng.next_u64() % 2) + "," +
                                   std::to_string(rng.uniform(0.5, 2.5)));
    default: {
      // straight segment in a seeded direction
      Vec a(2), b(2);
      a << rng.uniform(0.0, kTwoPi), rng.uniform(0.0, kTwoPi);
      b = a;
      b(0) += rng.uniform(-2.0, 2.0);
      b(1) += rng.uniform(-2.0, 2.0);
      return PathCurve(m, {torus_segment_piece(a, b, 0.0)}, "seeded-segment");
    }
  }
}

}  // namespace geoflow
