#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "geoflow/errors.hpp"
#include "geoflow/random.hpp"
#include "geoflow/types.hpp"

namespace geoflow {

/// Ambient tolerance below which a point counts as lying on the manifold.
inline constexpr double kOnManifoldTol = 1e-9;

/// Sphere retraction rejects points closer to the origin than this.
inline constexpr double kSphereRetractionFloor = 1e-8;

/**
 * Compact manifold embedded in Euclidean space. Points are ambient vectors;
 * the geometry is carried by three maps: a constraint residual (zero exactly
 * on the manifold), a retraction pulling nearby ambient points back onto the
 * manifold, and the orthogonal projector onto tangent spaces.
 *
 * All members are immutable after construction and every map is pure, so a
 * Manifold may be shared freely across threads.
 */
struct Manifold {
  std::string name;
  int intrinsic_dim = 0;
  int ambient_dim = 0;
  /// True when coordinates wrap (flat torus). Lets integrators work in the
  /// universal cover where interpolation needs unbroken coordinates.
  bool periodic = false;
  std::function<double(const Vec&)> constraint_residual;
  std::function<Vec(const Vec&)> retract;
  /// (base point, ambient vector) -> tangent component at the base point.
  std::function<Vec(const Vec&, const Vec&)> tangent_project;
  /// Intrinsic-aware distance: quotient metric on the torus, chordal on the sphere.
  std::function<double(const Vec&, const Vec&)> distance;
  /// Uniform sampler (used by random_point).
  std::function<Vec(Rng&)> sample;
};

/// Point stored in ambient coordinates; torus coordinates are kept canonical
/// in [0, 2*pi) per axis.
struct ManifoldPoint {
  Vec coords;
};

struct TangentVector {
  ManifoldPoint base;
  Vec components;
};

inline double wrap_to_2pi(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;  // fmod rounding can land exactly on 2*pi
  return r;
}

/// Flat torus R^dim / 2*pi*Z^dim. Retraction reduces mod 2*pi, the projector
/// is the identity, and every ambient point lies on the manifold.
inline Manifold make_flat_torus(int dim) {
  if (dim < 1) throw InvalidDimensionError("make_flat_torus: dim must be >= 1");
  Manifold m;
  m.name = "torus" + std::to_string(dim);
  m.intrinsic_dim = dim;
  m.ambient_dim = dim;
  m.periodic = true;
  m.constraint_residual = [](const Vec&) { return 0.0; };
  m.retract = [dim](const Vec& p) {
    Vec q(dim);
    for (int i = 0; i < dim; ++i) q(i) = wrap_to_2pi(p(i));
    return q;
  };
  m.tangent_project = [](const Vec&, const Vec& v) { return v; };
  m.distance = [dim](const Vec& a, const Vec& b) {
    double sq = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double d = std::abs(wrap_to_2pi(a(i)) - wrap_to_2pi(b(i)));
      const double q = std::min(d, kTwoPi - d);
      sq += q * q;
    }
    return std::sqrt(sq);
  };
  m.sample = [dim](Rng& rng) {
    Vec p(dim);
    for (int i = 0; i < dim; ++i) p(i) = rng.uniform(0.0, kTwoPi);
    return p;
  };
  return m;
}

/// Unit 2-sphere in R^3 with radial retraction and the ambient orthogonal
/// tangent projector v - (v.x)x.
inline Manifold make_sphere2() {
  Manifold m;
  m.name = "sphere2";
  m.intrinsic_dim = 2;
  m.ambient_dim = 3;
  m.constraint_residual = [](const Vec& p) { return std::abs(p.squaredNorm() - 1.0); };
  m.retract = [](const Vec& p) -> Vec {
    const double n = p.norm();
    if (n < kSphereRetractionFloor)
      throw RetractionUndefinedError("sphere2 retraction undefined near the origin");
    return p / n;
  };
  m.tangent_project = [](const Vec& x, const Vec& v) -> Vec { return v - v.dot(x) * x; };
  m.distance = [](const Vec& a, const Vec& b) { return (a - b).norm(); };
  m.sample = [](Rng& rng) {
    Vec g = rng.gaussian_vec(3);
    while (g.norm() < 1e-6) g = rng.gaussian_vec(3);
    g.normalize();
    return g;
  };
  return m;
}

/// Deterministic draw of an on-manifold point.
inline ManifoldPoint random_point(const Manifold& m, std::uint64_t seed) {
  Rng rng(seed);
  return ManifoldPoint{m.retract(m.sample(rng))};
}

inline double distance(const Manifold& m, const ManifoldPoint& a, const ManifoldPoint& b) {
  return m.distance(a.coords, b.coords);
}

inline bool is_on_manifold(const Manifold& m, const Vec& coords, double tol = kOnManifoldTol) {
  return m.constraint_residual(coords) <= tol;
}

/// Canonicalize ambient coordinates into an on-manifold point.
inline ManifoldPoint make_point(const Manifold& m, Vec coords) {
  return ManifoldPoint{m.retract(std::move(coords))};
}

inline bool same_manifold(const Manifold& a, const Manifold& b) {
  return a.name == b.name && a.ambient_dim == b.ambient_dim;
}

}  // namespace geoflow
