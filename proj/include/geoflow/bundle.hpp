#pragma once

#include <functional>
#include <string>
#include <utility>

#include "geoflow/flows.hpp"

namespace geoflow {

/// Default finite-difference scale for directional derivatives along flows.
inline constexpr double kDerivativeStep = 1e-4;

enum class BundleKind {
  /// Fibers are R^rank in one fixed global trivialization.
  trivialized,
  /// Fiber at x is the tangent plane of the unit sphere at x; vectors are
  /// stored as ambient 3-vectors with v.x = 0.
  sphere_tangent,
};

struct VectorBundle {
  Manifold base;
  int rank = 0;
  BundleKind kind = BundleKind::trivialized;
  std::string name;

  /// Dimension of the stored fiber-vector representation.
  int fiber_storage_dim() const { return kind == BundleKind::sphere_tangent ? 3 : rank; }
};

inline VectorBundle make_trivialized_bundle(Manifold base, int rank, std::string name) {
  if (rank < 1) throw InvalidDimensionError("vector bundle rank must be >= 1");
  return VectorBundle{std::move(base), rank, BundleKind::trivialized, std::move(name)};
}

inline VectorBundle make_sphere_tangent_bundle() {
  return VectorBundle{make_sphere2(), 2, BundleKind::sphere_tangent, "sphere-tangent"};
}

/// Section of a bundle: a fiber vector at every base point.
struct Section {
  VectorBundle bundle;
  std::string name;
  std::function<Vec(const Vec&)> value;

  Vec eval(const ManifoldPoint& x) const { return value(x.coords); }
};

/**
 * Covariant-derivative rule on a bundle.
 *
 * For trivialized bundles the rule is carried by a connection form A(x, v),
 * a rank x rank matrix linear in the tangent argument v; the sign convention
 * is fixed throughout the library by the transport equation
 *     ds/dt + A(c(t), c'(t)) s = 0,
 * so that nabla_X = D_X + A(X). For the sphere tangent bundle the rule is
 * Levi-Civita (ambient derivative followed by tangent projection) and `form`
 * stays empty.
 */
struct Connection {
  VectorBundle bundle;
  std::string name;
  std::function<Mat(const Vec&, const Vec&)> form;

  bool levi_civita() const { return bundle.kind == BundleKind::sphere_tangent; }
};

inline Connection make_form_connection(VectorBundle bundle, std::string name,
                                       std::function<Mat(const Vec&, const Vec&)> form) {
  if (bundle.kind != BundleKind::trivialized)
    throw DomainError("connection forms are only supported on trivialized bundles");
  return Connection{std::move(bundle), std::move(name), std::move(form)};
}

inline Connection make_levi_civita_connection() {
  return Connection{make_sphere_tangent_bundle(), "levi-civita", nullptr};
}

namespace detail {

/// Componentwise derivative of a section along the flow of X (central
/// differences on the curve t -> s(flow(X, t, x))).
inline Vec section_flow_derivative(const VectorField& X, const Section& s, const ManifoldPoint& x,
                                   double h, const FlowParams& p = {}) {
  const Vec sp = s.eval(flow(X, h, x, p));
  const Vec sm = s.eval(flow(X, -h, x, p));
  return (sp - sm) / (2.0 * h);
}

}  // namespace detail

/**
 * Covariant derivative nabla_X s at x.
 *
 * Trivialized: D_X s(x) + A(x, X(x)) s(x), with D_X s computed by central
 * differences along the flow of X (step h). Sphere tangent bundle: tangent
 * projection of the ambient derivative along the flow.
 */
inline Vec covariant_derivative(const Connection& C, const VectorField& X, const Section& s,
                                const ManifoldPoint& x, double h = kDerivativeStep,
                                const FlowParams& p = {}) {
  if (!(h > 0.0)) throw ParameterError("covariant_derivative: h must be > 0");
  const Vec ds = detail::section_flow_derivative(X, s, x, h, p);
  if (C.levi_civita()) return C.bundle.base.tangent_project(x.coords, ds);
  return ds + C.form(x.coords, X.components(x.coords)) * s.eval(x);
}

/// |nabla_X(g s) - X(g) s - g nabla_X s| at x: how far the connection is from
/// being an X-derivation at this point, up to finite-difference error.
inline double leibniz_residual(const Connection& C, const VectorField& X, const Section& s,
                               const ScalarField& g, const ManifoldPoint& x,
                               const FlowParams& p = {}) {
  const double h = kDerivativeStep;
  auto gv = g.value;
  auto sv = s.value;
  const Section gs{s.bundle, "(" + g.name + ")*" + s.name,
                   [gv, sv](const Vec& q) -> Vec { return gv(q) * sv(q); }};
  const Vec lhs = covariant_derivative(C, X, gs, x, h, p);
  const double xg = scalar_flow_derivative(X, g, x, h, p);
  const Vec rhs = xg * s.eval(x) + g.value(x.coords) * covariant_derivative(C, X, s, x, h, p);
  return (lhs - rhs).norm();
}

}  // namespace geoflow
