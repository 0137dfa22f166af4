#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "geoflow/errors.hpp"
#include "geoflow/manifold.hpp"

namespace geoflow {

/// Smooth assignment of a tangent vector to every point of a manifold.
/// `components` receives on-manifold ambient coordinates and must return a
/// vector in (or smoothly extending) the tangent space there.
struct VectorField {
  Manifold manifold;
  std::string name;
  std::function<Vec(const Vec&)> components;

  TangentVector eval(const ManifoldPoint& x) const { return {x, components(x.coords)}; }
};

/// Smooth real function on a manifold. `positivity_floor` > 0 advertises a
/// strictly positive field (required for time changes); it is asserted by
/// sampling at construction sites, not proven.
struct ScalarField {
  Manifold manifold;
  std::string name;
  std::function<double(const Vec&)> value;
  double positivity_floor = 0.0;
};

/// Integrator resolution. The scheme is fixed: classical 4th-order
/// Runge-Kutta with a retraction after every step; deterministic step counts
/// keep convergence-order measurements clean.
struct FlowParams {
  int steps_per_unit_time = 1000;
};

namespace detail {

inline long long step_count(double t, const FlowParams& p) {
  if (p.steps_per_unit_time < 1)
    throw ParameterError("FlowParams: steps_per_unit_time must be >= 1");
  const long long n = std::llround(std::abs(t) * static_cast<double>(p.steps_per_unit_time));
  return std::max<long long>(1, n);
}

/// One RK4 step of y' = field(y). Stage points are retracted before each
/// field evaluation so stages never leave the manifold by more than rounding.
inline Vec rk4_step(const Manifold& m, const std::function<Vec(const Vec&)>& field, const Vec& y,
                    double h) {
  auto eval = [&](const Vec& q) {
    Vec v = field(m.retract(q));
    if (!v.allFinite()) throw IntegrationError("non-finite vector field value", q);
    return v;
  };
  const Vec k1 = eval(y);
  const Vec k2 = eval(y + (0.5 * h) * k1);
  const Vec k3 = eval(y + (0.5 * h) * k2);
  const Vec k4 = eval(y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

/// Time-t flow of X from x. Negative t runs the flow backwards. Uses
/// |t| * steps_per_unit_time RK4 steps (at least one), retracting after each.
inline ManifoldPoint flow(const VectorField& X, double t, const ManifoldPoint& x,
                          const FlowParams& p = {}) {
  if (t == 0.0) return x;
  const long long n = detail::step_count(t, p);
  const double h = t / static_cast<double>(n);
  const Manifold& m = X.manifold;
  Vec y = x.coords;
  for (long long k = 0; k < n; ++k) {
    y = detail::rk4_step(m, X.components, y, h);
    y = m.retract(y);
  }
  return ManifoldPoint{std::move(y)};
}

/**
 * n-fold zig-zag composite (alpha_{t/n} beta_{t/n})^(n) of the flows of X and
 * Y, with the Y-flow applied first inside each factor. As n grows this
 * converges to the time-t flow of X+Y.
 */
inline ManifoldPoint trotter_flow(const VectorField& X, const VectorField& Y, double t,
                                  const ManifoldPoint& x, int n, const FlowParams& p = {}) {
  if (n < 1) throw ParameterError("trotter_flow: n must be >= 1");
  if (!same_manifold(X.manifold, Y.manifold))
    throw DomainError("trotter_flow: X and Y live on different manifolds");
  const double dt = t / static_cast<double>(n);
  ManifoldPoint y = x;
  for (int k = 0; k < n; ++k) {
    y = flow(Y, dt, y, p);
    y = flow(X, dt, y, p);
  }
  return y;
}

namespace detail {

/**
 * Dense samples of the flow line of X through a fixed point, extended lazily
 * in both directions and evaluated anywhere by cubic Hermite interpolation.
 * On the torus the nodes are kept unwrapped (no per-step retraction) so the
 * interpolant never straddles a coordinate seam; fields are always evaluated
 * at retracted copies, which is the same thing for 2*pi-periodic fields.
 */
class FlowLineCache {
 public:
  FlowLineCache(const VectorField& X, const Vec& x0, const FlowParams& p)
      : field_(X), delta_(1.0 / static_cast<double>(p.steps_per_unit_time)) {
    const Manifold& m = field_.manifold;
    Node start{x0, field_.components(m.retract(x0))};
    fwd_.push_back(start);
    bwd_.push_back(std::move(start));
  }

  /// Position of the flow line at flow time sigma (ambient, possibly unwrapped).
  Vec position(double sigma) {
    const double u = sigma / delta_;
    const double kf = std::floor(u);
    const long long k = static_cast<long long>(kf);
    const double theta = u - kf;
    // copies: extending the cache for node k+1 may reallocate node k's storage
    const Node a = node(k);
    const Node b = node(k + 1);
    const double t2 = theta * theta;
    const double t3 = t2 * theta;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + theta;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * a.y + (h10 * delta_) * a.v + h01 * b.y + (h11 * delta_) * b.v;
  }

 private:
  struct Node {
    Vec y;
    Vec v;
  };

  const Node& node(long long k) {
    if (k >= 0) {
      while (static_cast<long long>(fwd_.size()) <= k) extend(fwd_, delta_);
      return fwd_[static_cast<std::size_t>(k)];
    }
    const long long j = -k;
    while (static_cast<long long>(bwd_.size()) <= j) extend(bwd_, -delta_);
    return bwd_[static_cast<std::size_t>(j)];
  }

  void extend(std::vector<Node>& nodes, double step) {
    const Manifold& m = field_.manifold;
    Vec y = detail::rk4_step(m, field_.components, nodes.back().y, step);
    if (!m.periodic) y = m.retract(y);
    Vec v = field_.components(m.retract(y));
    nodes.push_back(Node{std::move(y), std::move(v)});
  }

  VectorField field_;
  double delta_;
  std::vector<Node> fwd_;  // nodes at sigma = +i * delta
  std::vector<Node> bwd_;  // nodes at sigma = -i * delta
};

}  // namespace detail

/**
 * Solves the time-change ODE
 *     ds/dt = f(alpha(s(t), x)),   s(0) = 0,
 * where alpha is the flow of X, by RK4 on s with alpha supplied from a dense
 * flow-line cache. The scalar field must stay strictly positive along the
 * trajectory; a violation raises PositivityError.
 */
inline double time_change_s(const ScalarField& f, const VectorField& X, double t,
                            const ManifoldPoint& x, const FlowParams& p = {}) {
  if (!same_manifold(f.manifold, X.manifold))
    throw DomainError("time_change_s: f and X live on different manifolds");
  if (t == 0.0) return 0.0;
  const Manifold& m = X.manifold;
  detail::FlowLineCache line(X, x.coords, p);
  auto rate = [&](double sigma) {
    const Vec q = m.retract(line.position(sigma));
    const double val = f.value(q);
    if (!std::isfinite(val)) throw IntegrationError("non-finite scalar field value", q);
    if (val <= 0.0)
      throw PositivityError("time_change_s: scalar field not strictly positive (f = " +
                            std::to_string(val) + ")");
    return val;
  };
  const long long n = detail::step_count(t, p);
  const double h = t / static_cast<double>(n);
  double s = 0.0;
  for (long long k = 0; k < n; ++k) {
    const double k1 = rate(s);
    const double k2 = rate(s + 0.5 * h * k1);
    const double k3 = rate(s + 0.5 * h * k2);
    const double k4 = rate(s + h * k3);
    s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return s;
}

/// Flow of the scaled field fX realized as alpha(s(t,x), x): the time change
/// above composed with the flow of X. Cross-checks against direct integration
/// of x -> f(x) X(x) are part of the test suite.
inline ManifoldPoint flow_of_scaled_field(const ScalarField& f, const VectorField& X, double t,
                                          const ManifoldPoint& x, const FlowParams& p = {}) {
  const double s = time_change_s(f, X, t, x, p);
  return flow(X, s, x, p);
}

/// Solution object for the time-change ODE; eval(t, x) = s(t, x).
struct TimeChangeSolution {
  ScalarField f;
  VectorField field;
  FlowParams params;

  double eval(double t, const ManifoldPoint& x) const {
    return time_change_s(f, field, t, x, params);
  }
};

inline TimeChangeSolution make_time_change(ScalarField f, VectorField X, FlowParams p = {}) {
  return TimeChangeSolution{std::move(f), std::move(X), p};
}

/// Trajectory samples flow(X, t_i, x) over an increasing grid starting at 0.
inline std::vector<ManifoldPoint> integral_curve(const VectorField& X, const ManifoldPoint& x,
                                                 const std::vector<double>& t_grid,
                                                 const FlowParams& p = {}) {
  if (t_grid.empty()) throw ParameterError("integral_curve: empty time grid");
  if (t_grid.front() != 0.0) throw ParameterError("integral_curve: grid must start at 0");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1]))
      throw ParameterError("integral_curve: grid must be strictly increasing");
  std::vector<ManifoldPoint> out;
  out.reserve(t_grid.size());
  for (const double t : t_grid) out.push_back(flow(X, t, x, p));
  return out;
}

/// Derivative X(g) of a scalar field along the flow of X, by central
/// differences on the flow line.
inline double scalar_flow_derivative(const VectorField& X, const ScalarField& g,
                                     const ManifoldPoint& x, double h,
                                     const FlowParams& p = {}) {
  if (!(h > 0.0)) throw ParameterError("scalar_flow_derivative: h must be > 0");
  const double gp = g.value(flow(X, h, x, p).coords);
  const double gm = g.value(flow(X, -h, x, p).coords);
  return (gp - gm) / (2.0 * h);
}

/// Pointwise combinations used throughout: X+Y and fX.
inline VectorField add_fields(const VectorField& X, const VectorField& Y) {
  if (!same_manifold(X.manifold, Y.manifold))
    throw DomainError("add_fields: X and Y live on different manifolds");
  auto xc = X.components;
  auto yc = Y.components;
  return VectorField{X.manifold, X.name + "+" + Y.name,
                     [xc, yc](const Vec& q) -> Vec { return xc(q) + yc(q); }};
}

inline VectorField scale_field(const ScalarField& f, const VectorField& X) {
  if (!same_manifold(f.manifold, X.manifold))
    throw DomainError("scale_field: f and X live on different manifolds");
  auto fv = f.value;
  auto xc = X.components;
  return VectorField{X.manifold, f.name + "*" + X.name,
                     [fv, xc](const Vec& q) -> Vec { return fv(q) * xc(q); }};
}

}  // namespace geoflow
