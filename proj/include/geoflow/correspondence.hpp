#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "geoflow/transport.hpp"

namespace geoflow {

/// Default finite-difference scale for derivatives of transported sections.
inline constexpr double kLiftStep = 1e-3;

/// Abstract parallel-transport map consumed by this module; usually backed by
/// parallel_transport over a connection, but substitutable for testing.
struct TransportOracle {
  std::function<TransportMap(const PathCurve&)> transport;
};

inline TransportOracle transport_oracle(const Connection& C, const FlowParams& p = {}) {
  return TransportOracle{
      [C, p](const PathCurve& path) { return parallel_transport(C, path, p); }};
}

namespace detail {

/// Flow-line segment of duration |dt| starting at x0 (run backwards when dt
/// is negative), with positions served by a prefilled dense cache so each
/// evaluation costs O(1) instead of a fresh integration.
inline PathPiece flow_segment_piece(const VectorField& X, const Vec& x0, double dt, double u0,
                                    const FlowParams& p) {
  const double sign = dt < 0.0 ? -1.0 : 1.0;
  const double len = std::abs(dt);
  const Manifold m = X.manifold;
  auto cache = std::make_shared<FlowLineCache>(X, x0, p);
  // touch both ends now; reads inside the domain never grow the cache again
  const double margin = 2.0 / static_cast<double>(p.steps_per_unit_time);
  cache->position(sign * (len + margin));
  cache->position(-sign * margin);
  auto pos = [cache, m, sign, u0](double u) { return m.retract(cache->position(sign * (u - u0))); };
  auto comp = X.components;
  auto vel = [comp, pos, sign](double u) -> Vec { return sign * comp(pos(u)); };
  return PathPiece{u0, u0 + len, pos, vel};
}

}  // namespace detail

/// Flow line of X through x as a path over [0, |t|]; for negative t the path
/// runs along the reversed flow, so it always starts at x and ends at
/// flow(X, t, x).
inline PathCurve flow_line_path(const VectorField& X, const ManifoldPoint& x, double t,
                                const FlowParams& p = {}) {
  return PathCurve(X.manifold, {detail::flow_segment_piece(X, x.coords, t, 0.0, p)}, "flow-line");
}

/// The n-factor zig-zag of Y-then-X flow segments over total time t, as one
/// concatenated path (2n pieces of duration |t|/n each).
inline PathCurve zigzag_path(const VectorField& X, const VectorField& Y, double t, int n,
                             const ManifoldPoint& x, const FlowParams& p = {}) {
  if (n < 1) throw ParameterError("zigzag_path: n must be >= 1");
  if (!same_manifold(X.manifold, Y.manifold))
    throw DomainError("zigzag_path: X and Y live on different manifolds");
  const double seg = std::abs(t) / static_cast<double>(n);
  const double dt = t / static_cast<double>(n);
  std::vector<PathPiece> pieces;
  pieces.reserve(2 * static_cast<std::size_t>(n));
  ManifoldPoint w = x;
  for (int k = 0; k < 2 * n; ++k) {
    const VectorField& field = (k % 2 == 0) ? Y : X;
    pieces.push_back(
        detail::flow_segment_piece(field, w.coords, dt, seg * static_cast<double>(k), p));
    w = flow(field, dt, w, p);
  }
  return PathCurve(X.manifold, std::move(pieces), "zigzag");
}

/// Finite-difference derivative of a lift, with the two step sizes used and a
/// computable error proxy (the gap between the two estimates).
struct DerivativeEstimate {
  Vec value;
  double step_coarse = 0.0;
  double step_fine = 0.0;
  double residual_estimate = 0.0;
};

namespace detail {

/// Central difference of the pulled-back section over [-h, h] along a family
/// of paths: paths(h) must yield the forward path from x and paths(-h) the
/// backward one. Both flows are reversible on the fixtures, so the symmetric
/// quotient is always available.
inline Vec pulled_back_derivative(const TransportOracle& P, const Section& s,
                                  const std::function<PathCurve(double)>& paths, double h) {
  const TransportMap fwd = P.transport(paths(h));
  const TransportMap bwd = P.transport(paths(-h));
  const Vec sf = fwd.apply_inverse(s.eval(fwd.target));
  const Vec sb = bwd.apply_inverse(s.eval(bwd.target));
  return (sf - sb) / (2.0 * h);
}

inline DerivativeEstimate richardson(const TransportOracle& P, const Section& s,
                                     const std::function<PathCurve(double)>& paths, double h) {
  if (!(h > 0.0)) throw ParameterError("connection_from_transport: h must be > 0");
  const Vec coarse = pulled_back_derivative(P, s, paths, h);
  const Vec fine = pulled_back_derivative(P, s, paths, 0.5 * h);
  return DerivativeEstimate{2.0 * fine - coarse, h, 0.5 * h, (fine - coarse).norm()};
}

}  // namespace detail

/**
 * Recovers the covariant derivative of s along X at x from parallel transport
 * alone: the section is pulled back along the lifted flow-line segment and
 * differentiated by symmetric differences, then Richardson-extrapolated as
 * 2 D(h/2) - D(h).
 */
inline DerivativeEstimate connection_from_transport(const TransportOracle& P,
                                                    const VectorField& X, const Section& s,
                                                    const ManifoldPoint& x, double h = kLiftStep,
                                                    const FlowParams& p = {}) {
  auto paths = [&X, &x, &p](double step) { return flow_line_path(X, x, step, p); };
  return detail::richardson(P, s, paths, h);
}

/// |transport-recovered derivative - covariant_derivative|: the round trip
/// connection -> transport -> connection measured at one point.
inline double roundtrip_residual(const Connection& C, const VectorField& X, const Section& s,
                                 const ManifoldPoint& x, double h = kLiftStep,
                                 const FlowParams& p = {}) {
  const DerivativeEstimate est = connection_from_transport(transport_oracle(C, p), X, s, x, h, p);
  return (est.value - covariant_derivative(C, X, s, x, kDerivativeStep, p)).norm();
}

/**
 * Additivity of the transport-derived lift: derivative estimate along the
 * n-factor zig-zag path of X and Y versus the sum of the X and Y estimates.
 * Shrinks as h -> 0 and n -> infinity; tests assert monotone decrease in n.
 */
inline double additivity_residual(const Connection& C, const VectorField& X, const VectorField& Y,
                                  const Section& s, const ManifoldPoint& x, double h, int n,
                                  const FlowParams& p = {}) {
  if (n < 1) throw ParameterError("additivity_residual: n must be >= 1");
  const TransportOracle P = transport_oracle(C, p);
  auto zig = [&](double step) { return zigzag_path(X, Y, step, n, x, p); };
  const DerivativeEstimate along_zigzag = detail::richardson(P, s, zig, h);
  const DerivativeEstimate dx = connection_from_transport(P, X, s, x, h, p);
  const DerivativeEstimate dy = connection_from_transport(P, Y, s, x, h, p);
  return (along_zigzag.value - dx.value - dy.value).norm();
}

/**
 * Function-linearity of the lift: the fX flow line is realized through the
 * time change (transport along the X flow line reparametrized by s(t, x), the
 * time change pulled back from the base), and its derivative estimate is
 * compared with f(x) times the X estimate.
 */
inline double f_linearity_residual(const Connection& C, const ScalarField& f,
                                   const VectorField& X, const Section& s, const ManifoldPoint& x,
                                   double h = kLiftStep, const FlowParams& p = {}) {
  const TransportOracle P = transport_oracle(C, p);
  auto scaled = [&](double step) {
    const double sigma = time_change_s(f, X, step, x, p);
    return flow_line_path(X, x, sigma, p);
  };
  const DerivativeEstimate df = detail::richardson(P, s, scaled, h);
  const DerivativeEstimate dx = connection_from_transport(P, X, s, x, h, p);
  return (df.value - f.value(x.coords) * dx.value).norm();
}

namespace detail {

/// Pullback covariant-derivative residual |(gamma* nabla)_{d/dt} s|(t) for a
/// section given along the path. Stencils stay inside the smooth piece
/// containing t (velocities jump at junctions, so differencing across one
/// would mix the two one-sided derivatives).
inline double pullback_derivative_residual_at(const Connection& C, const PathCurve& path,
                                              double t, const std::function<Vec(double)>& s_of_t,
                                              double delta) {
  const auto& piece = path.pieces()[path.piece_index(t)];
  Vec ds;
  if (t - delta >= piece.t_begin && t + delta <= piece.t_end) {
    ds = (s_of_t(t + delta) - s_of_t(t - delta)) / (2.0 * delta);
  } else if (t + 2.0 * delta <= piece.t_end) {
    ds = (-3.0 * s_of_t(t) + 4.0 * s_of_t(t + delta) - s_of_t(t + 2.0 * delta)) / (2.0 * delta);
  } else if (t - 2.0 * delta >= piece.t_begin) {
    ds = (3.0 * s_of_t(t) - 4.0 * s_of_t(t - delta) + s_of_t(t - 2.0 * delta)) / (2.0 * delta);
  } else {
    throw ParameterError("pullback derivative: piece shorter than the difference stencil");
  }
  const Vec pos = path.position(t);
  if (C.levi_civita()) {
    const Vec base = C.bundle.base.retract(pos);
    return C.bundle.base.tangent_project(base, ds).norm();
  }
  return (ds + C.form(pos, path.velocity(t)) * s_of_t(t)).norm();
}

}  // namespace detail

/// Max pullback covariant-derivative residual over the grid for a section
/// supplied along the path (values as a function of the path parameter).
inline double section_along_path_residual(const Connection& C, const PathCurve& path,
                                          const std::function<Vec(double)>& s_of_t,
                                          const std::vector<double>& grid,
                                          double delta = kDerivativeStep) {
  if (grid.empty()) throw ParameterError("section_along_path_residual: empty grid");
  double worst = 0.0;
  for (const double t : grid)
    worst = std::max(worst, detail::pullback_derivative_residual_at(C, path, t, s_of_t, delta));
  return worst;
}

/**
 * Builds the transported section s(t) = P(gamma|[0,t]) v0 and returns its
 * maximum pullback covariant-derivative residual over the grid: transported
 * sections are exactly the parallel ones, so this should vanish up to
 * discretization error.
 */
inline double parallel_section_residual(const Connection& C, const PathCurve& path, const Vec& v0,
                                        const std::vector<double>& grid,
                                        const FlowParams& p = {}) {
  if (grid.empty()) throw ParameterError("parallel_section_residual: empty grid");
  if (std::abs(grid.front() - path.t_begin()) > 1e-12)
    throw ParameterError("parallel_section_residual: grid must start at the path's left endpoint");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw ParameterError("parallel_section_residual: grid must be strictly increasing");
  if (grid.back() > path.t_end() + 1e-12)
    throw ParameterError("parallel_section_residual: grid leaves the path domain");

  if (C.bundle.kind == BundleKind::sphere_tangent) {
    const Vec x0 = path.position(path.t_begin());
    if (std::abs(v0.dot(x0)) > 1e-8)
      throw DomainError("parallel_section_residual: v0 is not tangent at the path start");
  }

  auto transported = [&](double t) -> Vec {
    if (t <= path.t_begin()) return v0;
    return parallel_transport(C, path.restricted(path.t_begin(), t), p).apply(v0);
  };
  // constant paths carry a zero-length stencil exactly
  return section_along_path_residual(C, path, transported, grid);
}

}  // namespace geoflow
