#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "geoflow/bundle.hpp"

namespace geoflow {

/// Positions of consecutive path pieces must agree within this.
inline constexpr double kJunctionTol = 1e-10;

/// A loop's endpoints must coincide within this.
inline constexpr double kLoopTol = 1e-9;

/// Smooth piece of a path: closed-form position and velocity on [t_begin, t_end].
struct PathPiece {
  double t_begin = 0.0;
  double t_end = 0.0;
  std::function<Vec(double)> position;
  std::function<Vec(double)> velocity;
};

/**
 * Piecewise-smooth parametrized curve on a manifold. Pieces carry exact
 * velocities (paths come from a closed-form registry, not from sampling), and
 * consecutive pieces meet continuously.
 */
class PathCurve {
 public:
  PathCurve(Manifold manifold, std::vector<PathPiece> pieces, std::string name = "")
      : manifold_(std::move(manifold)), pieces_(std::move(pieces)), name_(std::move(name)) {
    if (pieces_.empty()) throw DomainError("PathCurve: needs at least one piece");
    for (const auto& piece : pieces_)
      if (!(piece.t_end >= piece.t_begin))
        throw DomainError("PathCurve: piece domain must not be reversed");
    for (std::size_t i = 1; i < pieces_.size(); ++i) {
      if (std::abs(pieces_[i].t_begin - pieces_[i - 1].t_end) > kJunctionTol)
        throw DomainError("PathCurve: piece domains must be contiguous");
      const Vec a = pieces_[i - 1].position(pieces_[i - 1].t_end);
      const Vec b = pieces_[i].position(pieces_[i].t_begin);
      if (manifold_.distance(a, b) > kJunctionTol)
        throw DomainError("PathCurve: pieces do not meet continuously");
    }
  }

  const Manifold& manifold() const { return manifold_; }
  const std::vector<PathPiece>& pieces() const { return pieces_; }
  const std::string& name() const { return name_; }
  double t_begin() const { return pieces_.front().t_begin; }
  double t_end() const { return pieces_.back().t_end; }

  Vec position(double t) const { return piece_at(t).position(clamp(t)); }
  Vec velocity(double t) const { return piece_at(t).velocity(clamp(t)); }

  ManifoldPoint start() const { return make_point(manifold_, position(t_begin())); }
  ManifoldPoint end() const { return make_point(manifold_, position(t_end())); }

  /// Index of the piece whose closed domain contains t (ties go right, so a
  /// junction parameter belongs to the piece that starts there).
  std::size_t piece_index(double t) const {
    for (std::size_t i = 0; i < pieces_.size(); ++i)
      if (t < pieces_[i].t_end || i + 1 == pieces_.size()) return i;
    return pieces_.size() - 1;
  }

  /// Restriction to [a, b] (same parametrization, pieces clipped).
  PathCurve restricted(double a, double b) const {
    if (!(a <= b)) throw DomainError("PathCurve::restricted: need a <= b");
    if (a < t_begin() - kJunctionTol || b > t_end() + kJunctionTol)
      throw DomainError("PathCurve::restricted: [a, b] outside the path domain");
    std::vector<PathPiece> sub;
    for (const auto& piece : pieces_) {
      const double lo = std::max(a, piece.t_begin);
      const double hi = std::min(b, piece.t_end);
      if (hi < lo) continue;
      if (hi == lo && !(sub.empty() && a == b)) continue;
      sub.push_back(PathPiece{lo, hi, piece.position, piece.velocity});
    }
    if (sub.empty()) {
      // degenerate restriction at a single parameter
      const Vec x = position(a);
      auto pos = [x](double) { return x; };
      auto vel = [n = x.size()](double) { return Vec(Vec::Zero(n)); };
      sub.push_back(PathPiece{a, b, pos, vel});
    }
    return PathCurve(manifold_, std::move(sub), name_);
  }

  /// Orientation reversal; the domain [a, b] is kept and traversed backwards.
  PathCurve reversed() const {
    const double a = t_begin();
    const double b = t_end();
    std::vector<PathPiece> rev;
    for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it) {
      const auto pos = it->position;
      const auto vel = it->velocity;
      const double sum = a + b;
      rev.push_back(PathPiece{sum - it->t_end, sum - it->t_begin,
                              [pos, sum](double u) { return pos(sum - u); },
                              [vel, sum](double u) -> Vec { return -vel(sum - u); }});
    }
    return PathCurve(manifold_, std::move(rev), name_.empty() ? "" : name_ + "-reversed");
  }

 private:
  const PathPiece& piece_at(double t) const { return pieces_[piece_index(t)]; }

  double clamp(double t) const {
    return std::min(std::max(t, t_begin()), t_end());
  }

  Manifold manifold_;
  std::vector<PathPiece> pieces_;
  std::string name_;
};

/// Constant path at x over [0, 1].
inline PathCurve make_constant_path(const Manifold& m, const ManifoldPoint& x) {
  const Vec p = x.coords;
  const Eigen::Index n = p.size();
  return PathCurve(m,
                   {PathPiece{0.0, 1.0, [p](double) { return p; },
                              [n](double) { return Vec(Vec::Zero(n)); }}},
                   "const");
}

/// Orientation-preserving diffeomorphism [u_begin, u_end] -> path domain.
struct Reparametrization {
  double u_begin = 0.0;
  double u_end = 1.0;
  std::function<double(double)> map;
  std::function<double(double)> deriv;
  std::string name;
};

/// gamma composed with phi; pieces split at the preimages of gamma's junctions.
inline PathCurve reparametrize(const PathCurve& path, const Reparametrization& phi) {
  constexpr int kMonotoneSamples = 257;
  for (int i = 0; i < kMonotoneSamples; ++i) {
    const double u =
        phi.u_begin + (phi.u_end - phi.u_begin) * static_cast<double>(i) / (kMonotoneSamples - 1);
    if (!(phi.deriv(u) > 0.0))
      throw ReparametrizationError("reparametrize: phi' must stay positive");
  }
  if (std::abs(phi.map(phi.u_begin) - path.t_begin()) > 1e-9 ||
      std::abs(phi.map(phi.u_end) - path.t_end()) > 1e-9)
    throw ReparametrizationError("reparametrize: phi must map onto the path domain");

  // monotone bisection for phi^{ -1 }(t)
  auto invert = [&phi](double t) {
    double lo = phi.u_begin;
    double hi = phi.u_end;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (phi.map(mid) < t)
        lo = mid;
      else
        hi = mid;
      if (hi - lo < 1e-15) break;
    }
    return 0.5 * (lo + hi);
  };

  std::vector<PathPiece> out;
  for (const auto& piece : path.pieces()) {
    const double ua = piece.t_begin <= path.t_begin() ? phi.u_begin : invert(piece.t_begin);
    const double ub = piece.t_end >= path.t_end() ? phi.u_end : invert(piece.t_end);
    const auto pos = piece.position;
    const auto vel = piece.velocity;
    const auto map = phi.map;
    const auto deriv = phi.deriv;
    out.push_back(PathPiece{ua, ub, [pos, map](double u) { return pos(map(u)); },
                            [vel, map, deriv](double u) -> Vec { return deriv(u) * vel(map(u)); }});
  }
  return PathCurve(path.manifold(), std::move(out),
                   path.name().empty() ? "" : path.name() + "@" + phi.name);
}

/**
 * Invertible linear map between the fibers at a path's endpoints, expressed
 * in deterministic fiber frames (the global trivialization, or for the sphere
 * tangent bundle the orthonormal tangent frames below).
 */
struct TransportMap {
  ManifoldPoint source;
  ManifoldPoint target;
  Mat matrix;
  Mat source_frame;  // columns: fiber basis vectors in storage coordinates
  Mat target_frame;

  Vec apply(const Vec& v) const {
    return target_frame * (matrix * (source_frame.transpose() * v));
  }

  /// Inverse transport (target fiber back to the source fiber).
  Vec apply_inverse(const Vec& v) const {
    return source_frame *
           matrix.partialPivLu().solve(target_frame.transpose() * v);
  }
};

/**
 * Deterministic orthonormal basis of the tangent plane at unit vector x:
 * Gram-Schmidt of a fixed seed direction, with a fallback seed used near the
 * poles of the primary one. Second column is x cross the first, so (u, v, x)
 * is right-handed; holonomy angles are reported in this orientation.
 */
inline Mat sphere_tangent_frame(const Vec& x) {
  Vec u(3);
  u << 1.0, 1.0, 1.0;
  u /= std::sqrt(3.0);
  u -= u.dot(x) * x;
  if (u.norm() < 1e-6) {
    Vec w(3);
    w << 1.0, -1.0, 0.0;
    w /= std::sqrt(2.0);
    u = w - w.dot(x) * x;
  }
  u.normalize();
  const Vec v = cross3(x, u);
  Mat frame(3, 2);
  frame.col(0) = u;
  frame.col(1) = v;
  return frame;
}

/// Fiber frame used to express TransportMap matrices at a point.
inline Mat fiber_frame(const VectorBundle& bundle, const Vec& x) {
  if (bundle.kind == BundleKind::sphere_tangent) return sphere_tangent_frame(x);
  return Mat(Mat::Identity(bundle.rank, bundle.rank));
}

/// Basis of a fiber: `columns` holds rank linearly independent fiber vectors.
struct Frame {
  ManifoldPoint base;
  Mat columns;
};

inline constexpr double kFrameSingularFloor = 1e-8;

inline Frame make_frame(const VectorBundle& bundle, ManifoldPoint base, Mat columns) {
  if (columns.rows() != bundle.fiber_storage_dim() || columns.cols() != bundle.rank)
    throw DomainError("make_frame: wrong column shape for this bundle");
  if (smallest_singular_value(columns) < kFrameSingularFloor)
    throw DomainError("make_frame: columns are not linearly independent");
  return Frame{std::move(base), std::move(columns)};
}

/// Right GL(rank) action: column mixing by an invertible matrix.
inline Frame frame_acted(const Frame& frame, const Mat& g) {
  return Frame{frame.base, frame.columns * g};
}

namespace detail {

/// Derivative of the transported fiber columns at path parameter t:
/// C' = -A(c, c') C for a connection form, C' = -c (c' . C) for Levi-Civita.
inline Mat transport_rhs(const Connection& C, const Vec& pos, const Vec& vel, const Mat& cols) {
  if (C.levi_civita()) return -pos * (vel.transpose() * cols);
  return -C.form(pos, vel) * cols;
}

/// After a step, pin the columns back into the fiber at the current point
/// (removes the normal component that RK4 drift leaks in; no-op otherwise).
inline void reproject_columns(const Connection& C, const Vec& pos, Mat& cols) {
  if (C.levi_civita()) cols -= pos * (pos.transpose() * cols);
}

/// RK4 transport of fiber columns along one smooth piece.
inline void transport_piece(const Connection& C, const PathPiece& piece, const FlowParams& p,
                            Mat& cols) {
  const double duration = piece.t_end - piece.t_begin;
  if (duration == 0.0) return;
  const long long n = step_count(duration, p);
  const double h = duration / static_cast<double>(n);
  for (long long k = 0; k < n; ++k) {
    const double t = piece.t_begin + h * static_cast<double>(k);
    auto rhs = [&](double tau, const Mat& c) {
      return transport_rhs(C, piece.position(tau), piece.velocity(tau), c);
    };
    const Mat k1 = rhs(t, cols);
    const Mat k2 = rhs(t + 0.5 * h, cols + (0.5 * h) * k1);
    const Mat k3 = rhs(t + 0.5 * h, cols + (0.5 * h) * k2);
    const Mat k4 = rhs(t + h, cols + h * k3);
    cols += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!cols.allFinite())
      throw IntegrationError("non-finite parallel transport state", piece.position(t + h));
    reproject_columns(C, piece.position(t + h), cols);
  }
}

inline void require_path_on_base(const Connection& C, const PathCurve& path) {
  if (!same_manifold(path.manifold(), C.bundle.base))
    throw DomainError("parallel_transport: path is not on the connection's base manifold");
  for (const auto& piece : path.pieces()) {
    const double mid = 0.5 * (piece.t_begin + piece.t_end);
    if (!is_on_manifold(C.bundle.base, piece.position(mid)))
      throw DomainError("parallel_transport: path leaves the base manifold");
  }
}

}  // namespace detail

/**
 * Parallel transport along a piecewise-smooth path: solves the pullback
 * equation ds/dt + A(c(t), c'(t)) s = 0 piecewise (ambient Levi-Civita form
 * on the sphere) and returns the endpoint-to-endpoint linear map in the
 * deterministic fiber frames.
 */
inline TransportMap parallel_transport(const Connection& C, const PathCurve& path,
                                       const FlowParams& p = {}) {
  detail::require_path_on_base(C, path);
  const Vec x0 = path.position(path.t_begin());
  const Vec x1 = path.position(path.t_end());
  const Mat f0 = fiber_frame(C.bundle, C.bundle.base.retract(x0));
  Mat cols = f0;
  for (const auto& piece : path.pieces()) detail::transport_piece(C, piece, p, cols);
  const Mat f1 = fiber_frame(C.bundle, C.bundle.base.retract(x1));
  return TransportMap{make_point(C.bundle.base, x0), make_point(C.bundle.base, x1),
                      f1.transpose() * cols, f0, f1};
}

/// Operator-norm distance of transport over the constant path from the identity.
inline double check_constant_axiom(const Connection& C, const ManifoldPoint& x,
                                   const FlowParams& p = {}) {
  const TransportMap id = parallel_transport(C, make_constant_path(C.bundle.base, x), p);
  return operator_norm(id.matrix - Mat::Identity(id.matrix.rows(), id.matrix.cols()));
}

/// ||P(gamma o phi) - P(gamma)|| for an orientation-preserving phi.
inline double check_reparam_axiom(const Connection& C, const PathCurve& path,
                                  const Reparametrization& phi, const FlowParams& p = {}) {
  const TransportMap direct = parallel_transport(C, path, p);
  const TransportMap re = parallel_transport(C, reparametrize(path, phi), p);
  return operator_norm(direct.matrix - re.matrix);
}

/// ||P(gamma) - P(gamma_2) o P(gamma_1)|| with gamma split at t_split.
inline double check_juxtaposition_axiom(const Connection& C, const PathCurve& path, double t_split,
                                        const FlowParams& p = {}) {
  if (!(t_split > path.t_begin() + 1e-12) || !(t_split < path.t_end() - 1e-12))
    throw DegenerateSplitError("check_juxtaposition_axiom: split must be interior");
  const TransportMap whole = parallel_transport(C, path, p);
  const TransportMap first = parallel_transport(C, path.restricted(path.t_begin(), t_split), p);
  const TransportMap second = parallel_transport(C, path.restricted(t_split, path.t_end()), p);
  return operator_norm(whole.matrix - second.matrix * first.matrix);
}

/// Transport around a closed loop: the fiber automorphism at the basepoint.
inline TransportMap holonomy(const Connection& C, const PathCurve& loop,
                             const FlowParams& p = {}) {
  const Vec a = loop.position(loop.t_begin());
  const Vec b = loop.position(loop.t_end());
  if (loop.manifold().distance(a, b) > kLoopTol)
    throw NotALoopError("holonomy: path endpoints do not coincide");
  return parallel_transport(C, loop, p);
}

/// Signed rotation angle of the leading 2x2 block, in the frame orientation.
inline double rotation_angle(const TransportMap& t) {
  return std::atan2(t.matrix(1, 0), t.matrix(0, 0));
}

/// Unsigned rotation angle recovered from the trace (2x2 rotations only).
inline double rotation_angle_from_trace(const TransportMap& t) {
  const double c = std::clamp(t.matrix.trace() / 2.0, -1.0, 1.0);
  return std::acos(c);
}

/**
 * Flow of the lifted field on frames: moves the base point along the flow of
 * X for time t while transporting the frame columns along the flow line. The
 * joint system (point, columns) is integrated by one RK4 pass; the column
 * dynamics are linear, which is what makes the lift GL(rank)-equivariant to
 * rounding accuracy.
 */
inline Frame lift_flow_to_frames(const Connection& C, const VectorField& X, double t,
                                 const Frame& frame, const FlowParams& p = {}) {
  if (!same_manifold(X.manifold, C.bundle.base))
    throw DomainError("lift_flow_to_frames: X is not on the connection's base manifold");
  if (t == 0.0) return frame;
  const Manifold& m = C.bundle.base;
  const long long n = detail::step_count(t, p);
  const double h = t / static_cast<double>(n);
  Vec y = frame.base.coords;
  Mat cols = frame.columns;
  auto vel = [&](const Vec& q) {
    Vec v = X.components(m.retract(q));
    if (!v.allFinite()) throw IntegrationError("non-finite vector field value", q);
    return v;
  };
  for (long long k = 0; k < n; ++k) {
    const Vec k1y = vel(y);
    const Mat k1c = detail::transport_rhs(C, m.retract(y), k1y, cols);
    const Vec y2 = y + (0.5 * h) * k1y;
    const Vec k2y = vel(y2);
    const Mat k2c = detail::transport_rhs(C, m.retract(y2), k2y, cols + (0.5 * h) * k1c);
    const Vec y3 = y + (0.5 * h) * k2y;
    const Vec k3y = vel(y3);
    const Mat k3c = detail::transport_rhs(C, m.retract(y3), k3y, cols + (0.5 * h) * k2c);
    const Vec y4 = y + h * k3y;
    const Vec k4y = vel(y4);
    const Mat k4c = detail::transport_rhs(C, m.retract(y4), k4y, cols + h * k3c);
    y = m.retract(y + (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y));
    cols += (h / 6.0) * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
    detail::reproject_columns(C, y, cols);
  }
  return Frame{ManifoldPoint{std::move(y)}, std::move(cols)};
}

}  // namespace geoflow
