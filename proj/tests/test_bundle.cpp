#include <doctest.h>

#include "geoflow/bundle.hpp"
#include "geoflow/registry.hpp"

using namespace geoflow;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST_CASE("covariant derivative: flat connection, constant section") {
  const VectorBundle tb = bundle_from_name("torus-triv2");
  const Connection zero = connection_from_name(tb, "zero");
  const Section s = section_from_name(tb, "const:e1");
  const VectorField X = vector_field_from_name(tb.base, "const:1,0");
  const Vec d = covariant_derivative(zero, X, s, ManifoldPoint{v2(0.4, 1.0)});
  CHECK(d.norm() <= 1e-15);
}

TEST_CASE("covariant derivative: rotJ analytic value") {
  const VectorBundle tb = bundle_from_name("torus-triv2");
  const Connection rot = connection_from_name(tb, "rotJ:0.3");
  const Section s = section_from_name(tb, "const:e1");
  const VectorField X = vector_field_from_name(tb.base, "const:1,0");
  const Vec d = covariant_derivative(rot, X, s, ManifoldPoint{v2(0, 0)});
  CHECK((d - v2(0.0, 0.3)).norm() <= 1e-12);
}

TEST_CASE("covariant derivative: equator rotation field is geodesic") {
  const Connection lc = make_levi_civita_connection();
  const VectorBundle sb = lc.bundle;
  const Section s = section_from_name(sb, "rotfield");
  const VectorField X = vector_field_from_name(sb.base, "rot:z");
  const Vec d = covariant_derivative(lc, X, s, ManifoldPoint{v3(1, 0, 0)});
  CHECK(d.norm() <= 1e-8);
}

TEST_CASE("covariant derivative: parameter validation") {
  const VectorBundle tb = bundle_from_name("torus-triv2");
  const Connection rot = connection_from_name(tb, "rotJ:0.3");
  const Section s = section_from_name(tb, "const:e1");
  const VectorField X = vector_field_from_name(tb.base, "const:1,0");
  CHECK_THROWS_AS(covariant_derivative(rot, X, s, ManifoldPoint{v2(0, 0)}, 0.0), ParameterError);
  CHECK_THROWS_AS(covariant_derivative(rot, X, s, ManifoldPoint{v2(0, 0)}, -1e-4), ParameterError);
}

TEST_CASE("connection form linearity in the tangent argument") {
  const VectorBundle tb = bundle_from_name("torus-triv2");
  const Connection rot = connection_from_name(tb, "rotJ:0.7");
  Rng rng(99);
  for (int i = 0; i < 100; ++i) {
    const Vec x = rng.gaussian_vec(2);
    const Vec v = rng.gaussian_vec(2);
    const Vec w = rng.gaussian_vec(2);
    const double a = rng.uniform(-2.0, 2.0);
    const double b = rng.uniform(-2.0, 2.0);
    const Mat lhs = rot.form(x, a * v + b * w);
    const Mat rhs = a * rot.form(x, v) + b * rot.form(x, w);
    CHECK(operator_norm(lhs - rhs) <= 1e-12);
  }
}

TEST_CASE("leibniz residual: constant factor and flat cases") {
  const VectorBundle tb = bundle_from_name("torus-triv2");
  const Connection rot = connection_from_name(tb, "rotJ:0.3");
  const Section s = section_from_name(tb, "const:e1");
  const VectorField X = vector_field_from_name(tb.base, "const:1,0");
  const ScalarField one = scalar_field_from_name(tb.base, "one");
  CHECK(leibniz_residual(rot, X, s, one, ManifoldPoint{v2(0.2, 0.5)}) <= 1e-9);

  const Connection zero = connection_from_name(tb, "zero");
  const ScalarField g = scalar_field_from_name(tb.base, "2+sin1");
  CHECK(leibniz_residual(zero, X, s, g, ManifoldPoint{v2(0.2, 0.5)}) <= 1e-6);
}

TEST_CASE("bundle invariants on seeded cases") {
  const VectorBundle tb = bundle_from_name("torus-triv2");
  const VectorBundle sb = bundle_from_name("sphere-tangent");
  const Connection rot = connection_from_name(tb, "rotJ:0.3");
  const Connection lc = make_levi_civita_connection();

  for (int which = 0; which < 2; ++which) {
    const VectorBundle& bundle = which == 0 ? tb : sb;
    const Connection& C = which == 0 ? rot : lc;
    const Manifold& m = bundle.base;
    for (int i = 0; i < 100; ++i) {
      Rng rng(case_seed(53, static_cast<std::uint64_t>(i)));
      const ManifoldPoint x = random_point(m, rng.next_u64());
      const VectorField X = seeded_vector_field(m, rng.next_u64());
      const VectorField Y = seeded_vector_field(m, rng.next_u64());
      const Section s = seeded_section(bundle, rng.next_u64());
      const ScalarField f = seeded_scalar_field(m, rng.next_u64());

      // additivity in the field argument
      const Vec add_gap = covariant_derivative(C, add_fields(X, Y), s, x) -
                          covariant_derivative(C, X, s, x) - covariant_derivative(C, Y, s, x);
      CHECK(add_gap.norm() <= 1e-6);

      // function-linearity in the field argument
      const Vec flin_gap = covariant_derivative(C, scale_field(f, X), s, x) -
                           f.value(x.coords) * covariant_derivative(C, X, s, x);
      CHECK(flin_gap.norm() <= 1e-6);

      // Leibniz rule
      CHECK(leibniz_residual(C, X, s, f, x) <= 1e-5);
    }
  }
}

TEST_CASE("sphere Levi-Civita rule is metric compatible along flow lines") {
  const Connection lc = make_levi_civita_connection();
  const VectorBundle sb = lc.bundle;
  const Manifold& sphere = sb.base;
  for (int i = 0; i < 100; ++i) {
    Rng rng(case_seed(61, static_cast<std::uint64_t>(i)));
    const ManifoldPoint x = random_point(sphere, rng.next_u64());
    const VectorField X = seeded_vector_field(sphere, rng.next_u64());
    const Section s = seeded_section(sb, rng.next_u64());
    const double h = 1e-4;
    const double np = s.eval(flow(X, h, x)).squaredNorm();
    const double nm = s.eval(flow(X, -h, x)).squaredNorm();
    const double lhs = (np - nm) / (2.0 * h);
    const double rhs = 2.0 * covariant_derivative(lc, X, s, x).dot(s.eval(x));
    CHECK(std::abs(lhs - rhs) <= 1e-5);
  }
}

TEST_CASE("sections stay in their fibers") {
  const VectorBundle sb = bundle_from_name("sphere-tangent");
  for (std::uint64_t k = 0; k < 20; ++k) {
    const Section s = seeded_section(sb, k);
    for (std::uint64_t j = 0; j < 10; ++j) {
      const ManifoldPoint x = random_point(sb.base, 17 * k + j);
      CHECK(std::abs(s.eval(x).dot(x.coords)) <= 1e-10);
    }
  }
  const Section rotfield = section_from_name(sb, "rotfield");
  for (std::uint64_t j = 0; j < 20; ++j) {
    const ManifoldPoint x = random_point(sb.base, j);
    CHECK(std::abs(rotfield.eval(x).dot(x.coords)) <= 1e-10);
  }
}

TEST_CASE("bundle construction validation") {
  CHECK_THROWS_AS(make_trivialized_bundle(make_flat_torus(2), 0, "bad"), InvalidDimensionError);
  const VectorBundle sb = bundle_from_name("sphere-tangent");
  CHECK(sb.rank == 2);
  CHECK(sb.fiber_storage_dim() == 3);
  const VectorBundle tb = bundle_from_name("torus-triv2");
  CHECK(tb.fiber_storage_dim() == 2);
}
