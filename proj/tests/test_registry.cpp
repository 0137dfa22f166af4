#include <doctest.h>

#include "geoflow/registry.hpp"

using namespace geoflow;

TEST_CASE("manifold names") {
  CHECK(manifold_from_name("torus2").name == "torus2");
  CHECK(manifold_from_name("sphere2").name == "sphere2");
  CHECK_THROWS_AS(manifold_from_name("klein"), ConfigError);
}

TEST_CASE("field names resolve with the right manifold") {
  const Manifold torus = manifold_from_name("torus2");
  const Manifold sphere = manifold_from_name("sphere2");
  CHECK_NOTHROW(vector_field_from_name(torus, "const:1,0"));
  CHECK_NOTHROW(vector_field_from_name(torus, "shear"));
  CHECK_NOTHROW(vector_field_from_name(torus, "zero"));
  CHECK_NOTHROW(vector_field_from_name(sphere, "rot:x"));
  CHECK_NOTHROW(vector_field_from_name(sphere, "rot:y"));
  CHECK_NOTHROW(vector_field_from_name(sphere, "rot:z"));
  CHECK_THROWS_AS(vector_field_from_name(sphere, "const:1,0,0"), ConfigError);
  CHECK_THROWS_AS(vector_field_from_name(torus, "rot:z"), ConfigError);
  CHECK_THROWS_AS(vector_field_from_name(torus, "const:1"), ConfigError);
  CHECK_THROWS_AS(vector_field_from_name(torus, "const:a,b"), ConfigError);
  CHECK_THROWS_AS(vector_field_from_name(sphere, "rot:w"), ConfigError);
  CHECK_THROWS_AS(vector_field_from_name(torus, "wibble"), ConfigError);
}

TEST_CASE("scalar field names") {
  const Manifold torus = manifold_from_name("torus2");
  const Manifold sphere = manifold_from_name("sphere2");
  CHECK(scalar_field_from_name(torus, "one").positivity_floor == 1.0);
  CHECK(scalar_field_from_name(torus, "const:2.5").positivity_floor == 2.5);
  CHECK_NOTHROW(scalar_field_from_name(torus, "2+sin1"));
  CHECK_NOTHROW(scalar_field_from_name(sphere, "2+z"));
  CHECK_THROWS_AS(scalar_field_from_name(torus, "2+z"), ConfigError);
  CHECK_THROWS_AS(scalar_field_from_name(torus, "const:-1"), PositivityError);
  CHECK_THROWS_AS(scalar_field_from_name(torus, "const:x"), ConfigError);
}

TEST_CASE("bundle and connection names") {
  CHECK_NOTHROW(bundle_from_name("torus-triv2"));
  CHECK_NOTHROW(bundle_from_name("sphere-tangent"));
  CHECK_THROWS_AS(bundle_from_name("mobius"), ConfigError);

  const VectorBundle tb = bundle_from_name("torus-triv2");
  const VectorBundle sb = bundle_from_name("sphere-tangent");
  CHECK_NOTHROW(connection_from_name(tb, "zero"));
  CHECK_NOTHROW(connection_from_name(tb, "rotJ:0.3"));
  CHECK_NOTHROW(connection_from_name(sb, "levi-civita"));
  CHECK_THROWS_AS(connection_from_name(sb, "rotJ:0.3"), ConfigError);
  CHECK_THROWS_AS(connection_from_name(tb, "levi-civita"), ConfigError);
  CHECK_THROWS_AS(connection_from_name(tb, "rotJ:oops"), ConfigError);

  CHECK(bundle_for_connection("levi-civita", manifold_from_name("sphere2")).name ==
        "sphere-tangent");
  CHECK(bundle_for_connection("rotJ:0.3", manifold_from_name("torus2")).name == "torus-triv2");
  CHECK_THROWS_AS(bundle_for_connection("levi-civita", manifold_from_name("torus2")), ConfigError);
  CHECK_THROWS_AS(bundle_for_connection("rotJ:0.3", manifold_from_name("sphere2")), ConfigError);
}

TEST_CASE("section names") {
  const VectorBundle tb = bundle_from_name("torus-triv2");
  const VectorBundle sb = bundle_from_name("sphere-tangent");
  CHECK_NOTHROW(section_from_name(tb, "const:e1"));
  CHECK_NOTHROW(section_from_name(tb, "const:e2"));
  CHECK_NOTHROW(section_from_name(tb, "const:0.5,-1"));
  CHECK_NOTHROW(section_from_name(sb, "rotfield"));
  CHECK_NOTHROW(section_from_name(tb, "seeded:12"));
  CHECK_NOTHROW(section_from_name(sb, "seeded:12"));
  CHECK_THROWS_AS(section_from_name(sb, "const:e1"), ConfigError);
  CHECK_THROWS_AS(section_from_name(tb, "rotfield"), ConfigError);
  CHECK_THROWS_AS(section_from_name(tb, "const:e9"), ConfigError);
  CHECK_THROWS_AS(section_from_name(tb, "seeded:x"), ConfigError);
}

TEST_CASE("path names and shapes") {
  const Manifold torus = manifold_from_name("torus2");
  const Manifold sphere = manifold_from_name("sphere2");

  const PathCurve octant = path_from_name(sphere, "octant");
  CHECK(octant.pieces().size() == 3);
  CHECK((octant.position(octant.t_begin()) - octant.position(octant.t_end())).norm() <= 1e-12);

  const PathCurve arc = path_from_name(sphere, "equator-arc:1.5");
  CHECK(arc.t_end() == doctest::Approx(1.5));
  CHECK((arc.velocity(0.7).norm()) == doctest::Approx(1.0));

  const PathCurve rect = path_from_name(torus, "rect:1,0.5");
  CHECK(rect.pieces().size() == 4);
  CHECK(torus.distance(rect.position(rect.t_begin()), rect.position(rect.t_end())) <= 1e-12);

  const PathCurve line = path_from_name(torus, "coord-line:2,1.5");
  CHECK((line.position(1.0) - line.position(0.0)).norm() == doctest::Approx(1.5));

  CHECK_NOTHROW(path_from_name(torus, "const"));
  CHECK_NOTHROW(path_from_name(sphere, "const:0,1,0"));
  CHECK_NOTHROW(path_from_name(torus, "const:1,2"));

  CHECK_THROWS_AS(path_from_name(torus, "octant"), ConfigError);
  CHECK_THROWS_AS(path_from_name(sphere, "rect:1,1"), ConfigError);
  CHECK_THROWS_AS(path_from_name(sphere, "equator-arc:-1"), ConfigError);
  CHECK_THROWS_AS(path_from_name(torus, "coord-line:3,1"), ConfigError);
  CHECK_THROWS_AS(path_from_name(torus, "spiral"), ConfigError);
}

TEST_CASE("reparametrization registry") {
  const Manifold sphere = manifold_from_name("sphere2");
  const PathCurve arc = path_from_name(sphere, "equator-arc:2");
  for (const char* name : {"affine", "sine"}) {
    const Reparametrization phi = reparam_from_name(arc, name);
    CHECK(phi.map(phi.u_begin) == doctest::Approx(arc.t_begin()));
    CHECK(phi.map(phi.u_end) == doctest::Approx(arc.t_end()));
    for (int i = 0; i <= 32; ++i) {
      const double u = phi.u_begin + (phi.u_end - phi.u_begin) * i / 32.0;
      CHECK(phi.deriv(u) > 0.0);
    }
  }
  CHECK_THROWS_AS(reparam_from_name(arc, "zigzag"), ConfigError);
}

TEST_CASE("seeded generators are deterministic and well-scaled") {
  const Manifold sphere = manifold_from_name("sphere2");
  const Manifold torus = manifold_from_name("torus2");
  const VectorBundle sb = bundle_from_name("sphere-tangent");

  const Vec probe = random_point(sphere, 1).coords;
  CHECK(seeded_vector_field(sphere, 5).components(probe) ==
        seeded_vector_field(sphere, 5).components(probe));
  CHECK(seeded_section(sb, 5).value(probe) == seeded_section(sb, 5).value(probe));
  CHECK(seeded_scalar_field(sphere, 5).value(probe) == seeded_scalar_field(sphere, 5).value(probe));

  for (std::uint64_t k = 0; k < 50; ++k) {
    const ScalarField f = seeded_scalar_field(torus, k);
    CHECK(f.positivity_floor > 0.0);
    for (std::uint64_t j = 0; j < 10; ++j) {
      const double val = f.value(random_point(torus, j).coords);
      CHECK(val >= f.positivity_floor - 1e-12);
    }
  }

  for (std::uint64_t k = 0; k < 50; ++k) {
    const Mat g = seeded_group_element(2, k);
    CHECK(condition_number(g) <= 100.0);
    CHECK(std::abs(g.determinant()) > 0.0);
  }

  for (std::uint64_t k = 0; k < 40; ++k) {
    const Manifold& m = k % 2 == 0 ? torus : sphere;
    const PathCurve path = seeded_path(m, k);
    CHECK(path.t_end() > path.t_begin());
    for (const auto& piece : path.pieces()) {
      CHECK(piece.t_end - piece.t_begin >= 2.0 * kDerivativeStep);
      CHECK(m.constraint_residual(piece.position(0.5 * (piece.t_begin + piece.t_end))) <= 1e-9);
    }
  }
}
