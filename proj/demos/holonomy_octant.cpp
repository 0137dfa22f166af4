// Transports the tangent plane around the geodesic octant triangle of the
// unit sphere and prints the holonomy rotation angle next to the enclosed
// area (one eighth of the sphere), which it should equal.

#include <iostream>

#include "geoflow/geoflow.hpp"

int main() {
  using namespace geoflow;
  const Manifold sphere = make_sphere2();
  const Connection levi_civita = make_levi_civita_connection();
  const PathCurve octant = path_from_name(sphere, "octant");
  const TransportMap h = holonomy(levi_civita, octant);

  std::cout << "holonomy matrix:\n" << h.matrix << "\n";
  std::cout << "rotation angle: " << rotation_angle(h) << "\n";
  std::cout << "enclosed area:  " << kPi / 2.0 << "\n";
  return 0;
}
