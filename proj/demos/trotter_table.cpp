// Error of the n-factor zig-zag composition against the flow of X+Y for two
// non-commuting rotation fields on the sphere; the error halves with each
// doubling of n.

#include <iostream>

#include "geoflow/geoflow.hpp"

int main() {
  using namespace geoflow;
  const Manifold sphere = make_sphere2();
  const VectorField X = vector_field_from_name(sphere, "rot:z");
  const VectorField Y = vector_field_from_name(sphere, "rot:x");
  Vec start(3);
  start << 0.0, 1.0, 0.0;
  const ManifoldPoint x{start};
  const ManifoldPoint reference = flow(add_fields(X, Y), 1.0, x);

  std::cout << "n      error\n";
  for (int n : {4, 8, 16, 32, 64, 128}) {
    const ManifoldPoint zigzag = trotter_flow(X, Y, 1.0, x, n);
    std::cout << n << "\t" << distance(sphere, zigzag, reference) << "\n";
  }
  return 0;
}
