// Relative form bound a(b) of a softened 1D Coulomb well against the grid
// Laplacian, for several grid sizes.

#include "rdmlab/rdmlab.hpp"

#include <cstdio>

int main() {
  using namespace rdmlab;
  std::printf("%6s", "n");
  for (int k = 0; k <= 6; ++k) std::printf("   a(1e%d)", k);
  std::printf("\n");
  for (int n : {16, 32, 64}) {
    const OperatorBundle b = build_coulomb1d(n, 20.0, 0.1, 1.0);
    const BoundCurve curve = bound_curve(*b.potential, b.kinetic());
    std::printf("%6d", n);
    for (const FormBound& p : curve.points) std::printf(" %9.2e", p.a);
    std::printf("\n");
  }
  return 0;
}
