// Hubbard dimer at half filling: ground-state energy against U, the
// density-matrix functional at the ground state, and the site-density
// functional along the charge-transfer coordinate.

#include "rdmlab/rdmlab.hpp"

#include <cstdio>

int main() {
  using namespace rdmlab;

  std::printf("%6s %12s %12s %12s\n", "U", "E", "F_RDM", "gap");
  for (double u : {0.0, 1.0, 2.0, 4.0, 8.0}) {
    const OperatorBundle b = build_hubbard(2, true, 1.0, u);
    const SystemSpec sys = b.system();
    const Matrix v = b.potential_or_zero();
    const double energy = e_rdm(v, sys);
    const FunctionalValue f = f_rdm_primal(ground_state_rdm(v, sys), sys);
    std::printf("%6.2f %12.8f %12.8f %12.2e\n", u, energy, finite(f).value, finite(f).gap);
  }

  const OperatorBundle b = build_hubbard(2, true, 1.0, 4.0);
  const SystemSpec sys = b.system();
  const PVM pvm = b.pvm();
  std::printf("\n%6s %12s %12s\n", "rho_0", "F", "gap");
  for (int k = 0; k <= 8; ++k) {
    const double r0 = 0.25 * k;
    RealVector values(2);
    values << r0, 2.0 - r0;
    const FunctionalValue f = f_dft(Density{values}, sys, pvm);
    std::printf("%6.2f %12.8f %12.2e\n", r0, finite(f).value, finite(f).gap);
  }
  return 0;
}
