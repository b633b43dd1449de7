// Prints the sign pattern of Grace vs GraceI power at k = 10.

#include <cstdio>

#include "grace/power.hpp"

int main() {
  const auto grid = grace::figure1_grid();
  std::printf("rows: rho from -0.9 to 0.9, columns: l from -1 to 1\n");
  double rho = grid.panel_a.front().rho;
  for (const auto& pt : grid.panel_a) {
    if (pt.rho != rho) {
      std::printf("   boundary l* = %+.3f\n", grace::grace_vs_gracei_boundary(rho));
      rho = pt.rho;
    }
    if (pt.l == -1.0) std::printf("%+.1f ", pt.rho);
    std::printf("%c", grace::to_char(pt.mark));
  }
  std::printf("   boundary l* = %+.3f\n", grace::grace_vs_gracei_boundary(rho));
}
