// Shareability bound across the Werner family.
#include "qshare/monogamy.hpp"

#include <cstdio>

int main() {
  using namespace qshare;
  const OptBudget budget;
  std::printf("%6s %10s %10s %10s %s\n", "p", "E_f", "C<-", "G<-", "N");
  for (int i = 4; i <= 10; ++i) {
    const double p = i / 10.0;
    const DensityMatrix rho = werner_state(p);
    const BoundReport b = sharability_bound(rho, budget, 1);
    const double c = classical_correlation(rho, 1, budget, 2).value;
    std::printf("%6.2f %10.6f %10.6f %10.6f %s\n", p, eof_2q(rho), c, b.g_arrow_ab,
                b.n_max ? std::to_string(*b.n_max).c_str() : "unbounded");
  }
}
