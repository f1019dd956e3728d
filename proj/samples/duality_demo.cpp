// Koashi-Winter duality on a few random three-qubit pure states, and a
// separable state extended to four copies of B.
#include "qshare/extension.hpp"
#include "qshare/monogamy.hpp"

#include <cstdio>

int main() {
  using namespace qshare;
  const OptBudget budget;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const DualityReport d = duality_check(random_pure_state({2, 2, 2}, s), budget, s);
    std::printf("S_A=%.6f  E_f(A:B)=%.6f  C<-(A:C)=%.6f  residual=%+.2e\n", d.s_a, d.eof_ab, d.cc_ac, d.residual);
  }

  const PureState zero = PureState::basis({2}, 0), one = PureState::basis({2}, 1);
  const SeparableDecomposition decomp{{0.5, 0.5}, {zero, one}, {zero, one}};
  const DensityMatrix ext = build(decomp, 4);
  const Validation v = validate(ext, decomp.target());
  std::printf("4-extension of the classically correlated state: %s (deviation %.1e)\n", v.valid ? "valid" : "invalid",
              v.deviation);
}
