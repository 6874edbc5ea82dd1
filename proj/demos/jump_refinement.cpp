// Grid refinement study for the jump part of Bu.
//
// A piecewise constant field with a tilted interface is pushed through the
// symmetric gradient (n = 2) and the deviatoric symmetric gradient (n = 3);
// the tube sum of the discrete measure is compared against B(nu)(a - b).

#include "bvb/bvb.hpp"

#include <cstdio>

using namespace bvb;

namespace {

void study(const char* label, const DiffOperator& op, const JumpTriple& jump) {
  const std::vector<double> spacings{1.0 / 16, 1.0 / 32, 1.0 / 64};
  const auto conv = structure_convergence(op, jump, 0.05, -0.5, 0.5, spacings);
  std::printf("%s\n", label);
  std::printf("  %10s %14s\n", "h", "rel. error");
  for (std::size_t i = 0; i < conv.h.size(); ++i) {
    std::printf("  %10.6f %14.6e\n", conv.h[i], conv.errors[i]);
  }
  std::printf("  fitted order %.3f\n\n", conv.order);

  // recover the triple from the sampled field at the finest level
  const Grid g(op.n(), -0.5, 0.5, spacings.back());
  const auto field = synth_jump(constant_field(jump.a, op.n()), constant_field(jump.b, op.n()),
                                jump.nu, 0.05, g);
  const RealVector x = 0.05 * jump.nu;
  if (const auto found = jump_detect(field, x, {0.3, 0.15, 0.075})) {
    std::printf("  detected nu =");
    for (Eigen::Index i = 0; i < found->nu.size(); ++i) std::printf(" %.5f", found->nu(i));
    std::printf("\n\n");
  } else {
    std::printf("  no jump detected\n\n");
  }
}

RealVector vec(std::initializer_list<double> xs) {
  RealVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

}  // namespace

int main() {
  study("symmetric gradient, n = 2, nu = (0.6, 0.8)", catalog("symmetric_gradient", 2),
        {vec({1.0, 0.0}), vec({0.0, 0.5}), vec({0.6, 0.8})});
  study("deviatoric symmetric gradient, n = 3, nu = (1, 2, 2)/3", catalog("deviatoric", 3),
        {vec({1.0, 0.0, 0.0}), vec({0.0, 1.0, 0.0}), vec({1.0, 2.0, 2.0}) / 3.0});
  return 0;
}
