// Exponential-decay curve demo: the drift fitted to the curve family keeps
// the dynamics consistent, and any nonzero diffusion breaks consistency no
// matter which drift is used.

#include <cstdio>

#include "jdts/nelson_siegel.hpp"
#include "jdts/presets.hpp"

using namespace jdts;

int main() {
  const std::vector<NSState> states{{0.03, -0.01, 0.02, 0.5},
                                    {0.05, 0.015, -0.01, 1.2}};
  const std::vector<double> grid{0.25, 0.5, 1.0, 2.0, 4.0, 8.0};

  auto fitted = load_preset("ns-trivial").model;
  auto quiet = ns_impossibility_scan(fitted, states, grid);
  std::printf("fitted drift, zero diffusion:  verdict %-12s max residual %.2e\n",
              quiet.verdict(), quiet.max_residual);

  // same drift, one diffusion entry switched on
  Mat a = Mat::Zero(4, 4);
  a(0, 0) = 0.01;
  auto noisy = JumpDiffusionModel::with_a(
      fitted.domain(), fitted.drift_fn(),
      CoefficientFunction::constant(flatten(a), 4), fitted.intensity_fn(),
      fitted.jumps());
  auto loud = ns_impossibility_scan(noisy, states, grid);
  std::printf("fitted drift, a11 = 0.01:      verdict %-12s max residual %.2e\n",
              loud.verdict(), loud.max_residual);

  std::printf("\nresidual by maturity at the first state:\n");
  for (const auto& node : loud.nodes)
    if (node.state.x1 == states[0].x1 && node.state.x4 == states[0].x4)
      std::printf("  tau %5.2f  residual %+.3e\n", node.tau, node.residual);
  return 0;
}
