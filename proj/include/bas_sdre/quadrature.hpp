#pragma once

#include <vector>

namespace bas_sdre {

/// Gauss–Legendre rule mapped to [0, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Rules are computed once per order and cached; safe to call concurrently.
const GaussRule& gauss_legendre_unit(int order);

}  // namespace bas_sdre
