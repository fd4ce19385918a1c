#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace alignlab {

struct TransportPlan {
  double cost = 0.0;        // sum of flow * cost in the caller's mass units
  long pivots = 0;
  /// Nonzero flows (source index, target index, mass).
  struct Entry {
    int i, j;
    double mass;
  };
  std::vector<Entry> flows;
};

/// Exact balanced transportation problem min sum c_ij g_ij, sum_j g_ij = a_i, sum_i g_ij = b_j,
/// solved by a primal network simplex with block-search pivoting. Masses are integerized at
/// relative resolution `resolution`; the totals must agree to 1e-10 relative.
TransportPlan solve_transport(const std::vector<double>& a, const std::vector<double>& b,
                              const std::function<double(int, int)>& cost,
                              double resolution = 1e-12);

}  // namespace alignlab
