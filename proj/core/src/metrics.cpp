#include "btbsim/metrics.hpp"

namespace btbsim {

ResolutionBreakdown MetricsReport::resolution_total() const {
  ResolutionBreakdown sum;
  for (const auto& r : resolution) {
    sum.count += r.count;
    sum.fetch += r.fetch;
    sum.decode += r.decode;
    sum.execute += r.execute;
  }
  return sum;
}

}  // namespace btbsim
