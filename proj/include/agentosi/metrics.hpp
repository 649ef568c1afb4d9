#pragma once

#include <cstddef>
#include <vector>

#include "agentosi/canonical_json.hpp"

namespace agentosi {

// Nearest-rank percentile: the ceil(p/100 * n)-th smallest sample, p in
// (0, 100]. p = 0 gives the minimum. Throws Errc::InvalidLength on no samples.
double percentile(std::vector<double> samples, double p);

struct Summary {
  std::size_t n = 0;
  double median = 0;
  double p10 = 0;
  double p90 = 0;
  double mean = 0;
  double min = 0;
  double max = 0;

  Json to_json() const;
};

// Empty input gives an all-zero summary.
Summary summarize(const std::vector<double>& samples);

}  // namespace agentosi
