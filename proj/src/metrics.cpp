#include "agentosi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace agentosi {

double percentile(std::vector<double> samples, double p) {
  if (samples.empty()) throw Error(Errc::InvalidLength, "percentile of no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, samples.size());
  return samples[rank - 1];
}

Json Summary::to_json() const {
  return Json{{"n", n},       {"median", median}, {"p10", p10}, {"p90", p90},
              {"mean", mean}, {"min", min},       {"max", max}};
}

Summary summarize(const std::vector<double>& samples) {
  Summary s;
  if (samples.empty()) return s;
  s.n = samples.size();
  s.median = percentile(samples, 50);
  s.p10 = percentile(samples, 10);
  s.p90 = percentile(samples, 90);
  s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(s.n);
  auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

}  // namespace agentosi
