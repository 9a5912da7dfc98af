#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace lazydual {

// Uneven split of samples across workers: p_i ~ Uniform[a, b], worker i
// receives a share proportional to p_i / sum_j p_j.
struct PartitionSpec {
  double a = 1.0;
  double b = 10.0;
  std::uint64_t seed = 0;
  std::vector<int> counts;
};

inline PartitionSpec partition_uneven(int total_samples, int n, double a,
                                      double b, std::uint64_t seed) {
  if (!(0.0 < a && a <= b)) throw std::invalid_argument("need 0 < a <= b");
  if (n < 1 || total_samples < n)
    throw std::invalid_argument("infeasible partition: total < n");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(a, b);
  std::vector<double> p(n);
  for (auto& v : p) v = unif(rng);
  const double psum = std::accumulate(p.begin(), p.end(), 0.0);

  // Floor the proportional shares, then hand out the remainder by largest
  // fractional part (ties by index); finally top up any empty worker from
  // the largest shard.
  std::vector<int> counts(n);
  std::vector<std::pair<double, int>> frac(n);
  int assigned = 0;
  for (int i = 0; i < n; ++i) {
    const double share = total_samples * p[i] / psum;
    counts[i] = static_cast<int>(share);
    frac[i] = {share - counts[i], i};
    assigned += counts[i];
  }
  std::sort(frac.begin(), frac.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  for (int r = 0; r < total_samples - assigned; ++r) ++counts[frac[r % n].second];
  for (int i = 0; i < n; ++i) {
    while (counts[i] == 0) {
      const int donor = static_cast<int>(
          std::max_element(counts.begin(), counts.end()) - counts.begin());
      --counts[donor];
      ++counts[i];
    }
  }

  PartitionSpec spec;
  spec.a = a;
  spec.b = b;
  spec.seed = seed;
  spec.counts = std::move(counts);
  return spec;
}

}  // namespace lazydual
