#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "siglift/rng.hpp"
#include "siglift/signature.hpp"
#include "siglift/tensor.hpp"

namespace testing {

inline siglift::SamplePath random_path(std::size_t n, std::size_t d, std::uint64_t seed) {
  siglift::Rng rng(seed);
  siglift::SamplePath p;
  p.dim = d;
  p.values.resize(n * d);
  for (double& v : p.values) v = 2.0 * siglift::uniform01(rng) - 1.0;
  return p;
}

inline siglift::GradedTensor random_tensor(std::size_t d, std::size_t depth, std::uint64_t seed) {
  siglift::Rng rng(seed);
  siglift::GradedTensor t(d, depth);
  for (std::size_t k = 1; k <= depth; ++k)
    for (double& v : t.level(k)) v = 2.0 * siglift::uniform01(rng) - 1.0;
  return t;
}

inline siglift::SamplePath from_values(std::vector<double> v, std::size_t d = 1) {
  siglift::SamplePath p;
  p.dim = d;
  p.values = std::move(v);
  return p;
}

// max |a - b| / max(1, |b|) over all entries
inline double max_rel_diff(const siglift::GradedTensor& a, const siglift::GradedTensor& b) {
  double m = 0.0;
  for (std::size_t k = 1; k <= a.depth(); ++k) {
    auto x = a.level(k);
    auto y = b.level(k);
    for (std::size_t i = 0; i < x.size(); ++i)
      m = std::max(m, std::abs(x[i] - y[i]) / std::max(1.0, std::abs(y[i])));
  }
  return m;
}

inline double max_entry(const siglift::GradedTensor& a) {
  double m = 0.0;
  for (std::size_t k = 1; k <= a.depth(); ++k)
    for (double v : a.level(k)) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace testing
