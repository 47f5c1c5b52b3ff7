#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "siglift/tensor.hpp"

namespace siglift {

// Two-parameter functional on grid indices: eval(i, j) = |gamma(t_i, t_j)| for i <= j.
struct TwoParamEval {
  std::size_t points = 0;
  std::function<double(std::size_t, std::size_t)> eval;
};

struct PvarResult {
  double norm = 0.0;
  std::vector<std::size_t> partition;  // optimal grid indices, first i0 and last i1
};

inline constexpr std::size_t kPvarWorkGuard = 20000;

// (max over i0 = j_0 < ... < j_r = i1 of sum f(j_k, j_{k+1})^p)^{1/p} by the O(m^2)
// dynamic program V(j) = max_{i<j} V(i) + f(i, j)^p. Ties go to fewer points.
PvarResult pvar_norm(const TwoParamEval& f, double p, std::size_t i0, std::size_t i1,
                     bool allow_large = false);

// p/nu-variation of the level-nu increments of A - B, both given as prefix states on
// the same grid.
PvarResult pvar_distance(std::span<const GradedTensor> a, std::span<const GradedTensor> b,
                         std::size_t level, double p, bool allow_large = false);

// max_j |A(0, t_j) - B(0, t_j)| at the given level.
double sup_distance(std::span<const GradedTensor> a, std::span<const GradedTensor> b,
                    std::size_t level);

}  // namespace siglift
