#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace siglift {

// Upper bound on d^depth for dense level storage.
inline constexpr std::size_t kDefaultLevelCap = 1'000'000;

// Element of the truncated tensor algebra T^(depth)(R^d) whose level-0 entry is
// the scalar 1. Level k is a dense row-major array of d^k entries indexed by the
// word (i_1, ..., i_k), flat index i_1 d^{k-1} + ... + i_k.
class GradedTensor {
 public:
  GradedTensor() = default;
  GradedTensor(std::size_t dim, std::size_t depth, std::size_t cap = kDefaultLevelCap);

  static GradedTensor zero(std::size_t dim, std::size_t depth) { return {dim, depth}; }

  std::size_t dim() const { return dim_; }
  std::size_t depth() const { return depth_; }
  std::size_t level_size(std::size_t k) const;

  // k in 1..depth
  std::span<double> level(std::size_t k);
  std::span<const double> level(std::size_t k) const;

  bool same_shape(const GradedTensor& other) const {
    return dim_ == other.dim_ && depth_ == other.depth_;
  }

  friend bool operator==(const GradedTensor&, const GradedTensor&) = default;

 private:
  std::size_t dim_ = 0;
  std::size_t depth_ = 0;
  std::vector<std::vector<double>> levels_;
};

std::size_t int_pow(std::size_t base, std::size_t exp);

// d^j array times d^k array -> d^(j+k) array.
std::vector<double> tensor_product(std::span<const double> a, std::span<const double> b,
                                   std::size_t dim);

// out += a (x) b, where out has size |a|*|b|.
void add_tensor_product(std::span<const double> a, std::span<const double> b,
                        std::span<double> out);

// Product in the truncated algebra (Chen combination of consecutive increments).
GradedTensor chen_combine(const GradedTensor& a, const GradedTensor& b);

// Level n of chen_combine(a, b) only.
std::vector<double> chen_level(const GradedTensor& a, const GradedTensor& b, std::size_t n);

// Truncated Neumann series sum_{k=0}^{depth} (-x)^{(x)k}, x = a minus its unit.
GradedTensor group_inverse(const GradedTensor& a);

// Max absolute entry of level k.
double tensor_norm(const GradedTensor& a, std::size_t k);
double max_abs(std::span<const double> v);

// Level k scaled by factor^k.
GradedTensor scale_levels(const GradedTensor& a, double factor);

}  // namespace siglift
