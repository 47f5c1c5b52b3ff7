#include "siglift/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "siglift/errors.hpp"

namespace siglift {

std::size_t int_pow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && r > std::numeric_limits<std::size_t>::max() / base)
      return std::numeric_limits<std::size_t>::max();
    r *= base;
  }
  return r;
}

GradedTensor::GradedTensor(std::size_t dim, std::size_t depth, std::size_t cap)
    : dim_(dim), depth_(depth) {
  require(dim >= 1, "tensor dimension must be positive");
  require(depth >= 1, "tensor depth must be positive");
  if (int_pow(dim, depth) > cap)
    throw BudgetError("d^depth = " + std::to_string(dim) + "^" + std::to_string(depth) +
                      " exceeds the level cap " + std::to_string(cap));
  levels_.resize(depth);
  for (std::size_t k = 1; k <= depth; ++k) levels_[k - 1].assign(int_pow(dim, k), 0.0);
}

std::size_t GradedTensor::level_size(std::size_t k) const {
  require(k >= 1 && k <= depth_, "level index out of range");
  return levels_[k - 1].size();
}

std::span<double> GradedTensor::level(std::size_t k) {
  require(k >= 1 && k <= depth_, "level index out of range");
  return levels_[k - 1];
}

std::span<const double> GradedTensor::level(std::size_t k) const {
  require(k >= 1 && k <= depth_, "level index out of range");
  return levels_[k - 1];
}

void add_tensor_product(std::span<const double> a, std::span<const double> b,
                        std::span<double> out) {
  const std::size_t nb = b.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ai = a[i];
    if (ai == 0.0) continue;
    double* row = out.data() + i * nb;
    for (std::size_t j = 0; j < nb; ++j) row[j] += ai * b[j];
  }
}

static bool is_power_of(std::size_t n, std::size_t dim) {
  if (n == 0) return false;
  while (n > 1) {
    if (dim <= 1 || n % dim != 0) return dim == 1 && n == 1;
    n /= dim;
  }
  return true;
}

std::vector<double> tensor_product(std::span<const double> a, std::span<const double> b,
                                   std::size_t dim) {
  require(dim >= 1, "tensor dimension must be positive");
  require(is_power_of(a.size(), dim) && is_power_of(b.size(), dim),
          "tensor_product: array sizes are not powers of the same dimension");
  std::vector<double> out(a.size() * b.size(), 0.0);
  add_tensor_product(a, b, out);
  return out;
}

GradedTensor chen_combine(const GradedTensor& a, const GradedTensor& b) {
  require(a.same_shape(b), "chen_combine: shape mismatch");
  GradedTensor r(a.dim(), a.depth());
  for (std::size_t n = 1; n <= a.depth(); ++n) {
    auto out = r.level(n);
    auto an = a.level(n);
    auto bn = b.level(n);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = an[i] + bn[i];
    for (std::size_t k = 1; k < n; ++k) add_tensor_product(a.level(k), b.level(n - k), out);
  }
  return r;
}

std::vector<double> chen_level(const GradedTensor& a, const GradedTensor& b, std::size_t n) {
  require(a.same_shape(b), "chen_level: shape mismatch");
  auto an = a.level(n);
  auto bn = b.level(n);
  std::vector<double> out(an.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = an[i] + bn[i];
  for (std::size_t k = 1; k < n; ++k) add_tensor_product(a.level(k), b.level(n - k), out);
  return out;
}

// Product of two elements with vanishing level 0.
static GradedTensor multiply_nilpotent(const GradedTensor& p, const GradedTensor& q) {
  GradedTensor r(p.dim(), p.depth());
  for (std::size_t n = 2; n <= p.depth(); ++n)
    for (std::size_t k = 1; k < n; ++k) add_tensor_product(p.level(k), q.level(n - k), r.level(n));
  return r;
}

GradedTensor group_inverse(const GradedTensor& a) {
  GradedTensor neg_x(a.dim(), a.depth());
  for (std::size_t n = 1; n <= a.depth(); ++n) {
    auto src = a.level(n);
    auto dst = neg_x.level(n);
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = -src[i];
  }
  GradedTensor result = neg_x;
  GradedTensor power = neg_x;
  for (std::size_t k = 2; k <= a.depth(); ++k) {
    power = multiply_nilpotent(power, neg_x);
    // (-x)^k has nothing below level k
    for (std::size_t n = k; n <= a.depth(); ++n) {
      auto src = power.level(n);
      auto dst = result.level(n);
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i];
    }
  }
  return result;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double tensor_norm(const GradedTensor& a, std::size_t k) { return max_abs(a.level(k)); }

GradedTensor scale_levels(const GradedTensor& a, double factor) {
  GradedTensor r = a;
  double f = 1.0;
  for (std::size_t k = 1; k <= a.depth(); ++k) {
    f *= factor;
    for (double& x : r.level(k)) x *= f;
  }
  return r;
}

}  // namespace siglift
