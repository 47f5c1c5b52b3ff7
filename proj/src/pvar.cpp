#include "siglift/pvar.hpp"

#include <cmath>
#include <limits>

#include "siglift/errors.hpp"

namespace siglift {

PvarResult pvar_norm(const TwoParamEval& f, double p, std::size_t i0, std::size_t i1,
                     bool allow_large) {
  require(p > 1.0, "p-variation needs p > 1");
  require(i0 <= i1 && i1 < f.points, "p-variation: empty or out-of-range index interval");
  const std::size_t m = i1 - i0 + 1;
  if (m > kPvarWorkGuard && !allow_large)
    throw BudgetError("p-variation over " + std::to_string(m) +
                      " grid points needs explicit opt-in to the O(m^2) cost");
  std::vector<double> value(m, 0.0);
  std::vector<std::size_t> count(m, 0), parent(m, 0);
  for (std::size_t j = 1; j < m; ++j) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_count = 0, best_parent = 0;
    for (std::size_t i = 0; i < j; ++i) {
      const double v = value[i] + std::pow(f.eval(i0 + i, i0 + j), p);
      if (v > best || (v == best && count[i] + 1 < best_count)) {
        best = v;
        best_count = count[i] + 1;
        best_parent = i;
      }
    }
    value[j] = best;
    count[j] = best_count;
    parent[j] = best_parent;
  }
  PvarResult r;
  r.norm = std::pow(value[m - 1], 1.0 / p);
  std::vector<std::size_t> rev{i1};
  for (std::size_t j = m - 1; j != 0; j = parent[j]) rev.push_back(i0 + parent[j]);
  r.partition.assign(rev.rbegin(), rev.rend());
  return r;
}

static void check_streams(std::span<const GradedTensor> a, std::span<const GradedTensor> b,
                          std::size_t level) {
  require(a.size() == b.size() && !a.empty(), "prefix streams live on different grids");
  require(a[0].dim() == b[0].dim(), "prefix streams have different dimensions");
  require(level >= 1 && level <= a[0].depth() && level <= b[0].depth(),
          "requested level exceeds the prefix depth");
}

PvarResult pvar_distance(std::span<const GradedTensor> a, std::span<const GradedTensor> b,
                         std::size_t level, double p, bool allow_large) {
  check_streams(a, b, level);
  const double q = p / static_cast<double>(level);
  require(q > 1.0, "p/nu must exceed 1");
  if (a.size() > kPvarWorkGuard && !allow_large)
    throw BudgetError("p-variation distance over " + std::to_string(a.size()) +
                      " grid points needs explicit opt-in to the O(m^2) cost");
  std::vector<GradedTensor> inv_a, inv_b;
  inv_a.reserve(a.size());
  inv_b.reserve(b.size());
  for (const auto& x : a) inv_a.push_back(group_inverse(x));
  for (const auto& x : b) inv_b.push_back(group_inverse(x));
  const std::size_t len = a[0].level_size(level);
  std::vector<double> ga(len), gb(len);
  auto level_inc = [&](const GradedTensor& inv, const GradedTensor& t, std::vector<double>& out) {
    auto x = inv.level(level);
    auto y = t.level(level);
    for (std::size_t i = 0; i < len; ++i) out[i] = x[i] + y[i];
    for (std::size_t k = 1; k < level; ++k) add_tensor_product(inv.level(k), t.level(level - k), out);
  };
  TwoParamEval f;
  f.points = a.size();
  f.eval = [&](std::size_t i, std::size_t j) {
    if (i == j) return 0.0;
    level_inc(inv_a[i], a[j], ga);
    level_inc(inv_b[i], b[j], gb);
    double m = 0.0;
    for (std::size_t k = 0; k < len; ++k) m = std::max(m, std::abs(ga[k] - gb[k]));
    return m;
  };
  return pvar_norm(f, q, 0, a.size() - 1, true);
}

double sup_distance(std::span<const GradedTensor> a, std::span<const GradedTensor> b,
                    std::size_t level) {
  check_streams(a, b, level);
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    auto x = a[j].level(level);
    auto y = b[j].level(level);
    for (std::size_t k = 0; k < x.size(); ++k) m = std::max(m, std::abs(x[k] - y[k]));
  }
  return m;
}

}  // namespace siglift
