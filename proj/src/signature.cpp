#include "siglift/signature.hpp"

#include <cmath>
#include <functional>
#include <string>

#include "siglift/errors.hpp"

namespace siglift {

const char* to_string(PathKind kind) {
  switch (kind) {
    case PathKind::Discrete: return "discrete";
    case PathKind::Continuous: return "continuous";
    case PathKind::Suspension: return "suspension";
  }
  return "discrete";
}

PathKind path_kind_from_string(const std::string& s) {
  if (s == "discrete") return PathKind::Discrete;
  if (s == "continuous") return PathKind::Continuous;
  if (s == "suspension") return PathKind::Suspension;
  throw ValidationError("unknown path kind '" + s + "'");
}

std::vector<double> SamplePath::empirical_mean() const {
  std::vector<double> m(dim, 0.0);
  const std::size_t n = size();
  if (n == 0) return m;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < dim; ++i) m[i] += values[k * dim + i];
  for (double& x : m) x /= static_cast<double>(n);
  return m;
}

PrefixSignatureStream::PrefixSignatureStream(std::size_t dim, std::size_t depth)
    : state_(dim, depth), scratch_(dim) {}

void PrefixSignatureStream::push(std::span<const double> x) {
  require(x.size() == state_.dim(), "sample dimension mismatch");
  for (std::size_t n = state_.depth(); n >= 2; --n)
    add_tensor_product(state_.level(n - 1), x, state_.level(n));
  auto l1 = state_.level(1);
  for (std::size_t i = 0; i < x.size(); ++i) l1[i] += x[i];
  ++consumed_;
}

void PrefixSignatureStream::push_scaled(std::span<const double> x, double scale) {
  for (std::size_t i = 0; i < x.size(); ++i) scratch_[i] = x[i] * scale;
  push(scratch_);
}

GradedTensor sig_discrete(const SamplePath& path, std::size_t depth, std::size_t u,
                          std::size_t v) {
  require(u <= v && v <= path.size(), "sig_discrete: index range out of bounds");
  PrefixSignatureStream stream(path.dim, depth);
  for (std::size_t k = u; k < v; ++k) stream.push(path.row(k));
  return stream.state();
}

GradedTensor sig_brute(const SamplePath& path, std::size_t depth, std::size_t u, std::size_t v,
                       double work_cap) {
  require(u <= v && v <= path.size(), "sig_brute: index range out of bounds");
  if (std::pow(static_cast<double>(v - u), static_cast<double>(depth)) > work_cap)
    throw BudgetError("sig_brute: (v-u)^depth exceeds the work cap");
  GradedTensor out(path.dim, depth);
  const std::size_t d = path.dim;
  for (std::size_t level = 1; level <= depth; ++level) {
    auto dst = out.level(level);
    // Enumerate u <= k_1 < ... < k_level < v; carry the running product of rows.
    std::function<void(std::size_t, std::size_t, const std::vector<double>&)> rec =
        [&](std::size_t taken, std::size_t first, const std::vector<double>& prod) {
          if (taken == level) {
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += prod[i];
            return;
          }
          for (std::size_t k = first; k + (level - taken) <= v; ++k) {
            auto x = path.row(k);
            std::vector<double> next(prod.size() * d);
            for (std::size_t a = 0; a < prod.size(); ++a)
              for (std::size_t b = 0; b < d; ++b) next[a * d + b] = prod[a] * x[b];
            rec(taken + 1, k + 1, next);
          }
        };
    rec(0, u, std::vector<double>{1.0});
  }
  return out;
}

GradedTensor sig_increment(const GradedTensor& prefix_s, const GradedTensor& prefix_t) {
  require(prefix_s.same_shape(prefix_t), "sig_increment: shape mismatch");
  return chen_combine(group_inverse(prefix_s), prefix_t);
}

std::vector<GradedTensor> prefix_signatures(const SamplePath& path, std::size_t depth,
                                            std::span<const std::size_t> at) {
  std::vector<GradedTensor> out;
  out.reserve(at.size());
  PrefixSignatureStream stream(path.dim, depth);
  std::size_t j = 0;
  for (std::size_t target : at) {
    require(target <= path.size(), "prefix_signatures: checkpoint beyond path length");
    require(target >= j, "prefix_signatures: checkpoints must be nondecreasing");
    for (; j < target; ++j) stream.push(path.row(j));
    out.push_back(stream.state());
  }
  return out;
}

static std::size_t grid_index(double t, double delta) {
  const double q = t / delta;
  const double r = std::round(q);
  require(r >= 0.0 && std::abs(q - r) <= 1e-9 * std::max(1.0, std::abs(q)),
          "time " + std::to_string(t) + " is not on the sample grid");
  return static_cast<std::size_t>(r);
}

GradedTensor sig_continuous(const SamplePath& path, std::size_t depth, double u, double v) {
  require(path.kind != PathKind::Discrete, "sig_continuous needs a continuous-time path");
  require(path.delta > 0.0, "grid step must be positive");
  require(u <= v, "sig_continuous: u > v");
  const std::size_t iu = grid_index(u, path.delta);
  const std::size_t iv = grid_index(v, path.delta);
  require(iv <= path.size(), "sig_continuous: interval extends past the sampled grid");
  PrefixSignatureStream stream(path.dim, depth);
  for (std::size_t k = iu; k < iv; ++k) stream.push_scaled(path.row(k), path.delta);
  return stream.state();
}

GradedTensor normalize(const GradedTensor& sig, double scaling) {
  require(scaling >= 1.0, "normalize: scaling must be >= 1");
  return scale_levels(sig, 1.0 / std::sqrt(scaling));
}

}  // namespace siglift
