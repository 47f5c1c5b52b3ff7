#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "siglift/tensor.hpp"

namespace siglift {

enum class PathKind { Discrete, Continuous, Suspension };

const char* to_string(PathKind kind);
PathKind path_kind_from_string(const std::string& s);

// One ceiling segment of a suspension flow: the observable is constant on
// [start, start + length).
struct Segment {
  double start = 0.0;
  double length = 0.0;
  std::vector<double> value;
};

// n x d samples of a stationary series. Discrete paths have unit time step;
// continuous and suspension paths are grid samples xi(j * delta).
struct SamplePath {
  PathKind kind = PathKind::Discrete;
  std::size_t dim = 1;
  double delta = 1.0;
  bool centered = true;
  std::uint64_t seed = 0;
  std::vector<double> values;  // row-major

  // Optional generator state, aligned with samples (or with segments for suspensions).
  std::vector<int> states;
  std::vector<unsigned __int128> doubling;
  std::vector<Segment> segments;

  std::size_t size() const { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const double> row(std::size_t k) const { return {values.data() + k * dim, dim}; }
  std::vector<double> empirical_mean() const;
};

// Running signature Sigma(0, j) of the samples pushed so far.
class PrefixSignatureStream {
 public:
  PrefixSignatureStream(std::size_t dim, std::size_t depth);

  void push(std::span<const double> x);
  void push_scaled(std::span<const double> x, double scale);

  const GradedTensor& state() const { return state_; }
  std::size_t consumed() const { return consumed_; }

 private:
  GradedTensor state_;
  std::vector<double> scratch_;
  std::size_t consumed_ = 0;
};

// sum over u <= k_1 < ... < k_n < v of xi(k_1) (x) ... (x) xi(k_n), all n <= depth.
GradedTensor sig_discrete(const SamplePath& path, std::size_t depth, std::size_t u, std::size_t v);

// Same contract as sig_discrete by explicit nested enumeration of index tuples.
// Refuses when (v - u)^depth exceeds work_cap.
GradedTensor sig_brute(const SamplePath& path, std::size_t depth, std::size_t u, std::size_t v,
                       double work_cap = 1e7);

// Sigma(s, t) from the prefix states at s and t.
GradedTensor sig_increment(const GradedTensor& prefix_s, const GradedTensor& prefix_t);

// Prefix states Sigma(0, j) for each j in `at` (nondecreasing, each <= n).
std::vector<GradedTensor> prefix_signatures(const SamplePath& path, std::size_t depth,
                                            std::span<const std::size_t> at);

// Left-point Riemann iterated integral over [u, v]; u and v must be grid times.
GradedTensor sig_continuous(const SamplePath& path, std::size_t depth, double u, double v);

// Level k scaled by N^{-k/2}.
GradedTensor normalize(const GradedTensor& sig, double scaling);

}  // namespace siglift
