#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "siglift/rng.hpp"
#include "siglift/tensor.hpp"

namespace siglift {

// Brownian path with covariance sigma at time 1, sampled on t_j = j h, j = 0..steps.
struct BrownianGrid {
  std::size_t dim = 1;
  double h = 1.0;
  std::vector<double> values;  // (steps + 1) x dim, row-major; row 0 is zero
  Eigen::MatrixXd sigma_half;

  std::size_t steps() const { return dim == 0 || values.empty() ? 0 : values.size() / dim - 1; }
  double horizon() const { return h * static_cast<double>(steps()); }
  std::span<const double> row(std::size_t j) const { return {values.data() + j * dim, dim}; }
};

BrownianGrid sample_brownian(const Eigen::MatrixXd& sigma, double horizon, std::size_t steps,
                             std::uint64_t seed);

// W_N(t) = N^{-1/2} W(N t) on the grid h / N.
BrownianGrid rescale(const BrownianGrid& bm, double scaling);

// Halves the step by inserting Brownian-bridge midpoints; coarse points are kept.
BrownianGrid refine_bridge(const BrownianGrid& bm, Rng& rng);

// Streaming Ito-Euler lift: each step multiplies the state by (1, dW, h gamma, 0, ...),
// i.e. level n gains level(n-1) (x) dW + h level(n-2) (x) gamma (level 0 = 1).
class LiftStream {
 public:
  LiftStream(std::size_t dim, std::size_t depth, const Eigen::MatrixXd& gamma);

  void step(std::span<const double> dw, double h);
  const GradedTensor& state() const { return state_; }

 private:
  GradedTensor state_;
  std::vector<double> gamma_;  // row-major, word (i, j)
};

struct LiftPath {
  BrownianGrid bm;
  std::size_t depth = 0;
  Eigen::MatrixXd gamma;
  std::vector<GradedTensor> prefixes;  // lift(0, t_j), j = 0..steps
};

LiftPath lift_recursive(const BrownianGrid& bm, const Eigen::MatrixXd& gamma, std::size_t depth);

// lift(s, t) = prefix(s)^{-1} (x) prefix(t); s and t must be grid times.
GradedTensor lift_increment(const LiftPath& lift, double s, double t);

}  // namespace siglift
