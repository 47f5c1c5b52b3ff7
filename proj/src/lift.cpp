#include "siglift/lift.hpp"

#include <cmath>

#include "siglift/errors.hpp"
#include "siglift/linalg.hpp"

namespace siglift {

BrownianGrid sample_brownian(const Eigen::MatrixXd& sigma, double horizon, std::size_t steps,
                             std::uint64_t seed) {
  require(steps >= 1, "sample_brownian: need at least one step");
  require(horizon > 0.0, "sample_brownian: horizon must be positive");
  require(is_psd(sigma, 1e-8), "sample_brownian: covariance is not PSD");
  BrownianGrid bm;
  bm.dim = static_cast<std::size_t>(sigma.rows());
  bm.h = horizon / static_cast<double>(steps);
  bm.sigma_half = sqrt_psd(sigma);
  bm.values.assign((steps + 1) * bm.dim, 0.0);
  Rng rng(derive_seed(seed, 1));
  const auto d = static_cast<Eigen::Index>(bm.dim);
  Eigen::VectorXd z(d);
  const double sh = std::sqrt(bm.h);
  for (std::size_t j = 1; j <= steps; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) z(i) = standard_normal(rng);
    Eigen::VectorXd inc = bm.sigma_half * z * sh;
    for (std::size_t i = 0; i < bm.dim; ++i)
      bm.values[j * bm.dim + i] = bm.values[(j - 1) * bm.dim + i] + inc(static_cast<Eigen::Index>(i));
  }
  return bm;
}

BrownianGrid rescale(const BrownianGrid& bm, double scaling) {
  require(scaling > 0.0, "rescale: scaling must be positive");
  BrownianGrid out = bm;
  out.h = bm.h / scaling;
  const double f = 1.0 / std::sqrt(scaling);
  for (double& v : out.values) v *= f;
  return out;
}

BrownianGrid refine_bridge(const BrownianGrid& bm, Rng& rng) {
  BrownianGrid out;
  out.dim = bm.dim;
  out.h = bm.h / 2.0;
  out.sigma_half = bm.sigma_half;
  const std::size_t m = bm.steps();
  const std::size_t d = bm.dim;
  out.values.assign((2 * m + 1) * d, 0.0);
  const double sd = std::sqrt(bm.h / 4.0);
  Eigen::VectorXd z(static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j <= m; ++j)
    for (std::size_t i = 0; i < d; ++i) out.values[2 * j * d + i] = bm.values[j * d + i];
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < d; ++i) z(static_cast<Eigen::Index>(i)) = standard_normal(rng);
    Eigen::VectorXd noise = bm.sigma_half * z * sd;
    for (std::size_t i = 0; i < d; ++i)
      out.values[(2 * j + 1) * d + i] =
          0.5 * (bm.values[j * d + i] + bm.values[(j + 1) * d + i]) + noise(static_cast<Eigen::Index>(i));
  }
  return out;
}

LiftStream::LiftStream(std::size_t dim, std::size_t depth, const Eigen::MatrixXd& gamma)
    : state_(dim, depth), gamma_(dim * dim, 0.0) {
  if (gamma.size() != 0) {
    require(gamma.rows() == static_cast<Eigen::Index>(dim) && gamma.cols() == gamma.rows(),
            "lift: gamma must be d x d");
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j)
        gamma_[i * dim + j] = gamma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
}

void LiftStream::step(std::span<const double> dw, double h) {
  const std::size_t depth = state_.depth();
  for (std::size_t n = depth; n >= 1; --n) {
    auto out = state_.level(n);
    if (n == 1) {
      for (std::size_t i = 0; i < dw.size(); ++i) out[i] += dw[i];
      break;
    }
    add_tensor_product(state_.level(n - 1), dw, out);
    if (n == 2) {
      for (std::size_t i = 0; i < gamma_.size(); ++i) out[i] += h * gamma_[i];
    } else {
      auto lower = state_.level(n - 2);
      const std::size_t g = gamma_.size();
      for (std::size_t a = 0; a < lower.size(); ++a) {
        const double la = h * lower[a];
        if (la == 0.0) continue;
        for (std::size_t b = 0; b < g; ++b) out[a * g + b] += la * gamma_[b];
      }
    }
  }
}

LiftPath lift_recursive(const BrownianGrid& bm, const Eigen::MatrixXd& gamma, std::size_t depth) {
  require(depth >= 1, "lift depth must be >= 1");
  LiftPath lift;
  lift.bm = bm;
  lift.depth = depth;
  lift.gamma = gamma.size() ? gamma
                            : Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(bm.dim),
                                                    static_cast<Eigen::Index>(bm.dim));
  LiftStream stream(bm.dim, depth, lift.gamma);
  const std::size_t m = bm.steps();
  lift.prefixes.reserve(m + 1);
  lift.prefixes.push_back(stream.state());
  std::vector<double> dw(bm.dim);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < bm.dim; ++i)
      dw[i] = bm.values[(j + 1) * bm.dim + i] - bm.values[j * bm.dim + i];
    stream.step(dw, bm.h);
    lift.prefixes.push_back(stream.state());
  }
  return lift;
}

static std::size_t on_grid(double t, double h, std::size_t steps) {
  const double q = t / h;
  const double r = std::round(q);
  require(r >= 0.0 && std::abs(q - r) <= 1e-9 * std::max(1.0, q), "time is off the lift grid");
  require(static_cast<std::size_t>(r) <= steps, "time beyond the lift horizon");
  return static_cast<std::size_t>(r);
}

GradedTensor lift_increment(const LiftPath& lift, double s, double t) {
  require(s <= t, "lift_increment: s > t");
  const std::size_t i = on_grid(s, lift.bm.h, lift.bm.steps());
  const std::size_t j = on_grid(t, lift.bm.h, lift.bm.steps());
  return chen_combine(group_inverse(lift.prefixes[i]), lift.prefixes[j]);
}

}  // namespace siglift
