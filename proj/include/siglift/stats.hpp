#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace siglift {

double normal_cdf(double x);
double normal_upper(double x);  // 1 - Phi(x) without cancellation
double normal_quantile(double p);

// P(sup |B| > lambda) for a Brownian bridge.
double kolmogorov_upper(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct EnergyResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t permutations = 0;
};

// Two-sample energy statistic with a permutation p-value; rows are points in R^dim.
EnergyResult energy_test(std::span<const double> x, std::span<const double> y, std::size_t dim,
                         std::size_t permutations, std::uint64_t seed);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr = 0.0;
  double ci_lo = 0.0;  // 95% t-interval for the slope
  double ci_hi = 0.0;
  std::size_t points = 0;
};

LinearFit ols_fit(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> v);
double mean(std::span<const double> v);
double pearson_correlation(std::span<const double> x, std::span<const double> y);

}  // namespace siglift
