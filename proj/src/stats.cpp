#include "siglift/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "siglift/errors.hpp"
#include "siglift/rng.hpp"

namespace siglift {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_upper(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, "normal_quantile: p outside (0, 1)");
  static const boost::math::normal_distribution<double> n01;
  return boost::math::quantile(n01, p);
}

double kolmogorov_upper(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

static double ks_p(double d, double effective_n) {
  const double s = std::sqrt(effective_n);
  return kolmogorov_upper((s + 0.12 + 0.11 / s) * d);
}

KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) {
  require(!sample.empty(), "ks: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, ks_p(d, n)};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "ks: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, ks_p(d, na * nb / (na + nb))};
}

EnergyResult energy_test(std::span<const double> x, std::span<const double> y, std::size_t dim,
                         std::size_t permutations, std::uint64_t seed) {
  require(dim >= 1 && x.size() % dim == 0 && y.size() % dim == 0, "energy: ragged samples");
  const std::size_t n = x.size() / dim, m = y.size() / dim, total = n + m;
  require(n >= 2 && m >= 2, "energy: need at least two points per sample");
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  std::vector<double> dist(total * total, 0.0);
  for (std::size_t i = 0; i < total; ++i)
    for (std::size_t j = i + 1; j < total; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        const double diff = pooled[i * dim + c] - pooled[j * dim + c];
        s += diff * diff;
      }
      dist[i * total + j] = dist[j * total + i] = std::sqrt(s);
    }
  // With labels fixed by membership, the statistic only needs the within-group sums
  // because the grand total of all pairwise distances is invariant.
  double grand = 0.0;
  for (double v : dist) grand += v;
  auto statistic = [&](const std::vector<char>& in_x) {
    double sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < total; ++i)
      for (std::size_t j = 0; j < total; ++j) {
        if (in_x[i] && in_x[j]) sxx += dist[i * total + j];
        else if (!in_x[i] && !in_x[j]) syy += dist[i * total + j];
      }
    const double sxy = 0.5 * (grand - sxx - syy);
    const double dn = static_cast<double>(n), dm = static_cast<double>(m);
    return dn * dm / (dn + dm) * (2.0 * sxy / (dn * dm) - sxx / (dn * dn) - syy / (dm * dm));
  };
  std::vector<char> labels(total, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n), 1);
  EnergyResult r;
  r.statistic = statistic(labels);
  r.permutations = permutations;
  Rng rng(derive_seed(seed, 0x45));
  std::size_t exceed = 0;
  for (std::size_t b = 0; b < permutations; ++b) {
    for (std::size_t i = total - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i + 1));
      std::swap(labels[i], labels[std::min(j, i)]);
    }
    if (statistic(labels) >= r.statistic) ++exceed;
  }
  r.p_value = static_cast<double>(exceed + 1) / static_cast<double>(permutations + 1);
  return r;
}

LinearFit ols_fit(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "ols: need at least two points");
  LinearFit f;
  f.points = x.size();
  const double n = static_cast<double>(x.size());
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, "ols: constant regressor");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() == 2) {
    f.stderr = std::numeric_limits<double>::infinity();
    f.ci_lo = -f.stderr;
    f.ci_hi = f.stderr;
    return f;
  }
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - f.intercept - f.slope * x[i];
    rss += e * e;
  }
  f.stderr = std::sqrt(rss / (n - 2.0) / sxx);
  const boost::math::students_t_distribution<double> t(n - 2.0);
  const double q = boost::math::quantile(boost::math::complement(t, 0.025));
  f.ci_lo = f.slope - q * f.stderr;
  f.ci_hi = f.slope + q * f.stderr;
  return f;
}

double median(std::vector<double> v) {
  require(!v.empty(), "median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double mean(std::span<const double> v) {
  require(!v.empty(), "mean of an empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "correlation: need paired samples");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace siglift
