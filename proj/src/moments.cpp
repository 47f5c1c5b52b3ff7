#include "siglift/moments.hpp"

#include <cmath>
#include <functional>
#include <vector>

#include "siglift/errors.hpp"
#include "siglift/linalg.hpp"
#include "siglift/rng.hpp"

namespace siglift {

namespace {

// Lagged product sums, total and per contiguous block of starting indices.
struct LagSums {
  std::size_t n = 0, lags = 0, blocks = 0, d = 0;
  std::vector<Eigen::MatrixXd> total;               // [l]
  std::vector<std::vector<Eigen::MatrixXd>> part;   // [b][l]
  std::vector<std::vector<double>> part_count;      // [b][l]

  LagSums(std::span<const double> values, std::size_t dim, std::size_t max_lag, std::size_t nblocks)
      : n(values.size() / dim), lags(max_lag), blocks(nblocks), d(dim) {
    const auto D = static_cast<Eigen::Index>(d);
    total.assign(lags + 1, Eigen::MatrixXd::Zero(D, D));
    part.assign(blocks, std::vector<Eigen::MatrixXd>(lags + 1, Eigen::MatrixXd::Zero(D, D)));
    part_count.assign(blocks, std::vector<double>(lags + 1, 0.0));
    std::vector<double> acc(d * d);
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::size_t lo = b * n / blocks;
      const std::size_t hi = (b + 1) * n / blocks;
      for (std::size_t l = 0; l <= lags; ++l) {
        std::fill(acc.begin(), acc.end(), 0.0);
        const std::size_t end = std::min(hi, n > l ? n - l : 0);
        if (d == 1) {
          double s = 0.0;
          for (std::size_t k = lo; k < end; ++k) s += values[k] * values[k + l];
          acc[0] = s;
        } else {
          for (std::size_t k = lo; k < end; ++k) {
            const double* x = values.data() + k * d;
            const double* y = values.data() + (k + l) * d;
            for (std::size_t i = 0; i < d; ++i)
              for (std::size_t j = 0; j < d; ++j) acc[i * d + j] += x[i] * y[j];
          }
        }
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = 0; j < d; ++j)
            part[b][l](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc[i * d + j];
        part_count[b][l] = end > lo ? static_cast<double>(end - lo) : 0.0;
        total[l] += part[b][l];
      }
    }
  }

  std::vector<Eigen::MatrixXd> autocov() const {
    std::vector<Eigen::MatrixXd> c(lags + 1);
    for (std::size_t l = 0; l <= lags; ++l) c[l] = total[l] / static_cast<double>(n - l);
    return c;
  }

  // Autocovariances with block b removed.
  std::vector<Eigen::MatrixXd> autocov_without(std::size_t b) const {
    std::vector<Eigen::MatrixXd> c(lags + 1);
    for (std::size_t l = 0; l <= lags; ++l) {
      const double cnt = static_cast<double>(n - l) - part_count[b][l];
      c[l] = (total[l] - part[b][l]) / std::max(cnt, 1.0);
    }
    return c;
  }
};

struct Estimate {
  Eigen::MatrixXd sigma, gamma;
};

void jackknife(const std::vector<Estimate>& loo, CovarianceReport& r) {
  const auto B = static_cast<double>(loo.size());
  const auto D = r.sigma.rows();
  Eigen::MatrixXd ms = Eigen::MatrixXd::Zero(D, D), mg = Eigen::MatrixXd::Zero(D, D);
  Eigen::MatrixXd asym_mean = Eigen::MatrixXd::Zero(D, D);
  for (const auto& e : loo) {
    ms += e.sigma;
    mg += e.gamma;
    asym_mean += e.gamma - e.gamma.transpose();
  }
  ms /= B;
  mg /= B;
  asym_mean /= B;
  Eigen::MatrixXd vs = Eigen::MatrixXd::Zero(D, D), vg = vs, va = vs;
  for (const auto& e : loo) {
    vs += (e.sigma - ms).cwiseAbs2();
    vg += (e.gamma - mg).cwiseAbs2();
    va += (e.gamma - e.gamma.transpose() - asym_mean).cwiseAbs2();
  }
  const double f = (B - 1.0) / B;
  r.stderr_sigma = (vs * f).cwiseSqrt();
  r.stderr_gamma = (vg * f).cwiseSqrt();
  Eigen::MatrixXd se_asym = (va * f).cwiseSqrt();
  Eigen::MatrixXd asym = r.gamma - r.gamma.transpose();
  r.asymmetric_gamma = false;
  for (Eigen::Index i = 0; i < D; ++i)
    for (Eigen::Index j = 0; j < D; ++j)
      if (i != j && std::abs(asym(i, j)) > 3.0 * se_asym(i, j) + 1e-14) r.asymmetric_gamma = true;
}

Estimate discrete_estimate(const std::vector<Eigen::MatrixXd>& c) {
  Estimate e;
  e.gamma = Eigen::MatrixXd::Zero(c[0].rows(), c[0].cols());
  for (std::size_t l = 1; l < c.size(); ++l) e.gamma += c[l];
  e.sigma = c[0] + Eigen::MatrixXd(e.gamma + e.gamma.transpose());
  return e;
}

// Trapezoid integral of w(r) * C(r) over [0, upper], C sampled at r = l * delta
// and linearly interpolated between grid points.
Eigen::MatrixXd trapezoid(const std::vector<Eigen::MatrixXd>& c, double delta, double upper,
                          const std::function<double(double)>& weight) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(c[0].rows(), c[0].cols());
  for (std::size_t l = 0; l + 1 < c.size(); ++l) {
    const double r0 = static_cast<double>(l) * delta;
    if (r0 >= upper - 1e-12) break;
    const double r1 = std::min(r0 + delta, upper);
    const double frac = (r1 - r0) / delta;
    Eigen::MatrixXd c1 = c[l] + (c[l + 1] - c[l]) * frac;
    acc += 0.5 * (r1 - r0) * (weight(r0) * c[l] + weight(r1) * c1);
  }
  return acc;
}

}  // namespace

std::size_t default_lag_window(std::size_t n) {
  return static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(n)) - 1e-12));
}

CovarianceReport estimate_sigma_gamma(const SamplePath& path, std::size_t lag_window) {
  const std::size_t n = path.size();
  require(n >= 1, "estimate_sigma_gamma: empty path");
  require(lag_window * 10 <= n, "lag window must satisfy L < n/10");
  const std::size_t B = std::min<std::size_t>(kJackknifeBlocks, n);
  LagSums sums(path.values, path.dim, lag_window, B);
  CovarianceReport r;
  auto c = sums.autocov();
  auto est = discrete_estimate(c);
  r.sigma = est.sigma;
  r.gamma = est.gamma;
  r.c0 = c[0];
  r.f_corr = Eigen::MatrixXd::Zero(r.sigma.rows(), r.sigma.cols());
  r.lag_window = lag_window;
  std::vector<Estimate> loo;
  for (std::size_t b = 0; b < B; ++b) loo.push_back(discrete_estimate(sums.autocov_without(b)));
  jackknife(loo, r);
  r.min_eigenvalue = min_eigenvalue(r.sigma);
  return r;
}

CovarianceReport estimate_gamma_continuous(const SamplePath& path, double lag_window) {
  require(path.kind != PathKind::Discrete, "estimate_gamma_continuous needs a continuous-time path");
  require(path.delta > 0.0, "grid step must be positive");
  require(lag_window >= 1.0, "continuous lag window must be at least one time unit");
  const std::size_t n = path.size();
  const double span = static_cast<double>(n) * path.delta;
  require(span >= lag_window, "grid span shorter than the lag window");
  const auto lags = static_cast<std::size_t>(std::ceil(lag_window / path.delta - 1e-9));
  require(lags < n, "grid span shorter than the lag window");
  const std::size_t B = std::min<std::size_t>(kJackknifeBlocks, n);
  LagSums sums(path.values, path.dim, lags, B);
  const double delta = path.delta;
  auto estimate = [&](const std::vector<Eigen::MatrixXd>& c, Eigen::MatrixXd* f_out) {
    Estimate e;
    e.gamma = trapezoid(c, delta, lag_window, [](double) { return 1.0; });
    if (f_out) *f_out = trapezoid(c, delta, 1.0, [](double r) { return 1.0 - r; });
    e.sigma = e.gamma + e.gamma.transpose();
    return e;
  };
  CovarianceReport r;
  auto c = sums.autocov();
  auto est = estimate(c, &r.f_corr);
  r.sigma = est.sigma;
  r.gamma = est.gamma;
  r.c0 = c[0];
  r.lag_window = static_cast<std::size_t>(std::ceil(lag_window));
  std::vector<Estimate> loo;
  for (std::size_t b = 0; b < B; ++b) loo.push_back(estimate(sums.autocov_without(b), nullptr));
  jackknife(loo, r);
  r.min_eigenvalue = min_eigenvalue(r.sigma);
  return r;
}

CovarianceReport estimate_gamma_suspension(const SamplePath& eta, std::span<const Segment> segments,
                                           std::size_t lag_window) {
  const std::size_t n = eta.size();
  require(segments.size() >= n, "segment table shorter than the eta sequence");
  require(lag_window * 10 <= n, "lag window must satisfy L < n/10");
  const std::size_t d = eta.dim;
  const auto D = static_cast<Eigen::Index>(d);
  const std::size_t B = std::min<std::size_t>(kJackknifeBlocks, n);
  LagSums sums(eta.values, d, lag_window, B);

  // Per-block sums of the closed-form within-segment double integral
  // g_i g_j tau^2 / 2 (observable constant along each segment).
  std::vector<Eigen::MatrixXd> within(B, Eigen::MatrixXd::Zero(D, D));
  std::vector<double> within_count(B, 0.0);
  Eigen::MatrixXd within_total = Eigen::MatrixXd::Zero(D, D);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t m = b * n / B; m < (b + 1) * n / B; ++m) {
      const auto& seg = segments[m];
      require(seg.value.size() == d, "segment dimension mismatch");
      const double half_sq = 0.5 * seg.length * seg.length;
      for (Eigen::Index i = 0; i < D; ++i)
        for (Eigen::Index j = 0; j < D; ++j)
          within[b](i, j) += half_sq * seg.value[static_cast<std::size_t>(i)] *
                             seg.value[static_cast<std::size_t>(j)];
      within_count[b] += 1.0;
    }
    within_total += within[b];
  }

  CovarianceReport r;
  auto c = sums.autocov();
  auto est = discrete_estimate(c);
  r.f_corr = within_total / static_cast<double>(n);
  r.sigma = est.sigma;
  r.gamma = est.gamma + r.f_corr;
  r.c0 = c[0];
  r.lag_window = lag_window;
  std::vector<Estimate> loo;
  for (std::size_t b = 0; b < B; ++b) {
    auto e = discrete_estimate(sums.autocov_without(b));
    e.gamma += (within_total - within[b]) / std::max(1.0, static_cast<double>(n) - within_count[b]);
    loo.push_back(e);
  }
  jackknife(loo, r);
  r.min_eigenvalue = min_eigenvalue(r.sigma);
  return r;
}

// ---------------------------------------------------------------------------

static nlohmann::json mat_json(const Eigen::MatrixXd& m) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(row);
  }
  return j;
}

static Eigen::MatrixXd json_mat(const nlohmann::json& j) {
  require(j.is_array() && !j.empty(), "expected a matrix");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = j.at(r).at(c).get<double>();
  return m;
}

nlohmann::json to_json(const CovarianceReport& r) {
  nlohmann::json j;
  j["sigma"] = mat_json(r.sigma);
  j["gamma"] = mat_json(r.gamma);
  j["f_corr"] = mat_json(r.f_corr);
  j["lag_window"] = r.lag_window;
  j["stderr"] = mat_json(r.stderr_sigma);
  j["stderr_gamma"] = mat_json(r.stderr_gamma);
  j["c0"] = mat_json(r.c0);
  j["min_eigenvalue"] = r.min_eigenvalue;
  j["asymmetric_gamma"] = r.asymmetric_gamma;
  return j;
}

CovarianceReport covariance_report_from_json(const nlohmann::json& j) {
  try {
    CovarianceReport r;
    r.sigma = json_mat(j.at("sigma"));
    r.gamma = j.contains("gamma") ? json_mat(j["gamma"])
                                  : Eigen::MatrixXd::Zero(r.sigma.rows(), r.sigma.cols());
    r.f_corr = j.contains("f_corr") ? json_mat(j["f_corr"])
                                    : Eigen::MatrixXd::Zero(r.sigma.rows(), r.sigma.cols());
    r.lag_window = j.value("lag_window", std::size_t{0});
    if (j.contains("stderr")) r.stderr_sigma = json_mat(j["stderr"]);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed covariance report: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

CharFnGap char_fn_gap(const ProcessSpec& spec, std::size_t n, const Eigen::VectorXd& w,
                      std::size_t replicas, std::uint64_t seed, std::size_t threads) {
  require(n >= 1 && replicas >= 2, "char_fn_gap: need n >= 1 and replicas >= 2");
  require(static_cast<std::size_t>(w.size()) == spec.dim, "char_fn_gap: w has the wrong dimension");
  CharFnGap out;
  out.admissible = w.norm() <= std::pow(static_cast<double>(n), 1.0 / 40.0) + 1e-12;

  Eigen::MatrixXd sigma;
  if (auto m = analytic_moments(spec)) {
    sigma = m->sigma;
  } else {
    const std::size_t len = 1'000'000;
    sigma = estimate_sigma_gamma(generate(spec, len, derive_seed(seed, 0xc0ffee)),
                                 default_lag_window(len))
                .sigma;
  }
  out.target = std::exp(-0.5 * w.dot(sigma * w));
  if (w.norm() == 0.0) {
    out.re = 1.0;
    out.gap = 0.0;
    out.band_hi = 0.0;
    return out;
  }

  // Fixed chunking keeps the stream layout independent of the worker count.
  const std::size_t chunks = std::min<std::size_t>(256, replicas);
  struct Acc {
    double c = 0, s = 0, cc = 0, ss = 0, cs = 0;
  };
  std::vector<Acc> acc(chunks);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  parallel_for(chunks, threads, [&](std::size_t ch) {
    const std::size_t lo = ch * replicas / chunks, hi = (ch + 1) * replicas / chunks;
    std::vector<double> x(spec.dim);
    Acc a;
    for (std::size_t r = lo; r < hi; ++r) {
      ProcessSampler sampler(spec, derive_seed(seed, r));
      double proj = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        sampler.next(x);
        for (std::size_t i = 0; i < spec.dim; ++i) proj += w(static_cast<Eigen::Index>(i)) * x[i];
      }
      const double arg = proj * scale;
      const double c = std::cos(arg), s = std::sin(arg);
      a.c += c;
      a.s += s;
      a.cc += c * c;
      a.ss += s * s;
      a.cs += c * s;
    }
    acc[ch] = a;
  });
  Acc t;
  for (const auto& a : acc) {
    t.c += a.c;
    t.s += a.s;
    t.cc += a.cc;
    t.ss += a.ss;
    t.cs += a.cs;
  }
  const auto R = static_cast<double>(replicas);
  out.re = t.c / R;
  out.im = t.s / R;
  const double vcc = (t.cc / R - out.re * out.re) * R / (R - 1.0);
  const double vss = (t.ss / R - out.im * out.im) * R / (R - 1.0);
  const double vcs = (t.cs / R - out.re * out.im) * R / (R - 1.0);
  const double dx = out.re - out.target, dy = out.im;
  out.gap = std::hypot(dx, dy);
  // Delta method along the direction of the estimated gap.
  double var;
  if (out.gap > 0.0) {
    const double ux = dx / out.gap, uy = dy / out.gap;
    var = ux * ux * vcc + uy * uy * vss + 2.0 * ux * uy * vcs;
  } else {
    var = std::max(vcc, vss);
  }
  out.stderr = std::sqrt(std::max(var, 0.0) / R);
  out.band_lo = std::max(0.0, out.gap - 1.96 * out.stderr);
  out.band_hi = out.gap + 1.96 * out.stderr;
  return out;
}

}  // namespace siglift
