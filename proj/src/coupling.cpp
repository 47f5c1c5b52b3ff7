#include "siglift/coupling.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>

#include "siglift/errors.hpp"
#include "siglift/linalg.hpp"
#include "siglift/stats.hpp"

namespace siglift {

namespace {

std::size_t floor_pow(std::size_t k, double e) {
  const double v = std::pow(static_cast<double>(k), e);
  return static_cast<std::size_t>(std::floor(v * (1.0 + 1e-12)));
}

// Lower-triangular C with C C^T = m for PSD m; zero pivots give zero columns.
Eigen::MatrixXd psd_cholesky(const Eigen::MatrixXd& m) {
  const Eigen::Index d = m.rows();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
  const double tol = 1e-12 * std::max(1.0, m.diagonal().cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < d; ++j) {
    double piv = m(j, j) - c.row(j).head(j).squaredNorm();
    if (piv <= tol) continue;
    c(j, j) = std::sqrt(piv);
    for (Eigen::Index i = j + 1; i < d; ++i)
      c(i, j) = (m(i, j) - c.row(i).head(j).dot(c.row(j).head(j))) / c(j, j);
  }
  return c;
}

// Solves C z = x for lower-triangular C, setting z_j = 0 on zero pivots.
Eigen::VectorXd forward_solve(const Eigen::MatrixXd& c, const Eigen::VectorXd& x) {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (c(j, j) == 0.0) continue;
    z(j) = (x(j) - c.row(j).head(j).dot(z.head(j))) / c(j, j);
  }
  return z;
}

// Standard normal score of the randomized CDF value, evaluated on the shorter tail.
double standard_score(const AtomCdf& c, double u) {
  const double lo = c.below + u * c.atom;
  const double hi = c.above + (1.0 - u) * c.atom;
  if (lo <= hi) return normal_quantile(std::clamp(lo, DBL_MIN, 0.5));
  return -normal_quantile(std::clamp(hi, DBL_MIN, 0.5));
}

std::vector<double> cumulative(const Eigen::VectorXd& p) {
  std::vector<double> c(static_cast<std::size_t>(p.size()));
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) c[static_cast<std::size_t>(i)] = (s += p(i));
  c.back() = 1.0;
  return c;
}

std::size_t draw(const std::vector<double>& cum, double u) {
  const auto it = std::upper_bound(cum.begin(), cum.end(), u);
  return std::min(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
}

}  // namespace

std::size_t BlockSchedule::ell(double x) const {
  auto it = std::upper_bound(blocks.begin(), blocks.end(), x,
                             [](double v, const Block& b) { return v < static_cast<double>(b.end); });
  return static_cast<std::size_t>(it - blocks.begin());
}

BlockSchedule block_schedule(double rho, std::size_t horizon) {
  require(rho >= 1.0, "block schedule needs rho >= 1");
  BlockSchedule s;
  s.rho = rho;
  s.horizon = horizon;
  std::size_t m = 0;
  for (std::size_t k = 1;; ++k) {
    Block b;
    b.start = m;
    b.mid = m + floor_pow(k, rho);
    b.end = b.mid + floor_pow(k, rho / 4.0);
    if (b.end > horizon) break;
    s.blocks.push_back(b);
    m = b.end;
  }
  return s;
}

BlockSums block_sums(const SamplePath& path, const BlockSchedule& sched, std::size_t cond_radius,
                     const ProcessSpec* spec) {
  const std::size_t last = sched.blocks.empty() ? 0 : sched.blocks.back().end;
  require(path.size() >= last, "path too short for the block schedule");
  const bool smooth = cond_radius > 0 && spec && spec->family == Family::DoublingMap &&
                      path.doubling.size() == path.size();
  const std::size_t d = path.dim;
  BlockSums out;
  out.dim = d;
  auto add_range = [&](std::size_t a, std::size_t b, bool conditional) {
    std::vector<double> s(d, 0.0);
    for (std::size_t j = a; j < b; ++j) {
      if (conditional) {
        const auto m = doubling_conditional_mean(*spec, path.doubling[j], cond_radius);
        for (std::size_t i = 0; i < d; ++i) s[i] += m[i];
      } else {
        const auto x = path.row(j);
        for (std::size_t i = 0; i < d; ++i) s[i] += x[i];
      }
    }
    return s;
  };
  for (const auto& b : sched.blocks) {
    out.q.push_back(add_range(b.start, b.mid, smooth));
    out.r.push_back(add_range(b.mid, b.end, false));
  }
  out.tail = add_range(last, path.size(), false);
  return out;
}

ScalarLaw gaussian_law(double mean, double variance) {
  require(variance >= 0.0, "gaussian law needs a nonnegative variance");
  const double sd = std::sqrt(variance);
  return [mean, sd](double v) {
    if (sd == 0.0)
      return v < mean ? AtomCdf{0.0, 0.0, 1.0} : v > mean ? AtomCdf{1.0, 0.0, 0.0} : AtomCdf{0.0, 1.0, 0.0};
    const double z = (v - mean) / sd;
    return AtomCdf{normal_upper(-z), 0.0, normal_upper(z)};
  };
}

ScalarLaw uniform_law() {
  return [](double v) {
    const double c = std::clamp(v, 0.0, 1.0);
    return AtomCdf{c, 0.0, 1.0 - c};
  };
}

ScalarLaw empirical_law(std::vector<double> sample) {
  require(!sample.empty(), "empirical law needs a sample");
  std::sort(sample.begin(), sample.end());
  return [s = std::move(sample)](double v) {
    const auto lo = std::lower_bound(s.begin(), s.end(), v);
    const auto hi = std::upper_bound(lo, s.end(), v);
    const double n1 = static_cast<double>(s.size() + 1);
    return AtomCdf{static_cast<double>(lo - s.begin()) / n1, static_cast<double>(hi - lo + 1) / n1,
                   static_cast<double>(s.end() - hi) / n1};
  };
}

CoupledValue quantile_couple(double v, const ScalarLaw& law, double sigma2, double u) {
  require(sigma2 >= 0.0, "quantile coupling needs a nonnegative target variance");
  if (sigma2 == 0.0) return {0.0, v != 0.0};
  return {std::sqrt(sigma2) * standard_score(law(v), u), false};
}

Coupler::Coupler(const ProcessSpec& spec, std::size_t horizon, const Eigen::MatrixXd& sigma,
                 const CouplingOptions& opts)
    : spec_(eta_view(spec)), sched_(block_schedule(opts.rho, horizon)), sigma_(symmetrize(sigma)),
      opts_(opts) {
  require(sigma_.rows() == static_cast<Eigen::Index>(spec_.dim) && sigma_.cols() == sigma_.rows(),
          "coupling: sigma must be d x d");
  require(is_psd(sigma_, 1e-8), "coupling: sigma is not PSD");
  sigma_chol_ = psd_cholesky(sigma_);
  switch (spec_.family) {
    case Family::IidGaussian:
      if ((sigma_ - spec_.covariance).cwiseAbs().maxCoeff() <=
          1e-12 * std::max(1.0, spec_.covariance.cwiseAbs().maxCoeff())) {
        law_kind_ = "identity";
        return;
      }
      build_gaussian();
      return;
    case Family::Ar1:
      build_gaussian();
      return;
    case Family::MarkovFunctional:
      if (spec_.dim == 1) {
        build_lattice();
        if (law_kind_ == "lattice") return;
      }
      build_empirical();
      return;
    default:
      build_empirical();
  }
}

void Coupler::build_gaussian() {
  law_kind_ = "gaussian";
  const Eigen::MatrixXd& q = spec_.covariance;
  const double a = spec_.family == Family::Ar1 ? spec_.ar_coefficient : 0.0;
  for (const auto& b : sched_.blocks) {
    const double l = static_cast<double>(b.length());
    if (spec_.family == Family::IidGaussian) {
      mean_coef_.push_back(0.0);
      chol_first_.push_back(psd_cholesky(q));
      chol_next_.push_back(chol_first_.back());
      continue;
    }
    // sum_{j<L} x_{m+j} = c x_{m-1} + sum_i (1 - a^{L-i}) / (1 - a) eps_{m+i}
    const double c = a * (1.0 - std::pow(a, l)) / (1.0 - a);
    double w = 0.0;
    for (std::size_t i = 0; i < b.length(); ++i) {
      const double f = (1.0 - std::pow(a, l - static_cast<double>(i))) / (1.0 - a);
      w += f * f;
    }
    const Eigen::MatrixXd cond = q * (w / l);
    const Eigen::MatrixXd stat = cond + q * (c * c / (1.0 - a * a) / l);
    mean_coef_.push_back(c / std::sqrt(l));
    chol_first_.push_back(psd_cholesky(stat));
    chol_next_.push_back(psd_cholesky(cond));
  }
}

void Coupler::build_lattice() {
  const Eigen::MatrixXd& p = spec_.transition;
  const auto states = static_cast<std::size_t>(p.rows());
  std::vector<double> g(states);
  for (std::size_t s = 0; s < states; ++s) g[s] = spec_.observable(static_cast<Eigen::Index>(s), 0);
  const double base = *std::min_element(g.begin(), g.end());
  double step = 0.0;
  for (double x : g)
    if (x - base > 0.0 && (step == 0.0 || x - base < step)) step = x - base;
  if (step == 0.0) step = 1.0;
  std::vector<long> units(states);
  for (std::size_t s = 0; s < states; ++s) {
    const double r = (g[s] - base) / step;
    if (std::abs(r - std::round(r)) > 1e-9 || r > 4096.0) return;
    units[s] = std::lround(r);
  }
  law_kind_ = "lattice";
  lattice_base_ = base;
  lattice_step_ = step;
  lattice_units_ = units;
  lattice_.assign(sched_.blocks.size(), std::vector<Lattice>(states + 1));
  const Eigen::VectorXd pi = stationary_distribution(p);
  const std::size_t max_len = sched_.blocks.empty() ? 0 : sched_.blocks.back().length();
  constexpr double kTrim = 1e-50;
  for (std::size_t start = 0; start <= states; ++start) {
    // mass[y][t - lo]: probability of current state y with unit sum t
    std::vector<std::vector<double>> mass(states, std::vector<double>(1, 0.0));
    for (std::size_t y = 0; y < states; ++y) {
      const double w = start == states ? pi(static_cast<Eigen::Index>(y))
                                       : p(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(y));
      mass[y].assign(static_cast<std::size_t>(units[y]) + 1, 0.0);
      mass[y][static_cast<std::size_t>(units[y])] = w;
    }
    long lo = 0;
    std::size_t width = 0;
    for (auto& m : mass) width = std::max(width, m.size());
    for (auto& m : mass) m.resize(width, 0.0);
    const long max_unit = *std::max_element(units.begin(), units.end());
    std::size_t block = 0;
    for (std::size_t len = 1; len <= max_len; ++len) {
      if (len > 1) {
        std::vector<std::vector<double>> next(states,
                                              std::vector<double>(width + static_cast<std::size_t>(max_unit), 0.0));
        for (std::size_t x = 0; x < states; ++x)
          for (std::size_t y = 0; y < states; ++y) {
            const double pxy = p(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
            if (pxy == 0.0) continue;
            const auto off = static_cast<std::size_t>(units[y]);
            const auto& src = mass[x];
            auto& dst = next[y];
            for (std::size_t t = 0; t < width; ++t) dst[t + off] += pxy * src[t];
          }
        mass.swap(next);
        width += static_cast<std::size_t>(max_unit);
        auto column = [&](std::size_t t) {
          double s = 0.0;
          for (const auto& m : mass) s += m[t];
          return s;
        };
        std::size_t a = 0, b = width;
        while (b - a > 1 && column(a) < kTrim) ++a;
        while (b - a > 1 && column(b - 1) < kTrim) --b;
        if (a > 0 || b < width) {
          for (auto& m : mass) m = std::vector<double>(m.begin() + static_cast<std::ptrdiff_t>(a),
                                                        m.begin() + static_cast<std::ptrdiff_t>(b));
          lo += static_cast<long>(a);
          width = b - a;
        }
      }
      while (block < sched_.blocks.size() && sched_.blocks[block].length() == len) {
        Lattice& lat = lattice_[block][start];
        lat.first = lo;
        lat.atom.assign(width, 0.0);
        for (const auto& m : mass)
          for (std::size_t t = 0; t < width; ++t) lat.atom[t] += m[t];
        lat.below.assign(width, 0.0);
        lat.above.assign(width, 0.0);
        for (std::size_t t = 1; t < width; ++t) lat.below[t] = lat.below[t - 1] + lat.atom[t - 1];
        for (std::size_t t = width - 1; t > 0; --t) lat.above[t - 1] = lat.above[t] + lat.atom[t];
        ++block;
      }
    }
  }
}

void Coupler::build_empirical() {
  law_kind_ = "empirical";
  require(opts_.empirical_replicas >= 100, "empirical coupling needs at least 100 replicas");
  const std::size_t d = spec_.dim;
  const bool markov = spec_.family == Family::MarkovFunctional;
  const std::size_t states = markov ? static_cast<std::size_t>(spec_.transition.rows()) : 0;
  const std::size_t starts = markov ? states + 1 : 1;
  const std::size_t reps = opts_.empirical_replicas;
  std::vector<std::vector<double>> cum;
  std::vector<double> cum_pi;
  if (markov) {
    for (std::size_t s = 0; s < states; ++s)
      cum.push_back(cumulative(spec_.transition.row(static_cast<Eigen::Index>(s)).transpose()));
    cum_pi = cumulative(stationary_distribution(spec_.transition));
  }
  const std::uint64_t base = derive_seed(spec_.seed, 0xe3b1);
  empirical_.assign(sched_.blocks.size(), std::vector<std::vector<double>>(starts));
  for (std::size_t k = 0; k < sched_.blocks.size(); ++k) {
    const std::size_t len = sched_.blocks[k].length();
    const double scale = 1.0 / std::sqrt(static_cast<double>(len));
    for (std::size_t start = 0; start < starts; ++start) {
      auto& out = empirical_[k][start];
      out.assign(reps * d, 0.0);
      parallel_for(reps, 0, [&](std::size_t r) {
        const std::uint64_t seed = derive_seed(base, (k * starts + start) * reps + r);
        std::vector<double> sum(d, 0.0);
        if (markov) {
          Rng rng(seed);
          std::size_t s = draw(start == states ? cum_pi : cum[start], uniform01(rng));
          for (std::size_t j = 0; j < len; ++j) {
            if (j > 0) s = draw(cum[s], uniform01(rng));
            for (std::size_t i = 0; i < d; ++i)
              sum[i] += spec_.observable(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i));
          }
        } else {
          ProcessSampler sampler(spec_, seed);
          std::vector<double> x(d);
          const bool smooth = opts_.cond_radius > 0 && spec_.family == Family::DoublingMap;
          for (std::size_t j = 0; j < len; ++j) {
            sampler.next(x);
            if (smooth) x = doubling_conditional_mean(spec_, sampler.doubling_state(), opts_.cond_radius);
            for (std::size_t i = 0; i < d; ++i) sum[i] += x[i];
          }
        }
        for (std::size_t i = 0; i < d; ++i) out[r * d + i] = sum[i] * scale;
      });
    }
  }
}

std::size_t Coupler::start_state(std::size_t k, const SamplePath& path) const {
  if (spec_.family != Family::MarkovFunctional) return 0;
  const auto states = static_cast<std::size_t>(spec_.transition.rows());
  if (k == 0) return states;
  const std::size_t j = sched_.blocks[k].start - 1;
  require(path.states.size() > j, "coupling a Markov path needs its state sequence");
  return static_cast<std::size_t>(path.states[j]);
}

AtomCdf Coupler::lattice_cdf(std::size_t k, std::size_t start, double q) const {
  const Lattice& lat = lattice_[k][start];
  const double l = static_cast<double>(sched_.blocks[k].length());
  const double r = (q - l * lattice_base_) / lattice_step_;
  const long t = std::lround(r);
  require(std::abs(r - static_cast<double>(t)) <= 1e-6 * std::max(1.0, std::abs(r)),
          "block sum is off the state lattice");
  const long idx = t - lat.first;
  if (idx < 0) return {0.0, 0.0, 1.0};
  if (idx >= static_cast<long>(lat.atom.size())) return {1.0, 0.0, 0.0};
  const auto i = static_cast<std::size_t>(idx);
  return {lat.below[i], lat.atom[i], lat.above[i]};
}

std::vector<double> Coupler::transport(std::size_t k, const SamplePath& path,
                                       std::span<const double> v, Rng& u_rng, bool& degenerate) const {
  const std::size_t d = spec_.dim;
  const auto dd = static_cast<Eigen::Index>(d);
  std::vector<double> w(d, 0.0);
  if (law_kind_ == "identity") {
    w.assign(v.begin(), v.end());
    return w;
  }
  Eigen::VectorXd z = Eigen::VectorXd::Zero(dd);
  if (law_kind_ == "gaussian") {
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(v.data(), dd);
    if (k > 0 && mean_coef_[k] != 0.0) {
      const auto prev = path.row(sched_.blocks[k].start - 1);
      x -= mean_coef_[k] * Eigen::Map<const Eigen::VectorXd>(prev.data(), dd);
    }
    const Eigen::MatrixXd& c = k == 0 ? chol_first_[k] : chol_next_[k];
    if (d == 1) {
      const double var = c(0, 0) * c(0, 0);
      const CoupledValue cv = quantile_couple(x(0), gaussian_law(0.0, var), sigma_(0, 0), uniform01(u_rng));
      degenerate = cv.degenerate;
      w[0] = cv.w;
      return w;
    }
    z = forward_solve(c, x);
  } else if (law_kind_ == "lattice") {
    const std::size_t start = start_state(k, path);
    const double q = v[0] * std::sqrt(static_cast<double>(sched_.blocks[k].length()));
    const double u = uniform01(u_rng);
    if (sigma_(0, 0) == 0.0) {
      degenerate = v[0] != 0.0;
      return w;
    }
    w[0] = std::sqrt(sigma_(0, 0)) * standard_score(lattice_cdf(k, start, q), u);
    return w;
  } else {
    const auto& sample = empirical_[k][start_state(k, path)];
    const std::size_t reps = sample.size() / d;
    std::vector<std::size_t> cell(reps);
    std::iota(cell.begin(), cell.end(), 0);
    for (std::size_t c = 0; c < d; ++c) {
      std::sort(cell.begin(), cell.end(), [&](std::size_t a, std::size_t b) {
        return sample[a * d + c] < sample[b * d + c] || (sample[a * d + c] == sample[b * d + c] && a < b);
      });
      std::size_t below = 0, equal = 0;
      for (std::size_t idx : cell) {
        const double x = sample[idx * d + c];
        below += x < v[c];
        equal += x == v[c];
      }
      const double n1 = static_cast<double>(cell.size() + 1);
      const AtomCdf a{static_cast<double>(below) / n1, static_cast<double>(equal + 1) / n1,
                      static_cast<double>(cell.size() - below - equal) / n1};
      z(static_cast<Eigen::Index>(c)) = standard_score(a, uniform01(u_rng));
      if (c + 1 == d) break;
      const std::size_t bins =
          std::max<std::size_t>(1, std::min(opts_.kr_bins, cell.size() / 10));
      const std::size_t rank = std::min(below + equal / 2, cell.size() - 1);
      const std::size_t bin = std::min(bins - 1, rank * bins / cell.size());
      const std::size_t lo = bin * cell.size() / bins, hi = (bin + 1) * cell.size() / bins;
      cell = std::vector<std::size_t>(cell.begin() + static_cast<std::ptrdiff_t>(lo),
                                      cell.begin() + static_cast<std::ptrdiff_t>(hi));
    }
    if (d == 1 && sigma_(0, 0) == 0.0) {
      degenerate = v[0] != 0.0;
      return w;
    }
  }
  const Eigen::VectorXd out = sigma_chol_ * z;
  for (std::size_t i = 0; i < d; ++i) w[i] = out(static_cast<Eigen::Index>(i));
  return w;
}

CouplingReport Coupler::couple(const SamplePath& path, std::uint64_t seed) const {
  const std::size_t d = spec_.dim;
  const auto dd = static_cast<Eigen::Index>(d);
  require(path.dim == d, "coupling: path dimension differs from the spec");
  require(path.size() >= sched_.horizon, "path too short for the coupling horizon");
  const BlockSums sums = block_sums(path, sched_, opts_.cond_radius, &spec_);
  CouplingReport rep;
  rep.schedule = sched_;
  rep.dim = d;
  rep.law = law_kind_;
  const std::size_t horizon = sched_.horizon;
  rep.bm.dim = d;
  rep.bm.h = 1.0;
  rep.bm.sigma_half = sigma_chol_;
  rep.bm.values.assign((horizon + 1) * d, 0.0);
  auto& wv = rep.bm.values;
  Rng u_rng(derive_seed(seed, 1));
  Rng noise(derive_seed(seed, 2));
  Eigen::VectorXd g(dd);
  auto gaussian_step = [&]() {
    for (Eigen::Index i = 0; i < dd; ++i) g(i) = standard_normal(noise);
    return Eigen::VectorXd(sigma_chol_ * g);
  };
  const double pw = 1.0 / 20.0;
  const double sigma_scale = std::sqrt(sigma_.diagonal().maxCoeff());
  for (std::size_t k = 0; k < sched_.blocks.size(); ++k) {
    const Block& b = sched_.blocks[k];
    const std::size_t len = b.length();
    const double sl = std::sqrt(static_cast<double>(len));
    std::vector<double> v(d);
    for (std::size_t i = 0; i < d; ++i) v[i] = sums.q[k][i] / sl;
    bool degenerate = false;
    std::vector<double> w = transport(k, path, v, u_rng, degenerate);
    rep.degenerate += degenerate;
    double diff = 0.0;
    for (std::size_t i = 0; i < d; ++i) diff = std::max(diff, std::abs(v[i] - w[i]));
    rep.v.push_back(v);
    rep.w.push_back(w);
    rep.abs_diff.push_back(diff);

    const double kk = std::pow(static_cast<double>(len), pw / (4.0 * static_cast<double>(d)));
    const double nu = opts_.nu_constant * std::pow(static_cast<double>(k + 1), -opts_.rho * pw);
    double delta = 0.0;
    if (sigma_scale > 0.0) {
      const double r = kk / 4.0 / std::sqrt(static_cast<double>(d));
      for (Eigen::Index i = 0; i < dd; ++i)
        if (sigma_(i, i) > 0.0) delta += 2.0 * normal_upper(r / std::sqrt(sigma_(i, i)));
      delta = std::min(delta, 1.0);
    }
    rep.k_budget.push_back(kk);
    rep.nu.push_back(nu);
    rep.delta.push_back(delta);
    rep.varrho.push_back(16.0 * std::log(kk) / kk + 2.0 * std::sqrt(nu) * std::pow(kk, static_cast<double>(d)) +
                         2.0 * std::sqrt(delta));

    // Brownian bridge from W(start) to W(start) + sqrt(L) W_k.
    std::vector<Eigen::VectorXd> inc(len);
    Eigen::VectorXd total = Eigen::VectorXd::Zero(dd);
    for (auto& z : inc) {
      z = gaussian_step();
      total += z;
    }
    Eigen::VectorXd target(dd);
    for (std::size_t i = 0; i < d; ++i) target(static_cast<Eigen::Index>(i)) = sl * w[i];
    const Eigen::VectorXd shift = (total - target) / static_cast<double>(len);
    for (std::size_t j = 0; j + 1 < len; ++j)
      for (std::size_t i = 0; i < d; ++i)
        wv[(b.start + j + 1) * d + i] = wv[(b.start + j) * d + i] + inc[j](static_cast<Eigen::Index>(i)) -
                                        shift(static_cast<Eigen::Index>(i));
    for (std::size_t i = 0; i < d; ++i) wv[b.mid * d + i] = wv[b.start * d + i] + target(static_cast<Eigen::Index>(i));
    for (std::size_t j = b.mid; j < b.end; ++j) {
      const Eigen::VectorXd z = gaussian_step();
      for (std::size_t i = 0; i < d; ++i) wv[(j + 1) * d + i] = wv[j * d + i] + z(static_cast<Eigen::Index>(i));
    }
  }
  const std::size_t last = sched_.blocks.empty() ? 0 : sched_.blocks.back().end;
  for (std::size_t j = last; j < horizon; ++j) {
    const Eigen::VectorXd z = gaussian_step();
    for (std::size_t i = 0; i < d; ++i) wv[(j + 1) * d + i] = wv[j * d + i] + z(static_cast<Eigen::Index>(i));
  }

  const double norm = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(horizon, 1)));
  std::vector<double> s(d, 0.0), qs(d, 0.0);
  std::size_t ell = 0;
  for (std::size_t j = 0; j <= horizon; ++j) {
    if (j > 0) {
      const auto x = path.row(j - 1);
      for (std::size_t i = 0; i < d; ++i) s[i] += x[i];
    }
    while (ell < sched_.blocks.size() && sched_.blocks[ell].end <= j) {
      for (std::size_t i = 0; i < d; ++i) qs[i] += sums.q[ell][i];
      ++ell;
    }
    for (std::size_t i = 0; i < d; ++i) {
      rep.sup_discrepancy = std::max(rep.sup_discrepancy, std::abs(s[i] - wv[j * d + i]) * norm);
      rep.block_discrepancy = std::max(rep.block_discrepancy, std::abs(qs[i] - wv[j * d + i]) * norm);
    }
  }
  if (!rep.abs_diff.empty())
    rep.mean_abs_diff = std::accumulate(rep.abs_diff.begin(), rep.abs_diff.end(), 0.0) /
                        static_cast<double>(rep.abs_diff.size());
  return rep;
}

CouplingReport couple_and_reassemble(const ProcessSpec& spec, const SamplePath& path,
                                     const BlockSchedule& sched, const Eigen::MatrixXd& sigma,
                                     std::uint64_t seed, const CouplingOptions& opts) {
  CouplingOptions o = opts;
  o.rho = sched.rho;
  return Coupler(spec, sched.horizon, sigma, o).couple(path, seed);
}

nlohmann::json to_json(const CouplingReport& r, bool with_path) {
  nlohmann::json j;
  j["law"] = r.law;
  j["rho"] = r.schedule.rho;
  j["horizon"] = r.schedule.horizon;
  j["ell_N"] = r.schedule.blocks.size();
  j["sup_discrepancy"] = r.sup_discrepancy;
  j["block_discrepancy"] = r.block_discrepancy;
  j["mean_abs_diff"] = r.mean_abs_diff;
  j["degenerate"] = r.degenerate;
  auto blocks = nlohmann::json::array();
  for (std::size_t k = 0; k < r.v.size(); ++k) {
    const Block& b = r.schedule.blocks[k];
    blocks.push_back({{"k", k + 1}, {"m_prev", b.start}, {"n", b.mid}, {"m", b.end},
                      {"V", r.v[k]}, {"W", r.w[k]}, {"abs_diff", r.abs_diff[k]},
                      {"K", r.k_budget[k]}, {"nu", r.nu[k]}, {"delta", r.delta[k]},
                      {"varrho", r.varrho[k]}});
  }
  j["blocks"] = blocks;
  if (with_path) j["brownian"] = r.bm.values;
  return j;
}

}  // namespace siglift
