#include "siglift/process.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <queue>

#include "siglift/errors.hpp"
#include "siglift/linalg.hpp"
#include "siglift/rng.hpp"

namespace siglift {

const char* to_string(Family f) {
  switch (f) {
    case Family::IidGaussian: return "iid-gaussian";
    case Family::Ar1: return "ar1";
    case Family::MarkovFunctional: return "markov-functional";
    case Family::DoublingMap: return "doubling-map";
    case Family::SuspensionOverMarkov: return "suspension-over-markov";
  }
  return "iid-gaussian";
}

Family family_from_string(const std::string& s) {
  if (s == "iid-gaussian") return Family::IidGaussian;
  if (s == "ar1") return Family::Ar1;
  if (s == "markov-functional") return Family::MarkovFunctional;
  if (s == "doubling-map") return Family::DoublingMap;
  if (s == "suspension-over-markov") return Family::SuspensionOverMarkov;
  throw ValidationError("unknown process family '" + s + "'");
}

// ---------------------------------------------------------------------------
// Chain structure

bool is_irreducible(const Eigen::MatrixXd& P) {
  const auto S = static_cast<std::size_t>(P.rows());
  auto reach_all = [&](bool transpose) {
    std::vector<char> seen(S, 0);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = 1;
    while (!q.empty()) {
      auto u = q.front();
      q.pop();
      for (std::size_t v = 0; v < S; ++v) {
        double w = transpose ? P(v, u) : P(u, v);
        if (w > 0.0 && !seen[v]) {
          seen[v] = 1;
          q.push(v);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  return S > 0 && reach_all(false) && reach_all(true);
}

std::size_t chain_period(const Eigen::MatrixXd& P) {
  const auto S = static_cast<std::size_t>(P.rows());
  std::vector<long> level(S, -1);
  std::queue<std::size_t> q;
  level[0] = 0;
  q.push(0);
  long g = 0;
  while (!q.empty()) {
    auto u = q.front();
    q.pop();
    for (std::size_t v = 0; v < S; ++v) {
      if (P(u, v) <= 0.0) continue;
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      } else {
        g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
      }
    }
  }
  return g == 0 ? 0 : static_cast<std::size_t>(g);
}

static void validate_stochastic(const Eigen::MatrixXd& P) {
  require(P.rows() >= 1 && P.rows() == P.cols(), "transition matrix must be square");
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    for (Eigen::Index j = 0; j < P.cols(); ++j)
      require(P(i, j) >= 0.0 && std::isfinite(P(i, j)), "transition matrix has negative entries");
    require(std::abs(P.row(i).sum() - 1.0) <= 1e-9, "transition matrix is not row-stochastic");
  }
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& P) {
  validate_stochastic(P);
  const Eigen::Index S = P.rows();
  Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(S, S);
  A.row(S - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(S);
  rhs(S - 1) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible() || !is_irreducible(P))
    throw ValidationError("transition matrix is reducible (no unique stationary law)");
  Eigen::VectorXd pi = lu.solve(rhs);
  for (Eigen::Index i = 0; i < S; ++i) pi(i) = std::max(0.0, pi(i));
  return pi / pi.sum();
}

double dobrushin_coefficient(const Eigen::MatrixXd& P) {
  double worst = 0.0;
  for (Eigen::Index a = 0; a < P.rows(); ++a)
    for (Eigen::Index b = a + 1; b < P.rows(); ++b)
      worst = std::max(worst, 0.5 * (P.row(a) - P.row(b)).cwiseAbs().sum());
  return std::min(worst, 1.0);
}

MixingCertificate mixing_bound_markov(const Eigen::MatrixXd& P) {
  validate_stochastic(P);
  require(is_irreducible(P), "mixing bound: chain is reducible");
  require(chain_period(P) == 1, "mixing bound: chain is periodic");
  MixingCertificate cert;
  cert.family = "markov";
  Eigen::MatrixXd Pk = P;
  // A primitive chain has a strictly contracting power; Wielandt bounds its index.
  const std::size_t S = static_cast<std::size_t>(P.rows());
  const std::size_t max_power = (S - 1) * (S - 1) + 1;
  for (std::size_t k = 1; k <= max_power; ++k) {
    double lam = dobrushin_coefficient(Pk);
    if (lam < 1.0 - 1e-12) {
      cert.power = k;
      if (k == 1) {
        cert.lambda = lam;
        cert.constant = 1.0;
      } else {
        cert.lambda = std::pow(lam, 1.0 / static_cast<double>(k));
        cert.constant = 1.0 / lam;
      }
      return cert;
    }
    Pk = Pk * P;
  }
  throw ValidationError("mixing bound: no contracting power found");
}

MixingCertificate mixing_certificate(const ProcessSpec& spec) {
  validate(spec);
  MixingCertificate cert;
  cert.family = to_string(spec.family);
  switch (spec.family) {
    case Family::IidGaussian:
      cert.lambda = 0.0;
      break;
    case Family::Ar1:
      // Gaussian AR(1) is rho-mixing with rho(n) = |a|^n, not phi-mixing.
      cert.coefficient = "rho";
      cert.lambda = std::abs(spec.ar_coefficient);
      break;
    case Family::MarkovFunctional:
    case Family::SuspensionOverMarkov: {
      auto m = mixing_bound_markov(spec.transition);
      m.family = cert.family;
      return m;
    }
    case Family::DoublingMap:
      cert.empirical_only = true;
      cert.constant = 0.0;
      cert.lambda = 0.0;
      break;
  }
  return cert;
}

// ---------------------------------------------------------------------------
// Specs

void validate(const ProcessSpec& spec) {
  require(spec.dim >= 1, "process dimension must be positive");
  const auto d = static_cast<Eigen::Index>(spec.dim);
  switch (spec.family) {
    case Family::IidGaussian:
    case Family::Ar1: {
      require(spec.covariance.rows() == d && spec.covariance.cols() == d,
              "covariance must be d x d");
      require(is_psd(spec.covariance, 1e-10), "covariance must be symmetric PSD");
      if (spec.family == Family::Ar1)
        require(std::abs(spec.ar_coefficient) < 1.0, "AR coefficient must satisfy |a| < 1");
      break;
    }
    case Family::MarkovFunctional:
    case Family::SuspensionOverMarkov: {
      validate_stochastic(spec.transition);
      require(spec.observable.rows() == spec.transition.rows() && spec.observable.cols() == d,
              "observable table must be S x d");
      Eigen::VectorXd pi = stationary_distribution(spec.transition);
      require(chain_period(spec.transition) == 1, "chain must be aperiodic");
      Eigen::VectorXd weights = pi;
      if (spec.family == Family::SuspensionOverMarkov) {
        require(spec.ceiling.size() == static_cast<std::size_t>(spec.transition.rows()),
                "ceiling table must have one entry per state");
        require(spec.ceiling_bound >= 1.0, "ceiling bound L-hat must be >= 1");
        for (std::size_t s = 0; s < spec.ceiling.size(); ++s) {
          double t = spec.ceiling[s];
          require(t >= 1.0 / spec.ceiling_bound - 1e-12 && t <= spec.ceiling_bound + 1e-12,
                  "ceiling violates 1/L-hat <= tau <= L-hat");
          weights(static_cast<Eigen::Index>(s)) *= t;
        }
      }
      Eigen::VectorXd mean = spec.observable.transpose() * weights;
      require(mean.cwiseAbs().maxCoeff() <= 1e-9,
              "observable is not centered under the stationary law");
      break;
    }
    case Family::DoublingMap: {
      require(spec.frequencies.size() == spec.dim, "doubling map needs one frequency per coordinate");
      for (int f : spec.frequencies) require(f >= 1, "doubling-map frequencies must be >= 1");
      break;
    }
  }
}

static Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  require(j.is_array() && !j.empty(), "expected a non-empty matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    require(static_cast<Eigen::Index>(j[r].size()) == cols, "ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

static nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(row);
  }
  return j;
}

ProcessSpec spec_from_json(const nlohmann::json& j) {
  try {
    ProcessSpec s;
    s.family = family_from_string(j.at("family").get<std::string>());
    s.dim = j.value("d", std::size_t{1});
    s.seed = j.value("seed", std::uint64_t{0});
    const auto d = static_cast<Eigen::Index>(s.dim);
    switch (s.family) {
      case Family::IidGaussian:
      case Family::Ar1:
        if (j.contains("covariance")) {
          s.covariance = matrix_from_json(j["covariance"]);
        } else {
          s.covariance = Eigen::MatrixXd::Identity(d, d) * j.value("variance", 1.0);
        }
        s.ar_coefficient = j.value("a", 0.0);
        break;
      case Family::MarkovFunctional:
      case Family::SuspensionOverMarkov:
        s.transition = matrix_from_json(j.at("transition"));
        s.observable = matrix_from_json(j.at("observable"));
        if (s.family == Family::SuspensionOverMarkov) {
          s.ceiling = j.at("ceiling").get<std::vector<double>>();
          s.ceiling_bound = j.at("ceiling_bound").get<double>();
        }
        break;
      case Family::DoublingMap:
        if (j.contains("frequencies")) {
          s.frequencies = j["frequencies"].get<std::vector<int>>();
        } else {
          s.frequencies.resize(s.dim);
          std::iota(s.frequencies.begin(), s.frequencies.end(), 1);
        }
        break;
    }
    validate(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed process spec: ") + e.what());
  }
}

nlohmann::json spec_to_json(const ProcessSpec& s) {
  nlohmann::json j;
  j["family"] = to_string(s.family);
  j["d"] = s.dim;
  j["seed"] = s.seed;
  switch (s.family) {
    case Family::IidGaussian:
      j["covariance"] = matrix_to_json(s.covariance);
      break;
    case Family::Ar1:
      j["covariance"] = matrix_to_json(s.covariance);
      j["a"] = s.ar_coefficient;
      break;
    case Family::MarkovFunctional:
    case Family::SuspensionOverMarkov:
      j["transition"] = matrix_to_json(s.transition);
      j["observable"] = matrix_to_json(s.observable);
      if (s.family == Family::SuspensionOverMarkov) {
        j["ceiling"] = s.ceiling;
        j["ceiling_bound"] = s.ceiling_bound;
      }
      break;
    case Family::DoublingMap:
      j["frequencies"] = s.frequencies;
      break;
  }
  return j;
}

ProcessSpec iid_gaussian_spec(std::size_t dim, double variance, std::uint64_t seed) {
  ProcessSpec s;
  s.family = Family::IidGaussian;
  s.dim = dim;
  const auto d = static_cast<Eigen::Index>(dim);
  s.covariance = Eigen::MatrixXd::Identity(d, d) * variance;
  s.seed = seed;
  return s;
}

ProcessSpec ar1_spec(double a, double innovation_variance, std::uint64_t seed) {
  ProcessSpec s;
  s.family = Family::Ar1;
  s.ar_coefficient = a;
  s.covariance = Eigen::MatrixXd::Constant(1, 1, innovation_variance);
  s.seed = seed;
  validate(s);
  return s;
}

ProcessSpec two_state_spec(double flip, double amplitude, std::uint64_t seed) {
  ProcessSpec s;
  s.family = Family::MarkovFunctional;
  s.transition.resize(2, 2);
  s.transition << 1.0 - flip, flip, flip, 1.0 - flip;
  s.observable.resize(2, 1);
  s.observable << amplitude, -amplitude;
  s.seed = seed;
  validate(s);
  return s;
}

// ---------------------------------------------------------------------------
// Generators

namespace {

// Inverse-CDF sampler over the rows of a stochastic matrix.
struct ChainSampler {
  std::vector<std::vector<double>> cumulative;
  std::vector<double> initial;

  ChainSampler(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi) {
    const auto S = static_cast<std::size_t>(P.rows());
    cumulative.assign(S, std::vector<double>(S));
    for (std::size_t i = 0; i < S; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < S; ++j) {
        acc += P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        cumulative[i][j] = acc;
      }
      cumulative[i][S - 1] = 1.0;
    }
    initial.resize(S);
    double acc = 0.0;
    for (std::size_t j = 0; j < S; ++j) {
      acc += pi(static_cast<Eigen::Index>(j));
      initial[j] = acc;
    }
    initial[S - 1] = 1.0;
  }

  static int pick(const std::vector<double>& cdf, double u) {
    std::size_t j = 0;
    while (j + 1 < cdf.size() && u >= cdf[j]) ++j;
    return static_cast<int>(j);
  }

  int start(Rng& rng) const { return pick(initial, uniform01(rng)); }
  int step(int s, Rng& rng) const {
    return pick(cumulative[static_cast<std::size_t>(s)], uniform01(rng));
  }
};

}  // namespace

double doubling_to_double(unsigned __int128 state) {
  const auto hi = static_cast<std::uint64_t>(state >> 64);
  const auto lo = static_cast<std::uint64_t>(state);
  return static_cast<double>(hi) * 0x1.0p-64 + static_cast<double>(lo) * 0x1.0p-128;
}

std::vector<double> doubling_conditional_mean(const ProcessSpec& spec, unsigned __int128 state,
                                              std::size_t radius) {
  const std::size_t digits = std::min<std::size_t>(radius + 1, 120);
  const unsigned __int128 mask = ~((static_cast<unsigned __int128>(1) << (128 - digits)) - 1);
  const double left = doubling_to_double(state & mask);
  const double width = std::ldexp(1.0, -static_cast<int>(digits));
  std::vector<double> out(spec.dim);
  for (std::size_t i = 0; i < spec.dim; ++i) {
    const double w = 2.0 * std::numbers::pi * spec.frequencies[i];
    // sin(a + h) - sin(a) = 2 cos(a + h/2) sin(h/2) avoids cancellation on narrow cylinders
    out[i] = 2.0 * std::cos(w * (left + 0.5 * width)) * std::sin(0.5 * w * width) / (w * width);
  }
  return out;
}

ProcessSampler::ProcessSampler(const ProcessSpec& spec, std::uint64_t seed)
    : spec_(spec), rng_(derive_seed(seed, 0)) {
  validate(spec_);
  require(spec_.family != Family::SuspensionOverMarkov,
          "suspension specs are sampled with generate_suspension");
  const auto d = static_cast<Eigen::Index>(spec_.dim);
  z_.resize(d);
  x_.resize(d);
  if (spec_.family == Family::IidGaussian || spec_.family == Family::Ar1)
    root_ = sqrt_psd(spec_.covariance);
  if (spec_.family == Family::MarkovFunctional) {
    Eigen::VectorXd pi = stationary_distribution(spec_.transition);
    const auto S = static_cast<std::size_t>(spec_.transition.rows());
    cumulative_.assign(S + 1, std::vector<double>(S));
    // row S holds the stationary law used for the first draw
    for (std::size_t i = 0; i <= S; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < S; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        acc += i < S ? spec_.transition(static_cast<Eigen::Index>(i), jj) : pi(jj);
        cumulative_[i][j] = acc;
      }
      cumulative_[i][S - 1] = 1.0;
    }
  }
}

void ProcessSampler::next(std::span<double> out) {
  const auto d = static_cast<Eigen::Index>(spec_.dim);
  switch (spec_.family) {
    case Family::IidGaussian: {
      for (Eigen::Index i = 0; i < d; ++i) z_(i) = standard_normal(rng_);
      if (d == 1) {
        out[0] = root_(0, 0) * z_(0);
      } else {
        x_.noalias() = root_ * z_;
        for (Eigen::Index i = 0; i < d; ++i) out[static_cast<std::size_t>(i)] = x_(i);
      }
      break;
    }
    case Family::Ar1: {
      const double a = spec_.ar_coefficient;
      for (Eigen::Index i = 0; i < d; ++i) z_(i) = standard_normal(rng_);
      if (count_ == 0) {
        x_ = root_ * z_ / std::sqrt(1.0 - a * a);
      } else if (d == 1) {
        x_(0) = a * x_(0) + root_(0, 0) * z_(0);
      } else {
        x_ = a * x_ + root_ * z_;
      }
      for (Eigen::Index i = 0; i < d; ++i) out[static_cast<std::size_t>(i)] = x_(i);
      break;
    }
    case Family::MarkovFunctional: {
      const auto& cdf = cumulative_[count_ == 0 ? cumulative_.size() - 1
                                                : static_cast<std::size_t>(state_)];
      const double u = uniform01(rng_);
      std::size_t j = 0;
      while (j + 1 < cdf.size() && u >= cdf[j]) ++j;
      state_ = static_cast<int>(j);
      for (Eigen::Index i = 0; i < d; ++i)
        out[static_cast<std::size_t>(i)] = spec_.observable(state_, i);
      break;
    }
    case Family::DoublingMap: {
      // x_k = 2^k x_0 mod 1 is a left shift of the binary expansion; the window
      // keeps 128 digits and draws fresh digits of x_0 as they shift in.
      if (count_ == 0) {
        doubling_ = (static_cast<unsigned __int128>(rng_()) << 64) | rng_();
      } else {
        if (bits_left_ == 0) {
          bits_ = rng_();
          bits_left_ = 64;
        }
        doubling_ = (doubling_ << 1) | (bits_ & 1u);
        bits_ >>= 1;
        --bits_left_;
      }
      const double xd = doubling_to_double(doubling_);
      for (std::size_t i = 0; i < spec_.dim; ++i)
        out[i] = std::cos(2.0 * std::numbers::pi * spec_.frequencies[i] * xd);
      break;
    }
    case Family::SuspensionOverMarkov:
      break;
  }
  ++count_;
}

ProcessSpec eta_view(const ProcessSpec& spec) {
  if (spec.family != Family::SuspensionOverMarkov) return spec;
  ProcessSpec m = spec;
  m.family = Family::MarkovFunctional;
  for (Eigen::Index s = 0; s < m.observable.rows(); ++s)
    m.observable.row(s) *= spec.ceiling[static_cast<std::size_t>(s)];
  m.ceiling.clear();
  m.ceiling_bound = 0.0;
  return m;
}

SamplePath generate(const ProcessSpec& spec, std::size_t n) { return generate(spec, n, spec.seed); }

SamplePath generate(const ProcessSpec& spec, std::size_t n, std::uint64_t seed) {
  ProcessSampler sampler(spec, seed);
  SamplePath path;
  path.kind = PathKind::Discrete;
  path.dim = spec.dim;
  path.seed = seed;
  path.values.resize(n * spec.dim);
  const bool markov = spec.family == Family::MarkovFunctional;
  const bool doubling = spec.family == Family::DoublingMap;
  if (markov) path.states.resize(n);
  if (doubling) path.doubling.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    sampler.next(std::span<double>(path.values.data() + k * spec.dim, spec.dim));
    if (markov) path.states[k] = sampler.state();
    if (doubling) path.doubling[k] = sampler.doubling_state();
  }
  return path;
}

SuspensionSample generate_suspension(const ProcessSpec& spec, double total_time, double delta) {
  return generate_suspension(spec, total_time, delta, spec.seed);
}

SuspensionSample generate_suspension(const ProcessSpec& spec, double total_time, double delta,
                                     std::uint64_t seed) {
  validate(spec);
  require(spec.family == Family::SuspensionOverMarkov, "generate_suspension needs a suspension spec");
  require(delta > 0.0 && total_time > 0.0, "grid step and horizon must be positive");
  require(delta <= 1.0 / (4.0 * spec.ceiling_bound) + 1e-15,
          "grid step too coarse to resolve ceiling segments (need delta <= 1/(4 L-hat))");
  Rng rng(derive_seed(seed, 0));
  ChainSampler chain(spec.transition, stationary_distribution(spec.transition));
  const std::size_t d = spec.dim;

  SuspensionSample out;
  out.eta.kind = PathKind::Discrete;
  out.eta.dim = d;
  out.eta.seed = seed;
  out.grid.kind = PathKind::Suspension;
  out.grid.dim = d;
  out.grid.delta = delta;
  out.grid.seed = seed;

  // Segment starts are running sums of the ceilings, never of grid steps.
  double start = 0.0;
  int s = chain.start(rng);
  bool first = true;
  while (start < total_time) {
    if (!first) s = chain.step(s, rng);
    first = false;
    Segment seg;
    seg.start = start;
    seg.length = spec.ceiling[static_cast<std::size_t>(s)];
    seg.value.resize(d);
    for (std::size_t i = 0; i < d; ++i)
      seg.value[i] = spec.observable(s, static_cast<Eigen::Index>(i));
    for (std::size_t i = 0; i < d; ++i) out.eta.values.push_back(seg.length * seg.value[i]);
    out.eta.states.push_back(s);
    out.grid.states.push_back(s);
    start += seg.length;
    out.grid.segments.push_back(std::move(seg));
  }

  const auto n = static_cast<std::size_t>(std::floor(total_time / delta + 1e-9));
  out.grid.values.resize(n * d);
  std::size_t seg = 0;
  const auto& segs = out.grid.segments;
  for (std::size_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) * delta;
    while (seg + 1 < segs.size() && segs[seg + 1].start <= t) ++seg;
    for (std::size_t i = 0; i < d; ++i) out.grid.values[j * d + i] = segs[seg].value[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Closed-form moments

static Eigen::MatrixXd markov_gamma(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi,
                                    const Eigen::MatrixXd& g) {
  const Eigen::Index S = P.rows();
  Eigen::MatrixXd Pi = Eigen::VectorXd::Ones(S) * pi.transpose();
  Eigen::MatrixXd Z = (Eigen::MatrixXd::Identity(S, S) - P + Pi).inverse();
  // sum_{l>=1} P^l g = (Z - I) g for centered g
  Eigen::MatrixXd future = (Z - Eigen::MatrixXd::Identity(S, S)) * g;
  return g.transpose() * pi.asDiagonal() * future;
}

std::optional<Eigen::MatrixXd> analytic_autocovariance(const ProcessSpec& spec, std::size_t lag) {
  validate(spec);
  const auto d = static_cast<Eigen::Index>(spec.dim);
  switch (spec.family) {
    case Family::IidGaussian:
      return lag == 0 ? spec.covariance : Eigen::MatrixXd::Zero(d, d);
    case Family::Ar1: {
      const double a = spec.ar_coefficient;
      return Eigen::MatrixXd(spec.covariance / (1.0 - a * a) * std::pow(a, static_cast<double>(lag)));
    }
    case Family::MarkovFunctional: {
      Eigen::VectorXd pi = stationary_distribution(spec.transition);
      Eigen::MatrixXd Pl = Eigen::MatrixXd::Identity(spec.transition.rows(), spec.transition.rows());
      for (std::size_t l = 0; l < lag; ++l) Pl = Pl * spec.transition;
      return Eigen::MatrixXd(spec.observable.transpose() * pi.asDiagonal() * Pl * spec.observable);
    }
    case Family::DoublingMap: {
      Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
      if (lag >= 62) return c;
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
          if (static_cast<long long>(spec.frequencies[i]) ==
              (static_cast<long long>(spec.frequencies[j]) << lag))
            c(i, j) = 0.5;
      return c;
    }
    case Family::SuspensionOverMarkov:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<AnalyticMoments> analytic_moments(const ProcessSpec& spec) {
  validate(spec);
  const auto d = static_cast<Eigen::Index>(spec.dim);
  AnalyticMoments m;
  switch (spec.family) {
    case Family::IidGaussian:
      m.c0 = spec.covariance;
      m.gamma = Eigen::MatrixXd::Zero(d, d);
      break;
    case Family::Ar1: {
      const double a = spec.ar_coefficient;
      m.c0 = spec.covariance / (1.0 - a * a);
      m.gamma = m.c0 * (a / (1.0 - a));
      break;
    }
    case Family::MarkovFunctional: {
      Eigen::VectorXd pi = stationary_distribution(spec.transition);
      m.c0 = spec.observable.transpose() * pi.asDiagonal() * spec.observable;
      m.gamma = markov_gamma(spec.transition, pi, spec.observable);
      break;
    }
    case Family::DoublingMap: {
      m.c0 = *analytic_autocovariance(spec, 0);
      m.gamma = Eigen::MatrixXd::Zero(d, d);
      for (std::size_t l = 1; l < 62; ++l) m.gamma += *analytic_autocovariance(spec, l);
      break;
    }
    case Family::SuspensionOverMarkov: {
      Eigen::VectorXd pi = stationary_distribution(spec.transition);
      Eigen::MatrixXd eta = spec.observable;
      Eigen::VectorXd tau2(pi.size());
      for (Eigen::Index s = 0; s < eta.rows(); ++s) {
        const double t = spec.ceiling[static_cast<std::size_t>(s)];
        eta.row(s) *= t;
        tau2(s) = t * t;
      }
      m.c0 = eta.transpose() * pi.asDiagonal() * eta;
      Eigen::VectorXd w = pi.cwiseProduct(tau2);
      Eigen::MatrixXd within = 0.5 * spec.observable.transpose() * w.asDiagonal() * spec.observable;
      Eigen::MatrixXd gamma_eta = markov_gamma(spec.transition, pi, eta);
      m.sigma = m.c0 + gamma_eta + gamma_eta.transpose();
      m.gamma = gamma_eta + within;
      return m;
    }
  }
  m.sigma = m.c0 + m.gamma + m.gamma.transpose();
  return m;
}

}  // namespace siglift
