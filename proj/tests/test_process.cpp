#include <doctest.h>

#include <cmath>
#include <numeric>

#include "siglift/errors.hpp"
#include "siglift/process.hpp"
#include "siglift/stats.hpp"

using namespace siglift;

namespace {

double lag_autocov(const SamplePath& p, std::size_t lag) {
  const std::size_t n = p.size();
  double s = 0.0;
  for (std::size_t k = 0; k + lag < n; ++k) s += p.values[k] * p.values[k + lag];
  return s / static_cast<double>(n - lag);
}

ProcessSpec three_state_suspension() {
  ProcessSpec s;
  s.family = Family::SuspensionOverMarkov;
  s.transition.resize(3, 3);
  s.transition << 0.5, 0.3, 0.2, 0.2, 0.5, 0.3, 0.3, 0.2, 0.5;
  // stationary law is uniform (doubly stochastic); tau * g sums to zero
  s.ceiling = {0.5, 1.0, 2.0};
  s.observable.resize(3, 1);
  s.observable << 2.0, -2.0, 0.5;
  s.ceiling_bound = 2.0;
  s.seed = 11;
  return s;
}

}  // namespace

TEST_CASE("spec validation rejects bad input") {
  ProcessSpec p = two_state_spec(0.3);
  p.transition(0, 0) = 0.5;  // row no longer sums to one
  CHECK_THROWS_AS(validate(p), ValidationError);

  ProcessSpec reducible;
  reducible.family = Family::MarkovFunctional;
  reducible.transition = Eigen::MatrixXd::Identity(2, 2);
  reducible.observable.resize(2, 1);
  reducible.observable << 1, -1;
  CHECK_THROWS_AS(validate(reducible), ValidationError);

  ProcessSpec periodic = two_state_spec(0.5);
  periodic.transition << 0, 1, 1, 0;
  CHECK_THROWS_AS(validate(periodic), ValidationError);

  CHECK_THROWS_AS(ar1_spec(1.0), ValidationError);
  CHECK_THROWS_AS(ar1_spec(-1.2), ValidationError);

  ProcessSpec uncentered = two_state_spec(0.3);
  uncentered.observable << 1.0, 0.0;
  CHECK_THROWS_AS(validate(uncentered), ValidationError);

  ProcessSpec susp = three_state_suspension();
  CHECK_NOTHROW(validate(susp));
  susp.ceiling[0] = 0.25;
  CHECK_THROWS_AS(validate(susp), ValidationError);

  auto bad_cov = iid_gaussian_spec(2);
  bad_cov.covariance(0, 1) = bad_cov.covariance(1, 0) = 2.0;
  CHECK_THROWS_AS(validate(bad_cov), ValidationError);

  CHECK_THROWS_AS(spec_from_json(nlohmann::json{{"family", "nope"}}), ValidationError);
  CHECK_THROWS_AS(spec_from_json(nlohmann::json{{"family", "markov-functional"}}), ValidationError);
}

TEST_CASE("json round trip") {
  for (const auto& s : {iid_gaussian_spec(2, 1.5, 3), ar1_spec(0.4, 2.0, 4), two_state_spec(0.2, 1.0, 5),
                        three_state_suspension()}) {
    auto back = spec_from_json(spec_to_json(s));
    CHECK(spec_to_json(back) == spec_to_json(s));
  }
}

TEST_CASE("iid mean within CLT band") {
  const std::size_t n = 100000;
  auto p = generate(iid_gaussian_spec(1, 1.0, 1), n);
  CHECK(std::abs(p.empirical_mean()[0]) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("ar1 lag-1 autocorrelation") {
  const std::size_t n = 100000;
  auto p = generate(ar1_spec(0.5, 1.0, 2), n);
  const double rho = lag_autocov(p, 1) / lag_autocov(p, 0);
  CHECK(std::abs(rho - 0.5) < 5.0 / std::sqrt(static_cast<double>(n)));
  // stationary start: the first sample already has variance 1/(1-a^2)
  std::vector<double> first;
  for (std::uint64_t s = 0; s < 4000; ++s) first.push_back(generate(ar1_spec(0.5), 1, s).values[0]);
  double v = 0.0;
  for (double x : first) v += x * x;
  v /= static_cast<double>(first.size());
  CHECK(v == doctest::Approx(4.0 / 3.0).epsilon(0.1));
}

TEST_CASE("two-state chain autocovariance (1-2p)^k") {
  const std::size_t n = 200000;
  const double p = 0.2;
  auto path = generate(two_state_spec(p, 1.0, 3), n);
  // variance of each lag estimate is at most sum of squared correlations / n
  const double band = 5.0 * std::sqrt((1.0 + (1 - 2 * p)) / (2 * p) / static_cast<double>(n));
  for (std::size_t k = 0; k <= 5; ++k) {
    const double oracle = std::pow(1.0 - 2.0 * p, static_cast<double>(k));
    CHECK(std::abs(lag_autocov(path, k) - oracle) < band);
    CHECK((*analytic_autocovariance(two_state_spec(p), k))(0, 0) ==
          doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("stationarity smoke test") {
  const std::size_t n = 100000, k = 5000;
  auto path = generate(ar1_spec(0.5, 1.0, 9), n + k);
  std::vector<double> a(path.values.begin(), path.values.begin() + n / 2);
  std::vector<double> b(path.values.begin() + k + n / 2, path.values.begin() + k + n);
  CHECK(ks_two_sample(a, b).p_value > 0.001);
}

TEST_CASE("determinism") {
  for (const auto& s : {iid_gaussian_spec(3, 1.0, 7), ar1_spec(0.3, 1.0, 7), two_state_spec(0.1, 1.0, 7)}) {
    auto a = generate(s, 500), b = generate(s, 500);
    CHECK(a.values == b.values);
    CHECK(generate(s, 500, 8).values != a.values);
  }
  ProcessSpec dm;
  dm.family = Family::DoublingMap;
  dm.dim = 2;
  dm.frequencies = {1, 2};
  auto a = generate(dm, 300, 5), b = generate(dm, 300, 5);
  CHECK(a.values == b.values);
}

TEST_CASE("doubling map does not collapse") {
  ProcessSpec dm;
  dm.family = Family::DoublingMap;
  dm.frequencies = {1};
  auto p = generate(dm, 5000, 1);
  // after 53 float doublings a naive state is 0 and cos is stuck at 1
  std::size_t ones = 0;
  for (std::size_t k = 100; k < 5000; ++k) ones += p.values[k] == 1.0;
  CHECK(ones < 10);
  CHECK(std::abs(p.empirical_mean()[0]) < 0.05);
  // x_{k+1} = 2 x_k mod 1
  for (std::size_t k = 0; k + 1 < 200; ++k) {
    double x = doubling_to_double(p.doubling[k]);
    double y = doubling_to_double(p.doubling[k + 1]);
    CHECK(std::abs(std::fmod(2.0 * x, 1.0) - y) < 1e-12);
  }
  auto cert = mixing_certificate(dm);
  CHECK(cert.empirical_only);
}

TEST_CASE("mixing certificates") {
  Eigen::MatrixXd P(2, 2);
  P << 0.9, 0.1, 0.1, 0.9;
  auto c = mixing_bound_markov(P);
  CHECK(c.lambda == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(c.power == 1);

  Eigen::MatrixXd same(3, 3);
  same << 0.2, 0.5, 0.3, 0.2, 0.5, 0.3, 0.2, 0.5, 0.3;
  CHECK(mixing_bound_markov(same).lambda == 0.0);

  Eigen::MatrixXd periodic(2, 2);
  periodic << 0, 1, 1, 0;
  CHECK_THROWS_AS(mixing_bound_markov(periodic), ValidationError);
  CHECK_THROWS_AS(mixing_bound_markov(Eigen::MatrixXd::Identity(2, 2)), ValidationError);

  // rows with disjoint support: P itself does not contract, P^2 does
  Eigen::MatrixXd slow(3, 3);
  slow << 0, 1, 0, 0, 0.5, 0.5, 1, 0, 0;
  auto s = mixing_bound_markov(slow);
  CHECK(s.power > 1);
  CHECK(s.lambda < 1.0);
  CHECK(s.lambda >= 0.0);

  CHECK(mixing_certificate(ar1_spec(0.5)).coefficient == "rho");
  CHECK(mixing_certificate(iid_gaussian_spec(1)).lambda == 0.0);
}

TEST_CASE("stationary distribution solves pi P = pi") {
  Eigen::MatrixXd P(3, 3);
  P << 0.1, 0.6, 0.3, 0.4, 0.4, 0.2, 0.5, 0.0, 0.5;
  Eigen::VectorXd pi = stationary_distribution(P);
  CHECK((pi.transpose() * P - pi.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(pi.sum() == doctest::Approx(1.0));
  CHECK(chain_period(P) == 1);
  CHECK(is_irreducible(P));
}

TEST_CASE("suspension with unit ceiling holds the base sequence") {
  ProcessSpec s;
  s.family = Family::SuspensionOverMarkov;
  s.transition = two_state_spec(0.3).transition;
  s.observable = two_state_spec(0.3).observable;
  s.ceiling = {1.0, 1.0};
  s.ceiling_bound = 1.0;
  auto out = generate_suspension(s, 50.0, 0.25, 4);
  CHECK(out.eta.size() == 50);
  CHECK(out.grid.size() == 200);
  for (std::size_t j = 0; j < 200; ++j) CHECK(out.grid.values[j] == out.eta.values[j / 4]);
  CHECK_THROWS_AS(generate_suspension(s, 10.0, 0.3, 4), ValidationError);
}

TEST_CASE("suspension with constant ceiling c rescales time") {
  ProcessSpec s;
  s.family = Family::SuspensionOverMarkov;
  s.transition = two_state_spec(0.3).transition;
  s.observable = two_state_spec(0.3).observable;
  s.ceiling = {2.0, 2.0};
  s.ceiling_bound = 2.0;
  auto out = generate_suspension(s, 40.0, 0.125, 4);
  CHECK(out.eta.size() == 20);
  for (std::size_t m = 0; m < out.eta.size(); ++m) {
    CHECK(out.eta.values[m] == 2.0 * out.grid.segments[m].value[0]);
    for (std::size_t j = 0; j < 16; ++j) CHECK(out.grid.values[m * 16 + j] == out.grid.segments[m].value[0]);
  }
}

TEST_CASE("suspension segments and eta mean") {
  auto s = three_state_suspension();
  auto out = generate_suspension(s, 1000.0, 0.125, 21);
  double acc = 0.0;
  for (std::size_t m = 0; m < out.grid.segments.size(); ++m) {
    CHECK(out.grid.segments[m].start == acc);
    acc += s.ceiling[static_cast<std::size_t>(out.eta.states[m])];
  }
  // E eta = 0 across replicas
  std::vector<double> means;
  double var = 0.0;
  for (std::uint64_t r = 0; r < 10000; ++r) {
    auto o = generate_suspension(s, 4.0, 0.125, r);
    means.push_back(o.eta.values[0]);
    var += o.eta.values[0] * o.eta.values[0];
  }
  var /= 10000.0;
  CHECK(std::abs(mean(means)) < 4.0 * std::sqrt(var / 10000.0));

  auto e = eta_view(s);
  CHECK(e.family == Family::MarkovFunctional);
  CHECK(e.observable(2, 0) == 1.0);
  CHECK_NOTHROW(validate(e));
}
