#include <doctest.h>

#include <cmath>

#include "siglift/errors.hpp"
#include "siglift/moments.hpp"
#include "siglift/process.hpp"

using namespace siglift;

namespace {

SamplePath cell_path(std::size_t cells, std::size_t per_cell, std::size_t d, std::uint64_t seed) {
  auto base = generate(iid_gaussian_spec(d, 1.0, seed), cells);
  SamplePath p;
  p.kind = PathKind::Continuous;
  p.dim = d;
  p.delta = 1.0 / static_cast<double>(per_cell);
  for (std::size_t c = 0; c < cells; ++c)
    for (std::size_t j = 0; j < per_cell; ++j)
      for (std::size_t i = 0; i < d; ++i) p.values.push_back(base.values[c * d + i]);
  return p;
}

}  // namespace

TEST_CASE("identity sigma = C0 + gamma + gamma^T to machine precision") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    ProcessSpec ar;
    ar.family = Family::Ar1;
    ar.dim = 3;
    ar.ar_coefficient = 0.6;
    ar.covariance = Eigen::MatrixXd::Identity(3, 3);
    ar.covariance(0, 1) = ar.covariance(1, 0) = 0.4;
    auto p = generate(ar, 5000, s);
    auto r = estimate_sigma_gamma(p, default_lag_window(p.size()));
    Eigen::MatrixXd id = r.c0 + r.gamma + r.gamma.transpose();
    CHECK((r.sigma - id).cwiseAbs().maxCoeff() <= 1e-12 * r.sigma.cwiseAbs().maxCoeff());
    CHECK((r.sigma - r.sigma.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("iid unit variance") {
  auto p = generate(iid_gaussian_spec(1, 1.0, 1), 200000);
  auto r = estimate_sigma_gamma(p, default_lag_window(p.size()));
  CHECK(std::abs(r.sigma(0, 0) - 1.0) < 3.0 * r.stderr_sigma(0, 0) + 1e-3);
  CHECK(std::abs(r.gamma(0, 0)) < 3.0 * r.stderr_gamma(0, 0) + 1e-3);
  CHECK(r.lag_window == 59);
  CHECK(default_lag_window(1000) == 10);
  CHECK(default_lag_window(1001) == 11);
}

TEST_CASE("ar1 closed form sigma 4, gamma 4/3") {
  auto a = analytic_moments(ar1_spec(0.5));
  REQUIRE(a);
  CHECK(a->sigma(0, 0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(a->gamma(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(a->c0(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));

  auto p = generate(ar1_spec(0.5, 1.0, 5), 400000);
  auto r = estimate_sigma_gamma(p, default_lag_window(p.size()));
  CHECK(std::abs(r.sigma(0, 0) - 4.0) < 4.0 * r.stderr_sigma(0, 0));
  CHECK(std::abs(r.gamma(0, 0) - 4.0 / 3.0) < 4.0 * r.stderr_gamma(0, 0));
  // doubling the window moves sigma by less than 3 stderr
  auto r2 = estimate_sigma_gamma(p, 2 * default_lag_window(p.size()));
  CHECK(std::abs(r2.sigma(0, 0) - r.sigma(0, 0)) < 3.0 * std::hypot(r.stderr_sigma(0, 0), r2.stderr_sigma(0, 0)));
}

TEST_CASE("two-state chain sigma (1-p)/p") {
  for (double p : {0.5, 0.3}) {
    double geo = 0.0;  // 1 + 2 sum_{l>=1} (1-2p)^l
    for (int l = 1; l < 200; ++l) geo += std::pow(1.0 - 2.0 * p, l);
    auto a = analytic_moments(two_state_spec(p));
    CHECK(a->sigma(0, 0) == doctest::Approx(1.0 + 2.0 * geo).epsilon(1e-12));
    CHECK(a->sigma(0, 0) == doctest::Approx((1.0 - p) / p).epsilon(1e-12));
  }
  auto path = generate(two_state_spec(0.5, 1.0, 2), 200000);
  auto r = estimate_sigma_gamma(path, default_lag_window(path.size()));
  CHECK(std::abs(r.sigma(0, 0) - 1.0) < 4.0 * r.stderr_sigma(0, 0));
}

TEST_CASE("estimator preconditions") {
  auto p = generate(iid_gaussian_spec(1), 100);
  CHECK_NOTHROW(estimate_sigma_gamma(p, 10));
  CHECK_THROWS_AS(estimate_sigma_gamma(p, 11), ValidationError);
  CHECK_THROWS_AS(estimate_gamma_continuous(p, 1.0), ValidationError);
  auto c = cell_path(3, 4, 1, 1);
  CHECK_THROWS_AS(estimate_gamma_continuous(c, 5.0), ValidationError);
  CHECK_THROWS_AS(estimate_gamma_continuous(c, 0.5), ValidationError);
}

TEST_CASE("asymmetric cross covariance is flagged") {
  // xi_2(k) = xi_1(k-1): Gamma^{12} = 1, Gamma^{21} = 0
  auto base = generate(iid_gaussian_spec(1, 1.0, 3), 50001);
  SamplePath p;
  p.dim = 2;
  for (std::size_t k = 1; k < base.size(); ++k) {
    p.values.push_back(base.values[k]);
    p.values.push_back(base.values[k - 1]);
  }
  auto r = estimate_sigma_gamma(p, 5);
  CHECK(r.asymmetric_gamma);
  CHECK(r.gamma(0, 1) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(std::abs(r.gamma(1, 0)) < 0.05);
  auto sym = estimate_sigma_gamma(generate(iid_gaussian_spec(2, 1.0, 4), 50000), 5);
  CHECK_FALSE(sym.asymmetric_gamma);
}

TEST_CASE("continuous estimator on iid unit cells") {
  // Exact cell integration: C(r) = (1 - r)_+, so int_0^inf C = 1/2,
  // int_0^1 (1 - r) C(r) dr = 1/3 and sigma = 1.
  auto p = cell_path(40000, 8, 1, 6);
  auto r = estimate_gamma_continuous(p, 4.0);
  CHECK(std::abs(r.gamma(0, 0) - 0.5) < 4.0 * r.stderr_gamma(0, 0) + 2e-3);
  CHECK(std::abs(r.sigma(0, 0) - 1.0) < 4.0 * r.stderr_sigma(0, 0) + 4e-3);
  CHECK(r.f_corr(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(0.03));
  CHECK(r.f_corr(0, 0) < 0.5);

  auto zero = cell_path(100, 4, 1, 6);
  std::fill(zero.values.begin(), zero.values.end(), 0.0);
  auto z = estimate_gamma_continuous(zero, 2.0);
  CHECK(z.sigma.cwiseAbs().maxCoeff() == 0.0);
  CHECK(z.gamma.cwiseAbs().maxCoeff() == 0.0);
  CHECK(z.f_corr.cwiseAbs().maxCoeff() == 0.0);

  auto two = estimate_gamma_continuous(cell_path(20000, 4, 2, 8), 3.0);
  CHECK(std::abs(two.sigma(0, 1)) < 3.0 * two.stderr_sigma(0, 1) + 1e-3);
  CHECK(std::abs(two.gamma(1, 0)) < 3.0 * two.stderr_gamma(1, 0) + 1e-3);
}

TEST_CASE("suspension estimator") {
  ProcessSpec s;
  s.family = Family::SuspensionOverMarkov;
  s.transition = two_state_spec(0.3).transition;
  s.observable = two_state_spec(0.3).observable;
  s.ceiling = {1.0, 1.0};
  s.ceiling_bound = 1.0;
  auto out = generate_suspension(s, 20000.0, 0.25, 3);
  auto sr = estimate_gamma_suspension(out.eta, out.grid.segments, 20);
  auto dr = estimate_sigma_gamma(out.eta, 20);
  CHECK(sr.sigma == dr.sigma);
  CHECK((sr.gamma - dr.gamma - sr.f_corr).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(sr.f_corr(0, 0) == doctest::Approx(0.5).epsilon(1e-12));

  // independent segments with ceilings 1 and 2 and g = (1, -1/2)
  ProcessSpec ind;
  ind.family = Family::SuspensionOverMarkov;
  ind.transition = Eigen::MatrixXd::Constant(2, 2, 0.5);
  ind.observable.resize(2, 1);
  ind.observable << 1.0, -0.5;
  ind.ceiling = {1.0, 2.0};
  ind.ceiling_bound = 2.0;
  auto o = generate_suspension(ind, 80000.0, 0.125, 5);
  auto r = estimate_gamma_suspension(o.eta, o.grid.segments, 10);
  const double half_sq = 0.5 * (0.5 * 1.0 * 1.0 + 0.5 * 4.0 * 0.25);  // E[(tau g)^2] / 2
  CHECK(r.f_corr(0, 0) == doctest::Approx(half_sq).epsilon(0.03));
  CHECK(std::abs(r.gamma(0, 0) - r.f_corr(0, 0)) < 4.0 * r.stderr_gamma(0, 0) + 1e-3);
  CHECK((r.sigma - (r.c0 + 2.0 * (r.gamma - r.f_corr))).cwiseAbs().maxCoeff() < 1e-12);

  auto a = analytic_moments(ind);
  CHECK(a->gamma(0, 0) == doctest::Approx(half_sq).epsilon(1e-12));
}

TEST_CASE("json round trip") {
  auto r = estimate_sigma_gamma(generate(ar1_spec(0.2, 1.0, 1), 1000), 5);
  auto back = covariance_report_from_json(to_json(r));
  CHECK(back.sigma == r.sigma);
  CHECK(back.gamma == r.gamma);
  CHECK(back.lag_window == 5);
  CHECK_THROWS_AS(covariance_report_from_json(nlohmann::json::object()), ValidationError);
}

TEST_CASE("characteristic function gap") {
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  auto g0 = char_fn_gap(ar1_spec(0.5), 64, zero, 1000, 1);
  CHECK(g0.gap == 0.0);

  Eigen::VectorXd w = Eigen::VectorXd::Ones(1);
  auto gi = char_fn_gap(iid_gaussian_spec(1), 64, w, 20000, 2);
  CHECK(gi.gap < 4.0 * gi.stderr + 1e-3);
  CHECK(gi.target == doctest::Approx(std::exp(-0.5)));

  Eigen::VectorXd big = Eigen::VectorXd::Constant(1, 5.0);
  CHECK_FALSE(char_fn_gap(iid_gaussian_spec(1), 64, big, 1000, 2).admissible);

  auto a = char_fn_gap(ar1_spec(0.5), 4, w, 20000, 3);
  auto b = char_fn_gap(ar1_spec(0.5), 1024, w, 20000, 4);
  CHECK(b.gap < a.gap);

  auto t1 = char_fn_gap(two_state_spec(0.3), 128, w, 2000, 9, 1);
  auto t8 = char_fn_gap(two_state_spec(0.3), 128, w, 2000, 9, 8);
  CHECK(t1.re == t8.re);
  CHECK(t1.im == t8.im);
}
