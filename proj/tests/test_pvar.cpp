#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "siglift/errors.hpp"
#include "siglift/pvar.hpp"
#include "siglift/signature.hpp"

using namespace siglift;

namespace {

TwoParamEval path_eval(const std::vector<double>& x) {
  return {x.size(), [&x](std::size_t i, std::size_t j) { return std::abs(x[j] - x[i]); }};
}

// max over all partitions by subset enumeration of the interior points
double brute_pvar(const TwoParamEval& f, double p) {
  const std::size_t m = f.points;
  double best = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << (m - 2)); ++mask) {
    double s = 0.0;
    std::size_t prev = 0;
    for (std::size_t k = 1; k < m; ++k) {
      if (k < m - 1 && !(mask & (1u << (k - 1)))) continue;
      s += std::pow(f.eval(prev, k), p);
      prev = k;
    }
    best = std::max(best, s);
  }
  return std::pow(best, 1.0 / p);
}

std::vector<GradedTensor> prefixes(const SamplePath& p, std::size_t depth) {
  PrefixSignatureStream s(p.dim, depth);
  std::vector<GradedTensor> out{s.state()};
  for (std::size_t k = 0; k < p.size(); ++k) {
    s.push(p.row(k));
    out.push_back(s.state());
  }
  return out;
}

}  // namespace

TEST_CASE("dynamic program equals exhaustive search") {
  siglift::Rng rng(3);
  for (std::size_t m = 2; m <= 12; ++m) {
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<double> x(m);
      for (double& v : x) v = standard_normal(rng);
      auto f = path_eval(x);
      for (double p : {1.5, 2.1, 2.5, 2.9, 4.0}) {
        auto r = pvar_norm(f, p, 0, m - 1);
        CHECK(r.norm == doctest::Approx(brute_pvar(f, p)).epsilon(1e-12));
        double s = 0.0;
        for (std::size_t k = 0; k + 1 < r.partition.size(); ++k)
          s += std::pow(f.eval(r.partition[k], r.partition[k + 1]), p);
        CHECK(std::pow(s, 1.0 / p) == doctest::Approx(r.norm).epsilon(1e-12));
        CHECK(r.partition.front() == 0);
        CHECK(r.partition.back() == m - 1);
      }
    }
  }
}

TEST_CASE("closed-form cases") {
  std::vector<double> mono{0.0, 0.3, 0.5, 1.2, 2.0};
  auto rm = pvar_norm(path_eval(mono), 2.5, 0, 4);
  CHECK(rm.norm == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(rm.partition == std::vector<std::size_t>{0, 4});

  std::vector<double> saw{0, 1, 0, 1};
  auto rs = pvar_norm(path_eval(saw), 2.5, 0, 3);
  CHECK(rs.norm == doctest::Approx(std::pow(3.0, 1.0 / 2.5)).epsilon(1e-15));
  CHECK(rs.partition.size() == 4);

  TwoParamEval lin{101, [](std::size_t i, std::size_t j) { return (double(j) - double(i)) / 100.0; }};
  auto rl = pvar_norm(lin, 2.0, 0, 100);
  CHECK(rl.norm == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rl.partition.size() == 2);

  CHECK(pvar_norm(lin, 2.0, 7, 7).norm == 0.0);
  CHECK_THROWS_AS(pvar_norm(lin, 1.0, 0, 10), ValidationError);
  CHECK_THROWS_AS(pvar_norm(lin, 2.0, 5, 4), ValidationError);
  CHECK_THROWS_AS(pvar_norm(lin, 2.0, 0, 101), ValidationError);
}

TEST_CASE("monotone in the interval and decreasing in p") {
  siglift::Rng rng(5);
  std::vector<double> x(60);
  for (double& v : x) v = standard_normal(rng);
  auto f = path_eval(x);
  double prev = 0.0;
  for (std::size_t e = 1; e < 60; e += 7) {
    double v = pvar_norm(f, 2.5, 0, e).norm;
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(pvar_norm(f, 2.0, 0, 59).norm >= pvar_norm(f, 3.0, 0, 59).norm);
}

TEST_CASE("work guard") {
  TwoParamEval big{kPvarWorkGuard + 1, [](std::size_t, std::size_t) { return 0.0; }};
  CHECK_THROWS_AS(pvar_norm(big, 2.0, 0, kPvarWorkGuard), BudgetError);
  std::vector<GradedTensor> a(kPvarWorkGuard + 1, GradedTensor(1, 1));
  CHECK_THROWS_AS(pvar_distance(a, a, 1, 2.5), BudgetError);
}

TEST_CASE("distance between signature streams") {
  auto p = testing::random_path(30, 2, 8);
  auto q = testing::random_path(30, 2, 9);
  auto a = prefixes(p, 3);
  auto b = prefixes(q, 3);
  CHECK(pvar_distance(a, a, 2, 2.5).norm == 0.0);
  CHECK(sup_distance(a, a, 3) == 0.0);

  // oracle: brute-force increments of each path
  for (std::size_t level = 1; level <= 2; ++level) {
    const double p_exp = 2.5 / static_cast<double>(level);
    TwoParamEval f{31, [&](std::size_t i, std::size_t j) {
                     if (i == j) return 0.0;
                     auto sp = sig_brute(p, 3, i, j), sq = sig_brute(q, 3, i, j);
                     auto x = sp.level(level);
                     auto y = sq.level(level);
                     double m = 0.0;
                     for (std::size_t k = 0; k < x.size(); ++k) m = std::max(m, std::abs(x[k] - y[k]));
                     return m;
                   }};
    auto want = pvar_norm(f, p_exp, 0, 30);
    auto got = pvar_distance(a, b, level, 2.5);
    CHECK(got.norm == doctest::Approx(want.norm).epsilon(1e-9));
  }
  CHECK_THROWS_AS(pvar_distance(a, b, 3, 2.5), ValidationError);  // p / nu < 1
  CHECK_THROWS_AS(pvar_distance(a, b, 4, 5.0), ValidationError);
  std::vector<GradedTensor> shorter(a.begin(), a.end() - 1);
  CHECK_THROWS_AS(sup_distance(shorter, b, 1), ValidationError);

  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j)
    for (std::size_t k = 0; k < 4; ++k) m = std::max(m, std::abs(a[j].level(2)[k] - b[j].level(2)[k]));
  CHECK(sup_distance(a, b, 2) == m);
}
