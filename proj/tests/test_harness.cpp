#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "siglift/errors.hpp"
#include "siglift/harness.hpp"
#include "siglift/io.hpp"

using namespace siglift;
namespace fs = std::filesystem;

namespace {

RateReport fixed_report(std::vector<std::size_t> n_values, std::vector<double> medians) {
  RateReport r;
  r.config.n_values = std::move(n_values);
  RateFit f;
  f.metric = "sup";
  f.level = 1;
  f.medians = std::move(medians);
  f.fitted = f.medians.size() >= 2;
  if (f.fitted) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < f.medians.size(); ++i) {
      x.push_back(std::log(static_cast<double>(r.config.n_values[i])));
      y.push_back(std::log(f.medians[i]));
    }
    f.fit = ols_fit(x, y);
  }
  r.fits.push_back(f);
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("siglift_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("zero observable gives zero distances") {
  auto spec = two_state_spec(0.3, 0.0, 1);
  RateConfig cfg;
  cfg.n_values = {256, 512};
  cfg.seeds = 3;
  cfg.rho = 2.0;
  cfg.seed = 4;
  auto r = run_rate(spec, cfg);
  CHECK(r.cells.size() == 6);
  for (const auto& c : r.cells) {
    for (double v : c.sup) CHECK(v == 0.0);
    for (double v : c.pvar) CHECK(v == 0.0);
  }
}

TEST_CASE("rate report structure") {
  auto spec = two_state_spec(0.3, 1.0, 1);
  RateConfig cfg;
  cfg.n_values = {256, 1024};
  cfg.seeds = 4;
  cfg.rho = 2.0;
  cfg.pvar_grid = 129;
  cfg.seed = 7;
  auto r = run_rate(spec, cfg);
  CHECK(r.coupling_law == "lattice");
  for (std::size_t i = 1; i < r.cells.size(); ++i)
    CHECK(std::make_pair(r.cells[i - 1].n, r.cells[i - 1].replica) <
          std::make_pair(r.cells[i].n, r.cells[i].replica));
  for (const auto& c : r.cells) {
    REQUIRE(c.sup.size() == 2);
    for (std::size_t l = 0; l < 2; ++l) {
      CHECK(c.pvar[l] >= c.lower[l]);
      CHECK(c.sup[l] >= 0.0);
    }
  }
  CHECK(r.find("pvar", 2).fitted);
  CHECK(r.find("sup_zero_gamma", 2).medians.size() == 2);
  CHECK_THROWS(r.find("nope", 1));

  cfg.threads = 1;
  auto a = to_json(run_rate(spec, cfg)).dump();
  cfg.threads = 4;
  auto b = to_json(run_rate(spec, cfg)).dump();
  CHECK(a == b);
  CHECK(a == to_json(r).dump());
}

TEST_CASE("golden rate plot") {
  auto r = fixed_report({1024, 4096, 16384, 65536}, {0.5, 0.41, 0.33, 0.27});
  const std::string svg = rate_svg(r, "sup", 1);
  const fs::path golden = fs::path(SIGLIFT_GOLDEN_DIR) / "rate_sup_nu1.svg";
  if (std::getenv("SIGLIFT_UPDATE_GOLDEN")) write_text_file(golden.string(), svg);
  REQUIRE(fs::exists(golden));
  CHECK(slurp(golden) == svg);
  CHECK(rate_svg(r, "sup", 1) == svg);
}

TEST_CASE("plot edge cases") {
  auto dir = scratch("plots");
  auto empty = fixed_report({}, {});
  CHECK_THROWS_AS(emit_plots(empty, dir.string()), ValidationError);
  CHECK_FALSE(fs::exists(dir));

  auto single = fixed_report({4096}, {0.3});
  const std::string svg = rate_svg(single, "sup", 1);
  CHECK(svg.find("<circle") != std::string::npos);
  CHECK(svg.find("<polyline") == std::string::npos);
  auto names = emit_plots(single, dir.string());
  CHECK(names == std::vector<std::string>{"rate_sup_nu1.svg"});
  CHECK(slurp(dir / names[0]) == svg);

  auto fitted = rate_svg(fixed_report({1024, 4096}, {0.5, 0.4}), "sup", 1);
  CHECK(fitted.find("<polyline") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("moment growth is at most quadratic") {
  std::vector<std::size_t> ns;
  for (std::size_t n = 256; n <= 65536; n *= 4) ns.push_back(n);
  auto g = moment_growth(two_state_spec(0.3), ns, 200, 5);
  CHECK(g.fourth.size() == ns.size());
  CHECK(g.fit.slope <= 2.3);
  CHECK(g.fit.slope > 1.5);
}

TEST_CASE("lil checkpoints and traces") {
  auto cp = lil_checkpoints(1000.0, 1.1);
  CHECK(cp.front() == 4.0);
  CHECK(cp.back() == 1000.0);
  for (std::size_t i = 1; i < cp.size(); ++i) CHECK(cp[i] > cp[i - 1]);

  LilConfig cfg;
  cfg.tau_max = 1e4;
  cfg.seed = 3;
  auto zero = run_lil(two_state_spec(0.3, 0.0), cfg);
  for (const auto& p : zero.points) {
    CHECK(p.sup_level == 0.0);
    CHECK(p.classical_max == 0.0);
  }

  auto t = run_lil(iid_gaussian_spec(1), cfg);
  double prev = 0.0;
  for (const auto& p : t.points) {
    CHECK(p.endpoint_max >= prev);
    CHECK(p.endpoint_max >= p.endpoint);
    CHECK(p.paper == doctest::Approx(p.classical * std::sqrt(2.0)).epsilon(1e-12));
    prev = p.endpoint_max;
  }
  CHECK(to_json(t).dump() == to_json(run_lil(iid_gaussian_spec(1), cfg)).dump());

  LilConfig bm = cfg;
  bm.nu = 2;
  bm.pure_brownian = true;
  auto b = run_lil(iid_gaussian_spec(1), bm);
  const auto& last = b.points.back();
  CHECK(last.classical == doctest::Approx(last.oracle_classical).epsilon(0.05));
  CHECK(last.paper == doctest::Approx(last.oracle_paper).epsilon(0.05));

  auto dir = scratch("lil");
  CHECK(emit_plots(t, dir.string()) == std::vector<std::string>{"lil_trace.svg"});
  CHECK(slurp(dir / "lil_trace.svg") == lil_svg(t));
  fs::remove_all(dir);
}

TEST_CASE("clt report") {
  CltConfig cfg;
  cfg.n = 64;
  cfg.replicas = 1000;
  cfg.permutations = 50;
  cfg.seed = 5;
  auto r = run_clt(iid_gaussian_spec(1), cfg);
  CHECK(r.ks.size() == 1);
  CHECK(r.energy.permutations == 50);
  CHECK(r.energy.p_value > 0.0);
  cfg.replicas = 999;
  CHECK_THROWS_AS(run_clt(iid_gaussian_spec(1), cfg), ValidationError);
}

TEST_CASE("reference moments") {
  auto a = reference_moments(ar1_spec(0.5), 1);
  CHECK(a.analytic);
  CHECK(a.sigma(0, 0) == doctest::Approx(4.0));
  CHECK(gamma_mode_from_string(to_string(GammaMode::Zero)) == GammaMode::Zero);
  CHECK_THROWS_AS(gamma_mode_from_string("bogus"), ValidationError);
}
