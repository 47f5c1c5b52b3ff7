#include "siglift/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>

#include "siglift/coupling.hpp"
#include "siglift/errors.hpp"
#include "siglift/io.hpp"
#include "siglift/lift.hpp"
#include "siglift/moments.hpp"
#include "siglift/pvar.hpp"
#include "siglift/signature.hpp"

namespace siglift {

namespace {

Eigen::MatrixXd zeros(std::size_t d) {
  return Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
}

nlohmann::json mat_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

double level_gap(const GradedTensor& a, const GradedTensor& b, std::size_t n) {
  auto x = a.level(n);
  auto y = b.level(n);
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

double level_abs(const GradedTensor& a, std::size_t n) {
  double m = 0.0;
  for (double v : a.level(n)) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

ReferenceMoments reference_moments(const ProcessSpec& spec, std::uint64_t seed, std::size_t pilot) {
  ReferenceMoments r;
  if (auto m = analytic_moments(spec)) {
    r.sigma = m->sigma;
    r.gamma = m->gamma;
    r.analytic = true;
    return r;
  }
  const CovarianceReport est =
      estimate_sigma_gamma(generate(spec, pilot, derive_seed(seed, 0xc0ffee)), default_lag_window(pilot));
  r.sigma = est.sigma;
  r.gamma = est.gamma;
  return r;
}

const char* to_string(GammaMode m) {
  switch (m) {
    case GammaMode::Estimated: return "estimated";
    case GammaMode::Analytic: return "analytic";
    case GammaMode::Zero: return "zero";
  }
  return "estimated";
}

GammaMode gamma_mode_from_string(const std::string& s) {
  if (s == "estimated") return GammaMode::Estimated;
  if (s == "analytic") return GammaMode::Analytic;
  if (s == "zero") return GammaMode::Zero;
  throw ValidationError("unknown gamma mode '" + s + "' (estimated, analytic, zero)");
}

const RateFit& RateReport::find(const std::string& metric, std::size_t level) const {
  for (const auto& f : fits)
    if (f.metric == metric && f.level == level) return f;
  throw ValidationError("rate report has no fit for " + metric + " level " + std::to_string(level));
}

RateReport run_rate(const ProcessSpec& spec_in, const RateConfig& cfg) {
  require(cfg.p > 2.0 && cfg.p < 3.0, "rate experiment needs 2 < p < 3");
  require(cfg.nu_max >= 1, "nu_max must be >= 1");
  require(!cfg.n_values.empty(), "rate experiment needs at least one N");
  require(cfg.seeds >= 1, "rate experiment needs at least one seed");
  require(cfg.pvar_grid >= 2, "pvar grid needs at least two points");
  const ProcessSpec spec = eta_view(spec_in);
  validate(spec);
  const std::size_t d = spec.dim;
  (void)GradedTensor(d, cfg.nu_max);

  RateReport rep;
  rep.config = cfg;
  rep.spec = spec_to_json(spec_in);
  std::vector<std::size_t> ns = cfg.n_values;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  for (std::size_t n : ns) require(n >= 16, "rate experiment needs N >= 16");
  rep.config.n_values = ns;
  const ReferenceMoments ref = reference_moments(spec, cfg.seed);
  rep.sigma = ref.sigma;

  CouplingOptions copts;
  copts.rho = cfg.rho;
  std::vector<Coupler> couplers;
  couplers.reserve(ns.size());
  for (std::size_t n : ns) couplers.emplace_back(spec, n, ref.sigma, copts);
  rep.coupling_law = couplers.front().law_kind();

  const std::size_t nu = cfg.nu_max;
  rep.cells.resize(ns.size() * cfg.seeds);
  parallel_for(rep.cells.size(), cfg.threads, [&](std::size_t idx) {
    const std::size_t ni = idx / cfg.seeds;
    const std::size_t n = ns[ni];
    RateCell& cell = rep.cells[idx];
    cell.n = n;
    cell.replica = idx % cfg.seeds;
    cell.seed = derive_seed(derive_seed(cfg.seed, n), cell.replica);
    const SamplePath path = generate(spec, n, cell.seed);
    const CouplingReport cr = couplers[ni].couple(path, derive_seed(cell.seed, 7));
    cell.coupling_sup = cr.sup_discrepancy;

    Eigen::MatrixXd gamma = zeros(d);
    if (cfg.gamma_mode == GammaMode::Estimated)
      gamma = estimate_sigma_gamma(path, default_lag_window(n)).gamma;
    else if (cfg.gamma_mode == GammaMode::Analytic)
      gamma = ref.gamma;
    for (Eigen::Index i = 0; i < gamma.rows(); ++i)
      for (Eigen::Index j = 0; j < gamma.cols(); ++j) cell.gamma.push_back(gamma(i, j));
    const bool paired = cfg.paired_zero_gamma;

    PrefixSignatureStream ps(d, nu);
    LiftStream lift(d, nu, gamma), lift0(d, nu, zeros(d));
    const double h = 1.0 / static_cast<double>(n);
    const double scale = std::sqrt(h);
    const std::size_t stride = std::max<std::size_t>(1, (n + cfg.pvar_grid - 2) / (cfg.pvar_grid - 1));
    std::vector<GradedTensor> sa, la, l0;
    cell.sup.assign(nu, 0.0);
    cell.sup_zero_gamma.assign(paired ? nu : 0, 0.0);
    std::vector<double> dw(d);
    GradedTensor s_norm(d, nu);
    for (std::size_t j = 0; j <= n; ++j) {
      if (j > 0) {
        ps.push(path.row(j - 1));
        for (std::size_t i = 0; i < d; ++i) dw[i] = (cr.bm.values[j * d + i] - cr.bm.values[(j - 1) * d + i]) * scale;
        lift.step(dw, h);
        if (paired) lift0.step(dw, h);
      }
      s_norm = normalize(ps.state(), static_cast<double>(n));
      for (std::size_t k = 1; k <= nu; ++k) {
        cell.sup[k - 1] = std::max(cell.sup[k - 1], level_gap(s_norm, lift.state(), k));
        if (paired) cell.sup_zero_gamma[k - 1] = std::max(cell.sup_zero_gamma[k - 1], level_gap(s_norm, lift0.state(), k));
      }
      if (j % stride == 0 || j == n) {
        sa.push_back(s_norm);
        la.push_back(lift.state());
        if (paired) l0.push_back(lift0.state());
      }
    }
    for (std::size_t k = 1; k <= nu; ++k) {
      cell.pvar.push_back(pvar_distance(sa, la, k, cfg.p).norm);
      cell.lower.push_back(level_gap(sa.back(), la.back(), k));
      if (paired) cell.pvar_zero_gamma.push_back(pvar_distance(sa, l0, k, cfg.p).norm);
    }
  });

  std::vector<std::string> metrics{"sup", "pvar"};
  if (cfg.paired_zero_gamma) {
    metrics.push_back("sup_zero_gamma");
    metrics.push_back("pvar_zero_gamma");
  }
  for (const auto& metric : metrics)
    for (std::size_t k = 1; k <= nu; ++k) {
      RateFit f;
      f.metric = metric;
      f.level = k;
      std::vector<double> lx, ly;
      for (std::size_t ni = 0; ni < ns.size(); ++ni) {
        std::vector<double> vals;
        for (std::size_t s = 0; s < cfg.seeds; ++s) {
          const RateCell& c = rep.cells[ni * cfg.seeds + s];
          const auto& v = metric == "sup" ? c.sup : metric == "pvar" ? c.pvar
                        : metric == "sup_zero_gamma" ? c.sup_zero_gamma : c.pvar_zero_gamma;
          vals.push_back(v[k - 1]);
        }
        f.medians.push_back(median(vals));
        lx.push_back(std::log(static_cast<double>(ns[ni])));
        ly.push_back(std::log(f.medians.back()));
      }
      const bool positive = std::all_of(f.medians.begin(), f.medians.end(), [](double m) { return m > 0.0; });
      if (ns.size() >= 2 && positive) {
        f.fit = ols_fit(lx, ly);
        f.fitted = true;
      }
      rep.fits.push_back(f);
    }
  return rep;
}

static nlohmann::json fit_json(const LinearFit& f) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"stderr", num(f.stderr)},
          {"ci95", {num(f.ci_lo), num(f.ci_hi)}}, {"points", f.points}};
}

nlohmann::json to_json(const RateReport& r) {
  nlohmann::json j;
  j["config"] = {{"nu_max", r.config.nu_max}, {"p", r.config.p}, {"N", r.config.n_values},
                 {"seeds", r.config.seeds}, {"rho", r.config.rho},
                 {"gamma_mode", to_string(r.config.gamma_mode)},
                 {"paired_zero_gamma", r.config.paired_zero_gamma},
                 {"pvar_grid", r.config.pvar_grid}, {"seed", r.config.seed}};
  j["spec"] = r.spec;
  j["sigma"] = mat_json(r.sigma);
  j["coupling_law"] = r.coupling_law;
  auto cells = nlohmann::json::array();
  for (const auto& c : r.cells) {
    nlohmann::json cj{{"N", c.n}, {"replica", c.replica}, {"seed", c.seed},
                      {"sup", c.sup}, {"pvar", c.pvar}, {"pvar_lower_bound", c.lower},
                      {"gamma", c.gamma}, {"coupling_sup", c.coupling_sup}};
    if (r.config.paired_zero_gamma) {
      cj["sup_zero_gamma"] = c.sup_zero_gamma;
      cj["pvar_zero_gamma"] = c.pvar_zero_gamma;
    }
    cells.push_back(cj);
  }
  j["cells"] = cells;
  auto fits = nlohmann::json::array();
  for (const auto& f : r.fits) {
    nlohmann::json fj{{"metric", f.metric}, {"level", f.level}, {"medians", f.medians}};
    fj["fit"] = f.fitted ? fit_json(f.fit) : nlohmann::json(nullptr);
    fits.push_back(fj);
  }
  j["fits"] = fits;
  return j;
}

CltReport run_clt(const ProcessSpec& spec_in, const CltConfig& cfg) {
  require(cfg.replicas >= 1000, "CLT check needs at least 1000 replicas");
  require(cfg.nu >= 1 && cfg.n >= 1, "CLT check needs nu >= 1 and N >= 1");
  const ProcessSpec spec = eta_view(spec_in);
  validate(spec);
  const std::size_t d = spec.dim;
  const std::size_t len = GradedTensor(d, cfg.nu).level_size(cfg.nu);
  CltReport rep;
  rep.config = cfg;
  rep.spec = spec_to_json(spec_in);
  const ReferenceMoments ref = reference_moments(spec, cfg.seed);
  rep.sigma = ref.sigma;
  rep.gamma = ref.gamma;
  std::vector<double> xs(cfg.replicas * len), ys(cfg.replicas * len);
  const double n = static_cast<double>(cfg.n);
  parallel_for(cfg.replicas, cfg.threads, [&](std::size_t r) {
    const SamplePath path = generate(spec, cfg.n, derive_seed(derive_seed(cfg.seed, 1), r));
    PrefixSignatureStream ps(d, cfg.nu);
    for (std::size_t k = 0; k < path.size(); ++k) ps.push(path.row(k));
    const GradedTensor s = normalize(ps.state(), n);
    const BrownianGrid bm = sample_brownian(ref.sigma, 1.0, cfg.n, derive_seed(derive_seed(cfg.seed, 2), r));
    LiftStream lift(d, cfg.nu, ref.gamma);
    std::vector<double> dw(d);
    for (std::size_t j = 0; j < cfg.n; ++j) {
      for (std::size_t i = 0; i < d; ++i) dw[i] = bm.values[(j + 1) * d + i] - bm.values[j * d + i];
      lift.step(dw, bm.h);
    }
    auto a = s.level(cfg.nu);
    auto b = lift.state().level(cfg.nu);
    std::copy(a.begin(), a.end(), xs.begin() + static_cast<std::ptrdiff_t>(r * len));
    std::copy(b.begin(), b.end(), ys.begin() + static_cast<std::ptrdiff_t>(r * len));
  });
  rep.energy = energy_test(xs, ys, len, cfg.permutations, derive_seed(cfg.seed, 3));
  for (std::size_t c = 0; c < len; ++c) {
    std::vector<double> a(cfg.replicas), b(cfg.replicas);
    for (std::size_t r = 0; r < cfg.replicas; ++r) {
      a[r] = xs[r * len + c];
      b[r] = ys[r * len + c];
    }
    rep.ks.push_back(ks_two_sample(a, b));
  }
  return rep;
}

nlohmann::json to_json(const CltReport& r) {
  nlohmann::json j;
  j["config"] = {{"nu", r.config.nu}, {"N", r.config.n}, {"replicas", r.config.replicas},
                 {"permutations", r.config.permutations}, {"seed", r.config.seed}};
  j["spec"] = r.spec;
  j["sigma"] = mat_json(r.sigma);
  j["gamma"] = mat_json(r.gamma);
  j["energy"] = {{"statistic", r.energy.statistic}, {"p_value", r.energy.p_value}};
  auto ks = nlohmann::json::array();
  for (const auto& k : r.ks) ks.push_back({{"statistic", k.statistic}, {"p_value", k.p_value}});
  j["ks"] = ks;
  return j;
}

std::vector<double> lil_checkpoints(double tau_max, double ratio) {
  require(ratio > 1.0, "checkpoint ratio must exceed 1");
  require(tau_max >= 4.0, "LIL horizon must be at least 4");
  std::vector<double> out;
  for (double t = 4.0; t <= tau_max; t *= ratio) {
    const double s = std::floor(t);
    if (out.empty() || s > out.back()) out.push_back(s);
  }
  const double last = std::floor(tau_max);
  if (out.back() < last) out.push_back(last);
  return out;
}

LilTrace run_lil(const ProcessSpec& spec_in, const LilConfig& cfg) {
  require(cfg.nu >= 1, "LIL level must be >= 1");
  if (cfg.tau_max > 1e9) throw BudgetError("LIL horizon above 1e9 steps");
  const ProcessSpec spec = eta_view(spec_in);
  validate(spec);
  const std::size_t d = spec.dim;
  LilTrace tr;
  tr.config = cfg;
  tr.spec = spec_to_json(spec_in);
  if (cfg.pure_brownian) {
    tr.sigma = 1.0;
  } else {
    const ReferenceMoments ref = reference_moments(spec, cfg.seed);
    tr.sigma = std::sqrt(std::max(0.0, ref.sigma(0, 0)));
  }
  const auto checkpoints = lil_checkpoints(cfg.tau_max, cfg.ratio);
  const bool oracle = cfg.pure_brownian && d == 1 && cfg.nu == 2;
  const double nu = static_cast<double>(cfg.nu);

  std::vector<double> x(d);
  std::optional<ProcessSampler> sampler;
  std::optional<PrefixSignatureStream> sums;
  std::optional<LiftStream> lift;
  Rng rng(derive_seed(cfg.seed, 11));
  if (cfg.pure_brownian) {
    lift.emplace(d, std::max<std::size_t>(cfg.nu, 1), zeros(d));
  } else {
    sampler.emplace(spec, derive_seed(cfg.seed, 12));
    sums.emplace(d, cfg.nu);
  }
  double running = 0.0, running_oracle = 0.0;
  double paper_max = 0.0, classical_max = 0.0, endpoint_max = 0.0, op_max = 0.0, oc_max = 0.0;
  std::size_t step = 0;
  for (double tau : checkpoints) {
    const auto target = static_cast<std::size_t>(tau);
    for (; step < target; ++step) {
      const GradedTensor* state;
      if (lift) {
        for (auto& v : x) v = standard_normal(rng);
        lift->step(x, 1.0);
        state = &lift->state();
        if (oracle) {
          const double w = state->level(1)[0];
          running_oracle = std::max(running_oracle, std::abs(0.5 * (w * w - static_cast<double>(step + 1))));
        }
      } else {
        sampler->next(x);
        sums->push(x);
        state = &sums->state();
      }
      running = std::max(running, level_abs(*state, cfg.nu));
    }
    const GradedTensor& state = lift ? lift->state() : sums->state();
    const double ll = std::log(std::log(tau));
    LilPoint p;
    p.tau = tau;
    p.sup_level = running;
    p.paper = running / std::pow(tau * ll, nu / 2.0);
    p.classical = running / std::pow(2.0 * tau * ll, nu / 2.0);
    paper_max = std::max(paper_max, p.paper);
    classical_max = std::max(classical_max, p.classical);
    p.paper_max = paper_max;
    p.classical_max = classical_max;
    if (cfg.nu == 1 && d == 1) {
      p.endpoint = tr.sigma > 0.0 ? std::abs(state.level(1)[0]) / (tr.sigma * std::sqrt(2.0 * tau * ll)) : 0.0;
      endpoint_max = std::max(endpoint_max, p.endpoint);
      p.endpoint_max = endpoint_max;
    }
    if (oracle) {
      p.oracle_paper = running_oracle / (tau * ll);
      p.oracle_classical = running_oracle / (2.0 * tau * ll);
      op_max = std::max(op_max, p.oracle_paper);
      oc_max = std::max(oc_max, p.oracle_classical);
      p.oracle_paper_max = op_max;
      p.oracle_classical_max = oc_max;
    }
    tr.points.push_back(p);
  }
  return tr;
}

nlohmann::json to_json(const LilTrace& t) {
  nlohmann::json j;
  j["config"] = {{"nu", t.config.nu}, {"tau_max", t.config.tau_max}, {"ratio", t.config.ratio},
                 {"pure_brownian", t.config.pure_brownian}, {"seed", t.config.seed}};
  j["spec"] = t.spec;
  j["sigma"] = t.sigma;
  auto pts = nlohmann::json::array();
  for (const auto& p : t.points) {
    nlohmann::json pj{{"tau", p.tau}, {"sup_level", p.sup_level}, {"paper", p.paper},
                      {"classical", p.classical}, {"paper_max", p.paper_max},
                      {"classical_max", p.classical_max}};
    if (t.config.nu == 1) {
      pj["endpoint_classical"] = p.endpoint;
      pj["endpoint_classical_max"] = p.endpoint_max;
    }
    if (t.config.pure_brownian && t.config.nu == 2) {
      pj["oracle_paper"] = p.oracle_paper;
      pj["oracle_paper_max"] = p.oracle_paper_max;
      pj["oracle_classical"] = p.oracle_classical;
      pj["oracle_classical_max"] = p.oracle_classical_max;
    }
    pts.push_back(pj);
  }
  j["points"] = pts;
  return j;
}

MomentGrowth moment_growth(const ProcessSpec& spec_in, const std::vector<std::size_t>& n_values,
                           std::size_t replicas, std::uint64_t seed, std::size_t threads) {
  require(!n_values.empty() && replicas >= 1, "moment growth needs N values and replicas");
  const ProcessSpec spec = eta_view(spec_in);
  MomentGrowth mg;
  mg.n_values = n_values;
  std::sort(mg.n_values.begin(), mg.n_values.end());
  const std::size_t nmax = mg.n_values.back();
  const std::size_t d = spec.dim;
  std::vector<double> per(replicas * mg.n_values.size(), 0.0);
  parallel_for(replicas, threads, [&](std::size_t r) {
    ProcessSampler sampler(spec, derive_seed(seed, r));
    std::vector<double> x(d), s(d, 0.0);
    double best = 0.0;
    std::size_t next = 0;
    for (std::size_t k = 1; k <= nmax; ++k) {
      sampler.next(x);
      for (std::size_t i = 0; i < d; ++i) {
        s[i] += x[i];
        best = std::max(best, std::abs(s[i]));
      }
      while (next < mg.n_values.size() && mg.n_values[next] == k) per[r * mg.n_values.size() + next++] = std::pow(best, 4);
    }
  });
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < mg.n_values.size(); ++i) {
    double m = 0.0;
    for (std::size_t r = 0; r < replicas; ++r) m += per[r * mg.n_values.size() + i];
    mg.fourth.push_back(m / static_cast<double>(replicas));
    lx.push_back(std::log(static_cast<double>(mg.n_values[i])));
    ly.push_back(std::log(std::max(mg.fourth.back(), std::numeric_limits<double>::min())));
  }
  if (mg.n_values.size() >= 2) mg.fit = ols_fit(lx, ly);
  return mg;
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;
  static constexpr double left = 70, right = 620, top = 40, bottom = 350;
  double px(double x) const { return left + (x - x0) / (x1 - x0) * (right - left); }
  double py(double y) const { return bottom - (y - y0) / (y1 - y0) * (bottom - top); }
};

void pad(double& lo, double& hi) {
  if (hi - lo < 1e-9) {
    lo -= 1.0;
    hi += 1.0;
  } else {
    const double m = 0.08 * (hi - lo);
    lo -= m;
    hi += m;
  }
}

std::string svg_open(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n"
         "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n"
         "<text x=\"345\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
         title + "</text>\n";
}

std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  std::string s;
  s += "<line x1=\"" + fmt("%.2f", Frame::left) + "\" y1=\"" + fmt("%.2f", Frame::bottom) + "\" x2=\"" +
       fmt("%.2f", Frame::right) + "\" y2=\"" + fmt("%.2f", Frame::bottom) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fmt("%.2f", Frame::left) + "\" y1=\"" + fmt("%.2f", Frame::top) + "\" x2=\"" +
       fmt("%.2f", Frame::left) + "\" y2=\"" + fmt("%.2f", Frame::bottom) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    s += "<text x=\"64\" y=\"" + fmt("%.2f", f.py(yv) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + fmt("%.2f", yv) + "</text>\n";
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    s += "<text x=\"" + fmt("%.2f", f.px(xv)) +
         "\" y=\"366\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + fmt("%.2f", xv) +
         "</text>\n";
  }
  s += "<text x=\"345\" y=\"390\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + xlabel +
       "</text>\n";
  s += "<text x=\"16\" y=\"195\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
       "transform=\"rotate(-90 16 195)\">" + ylabel + "</text>\n";
  return s;
}

std::string polyline(const Frame& f, const std::vector<std::pair<double, double>>& pts, const char* color) {
  std::string s = "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i)
    s += (i ? " " : "") + fmt("%.2f", f.px(pts[i].first)) + "," + fmt("%.2f", f.py(pts[i].second));
  return s + "\"/>\n";
}

}  // namespace

std::string rate_svg(const RateReport& r, const std::string& metric, std::size_t level) {
  require(!r.config.n_values.empty(), "rate plot needs at least one N");
  const RateFit& fit = r.find(metric, level);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < r.config.n_values.size(); ++i)
    if (fit.medians[i] > 0.0)
      pts.emplace_back(std::log2(static_cast<double>(r.config.n_values[i])), std::log10(fit.medians[i]));
  Frame f{0, 1, 0, 1};
  if (!pts.empty()) {
    f.x0 = f.x1 = pts[0].first;
    f.y0 = f.y1 = pts[0].second;
    for (const auto& [x, y] : pts) {
      f.x0 = std::min(f.x0, x);
      f.x1 = std::max(f.x1, x);
      f.y0 = std::min(f.y0, y);
      f.y1 = std::max(f.y1, y);
    }
  }
  pad(f.x0, f.x1);
  pad(f.y0, f.y1);
  std::string title = metric + " distance, level " + std::to_string(level);
  if (fit.fitted) title += ", slope " + fmt("%.4f", fit.fit.slope);
  std::string s = svg_open(title) + axes(f, "log2 N", "log10 median distance");
  if (fit.fitted && pts.size() >= 2) {
    // natural-log slope is base independent; the intercept moves to log10 / log2 axes
    auto line_y = [&](double x2) {
      return (fit.fit.intercept + fit.fit.slope * x2 * std::log(2.0)) / std::log(10.0);
    };
    s += polyline(f, {{f.x0, line_y(f.x0)}, {f.x1, line_y(f.x1)}}, "#d62728");
  }
  for (const auto& [x, y] : pts)
    s += "<circle cx=\"" + fmt("%.2f", f.px(x)) + "\" cy=\"" + fmt("%.2f", f.py(y)) +
         "\" r=\"4\" fill=\"#1f77b4\"/>\n";
  return s + "</svg>\n";
}

std::string lil_svg(const LilTrace& t) {
  require(!t.points.empty(), "LIL plot needs at least one checkpoint");
  const bool endpoint = t.config.nu == 1;
  std::vector<std::pair<double, double>> running, maxes;
  for (const auto& p : t.points) {
    const double x = std::log10(p.tau);
    running.emplace_back(x, endpoint ? p.endpoint : p.classical);
    maxes.emplace_back(x, endpoint ? p.endpoint_max : p.classical_max);
  }
  Frame f{running.front().first, running.back().first, 0.0, 1.2};
  for (const auto& [x, y] : maxes) f.y1 = std::max(f.y1, y);
  pad(f.x0, f.x1);
  f.y0 = 0.0;
  std::string s = svg_open("LIL ratio, level " + std::to_string(t.config.nu)) +
                  axes(f, "log10 tau", "classical ratio");
  s += polyline(f, {{f.x0, 1.0}, {f.x1, 1.0}}, "#999999");
  s += polyline(f, running, "#1f77b4");
  s += polyline(f, maxes, "#d62728");
  return s + "</svg>\n";
}

std::vector<std::string> emit_plots(const RateReport& r, const std::string& dir) {
  require(!r.config.n_values.empty(), "rate plot needs at least one N");
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& fit : r.fits)
    files.emplace_back("rate_" + fit.metric + "_nu" + std::to_string(fit.level) + ".svg", rate_svg(r, fit.metric, fit.level));
  std::filesystem::create_directories(dir);
  std::vector<std::string> names;
  for (const auto& [name, text] : files) {
    write_text_file((std::filesystem::path(dir) / name).string(), text);
    names.push_back(name);
  }
  return names;
}

std::vector<std::string> emit_plots(const LilTrace& t, const std::string& dir) {
  const std::string text = lil_svg(t);
  std::filesystem::create_directories(dir);
  write_text_file((std::filesystem::path(dir) / "lil_trace.svg").string(), text);
  return {"lil_trace.svg"};
}

}  // namespace siglift
