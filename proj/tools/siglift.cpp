#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "siglift/coupling.hpp"
#include "siglift/errors.hpp"
#include "siglift/harness.hpp"
#include "siglift/io.hpp"
#include "siglift/lift.hpp"
#include "siglift/moments.hpp"
#include "siglift/process.hpp"
#include "siglift/pvar.hpp"
#include "siglift/signature.hpp"
#include "siglift/stats.hpp"

using namespace siglift;
using nlohmann::json;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t threads = 0;
  std::string out;
};

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty() || g.out == "-") {
    std::cout << text;
  } else {
    write_text_file(g.out, text);
  }
}

void emit_json(const Globals& g, const json& j) { emit(g, j.dump(2) + "\n"); }

ProcessSpec load_spec(const std::string& file, const Globals& g) {
  ProcessSpec s = spec_from_json(read_json_file(file));
  if (g.seed_set) s.seed = g.seed;
  return s;
}

SamplePath load_path(const std::string& file, const std::string& manifest) {
  std::ifstream f(file);
  require(static_cast<bool>(f), "cannot open " + file);
  SamplePath p = read_path_csv(f);
  std::string m = manifest;
  if (m.empty()) {
    std::ifstream probe(file + ".manifest.json");
    if (probe) m = file + ".manifest.json";
  }
  if (!m.empty()) apply_manifest(p, read_json_file(m));
  return p;
}

Eigen::MatrixXd matrix_from(const json& j, const char* key) {
  const json& m = j.contains(key) ? j.at(key) : j;
  require(m.is_array() && !m.empty() && m[0].is_array(), std::string("expected a matrix under '") + key + "'");
  const auto r = static_cast<Eigen::Index>(m.size()), c = static_cast<Eigen::Index>(m[0].size());
  Eigen::MatrixXd out(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    require(m[static_cast<std::size_t>(i)].size() == static_cast<std::size_t>(c), "ragged matrix");
    for (Eigen::Index k = 0; k < c; ++k) out(i, k) = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
  }
  return out;
}

std::string prefix_csv(const std::vector<GradedTensor>& prefixes, const std::vector<double>& times) {
  std::ostringstream os;
  write_prefix_csv(os, prefixes, times);
  return os.str();
}

json tensor_json(const GradedTensor& t) {
  json levels = json::array();
  for (std::size_t k = 1; k <= t.depth(); ++k) {
    auto l = t.level(k);
    levels.push_back(std::vector<double>(l.begin(), l.end()));
  }
  return {{"d", t.dim()}, {"depth", t.depth()}, {"levels", levels}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signatures of weakly dependent processes and their Brownian lifts"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Master seed")->each([&](const std::string&) { g.seed_set = true; });
  app.add_option("--threads", g.threads, "Worker threads (0 = hardware)");
  app.add_option("--out", g.out, "Output file (default stdout)");

  // gen
  std::string gen_spec;
  std::size_t gen_n = 0;
  double gen_total = 0.0, gen_delta = 0.0;
  auto* gen = app.add_subcommand("gen", "Sample a path from a process spec");
  gen->add_option("--spec", gen_spec, "Process spec JSON")->required();
  gen->add_option("--n", gen_n, "Number of samples (discrete families)");
  gen->add_option("--T", gen_total, "Horizon (suspension)");
  gen->add_option("--delta", gen_delta, "Grid step (suspension)");

  // sig
  std::string sig_path, sig_manifest;
  std::size_t sig_depth = 2;
  double sig_u = 0.0, sig_v = -1.0, sig_norm = 0.0;
  bool sig_prefix = false;
  auto* sig = app.add_subcommand("sig", "Signature of a sampled path");
  sig->add_option("--path", sig_path, "Path CSV")->required();
  sig->add_option("--manifest", sig_manifest, "Path manifest JSON");
  sig->add_option("--depth", sig_depth, "Truncation depth");
  sig->add_option("--u", sig_u, "Start index or time");
  sig->add_option("--v", sig_v, "End index or time (default: whole path)");
  sig->add_option("--normalize", sig_norm, "Scale level k by N^{-k/2}");
  sig->add_flag("--prefix", sig_prefix, "Emit all prefix states as CSV");

  // moments
  std::string mom_path, mom_manifest;
  std::string mom_lag = "auto";
  auto* mom = app.add_subcommand("moments", "Estimate sigma, gamma and F");
  mom->add_option("--path", mom_path, "Path CSV")->required();
  mom->add_option("--manifest", mom_manifest, "Path manifest JSON");
  mom->add_option("--lag", mom_lag, "Lag window: auto, samples, or time units for continuous paths");

  // lift
  std::string lift_sigma, lift_gamma;
  std::size_t lift_nu = 2, lift_steps = 1024;
  double lift_T = 1.0;
  auto* lift = app.add_subcommand("lift", "Brownian lift prefixes");
  lift->add_option("--sigma", lift_sigma, "JSON with a 'sigma' matrix")->required();
  lift->add_option("--gamma", lift_gamma, "JSON with a 'gamma' matrix (default zero)");
  lift->add_option("--nu", lift_nu, "Depth");
  lift->add_option("--steps", lift_steps, "Grid steps");
  lift->add_option("--T", lift_T, "Horizon");

  // pvar
  std::string pv_a, pv_b;
  std::size_t pv_nu = 1;
  double pv_p = 2.5;
  bool pv_large = false;
  auto* pv = app.add_subcommand("pvar", "p/nu-variation distance of two prefix streams");
  pv->add_option("--a", pv_a, "Prefix CSV")->required();
  pv->add_option("--b", pv_b, "Prefix CSV")->required();
  pv->add_option("--nu", pv_nu, "Level");
  pv->add_option("--p", pv_p, "Exponent p (the norm uses p/nu)");
  pv->add_flag("--allow-large", pv_large, "Accept the O(m^2) cost above 20000 points");

  // couple
  std::string cp_spec;
  std::size_t cp_n = 4096, cp_seeds = 1, cp_radius = 0;
  double cp_rho = 4.0;
  auto* cp = app.add_subcommand("couple", "Block coupling and Brownian reassembly");
  cp->add_option("--spec", cp_spec, "Process spec JSON")->required();
  cp->add_option("--N", cp_n, "Horizon");
  cp->add_option("--rho", cp_rho, "Block exponent");
  cp->add_option("--seeds", cp_seeds, "Independent replicas");
  cp->add_option("--radius", cp_radius, "Conditioning radius (doubling map)");

  // rate
  std::string rt_spec, rt_config, rt_plots, rt_gamma = "estimated";
  RateConfig rc;
  auto* rt = app.add_subcommand("rate", "Strong-approximation rate experiment");
  rt->add_option("--spec", rt_spec, "Process spec JSON")->required();
  rt->add_option("--config", rt_config, "Rate config JSON");
  auto* rt_nu = rt->add_option("--nu-max", rc.nu_max, "Highest level");
  auto* rt_p = rt->add_option("--p", rc.p, "Exponent p");
  rt->add_option("--N", rc.n_values, "Horizons");
  auto* rt_seeds = rt->add_option("--seeds", rc.seeds, "Replicas per N");
  auto* rt_rho = rt->add_option("--rho", rc.rho, "Block exponent");
  auto* rt_gm = rt->add_option("--gamma-mode", rt_gamma, "estimated, analytic or zero");
  auto* rt_grid = rt->add_option("--pvar-grid", rc.pvar_grid, "Max grid points for p-variation");
  rt->add_option("--plots", rt_plots, "Directory for SVG charts");

  // clt
  std::string cl_spec;
  CltConfig cc;
  auto* cl = app.add_subcommand("clt", "Distributional check of S_N against the lift");
  cl->add_option("--spec", cl_spec, "Process spec JSON")->required();
  cl->add_option("--nu", cc.nu, "Level");
  cl->add_option("--N", cc.n, "Scale");
  cl->add_option("--replicas", cc.replicas, "Replicas per side");
  cl->add_option("--permutations", cc.permutations, "Energy-test permutations");

  // lil
  std::string ll_spec, ll_plots;
  LilConfig lc;
  auto* ll = app.add_subcommand("lil", "Law of the iterated logarithm trace");
  ll->add_option("--spec", ll_spec, "Process spec JSON (ignored with --pure-brownian)");
  ll->add_option("--nu", lc.nu, "Level");
  ll->add_option("--tau-max", lc.tau_max, "Trajectory length");
  ll->add_option("--ratio", lc.ratio, "Checkpoint ratio");
  ll->add_flag("--pure-brownian", lc.pure_brownian, "Use a standard Brownian path");
  ll->add_option("--plots", ll_plots, "Directory for the SVG chart");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (g.threads) set_default_threads(g.threads);

    if (*gen) {
      ProcessSpec s = load_spec(gen_spec, g);
      SamplePath p;
      if (s.family == Family::SuspensionOverMarkov) {
        require(gen_total > 0.0 && gen_delta > 0.0, "suspension sampling needs --T and --delta");
        p = generate_suspension(s, gen_total, gen_delta, s.seed).grid;
      } else {
        require(gen_n >= 1, "gen needs --n >= 1");
        p = generate(s, gen_n, s.seed);
      }
      std::ostringstream os;
      write_path_csv(os, p);
      emit(g, os.str());
      if (!g.out.empty() && g.out != "-") write_text_file(g.out + ".manifest.json", path_manifest(p).dump(2) + "\n");
    } else if (*sig) {
      SamplePath p = load_path(sig_path, sig_manifest);
      const bool discrete = p.kind == PathKind::Discrete;
      if (sig_prefix) {
        std::vector<std::size_t> at(p.size() + 1);
        for (std::size_t j = 0; j <= p.size(); ++j) at[j] = j;
        std::vector<GradedTensor> pre;
        if (discrete) {
          pre = prefix_signatures(p, sig_depth, at);
        } else {
          PrefixSignatureStream st(p.dim, sig_depth);
          pre.push_back(st.state());
          for (std::size_t k = 0; k < p.size(); ++k) {
            st.push_scaled(p.row(k), p.delta);
            pre.push_back(st.state());
          }
        }
        std::vector<double> times(pre.size());
        for (std::size_t j = 0; j < pre.size(); ++j) {
          times[j] = discrete ? static_cast<double>(j) : static_cast<double>(j) * p.delta;
          if (sig_norm > 0.0) {
            pre[j] = normalize(pre[j], sig_norm);
            times[j] /= sig_norm;
          }
        }
        emit(g, prefix_csv(pre, times));
      } else {
        GradedTensor t(p.dim, sig_depth);
        if (discrete) {
          const std::size_t v = sig_v < 0 ? p.size() : static_cast<std::size_t>(sig_v);
          t = sig_discrete(p, sig_depth, static_cast<std::size_t>(sig_u), v);
        } else {
          const double v = sig_v < 0 ? static_cast<double>(p.size()) * p.delta : sig_v;
          t = sig_continuous(p, sig_depth, sig_u, v);
        }
        if (sig_norm > 0.0) t = normalize(t, sig_norm);
        emit_json(g, tensor_json(t));
      }
    } else if (*mom) {
      SamplePath p = load_path(mom_path, mom_manifest);
      double lag = 0.0;
      if (mom_lag != "auto") {
        try {
          lag = std::stod(mom_lag);
        } catch (const std::exception&) {
          throw ValidationError("--lag must be 'auto' or a positive number");
        }
        require(lag > 0.0, "--lag must be 'auto' or a positive number");
      }
      CovarianceReport r;
      if (p.kind == PathKind::Discrete) {
        r = estimate_sigma_gamma(p, lag > 0 ? static_cast<std::size_t>(lag) : default_lag_window(p.size()));
      } else {
        const double span = static_cast<double>(p.size()) * p.delta;
        r = estimate_gamma_continuous(p, lag > 0 ? lag : std::max(1.0, std::ceil(std::cbrt(span))));
      }
      emit_json(g, to_json(r));
    } else if (*lift) {
      const Eigen::MatrixXd sigma = matrix_from(read_json_file(lift_sigma), "sigma");
      Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(sigma.rows(), sigma.cols());
      if (!lift_gamma.empty()) gamma = matrix_from(read_json_file(lift_gamma), "gamma");
      const BrownianGrid bm = sample_brownian(sigma, lift_T, lift_steps, g.seed);
      const LiftPath lp = lift_recursive(bm, gamma, lift_nu);
      std::vector<double> times(lp.prefixes.size());
      for (std::size_t j = 0; j < times.size(); ++j) times[j] = static_cast<double>(j) * bm.h;
      emit(g, prefix_csv(lp.prefixes, times));
    } else if (*pv) {
      std::ifstream fa(pv_a), fb(pv_b);
      require(static_cast<bool>(fa) && static_cast<bool>(fb), "cannot open prefix CSV inputs");
      std::vector<double> ta, tb;
      const auto a = read_prefix_csv(fa, &ta);
      const auto b = read_prefix_csv(fb, &tb);
      require(ta.size() == tb.size(), "prefix streams have different lengths");
      for (std::size_t j = 0; j < ta.size(); ++j)
        require(std::abs(ta[j] - tb[j]) <= 1e-9 * std::max(1.0, std::abs(ta[j])), "prefix streams live on different grids");
      const PvarResult r = pvar_distance(a, b, pv_nu, pv_p, pv_large);
      emit_json(g, {{"norm", r.norm}, {"optimal_partition", r.partition}, {"nu", pv_nu}, {"p", pv_p}});
    } else if (*cp) {
      const ProcessSpec s = load_spec(cp_spec, g);
      const ProcessSpec base = eta_view(s);
      const ReferenceMoments ref = reference_moments(base, s.seed);
      CouplingOptions o;
      o.rho = cp_rho;
      o.cond_radius = cp_radius;
      const Coupler coupler(base, cp_n, ref.sigma, o);
      std::vector<json> reports(cp_seeds);
      std::vector<double> sups(cp_seeds);
      parallel_for(cp_seeds, 0, [&](std::size_t r) {
        const std::uint64_t seed = derive_seed(s.seed, r);
        const SamplePath p = generate(base, cp_n, seed);
        const CouplingReport rep = coupler.couple(p, derive_seed(seed, 7));
        reports[r] = to_json(rep);
        reports[r]["seed"] = seed;
        sups[r] = rep.sup_discrepancy;
      });
      emit_json(g, {{"spec", spec_to_json(s)}, {"N", cp_n}, {"rho", cp_rho}, {"seeds", cp_seeds},
                    {"sigma", ref.sigma(0, 0)}, {"median_sup_discrepancy", median(sups)}, {"replicas", reports}});
    } else if (*rt) {
      const ProcessSpec s = load_spec(rt_spec, g);
      RateConfig cfg = rc;
      cfg.seed = s.seed;
      if (!rt_config.empty()) {
        // explicit flags win over the config file
        const json j = read_json_file(rt_config);
        if (!rt_nu->count()) cfg.nu_max = j.value("nu_max", cfg.nu_max);
        if (!rt_p->count()) cfg.p = j.value("p", cfg.p);
        if (rc.n_values.empty() && j.contains("N")) cfg.n_values = j["N"].get<std::vector<std::size_t>>();
        if (!rt_seeds->count()) cfg.seeds = j.value("seeds", cfg.seeds);
        if (!rt_rho->count()) cfg.rho = j.value("rho", cfg.rho);
        if (!rt_gm->count()) rt_gamma = j.value("gamma_mode", rt_gamma);
        cfg.paired_zero_gamma = j.value("paired_zero_gamma", cfg.paired_zero_gamma);
        if (!rt_grid->count()) cfg.pvar_grid = j.value("pvar_grid", cfg.pvar_grid);
        if (j.contains("seed") && !g.seed_set) cfg.seed = j["seed"].get<std::uint64_t>();
      }
      cfg.gamma_mode = gamma_mode_from_string(rt_gamma);
      require(!cfg.n_values.empty(), "rate needs at least one N");
      const RateReport r = run_rate(s, cfg);
      if (!rt_plots.empty()) emit_plots(r, rt_plots);
      emit_json(g, to_json(r));
    } else if (*cl) {
      const ProcessSpec s = load_spec(cl_spec, g);
      CltConfig cfg = cc;
      cfg.seed = s.seed;
      emit_json(g, to_json(run_clt(s, cfg)));
    } else if (*ll) {
      ProcessSpec s = iid_gaussian_spec(1, 1.0, g.seed);
      if (!ll_spec.empty()) s = load_spec(ll_spec, g);
      else require(lc.pure_brownian, "lil needs --spec unless --pure-brownian is given");
      LilConfig cfg = lc;
      cfg.seed = s.seed;
      const LilTrace t = run_lil(s, cfg);
      if (!ll_plots.empty()) emit_plots(t, ll_plots);
      emit_json(g, to_json(t));
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const BudgetError& e) {
    std::cerr << "budget: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
