#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "siglift/process.hpp"
#include "siglift/stats.hpp"

namespace siglift {

// sigma and gamma in closed form when the family has them, otherwise estimated from
// a pilot path of the given length.
struct ReferenceMoments {
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd gamma;
  bool analytic = false;
};

ReferenceMoments reference_moments(const ProcessSpec& spec, std::uint64_t seed,
                                   std::size_t pilot = 1000000);

enum class GammaMode { Estimated, Analytic, Zero };
const char* to_string(GammaMode m);
GammaMode gamma_mode_from_string(const std::string& s);

struct RateConfig {
  std::size_t nu_max = 2;
  double p = 2.5;
  std::vector<std::size_t> n_values;
  std::size_t seeds = 30;
  double rho = 4.0;
  GammaMode gamma_mode = GammaMode::Estimated;
  bool paired_zero_gamma = true;  // rerun each cell with gamma = 0 on the same Brownian path
  std::size_t pvar_grid = 1025;   // p-variation runs on at most this many equispaced grid points
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

struct RateCell {
  std::size_t n = 0;
  std::size_t replica = 0;
  std::uint64_t seed = 0;
  std::vector<double> sup, pvar, lower;  // per level 1..nu_max
  std::vector<double> sup_zero_gamma, pvar_zero_gamma;
  std::vector<double> gamma;  // gamma used for the lift, row-major
  double coupling_sup = 0.0;
};

struct RateFit {
  std::string metric;  // sup, pvar, sup_zero_gamma, pvar_zero_gamma
  std::size_t level = 1;
  std::vector<double> medians;  // per n value
  bool fitted = false;          // needs >= 2 n values and positive medians
  LinearFit fit;
};

struct RateReport {
  RateConfig config;
  nlohmann::json spec;
  Eigen::MatrixXd sigma;
  std::string coupling_law;
  std::vector<RateCell> cells;  // sorted by (n, replica)
  std::vector<RateFit> fits;

  const RateFit& find(const std::string& metric, std::size_t level) const;
};

RateReport run_rate(const ProcessSpec& spec, const RateConfig& cfg);
nlohmann::json to_json(const RateReport& r);

struct CltConfig {
  std::size_t nu = 2;
  std::size_t n = 4096;
  std::size_t replicas = 1000;
  std::size_t permutations = 200;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

struct CltReport {
  CltConfig config;
  nlohmann::json spec;
  Eigen::MatrixXd sigma, gamma;
  EnergyResult energy;
  std::vector<KsResult> ks;  // per coordinate of level nu
};

// Compares S_N^(nu)(0, 1) over process replicas with the lift endpoint over
// independent Brownian replicas.
CltReport run_clt(const ProcessSpec& spec, const CltConfig& cfg);
nlohmann::json to_json(const CltReport& r);

struct LilConfig {
  std::size_t nu = 1;
  double tau_max = 1e7;
  double ratio = 1.1;  // checkpoints 4 r^j, plus tau_max
  bool pure_brownian = false;
  std::uint64_t seed = 0;
};

struct LilPoint {
  double tau = 0.0;
  double sup_level = 0.0;  // max_{s <= tau} |level nu at s|
  double paper = 0.0;      // sup_level / (tau ln ln tau)^{nu/2}
  double classical = 0.0;  // sup_level / (2 tau ln ln tau)^{nu/2}
  double paper_max = 0.0;
  double classical_max = 0.0;
  // nu = 1, d = 1: |S(tau)| / (sigma sqrt(2 tau ln ln tau)) and its running max
  double endpoint = 0.0;
  double endpoint_max = 0.0;
  // pure Brownian, d = 1, nu = 2: same normalizations of max_{s <= tau} |(W(s)^2 - s) / 2|
  double oracle_paper = 0.0;
  double oracle_paper_max = 0.0;
  double oracle_classical = 0.0;
  double oracle_classical_max = 0.0;
};

struct LilTrace {
  LilConfig config;
  nlohmann::json spec;
  double sigma = 0.0;  // sqrt of the long-run variance (d = 1)
  std::vector<LilPoint> points;
};

LilTrace run_lil(const ProcessSpec& spec, const LilConfig& cfg);
nlohmann::json to_json(const LilTrace& t);

std::vector<double> lil_checkpoints(double tau_max, double ratio);

struct MomentGrowth {
  std::vector<std::size_t> n_values;
  std::vector<double> fourth;  // E max_{n' <= n} |sum_{k < n'} xi(k)|^4
  LinearFit fit;               // log-log slope, about 2 under exponential mixing
};

MomentGrowth moment_growth(const ProcessSpec& spec, const std::vector<std::size_t>& n_values,
                           std::size_t replicas, std::uint64_t seed, std::size_t threads = 0);

// Deterministic SVG charts.
std::string rate_svg(const RateReport& r, const std::string& metric, std::size_t level);
std::string lil_svg(const LilTrace& t);
// Writes one chart per metric and level into dir; returns the file names.
std::vector<std::string> emit_plots(const RateReport& r, const std::string& dir);
std::vector<std::string> emit_plots(const LilTrace& t, const std::string& dir);

}  // namespace siglift
