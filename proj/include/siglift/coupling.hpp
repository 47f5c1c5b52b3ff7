#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "siglift/lift.hpp"
#include "siglift/process.hpp"
#include "siglift/signature.hpp"

namespace siglift {

// Coupling block [start, mid) followed by the gap [mid, end): start = m_{k-1},
// mid = n_k = m_{k-1} + floor(k^rho), end = m_k = n_k + floor(k^{rho/4}).
struct Block {
  std::size_t start = 0;
  std::size_t mid = 0;
  std::size_t end = 0;
  std::size_t length() const { return mid - start; }
  std::size_t gap() const { return end - mid; }
};

struct BlockSchedule {
  double rho = 4.0;
  std::size_t horizon = 0;
  std::vector<Block> blocks;

  // max{k : m_k <= x}, 0 when no block fits.
  std::size_t ell(double x) const;
};

BlockSchedule block_schedule(double rho, std::size_t horizon);

struct BlockSums {
  std::size_t dim = 1;
  std::vector<std::vector<double>> q;  // coupling-block sums
  std::vector<std::vector<double>> r;  // gap sums
  std::vector<double> tail;            // sum over [m_K, n)
};

// Q_k uses E(xi(j) | cylinder of the given radius) for doubling-map paths when
// cond_radius > 0 and the spec is supplied; otherwise Q_k is the plain block sum.
BlockSums block_sums(const SamplePath& path, const BlockSchedule& sched, std::size_t cond_radius = 0,
                     const ProcessSpec* spec = nullptr);

// P(V < v), P(V = v), P(V > v).
struct AtomCdf {
  double below = 0.0;
  double atom = 0.0;
  double above = 0.0;
};

using ScalarLaw = std::function<AtomCdf(double)>;

ScalarLaw gaussian_law(double mean, double variance);
ScalarLaw uniform_law();
// Randomized empirical CDF with the coupled value counted as one extra sample.
ScalarLaw empirical_law(std::vector<double> sample);

struct CoupledValue {
  double w = 0.0;
  bool degenerate = false;  // sigma2 = 0 with nonzero V
};

// W = sigma Phi^{-1}(P(V < v) + u P(V = v)).
CoupledValue quantile_couple(double v, const ScalarLaw& law, double sigma2, double u);

struct CouplingOptions {
  double rho = 4.0;
  std::size_t empirical_replicas = 10000;
  std::size_t kr_bins = 32;
  double nu_constant = 1.0;  // C_6 in nu_k = C_6 k^{-rho/20}
  std::size_t cond_radius = 0;
};

struct CouplingReport {
  BlockSchedule schedule;
  std::size_t dim = 1;
  std::string law;  // gaussian, lattice, empirical or identity
  std::vector<std::vector<double>> v, w;
  std::vector<double> abs_diff;  // max-abs |V_k - W_k|
  std::vector<double> k_budget, nu, delta, varrho;
  std::size_t degenerate = 0;
  double sup_discrepancy = 0.0;    // max_j N^{-1/2} |sum_{i<j} xi(i) - W(j)|
  double block_discrepancy = 0.0;  // max_t N^{-1/2} |sum_{k <= ell(t)} Q_k - W(t)|
  double mean_abs_diff = 0.0;
  BrownianGrid bm;  // integer time grid 0..horizon
};

nlohmann::json to_json(const CouplingReport& r, bool with_path = false);

// Quantile (d = 1) or Knothe-Rosenblatt (d >= 2) coupling of the normalized block sums
// to iid N(0, sigma), conditioned on the generator state just before each block, and
// reassembly of a Brownian path on the integer grid.
class Coupler {
 public:
  Coupler(const ProcessSpec& spec, std::size_t horizon, const Eigen::MatrixXd& sigma,
          const CouplingOptions& opts = {});

  CouplingReport couple(const SamplePath& path, std::uint64_t seed) const;

  const BlockSchedule& schedule() const { return sched_; }
  const std::string& law_kind() const { return law_kind_; }

 private:
  struct Lattice {
    long first = 0;
    std::vector<double> below, atom, above;
  };

  void build_gaussian();
  void build_lattice();
  void build_empirical();
  std::size_t start_state(std::size_t k, const SamplePath& path) const;
  std::vector<double> transport(std::size_t k, const SamplePath& path, std::span<const double> v,
                                Rng& u_rng, bool& degenerate) const;
  AtomCdf lattice_cdf(std::size_t k, std::size_t start, double q) const;

  ProcessSpec spec_;
  BlockSchedule sched_;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd sigma_chol_;
  CouplingOptions opts_;
  std::string law_kind_;
  // gaussian: V_k | past ~ N(mean_coef_k * previous value, chol chol^T)
  std::vector<double> mean_coef_;
  std::vector<Eigen::MatrixXd> chol_first_, chol_next_;
  // lattice: block sum = L * base + step * t, t integer; indexed [block][start state]
  double lattice_base_ = 0.0, lattice_step_ = 1.0;
  std::vector<long> lattice_units_;
  std::vector<std::vector<Lattice>> lattice_;
  // empirical: [block][start state] -> replicas x d normalized block sums
  std::vector<std::vector<std::vector<double>>> empirical_;
};

// Convenience wrapper around Coupler.
CouplingReport couple_and_reassemble(const ProcessSpec& spec, const SamplePath& path,
                                     const BlockSchedule& sched, const Eigen::MatrixXd& sigma,
                                     std::uint64_t seed, const CouplingOptions& opts = {});

}  // namespace siglift
