#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "siglift/rng.hpp"
#include "siglift/signature.hpp"

namespace siglift {

enum class Family { IidGaussian, Ar1, MarkovFunctional, DoublingMap, SuspensionOverMarkov };

const char* to_string(Family f);
Family family_from_string(const std::string& s);

struct ProcessSpec {
  Family family = Family::IidGaussian;
  std::size_t dim = 1;
  Eigen::MatrixXd covariance;   // iid: sample covariance; ar1: innovation covariance
  double ar_coefficient = 0.0;  // ar1
  Eigen::MatrixXd transition;   // markov / suspension: S x S row-stochastic
  Eigen::MatrixXd observable;   // markov / suspension: S x d table g
  std::vector<double> ceiling;  // suspension: tau per state
  double ceiling_bound = 0.0;   // suspension: L-hat
  std::vector<int> frequencies; // doubling map: cos(2 pi f_i x) per coordinate
  std::uint64_t seed = 0;
};

// Throws ValidationError on any violated structural or centering requirement.
void validate(const ProcessSpec& spec);

ProcessSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const ProcessSpec& spec);

// Convenience constructors for the families used throughout the tests.
ProcessSpec iid_gaussian_spec(std::size_t dim, double variance = 1.0, std::uint64_t seed = 0);
ProcessSpec ar1_spec(double a, double innovation_variance = 1.0, std::uint64_t seed = 0);
// Symmetric two-state chain with flip probability p and g = (+c, -c).
ProcessSpec two_state_spec(double flip, double amplitude = 1.0, std::uint64_t seed = 0);

// The base sequence eta(m) = tau(X_m) g(X_m) of a suspension as a Markov-functional
// spec; other specs are returned unchanged.
ProcessSpec eta_view(const ProcessSpec& spec);

// Sequential sampler for the discrete families, started from the stationary law.
class ProcessSampler {
 public:
  ProcessSampler(const ProcessSpec& spec, std::uint64_t seed);

  void next(std::span<double> out);

  int state() const { return state_; }
  unsigned __int128 doubling_state() const { return doubling_; }
  std::size_t count() const { return count_; }

 private:
  ProcessSpec spec_;
  Rng rng_;
  Eigen::MatrixXd root_;
  Eigen::VectorXd z_, x_;
  std::vector<std::vector<double>> cumulative_;
  int state_ = 0;
  unsigned __int128 doubling_ = 0;
  std::uint64_t bits_ = 0;
  int bits_left_ = 0;
  std::size_t count_ = 0;
};

// n samples started from the stationary law, deterministic given spec.seed.
SamplePath generate(const ProcessSpec& spec, std::size_t n);
SamplePath generate(const ProcessSpec& spec, std::size_t n, std::uint64_t seed);

struct SuspensionSample {
  SamplePath grid;  // kind Suspension, xi(j * delta) with the segment table
  SamplePath eta;   // discrete base sequence eta(m) = integral of xi over segment m
};

// Flow samples on [0, total_time) at step delta. Requires delta <= 1 / (4 L-hat).
SuspensionSample generate_suspension(const ProcessSpec& spec, double total_time, double delta);
SuspensionSample generate_suspension(const ProcessSpec& spec, double total_time, double delta,
                                     std::uint64_t seed);

struct MixingCertificate {
  std::string family;
  bool empirical_only = false;
  std::string coefficient = "phi";  // which mixing coefficient the bound controls
  double constant = 1.0;            // C in C * lambda^n
  double lambda = 0.0;
  std::size_t power = 1;            // lambda derived from the contraction of P^power
};

// Dobrushin contraction of P (half the largest total-variation distance between rows).
double dobrushin_coefficient(const Eigen::MatrixXd& P);
MixingCertificate mixing_bound_markov(const Eigen::MatrixXd& P);
MixingCertificate mixing_certificate(const ProcessSpec& spec);

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& P);
bool is_irreducible(const Eigen::MatrixXd& P);
std::size_t chain_period(const Eigen::MatrixXd& P);

struct AnalyticMoments {
  Eigen::MatrixXd c0;     // lag-0 covariance (of eta for suspensions)
  Eigen::MatrixXd gamma;  // drift matrix
  Eigen::MatrixXd sigma;  // long-run covariance
};

// Closed-form moments where the family admits them.
std::optional<AnalyticMoments> analytic_moments(const ProcessSpec& spec);

// Lag-l autocovariance E xi(0) xi(l)^T in closed form (iid, ar1, markov, doubling).
std::optional<Eigen::MatrixXd> analytic_autocovariance(const ProcessSpec& spec, std::size_t lag);

// Average of the doubling-map observable over the dyadic cylinder fixed by the
// leading radius + 1 binary digits of the state.
std::vector<double> doubling_conditional_mean(const ProcessSpec& spec, unsigned __int128 state,
                                              std::size_t radius);

double doubling_to_double(unsigned __int128 state);

}  // namespace siglift
