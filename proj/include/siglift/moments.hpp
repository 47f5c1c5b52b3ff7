#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "siglift/process.hpp"
#include "siglift/signature.hpp"

namespace siglift {

// Estimated long-run covariance sigma, drift gamma and (continuous-time) correction F.
struct CovarianceReport {
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd gamma;
  Eigen::MatrixXd f_corr;  // zero for discrete paths
  Eigen::MatrixXd c0;      // lag-0 covariance
  std::size_t lag_window = 0;
  Eigen::MatrixXd stderr_sigma;  // block-jackknife standard errors
  Eigen::MatrixXd stderr_gamma;
  double min_eigenvalue = 0.0;
  // Set when gamma^{ij} and gamma^{ji} differ beyond 3 jackknife standard errors,
  // i.e. when c0 + 2 gamma and c0 + gamma + gamma^T disagree off the diagonal.
  bool asymmetric_gamma = false;
};

nlohmann::json to_json(const CovarianceReport& r);
CovarianceReport covariance_report_from_json(const nlohmann::json& j);

inline constexpr std::size_t kJackknifeBlocks = 20;

// ceil(n^{1/3})
std::size_t default_lag_window(std::size_t n);

// C(l) = (1/(n-l)) sum_k xi(k) xi(k+l)^T, gamma = sum_{l=1}^L C(l),
// sigma = C(0) + gamma + gamma^T. Requires n >= 10 L.
CovarianceReport estimate_sigma_gamma(const SamplePath& path, std::size_t lag_window);

// Continuous-time grid path. The lag window is in time units (>= 1).
// gamma = int_0^L C(u) du, f_corr = int_0^1 (1 - r) C(r) dr, sigma = gamma + gamma^T.
CovarianceReport estimate_gamma_continuous(const SamplePath& path, double lag_window);

// Suspension: discrete estimator on eta plus the mean per-segment double integral
// int_0^tau xi_j(s) int_0^s xi_i(u) du ds (reported as f_corr).
CovarianceReport estimate_gamma_suspension(const SamplePath& eta, std::span<const Segment> segments,
                                           std::size_t lag_window);

struct CharFnGap {
  double gap = 0.0;
  double stderr = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;
  double target = 0.0;  // exp(-<sigma w, w> / 2)
  double re = 0.0;      // Monte Carlo estimate of f_n(w)
  double im = 0.0;
  bool admissible = true;  // |w| <= n^{1/40}
};

// |E exp(i <w, n^{-1/2} sum_{k<n} xi(k)>) - exp(-<sigma w, w>/2)| by Monte Carlo.
// sigma is the closed form when the family has one, else estimated from a long path.
CharFnGap char_fn_gap(const ProcessSpec& spec, std::size_t n, const Eigen::VectorXd& w,
                      std::size_t replicas, std::uint64_t seed, std::size_t threads = 0);

}  // namespace siglift
