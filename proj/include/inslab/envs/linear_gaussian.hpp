#pragma once

#include "inslab/rng.hpp"

#include <Eigen/Core>

#include <vector>

namespace inslab::envs {

// Linear-Gaussian chain s_{t+1} = A s_t + eps, observed every k-th step
// (subsampling) or as averages of k consecutive states (aggregation). Both
// observation schemes compound the per-step noise into correlated noise with
// the closed-form covariances below.
struct LinearGaussianSpec {
    Eigen::MatrixXd A;
    Eigen::MatrixXd noise_cov;
    int k = 1;

    void validate() const;
};

// Covariance of the subsampled compound noise: sum_{l=0}^{k-1} A^l S (A^l)^T.
Eigen::MatrixXd subsampled_noise_cov(const LinearGaussianSpec& spec);

// Covariance of the aggregated compound noise:
//   (1/k^2) [ sum_{m=0}^{k-1} B_m S B_m^T + sum_{m=1}^{k-1} C_m S C_m^T ]
// with B_m = sum_{n=0}^{m} A^n and C_m = sum_{n=m}^{k-1} A^n.
Eigen::MatrixXd aggregated_noise_cov(const LinearGaussianSpec& spec);

// Monte-Carlo oracles: each sample simulates a fresh window of the base chain
// and extracts one compound-noise vector e~ = s~_{t+1} - A^k s~_t, so samples
// are exactly distributed and mutually independent.
std::vector<Eigen::VectorXd> simulate_subsampled_noise(const LinearGaussianSpec& spec,
                                                       int n_samples, RngStream& rng);
std::vector<Eigen::VectorXd> simulate_aggregated_noise(const LinearGaussianSpec& spec,
                                                       int n_samples, RngStream& rng);

}  // namespace inslab::envs
