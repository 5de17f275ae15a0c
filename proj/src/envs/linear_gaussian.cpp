#include "inslab/envs/linear_gaussian.hpp"

#include "inslab/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <stdexcept>

namespace inslab::envs {

void LinearGaussianSpec::validate() const {
    const auto n = A.rows();
    if (n < 1 || A.cols() != n) throw std::invalid_argument("LinearGaussianSpec: A must be square");
    if (noise_cov.rows() != n || noise_cov.cols() != n)
        throw std::invalid_argument("LinearGaussianSpec: noise_cov shape mismatch");
    if ((noise_cov - noise_cov.transpose()).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("LinearGaussianSpec: noise_cov not symmetric");
    if (k < 1) throw std::invalid_argument("LinearGaussianSpec: k must be >= 1");
    Eigen::EigenSolver<Eigen::MatrixXd> es(A);
    if (es.eigenvalues().cwiseAbs().maxCoeff() > 1.0 + 1e-9)
        throw std::invalid_argument("LinearGaussianSpec: spectral radius of A exceeds 1");
}

Eigen::MatrixXd subsampled_noise_cov(const LinearGaussianSpec& spec) {
    spec.validate();
    const auto n = spec.A.rows();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd Al = Eigen::MatrixXd::Identity(n, n);
    for (int l = 0; l < spec.k; ++l) {
        cov += Al * spec.noise_cov * Al.transpose();
        Al = spec.A * Al;
    }
    return cov;
}

Eigen::MatrixXd aggregated_noise_cov(const LinearGaussianSpec& spec) {
    spec.validate();
    const auto n = spec.A.rows();
    const int k = spec.k;
    // Powers A^0 .. A^{k-1}, then prefix sums B_m and suffix sums C_m.
    std::vector<Eigen::MatrixXd> pow(static_cast<std::size_t>(k));
    pow[0] = Eigen::MatrixXd::Identity(n, n);
    for (int m = 1; m < k; ++m) pow[static_cast<std::size_t>(m)] = spec.A * pow[static_cast<std::size_t>(m - 1)];

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
    for (int m = 0; m < k; ++m) {
        B += pow[static_cast<std::size_t>(m)];
        cov += B * spec.noise_cov * B.transpose();
    }
    for (int m = 1; m < k; ++m) {
        Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
        for (int q = m; q < k; ++q) C += pow[static_cast<std::size_t>(q)];
        cov += C * spec.noise_cov * C.transpose();
    }
    return cov / (static_cast<double>(k) * static_cast<double>(k));
}

namespace {

Eigen::MatrixXd noise_factor(const LinearGaussianSpec& spec) {
    return psd_factor(spec.noise_cov);
}

Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& A, int k) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Identity(A.rows(), A.cols());
    for (int i = 0; i < k; ++i) out = A * out;
    return out;
}

}  // namespace

std::vector<Eigen::VectorXd> simulate_subsampled_noise(const LinearGaussianSpec& spec,
                                                       int n_samples, RngStream& rng) {
    spec.validate();
    const auto n = spec.A.rows();
    const Eigen::MatrixXd L = noise_factor(spec);
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<std::size_t>(n_samples));
    for (int m = 0; m < n_samples; ++m) {
        // One fresh window: k base steps from s = 0; the compound noise of the
        // next observation is the state itself.
        Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
        for (int t = 0; t < spec.k; ++t)
            s = spec.A * s + L * standard_normal(static_cast<int>(n), rng);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Eigen::VectorXd> simulate_aggregated_noise(const LinearGaussianSpec& spec,
                                                       int n_samples, RngStream& rng) {
    spec.validate();
    const auto n = spec.A.rows();
    const int k = spec.k;
    const Eigen::MatrixXd L = noise_factor(spec);
    const Eigen::MatrixXd Ak = matrix_power(spec.A, k);
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<std::size_t>(n_samples));
    for (int m = 0; m < n_samples; ++m) {
        // Two aggregated observations from a fresh 2k-step window starting at
        // s_0 = 0 (the compound noise does not depend on the start state).
        Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd agg1 = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd agg2 = Eigen::VectorXd::Zero(n);
        for (int t = 1; t <= 2 * k; ++t) {
            s = spec.A * s + L * standard_normal(static_cast<int>(n), rng);
            (t <= k ? agg1 : agg2) += s;
        }
        agg1 /= static_cast<double>(k);
        agg2 /= static_cast<double>(k);
        out.push_back(agg2 - Ak * agg1);
    }
    return out;
}

}  // namespace inslab::envs
