#pragma once

// Independent oracles used across test suites. Everything here recomputes
// expected values by a different route than the code under test.

#include "inslab/rng.hpp"
#include "inslab/types.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace oracles {

struct Moments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;  // population covariance
    int n = 0;
};

inline Moments sample_moments(const std::vector<Eigen::VectorXd>& xs) {
    Moments m;
    m.n = static_cast<int>(xs.size());
    m.mean = Eigen::VectorXd::Zero(xs.front().size());
    for (const auto& x : xs) m.mean += x;
    m.mean /= static_cast<double>(m.n);
    m.cov = Eigen::MatrixXd::Zero(m.mean.size(), m.mean.size());
    for (const auto& x : xs) m.cov += (x - m.mean) * (x - m.mean).transpose();
    m.cov /= static_cast<double>(m.n - 1);
    return m;
}

inline double sample_corr(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double saa = 0, sbb = 0, sab = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
        sab += (a[i] - ma) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

inline double sample_var(const std::vector<double>& a) {
    const double n = static_cast<double>(a.size());
    double m = 0;
    for (double x : a) m += x;
    m /= n;
    double s = 0;
    for (double x : a) s += (x - m) * (x - m);
    return s / (n - 1.0);
}

// Entrywise |sample - expected| <= k standard errors, Gaussian-based SE for
// covariance entries.
inline bool cov_close(const Eigen::MatrixXd& sample, const Eigen::MatrixXd& expected, int n,
                      double k_se) {
    for (long i = 0; i < sample.rows(); ++i)
        for (long j = 0; j < sample.cols(); ++j) {
            const double se = std::sqrt(
                (expected(i, i) * expected(j, j) + expected(i, j) * expected(i, j)) /
                static_cast<double>(n));
            if (std::abs(sample(i, j) - expected(i, j)) > k_se * std::max(se, 1e-12)) return false;
        }
    return true;
}

// Exact policy evaluation by dense linear solve: V = (I - gamma P_pi)^-1 R_pi.
// Independent of the planner's sweep-based evaluation.
inline Eigen::VectorXd policy_value_linear_solve(const Eigen::MatrixXd& p_pi,
                                                 const Eigen::VectorXd& r_pi, double gamma) {
    const auto n = p_pi.rows();
    const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - gamma * p_pi;
    return A.fullPivLu().solve(r_pi);
}

}  // namespace oracles
