#include "inslab/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <sstream>
#include <stdexcept>

namespace inslab {

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& m) {
    const auto n = m.rows();
    double jitter = 1e-10;
    for (int attempt = 0; attempt < 3; ++attempt) {
        Eigen::MatrixXd j = m + jitter * Eigen::MatrixXd::Identity(n, n);
        Eigen::LLT<Eigen::MatrixXd> llt(j);
        if (llt.info() == Eigen::Success) return llt.matrixL();
        jitter *= 100.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const double min_eig = es.eigenvalues().minCoeff();
    const double max_eig = es.eigenvalues().maxCoeff();
    if (min_eig < -1e-7 * std::max(1.0, max_eig)) {
        std::ostringstream os;
        os << "psd_factor: matrix is indefinite (min eigenvalue " << min_eig << "):\n" << m;
        throw std::runtime_error(os.str());
    }
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal();
}

Eigen::VectorXd standard_normal(int n, RngStream& rng) {
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = rng.normal();
    return z;
}

}  // namespace inslab
