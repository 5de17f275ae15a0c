#pragma once

#include "inslab/rng.hpp"

#include <Eigen/Core>

namespace inslab {

// Lower-triangular factor L with L*L^T = m for a symmetric PSD matrix.
// Tries Cholesky with diagonal jitter (1e-10, escalating), then falls back to
// an eigenfactorization with negative eigenvalues clipped at zero. Throws if
// the matrix is materially indefinite.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& m);

// z ~ N(0, I) of dimension n drawn from the stream.
Eigen::VectorXd standard_normal(int n, RngStream& rng);

}  // namespace inslab
