#include "inslab/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace inslab {

Eigen::VectorXd to_eigen(const StateVec& s) {
    return Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<long>(s.size()));
}

StateVec from_eigen(const Eigen::VectorXd& v) {
    return StateVec(v.data(), v.data() + v.size());
}

bool all_finite(const StateVec& s) {
    for (double x : s)
        if (!std::isfinite(x)) return false;
    return true;
}

void Dataset::push(TransitionRecord rec) {
    const int d = static_cast<int>(rec.state.size());
    if (d < 1) throw std::invalid_argument("Dataset::push: empty state");
    if (rec.next_state.size() != rec.state.size())
        throw std::invalid_argument("Dataset::push: state dim " + std::to_string(d) +
                                    " != next_state dim " +
                                    std::to_string(rec.next_state.size()));
    if (dim_ >= 0 && d != dim_)
        throw std::invalid_argument("Dataset::push: record dim " + std::to_string(d) +
                                    " does not match dataset dim " + std::to_string(dim_));
    if (!all_finite(rec.state) || !all_finite(rec.next_state) || !std::isfinite(rec.reward))
        throw std::invalid_argument("Dataset::push: non-finite value in record");
    if (rec.action < 0) throw std::invalid_argument("Dataset::push: negative action id");
    dim_ = d;
    records_.push_back(std::move(rec));
    if (capacity_ > 0 && records_.size() > capacity_)
        records_.erase(records_.begin(), records_.begin() + (records_.size() - capacity_));
}

Dataset dataset_push(Dataset ds, TransitionRecord rec) {
    ds.push(std::move(rec));
    return ds;
}

CorrelationMatrix CorrelationMatrix::from_entries(const Eigen::MatrixXd& entries) {
    const auto n = entries.rows();
    if (n < 1 || entries.cols() != n)
        throw std::invalid_argument("CorrelationMatrix: entries must be square and nonempty");
    for (long i = 0; i < n; ++i) {
        if (std::abs(entries(i, i) - 1.0) >= 1e-12) {
            std::ostringstream os;
            os << "CorrelationMatrix: diagonal entry (" << i << "," << i << ") = "
               << entries(i, i) << " is not 1";
            throw std::invalid_argument(os.str());
        }
        for (long j = 0; j < n; ++j) {
            if (!std::isfinite(entries(i, j)))
                throw std::invalid_argument("CorrelationMatrix: non-finite entry");
            if (std::abs(entries(i, j) - entries(j, i)) > 1e-12)
                throw std::invalid_argument("CorrelationMatrix: not symmetric");
            if (i != j && std::abs(entries(i, j)) > 1.0 + 1e-12) {
                std::ostringstream os;
                os << "CorrelationMatrix: off-diagonal (" << i << "," << j << ") = "
                   << entries(i, j) << " outside [-1,1]";
                throw std::invalid_argument(os.str());
            }
        }
    }
    Eigen::MatrixXd m = 0.5 * (entries + entries.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -1e-9) {
        std::ostringstream os;
        os << "CorrelationMatrix: smallest eigenvalue " << min_eig
           << " below repairable threshold -1e-9";
        throw std::invalid_argument(os.str());
    }
    if (min_eig < 0.0) {
        // Clip negative eigenvalues, then restore the unit diagonal.
        Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
        m = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
        Eigen::VectorXd d = m.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
        m = d.asDiagonal() * m * d.asDiagonal();
        m = 0.5 * (m + m.transpose());
        m.diagonal().setOnes();
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < n; ++j)
                if (i != j && std::abs(m(i, j)) > 1.0) m(i, j) = m(i, j) > 0 ? 1.0 : -1.0;
    }
    return CorrelationMatrix(std::move(m));
}

CorrelationMatrix CorrelationMatrix::identity(int n) {
    if (n < 1) throw std::invalid_argument("CorrelationMatrix::identity: n < 1");
    return CorrelationMatrix(Eigen::MatrixXd::Identity(n, n));
}

bool CorrelationMatrix::is_identity(double tol) const {
    return (m_ - Eigen::MatrixXd::Identity(m_.rows(), m_.cols())).cwiseAbs().maxCoeff() <= tol;
}

Eigen::MatrixXd GaussianPrediction::covariance() const {
    const int n = dim();
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d[i] = scales[static_cast<std::size_t>(i)];
    return d.asDiagonal() * corr.entries() * d.asDiagonal();
}

}  // namespace inslab
