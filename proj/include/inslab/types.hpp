#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace inslab {

// Real state vector. Kept as a plain vector of doubles; finiteness and
// dimension agreement are enforced where records enter a Dataset or an
// environment boundary.
using StateVec = std::vector<double>;

using ActionId = int;

Eigen::VectorXd to_eigen(const StateVec& s);
StateVec from_eigen(const Eigen::VectorXd& v);
bool all_finite(const StateVec& s);

struct TransitionRecord {
    StateVec state;
    ActionId action = 0;
    StateVec next_state;
    double reward = 0.0;
    bool terminal = false;
};

// Ordered transition log. `capacity == 0` means unbounded; otherwise the
// oldest records are evicted FIFO.
class Dataset {
public:
    enum class Provenance { environment, model };

    explicit Dataset(Provenance p = Provenance::environment, std::size_t capacity = 0)
        : provenance_(p), capacity_(capacity) {}

    // Appends a record; rejects dimension mismatches and non-finite values.
    void push(TransitionRecord rec);

    const TransitionRecord& operator[](std::size_t i) const { return records_[i]; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    int state_dim() const { return dim_; }
    Provenance provenance() const { return provenance_; }
    const std::vector<TransitionRecord>& records() const { return records_; }
    void clear() { records_.clear(); }

private:
    Provenance provenance_;
    std::size_t capacity_;
    int dim_ = -1;
    std::vector<TransitionRecord> records_;
};

Dataset dataset_push(Dataset ds, TransitionRecord rec);

// Symmetric unit-diagonal PSD matrix. Construction validates or repairs;
// no invalid instance can exist.
class CorrelationMatrix {
public:
    // Validates: symmetry, unit diagonal (1e-12), off-diagonals in [-1,1],
    // smallest eigenvalue >= -1e-9. Eigenvalues in [-1e-9, 0) are repaired by
    // clipping at zero and re-normalizing the diagonal; anything worse throws.
    static CorrelationMatrix from_entries(const Eigen::MatrixXd& entries);

    static CorrelationMatrix identity(int n);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXd& entries() const { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }
    bool is_identity(double tol = 0.0) const;

private:
    explicit CorrelationMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {}
    Eigen::MatrixXd m_;
};

// One-step predictive distribution: mean mu, per-dimension scales
// (diagonal of Sigma^(1/2)) and correlation Gamma. The implied covariance is
// D * Gamma * D with D = diag(scales).
struct GaussianPrediction {
    StateVec mean;
    std::vector<double> scales;
    CorrelationMatrix corr;

    int dim() const { return static_cast<int>(mean.size()); }
    Eigen::MatrixXd covariance() const;
};

}  // namespace inslab
