#pragma once

#include "inslab/types.hpp"

#include <Eigen/Core>

#include <map>
#include <set>
#include <utility>
#include <vector>

namespace inslab::theorylab {

// F(s) = s^T A s + b^T s + c with A symmetrized on construction.
struct QuadraticFunction {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    double c = 0.0;

    QuadraticFunction(Eigen::MatrixXd a, Eigen::VectorXd bb, double cc);
    static QuadraticFunction cross_term(int dim, int i, int j, double coef);

    int dim() const { return static_cast<int>(A.rows()); }
    double operator()(const Eigen::VectorXd& s) const;
};

// Unordered index pairs declared instantaneously dependent.
class DepStructure {
public:
    DepStructure() = default;
    DepStructure(int dim, std::vector<std::pair<int, int>> pairs);

    bool dependent(int i, int j) const;
    const std::set<std::pair<int, int>>& pairs() const { return pairs_; }
    int dim() const { return dim_; }

private:
    int dim_ = 0;
    std::set<std::pair<int, int>> pairs_;  // normalized i < j
};

// The four-part split of a quadratic-plus-linear function: a constant, one
// single-dimension term per coordinate, and one cross term per index pair,
// classified by the declared dependence structure. G_F is the sum of the
// dependent cross terms — the only part whose integral can separate a lagged
// model from the truth.
struct GDecomposition {
    double constant = 0.0;
    std::vector<std::pair<double, double>> singles;          // (s_i^2 coef, s_i coef)
    std::map<std::pair<int, int>, double> dep_terms;         // s_i s_j coefficient
    std::map<std::pair<int, int>, double> indep_terms;

    double eval_total(const Eigen::VectorXd& s) const;
    double eval_g(const Eigen::VectorXd& s) const;
    bool g_is_zero(double tol = 0.0) const;

    // G_F as a QuadraticFunction (dependent cross terms only).
    QuadraticFunction g_function() const;
};

GDecomposition g_decompose(const QuadraticFunction& f, const DepStructure& dep);

// E[x^T A x] for x ~ N(mu, cov): mu^T A mu + tr(A cov).
double gaussian_quadratic_expectation(const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov,
                                      const Eigen::MatrixXd& A);

// E[F(x)] for x ~ N(mu, cov) in closed form.
double gaussian_expectation(const QuadraticFunction& f, const Eigen::VectorXd& mu,
                            const Eigen::MatrixXd& cov);

}  // namespace inslab::theorylab
