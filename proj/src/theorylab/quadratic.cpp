#include "inslab/theorylab/quadratic.hpp"

#include <stdexcept>

namespace inslab::theorylab {

QuadraticFunction::QuadraticFunction(Eigen::MatrixXd a, Eigen::VectorXd bb, double cc)
    : A(0.5 * (a + a.transpose())), b(std::move(bb)), c(cc) {
    if (A.rows() != A.cols() || A.rows() != b.size())
        throw std::invalid_argument("QuadraticFunction: shape mismatch");
}

QuadraticFunction QuadraticFunction::cross_term(int dim, int i, int j, double coef) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
    a(i, j) = coef / 2.0;
    a(j, i) = coef / 2.0;
    return QuadraticFunction(std::move(a), Eigen::VectorXd::Zero(dim), 0.0);
}

double QuadraticFunction::operator()(const Eigen::VectorXd& s) const {
    return s.dot(A * s) + b.dot(s) + c;
}

DepStructure::DepStructure(int dim, std::vector<std::pair<int, int>> pairs) : dim_(dim) {
    for (auto [i, j] : pairs) {
        if (i == j || i < 0 || j < 0 || i >= dim || j >= dim)
            throw std::invalid_argument("DepStructure: invalid pair");
        pairs_.insert({std::min(i, j), std::max(i, j)});
    }
}

bool DepStructure::dependent(int i, int j) const {
    return pairs_.count({std::min(i, j), std::max(i, j)}) > 0;
}

double GDecomposition::eval_total(const Eigen::VectorXd& s) const {
    double acc = constant;
    for (std::size_t i = 0; i < singles.size(); ++i) {
        const double si = s[static_cast<long>(i)];
        acc += singles[i].first * si * si + singles[i].second * si;
    }
    for (const auto& [pair, coef] : dep_terms)
        acc += coef * s[pair.first] * s[pair.second];
    for (const auto& [pair, coef] : indep_terms)
        acc += coef * s[pair.first] * s[pair.second];
    return acc;
}

double GDecomposition::eval_g(const Eigen::VectorXd& s) const {
    double acc = 0.0;
    for (const auto& [pair, coef] : dep_terms)
        acc += coef * s[pair.first] * s[pair.second];
    return acc;
}

bool GDecomposition::g_is_zero(double tol) const {
    for (const auto& [pair, coef] : dep_terms)
        if (std::abs(coef) > tol) return false;
    return true;
}

QuadraticFunction GDecomposition::g_function() const {
    const int n = static_cast<int>(singles.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [pair, coef] : dep_terms) {
        a(pair.first, pair.second) += coef / 2.0;
        a(pair.second, pair.first) += coef / 2.0;
    }
    return QuadraticFunction(std::move(a), Eigen::VectorXd::Zero(n), 0.0);
}

GDecomposition g_decompose(const QuadraticFunction& f, const DepStructure& dep) {
    const int n = f.dim();
    GDecomposition out;
    out.constant = f.c;
    out.singles.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out.singles[static_cast<std::size_t>(i)] = {f.A(i, i), f.b[i]};
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double coef = 2.0 * f.A(i, j);
            if (coef == 0.0) continue;
            (dep.dependent(i, j) ? out.dep_terms : out.indep_terms)[{i, j}] = coef;
        }
    return out;
}

double gaussian_quadratic_expectation(const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov,
                                      const Eigen::MatrixXd& A) {
    if (cov.rows() != A.rows() || cov.cols() != A.cols() || mu.size() != A.rows())
        throw std::invalid_argument("gaussian_quadratic_expectation: shape mismatch");
    return mu.dot(A * mu) + (A * cov).trace();
}

double gaussian_expectation(const QuadraticFunction& f, const Eigen::VectorXd& mu,
                            const Eigen::MatrixXd& cov) {
    return gaussian_quadratic_expectation(mu, cov, f.A) + f.b.dot(mu) + f.c;
}

}  // namespace inslab::theorylab
