#pragma once

// Normalized elementary symmetric functions S_k, the curvature operator
// F = S_k^{1/k} of a symmetric matrix, its dual form and derivatives.

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <vector>

#include "wk/errors.hpp"

namespace wk {

/// Relative tolerance of the strict positive-cone test.
inline constexpr double kConeRelTol = 1e-12;

/// Vector of principal-curvature candidates.
class PrincipalTuple {
public:
    PrincipalTuple() = default;
    explicit PrincipalTuple(std::vector<double> values);

    int n() const { return static_cast<int>(values_.size()); }
    std::span<const double> values() const { return values_; }
    double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }

    bool in_positive_cone() const;

private:
    std::vector<double> values_;
};

/// Symmetric n x n matrix stored as its packed upper triangle.
class CurvatureMatrix {
public:
    explicit CurvatureMatrix(int n);
    static CurvatureMatrix from_dense(const Eigen::MatrixXd& a);
    static CurvatureMatrix diagonal(std::span<const double> d);

    int n() const { return n_; }
    double operator()(int i, int j) const { return upper_[offset(i, j)]; }
    void set(int i, int j, double value) { upper_[offset(i, j)] = value; }

    Eigen::MatrixXd dense() const;
    /// Eigenvalues in ascending order.
    PrincipalTuple eigenvalues() const;

private:
    std::size_t offset(int i, int j) const;

    int n_;
    std::vector<double> upper_;
};

double binomial(int n, int k);

/// e_k(lambda) / C(n, k), defined for 0 <= k <= n.
double elem_sym_unchecked(std::span<const double> lambda, int k);

/// Normalized k-th elementary symmetric function, 1 <= k <= n.
double elem_sym_norm(std::span<const double> lambda, int k);
double elem_sym_norm(const PrincipalTuple& lambda, int k);

/// Strict cone test: min lambda_i > kConeRelTol * max(1, |lambda|_inf).
bool in_positive_cone(std::span<const double> lambda);

/// Quotient S_n / S_m of normalized symmetric functions.
double sym_quotient(std::span<const double> lambda, int m);

/// S_k(lambda)^{1/k}; throws ConeViolation outside the positive cone.
double weingarten_spectral(std::span<const double> lambda, int k);

/// d/d lambda_i of S_k(lambda)^{1/k}, written into grad.
void weingarten_spectral_gradient(std::span<const double> lambda, int k, std::span<double> grad);

/// (S_n / S_{n-k})^{1/k}; throws ConeViolation outside the positive cone.
double dual_spectral(std::span<const double> lambda, int k);

double weingarten_F(const CurvatureMatrix& a, int k);
double dual_F(const CurvatureMatrix& a, int k);

/// Matrix of partials F^{ij} = dF/da_ij, symmetric and positive definite on the cone.
Eigen::MatrixXd F_gradient(const CurvatureMatrix& a, int k);

/// (S_1, S_2^{1/2}, ..., S_n^{1/n}); non-increasing on the positive cone.
std::vector<double> maclaurin_report(const PrincipalTuple& lambda);

/// Value and gradient of F for fixed-size matrices, used on the hot path.
template <int N>
struct SpectralEval {
    double value = 0.0;
    Eigen::Matrix<double, N, N> gradient;
    Eigen::Matrix<double, N, 1> eigenvalues;
};

template <int N>
SpectralEval<N> weingarten_eval(const Eigen::Matrix<double, N, N>& a, int k) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> es;
    if constexpr (N == 2 || N == 3) {
        es.computeDirect(a);
    } else {
        es.compute(a);
    }
    SpectralEval<N> out;
    out.eigenvalues = es.eigenvalues();
    std::span<const double> lam(out.eigenvalues.data(), N);
    out.value = weingarten_spectral(lam, k);
    Eigen::Matrix<double, N, 1> g;
    weingarten_spectral_gradient(lam, k, std::span<double>(g.data(), N));
    const auto& q = es.eigenvectors();
    out.gradient = q * g.asDiagonal() * q.transpose();
    return out;
}

}  // namespace wk
