#include "wk/symfunc.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace wk {

namespace {

void require_order(int n, int k, int lo) {
    if (k < lo || k > n) {
        std::ostringstream msg;
        msg << "symmetric function order " << k << " outside [" << lo << ", " << n << "]";
        throw std::invalid_argument(msg.str());
    }
}

void require_cone(std::span<const double> lambda) {
    if (!in_positive_cone(lambda)) {
        std::ostringstream msg;
        msg << "eigenvalues outside the positive cone:";
        for (double x : lambda) msg << ' ' << x;
        throw ConeViolation(msg.str());
    }
}

// Unnormalized e_k over lambda with one index removed (skip < 0 keeps all).
double elementary(std::span<const double> lambda, int k, int skip) {
    double e[64] = {1.0};
    std::vector<double> heap;
    double* acc = e;
    if (k >= 64) {
        heap.assign(static_cast<std::size_t>(k) + 1, 0.0);
        heap[0] = 1.0;
        acc = heap.data();
    } else {
        std::fill(e + 1, e + k + 1, 0.0);
    }
    int seen = 0;
    for (int i = 0; i < static_cast<int>(lambda.size()); ++i) {
        if (i == skip) continue;
        ++seen;
        const double x = lambda[static_cast<std::size_t>(i)];
        for (int j = std::min(seen, k); j >= 1; --j) acc[j] += x * acc[j - 1];
    }
    return acc[k];
}

}  // namespace

PrincipalTuple::PrincipalTuple(std::vector<double> values) : values_(std::move(values)) {
    for (double x : values_) {
        if (!std::isfinite(x)) throw std::invalid_argument("principal tuple entry is not finite");
    }
}

bool PrincipalTuple::in_positive_cone() const { return wk::in_positive_cone(values_); }

CurvatureMatrix::CurvatureMatrix(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("matrix dimension must be positive");
    upper_.assign(static_cast<std::size_t>(n * (n + 1) / 2), 0.0);
}

CurvatureMatrix CurvatureMatrix::from_dense(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("curvature matrix must be square");
    CurvatureMatrix m(static_cast<int>(a.rows()));
    for (int i = 0; i < m.n_; ++i)
        for (int j = i; j < m.n_; ++j) m.set(i, j, 0.5 * (a(i, j) + a(j, i)));
    return m;
}

CurvatureMatrix CurvatureMatrix::diagonal(std::span<const double> d) {
    CurvatureMatrix m(static_cast<int>(d.size()));
    for (int i = 0; i < m.n_; ++i) m.set(i, i, d[static_cast<std::size_t>(i)]);
    return m;
}

std::size_t CurvatureMatrix::offset(int i, int j) const {
    if (i > j) std::swap(i, j);
    // row-major packed upper triangle
    return static_cast<std::size_t>(i * n_ - i * (i - 1) / 2 + (j - i));
}

Eigen::MatrixXd CurvatureMatrix::dense() const {
    Eigen::MatrixXd a(n_, n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) a(i, j) = (*this)(i, j);
    return a;
}

PrincipalTuple CurvatureMatrix::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return PrincipalTuple(std::vector<double>(ev.data(), ev.data() + ev.size()));
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

double elem_sym_unchecked(std::span<const double> lambda, int k) {
    const int n = static_cast<int>(lambda.size());
    require_order(n, k, 0);
    return elementary(lambda, k, -1) / binomial(n, k);
}

double elem_sym_norm(std::span<const double> lambda, int k) {
    require_order(static_cast<int>(lambda.size()), k, 1);
    return elem_sym_unchecked(lambda, k);
}

double elem_sym_norm(const PrincipalTuple& lambda, int k) { return elem_sym_norm(lambda.values(), k); }

bool in_positive_cone(std::span<const double> lambda) {
    if (lambda.empty()) return false;
    double lo = lambda[0];
    double big = 1.0;
    for (double x : lambda) {
        if (!std::isfinite(x)) return false;
        lo = std::min(lo, x);
        big = std::max(big, std::abs(x));
    }
    return lo > kConeRelTol * big;
}

double sym_quotient(std::span<const double> lambda, int m) {
    const int n = static_cast<int>(lambda.size());
    require_order(n, m, 0);
    return elem_sym_unchecked(lambda, n) / elem_sym_unchecked(lambda, m);
}

double weingarten_spectral(std::span<const double> lambda, int k) {
    require_order(static_cast<int>(lambda.size()), k, 1);
    require_cone(lambda);
    return std::pow(elem_sym_unchecked(lambda, k), 1.0 / k);
}

void weingarten_spectral_gradient(std::span<const double> lambda, int k, std::span<double> grad) {
    const int n = static_cast<int>(lambda.size());
    require_order(n, k, 1);
    require_cone(lambda);
    if (grad.size() != lambda.size()) throw std::invalid_argument("gradient buffer size mismatch");
    const double c = binomial(n, k);
    const double sk = elementary(lambda, k, -1) / c;
    // d S_k^{1/k} = (1/k) S_k^{1/k - 1} dS_k, dS_k/dlambda_i = e_{k-1}(lambda | i) / C(n,k)
    const double outer = std::pow(sk, 1.0 / k - 1.0) / k;
    for (int i = 0; i < n; ++i) grad[static_cast<std::size_t>(i)] = outer * elementary(lambda, k - 1, i) / c;
}

double dual_spectral(std::span<const double> lambda, int k) {
    const int n = static_cast<int>(lambda.size());
    require_order(n, k, 1);
    require_cone(lambda);
    return std::pow(sym_quotient(lambda, n - k), 1.0 / k);
}

double weingarten_F(const CurvatureMatrix& a, int k) { return weingarten_spectral(a.eigenvalues().values(), k); }

double dual_F(const CurvatureMatrix& a, int k) { return dual_spectral(a.eigenvalues().values(), k); }

Eigen::MatrixXd F_gradient(const CurvatureMatrix& a, int k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.dense());
    const Eigen::VectorXd lam = es.eigenvalues();
    Eigen::VectorXd g(lam.size());
    // The first derivative of a symmetric spectral function is Q diag(f'(lambda)) Q^T
    // even on repeated eigenvalues, so no divided differences are needed here.
    weingarten_spectral_gradient(std::span<const double>(lam.data(), static_cast<std::size_t>(lam.size())), k,
                                 std::span<double>(g.data(), static_cast<std::size_t>(g.size())));
    const auto& q = es.eigenvectors();
    Eigen::MatrixXd out = q * g.asDiagonal() * q.transpose();
    return 0.5 * (out + out.transpose());
}

std::vector<double> maclaurin_report(const PrincipalTuple& lambda) {
    require_cone(lambda.values());
    std::vector<double> chain;
    chain.reserve(static_cast<std::size_t>(lambda.n()));
    for (int k = 1; k <= lambda.n(); ++k) chain.push_back(std::pow(elem_sym_unchecked(lambda.values(), k), 1.0 / k));
    return chain;
}

}  // namespace wk
