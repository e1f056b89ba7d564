#pragma once

// Pointwise geometry of a radial graph X = x / u over a domain of S^N, and the
// per-node state used by the solver. Tensors are in an orthonormal frame of
// the sphere, so sigma_ij = delta_ij.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "wk/errors.hpp"
#include "wk/sphere.hpp"
#include "wk/symfunc.hpp"

namespace wk {

template <int N>
struct GraphPointData {
    using Vec = Eigen::Matrix<double, N, 1>;
    using Mat = Eigen::Matrix<double, N, N>;
    using Ambient = Eigen::Matrix<double, N + 1, 1>;

    double u = 0.0;
    Vec grad_u;
    Mat hess_u;
    double w = 0.0;  // (u^2 + |grad u|^2)^{1/2}
    Mat gamma_upper;
    Mat gamma_lower;
    Mat g;
    Mat g_inv;
    Mat h;  // second fundamental form
    Mat a;  // curvature matrix, eigenvalues are the principal curvatures
    Ambient eta;
    Ambient position;  // X = x / u

    CurvatureMatrix curvature_matrix() const {
        return CurvatureMatrix::from_dense(Eigen::MatrixXd(a));
    }
    /// Principal curvatures, ascending.
    Vec kappa() const {
        Eigen::SelfAdjointEigenSolver<Mat> es;
        es.computeDirect(a, Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }
};

/// Geometry from u, its frame gradient and covariant Hessian.
template <int N>
GraphPointData<N> point_geometry_u(double u, const Eigen::Matrix<double, N, 1>& grad_u,
                                   const Eigen::Matrix<double, N, N>& hess_u, const SpherePoint<N>& at) {
    using Mat = Eigen::Matrix<double, N, N>;
    if (!(u > 0.0)) throw GraphDomainError("radial graph needs u > 0");
    const Mat id = Mat::Identity();
    const Mat pp = grad_u * grad_u.transpose();

    GraphPointData<N> d;
    d.u = u;
    d.grad_u = grad_u;
    d.hess_u = hess_u;
    d.w = std::sqrt(u * u + grad_u.squaredNorm());
    const double w = d.w;
    d.g = (id + pp / (u * u)) / (u * u);
    d.g_inv = u * u * (id - pp / (w * w));
    d.h = (u * id + hess_u) / (u * w);
    d.gamma_upper = u * id - u * pp / (w * (u + w));
    d.gamma_lower = id / u + pp / (u * u * (u + w));
    d.a = d.gamma_upper * d.h * d.gamma_upper;
    d.a = 0.5 * (d.a + d.a.transpose());
    const auto grad_amb = at.frame * grad_u;
    d.eta = (u * at.x + grad_amb) / w;
    d.position = at.x / u;
    return d;
}

/// Geometry from v = ln u; the curvature matrix uses the logarithmic form
/// a = (e^v / w)(I + gamma D^2 v gamma), w = sqrt(1 + |Dv|^2).
template <int N>
GraphPointData<N> point_geometry_v(double v, const Eigen::Matrix<double, N, 1>& grad_v,
                                   const Eigen::Matrix<double, N, N>& hess_v, const SpherePoint<N>& at) {
    using Mat = Eigen::Matrix<double, N, N>;
    const Mat id = Mat::Identity();
    const double u = std::exp(v);
    const Mat pp = grad_v * grad_v.transpose();
    const double wv = std::sqrt(1.0 + grad_v.squaredNorm());
    const Mat gamma = id - pp / (wv * (1.0 + wv));

    GraphPointData<N> d = point_geometry_u<N>(u, u * grad_v, u * (hess_v + pp), at);
    d.a = (u / wv) * (id + gamma * hess_v * gamma);
    d.a = 0.5 * (d.a + d.a.transpose());
    d.eta = (at.x + at.frame * grad_v) / wv;
    return d;
}

/// Smallest eigenvalue of u I + D^2 u.
template <int N>
double admissibility_margin(const GraphPointData<N>& d) {
    const Eigen::Matrix<double, N, N> m = d.u * Eigen::Matrix<double, N, N>::Identity() + d.hess_u;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> es;
    es.computeDirect(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

enum class Representation { u_form, v_form };

/// Field u (or v = ln u) on a cap grid with cached per-node geometry.
class GraphState {
public:
    GraphState(std::shared_ptr<const CapGrid> grid, std::vector<double> values, Representation rep);

    const CapGrid& grid() const { return *grid_; }
    const std::shared_ptr<const CapGrid>& grid_ptr() const { return grid_; }
    Representation representation() const { return rep_; }
    std::span<const double> values() const { return values_; }

    /// Replaces the field and recomputes the geometry cache.
    void set_values(std::vector<double> values);

    double u(std::size_t node) const { return geometry_[node].u; }
    double v(std::size_t node) const { return std::log(geometry_[node].u); }
    const GraphPointData<2>& at(std::size_t node) const { return geometry_[node]; }
    std::span<const GraphPointData<2>> geometry() const { return geometry_; }

    GraphState to_representation(Representation rep) const;

private:
    void refresh();

    std::shared_ptr<const CapGrid> grid_;
    std::vector<double> values_;
    Representation rep_;
    std::vector<GraphPointData<2>> geometry_;
};

struct AdmissibilityReport {
    bool admissible = false;
    std::size_t worst_node = 0;
    double min_eigenvalue = 0.0;  // min over nodes of lambda_min(u I + D^2 u)
};

AdmissibilityReport admissible(std::span<const GraphPointData<2>> data);
AdmissibilityReport admissible(const GraphState& state);

struct Mesh {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<std::size_t, 3>> faces;  // counter-clockwise seen from outside
};

/// Vertices X = x / u with grid connectivity: a fan around the center and each
/// quad split along its shorter diagonal.
Mesh embed(const GraphState& state);

struct SupportSample {
    Eigen::Vector3d normal;
    double support = 0.0;  // <X, eta>
};

/// Samples of the support function of the graph on its Gauss image.
std::vector<SupportSample> support_samples(const GraphState& state);

}  // namespace wk
