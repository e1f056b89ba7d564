#pragma once

// Geodesic cap of S^2 around the north pole, discretized in the stereographic
// plane on a plane-polar node layout. All derivative output is expressed in
// the conformal orthonormal frame e_i = (1 / conformal factor) d/dy_i, so the
// sphere metric is the identity there.

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace wk {

/// Point on S^N together with an orthonormal tangent frame (columns).
template <int N>
struct SpherePoint {
    Eigen::Matrix<double, N + 1, 1> x;
    Eigen::Matrix<double, N + 1, N> frame;
};

enum class NodeClass { center, interior, boundary };

struct GridNode {
    Eigen::Vector2d y;           // stereographic plane coordinates
    Eigen::Vector3d x;           // point on the unit sphere
    double conformal = 1.0;      // 2 / (1 + |y|^2)
    NodeClass node_class = NodeClass::interior;
    int ring = 0;                // 0 for the center node
    int sector = 0;
    Eigen::Matrix<double, 3, 2> frame;  // ambient images of e_1, e_2

    SpherePoint<2> point() const { return {x, frame}; }
};

/// Plane derivative slots of a stencil.
enum PlaneDerivative : int { d1 = 0, d2, d11, d12, d22 };

/// Linear derivative weights over a fixed neighbour list.
struct NodeStencil {
    std::vector<std::size_t> neighbors;
    std::array<std::vector<double>, 5> plane;     // d1, d2, d11, d12, d22
    std::array<std::vector<double>, 2> gradient;  // frame components of grad
    std::array<std::vector<double>, 3> hessian;   // frame components 11, 12, 22
};

class CapGrid {
public:
    CapGrid(double cap_radius, int rings, int sectors);

    double cap_radius() const { return cap_radius_; }
    double plane_radius() const { return plane_radius_; }
    int rings() const { return rings_; }
    int sectors() const { return sectors_; }

    std::size_t node_count() const { return nodes_.size(); }
    const GridNode& node(std::size_t i) const { return nodes_[i]; }
    std::span<const GridNode> nodes() const { return nodes_; }
    const NodeStencil& stencil(std::size_t i) const { return stencils_[i]; }

    /// Node index for ring in [0, rings], any sector (wrapped); ring 0 is the center.
    std::size_t index(int ring, int sector) const;
    bool is_boundary(std::size_t i) const { return nodes_[i].node_class == NodeClass::boundary; }
    std::span<const std::size_t> boundary_nodes() const { return boundary_; }

    /// Largest chord length between grid-adjacent nodes on the sphere.
    double max_spacing() const;

private:
    void build_stencils();

    double cap_radius_;
    double plane_radius_;
    int rings_;
    int sectors_;
    std::vector<GridNode> nodes_;
    std::vector<NodeStencil> stencils_;
    std::vector<std::size_t> boundary_;
};

std::shared_ptr<const CapGrid> build_grid(double cap_radius, int rings, int sectors);

/// Inverse stereographic projection from the south pole.
Eigen::Vector3d sphere_point(const Eigen::Vector2d& y);

/// Scalar values attached to the nodes of a grid.
class ScalarField {
public:
    ScalarField(std::shared_ptr<const CapGrid> grid, std::vector<double> values);

    const CapGrid& grid() const { return *grid_; }
    const std::shared_ptr<const CapGrid>& grid_ptr() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Writes an interior value; boundary values are fixed at construction.
    void set_interior(std::size_t i, double value);

private:
    std::shared_ptr<const CapGrid> grid_;
    std::vector<double> values_;
};

/// Applies one plane-derivative slot of a stencil.
double plane_derivative(const CapGrid& grid, std::span<const double> field, std::size_t node, PlaneDerivative d);

Eigen::Vector2d covariant_gradient(const CapGrid& grid, std::span<const double> field, std::size_t node);
Eigen::Matrix2d covariant_hessian(const CapGrid& grid, std::span<const double> field, std::size_t node);

inline Eigen::Vector2d covariant_gradient(const ScalarField& f, std::size_t node) {
    return covariant_gradient(f.grid(), f.values(), node);
}
inline Eigen::Matrix2d covariant_hessian(const ScalarField& f, std::size_t node) {
    return covariant_hessian(f.grid(), f.values(), node);
}

}  // namespace wk
