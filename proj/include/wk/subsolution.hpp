#pragma once

// Enclosing sphere, the Serrin bound K_0 and the subsolution u = 1 / rho_bar
// given by the far cap of the sphere over the grid domain.

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

#include "wk/graphgeom.hpp"
#include "wk/psidsl.hpp"
#include "wk/sphere.hpp"

namespace wk {

struct EnclosingSphere {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double radius = 1.0;

    /// Throws std::invalid_argument unless radius > 0 and |center| < radius.
    void validate() const;
};

/// Weingarten curvature of the sphere, R^{-k}.
double k_zero(const EnclosingSphere& sphere, int k);

struct SerrinReport {
    bool pass = false;
    double k0 = 0.0;
    double psi_min = 0.0;
    double psi_max = 0.0;
    std::size_t samples = 0;
    std::string message;
};

/// Checks 0 < psi <= K_0 on a Fibonacci sample of the whole sphere.
SerrinReport serrin_check(const PsiExpr& psi, const EnclosingSphere& sphere, int k, std::size_t samples = 20000);

/// Far intersection of the ray t x (t > 0) with the sphere.
double far_radius(const EnclosingSphere& sphere, const Eigen::Vector3d& x);

struct Subsolution {
    EnclosingSphere sphere;
    GraphState state;                  // u-form, u = 1 / rho_bar
    std::vector<double> boundary_values;  // phi on grid.boundary_nodes(), same order
};

Subsolution build_subsolution(const EnclosingSphere& sphere, std::shared_ptr<const CapGrid> grid);

/// F(A) of the discrete subsolution at every node, in the state's representation.
std::vector<double> underbar_psi(const GraphState& ub, int k);

}  // namespace wk
