#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "wk/sphere.hpp"

using namespace wk;

namespace {

constexpr double kCap = std::numbers::pi / 3;

std::vector<double> sample(const CapGrid& g, const std::function<double(const GridNode&)>& f) {
    std::vector<double> out(g.node_count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(g.node(i));
    return out;
}

}  // namespace

TEST_CASE("grid layout") {
    const auto g = build_grid(kCap, 16, 32);
    CHECK(g->node_count() == 1 + 16 * 32);
    CHECK(g->plane_radius() == doctest::Approx(std::tan(kCap / 2)).epsilon(1e-15));
    CHECK(g->boundary_nodes().size() == 32);
    for (std::size_t b : g->boundary_nodes()) {
        CHECK(g->node(b).y.norm() == doctest::Approx(std::tan(kCap / 2)).epsilon(1e-14));
        CHECK(std::acos(g->node(b).x(2)) == doctest::Approx(kCap).epsilon(1e-12));
    }
    CHECK(g->node(0).node_class == NodeClass::center);
    CHECK(g->index(3, -1) == g->index(3, 31));
    CHECK(g->index(3, 32) == g->index(3, 0));
}

TEST_CASE("grid arguments are validated") {
    CHECK_THROWS_AS(build_grid(0.0, 16, 32), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(std::numbers::pi / 2, 16, 32), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(kCap, 3, 32), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(kCap, 16, 7), std::invalid_argument);
}

TEST_CASE("nodes lie on the sphere with orthonormal tangent frames") {
    const auto g = build_grid(kCap, 24, 48);
    for (const auto& nd : g->nodes()) {
        CHECK(std::abs(nd.x.norm() - 1.0) <= 1e-14);
        CHECK(nd.conformal == doctest::Approx(2.0 / (1.0 + nd.y.squaredNorm())).epsilon(1e-15));
        const Eigen::Matrix2d gram = nd.frame.transpose() * nd.frame;
        CHECK((gram - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= 1e-14);
        CHECK((nd.frame.transpose() * nd.x).cwiseAbs().maxCoeff() <= 1e-14);
        CHECK((sphere_point(nd.y) - nd.x).norm() <= 1e-15);
    }
}

TEST_CASE("refinement halves the spacing") {
    const double h1 = build_grid(kCap, 16, 32)->max_spacing();
    const double h2 = build_grid(kCap, 32, 64)->max_spacing();
    CHECK(h1 / h2 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("stencils reproduce constants and plane-linear functions") {
    const auto g = build_grid(kCap, 12, 24);
    const auto one = sample(*g, [](const GridNode&) { return 1.0; });
    const auto lin = sample(*g, [](const GridNode& n) { return 0.3 + 2.0 * n.y(0) - 1.5 * n.y(1); });
    for (std::size_t i = 0; i < g->node_count(); ++i) {
        for (int d = 0; d < 5; ++d) CHECK(std::abs(plane_derivative(*g, one, i, PlaneDerivative(d))) <= 1e-11);
        CHECK(std::abs(plane_derivative(*g, lin, i, d1) - 2.0) <= 1e-12);
        CHECK(std::abs(plane_derivative(*g, lin, i, d2) + 1.5) <= 1e-12);
        CHECK(covariant_gradient(*g, one, i).norm() <= 1e-12);
        CHECK(covariant_hessian(*g, one, i).norm() <= 1e-11);
    }
}

TEST_CASE("center stencil is exact on plane quadratics") {
    const auto g = build_grid(kCap, 10, 16);
    const auto q = sample(*g, [](const GridNode& n) {
        const double a = n.y(0), b = n.y(1);
        return 1.0 + 0.5 * a - 0.25 * b + 3.0 * a * a - 2.0 * a * b + 0.7 * b * b;
    });
    CHECK(plane_derivative(*g, q, 0, d1) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(plane_derivative(*g, q, 0, d2) == doctest::Approx(-0.25).epsilon(1e-10));
    CHECK(plane_derivative(*g, q, 0, d11) == doctest::Approx(6.0).epsilon(1e-10));
    CHECK(plane_derivative(*g, q, 0, d12) == doctest::Approx(-2.0).epsilon(1e-10));
    CHECK(plane_derivative(*g, q, 0, d22) == doctest::Approx(1.4).epsilon(1e-10));
}

TEST_CASE("height function: gradient and Hessian converge at second order") {
    std::vector<double> hs, eg, eh;
    for (int rings : {16, 32, 64}) {
        const auto g = build_grid(kCap, rings, 2 * rings);
        const auto f = sample(*g, [](const GridNode& n) { return n.x(2); });
        double worst_g = 0.0, worst_h = 0.0;
        for (std::size_t i = 0; i < g->node_count(); ++i) {
            const GridNode& nd = g->node(i);
            const Eigen::Vector2d exact_g = nd.frame.transpose() * Eigen::Vector3d::UnitZ();
            const Eigen::Matrix2d exact_h = -nd.x(2) * Eigen::Matrix2d::Identity();
            worst_g = std::max(worst_g, (covariant_gradient(*g, f, i) - exact_g).cwiseAbs().maxCoeff());
            worst_h = std::max(worst_h, (covariant_hessian(*g, f, i) - exact_h).cwiseAbs().maxCoeff());
        }
        hs.push_back(g->max_spacing());
        eg.push_back(worst_g);
        eh.push_back(worst_h);
    }
    MESSAGE("gradient errors " << eg[0] << " " << eg[1] << " " << eg[2]);
    MESSAGE("hessian errors " << eh[0] << " " << eh[1] << " " << eh[2]);
    CHECK(oracle::convergence_order(hs, eg) >= 1.8);
    CHECK(oracle::convergence_order(hs, eh) >= 1.8);
    const auto g = build_grid(kCap, 16, 32);
    const auto f = sample(*g, [](const GridNode& n) { return n.x(2); });
    CHECK(covariant_hessian(*g, f, 7).trace() == doctest::Approx(-2.0 * g->node(7).x(2)).epsilon(1e-2));
}

TEST_CASE("ScalarField guards") {
    const auto g = build_grid(kCap, 8, 16);
    std::vector<double> vals(g->node_count(), 1.0);
    ScalarField f(g, vals);
    f.set_interior(3, 2.0);
    CHECK(f[3] == 2.0);
    CHECK_THROWS(f.set_interior(g->boundary_nodes()[0], 2.0));
    CHECK_THROWS(f.set_interior(3, std::nan("")));
    vals[5] = std::nan("");
    CHECK_THROWS(ScalarField(g, vals));
    CHECK_THROWS(ScalarField(g, std::vector<double>(3, 1.0)));
}
