#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "wk/cli_io.hpp"

namespace wk {

namespace {

struct Suite {
    std::ostream& os;
    int failures = 0;

    void report(const char* name, bool ok, const std::string& detail) {
        fmt::print(os, "{} {}: {}\n", ok ? "[ok]  " : "[FAIL]", name, detail);
        if (!ok) ++failures;
    }
};

Eigen::Matrix2d random_spd(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::Matrix2d m;
    m << unif(rng), unif(rng), unif(rng), unif(rng);
    return m * m.transpose() + 0.1 * Eigen::Matrix2d::Identity();
}

}  // namespace

int selftest(std::ostream& os) {
    Suite s{os};
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> pos(0.05, 5.0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    {
        double worst = 0.0;
        for (int n = 1; n <= 6; ++n) {
            const std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
            for (int k = 1; k <= n; ++k) worst = std::max(worst, std::abs(elem_sym_norm(ones, k) - 1.0));
        }
        s.report("symfunc normalization", worst == 0.0, fmt::format("max |S_k(1..1) - 1| = {:.3g}", worst));
    }
    {
        double worst = 0.0;
        for (int trial = 0; trial < 300; ++trial) {
            const int n = 2 + trial % 4;
            std::vector<double> kappa(static_cast<std::size_t>(n));
            for (auto& x : kappa) x = pos(rng);
            for (int k = 1; k <= n; ++k) worst = std::max(worst, duality_identity_error(kappa, k));
        }
        s.report("symfunc duality", worst <= 1e-10, fmt::format("max error {:.3g}", worst));
    }
    {
        double worst_concavity = 0.0, worst_grad = 0.0;
        for (int trial = 0; trial < 300; ++trial) {
            const int k = 1 + trial % 2;
            const Eigen::Matrix2d a = random_spd(rng), b = random_spd(rng);
            const double mid = weingarten_eval<2>(Eigen::Matrix2d(0.5 * (a + b)), k).value;
            const double avg = 0.5 * (weingarten_eval<2>(a, k).value + weingarten_eval<2>(b, k).value);
            worst_concavity = std::max(worst_concavity, avg - mid);
            const auto ev = weingarten_eval<2>(a, k);
            Eigen::Matrix2d d = random_spd(rng) - random_spd(rng);
            d = 0.5 * (d + d.transpose());
            const double eps = 1e-6;
            const double fd = (weingarten_eval<2>(Eigen::Matrix2d(a + eps * d), k).value -
                               weingarten_eval<2>(Eigen::Matrix2d(a - eps * d), k).value) /
                              (2 * eps);
            const double an = (ev.gradient.array() * d.array()).sum();
            worst_grad = std::max(worst_grad, std::abs(fd - an) / (1.0 + std::abs(an)));
        }
        s.report("symfunc concavity", worst_concavity <= 1e-12,
                 fmt::format("max avg - mid = {:.3g}", worst_concavity));
        s.report("symfunc gradient", worst_grad <= 1e-6, fmt::format("max relative FD gap {:.3g}", worst_grad));
    }
    {
        double worst_gamma = 0.0, worst_forms = 0.0;
        const auto grid = build_grid(std::numbers::pi / 3, 8, 16);
        for (int trial = 0; trial < 300; ++trial) {
            const SpherePoint<2> at = grid->node(static_cast<std::size_t>(trial) % grid->node_count()).point();
            const double v = 0.5 * unif(rng);
            const Eigen::Vector2d p(unif(rng), unif(rng));
            const Eigen::Matrix2d hv = random_spd(rng);
            const auto dv = point_geometry_v<2>(v, p, hv, at);
            const auto du = point_geometry_u<2>(dv.u, dv.grad_u, dv.hess_u, at);
            worst_gamma = std::max(worst_gamma,
                                   (du.gamma_upper * du.gamma_lower - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff());
            worst_forms = std::max(worst_forms, (du.a - dv.a).cwiseAbs().maxCoeff() / (1.0 + du.a.norm()));
        }
        s.report("geometry gamma inverse", worst_gamma <= 1e-10, fmt::format("max error {:.3g}", worst_gamma));
        s.report("geometry u/v forms", worst_forms <= 1e-10, fmt::format("max error {:.3g}", worst_forms));
    }
    {
        const EnclosingSphere sphere{Eigen::Vector3d(0.0, 0.0, 0.3), 1.0};
        const auto grid = build_grid(std::numbers::pi / 3, 8, 16);
        const Subsolution sub = build_subsolution(sphere, grid);
        const HomotopyProblem problem(PsiExpr::parse("0.7 - 0.2*nz"), 2, sub);
        std::vector<double> v(problem.v_sub().begin(), problem.v_sub().end());
        for (std::size_t i = 0; i < v.size(); ++i)
            if (!grid->is_boundary(i)) v[i] += 0.02 * grid->node(i).x(2);
        const auto r1 = residual_theta(problem, v, 1.0);
        const auto r0 = residual_xi(problem, v, 0.0);
        const double gap = (r1 && r0) ? (*r1 - *r0).cwiseAbs().maxCoeff() : 1.0;
        s.report("homotopy bridge", gap <= 1e-15, fmt::format("max |theta(1) - xi(0)| = {:.3g}", gap));

        const auto sys = assemble_jacobian(problem, v, Family::xi, 0.7);
        const auto fd = fd_jacobian(problem, v, Family::xi, 0.7);
        double worst = 1.0;
        if (sys && fd) {
            worst = 0.0;
            for (int trial = 0; trial < 5; ++trial) {
                Eigen::VectorXd d(static_cast<Eigen::Index>(v.size()));
                for (auto& x : d) x = unif(rng);
                const Eigen::VectorXd jd = sys->jacobian * d;
                const Eigen::VectorXd fdd = *fd * d;
                for (Eigen::Index i = 0; i < jd.size(); ++i)
                    worst = std::max(worst, std::abs(jd(i) - fdd(i)) / (1.0 + std::abs(jd(i))));
            }
        }
        s.report("jacobian vs finite differences", worst <= 1e-6, fmt::format("max relative gap {:.3g}", worst));
    }
    fmt::print(os, "{} failure(s)\n", s.failures);
    return s.failures;
}

}  // namespace wk
