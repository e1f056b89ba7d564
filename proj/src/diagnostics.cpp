#include "wk/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wk {

PinchingReport pinching_report(const GraphState& state) {
    PinchingReport rep;
    rep.kappa_min = std::numeric_limits<double>::infinity();
    rep.kappa_max = -std::numeric_limits<double>::infinity();
    for (const auto& d : state.geometry()) {
        const Eigen::Vector2d kappa = d.kappa();
        rep.kappa_min = std::min(rep.kappa_min, kappa(0));
        rep.kappa_max = std::max(rep.kappa_max, kappa(1));
    }
    rep.positive = rep.kappa_min > 0.0 && std::isfinite(rep.kappa_max);
    return rep;
}

double duality_identity_error(std::span<const double> kappa, int k) {
    std::vector<double> inv(kappa.size());
    for (std::size_t i = 0; i < kappa.size(); ++i) inv[i] = 1.0 / kappa[i];
    const int n = static_cast<int>(kappa.size());
    return std::abs(elem_sym_norm(kappa, k) * sym_quotient(inv, n - k) - 1.0);
}

DualityReport duality_check(const GraphState& state, const PsiExpr& psi, int k) {
    DualityReport rep;
    for (std::size_t i = 0; i < state.geometry().size(); ++i) {
        if (state.grid().is_boundary(i)) continue;
        const auto& d = state.at(i);
        const Eigen::Vector2d kappa = d.kappa();
        if (!in_positive_cone(std::span<const double>(kappa.data(), 2))) {
            rep.identity_max_error = rep.equation_max_error = std::numeric_limits<double>::max();
            continue;
        }
        const std::array<double, 2> inv{1.0 / kappa(0), 1.0 / kappa(1)};
        rep.identity_max_error =
            std::max(rep.identity_max_error, duality_identity_error(std::span<const double>(kappa.data(), 2), k));
        const double dual = dual_spectral(inv, k);
        const double big_psi = std::pow(psi.eval(d.eta), 1.0 / k);
        rep.equation_max_error = std::max(rep.equation_max_error, std::abs(dual * big_psi - 1.0));
    }
    return rep;
}

double nm_margin(std::span<const double> kappa, double psi, int k) {
    const int n = static_cast<int>(kappa.size());
    std::vector<double> inv(kappa.size());
    for (std::size_t i = 0; i < kappa.size(); ++i) inv[i] = 1.0 / kappa[i];
    const double sn = elem_sym_unchecked(inv, n);
    return sn - std::pow(sn, static_cast<double>(n - k) / n) / psi;
}

NmReport nm_lower_bound(const GraphState& state, const PsiExpr& psi, int k) {
    NmReport rep;
    rep.margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < state.geometry().size(); ++i) {
        if (state.grid().is_boundary(i)) continue;
        const auto& d = state.at(i);
        const Eigen::Vector2d kappa = d.kappa();
        const double m = nm_margin(std::span<const double>(kappa.data(), 2), psi.eval(d.eta), k);
        if (m < rep.margin) {
            rep.margin = m;
            rep.node = i;
        }
    }
    if (!std::isfinite(rep.margin)) rep.margin = 0.0;
    return rep;
}

GradientMaxReport gradient_max_locus(const GraphState& state) {
    GradientMaxReport rep;
    rep.w = -1.0;
    for (std::size_t i = 0; i < state.geometry().size(); ++i) {
        if (state.at(i).w > rep.w) {
            rep.w = state.at(i).w;
            rep.node = i;
        }
    }
    rep.on_boundary = state.grid().is_boundary(rep.node);
    rep.grad_norm = state.at(rep.node).grad_u.norm();
    return rep;
}

namespace {

std::vector<std::size_t> fit_neighbourhood(const CapGrid& grid, std::size_t node) {
    const GridNode& nd = grid.node(node);
    std::vector<std::size_t> out;
    if (nd.ring <= 2) {
        // full disk around the center
        out.push_back(0);
        for (int j = 1; j <= nd.ring + 2; ++j)
            for (int m = 0; m < grid.sectors(); ++m) out.push_back(grid.index(j, m));
    } else {
        for (int j = nd.ring - 2; j <= nd.ring + 2; ++j)
            for (int m = nd.sector - 2; m <= nd.sector + 2; ++m) out.push_back(grid.index(j, m));
    }
    out.erase(std::remove(out.begin(), out.end(), node), out.end());
    return out;
}

struct Fit {
    bool ok = false;
    Eigen::Vector2d kappa;
    Eigen::Vector3d normal;  // outward
};

Fit fit_quadratic(const std::vector<Eigen::Vector3d>& x, std::size_t node, const std::vector<std::size_t>& nbrs) {
    Fit fit;
    const Eigen::Vector3d& p0 = x[node];
    // initial normal: radial direction, then refined from the fit gradient
    Eigen::Vector3d n_in = -p0.normalized();
    Eigen::VectorXd coef(5);
    Eigen::Vector3d t1, t2;
    for (int pass = 0; pass < 3; ++pass) {
        t1 = (std::abs(n_in(0)) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY()).cross(n_in).normalized();
        t2 = n_in.cross(t1);
        Eigen::MatrixXd design(static_cast<Eigen::Index>(nbrs.size()), 5);
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(nbrs.size()));
        double spread = 0.0;
        for (std::size_t q = 0; q < nbrs.size(); ++q) {
            const Eigen::Vector3d d = x[nbrs[q]] - p0;
            const double a = d.dot(t1), b = d.dot(t2);
            spread = std::max(spread, std::hypot(a, b));
            design.row(static_cast<Eigen::Index>(q)) << a * a, a * b, b * b, a, b;
            rhs(static_cast<Eigen::Index>(q)) = d.dot(n_in);
        }
        if (nbrs.size() < 6 || !(spread > 0.0)) return fit;
        // column scaling keeps the normal equations well conditioned
        Eigen::VectorXd scale(5);
        scale << spread * spread, spread * spread, spread * spread, spread, spread;
        const Eigen::MatrixXd scaled = design * scale.cwiseInverse().asDiagonal();
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
        qr.setThreshold(1e-10);
        if (qr.rank() < 5) return fit;
        coef = qr.solve(rhs).cwiseQuotient(scale);
        n_in = (n_in - coef(3) * t1 - coef(4) * t2).normalized();
    }
    const double gx = coef(3), gy = coef(4);
    Eigen::Matrix2d first;
    first << 1.0 + gx * gx, gx * gy, gx * gy, 1.0 + gy * gy;
    Eigen::Matrix2d second;
    second << 2.0 * coef(0), coef(1), coef(1), 2.0 * coef(2);
    second /= std::sqrt(1.0 + gx * gx + gy * gy);
    Eigen::EigenSolver<Eigen::Matrix2d> es(first.inverse() * second);
    fit.kappa = es.eigenvalues().real();
    if (fit.kappa(0) > fit.kappa(1)) std::swap(fit.kappa(0), fit.kappa(1));
    fit.normal = -n_in;
    fit.ok = fit.kappa.allFinite();
    return fit;
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

MeshCurvatureReport mesh_curvature_check(const GraphState& state, const PsiExpr& psi, int k) {
    const CapGrid& grid = state.grid();
    const Mesh mesh = embed(state);
    MeshCurvatureReport rep;
    std::vector<double> errs;
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
        if (grid.node(i).ring > grid.rings() - 2) continue;
        const Fit fit = fit_quadratic(mesh.vertices, i, fit_neighbourhood(grid, i));
        if (!fit.ok || !in_positive_cone(std::span<const double>(fit.kappa.data(), 2))) {
            ++rep.skipped;
            continue;
        }
        const double wk = elem_sym_norm(std::span<const double>(fit.kappa.data(), 2), k);
        const double target = psi.eval(fit.normal);
        const double err = std::abs(wk - target) / std::abs(target);
        rep.errors.emplace_back(i, err);
        errs.push_back(err);
        if (err > rep.max) {
            rep.max = err;
            rep.max_node = i;
        }
    }
    rep.evaluated = errs.size();
    rep.median = quantile(errs, 0.5);
    rep.p95 = quantile(errs, 0.95);
    return rep;
}

bool DiagnosticsReport::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

DiagnosticsReport diagnose(const GraphState& state, std::span<const double> v_sub, const PsiExpr& psi, int k,
                           const DiagnosticsThresholds& th) {
    DiagnosticsReport rep;
    rep.pinching = pinching_report(state);
    rep.duality = duality_check(state, psi, k);
    rep.nm = nm_lower_bound(state, psi, k);
    rep.gradient_max = gradient_max_locus(state);
    rep.mesh = mesh_curvature_check(state, psi, k);
    rep.comparison_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v_sub.size(); ++i)
        rep.comparison_margin = std::min(rep.comparison_margin, state.v(i) - v_sub[i]);
    if (!std::isfinite(rep.comparison_margin)) rep.comparison_margin = 0.0;
    rep.trace_max = -std::numeric_limits<double>::infinity();
    for (const auto& d : state.geometry()) rep.trace_max = std::max(rep.trace_max, d.hess_u.trace() + 2.0 * d.u);

    rep.checks = {
        {"pinching_kappa_min_positive", rep.pinching.kappa_min, 0.0, rep.pinching.positive},
        {"duality_identity", rep.duality.identity_max_error, 1e-10, rep.duality.identity_max_error <= 1e-10},
        {"duality_equation", rep.duality.equation_max_error, th.duality, rep.duality.equation_max_error <= th.duality},
        {"newton_maclaurin_margin", rep.nm.margin, th.nm_margin, rep.nm.margin >= th.nm_margin},
        {"comparison_margin", rep.comparison_margin, th.comparison, rep.comparison_margin >= th.comparison},
        {"mesh_curvature_median", rep.mesh.median, th.mesh_median,
         rep.mesh.evaluated > 0 && rep.mesh.median <= th.mesh_median},
        {"mesh_curvature_p95", rep.mesh.p95, th.mesh_p95, rep.mesh.evaluated > 0 && rep.mesh.p95 <= th.mesh_p95},
    };
    return rep;
}

}  // namespace wk
