#include "wk/subsolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace wk {

void EnclosingSphere::validate() const {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("sphere radius must be positive");
    if (!center.allFinite()) throw std::invalid_argument("sphere center must be finite");
    if (!(center.norm() < radius)) throw std::invalid_argument("origin must lie strictly inside the enclosing sphere");
}

double k_zero(const EnclosingSphere& sphere, int k) {
    sphere.validate();
    if (k < 1) throw std::invalid_argument("k must be positive");
    return std::pow(sphere.radius, -k);
}

SerrinReport serrin_check(const PsiExpr& psi, const EnclosingSphere& sphere, int k, std::size_t samples) {
    SerrinReport rep;
    rep.k0 = k_zero(sphere, k);
    rep.samples = samples + 6;
    rep.psi_min = std::numeric_limits<double>::infinity();
    rep.psi_max = -std::numeric_limits<double>::infinity();
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    bool finite = true;
    auto visit = [&](const Eigen::Vector3d& n) {
        const double value = psi.eval(n);
        if (!std::isfinite(value)) finite = false;
        rep.psi_min = std::min(rep.psi_min, value);
        rep.psi_max = std::max(rep.psi_max, value);
    };
    for (std::size_t i = 0; i < samples; ++i) {
        const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(samples);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * static_cast<double>(i);
        visit(Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), z));
    }
    // the six axis points, where simple expressions in n tend to peak
    for (int a = 0; a < 3; ++a)
        for (double sgn : {1.0, -1.0}) visit(sgn * Eigen::Vector3d::Unit(a));
    // K_0 itself is admissible; allow rounding in a literal that spells it out.
    const double slack = 1e-12 * rep.k0;
    std::ostringstream msg;
    if (!finite) {
        msg << "psi is not finite everywhere on the sphere";
    } else if (!(rep.psi_min > 0.0)) {
        msg << "psi is not positive: min psi = " << rep.psi_min;
    } else if (rep.psi_max > rep.k0 + slack) {
        msg << "Serrin condition violated: sup psi = " << rep.psi_max << " > K0 = " << rep.k0;
    } else {
        rep.pass = true;
        msg << "0 < psi in [" << rep.psi_min << ", " << rep.psi_max << "] <= K0 = " << rep.k0;
    }
    rep.message = msg.str();
    return rep;
}

double far_radius(const EnclosingSphere& sphere, const Eigen::Vector3d& x) {
    const double xc = x.dot(sphere.center);
    const double disc = sphere.radius * sphere.radius - sphere.center.squaredNorm() + xc * xc;
    if (!(disc > 0.0)) throw std::logic_error("ray misses the enclosing sphere");
    return xc + std::sqrt(disc);
}

Subsolution build_subsolution(const EnclosingSphere& sphere, std::shared_ptr<const CapGrid> grid) {
    sphere.validate();
    std::vector<double> u(grid->node_count());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = 1.0 / far_radius(sphere, grid->node(i).x);
    std::vector<double> phi;
    for (std::size_t b : grid->boundary_nodes()) phi.push_back(u[b]);
    return Subsolution{sphere, GraphState(std::move(grid), std::move(u), Representation::u_form), std::move(phi)};
}

std::vector<double> underbar_psi(const GraphState& ub, int k) {
    const auto adm = admissible(ub);
    if (!adm.admissible) throw NotAdmissible("subsolution is not admissible", adm.worst_node);
    std::vector<double> out(ub.geometry().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = weingarten_eval<2>(ub.at(i).a, k).value;
    return out;
}

}  // namespace wk
