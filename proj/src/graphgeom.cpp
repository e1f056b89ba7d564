#include "wk/graphgeom.hpp"

#include <limits>
#include <sstream>
#include <stdexcept>

namespace wk {

GraphState::GraphState(std::shared_ptr<const CapGrid> grid, std::vector<double> values, Representation rep)
    : grid_(std::move(grid)), values_(std::move(values)), rep_(rep) {
    if (!grid_) throw std::invalid_argument("graph state needs a grid");
    refresh();
}

void GraphState::set_values(std::vector<double> values) {
    values_ = std::move(values);
    refresh();
}

void GraphState::refresh() {
    if (values_.size() != grid_->node_count()) throw std::invalid_argument("field length does not match grid");
    geometry_.resize(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const auto at = grid_->node(i).point();
        const Eigen::Vector2d grad = covariant_gradient(*grid_, values_, i);
        const Eigen::Matrix2d hess = covariant_hessian(*grid_, values_, i);
        geometry_[i] = rep_ == Representation::u_form ? point_geometry_u<2>(values_[i], grad, hess, at)
                                                      : point_geometry_v<2>(values_[i], grad, hess, at);
    }
}

GraphState GraphState::to_representation(Representation rep) const {
    if (rep == rep_) return *this;
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i)
        out[i] = rep == Representation::v_form ? std::log(values_[i]) : std::exp(values_[i]);
    return GraphState(grid_, std::move(out), rep);
}

AdmissibilityReport admissible(std::span<const GraphPointData<2>> data) {
    AdmissibilityReport rep;
    rep.min_eigenvalue = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double m = admissibility_margin(data[i]);
        const Eigen::Matrix2d full = data[i].u * Eigen::Matrix2d::Identity() + data[i].hess_u;
        const double scale = std::max(1.0, full.cwiseAbs().maxCoeff());
        if (!(m > kConeRelTol * scale)) ok = false;
        if (m < rep.min_eigenvalue || std::isnan(m)) {
            rep.min_eigenvalue = m;
            rep.worst_node = i;
        }
    }
    rep.admissible = ok && !data.empty();
    return rep;
}

AdmissibilityReport admissible(const GraphState& state) { return admissible(state.geometry()); }

Mesh embed(const GraphState& state) {
    const CapGrid& grid = state.grid();
    Mesh mesh;
    mesh.vertices.reserve(grid.node_count());
    for (const auto& d : state.geometry()) mesh.vertices.push_back(d.position);

    const int s = grid.sectors();
    for (int m = 0; m < s; ++m) mesh.faces.push_back({0, grid.index(1, m), grid.index(1, m + 1)});
    for (int j = 1; j < grid.rings(); ++j) {
        for (int m = 0; m < s; ++m) {
            const std::size_t a = grid.index(j, m), b = grid.index(j + 1, m), c = grid.index(j + 1, m + 1),
                              d = grid.index(j, m + 1);
            const double ac = (mesh.vertices[a] - mesh.vertices[c]).squaredNorm();
            const double bd = (mesh.vertices[b] - mesh.vertices[d]).squaredNorm();
            if (ac <= bd) {
                mesh.faces.push_back({a, b, c});
                mesh.faces.push_back({a, c, d});
            } else {
                mesh.faces.push_back({a, b, d});
                mesh.faces.push_back({b, c, d});
            }
        }
    }
    return mesh;
}

std::vector<SupportSample> support_samples(const GraphState& state) {
    const auto adm = admissible(state);
    if (!adm.admissible) {
        std::ostringstream msg;
        msg << "support function needs an admissible state (node " << adm.worst_node << ", margin "
            << adm.min_eigenvalue << ")";
        throw NotAdmissible(msg.str(), adm.worst_node);
    }
    std::vector<SupportSample> out;
    out.reserve(state.geometry().size());
    for (const auto& d : state.geometry()) out.push_back({d.eta, d.position.dot(d.eta)});
    return out;
}

}  // namespace wk
