#include "wk/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace wk {

namespace {

// Accumulates weights per neighbour for the five polar derivative slots.
enum Polar : int { pr = 0, pt, prr, prt, ptt };

struct Accumulator {
    std::map<std::size_t, std::array<double, 5>> w;
    void add(std::size_t node, int slot, double weight) { w[node][static_cast<std::size_t>(slot)] += weight; }
};

Eigen::Matrix<double, 3, 2> frame_at(const Eigen::Vector2d& y) {
    const double s = 1.0 + y.squaredNorm();
    const double lam = 2.0 / s;
    Eigen::Matrix<double, 3, 2> d;
    // d x / d y_i for x = (2 y, 1 - |y|^2) / (1 + |y|^2)
    d(0, 0) = 2.0 * s - 4.0 * y(0) * y(0);
    d(1, 0) = -4.0 * y(0) * y(1);
    d(2, 0) = -4.0 * y(0);
    d(0, 1) = -4.0 * y(0) * y(1);
    d(1, 1) = 2.0 * s - 4.0 * y(1) * y(1);
    d(2, 1) = -4.0 * y(1);
    return d / (s * s * lam);
}

}  // namespace

Eigen::Vector3d sphere_point(const Eigen::Vector2d& y) {
    const double s = 1.0 + y.squaredNorm();
    Eigen::Vector3d x(2.0 * y(0) / s, 2.0 * y(1) / s, (1.0 - y.squaredNorm()) / s);
    return x / x.norm();
}

CapGrid::CapGrid(double cap_radius, int rings, int sectors)
    : cap_radius_(cap_radius), plane_radius_(std::tan(0.5 * cap_radius)), rings_(rings), sectors_(sectors) {
    if (!(cap_radius > 0.0 && cap_radius < 0.5 * std::numbers::pi))
        throw std::invalid_argument("cap radius must lie in (0, pi/2)");
    if (rings < 4) throw std::invalid_argument("grid needs at least 4 rings");
    if (sectors < 8) throw std::invalid_argument("grid needs at least 8 sectors");

    nodes_.reserve(1 + static_cast<std::size_t>(rings) * static_cast<std::size_t>(sectors));
    auto make = [](const Eigen::Vector2d& y, NodeClass cls, int ring, int sector) {
        GridNode n;
        n.y = y;
        n.x = sphere_point(y);
        n.conformal = 2.0 / (1.0 + y.squaredNorm());
        n.node_class = cls;
        n.ring = ring;
        n.sector = sector;
        n.frame = frame_at(y);
        return n;
    };
    nodes_.push_back(make(Eigen::Vector2d::Zero(), NodeClass::center, 0, 0));
    const double h = plane_radius_ / rings;
    for (int j = 1; j <= rings; ++j) {
        for (int m = 0; m < sectors; ++m) {
            const double th = 2.0 * std::numbers::pi * m / sectors;
            const double r = j == rings ? plane_radius_ : j * h;
            const NodeClass cls = j == rings ? NodeClass::boundary : NodeClass::interior;
            nodes_.push_back(make(Eigen::Vector2d(r * std::cos(th), r * std::sin(th)), cls, j, m));
            if (cls == NodeClass::boundary) boundary_.push_back(nodes_.size() - 1);
        }
    }
    build_stencils();
}

std::size_t CapGrid::index(int ring, int sector) const {
    if (ring == 0) return 0;
    const int m = ((sector % sectors_) + sectors_) % sectors_;
    return 1 + static_cast<std::size_t>(ring - 1) * static_cast<std::size_t>(sectors_) + static_cast<std::size_t>(m);
}

double CapGrid::max_spacing() const {
    double best = 0.0;
    for (int j = 1; j <= rings_; ++j) {
        for (int m = 0; m < sectors_; ++m) {
            const auto& a = nodes_[index(j, m)].x;
            best = std::max(best, (a - nodes_[index(j, m + 1)].x).norm());
            best = std::max(best, (a - nodes_[index(j - 1, m)].x).norm());
        }
    }
    return best;
}

void CapGrid::build_stencils() {
    stencils_.resize(nodes_.size());
    const double h = plane_radius_ / rings_;
    const double dth = 2.0 * std::numbers::pi / sectors_;
    // Angular weights fitted to cos/sin so plane-linear fields are differentiated exactly;
    // they differ from the plain central weights by O(dth^2).
    const double t1 = 0.5 / std::sin(dth);
    const double t2 = 0.25 / (std::sin(0.5 * dth) * std::sin(0.5 * dth));

    // Center: least-squares quadratic f0 + b.y + y^T C y / 2 through the first ring.
    {
        const int s = sectors_;
        Eigen::MatrixXd design(s, 5);
        for (int m = 0; m < s; ++m) {
            const Eigen::Vector2d& y = nodes_[index(1, m)].y;
            design.row(m) << y(0), y(1), 0.5 * y(0) * y(0), y(0) * y(1), 0.5 * y(1) * y(1);
        }
        const Eigen::MatrixXd pinv =
            design.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(s, s));  // 5 x s
        NodeStencil& st = stencils_[0];
        st.neighbors.push_back(0);
        for (int m = 0; m < s; ++m) st.neighbors.push_back(index(1, m));
        for (int d = 0; d < 5; ++d) {
            auto& w = st.plane[static_cast<std::size_t>(d)];
            w.assign(st.neighbors.size(), 0.0);
            for (int m = 0; m < s; ++m) {
                w[static_cast<std::size_t>(m) + 1] = pinv(d, m);
                w[0] -= pinv(d, m);
            }
        }
    }

    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        const GridNode& nd = nodes_[i];
        const int j = nd.ring;
        const int m = nd.sector;
        Accumulator acc;

        // Radial rule as (ring offset, d/dr weight, d2/dr2 weight).
        struct Tap {
            int ring;
            double first;
            double second;
        };
        std::vector<Tap> radial;
        if (j < rings_) {
            radial = {{j + 1, 0.5 / h, 1.0 / (h * h)}, {j, 0.0, -2.0 / (h * h)}, {j - 1, -0.5 / h, 1.0 / (h * h)}};
        } else {
            radial = {{j, 1.5 / h, 2.0 / (h * h)},
                      {j - 1, -2.0 / h, -5.0 / (h * h)},
                      {j - 2, 0.5 / h, 4.0 / (h * h)},
                      {j - 3, 0.0, -1.0 / (h * h)}};
        }
        for (const Tap& t : radial) {
            acc.add(index(t.ring, m), pr, t.first);
            acc.add(index(t.ring, m), prr, t.second);
            // d/dtheta vanishes on the center node
            if (t.ring > 0 && t.first != 0.0) {
                acc.add(index(t.ring, m + 1), prt, t.first * t1);
                acc.add(index(t.ring, m - 1), prt, -t.first * t1);
            }
        }
        acc.add(index(j, m + 1), pt, t1);
        acc.add(index(j, m - 1), pt, -t1);
        acc.add(index(j, m + 1), ptt, t2);
        acc.add(index(j, m), ptt, -2.0 * t2);
        acc.add(index(j, m - 1), ptt, t2);

        const double r = nd.y.norm();
        const double c = nd.y(0) / r;
        const double s = nd.y(1) / r;
        NodeStencil& st = stencils_[i];
        for (auto& w : st.plane) w.reserve(acc.w.size());
        for (const auto& [node, p] : acc.w) {
            st.neighbors.push_back(node);
            const double fr = p[pr], ft = p[pt], frr = p[prr], frt = p[prt], ftt = p[ptt];
            st.plane[d1].push_back(c * fr - s / r * ft);
            st.plane[d2].push_back(s * fr + c / r * ft);
            st.plane[d11].push_back(c * c * frr - 2 * s * c / r * frt + s * s / (r * r) * ftt + s * s / r * fr +
                                    2 * s * c / (r * r) * ft);
            st.plane[d22].push_back(s * s * frr + 2 * s * c / r * frt + c * c / (r * r) * ftt + c * c / r * fr -
                                    2 * s * c / (r * r) * ft);
            st.plane[d12].push_back(s * c * frr + (c * c - s * s) / r * frt - s * c / (r * r) * ftt - s * c / r * fr -
                                    (c * c - s * s) / (r * r) * ft);
        }
    }

    // Self weight closes each row so constants are annihilated.
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        NodeStencil& st = stencils_[i];
        const auto self = std::find(st.neighbors.begin(), st.neighbors.end(), i) - st.neighbors.begin();
        for (auto& w : st.plane) {
            double rest = 0.0;
            for (std::size_t q = 0; q < w.size(); ++q)
                if (static_cast<std::ptrdiff_t>(q) != self) rest += w[q];
            w[static_cast<std::size_t>(self)] = -rest;
        }
    }

    // Frame components: grad_a = d_a / lam,
    // hess_ab = (d_ab - L_b d_a - L_a d_b + delta_ab L.d) / lam^2 with L = grad ln lam = -lam y.
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        NodeStencil& st = stencils_[i];
        const double lam = nodes_[i].conformal;
        const Eigen::Vector2d L = -lam * nodes_[i].y;
        const std::size_t n = st.neighbors.size();
        for (auto& w : st.gradient) w.assign(n, 0.0);
        for (auto& w : st.hessian) w.assign(n, 0.0);
        for (std::size_t q = 0; q < n; ++q) {
            const double a1 = st.plane[d1][q], a2 = st.plane[d2][q];
            const double ld = L(0) * a1 + L(1) * a2;
            st.gradient[0][q] = a1 / lam;
            st.gradient[1][q] = a2 / lam;
            st.hessian[0][q] = (st.plane[d11][q] - 2.0 * L(0) * a1 + ld) / (lam * lam);
            st.hessian[1][q] = (st.plane[d12][q] - L(1) * a1 - L(0) * a2) / (lam * lam);
            st.hessian[2][q] = (st.plane[d22][q] - 2.0 * L(1) * a2 + ld) / (lam * lam);
        }
    }
}

std::shared_ptr<const CapGrid> build_grid(double cap_radius, int rings, int sectors) {
    return std::make_shared<const CapGrid>(cap_radius, rings, sectors);
}

ScalarField::ScalarField(std::shared_ptr<const CapGrid> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw std::invalid_argument("scalar field needs a grid");
    if (values_.size() != grid_->node_count()) throw std::invalid_argument("field length does not match grid");
    for (double v : values_)
        if (std::isnan(v)) throw std::invalid_argument("field contains NaN");
}

void ScalarField::set_interior(std::size_t i, double value) {
    if (grid_->is_boundary(i)) throw std::logic_error("boundary values are fixed");
    if (std::isnan(value)) throw std::invalid_argument("field value is NaN");
    values_[i] = value;
}

namespace {
// Differences against the node value: weights sum to zero, and this keeps
// derivatives of constant fields exactly zero.
double apply(const NodeStencil& st, const std::vector<double>& w, std::span<const double> f, std::size_t node) {
    const double f0 = f[node];
    double acc = 0.0;
    for (std::size_t q = 0; q < st.neighbors.size(); ++q) acc += w[q] * (f[st.neighbors[q]] - f0);
    return acc;
}
}  // namespace

double plane_derivative(const CapGrid& grid, std::span<const double> field, std::size_t node, PlaneDerivative d) {
    const NodeStencil& st = grid.stencil(node);
    return apply(st, st.plane[static_cast<std::size_t>(d)], field, node);
}

Eigen::Vector2d covariant_gradient(const CapGrid& grid, std::span<const double> field, std::size_t node) {
    const NodeStencil& st = grid.stencil(node);
    return {apply(st, st.gradient[0], field, node), apply(st, st.gradient[1], field, node)};
}

Eigen::Matrix2d covariant_hessian(const CapGrid& grid, std::span<const double> field, std::size_t node) {
    const NodeStencil& st = grid.stencil(node);
    Eigen::Matrix2d hess;
    hess(0, 0) = apply(st, st.hessian[0], field, node);
    hess(0, 1) = hess(1, 0) = apply(st, st.hessian[1], field, node);
    hess(1, 1) = apply(st, st.hessian[2], field, node);
    return hess;
}

}  // namespace wk
