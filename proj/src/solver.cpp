#include "wk/solver.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace wk {

const char* family_name(Family f) { return f == Family::theta ? "theta" : "xi"; }

HomotopyProblem::HomotopyProblem(PsiExpr psi, int k, const Subsolution& sub, bool allow_nonsmooth)
    : grid_(sub.state.grid_ptr()), psi_(std::move(psi)), k_(k), sphere_(sub.sphere) {
    if (k < 1 || k > 2) throw std::invalid_argument("k must satisfy 1 <= k <= n = 2");
    if (!allow_nonsmooth && !psi_.is_smooth())
        throw std::invalid_argument("psi uses abs/min/max; the linearization needs a C^{1,1} psi");
    const GraphState vs = sub.state.to_representation(Representation::v_form);
    v_sub_.assign(vs.values().begin(), vs.values().end());
    psi_sub_ = underbar_psi(vs, k_);
    scale_ = 0.0;
    for (std::size_t i = 0; i < psi_sub_.size(); ++i)
        if (!grid_->is_boundary(i)) scale_ = std::max(scale_, std::abs(psi_sub_[i]));
    if (!(scale_ > 0.0)) scale_ = 1.0;
}

std::optional<LocalTerms> local_terms(const HomotopyProblem& problem, std::size_t node, double v,
                                      const Eigen::Vector2d& p, const Eigen::Matrix2d& hess, Family family,
                                      double parameter, bool with_derivatives) {
    const GridNode& nd = problem.grid().node(node);
    const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
    const double w2 = 1.0 + p.squaredNorm();
    const double w = std::sqrt(w2);
    const double c = std::exp(v) / w;
    const double dd = w * (1.0 + w);
    const Eigen::Matrix2d gamma = id - p * p.transpose() / dd;
    Eigen::Matrix2d a = c * (id + gamma * hess * gamma);
    a = 0.5 * (a + a.transpose());

    SpectralEval<2> f;
    try {
        f = weingarten_eval<2>(a, problem.k());
    } catch (const ConeViolation&) {
        return std::nullopt;
    }

    const Eigen::Vector3d eta = (nd.x + nd.frame * p) / w;
    const PsiEval pe = problem.psi().eval_with_gradient(eta / eta.norm());
    const double inv_k = 1.0 / problem.k();
    const double big_psi = std::pow(pe.value, inv_k);

    const double z = 2.0 * (v - problem.v_sub()[node]);
    const double e2 = std::exp(z);
    double rhs = 0.0, rhs_v = 0.0, rhs_psi = 0.0;  // rhs_psi = d rhs / d Psi
    if (family == Family::theta) {
        const double t = parameter;
        rhs = e2 * (t * big_psi + (1.0 - t) * problem.psi_sub()[node]);
        rhs_v = 2.0 * rhs;
        rhs_psi = e2 * t;
    } else {
        const double s = parameter;
        rhs_psi = s + (1.0 - s) * e2;
        rhs = rhs_psi * big_psi;
        rhs_v = 2.0 * (1.0 - s) * e2 * big_psi;
    }

    LocalTerms out;
    out.residual = f.value - rhs;
    if (!with_derivatives) return out;

    out.d_value = f.value - rhs_v;
    out.d_hessian = c * gamma * f.gradient * gamma;

    const Eigen::Matrix2d fhg = hess * gamma;
    const double dpsi_scale = inv_k * big_psi / pe.value;  // d Psi / d psi
    for (int m = 0; m < 2; ++m) {
        const Eigen::Vector2d em = Eigen::Vector2d::Unit(m);
        const Eigen::Matrix2d dgamma = -(em * p.transpose() + p * em.transpose()) / dd +
                                       p * p.transpose() * ((1.0 + 2.0 * w) * p(m) / (w * dd * dd));
        const double dF = -p(m) / w2 * f.value + 2.0 * c * (f.gradient * dgamma * fhg).trace();
        const Eigen::Vector3d deta = nd.frame.col(m) / w - eta * (p(m) / w2);
        const double dPsi = dpsi_scale * pe.gradient.dot(deta);
        out.d_gradient(m) = dF - rhs_psi * dPsi;
    }
    return out;
}

std::optional<Eigen::VectorXd> residual(const HomotopyProblem& problem, std::span<const double> v, Family family,
                                        double parameter) {
    const CapGrid& grid = problem.grid();
    if (v.size() != grid.node_count()) throw std::invalid_argument("field length does not match grid");
    Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (grid.is_boundary(i)) {
            r(static_cast<Eigen::Index>(i)) = v[i] - problem.v_sub()[i];
            continue;
        }
        const auto lt = local_terms(problem, i, v[i], covariant_gradient(grid, v, i), covariant_hessian(grid, v, i),
                                    family, parameter, false);
        if (!lt) return std::nullopt;
        r(static_cast<Eigen::Index>(i)) = lt->residual;
    }
    return r;
}

std::optional<Eigen::VectorXd> residual_theta(const HomotopyProblem& problem, std::span<const double> v, double t) {
    return residual(problem, v, Family::theta, t);
}

std::optional<Eigen::VectorXd> residual_xi(const HomotopyProblem& problem, std::span<const double> v, double s) {
    return residual(problem, v, Family::xi, s);
}

double interior_norm(const CapGrid& grid, const Eigen::VectorXd& r) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i)
        if (!grid.is_boundary(static_cast<std::size_t>(i))) m = std::max(m, std::abs(r(i)));
    return m;
}

std::optional<LinearizedSystem> assemble_jacobian(const HomotopyProblem& problem, std::span<const double> v,
                                                  Family family, double parameter) {
    const CapGrid& grid = problem.grid();
    const std::size_t n = grid.node_count();
    if (v.size() != n) throw std::invalid_argument("field length does not match grid");

    LinearizedSystem sys;
    sys.residual.resize(static_cast<Eigen::Index>(n));
    sys.zero_order.assign(n, 0.0);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(n * 12);

    for (std::size_t i = 0; i < n; ++i) {
        const auto row = static_cast<int>(i);
        if (grid.is_boundary(i)) {
            sys.residual(row) = v[i] - problem.v_sub()[i];
            sys.zero_order[i] = 1.0;
            trips.emplace_back(row, row, 1.0);
            continue;
        }
        const auto lt = local_terms(problem, i, v[i], covariant_gradient(grid, v, i), covariant_hessian(grid, v, i),
                                    family, parameter, true);
        if (!lt) return std::nullopt;
        sys.residual(row) = lt->residual;
        sys.zero_order[i] = lt->d_value;

        const NodeStencil& st = grid.stencil(i);
        const double h11 = lt->d_hessian(0, 0);
        const double h12 = lt->d_hessian(0, 1) + lt->d_hessian(1, 0);
        const double h22 = lt->d_hessian(1, 1);
        for (std::size_t q = 0; q < st.neighbors.size(); ++q) {
            double val = lt->d_gradient(0) * st.gradient[0][q] + lt->d_gradient(1) * st.gradient[1][q] +
                         h11 * st.hessian[0][q] + h12 * st.hessian[1][q] + h22 * st.hessian[2][q];
            if (st.neighbors[q] == i) val += lt->d_value;
            trips.emplace_back(row, static_cast<int>(st.neighbors[q]), val);
        }
        // the node itself is always in its own stencil, except through rounding of weights
        if (std::find(st.neighbors.begin(), st.neighbors.end(), i) == st.neighbors.end())
            trips.emplace_back(row, row, lt->d_value);
    }
    sys.jacobian.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    sys.jacobian.setFromTriplets(trips.begin(), trips.end());
    return sys;
}

std::optional<Eigen::SparseMatrix<double>> fd_jacobian(const HomotopyProblem& problem, std::span<const double> v,
                                                       Family family, double parameter, double eps) {
    const std::size_t n = v.size();
    std::vector<double> work(v.begin(), v.end());
    std::vector<Eigen::Triplet<double>> trips;
    for (std::size_t j = 0; j < n; ++j) {
        work[j] = v[j] + eps;
        const auto rp = residual(problem, work, family, parameter);
        work[j] = v[j] - eps;
        const auto rm = residual(problem, work, family, parameter);
        work[j] = v[j];
        if (!rp || !rm) return std::nullopt;
        const Eigen::VectorXd col = (*rp - *rm) / (2.0 * eps);
        for (Eigen::Index i = 0; i < col.size(); ++i)
            if (col(i) != 0.0) trips.emplace_back(static_cast<int>(i), static_cast<int>(j), col(i));
    }
    Eigen::SparseMatrix<double> jac(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    jac.setFromTriplets(trips.begin(), trips.end());
    return jac;
}

namespace {

double rms(const Eigen::VectorXd& r) { return r.norm() / std::sqrt(static_cast<double>(std::max<Eigen::Index>(1, r.size()))); }

bool state_admissible(const HomotopyProblem& problem, const std::vector<double>& v) {
    try {
        return admissible(GraphState(problem.grid_ptr(), v, Representation::v_form)).admissible;
    } catch (const GraphDomainError&) {
        return false;
    }
}

}  // namespace

StepReport newton_step(const HomotopyProblem& problem, HomotopyRun& run, const NewtonOptions& options) {
    StepReport rep;
    std::optional<LinearizedSystem> sys;
    if (options.fd_jacobian) {
        const auto r = residual(problem, run.v, run.family, run.parameter);
        const auto jac = fd_jacobian(problem, run.v, run.family, run.parameter);
        if (r && jac) sys = LinearizedSystem{*jac, *r, {}};
    } else {
        sys = assemble_jacobian(problem, run.v, run.family, run.parameter);
    }
    if (!sys) {
        rep.outcome = StepOutcome::not_admissible;
        return rep;
    }
    rep.residual_before = interior_norm(problem.grid(), sys->residual);

    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    sys->jacobian.makeCompressed();
    lu.compute(sys->jacobian);
    if (lu.info() != Eigen::Success) {
        rep.outcome = StepOutcome::singular;
        return rep;
    }
    const Eigen::VectorXd delta = lu.solve(-sys->residual);
    if (lu.info() != Eigen::Success || !delta.allFinite()) {
        rep.outcome = StepOutcome::singular;
        return rep;
    }

    const double base = rms(sys->residual);
    double alpha = 1.0;
    for (int h = 0; h <= options.max_halvings; ++h, alpha *= 0.5) {
        std::vector<double> trial(run.v);
        for (std::size_t i = 0; i < trial.size(); ++i) trial[i] += alpha * delta(static_cast<Eigen::Index>(i));
        const auto r = residual(problem, trial, run.family, run.parameter);
        if (!r || !state_admissible(problem, trial)) continue;
        if (rms(*r) <= (1.0 - 1e-4 * alpha) * base) {
            run.v = std::move(trial);
            rep.alpha = alpha;
            rep.halvings = h;
            rep.residual_after = interior_norm(problem.grid(), *r);
            return rep;
        }
    }
    rep.outcome = StepOutcome::line_search_exhausted;
    return rep;
}

NewtonReport newton_solve(const HomotopyProblem& problem, Family family, double parameter, std::vector<double>& v,
                          const NewtonOptions& options) {
    NewtonReport rep;
    const double tol = options.tolerance * problem.scale();
    const auto r0 = residual(problem, v, family, parameter);
    if (!r0) {
        rep.failure = "initial state is not admissible";
        return rep;
    }
    rep.residual_norms.push_back(interior_norm(problem.grid(), *r0));
    HomotopyRun run;
    run.family = family;
    run.parameter = parameter;
    run.v = v;
    while (rep.residual_norms.back() > tol) {
        if (rep.iterations >= options.max_iterations) {
            rep.failure = "iteration limit reached";
            return rep;
        }
        const StepReport step = newton_step(problem, run, options);
        if (step.outcome != StepOutcome::accepted) {
            rep.failure = step.outcome == StepOutcome::singular        ? "singular Jacobian"
                          : step.outcome == StepOutcome::not_admissible ? "state left the admissible set"
                                                                       : "line search exhausted";
            return rep;
        }
        ++rep.iterations;
        rep.residual_norms.push_back(step.residual_after);
    }
    v = std::move(run.v);
    rep.converged = true;
    return rep;
}

namespace {

double comparison_margin(const HomotopyProblem& problem, const std::vector<double>& v) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) m = std::min(m, v[i] - problem.v_sub()[i]);
    return m;
}

}  // namespace

ContinuationResult continuity_run(const HomotopyProblem& problem, const ContinuationOptions& options) {
    ContinuationResult res;
    const SerrinReport serrin = serrin_check(problem.psi(), problem.sphere(), problem.k());
    if (!serrin.pass) {
        res.status = ContinuationStatus::serrin_violation;
        res.message = serrin.message;
        return res;
    }

    const double tol = options.newton.tolerance * problem.scale();
    std::vector<double> v(problem.v_sub().begin(), problem.v_sub().end());

    for (Family family : {Family::theta, Family::xi}) {
        // When the current state already solves the end of this family there is nothing to continue.
        if (const auto r_end = residual(problem, v, family, 1.0); r_end && interior_norm(problem.grid(), *r_end) <= tol) {
            ++res.steps_attempted;
            ++res.steps_accepted;
            res.history.push_back({family, 1.0, 0, interior_norm(problem.grid(), *r_end), true,
                                   comparison_margin(problem, v)});
            continue;
        }
        double param = 0.0;
        double step = options.controller.step;
        while (param < 1.0) {
            const double target = std::min(1.0, param + step);
            std::vector<double> trial(v);
            const NewtonReport nr = newton_solve(problem, family, target, trial, options.newton);
            ++res.steps_attempted;
            HistoryEntry entry{family, target, nr.iterations, nr.residual_norms.empty() ? 0.0 : nr.residual_norms.back(),
                               false, comparison_margin(problem, trial)};
            bool ok = nr.converged;
            if (ok && entry.comparison_margin < -options.comparison_tolerance) ok = false;
            entry.accepted = ok;
            res.history.push_back(entry);
            if (ok) {
                ++res.steps_accepted;
                v = std::move(trial);
                param = target;
                step = std::min(1.0, step * options.controller.grow);
                continue;
            }
            step *= options.controller.shrink;
            if (step < options.controller.min_step) {
                std::ostringstream msg;
                msg << "continuation stalled in " << family_name(family) << " at parameter " << param;
                if (!nr.converged) msg << " (" << nr.failure << ")";
                else msg << " (comparison v >= v_sub violated by " << -entry.comparison_margin << ")";
                res.status = ContinuationStatus::step_underflow;
                res.message = msg.str();
                res.v = std::move(v);
                return res;
            }
        }
    }

    const auto r = residual(problem, v, Family::xi, 1.0);
    res.final_residual = r ? interior_norm(problem.grid(), *r) : std::numeric_limits<double>::infinity();
    res.status = ContinuationStatus::converged;
    res.message = "converged";
    res.v = std::move(v);
    return res;
}

}  // namespace wk
