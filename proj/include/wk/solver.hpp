#pragma once

// Discrete Dirichlet problem for v = ln u on a cap grid and its two-stage
// continuation:
//
//   Theta^t:  F(A[v]) = e^{2(v - v_sub)} (t Psi + (1 - t) psi_sub),  t: 0 -> 1
//   Xi^s:     F(A[v]) = (s + (1 - s) e^{2(v - v_sub)}) Psi,          s: 0 -> 1
//
// with Psi = psi(eta)^{1/k}, psi_sub = F(A[v_sub]) and v = v_sub on the
// boundary. v_sub solves Theta^0 exactly, Theta^1 and Xi^0 coincide, and Xi^1
// is the target equation.

#include <Eigen/Sparse>

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wk/graphgeom.hpp"
#include "wk/psidsl.hpp"
#include "wk/subsolution.hpp"

namespace wk {

enum class Family { theta, xi };

const char* family_name(Family f);

class HomotopyProblem {
public:
    /// Non-smooth psi (abs, min, max) is refused unless allow_nonsmooth is set.
    HomotopyProblem(PsiExpr psi, int k, const Subsolution& sub, bool allow_nonsmooth = false);

    const CapGrid& grid() const { return *grid_; }
    const std::shared_ptr<const CapGrid>& grid_ptr() const { return grid_; }
    const PsiExpr& psi() const { return psi_; }
    int k() const { return k_; }
    const EnclosingSphere& sphere() const { return sphere_; }

    /// ln of the subsolution; also the boundary data ln phi.
    std::span<const double> v_sub() const { return v_sub_; }
    /// F(A[v_sub]) at every node.
    std::span<const double> psi_sub() const { return psi_sub_; }
    /// max psi_sub over interior nodes; residual tolerances are relative to it.
    double scale() const { return scale_; }

private:
    std::shared_ptr<const CapGrid> grid_;
    PsiExpr psi_;
    int k_;
    EnclosingSphere sphere_;
    std::vector<double> v_sub_;
    std::vector<double> psi_sub_;
    double scale_ = 1.0;
};

/// Residual at one node together with its partial derivatives with respect
/// to v, the frame gradient and the covariant Hessian of v.
struct LocalTerms {
    double residual = 0.0;
    double d_value = 0.0;
    Eigen::Vector2d d_gradient = Eigen::Vector2d::Zero();
    Eigen::Matrix2d d_hessian = Eigen::Matrix2d::Zero();
};

/// Empty when the curvature matrix leaves the positive cone.
std::optional<LocalTerms> local_terms(const HomotopyProblem& problem, std::size_t node, double v,
                                      const Eigen::Vector2d& grad, const Eigen::Matrix2d& hess, Family family,
                                      double parameter, bool with_derivatives);

/// Full residual; boundary rows are v - ln phi. Empty on admissibility loss.
std::optional<Eigen::VectorXd> residual(const HomotopyProblem& problem, std::span<const double> v, Family family,
                                        double parameter);
std::optional<Eigen::VectorXd> residual_theta(const HomotopyProblem& problem, std::span<const double> v, double t);
std::optional<Eigen::VectorXd> residual_xi(const HomotopyProblem& problem, std::span<const double> v, double s);

/// Max-norm of the residual over non-boundary rows.
double interior_norm(const CapGrid& grid, const Eigen::VectorXd& r);

struct LinearizedSystem {
    Eigen::SparseMatrix<double> jacobian;
    Eigen::VectorXd residual;
    /// d residual / d v at each node, excluding stencil weights (the zero-order coefficient).
    std::vector<double> zero_order;
};

std::optional<LinearizedSystem> assemble_jacobian(const HomotopyProblem& problem, std::span<const double> v,
                                                  Family family, double parameter);

/// Central-difference Jacobian, column by column. Slow; a fallback and a test oracle.
std::optional<Eigen::SparseMatrix<double>> fd_jacobian(const HomotopyProblem& problem, std::span<const double> v,
                                                       Family family, double parameter, double eps = 1e-6);

struct NewtonOptions {
    int max_iterations = 30;
    double tolerance = 1e-9;  // relative to problem.scale(), max-norm
    int max_halvings = 6;     // step lengths 1, 1/2, ..., 1/64
    bool fd_jacobian = false;
};

enum class StepOutcome { accepted, singular, line_search_exhausted, not_admissible };

struct StepReport {
    StepOutcome outcome = StepOutcome::accepted;
    double alpha = 0.0;
    double residual_before = 0.0;  // max-norm
    double residual_after = 0.0;
    int halvings = 0;
};

struct HistoryEntry {
    Family family = Family::theta;
    double parameter = 0.0;
    int newton_iterations = 0;
    double residual = 0.0;
    bool accepted = false;
    double comparison_margin = 0.0;  // min (v - v_sub)
};

struct StepController {
    double step = 0.1;
    double min_step = 1e-4;
    double shrink = 0.5;
    double grow = 1.5;
};

struct HomotopyRun {
    Family family = Family::theta;
    double parameter = 0.0;
    std::vector<double> v;
    StepController controller;
    std::vector<HistoryEntry> history;
};

/// One damped Newton update of run.v at (run.family, run.parameter).
StepReport newton_step(const HomotopyProblem& problem, HomotopyRun& run, const NewtonOptions& options = {});

struct NewtonReport {
    bool converged = false;
    int iterations = 0;
    std::vector<double> residual_norms;  // max-norm before each iteration and after the last
    std::string failure;
};

NewtonReport newton_solve(const HomotopyProblem& problem, Family family, double parameter, std::vector<double>& v,
                          const NewtonOptions& options = {});

struct ContinuationOptions {
    StepController controller;
    NewtonOptions newton;
    double comparison_tolerance = 1e-10;
};

enum class ContinuationStatus { converged, serrin_violation, step_underflow };

struct ContinuationResult {
    ContinuationStatus status = ContinuationStatus::step_underflow;
    std::string message;
    std::vector<double> v;
    std::vector<HistoryEntry> history;
    double final_residual = 0.0;
    std::size_t steps_attempted = 0;
    std::size_t steps_accepted = 0;

    GraphState state(const HomotopyProblem& problem) const {
        return GraphState(problem.grid_ptr(), v, Representation::v_form);
    }
};

/// Theta from t = 0 to 1, then Xi from s = 0 to 1, from the subsolution.
ContinuationResult continuity_run(const HomotopyProblem& problem, const ContinuationOptions& options = {});

}  // namespace wk
