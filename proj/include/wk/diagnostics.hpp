#pragma once

// Read-only checks on a computed radial graph: curvature pinching, the
// inverse-curvature dual form of the equation, the Newton-Maclaurin lower
// bound, the location of max (u^2 + |grad u|^2)^{1/2}, and an independent
// curvature estimate from quadratic fits to the embedded mesh.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wk/graphgeom.hpp"
#include "wk/psidsl.hpp"

namespace wk {

struct PinchingReport {
    double kappa_min = 0.0;
    double kappa_max = 0.0;
    bool positive = false;
};

PinchingReport pinching_report(const GraphState& state);

struct DualityReport {
    double identity_max_error = 0.0;  // |S_k(kappa) S_{n,n-k}(1/kappa) - 1|
    double equation_max_error = 0.0;  // |F~(diag(1/kappa)) psi^{1/k}(eta) - 1|
};

/// |S_k(kappa) * S_n(1/kappa) / S_{n-k}(1/kappa) - 1| for one tuple.
double duality_identity_error(std::span<const double> kappa, int k);

/// Evaluated on non-boundary nodes.
DualityReport duality_check(const GraphState& state, const PsiExpr& psi, int k);

/// S_n(1/kappa) - psi^{-1} S_n(1/kappa)^{(n-k)/n}.
double nm_margin(std::span<const double> kappa, double psi, int k);

struct NmReport {
    double margin = 0.0;  // min over non-boundary nodes
    std::size_t node = 0;
};

NmReport nm_lower_bound(const GraphState& state, const PsiExpr& psi, int k);

struct GradientMaxReport {
    std::size_t node = 0;
    double w = 0.0;
    bool on_boundary = false;
    double grad_norm = 0.0;  // |grad u| at the maximizer
};

GradientMaxReport gradient_max_locus(const GraphState& state);

struct MeshCurvatureReport {
    double median = 0.0;
    double p95 = 0.0;
    double max = 0.0;
    std::size_t max_node = 0;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;
    std::vector<std::pair<std::size_t, double>> errors;  // (node, relative error)
};

/// Relative error of S_k of fitted principal curvatures against psi at the fitted normal.
MeshCurvatureReport mesh_curvature_check(const GraphState& state, const PsiExpr& psi, int k);

struct DiagnosticsThresholds {
    double mesh_median = 0.02;
    double mesh_p95 = 0.05;
    double duality = 1e-6;
    double nm_margin = -1e-8;
    double comparison = -1e-10;
};

struct CheckResult {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct DiagnosticsReport {
    PinchingReport pinching;
    DualityReport duality;
    NmReport nm;
    GradientMaxReport gradient_max;
    MeshCurvatureReport mesh;
    double comparison_margin = 0.0;  // min (v - v_sub)
    double trace_max = 0.0;          // max of Delta u + n u, reported only
    std::vector<CheckResult> checks;

    bool pass() const;
};

DiagnosticsReport diagnose(const GraphState& state, std::span<const double> v_sub, const PsiExpr& psi, int k,
                           const DiagnosticsThresholds& thresholds = {});

}  // namespace wk
