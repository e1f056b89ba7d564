// Acceptance criteria 1-7. One [PASS]/[FAIL] line per criterion, exit code
// is the number of failures.

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wk/cli_io.hpp"

using namespace wk;
namespace fs = std::filesystem;

namespace {

constexpr double kCap = std::numbers::pi / 3;
const EnclosingSphere kOffCenter{Eigen::Vector3d(0, 0, 0.3), 1.0};

struct Criterion {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        notes.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", what));
        pass = pass && ok;
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Setup {
    std::shared_ptr<const CapGrid> grid;
    Subsolution sub;
    HomotopyProblem problem;

    Setup(const EnclosingSphere& s, const std::string& psi, int k, int rings)
        : grid(build_grid(kCap, rings, 2 * rings)), sub(build_subsolution(s, grid)), problem(PsiExpr::parse(psi), k, sub) {}
};

SpherePoint<2> random_point(std::mt19937_64& rng) {
    const Eigen::Vector3d x = oracle::random_unit(rng);
    Eigen::Vector3d t1 = (std::abs(x(0)) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY()).cross(x);
    t1.normalize();
    SpherePoint<2> p;
    p.x = x;
    p.frame.col(0) = t1;
    p.frame.col(1) = x.cross(t1);
    return p;
}

// AC1: symmetric-function layer
Criterion ac1() {
    Criterion c;
    const auto t0 = std::chrono::steady_clock::now();
    bool normalized = true;
    for (int n = 1; n <= 6; ++n) {
        const std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
        for (int k = 1; k <= n; ++k) normalized = normalized && elem_sym_norm(ones, k) == 1.0;
    }
    c.require(normalized, "S_k(1,...,1) == 1 for all k <= n <= 6");

    std::mt19937_64 rng(1);
    double dual_err = 0, enum_err = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto x = oracle::random_positive(rng, 2 + trial % 5);
        for (int k = 1; k <= static_cast<int>(x.size()); ++k) {
            dual_err = std::max(dual_err, duality_identity_error(x, k));
            const double e = oracle::elem_sym_enum(x, k);
            enum_err = std::max(enum_err, std::abs(elem_sym_norm(x, k) - e) / e);
        }
    }
    c.require(dual_err <= 1e-10, fmt::format("duality identity on 1000 cone samples: {:.2e} <= 1e-10", dual_err));
    c.require(enum_err <= 1e-12, fmt::format("S_k vs subset enumeration: {:.2e}", enum_err));

    double concavity = INFINITY, min_eig = INFINITY, grad_err = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = 1 + trial % 2;
        const Eigen::Matrix2d a = oracle::random_spd<2>(rng), b = oracle::random_spd<2>(rng);
        const auto ca = CurvatureMatrix::from_dense(a);
        const double fa = weingarten_F(ca, k), fb = weingarten_F(CurvatureMatrix::from_dense(b), k);
        const double fm = weingarten_F(CurvatureMatrix::from_dense(Eigen::Matrix2d(0.5 * (a + b))), k);
        concavity = std::min(concavity, fm - 0.5 * (fa + fb));
        const Eigen::MatrixXd g = F_gradient(ca, k);
        min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues().minCoeff());
        const Eigen::Matrix2d dir = oracle::random_symmetric<2>(rng);
        const double fd = oracle::directional_fd(
            [&](double t) { return weingarten_F(CurvatureMatrix::from_dense(Eigen::Matrix2d(a + t * dir)), k); }, 1e-6);
        const double an = (g.array() * dir.array()).sum();
        grad_err = std::max(grad_err, std::abs(an - fd) / std::max(1.0, std::abs(fd)));
    }
    c.require(concavity >= -1e-12, fmt::format("midpoint concavity defect {:.2e} >= -1e-12", concavity));
    c.require(min_eig > 0.0, fmt::format("min eigenvalue of F^ij {:.2e} > 0", min_eig));
    c.require(grad_err <= 1e-6, fmt::format("F_gradient vs central differences {:.2e} <= 1e-6", grad_err));
    const double elapsed = seconds_since(t0);
    c.require(elapsed < 10.0, fmt::format("runtime {:.2f} s < 10 s", elapsed));
    return c;
}

// AC2: pointwise geometry identities
Criterion ac2() {
    Criterion c;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> vv(-1.5, 1.5), gg(-4.0, 4.0);
    double gamma_err = 0, form_err = 0, const_err = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto at = random_point(rng);
        const double v = vv(rng);
        const Eigen::Vector2d p(gg(rng), gg(rng));
        const Eigen::Matrix2d hv = oracle::random_symmetric<2>(rng) * 2.0;
        const auto dv = point_geometry_v<2>(v, p, hv, at);
        const double u = std::exp(v);
        const auto du =
            point_geometry_u<2>(u, Eigen::Vector2d(u * p), Eigen::Matrix2d(u * (hv + p * p.transpose())), at);
        gamma_err = std::max(gamma_err,
                             (du.gamma_upper * du.gamma_lower - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff());
        form_err = std::max(form_err, (du.a - dv.a).cwiseAbs().maxCoeff() / (1.0 + du.a.norm()));
        const auto d0 = point_geometry_u<2>(u, Eigen::Vector2d::Zero(), Eigen::Matrix2d::Zero(), at);
        const Eigen::Vector2d kappa = d0.kappa();
        const_err = std::max({const_err, std::abs(kappa(0) - u), std::abs(kappa(1) - u)});
    }
    c.require(gamma_err <= 1e-10, fmt::format("gamma^ gamma_ - Id: {:.2e} <= 1e-10", gamma_err));
    c.require(form_err <= 1e-10, fmt::format("u-form vs v-form curvature matrix: {:.2e} <= 1e-10", form_err));
    c.require(const_err <= 4 * std::numeric_limits<double>::epsilon() * 5.0,
              fmt::format("constant u: kappa == u, max deviation {:.2e}", const_err));
    return c;
}

// AC3: analytic cap oracle
Criterion ac3() {
    Criterion c;
    for (int k : {1, 2}) {
        std::vector<double> hs, errs;
        for (int rings : {16, 32, 64}) {
            const Setup s(kOffCenter, "1", k, rings);
            hs.push_back(s.grid->max_spacing());
            errs.push_back(interior_norm(*s.grid, *residual_xi(s.problem, s.problem.v_sub(), 1.0)));
        }
        const double p = oracle::convergence_order(hs, errs);
        c.require(p >= 1.8, fmt::format("k={} exact-cap residual {:.2e} {:.2e} {:.2e}, order {:.2f} >= 1.8", k,
                                        errs[0], errs[1], errs[2], p));
    }

    const auto t0 = std::chrono::steady_clock::now();
    const Setup s(kOffCenter, "1", 2, 64);
    const double truncation = interior_norm(*s.grid, *residual_xi(s.problem, s.problem.v_sub(), 1.0)) / s.problem.scale();
    std::vector<double> v(s.problem.v_sub().begin(), s.problem.v_sub().end());
    const double r0 = s.grid->plane_radius();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Eigen::Vector2d y = s.grid->node(i).y / r0;
        v[i] += std::log(1.0 + 0.05 * (1.0 - y.squaredNorm()) * (1.0 + 0.5 * y(0)));
    }
    NewtonOptions opt;
    opt.tolerance = 1e-12;
    const NewtonReport nr = newton_solve(s.problem, Family::xi, 1.0, v, opt);
    const double elapsed = seconds_since(t0);
    c.require(nr.converged, fmt::format("Newton from 5% perturbation at 64 rings converged in {} iterations",
                                        nr.iterations));
    double uerr = 0;
    for (std::size_t i = 0; i < v.size(); ++i) uerr = std::max(uerr, std::abs(std::exp(v[i]) - s.sub.state.u(i)));
    c.require(uerr <= 3.0 * truncation,
              fmt::format("max|u - u_exact| {:.2e} <= 3 x truncation {:.2e}", uerr, 3.0 * truncation));

    // rounding floor: residual change under a few-ulp relative perturbation of the iterate
    const Eigen::VectorXd at_solution = *residual_xi(s.problem, v, 1.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ulp(-4.0, 4.0);
    double floor = 0;
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> w(v);
        for (double& x : w) x *= 1.0 + ulp(rng) * std::numeric_limits<double>::epsilon();
        floor = std::max(floor, interior_norm(*s.grid, Eigen::VectorXd(*residual_xi(s.problem, w, 1.0) - at_solution)));
    }
    std::vector<double> r;
    for (double x : nr.residual_norms)
        if (x > floor) r.push_back(x);
    std::string trace;
    for (double x : nr.residual_norms) trace += fmt::format(" {:.1e}", x);
    if (r.size() >= 4) {
        const std::size_t n = r.size();
        const double g2 = std::log(r[n - 2] / r[n - 1]), g1 = std::log(r[n - 3] / r[n - 2]),
                     g0 = std::log(r[n - 4] / r[n - 3]);  // final two ratios of successive log gaps
        c.require(g1 / g0 >= 1.7 && g2 / g1 >= 1.7,
                  fmt::format("log-gap ratios {:.2f} {:.2f} >= 1.7 above floor {:.1e} (residuals{})", g1 / g0, g2 / g1, floor, trace));
    } else {
        c.require(false, fmt::format("too few iterates above the rounding floor (residuals{})", trace));
    }
    c.require(elapsed < 60.0, fmt::format("runtime {:.1f} s < 60 s", elapsed));
    return c;
}

// AC4: homotopy structure and the full continuity run
Criterion ac4() {
    Criterion c;
    const Setup centered({Eigen::Vector3d::Zero(), 1.2}, "0.7", 2, 32);
    const double rc = interior_norm(*centered.grid, *residual_theta(centered.problem, centered.problem.v_sub(), 0.0));
    c.require(rc == 0.0, fmt::format("centered: Theta^0 residual at v_sub = {:.2e}", rc));

    const auto t0 = std::chrono::steady_clock::now();
    const Setup s(kOffCenter, "0.7 - 0.2*nz", 2, 32);
    const double ro = interior_norm(*s.grid, *residual_theta(s.problem, s.problem.v_sub(), 0.0));
    c.require(ro <= 1e-12, fmt::format("off-center: Theta^0 residual at v_sub = {:.2e}", ro));

    double bridge = 0;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> amp(-0.03, 0.03);
    const double r0 = s.grid->plane_radius();
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> v(s.problem.v_sub().begin(), s.problem.v_sub().end());
        const double a = amp(rng);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const Eigen::Vector2d y = s.grid->node(i).y / r0;
            v[i] += std::log(1.0 + a * (1.0 - y.squaredNorm()) * (1.0 + 0.5 * y(1)));
        }
        const auto th = residual_theta(s.problem, v, 1.0);
        const auto xi = residual_xi(s.problem, v, 0.0);
        if (!th || !xi) {
            bridge = INFINITY;
            continue;
        }
        bridge = std::max(bridge, (*th - *xi).cwiseAbs().maxCoeff());
    }
    c.require(bridge <= 1e-15, fmt::format("Theta^1 - Xi^0 = {:.2e} <= 1e-15", bridge));

    const ContinuationResult res = continuity_run(s.problem);
    const double elapsed = seconds_since(t0);
    c.require(res.status == ContinuationStatus::converged, "continuity run converged: " + res.message);
    c.require(res.steps_attempted <= 40, fmt::format("{} continuation steps <= 40", res.steps_attempted));
    c.require(res.final_residual <= 1e-9 * s.problem.scale(),
              fmt::format("final residual {:.2e} <= 1e-9", res.final_residual / s.problem.scale()));
    double margin = INFINITY;
    for (const auto& h : res.history)
        if (h.accepted) margin = std::min(margin, h.comparison_margin);
    c.require(margin >= -1e-10, fmt::format("min over accepted states of v - v_sub = {:.2e} >= -1e-10", margin));
    c.require(admissible(res.state(s.problem)).admissible, "final state admissible");
    c.require(elapsed < 300.0, fmt::format("runtime {:.1f} s < 300 s", elapsed));
    return c;
}

// AC5: independent cross-check at 64 rings
Criterion ac5() {
    Criterion c;
    const Setup s(kOffCenter, "0.7 - 0.2*nz", 2, 64);
    const ContinuationResult res = continuity_run(s.problem);
    c.require(res.status == ContinuationStatus::converged, "64-ring continuity run converged");
    const DiagnosticsReport rep = diagnose(res.state(s.problem), s.problem.v_sub(), s.problem.psi(), 2);
    c.require(rep.mesh.median <= 0.02, fmt::format("mesh curvature median {:.2e} <= 2e-2", rep.mesh.median));
    c.require(rep.mesh.p95 <= 0.05, fmt::format("mesh curvature p95 {:.2e} <= 5e-2", rep.mesh.p95));
    c.require(rep.duality.equation_max_error <= 1e-6,
              fmt::format("dual equation error {:.2e} <= 1e-6", rep.duality.equation_max_error));
    c.require(rep.duality.identity_max_error <= 1e-6,
              fmt::format("dual identity error {:.2e} <= 1e-6", rep.duality.identity_max_error));
    c.require(rep.nm.margin >= -1e-8, fmt::format("Newton-Maclaurin margin {:.2e} >= -1e-8", rep.nm.margin));
    c.require(rep.pinching.kappa_min > 0 && rep.pinching.kappa_min <= rep.pinching.kappa_max &&
                  std::isfinite(rep.pinching.kappa_max),
              fmt::format("0 < kappa_min {:.4f} <= kappa_max {:.4f} < inf", rep.pinching.kappa_min,
                          rep.pinching.kappa_max));
    return c;
}

RunConfig base_config(const fs::path& out) {
    RunConfig cfg;
    cfg.k = 2;
    cfg.cap_radius = kCap;
    cfg.center = {0.0, 0.0, 0.3};
    cfg.radius = 1.0;
    cfg.psi = "0.7 - 0.2*nz";
    cfg.output_dir = out;
    return cfg;
}

// AC6: Serrin gate
Criterion ac6(const fs::path& scratch) {
    Criterion c;
    RunConfig bad = base_config(scratch / "serrin");
    bad.psi = "1.1";
    const RunOutcome o = run(bad);
    c.require(o.code == ExitCode::serrin_violation && !o.continuation,
              fmt::format("psi = 1.1 K0 rejected before solving with exit code {}", static_cast<int>(o.code)));

    RunConfig eq = base_config(scratch / "equality");
    eq.center = {0.0, 0.0, 0.0};
    eq.radius = 1.2;
    eq.psi = "1.2^(-2)";
    const RunOutcome e = run(eq);
    c.require(e.code == ExitCode::ok, fmt::format("psi = K0 exit code {}", static_cast<int>(e.code)));
    const Setup s({Eigen::Vector3d::Zero(), 1.2}, eq.psi, 2, eq.rings);
    bool same = e.continuation.has_value();
    if (same)
        for (std::size_t i = 0; i < e.continuation->v.size(); ++i) same = same && e.continuation->v[i] == s.problem.v_sub()[i];
    c.require(same, "returned solution is the subsolution");
    c.require(e.continuation && e.continuation->final_residual <= 1e-9 * s.problem.scale(),
              fmt::format("residual {:.2e} <= tol", e.continuation ? e.continuation->final_residual : INFINITY));
    return c;
}

// AC7: determinism of exports
Criterion ac7(const fs::path& scratch) {
    Criterion c;
    const RunOutcome a = run(base_config(scratch / "run_a"));
    const RunOutcome b = run(base_config(scratch / "run_b"));
    c.require(a.code == ExitCode::ok && b.code == ExitCode::ok, "both runs succeed");
    for (const char* f : {"mesh.obj", "mesh.vtk", "solution.txt", "subsolution.txt", "history.json", "report.json"}) {
        const std::string x = slurp(scratch / "run_a" / f), y = slurp(scratch / "run_b" / f);
        c.require(!x.empty() && x == y, fmt::format("{} byte identical ({} bytes)", f, x.size()));
    }
    return c;
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::warn);
    const fs::path scratch = fs::temp_directory_path() / "wk_acceptance";
    fs::remove_all(scratch);
    fs::create_directories(scratch);

    const std::vector<std::pair<std::string, std::function<Criterion()>>> criteria{
        {"AC1 symmetric functions", ac1},
        {"AC2 chart and geometry", ac2},
        {"AC3 analytic cap oracle", ac3},
        {"AC4 homotopy structure", ac4},
        {"AC5 independent cross-check", ac5},
        {"AC6 Serrin gate", [&] { return ac6(scratch); }},
        {"AC7 determinism", [&] { return ac7(scratch); }},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        const Criterion c = fn();
        fmt::print("[{}] {} ({:.1f} s)\n", c.pass ? "PASS" : "FAIL", name, seconds_since(t0));
        for (const auto& n : c.notes) fmt::print("       {}\n", n);
        failures += c.pass ? 0 : 1;
    }
    std::fflush(stdout);
    return failures;
}
