#include <json.hpp>
#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>

#include "wk/cli_io.hpp"

namespace wk {

using nlohmann::json;

namespace {

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json config_json(const RunConfig& c) {
    return json{{"k", c.k},
                {"cap_radius", c.cap_radius},
                {"rings", c.rings},
                {"sectors", c.sectors},
                {"center", c.center},
                {"radius", c.radius},
                {"psi", c.psi},
                {"initial_step", c.initial_step},
                {"min_step", c.min_step},
                {"shrink", c.shrink},
                {"grow", c.grow},
                {"max_newton_iterations", c.max_newton_iterations},
                {"newton_tol", c.newton_tol},
                {"allow_nonsmooth_psi", c.allow_nonsmooth_psi}};
}

json serrin_json(const SerrinReport& s) {
    return json{{"pass", s.pass},     {"k0", num(s.k0)},         {"psi_min", num(s.psi_min)},
                {"psi_max", num(s.psi_max)}, {"samples", s.samples}, {"message", s.message}};
}

json history_json(const std::vector<HistoryEntry>& history) {
    json arr = json::array();
    for (const auto& h : history)
        arr.push_back({{"family", family_name(h.family)},
                       {"parameter", num(h.parameter)},
                       {"newton_iterations", h.newton_iterations},
                       {"residual", num(h.residual)},
                       {"accepted", h.accepted},
                       {"comparison_margin", num(h.comparison_margin)}});
    return arr;
}

json diagnostics_json(const DiagnosticsReport& d) {
    json checks = json::array();
    for (const auto& c : d.checks)
        checks.push_back({{"name", c.name}, {"value", num(c.value)}, {"threshold", num(c.threshold)}, {"pass", c.pass}});
    return json{{"kappa_min", num(d.pinching.kappa_min)},
                {"kappa_max", num(d.pinching.kappa_max)},
                {"comparison_margin", num(d.comparison_margin)},
                {"duality_identity_max_error", num(d.duality.identity_max_error)},
                {"duality_equation_max_error", num(d.duality.equation_max_error)},
                {"nm_margin", num(d.nm.margin)},
                {"nm_node", d.nm.node},
                {"gradient_max", {{"node", d.gradient_max.node},
                                  {"w", num(d.gradient_max.w)},
                                  {"on_boundary", d.gradient_max.on_boundary},
                                  {"grad_norm", num(d.gradient_max.grad_norm)}}},
                {"mesh_curvature", {{"median", num(d.mesh.median)},
                                    {"p95", num(d.mesh.p95)},
                                    {"max", num(d.mesh.max)},
                                    {"max_node", d.mesh.max_node},
                                    {"evaluated", d.mesh.evaluated},
                                    {"skipped", d.mesh.skipped}}},
                {"trace_max", num(d.trace_max)},
                {"checks", checks},
                {"pass", d.pass()}};
}

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ExportError("cannot open " + path.string() + " for writing");
    writer(out);
    out.flush();
    if (!out) throw ExportError("write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const json& j) {
    write_file(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

void prepare_output(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ExportError("cannot create output directory " + dir.string() + ": " + ec.message());
}

}  // namespace

RunOutcome check(const RunConfig& c) {
    RunOutcome out;
    const PsiExpr psi = PsiExpr::parse(c.psi);
    const EnclosingSphere sphere = c.sphere();
    json report{{"command", "check"}, {"config", config_json(c)}};
    try {
        prepare_output(c.output_dir);
        const SerrinReport serrin = serrin_check(psi, sphere, c.k);
        report["serrin"] = serrin_json(serrin);
        if (!serrin.pass) {
            spdlog::error("Serrin condition fails: {}", serrin.message);
            out.code = ExitCode::serrin_violation;
            out.message = serrin.message;
        } else {
            const Subsolution sub = build_subsolution(sphere, build_grid(c.cap_radius, c.rings, c.sectors));
            const AdmissibilityReport adm = admissible(sub.state);
            report["subsolution"] = {{"admissible", adm.admissible},
                                     {"min_eigenvalue", num(adm.min_eigenvalue)},
                                     {"k0", num(k_zero(sphere, c.k))}};
            write_file(c.output_dir / "subsolution.txt", [&](std::ostream& os) { write_field(os, sub.state); });
            out.message = adm.admissible ? "ok" : "discrete subsolution not admissible";
            out.code = adm.admissible ? ExitCode::ok : ExitCode::continuation_failure;
        }
        report["exit_code"] = static_cast<int>(out.code);
        write_json(c.output_dir / "report.json", report);
    } catch (const ExportError& e) {
        out.code = ExitCode::io_error;
        out.message = e.what();
    }
    return out;
}

RunOutcome run(const RunConfig& c) {
    RunOutcome out;
    const PsiExpr psi = PsiExpr::parse(c.psi);
    const EnclosingSphere sphere = c.sphere();
    json report{{"command", "solve"}, {"config", config_json(c)}};
    json artifacts = json::array();
    auto finish = [&](ExitCode code, std::string message, bool partial) {
        out.code = code;
        out.message = std::move(message);
        report["exit_code"] = static_cast<int>(code);
        report["message"] = out.message;
        report["partial"] = partial;
        report["artifacts"] = artifacts;
        write_json(c.output_dir / "report.json", report);
        return out;
    };

    try {
        prepare_output(c.output_dir);

        const SerrinReport serrin = serrin_check(psi, sphere, c.k);
        report["serrin"] = serrin_json(serrin);
        if (!serrin.pass) {
            spdlog::error("Serrin condition fails: {}", serrin.message);
            return finish(ExitCode::serrin_violation, serrin.message, false);
        }
        spdlog::info("Serrin check passed: psi in [{:.6g}, {:.6g}], K0 = {:.6g}", serrin.psi_min, serrin.psi_max,
                     serrin.k0);

        const auto grid = build_grid(c.cap_radius, c.rings, c.sectors);
        const Subsolution sub = build_subsolution(sphere, grid);
        std::optional<HomotopyProblem> problem;
        try {
            problem.emplace(psi, c.k, sub, c.allow_nonsmooth_psi);
        } catch (const NotAdmissible& e) {
            return finish(ExitCode::continuation_failure, e.what(), true);
        } catch (const std::invalid_argument& e) {
            return finish(ExitCode::usage, e.what(), false);
        }
        write_file(c.output_dir / "subsolution.txt", [&](std::ostream& os) { write_field(os, sub.state); });
        artifacts.push_back("subsolution.txt");

        spdlog::info("grid {} rings x {} sectors, {} nodes", c.rings, c.sectors, grid->node_count());
        ContinuationResult cont = continuity_run(*problem, c.continuation_options());
        const double tol = c.newton_tol * problem->scale();
        for (const auto& h : cont.history) {
            if (!h.accepted && h.residual <= tol && h.comparison_margin < 0.0)
                spdlog::warn("{} = {:.6g}: comparison v >= v_sub violated by {:.3g}, step rejected",
                             family_name(h.family), h.parameter, -h.comparison_margin);
            spdlog::debug("{} {:.6g}: {} Newton iterations, residual {:.3g}, {}", family_name(h.family), h.parameter,
                          h.newton_iterations, h.residual, h.accepted ? "accepted" : "rejected");
        }
        write_json(c.output_dir / "history.json", history_json(cont.history));
        artifacts.push_back("history.json");
        report["continuation"] = {{"status", cont.status == ContinuationStatus::converged ? "converged"
                                             : cont.status == ContinuationStatus::serrin_violation
                                                 ? "serrin_violation"
                                                 : "step_underflow"},
                                  {"message", cont.message},
                                  {"steps_attempted", cont.steps_attempted},
                                  {"steps_accepted", cont.steps_accepted},
                                  {"final_residual", num(cont.final_residual)},
                                  {"tolerance", num(tol)}};
        out.continuation = cont;

        const GraphState state = cont.state(*problem);
        if (cont.status != ContinuationStatus::converged) {
            spdlog::error("continuation failed: {}", cont.message);
            write_file(c.output_dir / "solution_partial.txt", [&](std::ostream& os) { write_field(os, state); });
            artifacts.push_back("solution_partial.txt");
            return finish(cont.status == ContinuationStatus::serrin_violation ? ExitCode::serrin_violation
                                                                              : ExitCode::continuation_failure,
                          cont.message, true);
        }
        spdlog::info("continuation converged in {} steps ({} attempted), residual {:.3g}", cont.steps_accepted,
                     cont.steps_attempted, cont.final_residual);

        write_file(c.output_dir / "solution.txt", [&](std::ostream& os) { write_field(os, state); });
        artifacts.push_back("solution.txt");
        if (c.export_obj) {
            export_mesh(state, psi, c.k, MeshFormat::obj, c.output_dir / "mesh.obj");
            artifacts.push_back("mesh.obj");
        }
        if (c.export_vtk) {
            export_mesh(state, psi, c.k, MeshFormat::vtk, c.output_dir / "mesh.vtk");
            artifacts.push_back("mesh.vtk");
        }

        const DiagnosticsReport diag = diagnose(state, problem->v_sub(), psi, c.k);
        report["diagnostics"] = diagnostics_json(diag);
        out.diagnostics = diag;
        for (const auto& chk : diag.checks) {
            if (chk.pass)
                spdlog::info("check {}: {:.3g} (threshold {:.3g})", chk.name, chk.value, chk.threshold);
            else
                spdlog::warn("check {} failed: {:.3g} (threshold {:.3g})", chk.name, chk.value, chk.threshold);
        }
        if (!diag.pass()) return finish(ExitCode::diagnostics_failure, "diagnostics failed", false);
        return finish(ExitCode::ok, "ok", false);
    } catch (const ExportError& e) {
        out.code = ExitCode::io_error;
        out.message = e.what();
        spdlog::error("{}", e.what());
        return out;
    }
}

}  // namespace wk
