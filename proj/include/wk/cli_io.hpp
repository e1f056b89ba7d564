#pragma once

// Run configuration, the solve pipeline
// (serrin -> subsolution -> continuation -> diagnostics) and file export.

#include <array>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>

#include "wk/diagnostics.hpp"
#include "wk/solver.hpp"

namespace wk {

/// YAML mapping of scalar keys. Required: k, cap_radius, radius, psi.
struct RunConfig {
    int k = 0;
    double cap_radius = 0.0;
    int rings = 32;
    int sectors = 64;
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double radius = 0.0;
    std::string psi;

    double initial_step = 0.1;
    double min_step = 1e-4;
    double shrink = 0.5;
    double grow = 1.5;
    int max_newton_iterations = 30;
    double newton_tol = 1e-9;

    std::filesystem::path output_dir = "out";
    bool export_obj = true;
    bool export_vtk = true;
    bool allow_nonsmooth_psi = false;

    EnclosingSphere sphere() const;
    ContinuationOptions continuation_options() const;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, std::string key, int line)
        : std::runtime_error(what), key_(std::move(key)), line_(line) {}
    const std::string& key() const { return key_; }
    int line() const { return line_; }  // 1-based, 0 when unknown

private:
    std::string key_;
    int line_;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

enum class ExitCode : int {
    ok = 0,
    usage = 1,
    serrin_violation = 2,
    continuation_failure = 3,
    diagnostics_failure = 4,
    io_error = 5,
};

class ExportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_obj(std::ostream& os, const Mesh& mesh);
void write_vtk(std::ostream& os, const GraphState& state, const PsiExpr& psi, int k);
void write_field(std::ostream& os, const GraphState& state);

enum class MeshFormat { obj, vtk };

/// Throws ExportError when the file cannot be written.
void export_mesh(const GraphState& state, const PsiExpr& psi, int k, MeshFormat format,
                 const std::filesystem::path& path);

struct RunOutcome {
    ExitCode code = ExitCode::ok;
    std::string message;
    std::optional<ContinuationResult> continuation;
    std::optional<DiagnosticsReport> diagnostics;
};

/// Full pipeline; writes artifacts into config.output_dir.
RunOutcome run(const RunConfig& config);

/// Serrin gate and subsolution only.
RunOutcome check(const RunConfig& config);

/// Quick randomized property suites; returns the number of failures.
int selftest(std::ostream& os);

}  // namespace wk
