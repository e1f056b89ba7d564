#include <CLI11.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>

#include "wk/cli_io.hpp"

namespace {

void apply_overrides(wk::RunConfig& cfg, const std::optional<int>& rings, const std::optional<int>& sectors,
                     const std::optional<std::string>& out) {
    if (rings) cfg.rings = *rings;
    if (sectors) cfg.sectors = *sectors;
    if (out) cfg.output_dir = *out;
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("weingarten"));
    spdlog::set_pattern("[%l] %v");
    spdlog::cfg::load_env_levels();  // SPDLOG_LEVEL=debug|info|warn|...

    CLI::App app{"Dirichlet problem for prescribed Weingarten curvature of radial graphs"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<int> rings, sectors;
    std::optional<std::string> out;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "YAML run configuration")->required();
        sub->add_option("--rings", rings, "override the number of rings")->check(CLI::Range(4, 100000));
        sub->add_option("--sectors", sectors, "override the number of sectors")->check(CLI::Range(8, 100000));
        sub->add_option("--out", out, "override the output directory");
    };
    CLI::App* solve = app.add_subcommand("solve", "solve the Dirichlet problem and write all artifacts");
    add_common(solve);
    CLI::App* check = app.add_subcommand("check", "run the Serrin gate and build the subsolution only");
    add_common(check);
    CLI::App* selftest = app.add_subcommand("selftest", "run quick property suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(wk::ExitCode::usage);
    }

    if (selftest->parsed()) return wk::selftest(std::cout) == 0 ? 0 : 1;

    wk::RunConfig cfg;
    try {
        cfg = wk::load_config(config_path);
    } catch (const wk::ConfigError& e) {
        if (e.line() > 0)
            spdlog::error("{}:{}: {}", config_path, e.line(), e.what());
        else
            spdlog::error("{}: {}", config_path, e.what());
        return static_cast<int>(wk::ExitCode::usage);
    }
    apply_overrides(cfg, rings, sectors, out);

    const wk::RunOutcome outcome = solve->parsed() ? wk::run(cfg) : wk::check(cfg);
    std::cout << outcome.message << '\n';
    return static_cast<int>(outcome.code);
}
