#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "wk/cli_io.hpp"

namespace wk {

EnclosingSphere RunConfig::sphere() const {
    return EnclosingSphere{Eigen::Vector3d(center[0], center[1], center[2]), radius};
}

ContinuationOptions RunConfig::continuation_options() const {
    ContinuationOptions o;
    o.controller.step = initial_step;
    o.controller.min_step = min_step;
    o.controller.shrink = shrink;
    o.controller.grow = grow;
    o.newton.max_iterations = max_newton_iterations;
    o.newton.tolerance = newton_tol;
    return o;
}

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

template <class T>
T scalar(const YAML::Node& n, const std::string& key, const char* type) {
    if (!n.IsScalar()) throw ConfigError("key '" + key + "' must be a " + type, key, line_of(n));
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("key '" + key + "' must be a " + type + ", got '" + n.Scalar() + "'", key, line_of(n));
    }
}

void check_range(bool ok, const std::string& key, const YAML::Node& n, const std::string& rule) {
    if (!ok) throw ConfigError("key '" + key + "' out of range: " + rule, key, line_of(n));
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("config parse error: " + e.msg, "", e.mark.line + 1);
    }
    if (!root.IsMap()) throw ConfigError("config must be a mapping of keys to values", "", line_of(root));

    static const std::set<std::string> known{
        "k",        "cap_radius", "rings",         "sectors",    "center",     "radius",     "psi",
        "initial_step", "min_step", "shrink",     "grow",       "max_newton_iterations", "newton_tol",
        "output_dir", "export_obj", "export_vtk", "allow_nonsmooth_psi"};
    for (const auto& kv : root) {
        const std::string key = kv.first.as<std::string>();
        if (!known.count(key)) throw ConfigError("unknown key '" + key + "'", key, line_of(kv.first));
    }
    for (const char* req : {"k", "cap_radius", "radius", "psi"})
        if (!root[req]) throw ConfigError(std::string("missing required key '") + req + "'", req, 0);

    RunConfig c;
    auto get = [&](const char* key) { return root[key]; };

    c.k = scalar<int>(get("k"), "k", "integer");
    check_range(c.k >= 1 && c.k <= 2, "k", get("k"), "1 <= k <= 2");
    c.cap_radius = scalar<double>(get("cap_radius"), "cap_radius", "number");
    check_range(c.cap_radius > 0.0 && c.cap_radius < 1.5707963267948966, "cap_radius", get("cap_radius"),
                "0 < cap_radius < pi/2");
    c.radius = scalar<double>(get("radius"), "radius", "number");
    check_range(c.radius > 0.0, "radius", get("radius"), "radius > 0");
    c.psi = scalar<std::string>(get("psi"), "psi", "string");

    if (auto n = get("rings")) {
        c.rings = scalar<int>(n, "rings", "integer");
        check_range(c.rings >= 4, "rings", n, "rings >= 4");
    }
    if (auto n = get("sectors")) {
        c.sectors = scalar<int>(n, "sectors", "integer");
        check_range(c.sectors >= 8, "sectors", n, "sectors >= 8");
    }
    if (auto n = get("center")) {
        if (!n.IsSequence() || n.size() != 3) throw ConfigError("key 'center' must be a list of 3 numbers", "center", line_of(n));
        for (std::size_t i = 0; i < 3; ++i) c.center[i] = scalar<double>(n[i], "center", "number");
    }
    const Eigen::Vector3d ctr(c.center[0], c.center[1], c.center[2]);
    check_range(ctr.norm() < c.radius, "center", get("center") ? get("center") : get("radius"),
                "origin must lie inside the sphere (|center| < radius)");

    if (auto n = get("initial_step")) {
        c.initial_step = scalar<double>(n, "initial_step", "number");
        check_range(c.initial_step > 0.0 && c.initial_step <= 1.0, "initial_step", n, "0 < initial_step <= 1");
    }
    if (auto n = get("min_step")) {
        c.min_step = scalar<double>(n, "min_step", "number");
        check_range(c.min_step > 0.0 && c.min_step <= c.initial_step, "min_step", n, "0 < min_step <= initial_step");
    }
    if (auto n = get("shrink")) {
        c.shrink = scalar<double>(n, "shrink", "number");
        check_range(c.shrink > 0.0 && c.shrink < 1.0, "shrink", n, "0 < shrink < 1");
    }
    if (auto n = get("grow")) {
        c.grow = scalar<double>(n, "grow", "number");
        check_range(c.grow >= 1.0, "grow", n, "grow >= 1");
    }
    if (auto n = get("max_newton_iterations")) {
        c.max_newton_iterations = scalar<int>(n, "max_newton_iterations", "integer");
        check_range(c.max_newton_iterations >= 1, "max_newton_iterations", n, ">= 1");
    }
    if (auto n = get("newton_tol")) {
        c.newton_tol = scalar<double>(n, "newton_tol", "number");
        check_range(c.newton_tol > 0.0, "newton_tol", n, "> 0");
    }
    if (auto n = get("output_dir")) c.output_dir = scalar<std::string>(n, "output_dir", "string");
    if (auto n = get("export_obj")) c.export_obj = scalar<bool>(n, "export_obj", "boolean");
    if (auto n = get("export_vtk")) c.export_vtk = scalar<bool>(n, "export_vtk", "boolean");
    if (auto n = get("allow_nonsmooth_psi")) c.allow_nonsmooth_psi = scalar<bool>(n, "allow_nonsmooth_psi", "boolean");

    try {
        (void)PsiExpr::parse(c.psi);
    } catch (const PsiSyntaxError& e) {
        throw ConfigError(std::string("key 'psi': ") + e.what(), "psi", line_of(get("psi")));
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string(), "", 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace wk
