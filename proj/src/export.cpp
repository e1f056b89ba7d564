#include <fmt/format.h>
#include <fmt/ostream.h>

#include <fstream>

#include "wk/cli_io.hpp"

namespace wk {

void write_obj(std::ostream& os, const Mesh& mesh) {
    for (const auto& v : mesh.vertices) fmt::print(os, "v {:.17g} {:.17g} {:.17g}\n", v(0), v(1), v(2));
    for (const auto& f : mesh.faces) fmt::print(os, "f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1);
}

void write_vtk(std::ostream& os, const GraphState& state, const PsiExpr& psi, int k) {
    const Mesh mesh = embed(state);
    fmt::print(os, "# vtk DataFile Version 3.0\nradial graph\nASCII\nDATASET POLYDATA\n");
    fmt::print(os, "POINTS {} double\n", mesh.vertices.size());
    for (const auto& v : mesh.vertices) fmt::print(os, "{:.17g} {:.17g} {:.17g}\n", v(0), v(1), v(2));
    fmt::print(os, "POLYGONS {} {}\n", mesh.faces.size(), 4 * mesh.faces.size());
    for (const auto& f : mesh.faces) fmt::print(os, "3 {} {} {}\n", f[0], f[1], f[2]);
    fmt::print(os, "POINT_DATA {}\n", mesh.vertices.size());
    fmt::print(os, "SCALARS Wk double 1\nLOOKUP_TABLE default\n");
    for (const auto& d : state.geometry()) {
        const Eigen::Vector2d kappa = d.kappa();
        fmt::print(os, "{:.17g}\n", elem_sym_norm(std::span<const double>(kappa.data(), 2), k));
    }
    fmt::print(os, "SCALARS psi double 1\nLOOKUP_TABLE default\n");
    for (const auto& d : state.geometry()) fmt::print(os, "{:.17g}\n", psi.eval(d.eta));
}

void write_field(std::ostream& os, const GraphState& state) {
    const CapGrid& grid = state.grid();
    fmt::print(os, "# node ring sector x y z u v\n");
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
        const GridNode& nd = grid.node(i);
        fmt::print(os, "{} {} {} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g}\n", i, nd.ring, nd.sector, nd.x(0), nd.x(1),
                   nd.x(2), state.u(i), state.v(i));
    }
}

void export_mesh(const GraphState& state, const PsiExpr& psi, int k, MeshFormat format,
                 const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ExportError("cannot open " + path.string() + " for writing");
    if (format == MeshFormat::obj)
        write_obj(out, embed(state));
    else
        write_vtk(out, state, psi, k);
    out.flush();
    if (!out) throw ExportError("write failed for " + path.string());
}

}  // namespace wk
