#pragma once

// Wavefront OBJ export: one vertex per node in row-major order (i outer),
// one quad per non-degenerate grid cell.

#include <cstddef>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "tsnet/error.hpp"
#include "tsnet/json_io.hpp"
#include "tsnet/surface.hpp"

namespace tsnet::io {

struct ObjStats {
    std::size_t vertices = 0;
    std::size_t faces = 0;
    std::size_t omitted_cells = 0;
};

inline ObjStats write_obj(const SurfaceNet& s, std::ostream& out, double cond_tol = kDefaultCondTol) {
    const auto& d = s.domain();
    ObjStats stats;
    out << "# tsnet surface net " << d.n1() << " x " << d.n2() << '\n';
    char line[128];
    for (std::size_t i = 0; i < d.n1(); ++i) {
        for (std::size_t j = 0; j < d.n2(); ++j) {
            const Vec3& v = s.r(i, j);
            std::snprintf(line, sizeof line, "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
            out << line;
            ++stats.vertices;
        }
    }
    auto index = [&](std::size_t i, std::size_t j) { return i * d.n2() + j + 1; };
    for (std::size_t i = 0; i + 1 < d.n1(); ++i) {
        for (std::size_t j = 0; j + 1 < d.n2(); ++j) {
            if (tangent_sin2(s.r(i + 1, j) - s.r(i, j), s.r(i, j + 1) - s.r(i, j)) < cond_tol) {
                ++stats.omitted_cells;
                continue;
            }
            // A = (i,j), B = (i+1,j), C = (i+1,j+1), D = (i,j+1).
            out << "f " << index(i, j) << ' ' << index(i + 1, j) << ' ' << index(i + 1, j + 1) << ' '
                << index(i, j + 1) << '\n';
            ++stats.faces;
        }
    }
    return stats;
}

inline ObjStats export_obj(const SurfaceNet& s, const std::string& path, double cond_tol = kDefaultCondTol) {
    ensure_parent(path);
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    const ObjStats stats = write_obj(s, out, cond_tol);
    out.flush();
    if (!out) throw IoError("failed writing '" + path + "'");
    return stats;
}

}  // namespace tsnet::io
