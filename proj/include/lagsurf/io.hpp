#pragma once

// File formats: scalar fields and frame fields as CSV, meshes as OBJ.
// All numeric output uses %.17g so byte-identical reruns are guaranteed and
// round trips preserve doubles exactly.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cyclographic.hpp"
#include "frames.hpp"
#include "grid.hpp"

namespace lagsurf {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// scalar fields: header `nx,ny,x0,x1,y0,y1`, then row-major values, one grid
// row per line

inline void write_field_csv(const ScalarField& f, const std::string& path) {
    std::ofstream out = detail::open_out(path);
    const Grid& g = f.grid;
    out << g.nx << ',' << g.ny << ',' << fmt_double(g.x0) << ','
        << fmt_double(g.x1) << ',' << fmt_double(g.y0) << ','
        << fmt_double(g.y1) << '\n';
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (i) out << ',';
            out << fmt_double(f.at(i, j));
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline ScalarField read_field_csv(const std::string& path) {
    std::ifstream in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty field file: " + path);
    const auto head = detail::split_csv(line);
    if (head.size() != 6)
        throw std::runtime_error("bad field header in " + path);
    const int nx = std::stoi(head[0]), ny = std::stoi(head[1]);
    const Grid g(std::stod(head[2]), std::stod(head[3]), std::stod(head[4]),
                 std::stod(head[5]), nx, ny);
    ScalarField f(g);
    for (int j = 0; j < ny; ++j) {
        if (!std::getline(in, line))
            throw std::runtime_error("truncated field file: " + path);
        const auto cells = detail::split_csv(line);
        if (static_cast<int>(cells.size()) != nx)
            throw std::runtime_error("bad row width in " + path);
        for (int i = 0; i < nx; ++i) f.at(i, j) = std::stod(cells[i]);
    }
    return f;
}

// ---------------------------------------------------------------------------
// frame fields: one node per line, `i,j,x(4),a1(4),a2(4),a3(4),a4(4)`

inline void write_frames_csv(const FrameField& F, const std::string& path) {
    std::ofstream out = detail::open_out(path);
    const Grid& g = F.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const LaguerreElement& A = F.at(i, j);
            out << i << ',' << j;
            for (int r = 0; r < 4; ++r)
                out << ',' << fmt_double(A.translation[r]);
            for (int col = 0; col < 4; ++col)
                for (int r = 0; r < 4; ++r)
                    out << ',' << fmt_double(A.linear(r, col));
            out << '\n';
        }
    if (!out) throw std::runtime_error("write failed: " + path);
}

// Grid extents are not stored in the frame CSV; node counts are inferred and
// the chart extent defaults to the unit square (the decoded geometry does not
// depend on it).
inline FrameField read_frames_csv(const std::string& path) {
    std::ifstream in = detail::open_in(path);
    struct Row {
        int i, j;
        LaguerreElement A;
    };
    std::vector<Row> rows;
    int nx = 0, ny = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = detail::split_csv(line);
        if (cells.size() != 22)
            throw std::runtime_error("bad frame row in " + path);
        Row r;
        r.i = std::stoi(cells[0]);
        r.j = std::stoi(cells[1]);
        for (int t = 0; t < 4; ++t) r.A.translation[t] = std::stod(cells[2 + t]);
        for (int col = 0; col < 4; ++col)
            for (int t = 0; t < 4; ++t)
                r.A.linear(t, col) = std::stod(cells[6 + 4 * col + t]);
        nx = std::max(nx, r.i + 1);
        ny = std::max(ny, r.j + 1);
        rows.push_back(r);
    }
    if (nx < 2 || ny < 2)
        throw std::runtime_error("frame file too small: " + path);
    FrameField F;
    F.grid = Grid(0.0, 1.0, 0.0, 1.0, nx, ny);
    F.A.resize(F.grid.size());
    if (rows.size() != F.grid.size())
        throw std::runtime_error("frame file node count mismatch: " + path);
    for (const Row& r : rows) F.at(r.i, r.j) = r.A;
    return F;
}

// ---------------------------------------------------------------------------
// meshes: nx*ny vertices in row-major order, quads split into triangles

inline void write_obj(const Field<Vec3>& f, const std::string& path) {
    const Grid& g = f.grid;
    if (g.nx < 2 || g.ny < 2)
        throw std::invalid_argument("write_obj: grid smaller than 2x2");
    std::ofstream out = detail::open_out(path);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const Vec3& p = f.at(i, j);
            out << "v " << fmt_double(p[0]) << ' ' << fmt_double(p[1]) << ' '
                << fmt_double(p[2]) << '\n';
        }
    auto vid = [&](int i, int j) { return j * g.nx + i + 1; };  // 1-based
    for (int j = 0; j < g.ny - 1; ++j)
        for (int i = 0; i < g.nx - 1; ++i) {
            out << "f " << vid(i, j) << ' ' << vid(i + 1, j) << ' '
                << vid(i + 1, j + 1) << '\n';
            out << "f " << vid(i, j) << ' ' << vid(i + 1, j + 1) << ' '
                << vid(i, j + 1) << '\n';
        }
    if (!out) throw std::runtime_error("write failed: " + path);
}

struct ObjData {
    std::vector<Vec3> vertices;
    std::size_t triangle_count = 0;
};

inline ObjData read_obj(const std::string& path) {
    std::ifstream in = detail::open_in(path);
    ObjData data;
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("v ", 0) == 0) {
            std::istringstream ss(line.substr(2));
            Vec3 p;
            ss >> p[0] >> p[1] >> p[2];
            data.vertices.push_back(p);
        } else if (line.rfind("f ", 0) == 0) {
            ++data.triangle_count;
        }
    }
    return data;
}

// per-vertex signed radii for a sphere-congruence mesh: lines `i,j,radius`
inline void write_radius_csv(const ScalarField& r, const std::string& path) {
    std::ofstream out = detail::open_out(path);
    const Grid& g = r.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out << i << ',' << j << ',' << fmt_double(r.at(i, j)) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace lagsurf
