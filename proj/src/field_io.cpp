#include "imcflab/field_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace imcflab {

namespace {
std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

void dump_scalar(const ScalarField& s, const std::string& path) {
    s.validate("dump_scalar");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("dump_scalar: cannot open " + path);
    out << "x,y,value\n";
    for (int j = 0; j < s.grid.ny; ++j)
        for (int i = 0; i < s.grid.nx; ++i)
            out << fmt17(s.grid.node_x(i)) << ',' << fmt17(s.grid.node_y(j)) << ','
                << fmt17(s.at(i, j)) << '\n';
}

void dump_vector(const VectorField& f, const std::string& path) {
    f.validate("dump_vector");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("dump_vector: cannot open " + path);
    out << "x,y,fx,fy\n";
    const int cw = f.grid.cells_x();
    for (int j = 0; j < f.grid.cells_y(); ++j)
        for (int i = 0; i < cw; ++i)
            out << fmt17(f.grid.cell_cx(i)) << ',' << fmt17(f.grid.cell_cy(j)) << ','
                << fmt17(f.fx[j * cw + i]) << ',' << fmt17(f.fy[j * cw + i]) << '\n';
}

ScalarField load_scalar(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_scalar: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("x,y,value", 0) != 0)
        throw std::runtime_error("load_scalar: bad header in " + path);
    std::vector<double> xs, ys, vs;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ss(line);
        double x, y, v;
        char c1, c2;
        if (!(ss >> x >> c1 >> y >> c2 >> v) || c1 != ',' || c2 != ',')
            throw std::runtime_error("load_scalar: parse error at row " + std::to_string(row));
        if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(v))
            throw std::runtime_error("load_scalar: non-finite value at row " +
                                     std::to_string(row));
        xs.push_back(x);
        ys.push_back(y);
        vs.push_back(v);
    }
    if (vs.empty()) throw std::runtime_error("load_scalar: no data rows");

    auto lattice = [&](std::vector<double> c, const char* axis) {
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end(),
                            [](double a, double b) { return std::abs(a - b) <= 1e-9; }),
                c.end());
        if (c.size() < 2)
            throw std::runtime_error(std::string("load_scalar: degenerate ") + axis +
                                     " lattice");
        const double h = (c.back() - c.front()) / (c.size() - 1);
        for (std::size_t k = 0; k < c.size(); ++k)
            if (std::abs(c[k] - (c.front() + k * h)) > 1e-9)
                throw std::runtime_error(std::string("load_scalar: non-uniform ") + axis +
                                         " lattice near " + fmt17(c[k]));
        return c;
    };
    const std::vector<double> ux = lattice(xs, "x");
    const std::vector<double> uy = lattice(ys, "y");
    const double hx = (ux.back() - ux.front()) / (ux.size() - 1);
    const double hy = (uy.back() - uy.front()) / (uy.size() - 1);
    if (std::abs(hx - hy) > 1e-9)
        throw std::runtime_error("load_scalar: anisotropic spacing (hx != hy)");

    Grid2D g(ux.front(), uy.front(), hx, static_cast<int>(ux.size()),
             static_cast<int>(uy.size()));
    ScalarField s(g);
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(g.n_nodes()), 0);
    for (std::size_t k = 0; k < vs.size(); ++k) {
        const int i = static_cast<int>(std::llround((xs[k] - g.x0) / g.h));
        const int j = static_cast<int>(std::llround((ys[k] - g.y0) / g.h));
        if (i < 0 || j < 0 || i >= g.nx || j >= g.ny)
            throw std::runtime_error("load_scalar: point off lattice at data row " +
                                     std::to_string(k + 2));
        s.at(i, j) = vs[k];
        seen[g.node_index(i, j)] = 1;
    }
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (!seen[g.node_index(i, j)])
                throw std::runtime_error("load_scalar: missing node (" + std::to_string(i) +
                                         ", " + std::to_string(j) + ")");
    return s;
}

}  // namespace imcflab
