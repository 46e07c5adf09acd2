#include "fde/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fde {

Mesh build_graded_mesh(double a, double b, std::size_t n, double r) {
    if (!(a < b))
        throw std::invalid_argument("build_graded_mesh: requires a < b");
    if (n < 2)
        throw std::invalid_argument("build_graded_mesh: requires n >= 2");
    if (!(r >= 1.0))
        throw std::invalid_argument("build_graded_mesh: requires grading r >= 1");
    Mesh mesh;
    mesh.a = a;
    mesh.b = b;
    mesh.grading = r;
    mesh.nodes.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(n);
        mesh.nodes[i] = a + (b - a) * std::pow(s, r);
    }
    mesh.nodes.front() = a;
    mesh.nodes.back() = b;
    validate_mesh(mesh);
    return mesh;
}

void validate_mesh(const Mesh& mesh) {
    if (mesh.nodes.size() < 3)
        throw std::invalid_argument("validate_mesh: needs at least 3 nodes");
    if (mesh.nodes.front() != mesh.a || mesh.nodes.back() != mesh.b)
        throw std::invalid_argument("validate_mesh: endpoint mismatch");
    for (std::size_t i = 1; i < mesh.nodes.size(); ++i)
        if (!(mesh.nodes[i - 1] < mesh.nodes[i]))
            throw std::invalid_argument("validate_mesh: nodes not strictly increasing");
}

double GridFunction::value_at(double t) const {
    const auto& x = mesh.nodes;
    if (!(t >= mesh.a) || !(t <= mesh.b))
        throw std::domain_error("GridFunction::value_at: t outside mesh interval");
    auto it = std::upper_bound(x.begin(), x.end(), t);
    if (it == x.begin()) return values.front();
    if (it == x.end()) return values.back();
    const std::size_t i = static_cast<std::size_t>(it - x.begin());
    const double x0 = x[i - 1], x1 = x[i];
    const double w = (t - x0) / (x1 - x0);
    return values[i - 1] + w * (values[i] - values[i - 1]);
}

GridFunction make_grid_function(const Mesh& mesh, std::vector<double> values) {
    validate_mesh(mesh);
    if (values.size() != mesh.nodes.size())
        throw std::invalid_argument("make_grid_function: value count must match node count");
    GridFunction y;
    y.mesh = mesh;
    y.values = std::move(values);
    return y;
}

double sup_distance(const GridFunction& y1, const GridFunction& y2) {
    if (y1.mesh.nodes != y2.mesh.nodes)
        throw std::invalid_argument("sup_distance: meshes differ");
    double d = 0.0;
    for (std::size_t i = 0; i < y1.values.size(); ++i)
        d = std::max(d, std::fabs(y1.values[i] - y2.values[i]));
    return d;
}

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_grid_csv(const GridFunction& y, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("write_grid_csv: cannot open " + path);
    out << "t,value\n";
    for (std::size_t i = 0; i < y.values.size(); ++i)
        out << format_full(y.mesh.nodes[i]) << ',' << format_full(y.values[i]) << '\n';
    if (!out)
        throw std::runtime_error("write_grid_csv: write failed for " + path);
}

GridFunction read_grid_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("read_grid_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("read_grid_csv: empty file " + path);
    std::vector<double> ts, vs;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ss(line);
        std::string tf, vf;
        if (!std::getline(ss, tf, ',') || !std::getline(ss, vf))
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected two comma-separated fields");
        try {
            ts.push_back(std::stod(tf));
            vs.push_back(std::stod(vf));
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": malformed number");
        }
    }
    if (ts.size() < 3)
        throw std::runtime_error("read_grid_csv: needs at least 3 rows in " + path);
    Mesh mesh;
    mesh.a = ts.front();
    mesh.b = ts.back();
    mesh.nodes = ts;
    validate_mesh(mesh);
    return make_grid_function(mesh, std::move(vs));
}

}  // namespace fde
