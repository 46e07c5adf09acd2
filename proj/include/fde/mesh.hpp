#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace fde {

// Partition of [a, b] into n cells, nodes strictly increasing.
struct Mesh {
    double a = 0.0;
    double b = 1.0;
    std::vector<double> nodes;  // size n + 1, nodes.front() == a, nodes.back() == b
    double grading = 1.0;       // r used at construction (1 = uniform)

    std::size_t cells() const { return nodes.empty() ? 0 : nodes.size() - 1; }
};

// Graded mesh with nodes a + (b - a) * (i/n)^r, i = 0..n.  r = 1 gives a
// uniform mesh; r > 1 clusters nodes near a.  Requires a < b, n >= 2, r >= 1.
Mesh build_graded_mesh(double a, double b, std::size_t n, double r);

// Checks strict monotonicity and endpoint consistency; throws
// std::invalid_argument on violation.
void validate_mesh(const Mesh& mesh);

// Nodal values on a mesh; between nodes the function is understood as the
// piecewise-linear interpolant of its nodal values.
struct GridFunction {
    Mesh mesh;
    std::vector<double> values;  // size mesh.nodes.size()

    // Piecewise-linear evaluation; t must lie in [mesh.a, mesh.b].
    double value_at(double t) const;
};

GridFunction make_grid_function(const Mesh& mesh, std::vector<double> values);

// Samples f at the mesh nodes.
template <typename F>
GridFunction sample(const Mesh& mesh, F&& f) {
    std::vector<double> v;
    v.reserve(mesh.nodes.size());
    for (double t : mesh.nodes) v.push_back(f(t));
    return make_grid_function(mesh, std::move(v));
}

// Largest nodal absolute difference between two grid functions on the same
// mesh; throws std::invalid_argument if the meshes differ.
double sup_distance(const GridFunction& y1, const GridFunction& y2);

// CSV serialization: header "t,value", one row per node, 17 significant
// digits, LF line endings.
void write_grid_csv(const GridFunction& y, const std::string& path);
GridFunction read_grid_csv(const std::string& path);

// Formats a double with 17 significant digits (round-trip exact).
std::string format_full(double v);

}  // namespace fde
