#ifndef NLAP_RADIAL_MESH_HPP
#define NLAP_RADIAL_MESH_HPP

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace nlap {

// omega_{N-1}, the measure of the unit sphere S^{N-1} in R^N.
double sphere_area(int N);

// alpha_N = N * omega_{N-1}^{1/(N-1)}, the Trudinger-Moser threshold.
double alpha_N(int N);

// Graded mesh 0 = r_0 < r_1 < ... < r_M = R with per-element 4-point Gauss
// rules. The r^{N-1} measure is not folded into the weights; qp_rmeas carries
// the combined factor w * r^{N-1} for integrators that want it precomputed.
struct RadialMesh {
    double R = 0.0;
    int N = 2;
    double omega = 0.0;            // sphere_area(N)
    std::vector<double> nodes;     // size M+1

    std::vector<double> qp_r;      // 4 per element
    std::vector<double> qp_w;      // plain dr weights
    std::vector<double> qp_rmeas;  // qp_w * qp_r^{N-1}

    int elements() const { return int(nodes.size()) - 1; }
    double h(int e) const { return nodes[e + 1] - nodes[e]; }
};

// Nodes r_i = R*(i/M)^grading. grading 1 is uniform. M >= 8.
RadialMesh build_mesh(double R, int M, int N, double grading = 1.0);

// Mesh from an explicit strictly increasing node list starting at 0.
RadialMesh build_mesh_from_nodes(std::vector<double> nodes, int N);

// Nodal values of a piecewise-linear radial function on a mesh. values has
// one entry per node; a W_0^{1,N}(B_R) member keeps values.back() == 0.
struct GridFunction {
    const RadialMesh* mesh = nullptr;
    std::vector<double> values;
};

GridFunction zero_function(const RadialMesh& mesh);

// Piecewise-linear evaluation; clamps r to [0, R].
double interp(const GridFunction& u, double r);

// ( omega * int_0^R (|u'|^N + |u|^N) r^{N-1} dr )^{1/N}.
double w1n_norm(const GridFunction& u);

// ( omega * int_0^R |u|^s r^{N-1} dr )^{1/s}, s >= 1.
double ls_norm(const GridFunction& u, double s);

// omega * int_0^R phi_N(alpha |u|^{N'}) r^{N-1} dr. Throws RangeError naming
// the offending radius if the exponential argument exceeds double range.
double tm_functional(const GridFunction& u, double alpha);

// sup of |u| over the annulus a <= r <= b (piecewise linear: node values
// inside plus the two interpolated endpoints).
double annulus_sup(const GridFunction& u, double a, double b);

// Two-column CSV with a version comment line and the header row "r,u".
// %.17g round-trips doubles exactly.
void write_grid_csv(std::ostream& os, const GridFunction& u,
                    bool version_comment = true);
void write_grid_csv(const std::string& path, const GridFunction& u,
                    bool version_comment = true);

// Reads the format above (comment line optional); rebuilds the mesh from the
// radii column. Owns the mesh storage so the GridFunction stays valid.
struct LoadedGrid {
    std::unique_ptr<RadialMesh> mesh;
    GridFunction u;
};
LoadedGrid read_grid_csv(std::istream& is, int N);
LoadedGrid read_grid_csv(const std::string& path, int N);

} // namespace nlap

#endif
