#include "nlap/radial_mesh.hpp"

#include "nlap/errors.hpp"
#include "nlap/nonlinearity.hpp"
#include "nlap/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nlap {

namespace {
const double kPi = 3.14159265358979323846;
} // namespace

double sphere_area(int N) {
    if (N < 2) throw ParamError("sphere_area: N>=2 violated");
    return 2.0 * std::pow(kPi, 0.5 * N) / std::tgamma(0.5 * N);
}

double alpha_N(int N) {
    if (N < 2) throw ParamError("alpha_N: N>=2 violated");
    return double(N) * std::pow(sphere_area(N), 1.0 / (double(N) - 1.0));
}

static void fill_quadrature(RadialMesh& m) {
    const int M = m.elements();
    m.qp_r.resize(4 * M);
    m.qp_w.resize(4 * M);
    m.qp_rmeas.resize(4 * M);
    for (int e = 0; e < M; ++e) {
        const double a = m.nodes[e], b = m.nodes[e + 1];
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int q = 0; q < 4; ++q) {
            const double r = mid + half * kGauss4X[q];
            const double w = half * kGauss4W[q];
            m.qp_r[4 * e + q] = r;
            m.qp_w[4 * e + q] = w;
            m.qp_rmeas[4 * e + q] = w * std::pow(r, m.N - 1);
        }
    }
}

RadialMesh build_mesh(double R, int M, int N, double grading) {
    if (!(R > 0.0)) throw ParamError("build_mesh: R>0 violated");
    if (M < 8) throw ParamError("build_mesh: M>=8 violated, M=" + std::to_string(M));
    if (!(grading >= 1.0)) throw ParamError("build_mesh: grading>=1 violated");
    if (N < 2) throw ParamError("build_mesh: N>=2 violated");
    RadialMesh m;
    m.R = R;
    m.N = N;
    m.omega = sphere_area(N);
    m.nodes.resize(M + 1);
    for (int i = 0; i <= M; ++i)
        m.nodes[i] = R * std::pow(double(i) / double(M), grading);
    m.nodes[0] = 0.0;
    m.nodes[M] = R;
    fill_quadrature(m);
    return m;
}

RadialMesh build_mesh_from_nodes(std::vector<double> nodes, int N) {
    if (nodes.size() < 2 || nodes.front() != 0.0)
        throw ParamError("mesh nodes must start at 0 with at least two entries");
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        if (!(nodes[i] < nodes[i + 1]))
            throw ParamError("mesh nodes must be strictly increasing");
    RadialMesh m;
    m.R = nodes.back();
    m.N = N;
    m.omega = sphere_area(N);
    m.nodes = std::move(nodes);
    fill_quadrature(m);
    return m;
}

GridFunction zero_function(const RadialMesh& mesh) {
    return GridFunction{&mesh, std::vector<double>(mesh.nodes.size(), 0.0)};
}

static void check_conform(const GridFunction& u) {
    if (!u.mesh || u.values.size() != u.mesh->nodes.size())
        throw ParamError("grid function does not conform to its mesh");
}

double interp(const GridFunction& u, double r) {
    check_conform(u);
    const auto& n = u.mesh->nodes;
    if (r <= n.front()) return u.values.front();
    if (r >= n.back()) return u.values.back();
    auto it = std::upper_bound(n.begin(), n.end(), r);
    std::size_t e = std::size_t(it - n.begin()) - 1;
    double t = (r - n[e]) / (n[e + 1] - n[e]);
    return u.values[e] * (1.0 - t) + u.values[e + 1] * t;
}

double w1n_norm(const GridFunction& u) {
    check_conform(u);
    const RadialMesh& m = *u.mesh;
    const int N = m.N;
    double acc = 0.0;
    for (int e = 0; e < m.elements(); ++e) {
        const double h = m.h(e);
        const double du = (u.values[e + 1] - u.values[e]) / h;
        const double dun = std::pow(std::abs(du), N);
        for (int q = 0; q < 4; ++q) {
            const double r = m.qp_r[4 * e + q];
            const double t = (r - m.nodes[e]) / h;
            const double v = u.values[e] * (1.0 - t) + u.values[e + 1] * t;
            acc += (dun + std::pow(std::abs(v), N)) * m.qp_rmeas[4 * e + q];
        }
    }
    return std::pow(m.omega * acc, 1.0 / double(N));
}

double ls_norm(const GridFunction& u, double s) {
    check_conform(u);
    if (!(s >= 1.0)) throw ParamError("ls_norm: s>=1 violated");
    const RadialMesh& m = *u.mesh;
    double acc = 0.0;
    for (int e = 0; e < m.elements(); ++e) {
        const double h = m.h(e);
        for (int q = 0; q < 4; ++q) {
            const double r = m.qp_r[4 * e + q];
            const double t = (r - m.nodes[e]) / h;
            const double v = u.values[e] * (1.0 - t) + u.values[e + 1] * t;
            acc += std::pow(std::abs(v), s) * m.qp_rmeas[4 * e + q];
        }
    }
    return std::pow(m.omega * acc, 1.0 / s);
}

double tm_functional(const GridFunction& u, double alpha) {
    check_conform(u);
    if (!(alpha > 0.0)) throw ParamError("tm_functional: alpha>0 violated");
    const RadialMesh& m = *u.mesh;
    const double np = double(m.N) / (double(m.N) - 1.0);
    double acc = 0.0;
    for (int e = 0; e < m.elements(); ++e) {
        const double h = m.h(e);
        for (int q = 0; q < 4; ++q) {
            const double r = m.qp_r[4 * e + q];
            const double t = (r - m.nodes[e]) / h;
            const double v = u.values[e] * (1.0 - t) + u.values[e + 1] * t;
            const double arg = alpha * std::pow(std::abs(v), np);
            if (arg > 709.0) {
                char buf[128];
                std::snprintf(buf, sizeof buf,
                              "tm_functional overflow at r=%.17g (element %d)", r, e);
                throw RangeError(buf, r);
            }
            acc += phi_n(m.N, arg) * m.qp_rmeas[4 * e + q];
        }
    }
    return m.omega * acc;
}

double annulus_sup(const GridFunction& u, double a, double b) {
    check_conform(u);
    if (!(a <= b)) throw ParamError("annulus_sup: a<=b violated");
    const auto& n = u.mesh->nodes;
    double best = std::max(std::abs(interp(u, a)), std::abs(interp(u, b)));
    auto lo = std::lower_bound(n.begin(), n.end(), a);
    auto hi = std::upper_bound(n.begin(), n.end(), b);
    for (auto it = lo; it != hi; ++it)
        best = std::max(best, std::abs(u.values[std::size_t(it - n.begin())]));
    return best;
}

void write_grid_csv(std::ostream& os, const GridFunction& u, bool version_comment) {
    check_conform(u);
    if (version_comment) os << "# nlap-galerkin v0.1.0\n";
    os << "r,u\n";
    char buf[80];
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", u.mesh->nodes[i], u.values[i]);
        os << buf;
    }
}

void write_grid_csv(const std::string& path, const GridFunction& u, bool version_comment) {
    std::ofstream f(path);
    if (!f) throw ParamError("cannot open for writing: " + path);
    write_grid_csv(f, u, version_comment);
}

LoadedGrid read_grid_csv(std::istream& is, int N) {
    std::vector<double> r, v;
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line.rfind("r,", 0) == 0) { header_seen = true; continue; }
            header_seen = true; // headerless data tolerated
        }
        std::istringstream ls(line);
        double a, b;
        char comma;
        if (!(ls >> a >> comma >> b) || comma != ',')
            throw ParamError("malformed grid CSV line: " + line);
        r.push_back(a);
        v.push_back(b);
    }
    LoadedGrid g;
    g.mesh = std::make_unique<RadialMesh>(build_mesh_from_nodes(std::move(r), N));
    g.u = GridFunction{g.mesh.get(), std::move(v)};
    return g;
}

LoadedGrid read_grid_csv(const std::string& path, int N) {
    std::ifstream f(path);
    if (!f) throw ParamError("cannot open for reading: " + path);
    return read_grid_csv(f, N);
}

} // namespace nlap
