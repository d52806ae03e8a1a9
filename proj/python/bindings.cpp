#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <limits>

#include "homoglab/cell.hpp"
#include "homoglab/discretize.hpp"
#include "homoglab/errors.hpp"
#include "homoglab/experiment.hpp"
#include "homoglab/homogenized.hpp"
#include "homoglab/solve.hpp"

namespace py = pybind11;
using namespace homoglab;

namespace {

using Array = py::array_t<double>;

Array grid_array(const Grid& g, const std::vector<double>& values) {
    Array out({g.m(), g.m()});
    std::copy(values.begin(), values.end(), out.mutable_data());
    return out;
}

std::optional<HoleShape> hole_of(std::optional<double> c) {
    if (!c) return std::nullopt;
    return BallHole{*c};
}

Partition partition_of(const std::string& config, int n, int q, double c) {
    const Configuration cfg = configuration_from_string(config);
    if (cfg == Configuration::Strips) return build_partition(strip_spec_for_grid(n, q));
    PartitionSpec s;
    s.config = cfg;
    s.n = n;
    s.resolution = q;
    s.hole = BallHole{c};
    return build_partition(s);
}

Kernel kernel_of(const std::pair<std::string, double>& k) {
    return Kernel(kernel_family_from_string(k.first), k.second);
}

SourceSpec source_of(const std::string& family) {
    SourceSpec s;
    s.family = source_family_from_string(family);
    return s;
}

py::dict partition_dict(const Partition& p) {
    std::vector<double> mask(p.grid.size());
    for (int c = 0; c < p.grid.size(); ++c) mask[c] = p.in_a(c) ? 1.0 : 0.0;
    py::dict d;
    d["m"] = p.grid.m();
    d["x_fraction"] = p.x_fraction;
    d["n_a"] = p.n_a();
    d["n_b"] = p.n_b();
    d["in_a"] = grid_array(p.grid, mask);
    return d;
}

py::dict solve_nlevel(const std::string& config, int n, int q, double c, const std::string& source,
                      std::pair<std::string, double> j, std::pair<std::string, double> g, double tol) {
    const Partition p = partition_of(config, n, q, c);
    const auto sys = assemble_system(p, kernel_of(j), kernel_of(g), make_source(source_of(source), p.grid));
    SolverOptions o;
    o.tol = tol;
    const auto sol = solve_constrained(sys, o);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> u(p.grid.size(), nan), v(p.grid.size(), nan);
    for (int k = 0; k < p.n_a(); ++k) u[p.a_cells[k]] = sol.u[k];
    for (int k = 0; k < p.n_b(); ++k) v[p.b_cells[k]] = sol.v[k];
    py::dict d = partition_dict(p);
    d["u"] = grid_array(p.grid, u);
    d["v"] = grid_array(p.grid, v);
    d["iterations"] = sol.iterations;
    d["residual"] = sol.residual_norm;
    d["constraint"] = sol.constraint_value;
    d["energy"] = sol.energy;
    return d;
}

py::dict cell_tensor(std::optional<double> c, int grid) {
    const auto t = effective_tensor(solve_cell(hole_of(c), grid));
    py::dict d;
    d["q"] = Eigen::Matrix2d(t.q);
    d["q_energy"] = Eigen::Matrix2d(t.q_energy);
    d["theta"] = t.theta;
    d["defect"] = t.defect;
    return d;
}

py::dict limit_solution(const std::string& kind, double x, int m, const std::string& source,
                        std::optional<Eigen::Matrix2d> tensor) {
    LimitSystemSpec s;
    if (kind == "LocalInHoles") {
        s.kind = LimitKind::LocalInHoles;
    } else if (kind == "NonlocalInHoles") {
        s.kind = LimitKind::NonlocalInHoles;
    } else if (kind == "Strips") {
        s.kind = LimitKind::Strips;
    } else {
        throw InvalidSpec("unknown limit kind '" + kind + "'");
    }
    s.x = x;
    s.j = Kernel(KernelFamily::TruncGaussian, 2.0);
    s.g = Kernel(KernelFamily::QuarticBump, 0.25);
    s.f = make_source(source_of(source), Grid(m));
    s.tensor = tensor;
    const auto sol = solve_limit(s, limit_solver_options());
    py::dict d;
    d["u"] = grid_array(sol.grid, sol.u);
    d["v"] = grid_array(sol.grid, sol.v);
    d["residual_u"] = sol.residual_u;
    d["residual_v"] = sol.residual_v;
    d["constraint"] = sol.constraint_value;
    return d;
}

double lambda_min(const std::string& config, int n, int q, double c) {
    const Partition p = partition_of(config, n, q, c);
    const Kernel j(KernelFamily::TruncGaussian, 2.0), g(KernelFamily::QuarticBump, 0.25);
    return coercivity_constant(assemble_system(p, j, g, make_source({}, p.grid))).lambda_min_constrained;
}

std::string run_json(const std::string& config, int jobs) {
    const auto result = run_experiment(parse_config(nlohmann::json::parse(config)), jobs);
    nlohmann::json out = verdicts_json(result);
    out["sweep_csv"] = sweep_csv(result);
    if (result.tensor) out["tensor"] = to_json(*result.tensor);
    return out.dump();
}

}  // namespace

PYBIND11_MODULE(_homoglab, m) {
    m.doc() = "Local/nonlocal homogenization experiments";

    py::register_exception<InvalidSpec>(m, "InvalidSpec", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<CompatibilityViolation>(m, "CompatibilityViolation", PyExc_ArithmeticError);
    py::register_exception<NonConvergence>(m, "NonConvergence", PyExc_RuntimeError);
    py::register_exception<DisconnectedRegion>(m, "DisconnectedRegion", PyExc_RuntimeError);

    m.def("kernel_value", [](const std::string& family, double radius, double r) {
        return Kernel(kernel_family_from_string(family), radius)(r);
    });
    m.def("kernel_mass", [](const std::string& family, double radius) {
        return quadrature_mass(Kernel(kernel_family_from_string(family), radius));
    });
    m.def("partition", [](const std::string& config, int n, int q, double c) {
        return partition_dict(partition_of(config, n, q, c));
    }, py::arg("config"), py::arg("n"), py::arg("q") = 8, py::arg("C") = 0.5,
       "Region mask and volume fraction. For strips q is the grid side.");
    m.def("solve", &solve_nlevel, py::arg("config"), py::arg("n"), py::arg("q") = 8, py::arg("C") = 0.5,
          py::arg("source") = "sin1", py::arg("J") = std::make_pair(std::string("TruncGaussian"), 2.0),
          py::arg("G") = std::make_pair(std::string("QuarticBump"), 0.25), py::arg("tol") = 1e-10,
          "n-level solve; u is NaN on B and v is NaN on A.");
    m.def("cell_tensor", &cell_tensor, py::arg("C") = 0.5, py::arg("grid") = 128,
          "Effective tensor of the perforated cell; C=None for no hole.");
    m.def("solve_limit", &limit_solution, py::arg("kind"), py::arg("x"), py::arg("m"), py::arg("source") = "sin1",
          py::arg("tensor") = std::nullopt);
    m.def("lambda_min", &lambda_min, py::arg("config"), py::arg("n"), py::arg("q") = 8, py::arg("C") = 0.5);
    m.def("poincare_constant", [](int n, int q, double c) {
        return poincare_constant(partition_of("LocalInHoles", n, q, c), Kernel(KernelFamily::QuarticBump, 0.25));
    }, py::arg("n"), py::arg("q") = 8, py::arg("C") = 0.5);
    m.def("_run_json", &run_json, py::arg("config"), py::arg("jobs") = 1);
}
