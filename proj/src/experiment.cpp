#include "homoglab/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "homoglab/corrector.hpp"
#include "homoglab/errors.hpp"
#include "homoglab/io.hpp"
#include "homoglab/solve.hpp"

namespace homoglab {

namespace {

using nlohmann::json;

const std::set<std::string> kTopKeys{"scenario", "n_list", "hole", "q", "strip_grid", "cell_grid", "kernels",
                                     "source", "mean_correct", "solver", "spectral", "backend"};

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("wrong type for '") + key + "'");
    }
}

Scenario scenario_from_string(const std::string& s) {
    if (s == "LocalInHoles") return Scenario::LocalInHoles;
    if (s == "NonlocalInHoles") return Scenario::NonlocalInHoles;
    if (s == "Strips") return Scenario::Strips;
    if (s == "CellOnly") return Scenario::CellOnly;
    if (s == "Diagnostics") return Scenario::Diagnostics;
    throw ConfigError("unknown scenario '" + s + "'");
}

ConvolutionBackend backend_from_string(const std::string& s) {
    if (s == "auto") return ConvolutionBackend::Auto;
    if (s == "direct") return ConvolutionBackend::Direct;
    if (s == "fft") return ConvolutionBackend::Fft;
    throw ConfigError("unknown backend '" + s + "'");
}

std::string to_string(ConvolutionBackend b) {
    switch (b) {
        case ConvolutionBackend::Auto: return "auto";
        case ConvolutionBackend::Direct: return "direct";
        case ConvolutionBackend::Fft: return "fft";
    }
    return "?";
}

KernelSpec parse_kernel(const json& obj, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    reject_unknown(obj, {"family", "R"}, where);
    KernelSpec k;
    try {
        k.family = kernel_family_from_string(get_or<std::string>(obj, "family", ""));
    } catch (const InvalidSpec& e) {
        throw ConfigError(where + ": " + e.what());
    }
    k.radius = get_or<double>(obj, "R", 0.0);
    if (!(k.radius > 0.0)) throw ConfigError(where + ": R must be positive");
    return k;
}

json kernel_json(const KernelSpec& k) { return {{"family", to_string(k.family)}, {"R", k.radius}}; }

json hole_json(const std::optional<HoleShape>& hole) {
    if (!hole) return "none";
    if (const auto* b = std::get_if<BallHole>(&*hole)) return {{"shape", "ball"}, {"C", b->radius_factor}};
    const auto& r = std::get<RectHole>(*hole);
    return {{"shape", "rect"}, {"width", r.width_fraction}, {"height", r.height_fraction}};
}

SolverOptions solver_options(const ExperimentConfig& c) {
    SolverOptions o;
    o.tol = c.tol;
    o.max_iter = c.max_iter;
    return o;
}

SolverOptions limit_options(const ExperimentConfig& c) {
    SolverOptions o = limit_solver_options();
    o.tol = c.limit_tol;
    o.max_iter = c.max_iter;
    return o;
}

AssemblyOptions assembly_options(const ExperimentConfig& c) {
    AssemblyOptions a;
    a.tol_compat = c.tol_compat;
    a.mean_correct = c.mean_correct;
    a.backend = c.backend;
    return a;
}

PartitionSpec hole_spec(const ExperimentConfig& c, Configuration config, int n) {
    PartitionSpec s;
    s.config = config;
    s.n = n;
    if (!c.hole) throw InvalidSpec("this scenario needs a hole shape");
    s.hole = *c.hole;
    s.resolution = c.q;
    return s;
}

struct Item {
    SweepRecord rec;
    std::optional<LimitSolution> limit;
};

void fill_solve(SweepRecord& rec, const Partition& p, const DiscreteSystem& sys, const SolutionPair& sol) {
    rec.n = p.spec.n;
    rec.m = p.grid.m();
    rec.dofs = static_cast<int>(sys.size());
    rec.x_fraction = p.x_fraction;
    rec.iterations = sol.iterations;
    rec.residual = sol.residual_norm;
    rec.constraint = sol.constraint_value;
    rec.energy = sol.energy;
}

void fill_moments(SweepRecord& rec, const MomentErrors& mom) {
    rec.moment_max = mom.max_error;
    rec.moments.clear();
    for (std::size_t i = 0; i < mom.names.size(); ++i) rec.moments.push_back(std::max(mom.u_error[i], mom.v_error[i]));
}

LimitSystemSpec limit_spec(const ExperimentConfig& c, LimitKind kind, double x, const SourceField& f) {
    LimitSystemSpec ls;
    ls.kind = kind;
    ls.x = x;
    ls.j = c.j.make();
    ls.g = c.g.make();
    ls.f = f;
    ls.backend = c.backend;
    return ls;
}

double limit_residual(const LimitSolution& lim) { return std::max(lim.residual_u, lim.residual_v); }

Item run_hole_item(const ExperimentConfig& c, int n, Configuration config, const CellProblem* cell,
                   const EffectiveTensor* tensor) {
    const auto start = std::chrono::steady_clock::now();
    Item item;
    const Partition p = build_partition(hole_spec(c, config, n));
    const Kernel j = c.j.make();
    const Kernel g = c.g.make();
    const auto f = make_source(c.source, p.grid);
    const auto sys = assemble_system(p, j, g, f, assembly_options(c));
    const auto sol = solve_constrained(sys, solver_options(c));
    fill_solve(item.rec, p, sys, sol);

    const double x = p.x_fraction;
    const bool local = config == Configuration::LocalInHoles;
    auto ls = limit_spec(c, local ? LimitKind::LocalInHoles : LimitKind::NonlocalInHoles, x, sys.source());
    if (!local) ls.tensor = tensor->q;
    const auto lim = solve_limit(ls, limit_options(c));
    item.rec.limit_residual = limit_residual(lim);
    item.rec.limit_constraint = lim.constraint_value;

    const CorrectorPair cor = local ? build_corrector_hole_average(lim, p, x)
                                    : build_corrector_gradient_cell(lim, *cell, n, p, x);
    const auto err = corrector_error(sol, cor, p);
    item.rec.corrector_error = err.total;
    item.rec.error_l2_a = err.l2_a;
    item.rec.error_l2_b = err.l2_b;
    if (!local) item.rec.error_h1_a = err.h1_seminorm_a;
    item.rec.m_n = cor.m_n;
    item.rec.adjusted_constraint = cor.adjusted_constraint;
    fill_moments(item.rec, weak_moment_errors(sol, p, lim));
    if (local) item.rec.hole_average_deviation = hole_average_deviation(lim, p, x);

    if (c.spectral) {
        item.rec.lambda_min = coercivity_constant(sys).lambda_min_constrained;
        if (local) item.rec.poincare = poincare_constant(p, g);
    }
    item.limit = lim;
    item.rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return item;
}

double transversal_defect(const LimitSystem& system) {
    const Grid& grid = system.grid();
    const int m = grid.m();
    const auto& l = system.local_block();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<std::function<double(int)>> profiles{
        [&](int r) { return grid.center(grid.index(r, 0)).x2; },
        [&](int r) { return std::sin(3.0 * grid.center(grid.index(r, 0)).x2); },
    };
    std::vector<double> random_rows(m);
    for (double& v : random_rows) v = uni(rng);
    profiles.emplace_back([&](int r) { return random_rows[r]; });
    double worst = 0.0;
    for (const auto& prof : profiles) {
        std::vector<double> field(grid.size()), out(grid.size(), 0.0);
        for (int cell = 0; cell < grid.size(); ++cell) field[cell] = prof(grid.row(cell));
        sparse_apply_add(l, field, out);
        worst = std::max(worst, norm_inf(out));
    }
    return worst;
}

Item run_strip_item(const ExperimentConfig& c, int n) {
    const auto start = std::chrono::steady_clock::now();
    Item item;
    const Partition p = build_partition(strip_spec_for_grid(n, c.strip_grid));
    const Kernel j = c.j.make();
    const Kernel g = c.g.make();
    const auto f = make_source(c.source, p.grid);
    const auto sys = assemble_system(p, j, g, f, assembly_options(c));
    const auto sol = solve_constrained(sys, solver_options(c));
    fill_solve(item.rec, p, sys, sol);
    // The strips split the grid exactly in half, so this X is 1/2 exactly.
    const auto ls = limit_spec(c, LimitKind::Strips, 0.5, sys.source());
    const auto lim = solve_limit(ls, limit_options(c));
    item.rec.limit_residual = limit_residual(lim);
    item.rec.limit_constraint = lim.constraint_value;
    item.rec.transversal_defect = transversal_defect(LimitSystem(ls));
    fill_moments(item.rec, weak_moment_errors(sol, p, lim));
    if (c.spectral && sys.size() <= 4096) item.rec.lambda_min = coercivity_constant(sys).lambda_min_constrained;
    item.limit = lim;
    item.rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return item;
}

Item run_diagnostics_item(const ExperimentConfig& c, int n) {
    const auto start = std::chrono::steady_clock::now();
    Item item;
    const Kernel j = c.j.make();
    const Kernel g = c.g.make();
    for (auto config : {Configuration::LocalInHoles, Configuration::NonlocalInHoles}) {
        const Partition p = build_partition(hole_spec(c, config, n));
        const auto f = make_source(c.source, p.grid);
        const auto sys = assemble_system(p, j, g, f, assembly_options(c));
        const double lam = coercivity_constant(sys).lambda_min_constrained;
        if (config == Configuration::LocalInHoles) {
            const auto sol = solve_constrained(sys, solver_options(c));
            fill_solve(item.rec, p, sys, sol);
            item.rec.lambda_min = lam;
            item.rec.poincare = poincare_constant(p, g);
        } else {
            item.rec.lambda_min_alt = lam;
        }
    }
    item.rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return item;
}

template <class F>
std::vector<Item> run_parallel(const std::vector<int>& ns, int jobs, F&& work) {
    std::vector<Item> out(ns.size());
    std::vector<std::exception_ptr> errors(ns.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < ns.size(); i = next++) {
            try {
                out[i] = work(ns[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(ns.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

std::string fmt(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::vector<double> column(const std::vector<SweepRecord>& recs, double SweepRecord::*field) {
    std::vector<double> out;
    for (const auto& r : recs) out.push_back(r.*field);
    return out;
}

std::string list(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s + "]";
}

double ratio(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / *lo;
}

Verdict decreasing_verdict(const std::string& name, const std::vector<double>& v, bool use_abs = false) {
    std::vector<double> w = v;
    if (use_abs) {
        for (double& x : w) x = std::abs(x);
    }
    return {name, strictly_decreasing(w), list(w)};
}

Verdict first_last_verdict(const std::string& name, const std::vector<double>& v) {
    return {name, v.size() >= 2 && v.back() < v.front(), list(v)};
}

Verdict bound_verdict(const std::string& name, const std::vector<double>& v, double bound) {
    bool ok = true;
    for (double x : v) ok = ok && std::abs(x) <= bound;
    return {name, ok, list(v) + " vs " + fmt(bound)};
}

void sweep_verdicts(ExperimentResult& r) {
    const auto& recs = r.records;
    const auto& c = r.config;
    auto& out = r.verdicts;
    const bool holes = c.scenario == Scenario::LocalInHoles || c.scenario == Scenario::NonlocalInHoles;
    if (holes && recs.size() >= 2) {
        out.push_back(decreasing_verdict("corrector_error_strictly_decreasing", column(recs, &SweepRecord::corrector_error)));
        out.push_back(decreasing_verdict("m_n_strictly_decreasing", column(recs, &SweepRecord::m_n), true));
    }
    if (holes) out.push_back(bound_verdict("adjusted_corrector_constraint", column(recs, &SweepRecord::adjusted_constraint), 1e-10));
    if (c.scenario != Scenario::Diagnostics && c.scenario != Scenario::CellOnly) {
        if (recs.size() >= 2) out.push_back(first_last_verdict("moment_error_decreases", column(recs, &SweepRecord::moment_max)));
        const double fscale = std::max(1.0, std::abs(c.source.amplitude));
        out.push_back(bound_verdict("limit_collocation_residual", column(recs, &SweepRecord::limit_residual), 1e-8 * fscale));
        bool ok = true;
        for (const auto& rec : recs) ok = ok && std::abs(rec.constraint) <= 1e-9;
        out.push_back({"constraint_satisfied", ok, list(column(recs, &SweepRecord::constraint))});
    }
    if (c.scenario == Scenario::LocalInHoles && recs.size() >= 2) {
        out.push_back(decreasing_verdict("hole_average_uniform_convergence", column(recs, &SweepRecord::hole_average_deviation)));
    }
    if (c.scenario == Scenario::Strips) {
        out.push_back(bound_verdict("transversal_block_annihilates_x2_functions", column(recs, &SweepRecord::transversal_defect), 1e-12));
    }
    const bool spectral = c.spectral && (holes || c.scenario == Scenario::Diagnostics);
    if (spectral) {
        const auto lam = column(recs, &SweepRecord::lambda_min);
        const bool pos = std::all_of(lam.begin(), lam.end(), [](double x) { return x > 0.0; });
        out.push_back({"lambda_min_positive_uniform", pos && ratio(lam) <= 3.0, list(lam) + " ratio " + fmt(ratio(lam))});
        if (c.scenario == Scenario::Diagnostics) {
            const auto alt = column(recs, &SweepRecord::lambda_min_alt);
            const bool pa = std::all_of(alt.begin(), alt.end(), [](double x) { return x > 0.0; });
            out.push_back({"lambda_min_positive_uniform_nonlocal_in_holes", pa && ratio(alt) <= 3.0,
                           list(alt) + " ratio " + fmt(ratio(alt))});
        }
        if (c.scenario != Scenario::NonlocalInHoles) {
            const auto cp = column(recs, &SweepRecord::poincare);
            out.push_back({"poincare_uniform", ratio(cp) <= 2.0, list(cp) + " ratio " + fmt(ratio(cp))});
        }
    }
}

void cell_verdicts(ExperimentResult& r) {
    const auto& t = *r.tensor;
    auto& out = r.verdicts;
    const double qn = t.q.norm();
    out.push_back({"tensor_symmetric", std::abs(t.q(0, 1) - t.q(1, 0)) <= 1e-8 * qn,
                   "q12 - q21 = " + fmt(t.q(0, 1) - t.q(1, 0))});
    const auto ev = t.eigenvalues();
    double bound = 1.0;
    if (r.config.hole) {
        PartitionSpec s;
        s.hole = *r.config.hole;
        bound = 1.0 - limit_fractions(s).hole_fraction;
    }
    out.push_back({"tensor_eigenvalues_in_range", ev(0) > 0.0 && ev(1) <= bound,
                   "eigenvalues [" + fmt(ev(0)) + ", " + fmt(ev(1)) + "] vs (0, " + fmt(bound) + "]"});
    out.push_back({"tensor_two_routes_agree", t.defect <= 1e-6, "defect " + fmt(t.defect)});
    if (!r.config.hole) {
        const double d = (t.q - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff();
        out.push_back({"no_hole_tensor_is_identity", d <= 1e-10, "max |q - I| = " + fmt(d)});
    } else if (std::holds_alternative<BallHole>(*r.config.hole)) {
        out.push_back({"disk_tensor_isotropic",
                       std::abs(t.q(0, 1)) <= 1e-3 && std::abs(t.q(0, 0) - t.q(1, 1)) <= 0.02 * t.q(0, 0),
                       "q11 " + fmt(t.q(0, 0)) + ", q22 " + fmt(t.q(1, 1)) + ", q12 " + fmt(t.q(0, 1))});
    }
}

std::uint64_t fnv1a(std::uint64_t h, const std::string& bytes) {
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::LocalInHoles: return "LocalInHoles";
        case Scenario::NonlocalInHoles: return "NonlocalInHoles";
        case Scenario::Strips: return "Strips";
        case Scenario::CellOnly: return "CellOnly";
        case Scenario::Diagnostics: return "Diagnostics";
    }
    return "?";
}

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(doc, kTopKeys, "config");
    ExperimentConfig c;
    if (!doc.contains("scenario")) throw ConfigError("missing 'scenario'");
    c.scenario = scenario_from_string(get_or<std::string>(doc, "scenario", ""));

    if (doc.contains("n_list")) c.n_list = get_or<std::vector<int>>(doc, "n_list", {});
    if (c.scenario != Scenario::CellOnly) {
        if (c.n_list.empty()) throw ConfigError("n-list is empty");
        for (std::size_t i = 1; i < c.n_list.size(); ++i) {
            if (c.n_list[i] <= c.n_list[i - 1]) throw ConfigError("n-list not increasing");
        }
        if (c.n_list.front() < 2) throw ConfigError("n-list entries must be at least 2");
    }

    if (doc.contains("hole")) {
        const auto& h = doc.at("hole");
        if (h.is_string() && h.get<std::string>() == "none") {
            c.hole.reset();
        } else if (h.is_object()) {
            const auto shape = get_or<std::string>(h, "shape", "ball");
            if (shape == "ball") {
                reject_unknown(h, {"shape", "C"}, "hole");
                c.hole = BallHole{get_or<double>(h, "C", 0.5)};
            } else if (shape == "rect") {
                reject_unknown(h, {"shape", "width", "height"}, "hole");
                c.hole = RectHole{get_or<double>(h, "width", 0.5), get_or<double>(h, "height", 0.5)};
            } else {
                throw ConfigError("unknown hole shape '" + shape + "'");
            }
        } else {
            throw ConfigError("hole must be an object or \"none\"");
        }
    }
    if (!c.hole && c.scenario != Scenario::CellOnly && c.scenario != Scenario::Strips) {
        throw ConfigError("scenario " + to_string(c.scenario) + " needs a hole");
    }
    c.q = get_or<int>(doc, "q", c.q);
    c.strip_grid = get_or<int>(doc, "strip_grid", c.strip_grid);
    c.cell_grid = get_or<int>(doc, "cell_grid", c.cell_grid);
    if (c.q < 2 || c.strip_grid < 2 || c.cell_grid < 2) throw ConfigError("grid sizes must be at least 2");

    if (doc.contains("kernels")) {
        const auto& k = doc.at("kernels");
        if (!k.is_object()) throw ConfigError("kernels must be an object");
        reject_unknown(k, {"J", "G"}, "kernels");
        if (k.contains("J")) c.j = parse_kernel(k.at("J"), "kernels.J");
        if (k.contains("G")) c.g = parse_kernel(k.at("G"), "kernels.G");
    }
    if (doc.contains("source")) {
        const auto& s = doc.at("source");
        if (!s.is_object()) throw ConfigError("source must be an object");
        reject_unknown(s, {"family", "amplitude", "bump_radius"}, "source");
        try {
            c.source.family = source_family_from_string(get_or<std::string>(s, "family", "sin1"));
        } catch (const InvalidSpec& e) {
            throw ConfigError(e.what());
        }
        c.source.amplitude = get_or<double>(s, "amplitude", 1.0);
        c.source.bump_radius = get_or<double>(s, "bump_radius", 0.2);
    }
    c.mean_correct = get_or<bool>(doc, "mean_correct", false);
    if (doc.contains("solver")) {
        const auto& s = doc.at("solver");
        if (!s.is_object()) throw ConfigError("solver must be an object");
        reject_unknown(s, {"tol", "max_iter", "limit_tol", "tol_compat"}, "solver");
        c.tol = get_or<double>(s, "tol", c.tol);
        c.max_iter = get_or<int>(s, "max_iter", c.max_iter);
        c.limit_tol = get_or<double>(s, "limit_tol", c.limit_tol);
        c.tol_compat = get_or<double>(s, "tol_compat", c.tol_compat);
        if (!(c.tol > 0.0) || !(c.limit_tol > 0.0) || c.max_iter < 1) throw ConfigError("invalid solver settings");
    }
    c.spectral = get_or<bool>(doc, "spectral", true);
    c.backend = backend_from_string(get_or<std::string>(doc, "backend", "auto"));
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
    return {
        {"scenario", to_string(c.scenario)},
        {"n_list", c.n_list},
        {"hole", hole_json(c.hole)},
        {"q", c.q},
        {"strip_grid", c.strip_grid},
        {"cell_grid", c.cell_grid},
        {"kernels", {{"J", kernel_json(c.j)}, {"G", kernel_json(c.g)}}},
        {"source",
         {{"family", to_string(c.source.family)},
          {"amplitude", c.source.amplitude},
          {"bump_radius", c.source.bump_radius}}},
        {"mean_correct", c.mean_correct},
        {"solver", {{"tol", c.tol}, {"max_iter", c.max_iter}, {"limit_tol", c.limit_tol}, {"tol_compat", c.tol_compat}}},
        {"spectral", c.spectral},
        {"backend", to_string(c.backend)},
    };
}

bool ExperimentResult::all_pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

ExperimentResult run_experiment(const ExperimentConfig& config, int jobs) {
    ExperimentResult r;
    r.config = config;
    std::vector<Item> items;
    switch (config.scenario) {
        case Scenario::CellOnly: {
            const auto cp = solve_cell(config.hole, config.cell_grid, 1e-12, jobs);
            r.tensor = effective_tensor(cp);
            cell_verdicts(r);
            return r;
        }
        case Scenario::LocalInHoles:
            items = run_parallel(config.n_list, jobs, [&](int n) {
                return run_hole_item(config, n, Configuration::LocalInHoles, nullptr, nullptr);
            });
            break;
        case Scenario::NonlocalInHoles: {
            // The n-level holes are rasterized with q cells per period, so
            // the matching cell problem lives on a q x q grid.
            const auto cp = solve_cell(config.hole, config.q);
            r.tensor = effective_tensor(cp);
            items = run_parallel(config.n_list, jobs, [&](int n) {
                return run_hole_item(config, n, Configuration::NonlocalInHoles, &cp, &*r.tensor);
            });
            break;
        }
        case Scenario::Strips:
            items = run_parallel(config.n_list, jobs, [&](int n) { return run_strip_item(config, n); });
            break;
        case Scenario::Diagnostics:
            items = run_parallel(config.n_list, jobs, [&](int n) { return run_diagnostics_item(config, n); });
            break;
    }
    for (auto& item : items) {
        r.records.push_back(item.rec);
        if (item.limit) r.limits.push_back(std::move(*item.limit));
    }
    sweep_verdicts(r);
    return r;
}

std::string sweep_csv(const ExperimentResult& r) {
    std::ostringstream os;
    os << "n,m,dofs,x_fraction,iterations,residual,constraint,energy,corrector_error,error_l2_a,error_l2_b,"
          "error_h1_a,m_n,adjusted_constraint,moment_max";
    for (const auto& t : moment_test_set()) os << ",moment_" << t.name;
    os << ",lambda_min,lambda_min_alt,poincare,hole_average_deviation,limit_residual,limit_constraint,"
          "transversal_defect\n";
    for (const auto& rec : r.records) {
        os << rec.n << ',' << rec.m << ',' << rec.dofs << ',' << fmt(rec.x_fraction) << ',' << rec.iterations << ','
           << fmt(rec.residual) << ',' << fmt(rec.constraint) << ',' << fmt(rec.energy) << ','
           << fmt(rec.corrector_error) << ',' << fmt(rec.error_l2_a) << ',' << fmt(rec.error_l2_b) << ','
           << fmt(rec.error_h1_a) << ',' << fmt(rec.m_n) << ',' << fmt(rec.adjusted_constraint) << ','
           << fmt(rec.moment_max);
        for (std::size_t i = 0; i < moment_test_set().size(); ++i) {
            os << ',' << (i < rec.moments.size() ? fmt(rec.moments[i]) : "");
        }
        os << ',' << fmt(rec.lambda_min) << ',' << fmt(rec.lambda_min_alt) << ',' << fmt(rec.poincare) << ','
           << fmt(rec.hole_average_deviation) << ',' << fmt(rec.limit_residual) << ',' << fmt(rec.limit_constraint)
           << ',' << fmt(rec.transversal_defect) << '\n';
    }
    return os.str();
}

json verdicts_json(const ExperimentResult& r) {
    json list = json::array();
    for (const auto& v : r.verdicts) list.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
    return {{"scenario", to_string(r.config.scenario)}, {"all_pass", r.all_pass()}, {"verdicts", list}};
}

std::string content_hash(const std::vector<std::filesystem::path>& files) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& f : files) {
        h = fnv1a(h, f.filename().string());
        h = fnv1a(h, read_text(f));
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

void write_artifacts(const ExperimentResult& r, const std::filesystem::path& dir, const json& metadata) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> files;
    const auto emit_text = [&](const std::string& name, const std::string& text) {
        write_text(dir / name, text);
        files.push_back(dir / name);
    };
    if (!r.records.empty()) emit_text("sweep.csv", sweep_csv(r));
    emit_text("verdicts.json", verdicts_json(r).dump(2) + "\n");
    if (r.tensor) emit_text("tensor.json", to_json(*r.tensor).dump(2) + "\n");
    for (const auto& lim : r.limits) {
        const int n = r.records[&lim - r.limits.data()].n;
        const std::string stem = "limit_n" + std::to_string(n);
        write_f64(dir / (stem + "_u.f64"), lim.u);
        write_f64(dir / (stem + "_v.f64"), lim.v);
        json header = to_json(lim);
        header["n"] = n;
        header["dtype"] = "<f8";
        header["order"] = "row-major";
        header["shape"] = {lim.grid.m(), lim.grid.m()};
        header["u"] = stem + "_u.f64";
        header["v"] = stem + "_v.f64";
        emit_text(stem + ".json", header.dump(2) + "\n");
        files.push_back(dir / (stem + "_u.f64"));
        files.push_back(dir / (stem + "_v.f64"));
    }
    json artifacts = json::array();
    for (const auto& f : files) artifacts.push_back(f.filename().string());
    const json manifest = {
        {"tool", "homoglab"},
        {"version", "0.1.0"},
        {"libraries",
         {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)}}},
        {"config", to_json(r.config)},
        {"artifacts", artifacts},
        {"all_pass", r.all_pass()},
        {"determinism_hash", content_hash(files)},
        {"metadata", metadata},
    };
    write_json(dir / "manifest.json", manifest);
}

std::string report(const std::filesystem::path& dir) {
    if (!std::filesystem::exists(dir / "manifest.json")) throw ConfigError("missing manifest");
    json manifest;
    try {
        manifest = json::parse(read_text(dir / "manifest.json"));
    } catch (const json::parse_error&) {
        throw ConfigError("unreadable manifest");
    }
    std::ostringstream os;
    const std::string scenario = manifest.at("config").at("scenario").get<std::string>();
    os << "homoglab report: " << scenario << "\n";
    os << "determinism hash: " << manifest.value("determinism_hash", std::string("?")) << "\n\n";

    if (std::filesystem::exists(dir / "sweep.csv")) {
        std::istringstream csv(read_text(dir / "sweep.csv"));
        std::string line;
        std::getline(csv, line);
        const auto header = split(line, ',');
        std::vector<std::vector<std::string>> rows;
        while (std::getline(csv, line)) {
            if (!line.empty()) rows.push_back(split(line, ','));
        }
        const std::vector<std::string> shown{"n",          "m",        "corrector_error", "m_n", "moment_max",
                                             "lambda_min", "poincare", "limit_residual"};
        std::vector<std::size_t> idx;
        for (const auto& name : shown) {
            for (std::size_t i = 0; i < header.size(); ++i) {
                if (header[i] != name) continue;
                const bool used = std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return !r[i].empty(); });
                if (used) idx.push_back(i);
            }
        }
        for (std::size_t i : idx) os << std::left << std::setw(i < 2 ? 6 : 20) << header[i];
        os << "\n";
        for (const auto& row : rows) {
            for (std::size_t i : idx) os << std::left << std::setw(i < 2 ? 6 : 20) << row[i];
            os << "\n";
        }
        os << "\n";
        // Plot-ready two-column files: n against every populated column.
        for (std::size_t i = 1; i < header.size(); ++i) {
            const bool used = std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return !r[i].empty(); });
            if (!used) continue;
            std::string data = "# n " + header[i] + "\n";
            for (const auto& row : rows) {
                if (!row[i].empty()) data += row[0] + " " + row[i] + "\n";
            }
            write_text(dir / ("plot_" + header[i] + ".dat"), data);
        }
    }
    if (std::filesystem::exists(dir / "tensor.json")) {
        const json t = json::parse(read_text(dir / "tensor.json"));
        os << "effective tensor: " << t.at("q").dump() << "  theta " << t.at("theta").dump() << "  defect "
           << t.at("defect").dump() << "\n\n";
    }
    if (std::filesystem::exists(dir / "verdicts.json")) {
        const json v = json::parse(read_text(dir / "verdicts.json"));
        os << "verdicts:\n";
        for (const auto& item : v.at("verdicts")) {
            os << "  " << (item.at("pass").get<bool>() ? "PASS" : "FAIL") << "  " << item.at("name").get<std::string>()
               << "  " << item.at("detail").get<std::string>() << "\n";
        }
        os << "overall: " << (v.at("all_pass").get<bool>() ? "PASS" : "FAIL") << "\n";
    }
    const std::string text = os.str();
    write_text(dir / "summary.txt", text);
    return text;
}

}  // namespace homoglab
