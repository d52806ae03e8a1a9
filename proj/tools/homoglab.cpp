// homoglab command line: run a config, summarize an artifact dir, or solve a
// single cell problem.

#include <chrono>
#include <ctime>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "homoglab/cell.hpp"
#include "homoglab/errors.hpp"
#include "homoglab/experiment.hpp"
#include "homoglab/io.hpp"

using nlohmann::json;
using namespace homoglab;

namespace {

enum Exit { kOk = 0, kVerdictFail = 1, kConfigError = 2, kSolverFailure = 3 };

int fail(int code, const std::string& kind, const std::string& message, json extra = json::object()) {
    json err = {{"error", kind}, {"message", message}, {"exit_code", code}};
    err.update(extra);
    std::cerr << err.dump() << "\n";
    return code;
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

/// "none", "C=0.5" or "rect:W=0.4,H=0.6"
std::optional<HoleShape> parse_hole(const std::string& text) {
    if (text == "none") return std::nullopt;
    if (text.rfind("C=", 0) == 0) return BallHole{std::stod(text.substr(2))};
    if (text.rfind("rect:", 0) == 0) {
        RectHole r{0.5, 0.5};
        std::istringstream in(text.substr(5));
        std::string part;
        while (std::getline(in, part, ',')) {
            if (part.rfind("W=", 0) == 0) {
                r.width_fraction = std::stod(part.substr(2));
            } else if (part.rfind("H=", 0) == 0) {
                r.height_fraction = std::stod(part.substr(2));
            } else {
                throw ConfigError("bad rect hole field '" + part + "'");
            }
        }
        return r;
    }
    throw ConfigError("bad hole '" + text + "' (expected none, C=<c> or rect:W=<w>,H=<h>)");
}

int cmd_run(const std::string& config_path, int jobs, const std::string& out_dir) {
    ExperimentConfig config;
    try {
        config = load_config(config_path);
    } catch (const ConfigError& e) {
        return fail(kConfigError, "ConfigError", e.what());
    }
    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentResult result;
    try {
        result = run_experiment(config, jobs);
    } catch (const InvalidSpec& e) {
        return fail(kConfigError, "InvalidSpec", e.what());
    } catch (const CompatibilityViolation& e) {
        return fail(kConfigError, "CompatibilityViolation", e.what(), {{"integral", e.integral()}});
    } catch (const DisconnectedRegion& e) {
        return fail(kConfigError, "DisconnectedRegion", e.what());
    } catch (const NonConvergence& e) {
        return fail(kSolverFailure, "NonConvergence", e.what(),
                    {{"iterations", e.iterations()}, {"residual_history", e.residual_history()}});
    }
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json timings = json::array();
    for (const auto& r : result.records) timings.push_back({{"n", r.n}, {"seconds", r.seconds}});
    const json metadata = {{"started", started},
                           {"finished", utc_now()},
                           {"jobs", jobs},
                           {"total_seconds", total},
                           {"timings", timings}};
    const std::filesystem::path dir = out_dir.empty() ? std::filesystem::path("out") / to_string(config.scenario)
                                                      : std::filesystem::path(out_dir);
    write_artifacts(result, dir, metadata);

    for (const auto& v : result.verdicts) {
        std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << "  " << v.detail << "\n";
    }
    std::cout << "artifacts: " << dir.string() << "\n";
    if (!result.all_pass()) {
        json failed = json::array();
        for (const auto& v : result.verdicts) {
            if (!v.pass) failed.push_back(v.name);
        }
        return fail(kVerdictFail, "VerdictFailure", "one or more verdicts failed", {{"failed", failed}});
    }
    return kOk;
}

int cmd_report(const std::string& dir) {
    try {
        std::cout << report(dir);
    } catch (const ConfigError& e) {
        return fail(kConfigError, "ConfigError", e.what());
    } catch (const json::exception& e) {
        return fail(kConfigError, "ConfigError", std::string("malformed artifact: ") + e.what());
    }
    return kOk;
}

int cmd_cell(const std::string& hole_text, int grid, const std::string& out_dir) {
    try {
        const auto hole = parse_hole(hole_text);
        const auto cp = solve_cell(hole, grid, 1e-12, 2);
        const json t = to_json(effective_tensor(cp));
        if (!out_dir.empty()) {
            std::filesystem::create_directories(out_dir);
            write_json(std::filesystem::path(out_dir) / "tensor.json", t);
        }
        std::cout << t.dump(2) << "\n";
    } catch (const ConfigError& e) {
        return fail(kConfigError, "ConfigError", e.what());
    } catch (const std::invalid_argument& e) {
        return fail(kConfigError, "InvalidSpec", e.what());
    } catch (const DisconnectedRegion& e) {
        return fail(kConfigError, "DisconnectedRegion", e.what());
    } catch (const NonConvergence& e) {
        return fail(kSolverFailure, "NonConvergence", e.what(), {{"iterations", e.iterations()}});
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"homoglab: local/nonlocal homogenization experiments"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    auto* run = app.add_subcommand("run", "run an experiment config and write artifacts");
    run->add_option("config", config_path, "config JSON")->required();
    run->add_option("--jobs", jobs, "concurrent sweep items")->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "artifact directory (default out/<scenario>)");

    std::string report_dir;
    auto* rep = app.add_subcommand("report", "summarize an artifact directory");
    rep->add_option("dir", report_dir, "artifact directory")->required();

    std::string hole = "C=0.5", cell_out;
    int grid = 128;
    auto* cell = app.add_subcommand("cell", "solve the cell problem and print the effective tensor");
    cell->add_option("--hole", hole, "none, C=<c> or rect:W=<w>,H=<h>");
    cell->add_option("--grid", grid, "cells per side")->check(CLI::Range(2, 4096));
    cell->add_option("--out", cell_out, "also write tensor.json here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }
    if (*run) return cmd_run(config_path, jobs, out_dir);
    if (*rep) return cmd_report(report_dir);
    return cmd_cell(hole, grid, cell_out);
}
