#pragma once

// Command line front end: run, sweep, verify and feasibility subcommands.
// cli_main takes explicit streams so the whole surface is testable in-process.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cavent/emit.hpp"
#include "cavent/entangle.hpp"
#include "cavent/parse.hpp"
#include "cavent/selfcheck.hpp"

namespace cavent {

namespace detail {

inline std::string fixed9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    return buf;
}

inline std::string shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline void print_parse_errors(std::ostream& err, const std::string& file,
                               const std::vector<ParseError>& errors) {
    for (const ParseError& e : errors) {
        err << file << ":" << e.span.line << ":" << e.span.col_begin
            << ": error: " << e.message;
        if (!e.token.empty()) err << " ('" << e.token << "')";
        err << "\n";
    }
}

inline bool write_output(const std::string& path, const std::string& content,
                         std::ostream& out, std::ostream& err) {
    if (path == "-") {
        out << content;
        return true;
    }
    std::ofstream of(path, std::ios::binary);
    if (!of) {
        err << "error: cannot write '" << path << "'\n";
        return false;
    }
    of << content;
    return true;
}

} // namespace detail

inline int cli_main(const std::vector<std::string>& args, std::ostream& out,
                    std::ostream& err) {
    CLI::App app{"cavity-mode entanglement protocol simulator"};
    app.require_subcommand(1);

    std::string file;
    std::vector<std::string> target_names;
    double phi = 0.0;
    std::string json_path;
    std::uint64_t seed = 0;

    CLI::App* run = app.add_subcommand("run", "execute a protocol file");
    run->add_option("file", file, "protocol file")->required();
    run->add_option("--target", target_names,
                    "fidelity target: psi_plus, psi_minus, phi_plus, phi_minus");
    run->add_option("--phi", phi, "relative phase for the psi targets");
    run->add_option("--json", json_path, "write the JSON result here ('-' = stdout)");
    CLI::Option* seed_opt =
        run->add_option("--seed", seed, "sample measurement outcomes with this seed");

    std::string param_path;
    double from = 0.0, to = 0.0;
    int steps = 0;
    std::string csv_path;

    CLI::App* sweep = app.add_subcommand("sweep", "sweep one parameter of a protocol");
    sweep->add_option("file", file, "protocol file")->required();
    sweep->add_option("--param", param_path,
                      "parameter path, e.g. step.1.t or coupling.A.g")
        ->required();
    sweep->add_option("--from", from, "range start")->required();
    sweep->add_option("--to", to, "range end")->required();
    sweep->add_option("--steps", steps, "grid points")->required();
    sweep->add_option("--csv", csv_path, "write the CSV here ('-' = stdout)");
    sweep->add_option("--target", target_names, "fidelity column target");
    sweep->add_option("--phi", phi, "relative phase for the psi targets");

    CLI::App* verify = app.add_subcommand("verify", "run the built-in check suite");

    std::string params_path;
    std::string plan_name = "bell";
    int plan_modes = 2;
    int plan_m = 1, plan_n = 1;

    CLI::App* feas = app.add_subcommand("feasibility", "SI timing budget report");
    feas->add_option("--params", params_path, "key=value parameter file");
    feas->add_option("--plan", plan_name, "timing plan: bell or ghz")
        ->check(CLI::IsMember({"bell", "ghz"}));
    feas->add_option("--modes", plan_modes, "chain length for the ghz plan");
    feas->add_option("--m", plan_m, "half-cycle multiplier for the first cavity");
    feas->add_option("--n", plan_n, "half-cycle multiplier for the second cavity");

    std::vector<const char*> argv;
    argv.push_back("cavent");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) {
            auto text = detail::read_file(file);
            if (!text) {
                err << "error: cannot open '" << file << "'\n";
                return 1;
            }
            ParseResult parsed = parse_protocol(*text);
            if (!parsed.ok()) {
                detail::print_parse_errors(err, file, parsed.errors);
                return 1;
            }
            const Protocol& p = *parsed.protocol;
            RunOptions opts;
            opts.sample = seed_opt->count() > 0;
            opts.seed = seed;
            SimulationResult result = run_protocol(p, opts);

            std::vector<std::pair<std::string, double>> fidelities;
            for (const std::string& name : target_names) {
                TargetState t = named_target(
                    name, static_cast<int>(p.system().modes.size()), phi);
                fidelities.emplace_back(t.name, fidelity(result.final_state, t));
            }
            std::optional<double> ghz_phase;
            if (p.system().modes.size() >= 2) {
                try {
                    ghz_phase = ghz_relative_phase(result.final_state);
                } catch (const Error&) {
                }
            }

            out << "branch probability: " << detail::fixed9(result.branch_probability)
                << "\n";
            out << "final state:\n";
            const Basis& b = result.final_state.basis();
            for (int i = 0; i < b.dim(); ++i) {
                Complex c = result.final_state.amplitudes()[i];
                if (std::abs(c) <= 1e-12) continue;
                out << "  " << b.label(i) << "  " << detail::fixed9(c.real()) << " "
                    << (c.imag() < 0 ? "- " : "+ ")
                    << detail::fixed9(std::abs(c.imag())) << "i\n";
            }
            for (const auto& [name, value] : fidelities)
                out << "fidelity " << name << ": " << detail::fixed9(value) << "\n";
            if (ghz_phase)
                out << "relative phase: " << detail::fixed9(*ghz_phase) << "\n";
            if (!json_path.empty()) {
                std::string json = emit_result_json(result, fidelities, ghz_phase);
                if (!detail::write_output(json_path, json, out, err)) return 1;
            }
            return 0;
        }

        if (sweep->parsed()) {
            auto text = detail::read_file(file);
            if (!text) {
                err << "error: cannot open '" << file << "'\n";
                return 1;
            }
            ParseResult parsed = parse_protocol(*text);
            if (!parsed.ok()) {
                detail::print_parse_errors(err, file, parsed.errors);
                return 1;
            }
            SweepConfig cfg;
            cfg.path = param_path;
            cfg.from = from;
            cfg.to = to;
            cfg.steps = steps;
            for (const std::string& name : target_names)
                cfg.targets.push_back(named_target(
                    name, static_cast<int>(parsed.protocol->system().modes.size()), phi));
            std::string csv = run_sweep(*parsed.protocol, cfg);
            if (!detail::write_output(csv_path.empty() ? "-" : csv_path, csv, out, err))
                return 1;
            return 0;
        }

        if (verify->parsed()) {
            std::vector<CheckResult> results = run_self_checks();
            int passed = 0;
            for (const CheckResult& r : results) {
                out << "check " << r.id << " " << r.name << ": "
                    << (r.pass ? "pass" : "FAIL");
                if (!r.detail.empty()) out << " (" << r.detail << ")";
                out << "\n";
                if (r.pass) ++passed;
            }
            out << passed << "/" << results.size() << " checks passed\n";
            return passed == static_cast<int>(results.size()) ? 0 : 2;
        }

        if (feas->parsed()) {
            FeasibilityParams params;
            if (!params_path.empty()) {
                auto text = detail::read_file(params_path);
                if (!text) {
                    err << "error: cannot open '" << params_path << "'\n";
                    return 1;
                }
                FeasibilityParseResult parsed = parse_feasibility_params(*text);
                if (!parsed.ok()) {
                    detail::print_parse_errors(err, params_path, parsed.errors);
                    return 1;
                }
                params = *parsed.params;
            }
            TimingPlan plan = plan_name == "ghz"
                                  ? ghz_timing_plan(params, plan_modes)
                                  : bell_timing_plan(params, plan_m, plan_n);
            FeasibilityReport report = check_budget(params, plan);
            out << "transit time: " << detail::shortest(report.transit) << " s\n";
            out << "plan:\n";
            for (const TimingEntry& e : report.plan.entries)
                out << "  " << e.label << ": " << detail::shortest(e.duration) << " s\n";
            out << "total: " << detail::shortest(report.total) << " s\n";
            out << "transit margin: " << detail::fixed9(report.transit_margin) << "x\n";
            out << "atomic lifetime margin: " << detail::fixed9(report.atomic_margin)
                << "x\n";
            out << "cavity lifetime margin: " << detail::fixed9(report.cavity_margin)
                << "x\n";
            out << "verdict: " << (report.pass ? "pass" : "fail") << "\n";
            for (const std::string& reason : report.reasons)
                out << "  " << reason << "\n";
            return 0;
        }
    } catch (const ProtocolError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace cavent
