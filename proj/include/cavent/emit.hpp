#pragma once

// Result emitters: deterministic JSON for single runs, CSV for parameter
// sweeps.  Sweep grid points run concurrently; output order is grid order.

#include <future>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cavent/entangle.hpp"
#include "cavent/parse.hpp"
#include "cavent/protocol.hpp"

namespace cavent {

using json = nlohmann::ordered_json;

inline json result_to_json(const SimulationResult& r,
                           const std::vector<std::pair<std::string, double>>& fidelities = {},
                           std::optional<double> ghz_phase = std::nullopt) {
    json j;
    j["schema_version"] = 1;
    const Basis& b = r.final_state.basis();
    json labels = json::array();
    for (int i = 0; i < b.dim(); ++i) labels.push_back(b.label(i));
    j["basis"] = std::move(labels);
    json amps = json::array();
    for (int i = 0; i < b.dim(); ++i) {
        const Complex& c = r.final_state.amplitudes()[i];
        amps.push_back(json::array({c.real(), c.imag()}));
    }
    j["final_amplitudes"] = std::move(amps);
    j["branch_probability"] = r.branch_probability;
    if (r.zero_branch) j["zero_branch"] = true;
    json trace = json::array();
    for (const TraceEntry& e : r.trace) {
        json t;
        t["step"] = e.step;
        t["kind"] = e.kind;
        t["duration"] = e.duration;
        t["outcome_probability"] = e.outcome_probability;
        if (e.outcome_hit) t["outcome"] = *e.outcome_hit ? "hit" : "miss";
        trace.push_back(std::move(t));
    }
    j["trace"] = std::move(trace);
    if (!fidelities.empty()) {
        json f;
        for (const auto& [name, value] : fidelities) f[name] = value;
        j["fidelities"] = std::move(f);
    }
    if (ghz_phase) j["ghz_phase"] = *ghz_phase;
    return j;
}

inline std::string emit_result_json(const SimulationResult& r,
                                    const std::vector<std::pair<std::string, double>>&
                                        fidelities = {},
                                    std::optional<double> ghz_phase = std::nullopt) {
    return result_to_json(r, fidelities, ghz_phase)
               .dump(2, ' ', false, json::error_handler_t::replace) +
           "\n";
}

// ---------------------------------------------------------------------------
// Parameter sweeps

struct SweepConfig {
    std::string path; // step.<k>.t | step.<k>.phi | step.<k>.omega |
                      // step.<k>.phase | coupling.<mode>.g
    double from = 0.0;
    double to = 0.0;
    int steps = 0;
    std::vector<TargetState> targets; // one fidelity column each
};

namespace detail {

// A copy of the base protocol with the swept parameter set to `value`.
inline Protocol protocol_at(const Protocol& base, const std::string& path, double value) {
    const std::string step_prefix = "step.";
    const std::string coupling_prefix = "coupling.";
    const std::string g_suffix = ".g";

    if (path.rfind(step_prefix, 0) == 0) {
        std::string rest = path.substr(step_prefix.size());
        std::size_t dot = rest.find('.');
        if (dot == std::string::npos)
            throw Error("sweep path '" + path + "' is missing the attribute");
        auto k = parse_int(rest.substr(0, dot));
        std::string attr = rest.substr(dot + 1);
        if (!k || *k < 0 || *k >= static_cast<long>(base.steps.size()))
            throw Error("sweep path '" + path + "' addresses no step");
        Protocol p = base;
        ProtocolStep& step = p.steps[static_cast<std::size_t>(*k)];
        if (attr == "t") {
            if (value < 0.0) throw Error("swept duration is negative");
            if (auto* i = std::get_if<InteractStep>(&step)) {
                i->duration = value;
                i->timing = std::nullopt;
            } else if (auto* pl = std::get_if<PulseStep>(&step)) {
                pl->duration = value;
                pl->timing = std::nullopt;
            } else {
                throw Error("step " + std::to_string(*k) + " has no duration");
            }
        } else if (attr == "phi") {
            auto* r = std::get_if<RamseyStep>(&step);
            if (!r) throw Error("step " + std::to_string(*k) + " has no phase phi");
            r->phi = value;
        } else if (attr == "omega") {
            auto* pl = std::get_if<PulseStep>(&step);
            if (!pl) throw Error("step " + std::to_string(*k) + " has no drive");
            if (value <= 0.0) throw Error("swept omega must be > 0");
            pl->drive.rabi = value;
            if (pl->timing) pl->duration = symbolic_duration(*pl->timing, value);
        } else if (attr == "phase") {
            auto* pl = std::get_if<PulseStep>(&step);
            if (!pl) throw Error("step " + std::to_string(*k) + " has no drive");
            pl->drive.phase = value;
        } else {
            throw Error("unknown sweep attribute '" + attr + "'");
        }
        return p;
    }

    if (path.rfind(coupling_prefix, 0) == 0 && path.size() > coupling_prefix.size() +
                                                                 g_suffix.size() &&
        path.compare(path.size() - g_suffix.size(), g_suffix.size(), g_suffix) == 0) {
        ModeId mode = path.substr(coupling_prefix.size(),
                                  path.size() - coupling_prefix.size() - g_suffix.size());
        if (value <= 0.0) throw Error("swept coupling rate must be > 0");
        SystemSpec spec = base.system();
        auto on_mode = spec.couplings_on_mode(mode);
        if (on_mode.empty())
            throw Error("sweep path '" + path + "' addresses no coupling");
        if (on_mode.size() > 1)
            throw Error("sweep path '" + path + "' is ambiguous: mode has " +
                        std::to_string(on_mode.size()) + " couplings");
        spec.couplings[on_mode[0]].g = value;
        BasisPtr basis = make_basis(spec);
        Protocol p{basis, StateVector::unchecked(basis, base.initial.amplitudes()),
                   base.steps};
        refresh_durations(p);
        return p;
    }

    throw Error("unresolvable sweep path '" + path + "'");
}

} // namespace detail

inline std::string run_sweep(const Protocol& base, const SweepConfig& cfg) {
    if (cfg.steps < 2) throw Error("sweep needs at least 2 grid points");
    if (!(cfg.from < cfg.to)) throw Error("sweep range must have from < to");
    for (const TargetState& t : cfg.targets)
        if (t.n_modes != static_cast<int>(base.system().modes.size()))
            throw Error("target '" + t.name + "' does not match the register size");

    const int n = cfg.steps;
    std::vector<std::string> rows(static_cast<std::size_t>(n));
    auto compute = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            double value = cfg.from + (cfg.to - cfg.from) * i / (n - 1);
            Protocol p = detail::protocol_at(base, cfg.path, value);
            RunOptions opts;
            opts.tolerate_zero_branch = true;
            SimulationResult r = run_protocol(p, opts);
            std::string row = detail::format_double(value) + "," +
                              detail::format_double(r.branch_probability);
            for (const TargetState& t : cfg.targets) {
                double f = r.zero_branch ? 0.0 : fidelity(r.final_state, t);
                row += "," + detail::format_double(f);
            }
            rows[static_cast<std::size_t>(i)] = std::move(row);
        }
    };

    unsigned workers = std::min(std::thread::hardware_concurrency(), 8u);
    if (workers < 2 || n < 16) {
        compute(0, n);
    } else {
        std::vector<std::future<void>> futures;
        int chunk = (n + static_cast<int>(workers) - 1) / static_cast<int>(workers);
        for (int begin = 0; begin < n; begin += chunk)
            futures.push_back(std::async(std::launch::async, compute, begin,
                                         std::min(begin + chunk, n)));
        for (auto& f : futures) f.get();
    }

    std::string csv = cfg.path + ",branch_probability";
    for (const TargetState& t : cfg.targets) csv += ",fidelity_" + t.name;
    csv += "\n";
    for (const std::string& row : rows) {
        csv += row;
        csv += "\n";
    }
    return csv;
}

} // namespace cavent
