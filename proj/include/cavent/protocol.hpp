#pragma once

// Protocol step machine: ordered sequences of preparation, cavity
// interaction, laser pulse and atomic measurement steps, the interaction-time
// solvers behind them, and canned builders for the Bell and GHZ sequences.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cavent/dynamics.hpp"
#include "cavent/errors.hpp"
#include "cavent/hilbert.hpp"

namespace cavent {

inline constexpr double pi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Interaction-time solvers

// m pi / (2g): odd half-Rabi-cycle, full population transfer up to sign.
inline double half_rabi_time(double g, int m) {
    if (g <= 0.0) throw Error("half_rabi_time: rate must be > 0");
    if (m < 1 || m % 2 == 0)
        throw Error("half_rabi_time: m must be an odd integer >= 1, got " +
                    std::to_string(m));
    return m * pi / (2.0 * g);
}

enum class QuarterPolicy {
    strict,    // m = 1 mod 4 only: cos(m pi/4) = sin(m pi/4) = +1/sqrt(2)
    permissive // any odd m; cos(m pi/4) may be negative, the sign is the caller's
};

// m pi / (4g): equal-weight beam splitter between the coupled pair.
inline double quarter_rabi_time(double g, int m,
                                QuarterPolicy policy = QuarterPolicy::strict) {
    if (g <= 0.0) throw Error("quarter_rabi_time: rate must be > 0");
    if (m < 1 || m % 2 == 0)
        throw Error("quarter_rabi_time: m must be an odd integer >= 1, got " +
                    std::to_string(m));
    if (policy == QuarterPolicy::strict && m % 4 != 1)
        throw Error("quarter_rabi_time: m = " + std::to_string(m) +
                    " flips the branch sign (cos(m pi/4) < 0); use m = 1 mod 4 "
                    "or the permissive policy");
    return m * pi / (4.0 * g);
}

// pi/Omega: full population transfer under a classical drive.
inline double pi_pulse_time(double omega) {
    if (omega <= 0.0) throw Error("pi_pulse_time: rate must be > 0");
    return pi / omega;
}

// pi/(2 Omega): equal-weight superposition under a classical drive.
inline double half_pi_pulse_time(double omega) {
    if (omega <= 0.0) throw Error("half_pi_pulse_time: rate must be > 0");
    return pi / (2.0 * omega);
}

// Times t in (0, max_m*pi/(2 min(g1,g2))] with sin(g1 t) = sin(g2 t) and the
// ground-state detection probability at a local maximum.  May be empty: for
// incommensurate or even/odd rate ratios no such time exists.
inline std::vector<double> equal_amplitude_times(double g1, double g2, int max_m) {
    if (g1 <= 0.0 || g2 <= 0.0) throw Error("equal_amplitude_times: rates must be > 0");
    std::vector<double> out;
    if (max_m < 1) return out;
    const double t_max = max_m * pi / (2.0 * std::min(g1, g2));
    const double t_eps = 1e-12 * t_max;

    if (std::abs(g1 - g2) <= 1e-12 * std::max(g1, g2)) {
        // sin(g1 t) = sin(g2 t) everywhere; maxima of sin^2 at odd m pi/(2g)
        for (int m = 1;; m += 2) {
            double t = m * pi / (2.0 * g1);
            if (t > t_max + t_eps) break;
            out.push_back(t);
        }
        return out;
    }

    // Equality solutions fall in two families:
    //   g1 t = g2 t + 2 pi k      ->  t = 2 pi k / |g1 - g2|
    //   g1 t = pi - g2 t + 2 pi k ->  t = (2k+1) pi / (g1 + g2)
    std::vector<double> candidates;
    const double diff = std::abs(g1 - g2);
    for (int k = 1;; ++k) {
        double t = 2.0 * pi * k / diff;
        if (t > t_max + t_eps) break;
        candidates.push_back(t);
    }
    for (int k = 0;; ++k) {
        double t = (2 * k + 1) * pi / (g1 + g2);
        if (t > t_max + t_eps) break;
        candidates.push_back(t);
    }
    std::sort(candidates.begin(), candidates.end());

    const double d1_scale = 1e-7 * (g1 + g2);
    const double d2_scale = 1e-7 * (g1 * g1 + g2 * g2);
    for (double t : candidates) {
        if (!out.empty() && std::abs(t - out.back()) < 1e-9 * t_max) continue;
        double s1 = std::sin(g1 * t), s2 = std::sin(g2 * t);
        if (std::abs(s1) < 1e-9) continue; // probability zero, a minimum
        double d1 = g1 * s1 * std::cos(g1 * t) + g2 * s2 * std::cos(g2 * t);
        double d2 = g1 * g1 * std::cos(2.0 * g1 * t) + g2 * g2 * std::cos(2.0 * g2 * t);
        if (std::abs(d1) <= d1_scale && d2 < -d2_scale) out.push_back(t);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Timing plans: durations with the rule that generated them

struct TimingEntry {
    enum class Rule { half_rabi, quarter_rabi, pi_pulse, half_pi_pulse, literal };

    std::string label;
    Rule rule = Rule::literal;
    int m = 1;          // multiplier for the rabi rules
    double rate = 0.0;  // g or Omega backing the rule
    double duration = 0.0;

    static TimingEntry half_rabi(std::string label, double g, int m = 1) {
        return {std::move(label), Rule::half_rabi, m, g, half_rabi_time(g, m)};
    }
    static TimingEntry quarter_rabi(std::string label, double g, int m = 1) {
        return {std::move(label), Rule::quarter_rabi, m, g, quarter_rabi_time(g, m)};
    }
    static TimingEntry pi_pulse(std::string label, double omega) {
        return {std::move(label), Rule::pi_pulse, 1, omega, pi_pulse_time(omega)};
    }
    static TimingEntry literal(std::string label, double duration) {
        return {std::move(label), Rule::literal, 1, 0.0, duration};
    }

    double recomputed() const {
        switch (rule) {
            case Rule::half_rabi: return half_rabi_time(rate, m);
            case Rule::quarter_rabi: return quarter_rabi_time(rate, m, QuarterPolicy::permissive);
            case Rule::pi_pulse: return pi_pulse_time(rate);
            case Rule::half_pi_pulse: return half_pi_pulse_time(rate);
            case Rule::literal: return duration;
        }
        return duration;
    }
};

struct TimingPlan {
    std::vector<TimingEntry> entries;

    double total() const {
        double t = 0.0;
        for (const TimingEntry& e : entries) t += e.duration;
        return t;
    }

    void validate() const {
        for (const TimingEntry& e : entries)
            if (e.duration != e.recomputed())
                throw Error("timing entry '" + e.label +
                            "' does not satisfy its generating rule");
    }
};

// A duration that tracks the rule it came from, so it can be re-resolved
// when the rate it references changes (parameter sweeps over g or omega).
struct SymbolicTime {
    TimingEntry::Rule rule = TimingEntry::Rule::literal;
    int m = 1;
};

inline double symbolic_duration(const SymbolicTime& sym, double rate) {
    switch (sym.rule) {
        case TimingEntry::Rule::half_rabi: return half_rabi_time(rate, sym.m);
        case TimingEntry::Rule::quarter_rabi:
            return quarter_rabi_time(rate, sym.m, QuarterPolicy::permissive);
        case TimingEntry::Rule::pi_pulse: return pi_pulse_time(rate);
        case TimingEntry::Rule::half_pi_pulse: return half_pi_pulse_time(rate);
        case TimingEntry::Rule::literal: break;
    }
    throw Error("literal durations carry no rule to resolve");
}

// ---------------------------------------------------------------------------
// Protocol steps

// Instantaneous Ramsey rotation |l1> -> (|l1> + e^{i phi}|l2>)/sqrt(2).
struct RamseyStep {
    LevelId level1;
    LevelId level2;
    double phi = 0.0;
};

// Stark-switched cavity interaction: only the couplings on `modes` are active.
struct InteractStep {
    std::vector<ModeId> modes;
    double duration = 0.0;
    std::optional<SymbolicTime> timing; // engaged when duration is rule-derived
};

struct PulseStep {
    DriveTerm drive;
    double duration = 0.0;
    std::optional<SymbolicTime> timing;
};

struct MeasureStep {
    enum class Keep { hit, miss };
    std::vector<std::pair<LevelId, Complex>> projector; // normalized atomic state
    Keep keep = Keep::hit;
};

using ProtocolStep = std::variant<RamseyStep, InteractStep, PulseStep, MeasureStep>;

inline const char* step_kind(const ProtocolStep& step) {
    switch (step.index()) {
        case 0: return "ramsey";
        case 1: return "interact";
        case 2: return "pulse";
        case 3: return "measure";
    }
    return "?";
}

inline double step_duration(const ProtocolStep& step) {
    if (const auto* i = std::get_if<InteractStep>(&step)) return i->duration;
    if (const auto* p = std::get_if<PulseStep>(&step)) return p->duration;
    return 0.0;
}

struct Protocol {
    BasisPtr basis;
    StateVector initial;
    std::vector<ProtocolStep> steps;

    const SystemSpec& system() const { return basis->spec(); }
};

// The single coupling rate a symbolic interact duration resolves against.
inline double unique_interact_rate(const SystemSpec& spec, const InteractStep& step) {
    std::vector<std::size_t> active;
    for (const ModeId& m : step.modes) {
        auto on_mode = spec.couplings_on_mode(m);
        active.insert(active.end(), on_mode.begin(), on_mode.end());
    }
    std::sort(active.begin(), active.end());
    active.erase(std::unique(active.begin(), active.end()), active.end());
    if (active.empty())
        throw Error("no coupling to resolve the time expression against");
    if (active.size() > 1)
        throw Error("ambiguous rate: the step activates " +
                    std::to_string(active.size()) + " couplings");
    return spec.couplings[active[0]].g;
}

// Recomputes every rule-derived duration against the current spec rates.
inline void refresh_durations(Protocol& p) {
    const SystemSpec& spec = p.system();
    for (ProtocolStep& step : p.steps) {
        if (auto* i = std::get_if<InteractStep>(&step)) {
            if (i->timing) i->duration = symbolic_duration(*i->timing,
                                                           unique_interact_rate(spec, *i));
        } else if (auto* pl = std::get_if<PulseStep>(&step)) {
            if (pl->timing) pl->duration = symbolic_duration(*pl->timing, pl->drive.rabi);
        }
    }
}

// ---------------------------------------------------------------------------
// Step semantics

namespace detail {

inline void validate_measure(const MeasureStep& m, const SystemSpec& spec, int step_index) {
    if (m.projector.empty()) throw ProtocolError(step_index, "empty measurement projector");
    double norm_sq = 0.0;
    for (const auto& [level, coeff] : m.projector) {
        if (spec.level_index(level) < 0)
            throw ProtocolError(step_index, "measurement on unknown level '" + level + "'");
        norm_sq += std::norm(coeff);
    }
    if (std::abs(norm_sq - 1.0) > 1e-9)
        throw ProtocolError(step_index,
                            "measurement projector is not normalized (|c|^2 = " +
                                std::to_string(norm_sq) + ")");
}

} // namespace detail

// Probability of the `hit` outcome of an atomic measurement, without applying it.
inline double measure_probability(const StateVector& state, const MeasureStep& m,
                                  int step_index = -1) {
    detail::validate_measure(m, state.basis().spec(), step_index);
    const Basis& b = state.basis();
    const SystemSpec& spec = b.spec();
    std::vector<Complex> coeff(spec.atom.levels.size(), Complex(0.0, 0.0));
    double cn = 0.0;
    for (const auto& [level, c] : m.projector) {
        coeff[static_cast<std::size_t>(spec.level_index(level))] += c;
        cn += std::norm(c);
    }
    cn = std::sqrt(cn);
    const int d = b.dim();
    const int block = d / static_cast<int>(spec.atom.levels.size());
    double p = 0.0;
    for (int occ = 0; occ < block; ++occ) {
        Complex overlap(0.0, 0.0);
        for (std::size_t l = 0; l < coeff.size(); ++l)
            if (coeff[l] != Complex(0.0, 0.0))
                overlap += std::conj(coeff[l] / cn) *
                           state.amplitudes()[static_cast<int>(l) * block + occ];
        p += std::norm(overlap);
    }
    return p;
}

// Applies one step; returns the post-step state and the probability of the
// outcome that was kept (1 for non-measurement steps).
inline std::pair<StateVector, double> apply_step(const StateVector& state,
                                                 const ProtocolStep& step,
                                                 int step_index = -1) {
    const Basis& b = state.basis();
    const SystemSpec& spec = b.spec();

    if (const auto* r = std::get_if<RamseyStep>(&step)) {
        const int l1 = spec.level_index(r->level1);
        const int l2 = spec.level_index(r->level2);
        if (l1 < 0 || l2 < 0)
            throw ProtocolError(step_index, "ramsey references unknown level");
        if (l1 == l2) throw ProtocolError(step_index, "ramsey levels must be distinct");
        const int d = b.dim();
        const int block = d / static_cast<int>(spec.atom.levels.size());
        double off_population = 0.0;
        for (int idx = 0; idx < d; ++idx)
            if (b.level_of(idx) != l1) off_population += std::norm(state.amplitudes()[idx]);
        if (off_population > 1e-12)
            throw ProtocolError(step_index, "ramsey preparation requires the atom in pure "
                                            "level '" + r->level1 + "'");
        Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(d);
        const Complex ph = std::exp(Complex(0.0, r->phi)) / std::sqrt(2.0);
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        for (int occ = 0; occ < block; ++occ) {
            Complex a = state.amplitudes()[l1 * block + occ];
            amps[l1 * block + occ] = a * inv_sqrt2;
            amps[l2 * block + occ] = a * ph;
        }
        return {StateVector::unchecked(state.basis_ptr(), std::move(amps)), 1.0};
    }

    if (const auto* i = std::get_if<InteractStep>(&step)) {
        if (i->modes.empty()) throw ProtocolError(step_index, "interact with no modes");
        if (i->duration < 0.0) throw ProtocolError(step_index, "negative duration");
        std::vector<std::size_t> active;
        for (const ModeId& m : i->modes) {
            if (spec.mode_index(m) < 0)
                throw ProtocolError(step_index, "interact references unknown mode '" + m + "'");
            auto on_mode = spec.couplings_on_mode(m);
            if (on_mode.empty())
                throw ProtocolError(step_index, "mode '" + m + "' has no couplings");
            active.insert(active.end(), on_mode.begin(), on_mode.end());
        }
        std::sort(active.begin(), active.end());
        active.erase(std::unique(active.begin(), active.end()), active.end());
        HamiltonianMatrix h = build_hamiltonian(b, active, {});
        return {evolve(state, h, i->duration), 1.0};
    }

    if (const auto* p = std::get_if<PulseStep>(&step)) {
        if (p->duration < 0.0) throw ProtocolError(step_index, "negative duration");
        HamiltonianMatrix h =
            build_hamiltonian(b, {}, std::span<const DriveTerm>(&p->drive, 1));
        return {evolve(state, h, p->duration), 1.0};
    }

    const auto& m = std::get<MeasureStep>(step);
    detail::validate_measure(m, spec, step_index);
    std::vector<Complex> coeff(spec.atom.levels.size(), Complex(0.0, 0.0));
    double cn = 0.0;
    for (const auto& [level, c] : m.projector) {
        coeff[static_cast<std::size_t>(spec.level_index(level))] += c;
        cn += std::norm(c);
    }
    cn = std::sqrt(cn);
    for (Complex& c : coeff) c /= cn;

    const int d = b.dim();
    const int block = d / static_cast<int>(spec.atom.levels.size());
    Eigen::VectorXcd projected = Eigen::VectorXcd::Zero(d);
    double p_hit = 0.0;
    for (int occ = 0; occ < block; ++occ) {
        Complex overlap(0.0, 0.0);
        for (std::size_t l = 0; l < coeff.size(); ++l)
            if (coeff[l] != Complex(0.0, 0.0))
                overlap += std::conj(coeff[l]) *
                           state.amplitudes()[static_cast<int>(l) * block + occ];
        p_hit += std::norm(overlap);
        if (overlap != Complex(0.0, 0.0))
            for (std::size_t l = 0; l < coeff.size(); ++l)
                projected[static_cast<int>(l) * block + occ] = coeff[l] * overlap;
    }

    const bool keep_hit = m.keep == MeasureStep::Keep::hit;
    const double p_kept = keep_hit ? p_hit : 1.0 - p_hit;
    if (p_kept < 1e-12)
        throw ProtocolError(step_index, "kept measurement outcome has probability " +
                                            std::to_string(p_kept));
    Eigen::VectorXcd post =
        keep_hit ? projected : (state.amplitudes() - projected).eval();
    post /= std::sqrt(p_kept);
    return {StateVector::unchecked(state.basis_ptr(), std::move(post)), p_kept};
}

// ---------------------------------------------------------------------------
// Protocol execution

struct RunOptions {
    bool sample = false;     // draw measurement outcomes instead of post-selecting
    std::uint64_t seed = 0;  // generator seed in sampling mode
    bool tolerate_zero_branch = false; // stop instead of throwing on a dead branch
};

struct TraceEntry {
    int step;
    std::string kind;
    double duration;
    double outcome_probability;
    std::optional<bool> outcome_hit; // measurements only
    StateVector state;               // state after the step
};

struct SimulationResult {
    StateVector final_state;
    double branch_probability = 1.0;
    std::vector<TraceEntry> trace;
    bool zero_branch = false; // a post-selected outcome had probability ~0
};

inline SimulationResult run_protocol(const Protocol& p, const RunOptions& opts = {}) {
    StateVector state = p.initial;
    double branch_probability = 1.0;
    std::vector<TraceEntry> trace;
    trace.reserve(p.steps.size());
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (std::size_t si = 0; si < p.steps.size(); ++si) {
        const ProtocolStep& step = p.steps[si];
        const int index = static_cast<int>(si);
        std::optional<bool> outcome_hit;
        double prob = 1.0;

        if (const auto* m = std::get_if<MeasureStep>(&step)) {
            MeasureStep chosen = *m;
            if (opts.sample) {
                double p_hit = measure_probability(state, *m, index);
                bool hit = unit(rng) < p_hit;
                chosen.keep = hit ? MeasureStep::Keep::hit : MeasureStep::Keep::miss;
            }
            outcome_hit = chosen.keep == MeasureStep::Keep::hit;
            if (opts.tolerate_zero_branch) {
                double p_kept = *outcome_hit ? measure_probability(state, chosen, index)
                                             : 1.0 - measure_probability(state, chosen, index);
                if (p_kept < 1e-12) {
                    trace.push_back({index, step_kind(step), 0.0, p_kept, outcome_hit, state});
                    return {state, branch_probability * p_kept, std::move(trace), true};
                }
            }
            auto [next, pk] = apply_step(state, ProtocolStep(chosen), index);
            state = std::move(next);
            prob = pk;
        } else {
            auto [next, pk] = apply_step(state, step, index);
            state = std::move(next);
            prob = pk;
        }
        branch_probability *= prob;
        trace.push_back({index, step_kind(step), step_duration(step), prob, outcome_hit, state});
    }
    return {std::move(state), branch_probability, std::move(trace), false};
}

// ---------------------------------------------------------------------------
// Canned builders

enum class BellVariant { plus, minus };
enum class ProjectorSign { plus, minus };

// Three-level atom, modes A and B, couplings A:(a<->c), B:(b<->c).
inline SystemSpec make_bell_system(double g1, double g2, int n_max = 2) {
    SystemSpec spec;
    spec.atom.levels = {"a", "b", "c"};
    spec.modes = {{"A", n_max}, {"B", n_max}};
    spec.couplings = {{"A", "a", "c", g1}, {"B", "b", "c", g2}};
    return spec;
}

// Ramsey preparation, one odd half-Rabi cycle per mode, ground-state detection.
// The output matches (|0,1> + e^{i phi}|1,0>)/sqrt(2) (or the minus variant)
// up to a global phase; the Ramsey phase is -phi so that e^{i phi} lands on
// the branch that deposits the photon in mode A.
inline Protocol build_bell_protocol(double g1, double g2, double phi, BellVariant variant,
                                    int m = 1, int n = 0) {
    if (n == 0) n = variant == BellVariant::plus ? 1 : 3;
    if (m < 1 || m % 2 == 0 || n < 1 || n % 2 == 0)
        throw Error("build_bell_protocol: m and n must be odd integers >= 1");
    const int rel = ((n - m) % 4 + 4) % 4; // 0: same branch sign, 2: flipped
    if (variant == BellVariant::plus && rel != 0)
        throw Error("build_bell_protocol: (m, n) produce the minus variant");
    if (variant == BellVariant::minus && rel != 2)
        throw Error("build_bell_protocol: (m, n) produce the plus variant");

    BasisPtr basis = make_basis(make_bell_system(g1, g2));
    Protocol p{basis, basis_ket(basis, {"a", {0, 0}}), {}};
    p.steps.push_back(RamseyStep{"a", "b", -phi});
    p.steps.push_back(InteractStep{{"A"}, half_rabi_time(g1, m)});
    p.steps.push_back(InteractStep{{"B"}, half_rabi_time(g2, n)});
    p.steps.push_back(MeasureStep{{{"c", 1.0}}, MeasureStep::Keep::hit});
    return p;
}

// Ladder system for an N-mode chain: levels a, b, c, b1, b2, ... with mode k
// coupled to (upper_k <-> c).  g may be empty (all 1), a single broadcast
// value, or one rate per mode.
inline SystemSpec make_ghz_system(int n_modes, std::span<const double> g = {},
                                  int n_max = 2) {
    if (n_modes < 2) throw SpecError("ghz chain needs at least 2 modes");
    auto rate = [&](int k) {
        if (g.empty()) return 1.0;
        if (g.size() == 1) return g[0];
        if (static_cast<int>(g.size()) != n_modes)
            throw SpecError("expected one coupling rate per mode");
        return g[static_cast<std::size_t>(k)];
    };
    SystemSpec spec;
    spec.atom.levels = {"a", "b", "c"};
    for (int k = 2; k < n_modes; ++k)
        spec.atom.levels.push_back("b" + std::to_string(k - 1));
    spec.modes.push_back({"A", n_max});
    spec.couplings.push_back({"A", "a", "c", rate(0)});
    spec.modes.push_back({"B", n_max});
    spec.couplings.push_back({"B", "b", "c", rate(1)});
    for (int k = 2; k < n_modes; ++k) {
        ModeId mode = "B" + std::to_string(k - 1);
        spec.modes.push_back({mode, n_max});
        spec.couplings.push_back({mode, "b" + std::to_string(k - 1), "c", rate(k)});
    }
    return spec;
}

struct GhzOptions {
    ProjectorSign sign = ProjectorSign::plus;
    double pulse_area = pi;       // area of each transfer pulse; pi = unit transfer
    std::vector<double> omegas;   // one Rabi rate per pulse (empty: all 1)
    std::optional<std::vector<double>> laser_phases; // default -pi/2, pi, pi, ...
};

// Quarter-cycle beam splitter on the first mode, then alternating transfer
// pulses and half-cycle interactions down the chain, closed by a projective
// measurement in the (|a> +- |c>)/sqrt(2) basis.  The default laser phases
// cancel the -i factors the cavity interactions produce, so the kept branch
// is exactly (|0...0> +- |1...1>)/sqrt(2).
inline Protocol build_ghz_protocol(const SystemSpec& spec, const GhzOptions& opts = {}) {
    spec.validate();
    const int n_modes = static_cast<int>(spec.modes.size());
    if (n_modes < 2) throw SpecError("malformed ladder spec: needs at least 2 modes");

    std::vector<Coupling> chain;
    for (const ModeSpec& m : spec.modes) {
        auto on_mode = spec.couplings_on_mode(m.id);
        if (on_mode.size() != 1)
            throw SpecError("malformed ladder spec: mode '" + m.id +
                            "' must have exactly one coupling");
        chain.push_back(spec.couplings[on_mode[0]]);
    }
    const LevelId ground = chain[0].lower;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        if (chain[i].lower != ground)
            throw SpecError("malformed ladder spec: couplings must share the lower level");
        if (chain[i].g <= 0.0)
            throw SpecError("malformed ladder spec: coupling rates must be > 0");
        for (std::size_t j = i + 1; j < chain.size(); ++j)
            if (chain[i].upper == chain[j].upper)
                throw SpecError("malformed ladder spec: upper levels must be distinct");
    }

    auto omega = [&](int k) {
        if (opts.omegas.empty()) return 1.0;
        if (opts.omegas.size() == 1) return opts.omegas[0];
        if (static_cast<int>(opts.omegas.size()) != n_modes - 1)
            throw SpecError("expected one Rabi rate per transfer pulse");
        return opts.omegas[static_cast<std::size_t>(k - 1)];
    };
    auto phase = [&](int k) {
        if (opts.laser_phases) {
            const auto& ph = *opts.laser_phases;
            if (static_cast<int>(ph.size()) != n_modes - 1)
                throw SpecError("expected one laser phase per transfer pulse");
            return ph[static_cast<std::size_t>(k - 1)];
        }
        return k == 1 ? -pi / 2.0 : pi;
    };

    BasisPtr basis = make_basis(spec);
    BasisState start{chain[0].upper, std::vector<int>(spec.modes.size(), 0)};
    Protocol p{basis, basis_ket(basis, start), {}};
    p.steps.push_back(InteractStep{{chain[0].mode}, quarter_rabi_time(chain[0].g, 1)});
    for (int k = 1; k < n_modes; ++k) {
        double w = omega(k);
        p.steps.push_back(PulseStep{{chain[static_cast<std::size_t>(k)].upper, ground, w,
                                     phase(k)},
                                    opts.pulse_area / w});
        p.steps.push_back(InteractStep{{chain[static_cast<std::size_t>(k)].mode},
                                       half_rabi_time(chain[static_cast<std::size_t>(k)].g, 1)});
    }
    const double s = opts.sign == ProjectorSign::plus ? 1.0 : -1.0;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    p.steps.push_back(MeasureStep{
        {{chain[0].upper, inv_sqrt2}, {ground, s * inv_sqrt2}}, MeasureStep::Keep::hit});
    return p;
}

} // namespace cavent
