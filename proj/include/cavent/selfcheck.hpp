#pragma once

// Built-in verification suite: seven deterministic checks covering the
// closed-form oracles, protocol outputs, entanglement metrics, conservation
// laws and feasibility arithmetic.  Shared by the CLI `verify` subcommand and
// the acceptance runner.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cavent/dynamics.hpp"
#include "cavent/emit.hpp"
#include "cavent/entangle.hpp"
#include "cavent/feasibility.hpp"
#include "cavent/hilbert.hpp"
#include "cavent/protocol.hpp"

namespace cavent {

struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace selfcheck {

inline void require(bool condition, const std::string& message) {
    if (!condition) throw Error(message);
}

inline std::string scalar(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

// Check 1: evolving the two-branch superposition through both cavities
// matches the closed-form amplitudes for 100 seeded parameter draws.
inline std::string check_oracle_equivalence() {
    std::mt19937_64 rng(1234567);
    std::uniform_real_distribution<double> g_dist(0.1, 10.0);
    std::uniform_real_distribution<double> phi_dist(0.0, 2.0 * pi);
    std::uniform_real_distribution<double> t_dist(0.0, 10.0);

    double worst = 0.0;
    for (int draw = 0; draw < 100; ++draw) {
        const double g1 = g_dist(rng);
        const double g2 = g_dist(rng);
        const double phi = phi_dist(rng);
        const double t = t_dist(rng);

        BasisPtr basis = make_basis(make_bell_system(g1, g2));
        const Complex half(1.0 / std::sqrt(2.0), 0.0);
        StateVector init = state_from_components(
            basis, {{{"a", {0, 0}}, half},
                    {{"b", {0, 0}}, half * std::exp(Complex(0.0, phi))}});
        std::vector<std::size_t> active{0, 1};
        HamiltonianMatrix h = build_hamiltonian(*basis, active, {});
        StateVector evolved = evolve(init, h, t);

        TwoModeAmplitudes ora = analytic_two_mode_amplitudes(g1, g2, phi, t);
        struct Expect {
            BasisState ket;
            Complex value;
        };
        const Expect expect[] = {
            {{"a", {0, 0}}, ora.c_a00},
            {{"c", {1, 0}}, ora.c_c10},
            {{"b", {0, 0}}, ora.c_b00},
            {{"c", {0, 1}}, ora.c_c01},
        };
        std::vector<int> tracked;
        for (const Expect& e : expect) {
            int idx = basis->index_of(e.ket);
            tracked.push_back(idx);
            double dev = std::abs(evolved.amplitudes()[idx] - e.value);
            worst = std::max(worst, dev);
            require(dev <= 1e-10, "amplitude deviates by " + scalar(dev) +
                                      " at draw " + std::to_string(draw));
        }
        for (int idx = 0; idx < basis->dim(); ++idx) {
            if (std::find(tracked.begin(), tracked.end(), idx) != tracked.end())
                continue;
            require(std::abs(evolved.amplitudes()[idx]) < 1e-12,
                    "leakage outside the single-excitation sector at draw " +
                        std::to_string(draw));
        }
    }
    return "100 draws, worst amplitude deviation " + scalar(worst);
}

inline Protocol shared_time_detection_protocol(double g1, double g2) {
    BasisPtr basis = make_basis(make_bell_system(g1, g2));
    Protocol p{basis, basis_ket(basis, {"a", {0, 0}}), {}};
    p.steps.push_back(RamseyStep{"a", "b", 0.0});
    p.steps.push_back(InteractStep{{"A", "B"}, 0.0});
    p.steps.push_back(MeasureStep{{{"c", 1.0}}, MeasureStep::Keep::hit});
    return p;
}

inline std::vector<double> probability_column(const std::string& csv) {
    std::vector<double> out;
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line); // header
    while (std::getline(is, line)) {
        std::size_t c1 = line.find(',');
        std::size_t c2 = line.find(',', c1 + 1);
        out.push_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
    }
    return out;
}

// Check 2: the ground-state detection probability along a 201-point sweep of
// the shared interaction time matches (sin^2 g1 t + sin^2 g2 t)/2, and peaks
// at exactly 1 when both arguments reach a quarter period together.
inline std::string check_detection_probability() {
    double worst = 0.0;
    for (auto [g1, g2] : {std::pair{1.0, 3.0}, std::pair{1.0, 1.0}}) {
        Protocol base = shared_time_detection_protocol(g1, g2);
        SweepConfig cfg;
        cfg.path = "step.1.t";
        cfg.from = 0.0;
        cfg.to = pi;
        cfg.steps = 201;
        std::vector<double> p = probability_column(run_sweep(base, cfg));
        require(p.size() == 201, "sweep produced " + std::to_string(p.size()) + " rows");
        for (int i = 0; i < 201; ++i) {
            double t = pi * i / 200.0;
            double dev = std::abs(p[static_cast<std::size_t>(i)] - analytic_pc(g1, g2, t));
            worst = std::max(worst, dev);
            require(dev <= 1e-10, "probability deviates by " + scalar(dev) +
                                      " at grid point " + std::to_string(i));
        }
        if (g1 == g2)
            require(std::abs(p[100] - 1.0) <= 1e-10,
                    "probability at the simultaneous quarter period is " + scalar(p[100]));
    }
    return "2 sweeps x 201 points, worst deviation " + scalar(worst);
}

struct BellCase {
    BellVariant variant;
    double phi;
    SimulationResult result;
};

inline std::vector<BellCase> bell_cases(double g1 = 1.0, double g2 = 1.3) {
    std::vector<BellCase> cases;
    for (BellVariant variant : {BellVariant::plus, BellVariant::minus})
        for (double phi : {0.0, pi / 3.0, pi})
            cases.push_back(
                {variant, phi, run_protocol(build_bell_protocol(g1, g2, phi, variant))});
    return cases;
}

// Check 3: the Bell builder reaches its target for both variants and three
// relative phases, with near-unit heralding probability.
inline std::string check_bell_generation() {
    double worst_fid = 1.0, worst_prob = 1.0;
    for (const BellCase& c : bell_cases()) {
        double f = fidelity(c.result.final_state, bell_state(c.variant, c.phi));
        worst_fid = std::min(worst_fid, f);
        worst_prob = std::min(worst_prob, c.result.branch_probability);
        require(f > 1.0 - 1e-9, "fidelity " + scalar(f) + " at phi " + scalar(c.phi));
        require(c.result.branch_probability > 1.0 - 1e-9,
                "branch probability " + scalar(c.result.branch_probability));
    }
    return "6 cases, worst fidelity " + scalar(worst_fid) + ", worst probability " +
           scalar(worst_prob);
}

// Check 4: the chain builder reaches the two-component target for both
// projector signs at branch probability 1/2, passes through the equal-weight
// intermediate state, and keeps every single-mode cut at one bit for chains
// of three to five modes.
inline std::string check_ghz_generation() {
    for (ProjectorSign sign : {ProjectorSign::plus, ProjectorSign::minus}) {
        const double gs[] = {1.0, 1.4};
        GhzOptions opts;
        opts.sign = sign;
        Protocol p = build_ghz_protocol(make_ghz_system(2, gs), opts);
        SimulationResult r = run_protocol(p);
        double f = fidelity(r.final_state, ghz_state(2, sign));
        require(f > 1.0 - 1e-9, "two-mode fidelity " + scalar(f));
        require(std::abs(r.branch_probability - 0.5) <= 1e-9,
                "branch probability " + scalar(r.branch_probability));

        const StateVector& mid = r.trace[0].state;
        double p_a = mid.population({"a", {0, 0}});
        double p_c = mid.population({"c", {1, 0}});
        require(std::abs(p_a - 0.5) <= 1e-10 && std::abs(p_c - 0.5) <= 1e-10,
                "intermediate populations " + scalar(p_a) + ", " + scalar(p_c));
    }

    for (int n = 3; n <= 5; ++n) {
        Protocol p = build_ghz_protocol(make_ghz_system(n));
        SimulationResult r = run_protocol(p);
        double f = fidelity(r.final_state, ghz_state(n, ProjectorSign::plus));
        require(f > 1.0 - 1e-9, std::to_string(n) + "-mode fidelity " + scalar(f));

        ModePureState reg = principal_mode_state(r.final_state);
        int nonzero = 0;
        for (int i = 0; i < reg.amplitudes.size(); ++i)
            if (std::abs(reg.amplitudes[i]) > 1e-9) ++nonzero;
        require(nonzero == 2, std::to_string(n) + "-mode register has " +
                                  std::to_string(nonzero) + " nonzero components");

        for (const ModeSpec& m : p.system().modes) {
            Subsystems cut;
            cut.atom = false;
            cut.modes = {m.id};
            double s = von_neumann_entropy(partial_trace(r.final_state, cut));
            require(std::abs(s - 1.0) <= 1e-9,
                    "cut entropy " + scalar(s) + " on mode " + m.id);
        }
    }
    return "2 signs + chains of 3, 4, 5 modes";
}

// Check 5: generated Bell states have unit concurrence, and entropy agrees
// with the concurrence-based closed form on 50 random two-qubit pure states.
inline std::string check_entanglement_metrics() {
    for (const BellCase& c : bell_cases()) {
        DensityMatrix rho = qubit_restriction(mode_marginal(c.result.final_state));
        double con = concurrence(rho);
        require(std::abs(con - 1.0) <= 1e-9, "concurrence " + scalar(con));
    }

    std::mt19937_64 rng(7654321);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto binary_entropy = [](double x) {
        double h = 0.0;
        if (x > 1e-12) h -= x * std::log2(x);
        if (1.0 - x > 1e-12) h -= (1.0 - x) * std::log2(1.0 - x);
        return h;
    };
    double worst = 0.0;
    for (int draw = 0; draw < 50; ++draw) {
        Eigen::Vector4cd psi;
        for (int i = 0; i < 4; ++i) psi[i] = Complex(gauss(rng), gauss(rng));
        psi.normalize();
        DensityMatrix rho;
        rho.matrix = psi * psi.adjoint();
        rho.dims = {2, 2};
        double con = concurrence(rho);

        DensityMatrix half;
        half.matrix = Eigen::MatrixXcd::Zero(2, 2);
        half.dims = {2};
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 2; ++k)
                for (int j = 0; j < 2; ++j)
                    half.matrix(i, k) += psi[2 * i + j] * std::conj(psi[2 * k + j]);
        double entropy = von_neumann_entropy(half);
        double expected = binary_entropy(0.5 * (1.0 + std::sqrt(std::max(
                                                      0.0, 1.0 - con * con))));
        double dev = std::abs(entropy - expected);
        worst = std::max(worst, dev);
        require(dev <= 1e-9, "entropy-concurrence mismatch " + scalar(dev) +
                                 " at draw " + std::to_string(draw));
    }
    return "6 Bell states + 50 random pure states, worst mismatch " + scalar(worst);
}

// Check 6: every run keeps unit norm, conserves the step-appropriate
// excitation count, and splits measurements into branches whose
// probabilities sum to one.
inline std::string check_conservation() {
    std::vector<Protocol> protocols;
    for (ProjectorSign sign : {ProjectorSign::plus, ProjectorSign::minus}) {
        GhzOptions opts;
        opts.sign = sign;
        protocols.push_back(build_ghz_protocol(make_ghz_system(2), opts));
    }
    for (int n = 3; n <= 5; ++n)
        protocols.push_back(build_ghz_protocol(make_ghz_system(n)));

    double worst_norm = 0.0, worst_excitation = 0.0, worst_sum = 0.0;
    auto scan = [&](const Protocol& p, const SimulationResult& r) {
        const Basis& basis = *p.basis;
        const SystemSpec& spec = p.system();
        StateVector prev = p.initial;
        for (const TraceEntry& e : r.trace) {
            worst_norm = std::max(worst_norm, std::abs(e.state.norm() - 1.0));
            const ProtocolStep& step = p.steps[static_cast<std::size_t>(e.step)];
            if (const auto* i = std::get_if<InteractStep>(&step)) {
                std::vector<LevelId> uppers;
                for (const ModeId& m : i->modes)
                    for (std::size_t ci : spec.couplings_on_mode(m))
                        uppers.push_back(spec.couplings[ci].upper);
                Eigen::VectorXd diag = excitation_numbers(basis, uppers);
                worst_excitation =
                    std::max(worst_excitation, std::abs(expectation(diag, e.state) -
                                                        expectation(diag, prev)));
            } else if (std::holds_alternative<PulseStep>(step) ||
                       std::holds_alternative<RamseyStep>(step)) {
                Eigen::VectorXd diag = excitation_numbers(basis, {});
                worst_excitation =
                    std::max(worst_excitation, std::abs(expectation(diag, e.state) -
                                                        expectation(diag, prev)));
            } else if (const auto* m = std::get_if<MeasureStep>(&step)) {
                MeasureStep hit = *m;
                hit.keep = MeasureStep::Keep::hit;
                auto [post, p_hit] = apply_step(prev, ProtocolStep(hit), e.step);
                Eigen::VectorXcd kept = post.amplitudes() * std::sqrt(p_hit);
                double p_miss = (prev.amplitudes() - kept).squaredNorm();
                worst_sum = std::max(worst_sum, std::abs(p_hit + p_miss - 1.0));
            }
            prev = e.state;
        }
    };

    for (const BellCase& c : bell_cases())
        scan(build_bell_protocol(1.0, 1.3, c.phi, c.variant), c.result);
    for (const Protocol& p : protocols) scan(p, run_protocol(p));

    require(worst_norm < 1e-10, "norm drift " + scalar(worst_norm));
    require(worst_excitation < 1e-10, "excitation drift " + scalar(worst_excitation));
    require(worst_sum <= 1e-10, "branch probabilities sum off by " + scalar(worst_sum));
    return "norm drift " + scalar(worst_norm) + ", excitation drift " +
           scalar(worst_excitation) + ", branch sum off " + scalar(worst_sum);
}

// Check 7: default SI parameters give a 50 microsecond transit exactly and a
// passing report with at least 60x lifetime margins.
inline std::string check_feasibility() {
    FeasibilityParams params;
    double transit = transit_time(params);
    require(transit == 5.0e-5, "transit time is " + scalar(transit));
    FeasibilityReport r = check_budget(params, bell_timing_plan(params));
    require(r.pass, r.reasons.empty() ? "verdict fail" : r.reasons.front());
    require(r.atomic_margin >= 60.0 && r.cavity_margin >= 60.0,
            "lifetime margins " + scalar(r.atomic_margin) + ", " +
                scalar(r.cavity_margin));
    return "transit 5.0e-5 s, margins " + scalar(r.atomic_margin) + "x";
}

} // namespace selfcheck

inline std::vector<CheckResult> run_self_checks() {
    std::vector<CheckResult> results;
    auto add = [&](int id, const std::string& name,
                   const std::function<std::string()>& fn) {
        CheckResult r{id, name, false, ""};
        try {
            r.detail = fn();
            r.pass = true;
        } catch (const std::exception& e) {
            r.detail = e.what();
        }
        results.push_back(std::move(r));
    };
    add(1, "oracle equivalence", selfcheck::check_oracle_equivalence);
    add(2, "detection probability", selfcheck::check_detection_probability);
    add(3, "bell generation", selfcheck::check_bell_generation);
    add(4, "ghz generation", selfcheck::check_ghz_generation);
    add(5, "entanglement metrics", selfcheck::check_entanglement_metrics);
    add(6, "conservation properties", selfcheck::check_conservation);
    add(7, "feasibility arithmetic", selfcheck::check_feasibility);
    return results;
}

} // namespace cavent
