#pragma once

// Feasibility accounting in SI units: transit time through the cavity set
// against the protocol's interaction times and the decay lifetimes.

#include <map>
#include <string>
#include <vector>

#include "cavent/errors.hpp"
#include "cavent/protocol.hpp"

namespace cavent {

struct FeasibilityParams {
    double atom_velocity = 400.0;     // m/s
    double cavity_length = 0.02;      // m
    double atomic_lifetime = 3e-3;    // s
    double cavity_lifetime = 3e-3;    // s
    std::map<std::string, double> couplings_si; // rad/s per coupling label
    double drive_si = 0.0;            // drive Rabi rate in rad/s, 0 = no drive

    // Illustrative default rate: half a Rabi cycle then takes 25 us.
    double coupling(const std::string& label) const {
        auto it = couplings_si.find(label);
        if (it != couplings_si.end()) return it->second;
        return 2e4 * pi;
    }

    void validate() const {
        if (atom_velocity <= 0.0 || cavity_length <= 0.0 ||
            atomic_lifetime <= 0.0 || cavity_lifetime <= 0.0)
            throw Error("feasibility parameters must be positive");
        for (const auto& [label, g] : couplings_si)
            if (g <= 0.0)
                throw Error("coupling '" + label + "' must be positive");
        if (drive_si < 0.0) throw Error("drive rate must be positive");
    }
};

inline double transit_time(double length, double velocity) {
    if (length <= 0.0) throw Error("cavity length must be > 0");
    if (velocity <= 0.0) throw Error("velocity must be > 0");
    return length / velocity;
}

inline double transit_time(const FeasibilityParams& p) {
    return transit_time(p.cavity_length, p.atom_velocity);
}

struct FeasibilityReport {
    double transit = 0.0;           // s available inside a cavity
    TimingPlan plan;                // per-step durations in seconds
    double total = 0.0;             // s needed by the whole plan
    double longest_step = 0.0;      // s of the slowest single step
    double transit_margin = 0.0;    // transit / longest_step
    double atomic_margin = 0.0;     // atomic_lifetime / total
    double cavity_margin = 0.0;     // cavity_lifetime / total
    bool pass = false;
    std::vector<std::string> reasons; // failure descriptions, empty when pass
};

// Pass iff every step fits inside the transit time and the whole plan
// completes within both lifetimes.  Failures are report content, not errors.
inline FeasibilityReport check_budget(const FeasibilityParams& p, const TimingPlan& plan) {
    p.validate();
    plan.validate();
    FeasibilityReport r;
    r.transit = transit_time(p);
    r.plan = plan;
    r.total = plan.total();
    for (const TimingEntry& e : plan.entries)
        r.longest_step = std::max(r.longest_step, e.duration);
    r.transit_margin = r.transit / r.longest_step;
    r.atomic_margin = p.atomic_lifetime / r.total;
    r.cavity_margin = p.cavity_lifetime / r.total;
    for (const TimingEntry& e : plan.entries)
        if (e.duration > r.transit)
            r.reasons.push_back("step '" + e.label + "' exceeds the transit time");
    if (r.total >= p.atomic_lifetime)
        r.reasons.push_back("plan does not complete within the atomic lifetime");
    if (r.total >= p.cavity_lifetime)
        r.reasons.push_back("plan does not complete within the cavity lifetime");
    r.pass = r.reasons.empty();
    return r;
}

// Timing plan of the two-mode sequence with SI rates: one odd half cycle per
// cavity (the preparation and detection steps take no interaction time).
inline TimingPlan bell_timing_plan(const FeasibilityParams& p, int m = 1, int n = 1) {
    TimingPlan plan;
    plan.entries.push_back(TimingEntry::half_rabi("interact A", p.coupling("A"), m));
    plan.entries.push_back(TimingEntry::half_rabi("interact B", p.coupling("B"), n));
    return plan;
}

// Timing plan of the n-mode chain: quarter cycle on the first cavity, then a
// transfer pulse plus half cycle per remaining cavity.
inline TimingPlan ghz_timing_plan(const FeasibilityParams& p, int n_modes) {
    if (n_modes < 2) throw Error("ghz chain needs at least 2 modes");
    if (p.drive_si <= 0.0) throw Error("ghz plan needs a drive rate (omega)");
    TimingPlan plan;
    auto label = [](int k) {
        if (k == 0) return std::string("A");
        if (k == 1) return std::string("B");
        return "B" + std::to_string(k - 1);
    };
    plan.entries.push_back(
        TimingEntry::quarter_rabi("interact A", p.coupling(label(0)), 1));
    for (int k = 1; k < n_modes; ++k) {
        plan.entries.push_back(TimingEntry::pi_pulse("pulse " + label(k), p.drive_si));
        plan.entries.push_back(
            TimingEntry::half_rabi("interact " + label(k), p.coupling(label(k)), 1));
    }
    return plan;
}

} // namespace cavent
