#pragma once

// Line-oriented protocol language: parser with collected diagnostics and a
// canonical serializer.  One directive per line, `#` starts a comment,
// parameters are key=value tokens.

#include <cctype>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "cavent/feasibility.hpp"
#include "cavent/protocol.hpp"

namespace cavent {

struct SourceSpan {
    int line = 1;      // 1-based
    int col_begin = 1; // 1-based, inclusive
    int col_end = 1;   // exclusive
};

struct ParseError {
    SourceSpan span;
    std::string message;
    std::string token;
};

struct ParseResult {
    std::optional<Protocol> protocol; // engaged iff errors is empty
    std::vector<ParseError> errors;

    bool ok() const { return errors.empty(); }
};

namespace detail {

struct Token {
    std::string_view text;
    int line = 1;
    int col = 1;

    SourceSpan span() const {
        return {line, col, col + static_cast<int>(text.size())};
    }
};

inline std::vector<std::vector<Token>> tokenize(std::string_view text) {
    std::vector<std::vector<Token>> lines;
    int line_no = 1;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        if (std::size_t hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        std::vector<Token> toks;
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (std::isspace(static_cast<unsigned char>(line[i])) ||
                                       line[i] == '\0'))
                ++i;
            std::size_t start = i;
            while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
                   line[i] != '\0')
                ++i;
            if (i > start)
                toks.push_back({line.substr(start, i - start), line_no,
                                static_cast<int>(start) + 1});
        }
        lines.push_back(std::move(toks));
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
        ++line_no;
    }
    return lines;
}

inline std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return v;
}

inline std::optional<long> parse_int(std::string_view s) {
    long v = 0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return v;
}

// Time expression: float literal or a named rule resolved against the step's
// unique rate later.
struct TimeExpr {
    std::optional<double> literal;
    std::optional<SymbolicTime> symbolic;
};

inline std::optional<TimeExpr> parse_time_expr(std::string_view s) {
    if (auto v = parse_double(s)) return TimeExpr{v, std::nullopt};
    if (s == "pi_pulse")
        return TimeExpr{std::nullopt, SymbolicTime{TimingEntry::Rule::pi_pulse, 1}};
    if (s == "half_pi_pulse")
        return TimeExpr{std::nullopt, SymbolicTime{TimingEntry::Rule::half_pi_pulse, 1}};
    for (auto [name, rule] : {std::pair{std::string_view("half_rabi"),
                                        TimingEntry::Rule::half_rabi},
                              std::pair{std::string_view("quarter_rabi"),
                                        TimingEntry::Rule::quarter_rabi}}) {
        if (s.size() > name.size() + 2 && s.substr(0, name.size()) == name &&
            s[name.size()] == '(' && s.back() == ')') {
            auto m = parse_int(s.substr(name.size() + 1, s.size() - name.size() - 2));
            if (!m || *m < 1 || *m > 1'000'000) return std::nullopt;
            return TimeExpr{std::nullopt, SymbolicTime{rule, static_cast<int>(*m)}};
        }
    }
    return std::nullopt;
}

// One key=value argument list: positional tokens first, then key=value pairs.
struct Args {
    std::vector<Token> positional;
    std::vector<std::pair<std::string_view, Token>> keyed; // key -> value token

    const Token* find(std::string_view key) const {
        for (const auto& [k, t] : keyed)
            if (k == key) return &t;
        return nullptr;
    }
};

inline Args split_args(const std::vector<Token>& toks, std::size_t from,
                       std::vector<ParseError>& errors) {
    Args args;
    bool keyed_seen = false;
    for (std::size_t i = from; i < toks.size(); ++i) {
        const Token& t = toks[i];
        std::size_t eq = t.text.find('=');
        if (eq != std::string_view::npos && eq > 0) {
            std::string_view key = t.text.substr(0, eq);
            Token value{t.text.substr(eq + 1), t.line, t.col + static_cast<int>(eq) + 1};
            if (args.find(key))
                errors.push_back({t.span(), "duplicate key '" + std::string(key) + "'",
                                  std::string(t.text)});
            else
                args.keyed.emplace_back(key, value);
            keyed_seen = true;
        } else {
            if (keyed_seen)
                errors.push_back({t.span(), "positional token after key=value arguments",
                                  std::string(t.text)});
            else
                args.positional.push_back(t);
        }
    }
    return args;
}

} // namespace detail

inline ParseResult parse_protocol(std::string_view text) {
    using detail::Token;
    ParseResult result;
    auto& errors = result.errors;

    SystemSpec spec;
    std::optional<BasisState> init;
    int init_line = 0;

    struct PendingStep {
        ProtocolStep step;
        SourceSpan span;
        std::optional<detail::TimeExpr> time; // interact/pulse only
    };
    std::vector<PendingStep> steps;

    auto err = [&](const Token& t, std::string message) {
        errors.push_back({t.span(), std::move(message), std::string(t.text)});
    };
    auto require_key = [&](const detail::Args& args, const Token& head,
                           std::string_view key) -> const Token* {
        const Token* t = args.find(key);
        if (!t)
            err(head, "missing required key '" + std::string(key) + "'");
        return t;
    };
    auto key_double = [&](const detail::Args& args, const Token& head,
                          std::string_view key) -> std::optional<double> {
        const Token* t = require_key(args, head, key);
        if (!t) return std::nullopt;
        auto v = detail::parse_double(t->text);
        if (!v) err(*t, "malformed number for '" + std::string(key) + "'");
        return v;
    };
    auto check_keys = [&](const detail::Args& args,
                          std::initializer_list<std::string_view> allowed) {
        for (const auto& [k, t] : args.keyed) {
            bool ok = false;
            for (std::string_view a : allowed)
                if (k == a) ok = true;
            if (!ok)
                errors.push_back({t.span(), "unknown key '" + std::string(k) + "'",
                                  std::string(k)});
        }
    };

    for (const std::vector<Token>& line : detail::tokenize(text)) {
        if (line.empty()) continue;
        const Token& head = line[0];
        detail::Args args = detail::split_args(line, 1, errors);

        if (head.text == "level") {
            check_keys(args, {});
            if (args.positional.size() != 1) {
                err(head, "expected: level <id>");
                continue;
            }
            LevelId id(args.positional[0].text);
            if (spec.level_index(id) >= 0)
                err(args.positional[0], "duplicate level '" + id + "'");
            else
                spec.atom.levels.push_back(std::move(id));
        } else if (head.text == "mode") {
            check_keys(args, {"nmax"});
            if (args.positional.size() != 1) {
                err(head, "expected: mode <id> nmax=<int>");
                continue;
            }
            ModeId id(args.positional[0].text);
            int n_max = 2;
            if (const Token* t = args.find("nmax")) {
                auto v = detail::parse_int(t->text);
                if (!v || *v < 1 || *v > 64) {
                    err(*t, "nmax must be an integer in [1, 64]");
                    continue;
                }
                n_max = static_cast<int>(*v);
            }
            if (spec.mode_index(id) >= 0)
                err(args.positional[0], "duplicate mode '" + id + "'");
            else
                spec.modes.push_back({std::move(id), n_max});
        } else if (head.text == "couple") {
            check_keys(args, {"g"});
            if (args.positional.size() != 3) {
                err(head, "expected: couple <mode> <upper> <lower> g=<float>");
                continue;
            }
            auto g = key_double(args, head, "g");
            if (!g) continue;
            ModeId mode(args.positional[0].text);
            LevelId upper(args.positional[1].text);
            LevelId lower(args.positional[2].text);
            if (spec.mode_index(mode) < 0)
                err(args.positional[0], "unknown mode '" + mode + "'");
            else if (spec.level_index(upper) < 0)
                err(args.positional[1], "unknown level '" + upper + "'");
            else if (spec.level_index(lower) < 0)
                err(args.positional[2], "unknown level '" + lower + "'");
            else if (upper == lower)
                err(args.positional[1], "coupling levels must be distinct");
            else if (*g <= 0.0)
                err(head, "coupling rate must be > 0");
            else {
                bool dup = false;
                for (const Coupling& c : spec.couplings)
                    if (c.mode == mode && c.upper == upper && c.lower == lower) dup = true;
                if (dup)
                    err(head, "duplicate coupling");
                else
                    spec.couplings.push_back({std::move(mode), std::move(upper),
                                              std::move(lower), *g});
            }
        } else if (head.text == "init") {
            check_keys(args, {"level"});
            if (!args.positional.empty()) {
                err(args.positional[0], "expected: init level=<id>");
                continue;
            }
            const Token* t = require_key(args, head, "level");
            if (!t) continue;
            LevelId id(t->text);
            if (spec.level_index(id) < 0) {
                err(*t, "unknown level '" + id + "'");
                continue;
            }
            if (init) {
                err(head, "duplicate init directive (line " + std::to_string(init_line) +
                              " already set it)");
                continue;
            }
            init = BasisState{std::move(id), std::vector<int>(spec.modes.size(), 0)};
            init_line = head.line;
        } else if (head.text == "step") {
            if (args.positional.empty()) {
                err(head, "expected: step <ramsey|interact|pulse|measure> ...");
                continue;
            }
            const Token& kind = args.positional[0];
            SourceSpan span = head.span();
            span.col_end = kind.span().col_end;

            if (kind.text == "ramsey") {
                check_keys(args, {"phi"});
                if (args.positional.size() != 3) {
                    err(kind, "expected: step ramsey <l1> <l2> phi=<float>");
                    continue;
                }
                auto phi = key_double(args, kind, "phi");
                if (!phi) continue;
                LevelId l1(args.positional[1].text);
                LevelId l2(args.positional[2].text);
                if (spec.level_index(l1) < 0)
                    err(args.positional[1], "unknown level '" + l1 + "'");
                else if (spec.level_index(l2) < 0)
                    err(args.positional[2], "unknown level '" + l2 + "'");
                else if (l1 == l2)
                    err(args.positional[1], "ramsey levels must be distinct");
                else
                    steps.push_back({RamseyStep{std::move(l1), std::move(l2), *phi},
                                     span, std::nullopt});
            } else if (kind.text == "interact") {
                check_keys(args, {"modes", "t"});
                if (args.positional.size() != 1) {
                    err(kind, "expected: step interact modes=<id[,id...]> t=<timeexpr>");
                    continue;
                }
                const Token* mt = require_key(args, kind, "modes");
                const Token* tt = require_key(args, kind, "t");
                if (!mt || !tt) continue;
                std::vector<ModeId> modes;
                bool modes_ok = true;
                std::string_view rest = mt->text;
                while (!rest.empty()) {
                    std::size_t comma = rest.find(',');
                    std::string_view part = rest.substr(0, comma);
                    if (part.empty()) {
                        err(*mt, "empty mode id in list");
                        modes_ok = false;
                        break;
                    }
                    ModeId id(part);
                    if (spec.mode_index(id) < 0) {
                        err(*mt, "unknown mode '" + id + "'");
                        modes_ok = false;
                        break;
                    }
                    modes.push_back(std::move(id));
                    if (comma == std::string_view::npos) break;
                    rest = rest.substr(comma + 1);
                }
                if (!modes_ok || modes.empty()) {
                    if (modes.empty() && modes_ok) err(*mt, "empty mode list");
                    continue;
                }
                auto time = detail::parse_time_expr(tt->text);
                if (!time) {
                    err(*tt, "malformed time expression");
                    continue;
                }
                if (time->literal && *time->literal < 0.0) {
                    err(*tt, "negative duration");
                    continue;
                }
                steps.push_back({InteractStep{std::move(modes),
                                              time->literal.value_or(0.0), time->symbolic},
                                 span, time});
            } else if (kind.text == "pulse") {
                check_keys(args, {"omega", "phase", "t"});
                if (args.positional.size() != 3) {
                    err(kind, "expected: step pulse <upper> <lower> omega=<float> "
                              "[phase=<float>] t=<timeexpr>");
                    continue;
                }
                auto omega = key_double(args, kind, "omega");
                const Token* tt = require_key(args, kind, "t");
                if (!omega || !tt) continue;
                double phase = 0.0;
                if (const Token* pt = args.find("phase")) {
                    auto v = detail::parse_double(pt->text);
                    if (!v) {
                        err(*pt, "malformed number for 'phase'");
                        continue;
                    }
                    phase = *v;
                }
                LevelId upper(args.positional[1].text);
                LevelId lower(args.positional[2].text);
                if (spec.level_index(upper) < 0) {
                    err(args.positional[1], "unknown level '" + upper + "'");
                    continue;
                }
                if (spec.level_index(lower) < 0) {
                    err(args.positional[2], "unknown level '" + lower + "'");
                    continue;
                }
                if (upper == lower) {
                    err(args.positional[1], "pulse levels must be distinct");
                    continue;
                }
                if (*omega <= 0.0) {
                    err(kind, "omega must be > 0");
                    continue;
                }
                auto time = detail::parse_time_expr(tt->text);
                if (!time) {
                    err(*tt, "malformed time expression");
                    continue;
                }
                if (time->literal && *time->literal < 0.0) {
                    err(*tt, "negative duration");
                    continue;
                }
                steps.push_back({PulseStep{{std::move(upper), std::move(lower), *omega,
                                            phase},
                                           time->literal.value_or(0.0), time->symbolic},
                                 span, time});
            } else if (kind.text == "measure") {
                check_keys(args, {"coeffs", "outcome"});
                if (args.positional.size() != 1) {
                    err(kind, "expected: step measure coeffs=<level:re:im[;...]> "
                              "outcome=<hit|miss>");
                    continue;
                }
                const Token* ct = require_key(args, kind, "coeffs");
                const Token* ot = require_key(args, kind, "outcome");
                if (!ct || !ot) continue;
                MeasureStep m;
                if (ot->text == "hit")
                    m.keep = MeasureStep::Keep::hit;
                else if (ot->text == "miss")
                    m.keep = MeasureStep::Keep::miss;
                else {
                    err(*ot, "outcome must be 'hit' or 'miss'");
                    continue;
                }
                bool coeffs_ok = true;
                std::string_view rest = ct->text;
                while (true) {
                    std::size_t semi = rest.find(';');
                    std::string_view part = rest.substr(0, semi);
                    std::size_t c1 = part.find(':');
                    std::size_t c2 = c1 == std::string_view::npos
                                         ? std::string_view::npos
                                         : part.find(':', c1 + 1);
                    if (c1 == std::string_view::npos || c1 == 0) {
                        err(*ct, "coefficient entry must be level:re:im");
                        coeffs_ok = false;
                        break;
                    }
                    LevelId id(part.substr(0, c1));
                    if (spec.level_index(id) < 0) {
                        err(*ct, "unknown level '" + id + "'");
                        coeffs_ok = false;
                        break;
                    }
                    double re = 0.0, im = 0.0;
                    if (c2 == std::string_view::npos) {
                        auto v = detail::parse_double(part.substr(c1 + 1));
                        if (!v) {
                            err(*ct, "malformed coefficient");
                            coeffs_ok = false;
                            break;
                        }
                        re = *v;
                    } else {
                        auto vr = detail::parse_double(part.substr(c1 + 1, c2 - c1 - 1));
                        auto vi = detail::parse_double(part.substr(c2 + 1));
                        if (!vr || !vi) {
                            err(*ct, "malformed coefficient");
                            coeffs_ok = false;
                            break;
                        }
                        re = *vr;
                        im = *vi;
                    }
                    m.projector.emplace_back(std::move(id), Complex(re, im));
                    if (semi == std::string_view::npos) break;
                    rest = rest.substr(semi + 1);
                }
                if (!coeffs_ok) continue;
                double norm_sq = 0.0;
                for (const auto& [id, c] : m.projector) norm_sq += std::norm(c);
                if (std::abs(norm_sq - 1.0) > 1e-9) {
                    err(*ct, "measurement coefficients must be normalized");
                    continue;
                }
                steps.push_back({std::move(m), span, std::nullopt});
            } else {
                err(kind, "unknown step kind '" + std::string(kind.text) + "'");
            }
        } else {
            err(head, "unknown directive '" + std::string(head.text) + "'");
        }
    }

    if (spec.atom.levels.empty() && spec.modes.empty()) {
        errors.push_back({{1, 1, 1}, "no system defined", ""});
        return result;
    }
    if (!init)
        errors.push_back({{1, 1, 1}, "no initial state (missing init directive)", ""});

    // Resolve symbolic durations against each step's unique rate.
    for (PendingStep& ps : steps) {
        if (!ps.time || !ps.time->symbolic) continue;
        const SymbolicTime& sym = *ps.time->symbolic;
        try {
            if (auto* is = std::get_if<InteractStep>(&ps.step)) {
                double rate = unique_interact_rate(spec, *is);
                is->duration = symbolic_duration(sym, rate);
            } else if (auto* pl = std::get_if<PulseStep>(&ps.step)) {
                pl->duration = symbolic_duration(sym, pl->drive.rabi);
            }
        } catch (const Error& e) {
            errors.push_back({ps.span, e.what(), ""});
        }
    }

    if (!errors.empty()) return result;

    try {
        spec.validate();
        BasisPtr basis = make_basis(spec);
        Protocol p{basis, basis_ket(basis, *init), {}};
        for (PendingStep& ps : steps) p.steps.push_back(std::move(ps.step));
        result.protocol = std::move(p);
    } catch (const Error& e) {
        errors.push_back({{1, 1, 1}, e.what(), ""});
    }
    return result;
}

// ---------------------------------------------------------------------------
// Canonical serialization (17 significant digits, symbolic times preserved)

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v,
                                   std::chars_format::general, 17);
    return std::string(buf, ptr);
}

inline std::string format_time(double duration, const std::optional<SymbolicTime>& sym) {
    if (!sym) return format_double(duration);
    switch (sym->rule) {
        case TimingEntry::Rule::half_rabi:
            return "half_rabi(" + std::to_string(sym->m) + ")";
        case TimingEntry::Rule::quarter_rabi:
            return "quarter_rabi(" + std::to_string(sym->m) + ")";
        case TimingEntry::Rule::pi_pulse: return "pi_pulse";
        case TimingEntry::Rule::half_pi_pulse: return "half_pi_pulse";
        case TimingEntry::Rule::literal: break;
    }
    return format_double(duration);
}

} // namespace detail

inline std::string serialize_protocol(const Protocol& p) {
    const SystemSpec& spec = p.system();
    std::string out;
    for (const LevelId& l : spec.atom.levels) out += "level " + l + "\n";
    for (const ModeSpec& m : spec.modes)
        out += "mode " + m.id + " nmax=" + std::to_string(m.n_max) + "\n";
    for (const Coupling& c : spec.couplings)
        out += "couple " + c.mode + " " + c.upper + " " + c.lower + " g=" +
               detail::format_double(c.g) + "\n";

    const Eigen::VectorXcd& amps = p.initial.amplitudes();
    int init_idx = 0;
    for (int i = 0; i < amps.size(); ++i)
        if (std::norm(amps[i]) > 0.5) init_idx = i;
    out += "init level=" + p.basis->state_at(init_idx).level + "\n";

    for (const ProtocolStep& step : p.steps) {
        if (const auto* r = std::get_if<RamseyStep>(&step)) {
            out += "step ramsey " + r->level1 + " " + r->level2 + " phi=" +
                   detail::format_double(r->phi) + "\n";
        } else if (const auto* i = std::get_if<InteractStep>(&step)) {
            out += "step interact modes=";
            for (std::size_t k = 0; k < i->modes.size(); ++k)
                out += (k ? "," : "") + i->modes[k];
            out += " t=" + detail::format_time(i->duration, i->timing) + "\n";
        } else if (const auto* pl = std::get_if<PulseStep>(&step)) {
            out += "step pulse " + pl->drive.upper + " " + pl->drive.lower +
                   " omega=" + detail::format_double(pl->drive.rabi);
            if (pl->drive.phase != 0.0)
                out += " phase=" + detail::format_double(pl->drive.phase);
            out += " t=" + detail::format_time(pl->duration, pl->timing) + "\n";
        } else if (const auto* m = std::get_if<MeasureStep>(&step)) {
            out += "step measure coeffs=";
            for (std::size_t k = 0; k < m->projector.size(); ++k) {
                const auto& [id, c] = m->projector[k];
                out += (k ? ";" : "") + id + ":" + detail::format_double(c.real()) +
                       ":" + detail::format_double(c.imag());
            }
            out += " outcome=";
            out += m->keep == MeasureStep::Keep::hit ? "hit" : "miss";
            out += "\n";
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Feasibility parameter files: one key=value per line, same comment rules

struct FeasibilityParseResult {
    std::optional<FeasibilityParams> params; // engaged iff errors is empty
    std::vector<ParseError> errors;

    bool ok() const { return errors.empty(); }
};

inline FeasibilityParseResult parse_feasibility_params(std::string_view text) {
    FeasibilityParseResult result;
    FeasibilityParams params;
    for (const std::vector<detail::Token>& line : detail::tokenize(text)) {
        if (line.empty()) continue;
        if (line.size() != 1) {
            result.errors.push_back({line[1].span(), "expected one key=value per line",
                                     std::string(line[1].text)});
            continue;
        }
        const detail::Token& t = line[0];
        std::size_t eq = t.text.find('=');
        if (eq == std::string_view::npos || eq == 0) {
            result.errors.push_back({t.span(), "expected key=value", std::string(t.text)});
            continue;
        }
        std::string key(t.text.substr(0, eq));
        auto v = detail::parse_double(t.text.substr(eq + 1));
        if (!v) {
            result.errors.push_back({t.span(), "malformed number for '" + key + "'",
                                     std::string(t.text)});
            continue;
        }
        if (key == "velocity" || key == "atom_velocity")
            params.atom_velocity = *v;
        else if (key == "cavity_length")
            params.cavity_length = *v;
        else if (key == "atomic_lifetime")
            params.atomic_lifetime = *v;
        else if (key == "cavity_lifetime")
            params.cavity_lifetime = *v;
        else if (key == "omega")
            params.drive_si = *v;
        else if (key.rfind("g.", 0) == 0 && key.size() > 2)
            params.couplings_si[key.substr(2)] = *v;
        else
            result.errors.push_back({t.span(), "unknown key '" + key + "'", key});
    }
    if (!result.errors.empty()) return result;
    try {
        params.validate();
        result.params = std::move(params);
    } catch (const Error& e) {
        result.errors.push_back({{1, 1, 1}, e.what(), ""});
    }
    return result;
}

} // namespace cavent
