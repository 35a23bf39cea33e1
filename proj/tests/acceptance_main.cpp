// Standalone acceptance gate.  Runs the numbered check suite plus the
// interface stability checks against the golden protocol files and prints one
// verdict line per criterion.  Exit status 0 iff every criterion passes.
//
// Usage: acceptance [repo_root]

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cavent/cavent.hpp"

namespace {

using namespace cavent;

std::string read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// 10,000 adversarial inputs: half raw printable noise, half token soup from
// the grammar's own vocabulary.  The parsers must return error lists, never
// throw or crash.
std::string fuzz_parsers() {
    std::mt19937 rng(1349);
    std::uniform_int_distribution<int> length(0, 400);
    std::uniform_int_distribution<int> byte(0, 96);
    const std::vector<std::string> vocab = {
        "level", "mode",  "couple", "init",  "step",    "ramsey", "interact",
        "pulse", "measure", "a",    "b",     "c",       "A",      "B",
        "nmax=2", "nmax=0", "g=1",  "g=0",   "t=0.5",   "t=half_rabi(1)",
        "t=quarter_rabi(3)", "t=pi_pulse", "t=", "phi=0", "omega=1", "omega=-2",
        "modes=A", "modes=A,B", "modes=", "coeffs=c:1:0", "coeffs=a:x",
        "outcome=hit", "outcome=miss", "level=a", "level=zz", "#", "=", "==",
        "1e309", "-inf", "nan", ":::", "(", ")", "half_rabi", "velocity=400",
        "g.A=1", "\n", "\t"};
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);

    for (int trial = 0; trial < 10000; ++trial) {
        std::string text;
        if (trial % 2 == 0) {
            int n = length(rng);
            for (int i = 0; i < n; ++i)
                text.push_back(static_cast<char>(' ' + byte(rng)));
        } else {
            int n = length(rng) / 8;
            for (int i = 0; i < n; ++i) {
                text += vocab[pick(rng)];
                text.push_back(trial % 16 == 1 ? '\n' : ' ');
            }
        }
        try {
            ParseResult r = parse_protocol(text);
            if (r.ok() != r.protocol.has_value())
                return "parse result invariant broken on trial " + std::to_string(trial);
            FeasibilityParseResult f = parse_feasibility_params(text);
            if (f.ok() != f.params.has_value())
                return "params result invariant broken on trial " + std::to_string(trial);
        } catch (const std::exception& e) {
            return "parser threw on trial " + std::to_string(trial) + ": " + e.what();
        } catch (...) {
            return "parser threw a non-standard exception on trial " +
                   std::to_string(trial);
        }
    }
    return "";
}

// Each golden file must parse cleanly, run, emit byte-identical JSON on
// repeated emission, and be a fixpoint of serialize(parse(.)).
std::string golden_files_stable(const std::string& root) {
    const char* names[] = {"protocols/bell.proto", "protocols/ghz2.proto",
                           "protocols/ghz3.proto", "protocols/pc_sweep.proto"};
    for (const char* name : names) {
        std::string path = root + "/" + name;
        ParseResult r = parse_protocol(read_all(path));
        if (!r.ok())
            return std::string(name) + ": " +
                   std::to_string(r.errors.size()) + " parse errors (" +
                   r.errors[0].message + ")";

        RunOptions opts;
        opts.tolerate_zero_branch = true;
        SimulationResult run = run_protocol(*r.protocol, opts);
        std::string once = emit_result_json(run);
        std::string twice = emit_result_json(run);
        if (once != twice) return std::string(name) + ": JSON emission not stable";
        if (once.empty() || once.back() != '\n')
            return std::string(name) + ": JSON missing trailing newline";

        std::string canonical = serialize_protocol(*r.protocol);
        ParseResult again = parse_protocol(canonical);
        if (!again.ok())
            return std::string(name) + ": canonical form does not re-parse";
        if (serialize_protocol(*again.protocol) != canonical)
            return std::string(name) + ": serialization is not a fixpoint";
    }
    return "";
}

// The installed verify subcommand must agree: exit 0 and one line per check.
std::string verify_subcommand_passes() {
    std::ostringstream out, err;
    int code = cli_main({"verify"}, out, err);
    if (code != 0)
        return "verify exited with " + std::to_string(code) + "\n" + out.str();
    for (int id = 1; id <= 7; ++id) {
        std::string needle = "check " + std::to_string(id) + " ";
        if (out.str().find(needle) == std::string::npos)
            return "verify output does not enumerate check " + std::to_string(id);
    }
    if (out.str().find("7/7 checks passed") == std::string::npos)
        return "verify did not report 7/7 checks passed";
    return "";
}

} // namespace

int main(int argc, char** argv) {
    const std::string root = argc > 1 ? argv[1] : ".";
    bool all_pass = true;

    std::vector<cavent::CheckResult> checks;
    try {
        checks = cavent::run_self_checks();
    } catch (const std::exception& e) {
        std::cout << "criterion 1-7: FAIL (check suite threw: " << e.what() << ")\n";
        return 1;
    }
    for (const cavent::CheckResult& c : checks) {
        std::cout << "criterion " << c.id << " (" << c.name << "): "
                  << (c.pass ? "PASS" : "FAIL");
        if (!c.pass && !c.detail.empty()) std::cout << " (" << c.detail << ")";
        std::cout << "\n";
        all_pass = all_pass && c.pass;
    }

    std::string detail;
    try {
        detail = fuzz_parsers();
        if (detail.empty()) detail = golden_files_stable(root);
        if (detail.empty()) detail = verify_subcommand_passes();
    } catch (const std::exception& e) {
        detail = e.what();
    }
    std::cout << "criterion 8 (interface stability): "
              << (detail.empty() ? "PASS" : "FAIL");
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
    all_pass = all_pass && detail.empty();

    return all_pass ? 0 : 1;
}
