#pragma once

// run / scan / verify, shared by tools/qvote.cpp and the tests. Each command
// writes its human-readable report to `out` and returns the process exit code.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qvote/attacks.hpp"
#include "qvote/ballots.hpp"
#include "qvote/cli/scenario.hpp"
#include "qvote/montecarlo.hpp"
#include "qvote/protocol.hpp"

namespace qvote::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

inline void write_file(const std::string &path, const std::string &content) {
    std::ofstream f(path);
    if (!f) {
        throw ScenarioError("cannot write \"" + path + "\"");
    }
    f << content;
}

inline nlohmann::json config_json(const ScenarioConfig &config) {
    nlohmann::json c = {{"n", config.n},
                        {"event", to_string(config.event)},
                        {"attack", describe(config.attack)}};
    if (const auto *mc = std::get_if<MonteCarloMode>(&config.mode)) {
        c["mode"] = "monte-carlo";
        c["shots"] = mc->shots;
        c["seed"] = mc->seed;
    } else {
        c["mode"] = "exact";
    }
    return c;
}

} // namespace detail

/// Builds the full report document for a scenario.
inline nlohmann::json run_report(const ScenarioConfig &config) {
    if (config.event.n() != config.n) {
        throw ScenarioError("event has " + std::to_string(config.event.n()) +
                            " voters but n=" + std::to_string(config.n));
    }
    const int s_expected = config.event.expected_tally();
    const auto attack = build_attack(config.attack, config.n, s_expected);

    const auto tally = tally_pvm(encode_event(config.event));
    std::vector<Branch> returned;
    nlohmann::json tally_json = nlohmann::json::array();
    for (const auto &o : tally) {
        tally_json.push_back({{"s", o.s}, {"probability", o.probability}});
        Ensemble e = Ensemble::pure(o.post_state);
        if (attack && (!attack->s || *attack->s == o.s)) {
            e = apply_channel(e, attack->channel);
        }
        for (const auto &b : e.branches()) {
            returned.push_back({o.probability * b.probability, b.state});
        }
    }
    const BallotTestReport ballot = ballot_test(config.event, Ensemble(std::move(returned)));

    nlohmann::json doc;
    doc["command"] = "run";
    doc["config"] = detail::config_json(config);
    doc["tally"] = tally_json;
    doc["pass_probability"] = ballot.pass_probability;
    doc["detection_probability"] = ballot.failure_probability();
    doc["parties"] = nlohmann::json::array();
    for (const auto &pf : ballot.per_party) {
        doc["parties"].push_back(
            {{"party", to_string(pf.party)}, {"failure_probability", pf.failure_probability}});
    }

    if (const auto *mc = std::get_if<MonteCarloMode>(&config.mode)) {
        const SampledRound sampled = sample_rounds(config.event, attack, mc->shots, mc->seed);
        nlohmann::json m;
        m["shots"] = sampled.shots;
        m["seed"] = sampled.seed;
        m["tally_frequencies"] = nlohmann::json::array();
        for (std::size_t s = 0; s < sampled.tally_counts.size(); ++s) {
            if (sampled.tally_counts[s] > 0) {
                m["tally_frequencies"].push_back(
                    {{"s", s}, {"frequency", sampled.frequency(sampled.tally_counts[s])}});
            }
        }
        m["failure_frequency"] = sampled.frequency(sampled.failures);
        m["party_failure_frequencies"] = nlohmann::json::array();
        for (std::size_t p = 0; p < sampled.parties.size(); ++p) {
            m["party_failure_frequencies"].push_back(
                {{"party", to_string(sampled.parties[p])},
                 {"frequency", sampled.frequency(sampled.party_failures[p])}});
        }
        doc["monte_carlo"] = m;
    }
    return doc;
}

inline void print_run_report(const nlohmann::json &doc, std::ostream &out) {
    const auto &c = doc["config"];
    const auto num = [](const nlohmann::json &v) { return format_number(v.get<double>()); };
    out << "config\n"
        << "  n       : " << c["n"].get<int>() << '\n'
        << "  event   : " << c["event"].get<std::string>() << '\n'
        << "  attack  : " << c["attack"].get<std::string>() << '\n'
        << "  mode    : " << c["mode"].get<std::string>();
    if (c.contains("seed")) {
        out << " (shots " << c["shots"].get<std::uint64_t>() << ", seed "
            << c["seed"].get<std::uint64_t>() << ")";
    }
    out << "\ntally\n";
    for (const auto &t : doc["tally"]) {
        out << "  s=" << t["s"].get<int>() << "  probability " << num(t["probability"]) << '\n';
    }
    out << "ballot test\n"
        << "  pass probability       " << num(doc["pass_probability"]) << '\n'
        << "  detection probability  " << num(doc["detection_probability"]) << '\n';
    for (const auto &p : doc["parties"]) {
        out << "  party " << std::left << std::setw(8) << p["party"].get<std::string>()
            << std::right << " failure " << num(p["failure_probability"]) << '\n';
    }
    if (doc.contains("monte_carlo")) {
        const auto &m = doc["monte_carlo"];
        out << "monte-carlo (shots " << m["shots"].get<std::uint64_t>() << ", seed "
            << m["seed"].get<std::uint64_t>() << ")\n";
        for (const auto &t : m["tally_frequencies"]) {
            out << "  s=" << t["s"].get<int>() << "  frequency " << num(t["frequency"]) << '\n';
        }
        out << "  failure frequency      " << num(m["failure_frequency"]) << '\n';
        for (const auto &p : m["party_failure_frequencies"]) {
            out << "  party " << std::left << std::setw(8) << p["party"].get<std::string>()
                << std::right << " failure frequency " << num(p["frequency"]) << '\n';
        }
    }
}

inline int cmd_run(const ScenarioConfig &config, std::ostream &out,
                   const std::optional<std::string> &json_path = std::nullopt) {
    const nlohmann::json doc = run_report(config);
    print_run_report(doc, out);
    if (json_path) {
        detail::write_file(*json_path, doc.dump(2) + "\n");
    }
    return kExitOk;
}

inline int cmd_scan(const AttackSpec &spec, int n, int s, std::ostream &out,
                    const std::optional<std::string> &csv_path = std::nullopt) {
    if (n > kMaxScanVoters) {
        throw ResourceLimit("scan is limited to n <= " + std::to_string(kMaxScanVoters) +
                            " (got n=" + std::to_string(n) + ")");
    }
    if (n < 1 || s < 0 || s > n) {
        throw ScenarioError("scan needs 1 <= n and 0 <= s <= n");
    }
    auto attack = build_attack(spec, n, s);
    const AttackChannel channel = attack ? std::move(*attack) : identity_attack(n, s);
    const DetectionReport report = max_detection(channel, n, s);

    out << "config\n"
        << "  n       : " << n << '\n'
        << "  s       : " << s << '\n'
        << "  attack  : " << describe(spec) << '\n'
        << "events\n";
    std::ostringstream csv;
    csv << "index,event,failure_probability\n";
    for (std::size_t i = 0; i < report.per_event.size(); ++i) {
        const auto &row = report.per_event[i];
        const std::string label = to_string(row.event);
        out << "  " << std::setw(4) << i + 1 << "  " << std::left << std::setw(4 * n + 4)
            << label << std::right << ' ' << format_number(row.failure_probability) << '\n';
        csv << i + 1 << ",\"" << label << "\"," << format_number(row.failure_probability)
            << '\n';
    }
    out << "max detection " << format_number(report.max_probability()) << " at event "
        << report.max_index + 1 << " [" << to_string(report.max_event()) << "]\n";
    if (csv_path) {
        detail::write_file(*csv_path, csv.str());
    }
    return kExitOk;
}

struct VerifyParams {
    std::optional<int> n;
    std::optional<int> s;
    std::size_t trials = 100;
    std::uint64_t seed = 1;
};

/// Exhaustive swap-pairing check for every n up to n_max.
inline int verify_lemma(int n_max, std::ostream &out) {
    if (n_max < 1 || n_max > kMaxStringLength) {
        throw ResourceLimit("lemma suite supports 1 <= n <= " +
                            std::to_string(kMaxStringLength));
    }
    std::uint64_t checked = 0;
    std::uint64_t failures = 0;
    for (int n = 1; n <= n_max; ++n) {
        for (int s = 0; s <= n; ++s) {
            const auto strings = WeightClass(n, s).strings();
            for (std::size_t a = 0; a < strings.size(); ++a) {
                for (std::size_t b = 0; b < strings.size(); ++b) {
                    ++checked;
                    const auto d = diff_sets(strings[a], strings[b]);
                    const auto result = apply_swaps(strings[a], swap_pairing(strings[a], strings[b]));
                    if (result != strings[b] || d.w0.size() != d.w1.size()) {
                        ++failures;
                        out << "FAIL lemma n=" << n << " s=" << s << " pi=" << a + 1
                            << " pi'=" << b + 1 << " got " << result.str() << " expected "
                            << strings[b].str() << '\n';
                    }
                }
            }
        }
    }
    out << "lemma n<=" << n_max << ": " << checked << " (s, pi, pi') triples checked, "
        << failures << " failures -> " << (failures == 0 ? "PASS" : "FAIL") << '\n';
    return failures == 0 ? kExitOk : kExitFailure;
}

/// Completeness and orthogonality of the tally PVM for every n up to n_max.
inline int verify_pvm(int n_max, std::ostream &out) {
    if (n_max < 1 || n_max > kMaxDenseProjectorQubits) {
        throw ResourceLimit("pvm suite supports 1 <= n <= " +
                            std::to_string(kMaxDenseProjectorQubits));
    }
    bool ok = true;
    for (int n = 1; n <= n_max; ++n) {
        const auto dim = static_cast<Eigen::Index>(qvote::detail::dim_of(n));
        std::vector<Operator> projectors;
        Matrix sum = Matrix::Zero(dim, dim);
        for (int s = 0; s <= n; ++s) {
            projectors.push_back(tally_projector(n, s));
            sum += projectors.back().matrix();
        }
        const double completeness = (sum - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff();
        double orthogonality = 0.0;
        for (int a = 0; a <= n; ++a) {
            for (int b = 0; b <= n; ++b) {
                const Matrix &pa = projectors[static_cast<std::size_t>(a)].matrix();
                const Matrix expected = a == b ? pa : Matrix::Zero(dim, dim);
                orthogonality = std::max(
                    orthogonality,
                    (pa * projectors[static_cast<std::size_t>(b)].matrix() - expected)
                        .cwiseAbs()
                        .maxCoeff());
            }
        }
        const bool pass = completeness <= kNormTolerance && orthogonality <= kNormTolerance;
        ok = ok && pass;
        out << "pvm n=" << n << ": completeness deviation " << format_number(completeness)
            << ", orthogonality deviation " << format_number(orthogonality) << " -> "
            << (pass ? "PASS" : "FAIL") << '\n';
    }
    return ok ? kExitOk : kExitFailure;
}

inline int verify_theorem(int n, int s, std::size_t trials, std::uint64_t seed,
                          std::ostream &out) {
    if (n < 1 || s < 0 || s > n) {
        throw ScenarioError("theorem suite needs 1 <= n and 0 <= s <= n");
    }
    const TheoremCheckSummary summary = theorem_check(n, s, trials, seed);
    out << "theorem n=" << n << " s=" << s << " seed=" << seed << ": " << summary.trials
        << " trials, " << summary.skipped << " skipped as trivial, " << summary.failures
        << " undetected; smallest max detection "
        << format_number(summary.trials > summary.skipped ? summary.min_max_detection : 0.0)
        << "; identity max detection " << format_number(summary.identity_max_detection)
        << " -> " << (summary.passed() ? "PASS" : "FAIL") << '\n';
    return summary.passed() ? kExitOk : kExitFailure;
}

inline int cmd_verify(const std::string &suite, const VerifyParams &params, std::ostream &out) {
    if (suite == "lemma") {
        return verify_lemma(params.n.value_or(8), out);
    }
    if (suite == "pvm") {
        return verify_pvm(params.n.value_or(6), out);
    }
    if (suite == "theorem") {
        return verify_theorem(params.n.value_or(3), params.s.value_or(1), params.trials,
                              params.seed, out);
    }
    throw ScenarioError("unknown verification suite \"" + suite + "\"");
}

} // namespace qvote::cli
