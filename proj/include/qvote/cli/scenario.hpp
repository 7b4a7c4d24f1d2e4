#pragma once

/**
 * @file
 * Scenario files, attack descriptors and apparatus files for the qvote CLI.
 *
 * A scenario is a YAML mapping:
 *
 *     n: 4
 *     event:
 *       checks: [[1, 2]]
 *       votes: {3: 1, 4: 0}
 *     attack: {single-qubit: 1}
 *     mode: {monte-carlo: {shots: 10000, seed: 7}}
 *
 * `event` may also be given in the compact form "(1,2) 3:1 4:0". `attack` is
 * one of `none`, `{single-qubit: i}`, `{diagonal-phases: [...]}`,
 * `{apparatus: file.json}` or `{random: seed}`; `mode` is `exact` (default)
 * or `{monte-carlo: {shots: N, seed: S}}`.
 *
 * An apparatus file is a JSON array of shape d_s x d_s x D whose leaves are
 * [re, im] pairs; entry [pi-1][pi'-1][x] is component x of |a_{pi pi'}>.
 */

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "json.hpp"
#include "qvote/attacks.hpp"
#include "qvote/protocol.hpp"

namespace qvote::cli {

/// Malformed scenario, attack descriptor or apparatus file.
class ScenarioError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct NoAttack {};
struct SingleQubitAttack {
    int voter;
};
struct DiagonalPhases {
    std::vector<double> phases;
};
struct ApparatusFile {
    std::string path;
};
struct RandomApparatus {
    std::uint64_t seed;
};

using AttackSpec =
    std::variant<NoAttack, SingleQubitAttack, DiagonalPhases, ApparatusFile, RandomApparatus>;

struct ExactMode {};
struct MonteCarloMode {
    std::uint64_t shots;
    std::uint64_t seed;
};
using Mode = std::variant<ExactMode, MonteCarloMode>;

struct ScenarioConfig {
    int n;
    Event event;
    AttackSpec attack;
    Mode mode;
};

inline std::string format_number(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

inline std::string describe(const AttackSpec &spec) {
    return std::visit(
        [](const auto &a) -> std::string {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, NoAttack>) {
                return "none";
            } else if constexpr (std::is_same_v<T, SingleQubitAttack>) {
                return "single-qubit(" + std::to_string(a.voter) + ")";
            } else if constexpr (std::is_same_v<T, DiagonalPhases>) {
                std::string out = "diagonal-phases(";
                for (std::size_t i = 0; i < a.phases.size(); ++i) {
                    out += (i ? "," : "") + format_number(a.phases[i]);
                }
                return out + ")";
            } else if constexpr (std::is_same_v<T, ApparatusFile>) {
                return "apparatus(" + a.path + ")";
            } else {
                return "random(seed=" + std::to_string(a.seed) + ")";
            }
        },
        spec);
}

/// Accepts a decimal number or a multiple of pi: "pi", "-pi", "pi/2", "0.5pi".
inline double parse_angle(const std::string &text) {
    static const std::regex pi_form(R"(^\s*([+-]?[0-9]*\.?[0-9]*)\s*\*?\s*pi\s*(?:/\s*([0-9]+(?:\.[0-9]*)?))?\s*$)");
    std::smatch m;
    if (std::regex_match(text, m, pi_form)) {
        double coeff = 1.0;
        const std::string c = m[1].str();
        if (c == "-") {
            coeff = -1.0;
        } else if (!c.empty() && c != "+") {
            coeff = std::stod(c);
        }
        double value = coeff * std::numbers::pi;
        if (m[2].matched) {
            value /= std::stod(m[2].str());
        }
        return value;
    }
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception &) {
        throw ScenarioError("invalid angle \"" + text + "\"");
    }
    if (used != text.size()) {
        throw ScenarioError("invalid angle \"" + text + "\"");
    }
    return value;
}

namespace detail {

inline std::uint64_t parse_unsigned(const std::string &text, const std::string &what) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        if (!text.empty() && text.front() == '-') {
            throw std::invalid_argument("negative");
        }
        v = std::stoull(text, &used);
    } catch (const std::exception &) {
        throw ScenarioError("invalid " + what + " \"" + text + "\"");
    }
    if (used != text.size()) {
        throw ScenarioError("invalid " + what + " \"" + text + "\"");
    }
    return v;
}

} // namespace detail

/// Command-line attack descriptor: none | single-qubit:I |
/// diagonal-phases:A,B,... | apparatus:PATH | random:SEED.
inline AttackSpec parse_attack_spec(const std::string &text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (kind == "none" && colon == std::string::npos) {
        return NoAttack{};
    }
    if (colon == std::string::npos || arg.empty()) {
        throw ScenarioError("attack descriptor \"" + text + "\" needs an argument");
    }
    if (kind == "single-qubit") {
        return SingleQubitAttack{static_cast<int>(detail::parse_unsigned(arg, "voter index"))};
    }
    if (kind == "diagonal-phases") {
        DiagonalPhases out;
        std::stringstream ss(arg);
        std::string item;
        while (std::getline(ss, item, ',')) {
            out.phases.push_back(parse_angle(item));
        }
        return out;
    }
    if (kind == "apparatus") {
        return ApparatusFile{arg};
    }
    if (kind == "random") {
        return RandomApparatus{detail::parse_unsigned(arg, "seed")};
    }
    throw ScenarioError("unknown attack kind \"" + kind + "\"");
}

/// Parses the compact event form "(1,2) 3:1 4:0".
inline Event parse_event(const std::string &text, int n) {
    if (n < 1) {
        throw ScenarioError("voter count must be >= 1");
    }
    static const std::regex token(R"(\(\s*(\d+)\s*,\s*(\d+)\s*\)|(\d+)\s*:\s*([01])|(\S+))");
    std::vector<std::optional<VoterAction>> slots(static_cast<std::size_t>(n));
    auto assign = [&](int voter, VoterAction a) {
        if (voter < 1 || voter > n) {
            throw ScenarioError("voter " + std::to_string(voter) + " outside 1.." +
                                std::to_string(n));
        }
        auto &slot = slots[static_cast<std::size_t>(voter - 1)];
        if (slot) {
            throw ScenarioError("voter " + std::to_string(voter) + " is assigned twice");
        }
        slot = a;
    };
    for (auto it = std::sregex_iterator(text.begin(), text.end(), token);
         it != std::sregex_iterator(); ++it) {
        const auto &m = *it;
        if (m[1].matched) {
            const int a = std::stoi(m[1].str());
            const int b = std::stoi(m[2].str());
            if (a == b) {
                throw ScenarioError("voter " + std::to_string(a) + " cannot check with itself");
            }
            assign(a, Check{b});
            assign(b, Check{a});
        } else if (m[3].matched) {
            assign(std::stoi(m[3].str()), Vote{std::stoi(m[4].str())});
        } else {
            throw ScenarioError("unrecognized event token \"" + m[5].str() + "\"");
        }
    }
    std::vector<VoterAction> actions;
    for (int i = 1; i <= n; ++i) {
        const auto &slot = slots[static_cast<std::size_t>(i - 1)];
        if (!slot) {
            throw ScenarioError("voter " + std::to_string(i) + " has no action");
        }
        actions.push_back(*slot);
    }
    try {
        return Event(std::move(actions));
    } catch (const std::invalid_argument &e) {
        throw ScenarioError(e.what());
    }
}

// ---------------------------------------------------------------------------
// Apparatus files

inline ApparatusSpec apparatus_from_json(const nlohmann::json &doc, int n, int s) {
    const std::size_t d = WeightClass(n, s).dim();
    if (!doc.is_array() || doc.size() != d) {
        throw ScenarioError("apparatus array must have " + std::to_string(d) +
                            " rows for n=" + std::to_string(n) + ", s=" + std::to_string(s));
    }
    std::size_t D = 0;
    std::vector<Vector> states;
    for (std::size_t pi = 0; pi < d; ++pi) {
        const auto &row = doc[pi];
        if (!row.is_array() || row.size() != d) {
            throw ScenarioError("apparatus row " + std::to_string(pi + 1) + " must have " +
                                std::to_string(d) + " entries");
        }
        for (std::size_t pj = 0; pj < d; ++pj) {
            const auto &vec = row[pj];
            if (!vec.is_array() || vec.empty()) {
                throw ScenarioError("apparatus entry [" + std::to_string(pi + 1) + "][" +
                                    std::to_string(pj + 1) + "] must be a non-empty array");
            }
            if (D == 0) {
                D = vec.size();
            } else if (vec.size() != D) {
                throw ScenarioError("apparatus vectors differ in length");
            }
            Vector v(static_cast<Eigen::Index>(D));
            for (std::size_t x = 0; x < D; ++x) {
                const auto &c = vec[x];
                if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number()) {
                    throw ScenarioError("apparatus component must be a [re, im] pair");
                }
                v(static_cast<Eigen::Index>(x)) = Complex(c[0].get<double>(), c[1].get<double>());
            }
            states.push_back(std::move(v));
        }
    }
    return ApparatusSpec(n, s, D, std::move(states));
}

inline nlohmann::json apparatus_to_json(const ApparatusSpec &spec) {
    nlohmann::json doc = nlohmann::json::array();
    for (std::size_t pi = 1; pi <= spec.d_s(); ++pi) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t pj = 1; pj <= spec.d_s(); ++pj) {
            nlohmann::json vec = nlohmann::json::array();
            for (const auto &c : spec.at(pi, pj)) {
                vec.push_back({c.real(), c.imag()});
            }
            row.push_back(std::move(vec));
        }
        doc.push_back(std::move(row));
    }
    return doc;
}

inline ApparatusSpec load_apparatus_file(const std::string &path, int n, int s) {
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError("cannot open apparatus file \"" + path + "\"");
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error &e) {
        throw ScenarioError("apparatus file \"" + path + "\": " + e.what());
    }
    return apparatus_from_json(doc, n, s);
}

/// Channel for an attack descriptor after a tally of s; nullopt for none.
inline std::optional<AttackChannel> build_attack(const AttackSpec &spec, int n, int s) {
    try {
        return std::visit(
            [&](const auto &a) -> std::optional<AttackChannel> {
                using T = std::decay_t<decltype(a)>;
                if constexpr (std::is_same_v<T, NoAttack>) {
                    return std::nullopt;
                } else if constexpr (std::is_same_v<T, SingleQubitAttack>) {
                    return single_qubit_attack(a.voter, n);
                } else if constexpr (std::is_same_v<T, DiagonalPhases>) {
                    return apparatus_to_channel(diagonal_phase_attack(s, n, a.phases));
                } else if constexpr (std::is_same_v<T, ApparatusFile>) {
                    return apparatus_to_channel(load_apparatus_file(a.path, n, s));
                } else {
                    std::mt19937_64 rng(a.seed);
                    return apparatus_to_channel(random_apparatus(n, s, rng));
                }
            },
            spec);
    } catch (const std::invalid_argument &e) {
        throw ScenarioError(describe(spec) + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Scenario files

namespace detail {

inline std::string where(const std::string &source, const YAML::Node &node,
                         const std::string &field) {
    std::string out = source;
    if (node.IsDefined() && node.Mark().line >= 0) {
        out += ":" + std::to_string(node.Mark().line + 1);
    }
    return out + ": field '" + field + "'";
}

template <class T>
T scalar_as(const std::string &source, const YAML::Node &node, const std::string &field) {
    if (!node.IsDefined() || node.IsNull()) {
        throw ScenarioError(where(source, node, field) + ": missing");
    }
    if (!node.IsScalar()) {
        throw ScenarioError(where(source, node, field) + ": expected a scalar");
    }
    try {
        return node.as<T>();
    } catch (const YAML::Exception &) {
        throw ScenarioError(where(source, node, field) + ": cannot read \"" +
                            node.Scalar() + "\"");
    }
}

inline Event event_from_yaml(const std::string &source, const YAML::Node &node, int n) {
    const std::string field = "event";
    if (!node.IsDefined()) {
        throw ScenarioError(where(source, node, field) + ": missing");
    }
    try {
        if (node.IsScalar()) {
            return parse_event(node.Scalar(), n);
        }
        if (!node.IsMap()) {
            throw ScenarioError("expected a mapping with 'votes' and/or 'checks'");
        }
        std::ostringstream compact;
        if (const auto checks = node["checks"]; checks.IsDefined()) {
            if (!checks.IsSequence()) {
                throw ScenarioError(where(source, checks, "event.checks") +
                                    ": expected a list of [i, j] pairs");
            }
            for (const auto &pair : checks) {
                if (!pair.IsSequence() || pair.size() != 2) {
                    throw ScenarioError(where(source, pair, "event.checks") +
                                        ": each pair must be [i, j]");
                }
                compact << '(' << scalar_as<int>(source, pair[0], "event.checks") << ','
                        << scalar_as<int>(source, pair[1], "event.checks") << ") ";
            }
        }
        if (const auto votes = node["votes"]; votes.IsDefined()) {
            if (!votes.IsMap()) {
                throw ScenarioError(where(source, votes, "event.votes") +
                                    ": expected a mapping voter: bit");
            }
            for (const auto &kv : votes) {
                const int voter = scalar_as<int>(source, kv.first, "event.votes");
                const int bit = scalar_as<int>(source, kv.second, "event.votes");
                if (bit != 0 && bit != 1) {
                    throw ScenarioError(where(source, kv.second, "event.votes") +
                                        ": vote must be 0 or 1");
                }
                compact << voter << ':' << bit << ' ';
            }
        }
        return parse_event(compact.str(), n);
    } catch (const ScenarioError &e) {
        const std::string msg = e.what();
        if (msg.rfind(source, 0) == 0) {
            throw;
        }
        throw ScenarioError(where(source, node, field) + ": " + msg);
    }
}

inline AttackSpec attack_from_yaml(const std::string &source, const YAML::Node &node,
                                   const std::filesystem::path &base_dir) {
    if (!node.IsDefined() || node.IsNull()) {
        return NoAttack{};
    }
    if (node.IsScalar()) {
        if (node.Scalar() == "none") {
            return NoAttack{};
        }
        throw ScenarioError(where(source, node, "attack") + ": unknown attack \"" +
                            node.Scalar() + "\"");
    }
    if (!node.IsMap() || node.size() != 1) {
        throw ScenarioError(where(source, node, "attack") +
                            ": expected 'none' or a single-key mapping");
    }
    const auto entry = *node.begin();
    const std::string kind = entry.first.as<std::string>();
    const YAML::Node value = entry.second;
    const std::string field = "attack." + kind;
    if (kind == "single-qubit") {
        return SingleQubitAttack{scalar_as<int>(source, value, field)};
    }
    if (kind == "diagonal-phases") {
        if (!value.IsSequence()) {
            throw ScenarioError(where(source, value, field) + ": expected a list of angles");
        }
        DiagonalPhases out;
        for (const auto &v : value) {
            try {
                out.phases.push_back(parse_angle(scalar_as<std::string>(source, v, field)));
            } catch (const ScenarioError &e) {
                throw ScenarioError(where(source, v, field) + ": " + e.what());
            }
        }
        return out;
    }
    if (kind == "apparatus") {
        std::filesystem::path p = scalar_as<std::string>(source, value, field);
        if (p.is_relative()) {
            p = base_dir / p;
        }
        return ApparatusFile{p.string()};
    }
    if (kind == "random") {
        return RandomApparatus{scalar_as<std::uint64_t>(source, value, field)};
    }
    throw ScenarioError(where(source, entry.first, "attack") + ": unknown attack kind \"" +
                        kind + "\"");
}

inline Mode mode_from_yaml(const std::string &source, const YAML::Node &node) {
    if (!node.IsDefined() || node.IsNull()) {
        return ExactMode{};
    }
    if (node.IsScalar()) {
        if (node.Scalar() == "exact") {
            return ExactMode{};
        }
        throw ScenarioError(where(source, node, "mode") + ": unknown mode \"" + node.Scalar() +
                            "\"");
    }
    const auto mc = node["monte-carlo"];
    if (!node.IsMap() || node.size() != 1 || !mc.IsDefined() || !mc.IsMap()) {
        throw ScenarioError(where(source, node, "mode") +
                            ": expected 'exact' or {monte-carlo: {shots: N, seed: S}}");
    }
    const auto shots = scalar_as<std::uint64_t>(source, mc["shots"], "mode.monte-carlo.shots");
    if (shots == 0) {
        throw ScenarioError(where(source, mc["shots"], "mode.monte-carlo.shots") +
                            ": must be positive");
    }
    return MonteCarloMode{shots,
                          scalar_as<std::uint64_t>(source, mc["seed"], "mode.monte-carlo.seed")};
}

} // namespace detail

/// Parses scenario text; `source` names it in diagnostics and `base_dir`
/// resolves relative apparatus paths.
inline ScenarioConfig parse_scenario(const std::string &text, const std::string &source = "<scenario>",
                                     const std::filesystem::path &base_dir = ".") {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException &e) {
        throw ScenarioError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!root.IsMap()) {
        throw ScenarioError(source + ": scenario must be a mapping");
    }
    for (const auto &kv : root) {
        const auto key = kv.first.as<std::string>();
        if (key != "n" && key != "event" && key != "attack" && key != "mode") {
            throw ScenarioError(detail::where(source, kv.first, key) + ": unknown field");
        }
    }
    const int n = detail::scalar_as<int>(source, root["n"], "n");
    if (n < 1 || n > kMaxQubits) {
        throw ScenarioError(detail::where(source, root["n"], "n") + ": must be in 1.." +
                            std::to_string(kMaxQubits));
    }
    Event event = detail::event_from_yaml(source, root["event"], n);
    AttackSpec attack = detail::attack_from_yaml(source, root["attack"], base_dir);
    Mode mode = detail::mode_from_yaml(source, root["mode"]);
    return {n, std::move(event), std::move(attack), mode};
}

inline ScenarioConfig load_scenario(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError("cannot open scenario file \"" + path + "\"");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str(), path, std::filesystem::path(path).parent_path());
}

} // namespace qvote::cli
