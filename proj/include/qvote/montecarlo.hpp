#pragma once

// Shot-by-shot sampling of a voting round: the tally outcome, the branch of
// the tallyman's measurement and every party's ballot-test outcome are drawn
// one after another from a single seeded mt19937_64.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "qvote/attacks.hpp"
#include "qvote/protocol.hpp"
#include "qvote/qstate.hpp"

namespace qvote {

struct SampledRound {
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> tally_counts;  // indexed by s = 0..n
    std::uint64_t failures = 0;               // shots where any party failed
    std::vector<Party> parties;
    std::vector<std::uint64_t> party_failures;

    double frequency(std::uint64_t count) const {
        return shots == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(shots);
    }
};

namespace detail {

template <class URBG>
std::size_t draw_index(const std::vector<double> &weights, URBG &rng) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    double u = uniform(rng);
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
        if (u < weights[i]) {
            return i;
        }
        u -= weights[i];
    }
    return weights.size() - 1;
}

} // namespace detail

inline SampledRound sample_rounds(const Event &event, const std::optional<AttackChannel> &attack,
                                  std::uint64_t shots, std::uint64_t seed) {
    if (shots == 0) {
        throw std::invalid_argument("Monte-Carlo mode needs at least one shot");
    }
    const int n = event.n();
    const auto tally = tally_pvm(encode_event(event));

    // Post-attack ensemble for every possible tally outcome.
    std::vector<double> tally_weights;
    std::vector<Ensemble> returned;
    for (const auto &o : tally) {
        tally_weights.push_back(o.probability);
        Ensemble e = Ensemble::pure(o.post_state);
        if (attack && (!attack->s || *attack->s == o.s)) {
            e = apply_channel(e, attack->channel);
        }
        returned.push_back(std::move(e));
    }
    std::vector<std::vector<double>> branch_weights;
    for (const auto &e : returned) {
        auto &w = branch_weights.emplace_back();
        for (const auto &b : e.branches()) {
            w.push_back(b.probability);
        }
    }

    SampledRound out;
    out.shots = shots;
    out.seed = seed;
    out.tally_counts.assign(static_cast<std::size_t>(n + 1), 0);
    out.parties = parties(event);
    out.party_failures.assign(out.parties.size(), 0);

    std::vector<Matrix> pass_ops;
    std::vector<std::vector<int>> qubits;
    for (const auto &p : out.parties) {
        pass_ops.push_back(party_pass_projector(event, p));
        qubits.push_back(party_qubits(p));
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (std::uint64_t shot = 0; shot < shots; ++shot) {
        const std::size_t t = detail::draw_index(tally_weights, rng);
        ++out.tally_counts[static_cast<std::size_t>(tally[t].s)];
        const std::size_t b = detail::draw_index(branch_weights[t], rng);
        Vector psi = returned[t].branches()[b].state.amplitudes();

        bool any_failed = false;
        for (std::size_t p = 0; p < pass_ops.size(); ++p) {
            Vector passed = psi;
            apply_local(pass_ops[p], qubits[p], passed);
            const double p_pass = passed.squaredNorm();
            const double u = uniform(rng);
            // Outcomes below the pruning threshold are never drawn.
            const bool pass = p_pass >= 1.0 - kPruneThreshold ||
                              (p_pass >= kPruneThreshold && u < p_pass);
            if (pass) {
                psi = passed / std::sqrt(p_pass);
            } else {
                psi -= passed;
                psi /= psi.norm();
                ++out.party_failures[p];
                any_failed = true;
            }
        }
        if (any_failed) {
            ++out.failures;
        }
    }
    return out;
}

} // namespace qvote
