#pragma once

/**
 * @file
 * The voting round: event description, ballot encoding, the tallyman's
 * weight-class PVM and the voters' ballot test.
 */

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qvote/ballots.hpp"
#include "qvote/errors.hpp"
#include "qvote/qstate.hpp"

namespace qvote {

inline constexpr int kMaxEnumeratedVoters = 8;
inline constexpr int kMaxDenseProjectorQubits = 10;

struct Vote {
    int bit;
    friend bool operator==(const Vote &, const Vote &) = default;
};

struct Check {
    int partner;
    friend bool operator==(const Check &, const Check &) = default;
};

using VoterAction = std::variant<Vote, Check>;

/**
 * @brief Classical description of one round: what each voter does.
 *
 * Voters are numbered 1..n and voter i owns qubit i. Check actions must pair
 * voters symmetrically; the constructor rejects anything else.
 */
class Event {
  public:
    explicit Event(std::vector<VoterAction> actions) : actions_(std::move(actions)) {
        const int n = this->n();
        if (n < 1) {
            throw std::invalid_argument("event needs at least one voter");
        }
        for (int i = 1; i <= n; ++i) {
            const auto &a = action(i);
            if (const auto *v = std::get_if<Vote>(&a)) {
                if (v->bit != 0 && v->bit != 1) {
                    throw std::invalid_argument("voter " + std::to_string(i) +
                                                " votes " + std::to_string(v->bit) +
                                                "; votes must be 0 or 1");
                }
                continue;
            }
            const int j = std::get<Check>(a).partner;
            if (j < 1 || j > n || j == i) {
                throw std::invalid_argument("voter " + std::to_string(i) +
                                            " has invalid check partner " + std::to_string(j));
            }
            const auto *back = std::get_if<Check>(&action(j));
            if (back == nullptr || back->partner != i) {
                throw std::invalid_argument("check pairing is not symmetric between voters " +
                                            std::to_string(i) + " and " + std::to_string(j));
            }
        }
    }

    /// Event where every voter votes the corresponding bit of `m`.
    static Event all_voting(const BitString &m) {
        std::vector<VoterAction> actions;
        for (int i = 1; i <= m.length(); ++i) {
            actions.emplace_back(Vote{m.bit(i)});
        }
        return Event(std::move(actions));
    }

    /// Voters in `pairs` check together; everyone else votes bits[i].
    static Event with_checks(const BitString &bits,
                             const std::vector<std::pair<int, int>> &pairs) {
        std::vector<VoterAction> actions;
        for (int i = 1; i <= bits.length(); ++i) {
            actions.emplace_back(Vote{bits.bit(i)});
        }
        for (const auto &[a, b] : pairs) {
            if (a < 1 || a > bits.length() || b < 1 || b > bits.length()) {
                throw std::invalid_argument("check pair outside voter range");
            }
            for (int v : {a, b}) {
                if (std::holds_alternative<Check>(actions[static_cast<std::size_t>(v - 1)])) {
                    throw std::invalid_argument("voter " + std::to_string(v) +
                                                " is in more than one check pair");
                }
            }
            actions[static_cast<std::size_t>(a - 1)] = Check{b};
            actions[static_cast<std::size_t>(b - 1)] = Check{a};
        }
        return Event(std::move(actions));
    }

    int n() const { return static_cast<int>(actions_.size()); }
    const std::vector<VoterAction> &actions() const { return actions_; }
    const VoterAction &action(int voter) const {
        return actions_.at(static_cast<std::size_t>(voter - 1));
    }

    bool votes(int voter) const { return std::holds_alternative<Vote>(action(voter)); }

    /// Check pairs (i, j) with i < j, sorted by i.
    std::vector<std::pair<int, int>> pairs() const {
        std::vector<std::pair<int, int>> out;
        for (int i = 1; i <= n(); ++i) {
            if (const auto *c = std::get_if<Check>(&action(i)); c && c->partner > i) {
                out.emplace_back(i, c->partner);
            }
        }
        return out;
    }

    /// Number of checking pairs.
    int k() const { return static_cast<int>(pairs().size()); }

    /// Number of "yes" votes.
    int l() const {
        int count = 0;
        for (const auto &a : actions_) {
            if (const auto *v = std::get_if<Vote>(&a); v && v->bit == 1) {
                ++count;
            }
        }
        return count;
    }

    int expected_tally() const { return k() + l(); }

    friend bool operator==(const Event &, const Event &) = default;

  private:
    std::vector<VoterAction> actions_;
};

/// Compact text form, e.g. "(1,2) 3:1 4:0".
inline std::string to_string(const Event &event) {
    std::ostringstream os;
    bool first = true;
    for (int i = 1; i <= event.n(); ++i) {
        const auto &a = event.action(i);
        if (const auto *c = std::get_if<Check>(&a)) {
            if (c->partner < i) {
                continue;
            }
            os << (first ? "" : " ") << '(' << i << ',' << c->partner << ')';
        } else {
            os << (first ? "" : " ") << i << ':' << std::get<Vote>(a).bit;
        }
        first = false;
    }
    return os.str();
}

/// A party of the ballot test: a single voter or a checking pair.
struct Party {
    int voter;
    std::optional<int> partner;

    bool is_pair() const { return partner.has_value(); }
    friend bool operator==(const Party &, const Party &) = default;
};

inline std::string to_string(const Party &p) {
    if (p.partner) {
        return "(" + std::to_string(p.voter) + "," + std::to_string(*p.partner) + ")";
    }
    return std::to_string(p.voter);
}

/// Parties in order of their lowest voter index.
inline std::vector<Party> parties(const Event &event) {
    std::vector<Party> out;
    for (int i = 1; i <= event.n(); ++i) {
        if (const auto *c = std::get_if<Check>(&event.action(i))) {
            if (c->partner > i) {
                out.push_back({i, c->partner});
            }
        } else {
            out.push_back({i, std::nullopt});
        }
    }
    return out;
}

struct TallyOutcome {
    int s;
    double probability;
    StateVector post_state;
};

struct PartyFailure {
    Party party;
    double failure_probability;
};

struct BallotTestReport {
    double pass_probability;
    std::vector<PartyFailure> per_party;

    double failure_probability() const { return 1.0 - pass_probability; }
};

// ---------------------------------------------------------------------------

/// Ballot state: |b_i> for voters, |Psi+> on every checking pair.
inline StateVector encode_event(const Event &event) {
    const int n = event.n();
    detail::check_qubit_count(n);
    std::size_t votes_index = 0;
    for (int i = 1; i <= n; ++i) {
        if (const auto *v = std::get_if<Vote>(&event.action(i)); v && v->bit == 1) {
            votes_index |= std::size_t{1} << (i - 1);
        }
    }
    // Each pair doubles the support: one qubit of the pair set, the other clear.
    std::vector<std::size_t> support{votes_index};
    for (const auto &[i, j] : event.pairs()) {
        std::vector<std::size_t> next;
        next.reserve(support.size() * 2);
        for (auto idx : support) {
            next.push_back(idx | (std::size_t{1} << (j - 1)));
            next.push_back(idx | (std::size_t{1} << (i - 1)));
        }
        support = std::move(next);
    }
    const double amp = 1.0 / std::sqrt(static_cast<double>(support.size()));
    Vector amps = Vector::Zero(static_cast<Eigen::Index>(detail::dim_of(n)));
    for (auto idx : support) {
        amps(static_cast<Eigen::Index>(idx)) = amp;
    }
    return StateVector(n, std::move(amps));
}

/// P(s): projector onto the span of all weight-s basis states.
inline Operator tally_projector(int n, int s) {
    detail::check_qubit_count(n);
    if (n > kMaxDenseProjectorQubits) {
        throw ResourceLimit("dense tally projector limited to " +
                            std::to_string(kMaxDenseProjectorQubits) + " qubits");
    }
    const auto dim = static_cast<Eigen::Index>(detail::dim_of(n));
    Matrix p = Matrix::Zero(dim, dim);
    const WeightClass cls(n, s);
    for (auto v : cls.values()) {
        p(v, v) = 1.0;
    }
    return Operator(std::move(p));
}

/// Exact outcome distribution of the tally PVM {P(s)}.
inline std::vector<TallyOutcome> tally_pvm(const StateVector &state) {
    const int n = state.n_qubits();
    const Vector &psi = state.amplitudes();
    std::vector<double> weight(static_cast<std::size_t>(n + 1), 0.0);
    for (Eigen::Index idx = 0; idx < psi.size(); ++idx) {
        weight[static_cast<std::size_t>(std::popcount(static_cast<std::uint64_t>(idx)))] +=
            std::norm(psi(idx));
    }
    std::vector<TallyOutcome> out;
    for (int s = 0; s <= n; ++s) {
        const double p = weight[static_cast<std::size_t>(s)];
        if (p < kPruneThreshold) {
            continue;
        }
        Vector projected = Vector::Zero(psi.size());
        for (Eigen::Index idx = 0; idx < psi.size(); ++idx) {
            if (std::popcount(static_cast<std::uint64_t>(idx)) == s) {
                projected(idx) = psi(idx);
            }
        }
        out.push_back({s, p, StateVector::normalized(n, std::move(projected))});
    }
    return out;
}

/// Draws one tally outcome from the exact distribution.
template <class URBG>
TallyOutcome sample_tally(const StateVector &state, URBG &rng) {
    auto outcomes = tally_pvm(state);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    double u = uniform(rng);
    for (auto &o : outcomes) {
        if (u < o.probability) {
            return std::move(o);
        }
        u -= o.probability;
    }
    return std::move(outcomes.back());
}

/// Local projector (2x2 or 4x4) of the outcome that passes a party's test.
inline Matrix party_pass_projector(const Event &event, const Party &party) {
    if (party.partner) {
        return bell_projector(BellKind::PsiPlus);
    }
    return computational_projector(std::get<Vote>(event.action(party.voter)).bit);
}

inline std::vector<int> party_qubits(const Party &party) {
    if (party.partner) {
        return {party.voter, *party.partner};
    }
    return {party.voter};
}

/// Dense projector onto the state every party accepts.
inline Operator pass_projector(const Event &event) {
    const int n = event.n();
    detail::check_qubit_count(n);
    if (n > kMaxDenseProjectorQubits) {
        throw ResourceLimit("dense pass projector limited to " +
                            std::to_string(kMaxDenseProjectorQubits) + " qubits");
    }
    const auto dim = static_cast<Eigen::Index>(detail::dim_of(n));
    Matrix total = Matrix::Identity(dim, dim);
    for (const auto &party : parties(event)) {
        const auto qubits = party_qubits(party);
        total = embed(party_pass_projector(event, party), qubits, n).matrix() * total;
    }
    return Operator(std::move(total));
}

inline BallotTestReport ballot_test(const Event &event, const Ensemble &returned) {
    if (returned.n_qubits() != event.n()) {
        throw std::invalid_argument("returned register has " +
                                    std::to_string(returned.n_qubits()) +
                                    " qubits, event has " + std::to_string(event.n()) +
                                    " voters");
    }
    const auto all = parties(event);
    std::vector<double> failure(all.size(), 0.0);
    double pass = 0.0;
    for (const auto &branch : returned.branches()) {
        Vector joint = branch.state.amplitudes();
        for (std::size_t p = 0; p < all.size(); ++p) {
            const auto qubits = party_qubits(all[p]);
            const Matrix proj = party_pass_projector(event, all[p]);
            Vector single = branch.state.amplitudes();
            apply_local(proj, qubits, single);
            failure[p] += branch.probability * (1.0 - single.squaredNorm());
            apply_local(proj, qubits, joint);
        }
        pass += branch.probability * joint.squaredNorm();
    }
    BallotTestReport report{std::clamp(pass, 0.0, 1.0), {}};
    for (std::size_t p = 0; p < all.size(); ++p) {
        report.per_party.push_back({all[p], std::clamp(failure[p], 0.0, 1.0)});
    }
    return report;
}

struct HonestRound {
    std::vector<TallyOutcome> tally;
    BallotTestReport ballot;
};

/// Encode, tally and return the ballots without interference.
inline HonestRound run_honest_round(const Event &event) {
    const StateVector ballots = encode_event(event);
    auto tally = tally_pvm(ballots);
    std::vector<Branch> returned;
    for (const auto &o : tally) {
        returned.push_back({o.probability, o.post_state});
    }
    auto report = ballot_test(event, Ensemble(std::move(returned)));
    return {std::move(tally), std::move(report)};
}

namespace detail {

inline void enumerate_events_from(int voter, std::vector<VoterAction> &actions,
                                  std::vector<bool> &assigned, std::vector<Event> &out) {
    const int n = static_cast<int>(actions.size());
    if (voter > n) {
        out.emplace_back(actions);
        return;
    }
    const auto slot = static_cast<std::size_t>(voter - 1);
    if (assigned[slot]) {
        enumerate_events_from(voter + 1, actions, assigned, out);
        return;
    }
    assigned[slot] = true;
    for (int bit : {0, 1}) {
        actions[slot] = Vote{bit};
        enumerate_events_from(voter + 1, actions, assigned, out);
    }
    for (int partner = voter + 1; partner <= n; ++partner) {
        const auto pslot = static_cast<std::size_t>(partner - 1);
        if (assigned[pslot]) {
            continue;
        }
        assigned[pslot] = true;
        actions[slot] = Check{partner};
        actions[pslot] = Check{voter};
        enumerate_events_from(voter + 1, actions, assigned, out);
        assigned[pslot] = false;
    }
    assigned[slot] = false;
}

} // namespace detail

/**
 * @brief Every event on n voters, optionally only those with tally s.
 *
 * Order: voter 1's choice varies slowest; each voter tries Vote(0), Vote(1),
 * then Check with each still-free higher-numbered voter in ascending order.
 */
inline std::vector<Event> enumerate_events(int n, std::optional<int> s = std::nullopt) {
    if (n < 1) {
        throw std::invalid_argument("voter count must be >= 1");
    }
    if (n > kMaxEnumeratedVoters) {
        throw ResourceLimit("event enumeration limited to " +
                            std::to_string(kMaxEnumeratedVoters) + " voters");
    }
    std::vector<VoterAction> actions(static_cast<std::size_t>(n), Vote{0});
    std::vector<bool> assigned(static_cast<std::size_t>(n), false);
    std::vector<Event> all;
    detail::enumerate_events_from(1, actions, assigned, all);
    if (!s) {
        return all;
    }
    std::vector<Event> filtered;
    for (auto &e : all) {
        if (e.expected_tally() == *s) {
            filtered.push_back(std::move(e));
        }
    }
    return filtered;
}

} // namespace qvote
