// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qvote/cli/commands.hpp"
#include "qvote/qvote.hpp"

using namespace qvote;

namespace {

struct Outcome {
    bool passed = true;
    std::string detail;

    void fail(const std::string &why) {
        if (passed) {
            detail = why;
        }
        passed = false;
    }
};

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

Outcome honest_exactness() {
    Outcome o;
    double worst = 0.0;
    std::size_t count = 0;
    for (int n = 1; n <= 6; ++n) {
        for (const auto &e : enumerate_events(n)) {
            ++count;
            const auto round = run_honest_round(e);
            double p_expected = 0.0;
            for (const auto &t : round.tally) {
                if (t.s == e.expected_tally()) {
                    p_expected += t.probability;
                }
            }
            const double dev = std::max(std::abs(p_expected - 1.0),
                                        std::abs(round.ballot.pass_probability - 1.0));
            worst = std::max(worst, dev);
            if (dev > 1e-10) {
                o.fail("event " + to_string(e) + " deviates by " + fmt(dev));
            }
        }
    }
    if (o.passed) {
        o.detail = std::to_string(count) + " events, max deviation " + fmt(worst);
    }
    return o;
}

Outcome pvm_algebra() {
    Outcome o;
    double worst = 0.0;
    for (int n = 1; n <= 6; ++n) {
        const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
        std::vector<Matrix> p;
        Matrix sum = Matrix::Zero(dim, dim);
        for (int s = 0; s <= n; ++s) {
            p.push_back(tally_projector(n, s).matrix());
            sum += p.back();
        }
        worst = std::max(worst, (sum - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff());
        for (int s = 0; s <= n; ++s) {
            for (int t = 0; t <= n; ++t) {
                const Matrix expect = s == t ? p[static_cast<std::size_t>(s)] : Matrix::Zero(dim, dim);
                const Matrix prod = p[static_cast<std::size_t>(s)] * p[static_cast<std::size_t>(t)];
                worst = std::max(worst, (prod - expect).cwiseAbs().maxCoeff());
            }
        }
    }
    if (worst > 1e-10) {
        o.fail("max entry deviation " + fmt(worst));
    } else {
        o.detail = "n<=6, max entry deviation " + fmt(worst);
    }
    return o;
}

Outcome lemma_exhaustive() {
    Outcome o;
    std::size_t count = 0;
    for (int n = 1; n <= 8; ++n) {
        for (int s = 0; s <= n; ++s) {
            const auto strings = enumerate_weight_class(n, s).strings();
            for (const auto &m : strings) {
                for (const auto &target : strings) {
                    ++count;
                    if (apply_swaps(m, swap_pairing(m, target)) != target) {
                        o.fail(m.str() + " does not reach " + target.str());
                    }
                }
            }
        }
    }
    if (o.passed) {
        o.detail = std::to_string(count) + " ordered pairs, n<=8";
    }
    return o;
}

Outcome single_qubit_law() {
    Outcome o;
    std::size_t count = 0;
    for (int n = 1; n <= 6; ++n) {
        for (int i = 1; i <= n; ++i) {
            const auto attack = single_qubit_attack(i, n);
            for (const auto &e : enumerate_events(n)) {
                ++count;
                const double p = detection_probability(e, attack);
                if (e.votes(i)) {
                    if (std::abs(p) > 1e-12) {
                        o.fail("voting voter " + std::to_string(i) + " in " + to_string(e) +
                               " detected with " + fmt(p));
                    }
                } else if (std::abs(p - 0.5) > 1e-10) {
                    o.fail("checking voter " + std::to_string(i) + " in " + to_string(e) +
                           " detected with " + fmt(p));
                }
            }
        }
    }
    if (o.passed) {
        o.detail = std::to_string(count) + " (event, target) combinations";
    }
    return o;
}

Outcome theorem_sampled() {
    Outcome o;
    std::size_t trials = 0;
    std::size_t skipped = 0;
    double min_best = std::numeric_limits<double>::infinity();
    double identity_worst = 0.0;
    for (int n = 2; n <= 4; ++n) {
        for (int s = 1; s <= n - 1; ++s) {
            const auto summary = theorem_check(n, s, 100, 20240601);
            trials += summary.trials;
            skipped += summary.skipped;
            min_best = std::min(min_best, summary.min_max_detection);
            identity_worst = std::max(identity_worst, summary.identity_max_detection);
            if (summary.failures > 0) {
                o.fail(std::to_string(summary.failures) + " undetected at n=" + std::to_string(n) +
                       " s=" + std::to_string(s));
            }
            if (!(summary.identity_max_detection < 1e-12)) {
                o.fail("identity detected at n=" + std::to_string(n) + " s=" + std::to_string(s));
            }
        }
    }
    if (o.passed) {
        o.detail = std::to_string(trials) + " trials, " + std::to_string(skipped) +
                   " skipped, min max-detection " + fmt(min_best) + ", identity " +
                   fmt(identity_worst);
    }
    return o;
}

ApparatusSpec random_diagonal(int n, int s, std::mt19937_64 &rng, bool phases_only) {
    const std::size_t d = WeightClass(n, s).dim();
    const std::size_t D = phases_only ? 1 : 2;
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi);
    std::vector<Vector> states(d * d, Vector::Zero(static_cast<Eigen::Index>(D)));
    for (std::size_t pi = 0; pi < d; ++pi) {
        Vector v(static_cast<Eigen::Index>(D));
        if (phases_only) {
            v(0) = std::polar(1.0, angle(rng));
        } else {
            for (auto &c : v) {
                c = Complex(gauss(rng), gauss(rng));
            }
            v.normalize();
        }
        states[pi * d + pi] = v;
    }
    return ApparatusSpec(n, s, D, std::move(states));
}

Outcome constructive_reconstruction() {
    Outcome o;
    std::size_t off_checks = 0;
    std::size_t diag_checks = 0;
    std::mt19937_64 rng(99);
    for (int n = 1; n <= 4; ++n) {
        for (int s = 0; s <= n; ++s) {
            const auto cls = enumerate_weight_class(n, s);
            const std::size_t d = cls.dim();
            for (int trial = 0; trial < 10; ++trial) {
                const auto spec = random_apparatus(n, s, rng);
                const auto channel = apparatus_to_channel(spec);
                for (std::size_t pi = 1; pi <= d; ++pi) {
                    for (std::size_t pj = 1; pj <= d; ++pj) {
                        if (pi == pj || spec.at(pi, pj).norm() <= kIdentityTolerance) {
                            continue;
                        }
                        ++off_checks;
                        const double p =
                            detection_probability(Event::all_voting(cls.at(pi)), channel);
                        if (!(p > kDetectionThreshold)) {
                            o.fail("off-diagonal a_" + std::to_string(pi) + std::to_string(pj) +
                                   " missed at n=" + std::to_string(n));
                        }
                    }
                }
            }
            for (int trial = 0; trial < 20; ++trial) {
                const auto spec = random_diagonal(n, s, rng, trial % 2 == 0);
                const auto channel = apparatus_to_channel(spec);
                for (std::size_t pi = 1; pi <= d; ++pi) {
                    for (std::size_t pj = 1; pj <= d; ++pj) {
                        if ((spec.at(pi, pi) - spec.at(pj, pj)).norm() <= kIdentityTolerance) {
                            continue;
                        }
                        ++diag_checks;
                        const auto pairing = swap_pairing(cls.at(pi), cls.at(pj));
                        const auto event = Event::with_checks(cls.at(pi), pairing.pairs);
                        const double p = detection_probability(event, channel);
                        if (!(p > kDetectionThreshold)) {
                            o.fail("diagonal pair (" + std::to_string(pi) + "," +
                                   std::to_string(pj) + ") missed by " + to_string(event));
                        }
                    }
                }
            }
        }
    }
    if (o.passed) {
        o.detail = std::to_string(off_checks) + " off-diagonal and " +
                   std::to_string(diag_checks) + " diagonal witnesses";
    }
    return o;
}

Outcome worked_case() {
    Outcome o;
    const auto attack = apparatus_to_channel(diagonal_phase_attack(1, 2, {0.0, std::numbers::pi}));
    const double p = detection_probability(Event({Check{2}, Check{1}}), attack);
    if (std::abs(p - 1.0) > 1e-12) {
        o.fail("detection " + fmt(p));
    } else {
        o.detail = "detection " + cli::format_number(p);
    }
    return o;
}

Outcome monte_carlo() {
    Outcome o;
    const std::uint64_t shots = 10000;
    const std::uint64_t seed = 20240601;
    std::mt19937_64 rng(5);

    struct Case {
        Event event;
        std::optional<AttackChannel> attack;
    };
    std::vector<Case> cases;
    cases.push_back({Event({Check{2}, Check{1}}), std::nullopt});
    cases.push_back({Event({Check{2}, Check{1}}), single_qubit_attack(1, 2)});
    cases.push_back({Event({Check{2}, Check{1}, Vote{1}}), single_qubit_attack(3, 3)});
    cases.push_back({Event({Check{2}, Check{1}}),
                     apparatus_to_channel(diagonal_phase_attack(1, 2, {0.0, std::numbers::pi}))});
    for (const Event &e : {Event({Check{2}, Check{1}, Vote{1}, Vote{0}}),
                           Event({Check{3}, Check{4}, Check{1}, Check{2}}),
                           Event({Check{2}, Check{1}, Vote{1}, Check{5}, Check{4}})}) {
        cases.push_back({e, apparatus_to_channel(random_apparatus(e.n(), e.expected_tally(), rng))});
    }

    std::size_t compared = 0;
    double worst_z = 0.0;
    const auto check = [&](double freq, double p, const std::string &what) {
        ++compared;
        const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(shots));
        const double dev = std::abs(freq - p);
        if (sigma > 0) {
            worst_z = std::max(worst_z, dev / sigma);
        }
        if (dev > 4 * sigma) {
            o.fail(what + ": frequency " + fmt(freq) + " vs exact " + fmt(p));
        }
    };

    for (const auto &c : cases) {
        const auto ensemble = Ensemble::pure(encode_event(c.event));
        const auto exact = ballot_test(
            c.event, c.attack ? apply_channel(ensemble, c.attack->channel) : ensemble);
        const auto sampled = sample_rounds(c.event, c.attack, shots, seed);
        const std::string label = to_string(c.event);
        check(sampled.frequency(sampled.failures), exact.failure_probability(), label);
        for (std::size_t p = 0; p < exact.per_party.size(); ++p) {
            check(sampled.frequency(sampled.party_failures[p]),
                  exact.per_party[p].failure_probability,
                  label + " party " + to_string(exact.per_party[p].party));
        }
        const auto again = sample_rounds(c.event, c.attack, shots, seed);
        if (again.tally_counts != sampled.tally_counts || again.failures != sampled.failures ||
            again.party_failures != sampled.party_failures) {
            o.fail(label + ": fixed seed not reproducible");
        }
    }

    const cli::ScenarioConfig cfg{5, cases.back().event, cli::RandomApparatus{3},
                                  cli::MonteCarloMode{shots, seed}};
    if (cli::run_report(cfg).dump() != cli::run_report(cfg).dump()) {
        o.fail("report differs between identical seeded runs");
    }

    if (o.passed) {
        o.detail = std::to_string(compared) + " frequencies, max |z| " + fmt(worst_z) +
                   ", reports reproducible";
    }
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"honest-exactness", honest_exactness},
        {"pvm-algebra", pvm_algebra},
        {"lemma-exhaustive", lemma_exhaustive},
        {"single-qubit-law", single_qubit_law},
        {"theorem-sampled", theorem_sampled},
        {"constructive-witnesses", constructive_reconstruction},
        {"worked-case", worked_case},
        {"monte-carlo", monte_carlo},
    };
    int failed = 0;
    for (const auto &[name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception &e) {
            o.fail(std::string("exception: ") + e.what());
        }
        std::printf("%s %-24s %s\n", o.passed ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
        failed += o.passed ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
                criteria.size());
    return failed == 0 ? 0 : 1;
}
