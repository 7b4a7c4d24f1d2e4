#pragma once

/**
 * @file
 * Curious-tallyman attacks.
 *
 * The most general post-tally measurement couples the ballots to an apparatus
 * of dimension D through a unitary fixed by its action on the basis of V_s:
 *
 *     U |m(s,pi)>|a_0> = sum_pi' |m(s,pi')> |a_{pi pi'}>
 *
 * ApparatusSpec stores the d_s x d_s grid of (unnormalized) apparatus vectors.
 * Tracing out the apparatus gives one Kraus operator per apparatus basis
 * vector x:
 *
 *     K_x = sum_{pi,pi'} <x|a_{pi pi'}> |m(s,pi')><m(s,pi)|
 *
 * which acts inside V_s; the orthogonal complement is left untouched.
 */

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/QR>

#include "qvote/ballots.hpp"
#include "qvote/errors.hpp"
#include "qvote/protocol.hpp"
#include "qvote/qstate.hpp"

namespace qvote {

inline constexpr int kMaxScanVoters = 6;
inline constexpr int kMaxTheoremVoters = 5;
inline constexpr double kDetectionThreshold = 1e-9;
inline constexpr double kIdentityTolerance = 1e-9;
inline constexpr double kExactZero = 1e-12;

class ApparatusSpec {
  public:
    /// `states` is row-major: entry (pi-1)*d_s + (pi'-1) holds |a_{pi pi'}>.
    ApparatusSpec(int n, int s, std::size_t apparatus_dim, std::vector<Vector> states)
        : n_(n), s_(s), apparatus_dim_(apparatus_dim), states_(std::move(states)) {
        detail::check_qubit_count(n_);
        d_s_ = WeightClass(n_, s_).dim();
        if (apparatus_dim_ < 1) {
            throw std::invalid_argument("apparatus dimension must be >= 1");
        }
        if (states_.size() != d_s_ * d_s_) {
            throw std::invalid_argument("apparatus grid has " + std::to_string(states_.size()) +
                                        " entries, expected " + std::to_string(d_s_ * d_s_));
        }
        for (const auto &v : states_) {
            if (static_cast<std::size_t>(v.size()) != apparatus_dim_) {
                throw std::invalid_argument("apparatus vector length does not match dimension " +
                                            std::to_string(apparatus_dim_));
            }
        }
    }

    int n() const { return n_; }
    int s() const { return s_; }
    std::size_t d_s() const { return d_s_; }
    std::size_t apparatus_dim() const { return apparatus_dim_; }

    /// |a_{pi pi'}>, both indices 1-based.
    const Vector &at(std::size_t pi, std::size_t pi_prime) const {
        if (pi < 1 || pi > d_s_ || pi_prime < 1 || pi_prime > d_s_) {
            throw std::invalid_argument("apparatus index outside 1.." + std::to_string(d_s_));
        }
        return states_[(pi - 1) * d_s_ + (pi_prime - 1)];
    }

    const std::vector<Vector> &states() const { return states_; }

  private:
    int n_;
    int s_;
    std::size_t d_s_ = 0;
    std::size_t apparatus_dim_;
    std::vector<Vector> states_;
};

struct IsometryCheck {
    bool passed;
    double max_deviation;
};

/// Gram condition sum_pi'' <a_{pi pi''}|a_{pi' pi''}> = delta_{pi pi'}.
inline IsometryCheck validate_isometry(const ApparatusSpec &spec,
                                       double tol = kChannelTolerance) {
    const std::size_t d = spec.d_s();
    double worst = 0.0;
    for (std::size_t a = 1; a <= d; ++a) {
        for (std::size_t b = 1; b <= d; ++b) {
            Complex gram = 0.0;
            for (std::size_t c = 1; c <= d; ++c) {
                gram += spec.at(a, c).dot(spec.at(b, c));
            }
            worst = std::max(worst, std::abs(gram - Complex(a == b ? 1.0 : 0.0)));
        }
    }
    return {worst <= tol, worst};
}

/// Kraus form of a tallyman measurement. `s` is set when the channel is
/// confined to V_s and only meaningful after a tally of s.
struct AttackChannel {
    int n;
    std::optional<int> s;
    KrausChannel channel;
};

inline AttackChannel identity_attack(int n, std::optional<int> s = std::nullopt) {
    detail::check_qubit_count(n);
    return {n, s, KrausChannel::identity(detail::dim_of(n))};
}

inline AttackChannel apparatus_to_channel(const ApparatusSpec &spec) {
    if (const auto check = validate_isometry(spec); !check.passed) {
        throw std::invalid_argument("apparatus states violate the isometry condition "
                                    "(max deviation " +
                                    std::to_string(check.max_deviation) + ")");
    }
    const int n = spec.n();
    const auto dim = static_cast<Eigen::Index>(detail::dim_of(n));
    const std::vector<std::uint32_t> basis = WeightClass(n, spec.s()).values();
    const std::size_t d = spec.d_s();

    std::vector<Matrix> kraus;
    for (std::size_t x = 0; x < spec.apparatus_dim(); ++x) {
        Matrix k = Matrix::Zero(dim, dim);
        for (std::size_t pi = 1; pi <= d; ++pi) {
            for (std::size_t pj = 1; pj <= d; ++pj) {
                k(basis[pj - 1], basis[pi - 1]) = spec.at(pi, pj)(static_cast<Eigen::Index>(x));
            }
        }
        // Apparatus components that are never populated contribute nothing.
        if (k.squaredNorm() >= kPruneThreshold) {
            kraus.push_back(std::move(k));
        }
    }
    // The complement of V_s goes through unchanged; attaching it to a single
    // Kraus operator keeps the set complete since K_x maps V_s into V_s.
    Matrix complement = Matrix::Identity(dim, dim);
    for (auto v : basis) {
        complement(v, v) = 0.0;
    }
    kraus.front() += complement;
    return {n, spec.s(), KrausChannel(std::move(kraus))};
}

/// Computational-basis measurement of qubit i.
inline AttackChannel single_qubit_attack(int i, int n) {
    detail::check_qubit_count(n);
    detail::check_qubit_index(i, n);
    auto projectors = computational_projectors(i, n);
    return {n, std::nullopt,
            KrausChannel({projectors[0].matrix(), projectors[1].matrix()})};
}

/// a_{pi pi'} = delta_{pi pi'} e_1 in a d_s-dimensional apparatus.
inline ApparatusSpec identity_apparatus(int n, int s) {
    const std::size_t d = WeightClass(n, s).dim();
    std::vector<Vector> states(d * d, Vector::Zero(static_cast<Eigen::Index>(d)));
    for (std::size_t pi = 0; pi < d; ++pi) {
        states[pi * d + pi](0) = 1.0;
    }
    return ApparatusSpec(n, s, d, std::move(states));
}

/// a_{pi pi} = exp(i theta_pi) e_1, off-diagonal zero: the unitary
/// diag(exp(i theta_pi)) on V_s.
inline ApparatusSpec diagonal_phase_attack(int s, int n, const std::vector<double> &phases) {
    const std::size_t d = WeightClass(n, s).dim();
    if (phases.size() != d) {
        throw std::invalid_argument("diagonal phase attack needs " + std::to_string(d) +
                                    " phases for n=" + std::to_string(n) +
                                    ", s=" + std::to_string(s) + "; got " +
                                    std::to_string(phases.size()));
    }
    std::vector<Vector> states(d * d, Vector::Zero(static_cast<Eigen::Index>(d)));
    for (std::size_t pi = 0; pi < d; ++pi) {
        states[pi * d + pi](0) = std::polar(1.0, phases[pi]);
    }
    return ApparatusSpec(n, s, d, std::move(states));
}

/**
 * @brief Random apparatus from a Haar-like isometry.
 *
 * A (d_s * D) x d_s complex Gaussian matrix is orthonormalized column-wise;
 * column pi, row (pi'' * D + x) becomes component x of |a_{pi pi''}>.
 */
template <class URBG>
ApparatusSpec random_apparatus(int n, int s, URBG &rng, std::size_t apparatus_dim = 0) {
    const std::size_t d = WeightClass(n, s).dim();
    const std::size_t D = apparatus_dim == 0 ? d : apparatus_dim;
    const auto rows = static_cast<Eigen::Index>(d * D);
    const auto cols = static_cast<Eigen::Index>(d);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix g(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            g(r, c) = Complex(re, im);
        }
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);

    std::vector<Vector> states(d * d, Vector::Zero(static_cast<Eigen::Index>(D)));
    for (std::size_t pi = 0; pi < d; ++pi) {
        for (std::size_t pj = 0; pj < d; ++pj) {
            for (std::size_t x = 0; x < D; ++x) {
                states[pi * d + pj](static_cast<Eigen::Index>(x)) =
                    q(static_cast<Eigen::Index>(pj * D + x), static_cast<Eigen::Index>(pi));
            }
        }
    }
    return ApparatusSpec(n, s, D, std::move(states));
}

/// True when a_{pi pi'} = a_11 delta_{pi pi'}, i.e. no measurement at all.
inline bool is_trivial_measurement(const ApparatusSpec &spec,
                                   double tol = kIdentityTolerance) {
    const std::size_t d = spec.d_s();
    const Vector &ref = spec.at(1, 1);
    for (std::size_t pi = 1; pi <= d; ++pi) {
        for (std::size_t pj = 1; pj <= d; ++pj) {
            const double dev = pi == pj ? (spec.at(pi, pj) - ref).cwiseAbs().maxCoeff()
                                        : spec.at(pi, pj).cwiseAbs().maxCoeff();
            if (dev > tol) {
                return false;
            }
        }
    }
    return true;
}

// ---------------------------------------------------------------------------

/// 1 - pass probability after the attack acts on the honest ballot state.
inline double detection_probability(const Event &event, const AttackChannel &attack) {
    if (event.n() != attack.n) {
        throw std::invalid_argument("attack acts on " + std::to_string(attack.n) +
                                    " qubits, event has " + std::to_string(event.n()) +
                                    " voters");
    }
    if (attack.s && *attack.s != event.expected_tally()) {
        throw std::invalid_argument("attack is confined to s=" + std::to_string(*attack.s) +
                                    " but the event tallies s=" +
                                    std::to_string(event.expected_tally()));
    }
    const Ensemble returned =
        apply_channel(Ensemble::pure(encode_event(event)), attack.channel);
    return std::clamp(1.0 - ballot_test(event, returned).pass_probability, 0.0, 1.0);
}

struct EventDetection {
    Event event;
    double failure_probability;
};

struct DetectionReport {
    std::vector<EventDetection> per_event;
    std::size_t max_index;

    const Event &max_event() const { return per_event.at(max_index).event; }
    double max_probability() const { return per_event.at(max_index).failure_probability; }
};

/// Exhaustive scan over every event with tally s; ties go to the first event.
inline DetectionReport max_detection(const AttackChannel &attack, int n, int s) {
    if (n > kMaxScanVoters) {
        throw ResourceLimit("exhaustive detection scan limited to " +
                            std::to_string(kMaxScanVoters) + " voters");
    }
    if (attack.n != n) {
        throw std::invalid_argument("attack qubit count does not match n");
    }
    auto events = enumerate_events(n, s);
    if (events.empty()) {
        throw std::invalid_argument("no events with tally s=" + std::to_string(s));
    }
    DetectionReport report{{}, 0};
    report.per_event.reserve(events.size());
    for (auto &e : events) {
        const double p = detection_probability(e, attack);
        report.per_event.push_back({std::move(e), p});
        if (p > report.per_event[report.max_index].failure_probability) {
            report.max_index = report.per_event.size() - 1;
        }
    }
    return report;
}

/**
 * @brief The event that exposes a given measurement.
 *
 * A nonzero off-diagonal |a_{pi pi'}> is caught by everyone voting m(s,pi).
 * For a diagonal apparatus with |a_{pi pi}> != |a_{pi' pi'}>, the voters on
 * the positions where m(s,pi) and m(s,pi') differ check in the swap pairs and
 * everyone else votes the shared bits. Returns nullopt for a trivial
 * measurement.
 */
inline std::optional<Event> witness_event(const ApparatusSpec &spec,
                                          double tol = kIdentityTolerance) {
    const WeightClass cls(spec.n(), spec.s());
    const std::size_t d = spec.d_s();
    for (std::size_t pi = 1; pi <= d; ++pi) {
        for (std::size_t pj = 1; pj <= d; ++pj) {
            if (pi != pj && spec.at(pi, pj).cwiseAbs().maxCoeff() > tol) {
                return Event::all_voting(cls.at(pi));
            }
        }
    }
    for (std::size_t pj = 2; pj <= d; ++pj) {
        if ((spec.at(pj, pj) - spec.at(1, 1)).cwiseAbs().maxCoeff() > tol) {
            const BitString m = cls.at(1);
            const SwapPairing pairing = swap_pairing(m, cls.at(pj));
            return Event::with_checks(m, pairing.pairs);
        }
    }
    return std::nullopt;
}

struct TheoremCheckSummary {
    int n;
    int s;
    std::size_t trials = 0;
    std::size_t skipped = 0;
    std::size_t failures = 0;
    double min_max_detection = std::numeric_limits<double>::infinity();
    double identity_max_detection = 0.0;

    bool passed() const { return failures == 0 && identity_max_detection < kExactZero; }
};

/**
 * @brief Samples random measurements on V_s and checks each is detectable.
 *
 * Trial t draws from an mt19937_64 seeded with seed + t. Trivial measurements
 * are skipped; every other one must reach max detection > 1e-9. The identity
 * apparatus must stay below 1e-12.
 */
inline TheoremCheckSummary theorem_check(int n, int s, std::size_t trials,
                                         std::uint64_t seed) {
    if (n > kMaxTheoremVoters) {
        throw ResourceLimit("theorem check limited to " + std::to_string(kMaxTheoremVoters) +
                            " voters");
    }
    if (trials < 1) {
        throw std::invalid_argument("theorem check needs at least one trial");
    }
    TheoremCheckSummary summary{n, s};
    summary.identity_max_detection =
        max_detection(apparatus_to_channel(identity_apparatus(n, s)), n, s).max_probability();
    for (std::size_t t = 0; t < trials; ++t) {
        std::mt19937_64 rng(seed + t);
        const ApparatusSpec spec = random_apparatus(n, s, rng);
        ++summary.trials;
        if (is_trivial_measurement(spec)) {
            ++summary.skipped;
            continue;
        }
        const double best = max_detection(apparatus_to_channel(spec), n, s).max_probability();
        summary.min_max_detection = std::min(summary.min_max_detection, best);
        if (!(best > kDetectionThreshold)) {
            ++summary.failures;
        }
    }
    return summary;
}

} // namespace qvote
