#pragma once

/**
 * @file
 * Dense pure states, operators and Kraus channels on small qubit registers.
 *
 * Qubit i (1-based) is bit i-1 of the computational basis index, i.e. the
 * bit string "b_n ... b_2 b_1" is read right to left and its binary value
 * is the amplitude index. Mixed states are carried as ensembles of pure
 * states rather than density matrices.
 */

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qvote/errors.hpp"

namespace qvote {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kPruneThreshold = 1e-12;
inline constexpr double kChannelTolerance = 1e-9;
inline constexpr int kMaxQubits = 12;

namespace detail {

inline void check_qubit_count(int n) {
    if (n < 1) {
        throw std::invalid_argument("qubit count must be >= 1, got " +
                                    std::to_string(n));
    }
    if (n > kMaxQubits) {
        throw ResourceLimit("qubit count " + std::to_string(n) +
                            " exceeds the cap of " + std::to_string(kMaxQubits));
    }
}

inline void check_qubit_index(int q, int n) {
    if (q < 1 || q > n) {
        throw std::invalid_argument("qubit index " + std::to_string(q) +
                                    " outside 1.." + std::to_string(n));
    }
}

inline std::size_t dim_of(int n) { return std::size_t{1} << n; }

inline int qubits_for_dim(std::size_t dim) {
    int n = 0;
    while ((std::size_t{1} << n) < dim) {
        ++n;
    }
    if ((std::size_t{1} << n) != dim) {
        throw std::invalid_argument("dimension " + std::to_string(dim) +
                                    " is not a power of two");
    }
    return n;
}

// Mask of the basis-index bits belonging to `qubits`.
inline std::size_t qubit_mask(std::span<const int> qubits) {
    std::size_t mask = 0;
    for (int q : qubits) {
        mask |= std::size_t{1} << (q - 1);
    }
    return mask;
}

// Local index of a global basis index restricted to `qubits`; the first
// listed qubit is the most significant local bit.
inline std::size_t local_index(std::size_t global, std::span<const int> qubits) {
    std::size_t local = 0;
    for (int q : qubits) {
        local = (local << 1) | ((global >> (q - 1)) & 1U);
    }
    return local;
}

inline std::size_t scatter_local(std::size_t local, std::span<const int> qubits) {
    std::size_t global = 0;
    const std::size_t k = qubits.size();
    for (std::size_t t = 0; t < k; ++t) {
        if ((local >> (k - 1 - t)) & 1U) {
            global |= std::size_t{1} << (qubits[t] - 1);
        }
    }
    return global;
}

inline void check_local_operator(const Matrix &local, std::span<const int> qubits,
                                 int n) {
    for (std::size_t a = 0; a < qubits.size(); ++a) {
        check_qubit_index(qubits[a], n);
        for (std::size_t b = a + 1; b < qubits.size(); ++b) {
            if (qubits[a] == qubits[b]) {
                throw std::invalid_argument("repeated qubit index " +
                                            std::to_string(qubits[a]));
            }
        }
    }
    const auto local_dim = static_cast<Eigen::Index>(dim_of(static_cast<int>(qubits.size())));
    if (local.rows() != local_dim || local.cols() != local_dim) {
        throw std::invalid_argument("local operator shape does not match qubit list");
    }
}

} // namespace detail

/// Normalized pure state of n qubits.
class StateVector {
  public:
    StateVector(int n_qubits, Vector amplitudes)
        : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
        detail::check_qubit_count(n_qubits_);
        if (static_cast<std::size_t>(amplitudes_.size()) != detail::dim_of(n_qubits_)) {
            throw std::invalid_argument("amplitude vector length " +
                                        std::to_string(amplitudes_.size()) +
                                        " does not equal 2^" + std::to_string(n_qubits_));
        }
        const double norm2 = amplitudes_.squaredNorm();
        if (std::abs(norm2 - 1.0) > kNormTolerance) {
            throw std::invalid_argument("state is not normalized (squared norm " +
                                        std::to_string(norm2) + ")");
        }
    }

    /// Normalizes `unnormalized` before construction; throws on a null vector.
    static StateVector normalized(int n_qubits, Vector unnormalized) {
        const double norm = unnormalized.norm();
        if (norm == 0.0) {
            throw std::invalid_argument("cannot normalize the zero vector");
        }
        unnormalized /= norm;
        return StateVector(n_qubits, std::move(unnormalized));
    }

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }
    const Vector &amplitudes() const { return amplitudes_; }
    Complex operator[](std::size_t index) const {
        return amplitudes_(static_cast<Eigen::Index>(index));
    }

    friend bool operator==(const StateVector &a, const StateVector &b) {
        return a.n_qubits_ == b.n_qubits_ && a.amplitudes_ == b.amplitudes_;
    }

  private:
    int n_qubits_;
    Vector amplitudes_;
};

/// Square complex matrix acting on a register.
class Operator {
  public:
    explicit Operator(Matrix entries) : entries_(std::move(entries)) {
        if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
            throw std::invalid_argument("operator must be a non-empty square matrix");
        }
    }

    static Operator identity(std::size_t dim) {
        const auto d = static_cast<Eigen::Index>(dim);
        return Operator(Matrix::Identity(d, d));
    }

    std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
    const Matrix &matrix() const { return entries_; }

    bool is_hermitian(double tol = kNormTolerance) const {
        return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() <= tol;
    }

    bool is_projector(double tol = kNormTolerance) const {
        return is_hermitian(tol) &&
               (entries_ * entries_ - entries_).cwiseAbs().maxCoeff() <= tol;
    }

  private:
    Matrix entries_;
};

/// Trace-preserving completely positive map given by its Kraus operators.
class KrausChannel {
  public:
    explicit KrausChannel(std::vector<Matrix> kraus_ops) : kraus_(std::move(kraus_ops)) {
        if (kraus_.empty()) {
            throw std::invalid_argument("Kraus channel needs at least one operator");
        }
        const Eigen::Index d = kraus_.front().rows();
        Matrix completeness = Matrix::Zero(d, d);
        for (const auto &k : kraus_) {
            if (k.rows() != d || k.cols() != d) {
                throw std::invalid_argument("Kraus operators must share one square shape");
            }
            completeness += k.adjoint() * k;
        }
        const double deviation =
            (completeness - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
        if (deviation > kChannelTolerance) {
            throw std::invalid_argument("Kraus operators are not complete (deviation " +
                                        std::to_string(deviation) + ")");
        }
    }

    static KrausChannel identity(std::size_t dim) {
        const auto d = static_cast<Eigen::Index>(dim);
        return KrausChannel({Matrix::Identity(d, d)});
    }

    std::size_t dim() const { return static_cast<std::size_t>(kraus_.front().rows()); }
    const std::vector<Matrix> &kraus_ops() const { return kraus_; }

  private:
    std::vector<Matrix> kraus_;
};

struct Branch {
    double probability;
    StateVector state;
};

/// Classical mixture of pure states.
class Ensemble {
  public:
    explicit Ensemble(std::vector<Branch> branches) : branches_(std::move(branches)) {
        if (branches_.empty()) {
            throw std::invalid_argument("ensemble must have at least one branch");
        }
        double total = 0.0;
        for (const auto &b : branches_) {
            if (b.probability < 0.0 || b.probability > 1.0 + kNormTolerance) {
                throw std::invalid_argument("branch probability outside [0,1]");
            }
            if (b.state.n_qubits() != branches_.front().state.n_qubits()) {
                throw std::invalid_argument("ensemble branches differ in qubit count");
            }
            total += b.probability;
        }
        if (std::abs(total - 1.0) > kNormTolerance) {
            throw std::invalid_argument("branch probabilities sum to " +
                                        std::to_string(total));
        }
    }

    static Ensemble pure(StateVector state) { return Ensemble({{1.0, std::move(state)}}); }

    int n_qubits() const { return branches_.front().state.n_qubits(); }
    const std::vector<Branch> &branches() const { return branches_; }

  private:
    std::vector<Branch> branches_;
};

// ---------------------------------------------------------------------------
// State construction

/// Computational product state; `bits` is written b_n ... b_1.
inline StateVector basis_state(int n, std::string_view bits) {
    detail::check_qubit_count(n);
    if (bits.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("bit string length " + std::to_string(bits.size()) +
                                    " does not match qubit count " + std::to_string(n));
    }
    std::size_t index = 0;
    for (char c : bits) {
        if (c != '0' && c != '1') {
            throw std::invalid_argument("bit string may only contain '0' and '1'");
        }
        index = (index << 1) | static_cast<std::size_t>(c - '0');
    }
    Vector amps = Vector::Zero(static_cast<Eigen::Index>(detail::dim_of(n)));
    amps(static_cast<Eigen::Index>(index)) = 1.0;
    return StateVector(n, std::move(amps));
}

inline StateVector basis_state(int n, std::size_t index) {
    detail::check_qubit_count(n);
    if (index >= detail::dim_of(n)) {
        throw std::invalid_argument("basis index out of range");
    }
    Vector amps = Vector::Zero(static_cast<Eigen::Index>(detail::dim_of(n)));
    amps(static_cast<Eigen::Index>(index)) = 1.0;
    return StateVector(n, std::move(amps));
}

enum class BellKind { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

inline const char *to_string(BellKind kind) {
    switch (kind) {
    case BellKind::PhiPlus: return "Phi+";
    case BellKind::PhiMinus: return "Phi-";
    case BellKind::PsiPlus: return "Psi+";
    case BellKind::PsiMinus: return "Psi-";
    }
    return "?";
}

inline constexpr BellKind kBellBasis[] = {BellKind::PhiPlus, BellKind::PhiMinus,
                                          BellKind::PsiPlus, BellKind::PsiMinus};

/// Two-qubit Bell vector in the local basis |x>_i|y>_j, index 2x + y.
inline Vector bell_vector(BellKind kind) {
    const double h = 1.0 / std::numbers::sqrt2;
    Vector v = Vector::Zero(4);
    switch (kind) {
    case BellKind::PhiPlus: v(0) = h; v(3) = h; break;
    case BellKind::PhiMinus: v(0) = h; v(3) = -h; break;
    case BellKind::PsiPlus: v(1) = h; v(2) = h; break;
    case BellKind::PsiMinus: v(1) = h; v(2) = -h; break;
    }
    return v;
}

/// Bell state on qubits (i, j) of an n-qubit register, all other qubits |0>.
inline StateVector bell_state(BellKind kind, int i, int j, int n) {
    detail::check_qubit_count(n);
    detail::check_qubit_index(i, n);
    detail::check_qubit_index(j, n);
    if (i == j) {
        throw std::invalid_argument("Bell state needs two distinct qubits");
    }
    const Vector local = bell_vector(kind);
    const int qubits[] = {i, j};
    Vector amps = Vector::Zero(static_cast<Eigen::Index>(detail::dim_of(n)));
    for (std::size_t l = 0; l < 4; ++l) {
        amps(static_cast<Eigen::Index>(detail::scatter_local(l, qubits))) =
            local(static_cast<Eigen::Index>(l));
    }
    return StateVector(n, std::move(amps));
}

/// a ⊗ b with b on the low positions.
inline StateVector tensor(const StateVector &a, const StateVector &b) {
    const int n = a.n_qubits() + b.n_qubits();
    detail::check_qubit_count(n);
    Vector amps(static_cast<Eigen::Index>(detail::dim_of(n)));
    const auto db = static_cast<Eigen::Index>(b.dim());
    for (Eigen::Index x = 0; x < static_cast<Eigen::Index>(a.dim()); ++x) {
        amps.segment(x * db, db) = a.amplitudes()(x) * b.amplitudes();
    }
    return StateVector::normalized(n, std::move(amps));
}

// ---------------------------------------------------------------------------
// Local operators

/// Applies a 2^k x 2^k operator on `qubits` to a full register vector in place.
inline void apply_local(const Matrix &local, std::span<const int> qubits, Vector &psi) {
    const int n = detail::qubits_for_dim(static_cast<std::size_t>(psi.size()));
    detail::check_local_operator(local, qubits, n);
    const std::size_t mask = detail::qubit_mask(qubits);
    const std::size_t local_dim = static_cast<std::size_t>(local.rows());
    std::vector<std::size_t> offsets(local_dim);
    for (std::size_t l = 0; l < local_dim; ++l) {
        offsets[l] = detail::scatter_local(l, qubits);
    }
    Vector gathered(static_cast<Eigen::Index>(local_dim));
    for (std::size_t base = 0; base < detail::dim_of(n); ++base) {
        if (base & mask) {
            continue;
        }
        for (std::size_t l = 0; l < local_dim; ++l) {
            gathered(static_cast<Eigen::Index>(l)) =
                psi(static_cast<Eigen::Index>(base | offsets[l]));
        }
        const Vector mapped = local * gathered;
        for (std::size_t l = 0; l < local_dim; ++l) {
            psi(static_cast<Eigen::Index>(base | offsets[l])) =
                mapped(static_cast<Eigen::Index>(l));
        }
    }
}

/// Full 2^n x 2^n matrix of `local` acting on `qubits`, identity elsewhere.
inline Operator embed(const Matrix &local, std::span<const int> qubits, int n) {
    detail::check_qubit_count(n);
    detail::check_local_operator(local, qubits, n);
    const std::size_t dim = detail::dim_of(n);
    const std::size_t mask = detail::qubit_mask(qubits);
    Matrix full = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            if ((r & ~mask) != (c & ~mask)) {
                continue;
            }
            full(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                local(static_cast<Eigen::Index>(detail::local_index(r, qubits)),
                      static_cast<Eigen::Index>(detail::local_index(c, qubits)));
        }
    }
    return Operator(std::move(full));
}

/// |bit><bit| on one qubit, as a 2x2 matrix.
inline Matrix computational_projector(int bit) {
    Matrix p = Matrix::Zero(2, 2);
    p(bit, bit) = 1.0;
    return p;
}

inline Matrix bell_projector(BellKind kind) {
    const Vector v = bell_vector(kind);
    return v * v.adjoint();
}

/// The four Bell projectors on (i, j), ordered Phi+, Phi-, Psi+, Psi-.
inline std::vector<Operator> bell_projectors(int i, int j, int n) {
    if (i == j) {
        throw std::invalid_argument("Bell projectors need two distinct qubits");
    }
    const int qubits[] = {i, j};
    std::vector<Operator> out;
    for (BellKind kind : kBellBasis) {
        out.push_back(embed(bell_projector(kind), qubits, n));
    }
    return out;
}

/// {|0><0|_q, |1><1|_q} on an n-qubit register.
inline std::vector<Operator> computational_projectors(int q, int n) {
    const int qubits[] = {q};
    return {embed(computational_projector(0), qubits, n),
            embed(computational_projector(1), qubits, n)};
}

// ---------------------------------------------------------------------------
// Measurement and channels

struct MeasurementBranch {
    std::size_t outcome;
    double probability;
    StateVector state;
};

/// Exact Born-rule distribution of a projective measurement. Outcomes whose
/// probability falls below kPruneThreshold are omitted.
inline std::vector<MeasurementBranch> measure_projectors(const StateVector &state,
                                                         std::span<const Operator> projectors) {
    if (projectors.empty()) {
        throw std::invalid_argument("projector list is empty");
    }
    const auto d = static_cast<Eigen::Index>(state.dim());
    Matrix total = Matrix::Zero(d, d);
    for (std::size_t a = 0; a < projectors.size(); ++a) {
        const Matrix &pa = projectors[a].matrix();
        if (pa.rows() != d) {
            throw std::invalid_argument("projector dimension does not match the state");
        }
        if (!projectors[a].is_projector(kChannelTolerance)) {
            throw std::invalid_argument("operator " + std::to_string(a) +
                                        " is not an orthogonal projector");
        }
        for (std::size_t b = a + 1; b < projectors.size(); ++b) {
            if ((pa * projectors[b].matrix()).cwiseAbs().maxCoeff() > kChannelTolerance) {
                throw std::invalid_argument("projectors " + std::to_string(a) + " and " +
                                            std::to_string(b) + " are not orthogonal");
            }
        }
        total += pa;
    }
    if ((total - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > kChannelTolerance) {
        throw std::invalid_argument("projectors do not resolve the identity");
    }

    std::vector<MeasurementBranch> out;
    for (std::size_t a = 0; a < projectors.size(); ++a) {
        Vector projected = projectors[a].matrix() * state.amplitudes();
        const double p = projected.squaredNorm();
        if (p < kPruneThreshold) {
            continue;
        }
        out.push_back({a, p, StateVector::normalized(state.n_qubits(), std::move(projected))});
    }
    return out;
}

/// Splits every branch into one branch per Kraus operator.
inline Ensemble apply_channel(const Ensemble &input, const KrausChannel &channel) {
    if (channel.dim() != input.branches().front().state.dim()) {
        throw std::invalid_argument("channel dimension " + std::to_string(channel.dim()) +
                                    " does not match state dimension " +
                                    std::to_string(input.branches().front().state.dim()));
    }
    const int n = input.n_qubits();
    std::vector<Branch> out;
    for (const auto &branch : input.branches()) {
        for (const auto &k : channel.kraus_ops()) {
            Vector image = k * branch.state.amplitudes();
            const double weight = branch.probability * image.squaredNorm();
            if (weight < kPruneThreshold) {
                continue;
            }
            out.push_back({weight, StateVector::normalized(n, std::move(image))});
        }
    }
    return Ensemble(std::move(out));
}

} // namespace qvote
