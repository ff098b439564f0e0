// Single-qubit Clifford group over physical X/Y pulses and virtual Z
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "qubit.hpp"

namespace bistable {

using Unitary = Eigen::Matrix2cd;

struct NativeOp {
    enum class Kind { Pulse, VirtualZ };
    Kind kind = Kind::Pulse;
    double axis_phase = 0.0; // pulses only
    double angle = 0.0;

    bool physical() const { return kind == Kind::Pulse; }
};

/// exp(-i angle/2 (cos phi X + sin phi Y))
inline Unitary equatorial_rotation(double axis_phase, double angle) {
    using namespace std::complex_literals;
    const double c = std::cos(angle / 2), s = std::sin(angle / 2);
    const std::complex<double> e = std::polar(1.0, axis_phase);
    Unitary u;
    u << c, -1i * s * std::conj(e), -1i * s * e, c;
    return u;
}

/// exp(-i angle/2 Z)
inline Unitary z_rotation(double angle) {
    Unitary u = Unitary::Zero();
    u(0, 0) = std::polar(1.0, -angle / 2);
    u(1, 1) = std::polar(1.0, angle / 2);
    return u;
}

inline Unitary op_unitary(const NativeOp &op) {
    return op.physical() ? equatorial_rotation(op.axis_phase, op.angle) : z_rotation(op.angle);
}

/// Product of ops applied left to right (first op acts first).
inline Unitary compose_ops(const std::vector<NativeOp> &ops) {
    Unitary u = Unitary::Identity();
    for (const auto &op : ops) u = op_unitary(op) * u;
    return u;
}

inline bool equal_up_to_phase(const Unitary &a, const Unitary &b, double tol = 1e-9) {
    return std::abs(std::abs((a.adjoint() * b).trace()) - 2.0) < tol;
}

struct CliffordElement {
    int index = 0;
    Unitary unitary = Unitary::Identity();
    std::vector<NativeOp> decomposition;

    int physical_pulses() const {
        int n = 0;
        for (const auto &op : decomposition) n += op.physical();
        return n;
    }
};

/**
 * @brief The 24-element single-qubit Clifford group.
 *
 * Elements are generated breadth-first from X/2 and Y/2 (identity first).
 * Each element is decomposed as VZ(b), one equatorial pulse, VZ(a) with the
 * fewest physical pulses; every element needs at most one.
 */
class CliffordGroup {
public:
    static constexpr int kSize = 24;

    static const CliffordGroup &instance() {
        static const CliffordGroup group;
        return group;
    }

    const std::vector<CliffordElement> &elements() const { return elements_; }
    const CliffordElement &operator[](int i) const { return elements_[static_cast<std::size_t>(i)]; }

    /// Index of "apply first, then second".
    int compose(int first, int second) const { return table_[idx(first)][idx(second)]; }
    int inverse(int i) const { return inverse_[idx(i)]; }
    double gates_per_clifford() const { return gates_per_clifford_; }

    int find(const Unitary &u) const {
        for (const auto &e : elements_)
            if (equal_up_to_phase(e.unitary, u)) return e.index;
        return -1;
    }

private:
    static std::size_t idx(int i) { return static_cast<std::size_t>(i); }

    CliffordGroup() {
        const std::array<Unitary, 2> gens = {equatorial_rotation(0.0, kPi / 2), equatorial_rotation(kPi / 2, kPi / 2)};
        std::vector<Unitary> found = {Unitary::Identity()};
        for (std::size_t head = 0; head < found.size(); ++head) {
            for (const auto &g : gens) {
                const Unitary next = g * found[head];
                bool seen = false;
                for (const auto &u : found) seen = seen || equal_up_to_phase(u, next);
                if (!seen) found.push_back(next);
            }
        }
        if (found.size() != kSize) throw std::logic_error("Clifford generation did not close at 24 elements");

        for (std::size_t i = 0; i < found.size(); ++i)
            elements_.push_back({static_cast<int>(i), found[i], decompose(found[i])});

        int pulses = 0;
        for (const auto &e : elements_) pulses += e.physical_pulses();
        gates_per_clifford_ = static_cast<double>(pulses) / kSize;

        for (int a = 0; a < kSize; ++a) {
            for (int b = 0; b < kSize; ++b) {
                const int c = find(elements_[idx(b)].unitary * elements_[idx(a)].unitary);
                if (c < 0) throw std::logic_error("Clifford table not closed");
                table_[idx(a)][idx(b)] = c;
                if (c == 0) inverse_[idx(a)] = b;
            }
        }
    }

    static std::vector<NativeOp> decompose(const Unitary &target) {
        const std::array<double, 4> quarter = {0.0, kPi / 2, kPi, 3 * kPi / 2};
        const std::array<double, 3> angles = {kPi / 2, -kPi / 2, kPi};
        auto vz = [](double a) { return NativeOp{NativeOp::Kind::VirtualZ, 0.0, a}; };
        auto with_z = [&](std::vector<NativeOp> ops, double before, double after) {
            std::vector<NativeOp> out;
            if (before != 0.0) out.push_back(vz(before));
            out.insert(out.end(), ops.begin(), ops.end());
            if (after != 0.0) out.push_back(vz(after));
            return out;
        };
        for (double z : quarter)
            if (equal_up_to_phase(z_rotation(z), target)) return with_z({}, z, 0.0);
        for (double phi : {0.0, kPi / 2, kPi, 3 * kPi / 2})
            for (double th : angles)
                for (double before : quarter)
                    for (double after : quarter) {
                        const Unitary u = z_rotation(after) * equatorial_rotation(phi, th) * z_rotation(before);
                        if (equal_up_to_phase(u, target))
                            return with_z({NativeOp{NativeOp::Kind::Pulse, phi, th}}, before, after);
                    }
        throw std::logic_error("no single-pulse decomposition found");
    }

    std::vector<CliffordElement> elements_;
    std::array<std::array<int, kSize>, kSize> table_{};
    std::array<int, kSize> inverse_{};
    double gates_per_clifford_ = 0.0;
};

inline const std::vector<CliffordElement> &clifford_table() { return CliffordGroup::instance().elements(); }

struct RbSequence {
    std::vector<int> gates;
    int recovery = 0;
};

/// L uniform Clifford draws plus the recovery gate that inverts their product.
template <typename Rng>
RbSequence random_sequence(int length, Rng &rng) {
    if (length < 0) throw std::invalid_argument("sequence length must be nonnegative");
    const auto &g = CliffordGroup::instance();
    RbSequence seq;
    seq.gates.reserve(static_cast<std::size_t>(length));
    int total = 0;
    for (int i = 0; i < length; ++i) {
        const int c = static_cast<int>(rng() % CliffordGroup::kSize);
        seq.gates.push_back(c);
        total = g.compose(total, c);
    }
    seq.recovery = g.inverse(total);
    return seq;
}

} // namespace bistable
