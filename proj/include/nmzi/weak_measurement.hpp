// Weak path probing: a two-level meter couples to one path mode inside the
// interferometer. The coupling is a QND phase kick, exp(-i theta P (x) |m><m|)
// with P the projector on the probed path mode and |m> the meter level that
// picks up the phase; theta is the product of coupling rate and interaction
// time. Immediately after the kick the meter runs through a balanced rotation
// that maps phase information into its population, and the remaining splitter
// stages then act on the photon alone.

#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "core.hpp"
#include "interferometer.hpp"

namespace nmzi {

inline constexpr std::size_t kMeterLevels = 2;
inline constexpr std::size_t kJointDim = kPathModes * kMeterLevels;

inline std::vector<std::string> meter_basis_labels() {
    return {"b", "c"};
}

// Two-level meter amplitudes, kept as named fields so callers can read the
// b/c components without indexing into a state vector.
struct MeterState {
    Amplitude amp_b{0.0, 0.0};
    Amplitude amp_c{0.0, 0.0};

    double norm_squared() const { return std::norm(amp_b) + std::norm(amp_c); }

    StateVector to_state() const {
        return StateVector({amp_b, amp_c}, meter_basis_labels());
    }
};

// Meter ready state (|b> + |c>)/sqrt(2).
inline MeterState initial_meter_state() {
    const double s = 1.0 / std::sqrt(2.0);
    return MeterState{Amplitude{s, 0.0}, Amplitude{s, 0.0}};
}

// Balanced meter rotation: |b> -> (|b> + i|c>)/sqrt(2), |c> -> (i|b> + |c>)/sqrt(2).
// Turns a phase kick on |b> into a population imbalance between |b> and |c>.
inline DenseOperator meter_rotation() {
    const double s = 1.0 / std::sqrt(2.0);
    DenseOperator r(kMeterLevels);
    r.at(0, 0) = Amplitude{s, 0.0};
    r.at(1, 0) = Amplitude{0.0, s};
    r.at(0, 1) = Amplitude{0.0, s};
    r.at(1, 1) = Amplitude{s, 0.0};
    return r;
}

enum class EvolutionOrder { exact, first_order };

inline std::string_view to_string(EvolutionOrder o) {
    return o == EvolutionOrder::exact ? "exact" : "first";
}

inline EvolutionOrder parse_order(std::string_view s) {
    if (s == "exact") return EvolutionOrder::exact;
    if (s == "first" || s == "first_order" || s == "first-order") return EvolutionOrder::first_order;
    throw std::invalid_argument("parse_order: expected 'exact' or 'first'");
}

struct WeakCoupling {
    double theta = 0.0;                     // accumulated phase, coupling rate x time
    Position position = Position::C;        // probed position
    std::size_t meter_level = 0;            // meter level that acquires the phase
};

inline void validate_coupling(const WeakCoupling& c) {
    if (!std::isfinite(c.theta)) {
        throw std::invalid_argument("coupling: theta must be finite");
    }
    if (c.meter_level >= kMeterLevels) {
        throw std::invalid_argument("coupling: meter level must be 0 or 1");
    }
}

// exp(-i theta P (x) |m><m|) on the 6-dimensional joint space: the single
// joint basis state (probed mode, phased meter level) gains e^{-i theta},
// everything else is untouched.
inline DenseOperator coupling_unitary_exact(const WeakCoupling& c) {
    validate_coupling(c);
    DenseOperator u = DenseOperator::identity(kJointDim);
    const std::size_t idx = mode_of(c.position) * kMeterLevels + c.meter_level;
    u.at(idx, idx) = std::exp(Amplitude{0.0, -c.theta});
    return u;
}

// I - i theta P (x) |m><m|, the linearization of the exact coupling. Not
// unitary: it inflates the norm of the coupled component by O(theta^2).
inline DenseOperator coupling_first_order(const WeakCoupling& c) {
    validate_coupling(c);
    DenseOperator u = DenseOperator::identity(kJointDim);
    const std::size_t idx = mode_of(c.position) * kMeterLevels + c.meter_level;
    u.at(idx, idx) = Amplitude{1.0, -c.theta};
    return u;
}

namespace detail {

inline DenseOperator coupling_operator(const WeakCoupling& c, EvolutionOrder order) {
    return order == EvolutionOrder::exact ? coupling_unitary_exact(c) : coupling_first_order(c);
}

}  // namespace detail

// Joint state after `upto_stage` splitters, with the coupling kick and meter
// rotation slotted in right after the probed position's stage.
inline StateVector joint_state_after_stage(const StagePipeline& p, const WeakCoupling& c,
                                           EvolutionOrder order, std::size_t upto_stage) {
    validate_coupling(c);
    if (upto_stage > p.stages.size()) {
        throw std::out_of_range("joint_state_after_stage: stage must be between 0 and 4");
    }
    const DenseOperator meter_id = DenseOperator::identity(kMeterLevels);
    const DenseOperator rotate = tensor_product(DenseOperator::identity(kPathModes), meter_rotation());
    const std::size_t kick_stage = stage_of(c.position);

    StateVector joint = tensor_product(photon_basis_state(0), initial_meter_state().to_state());
    for (std::size_t k = 1; k <= upto_stage; ++k) {
        joint = apply_operator(tensor_product(p.stages[k - 1], meter_id), joint);
        if (k == kick_stage) {
            joint = apply_operator(detail::coupling_operator(c, order), joint);
            joint = apply_operator(rotate, joint);
        }
    }
    return joint;
}

// Full run: inject the photon on mode 0 with the meter ready, insert the
// coupling (and the meter rotation) after the probed stage, finish the
// remaining splitters. Returns the 6-dimensional joint state at the output.
inline StateVector run_weak_measurement(const StagePipeline& p, const WeakCoupling& c,
                                        EvolutionOrder order = EvolutionOrder::exact) {
    return joint_state_after_stage(p, c, order, p.stages.size());
}

inline StateVector run_weak_measurement(double r, double t, const WeakCoupling& c,
                                        EvolutionOrder order = EvolutionOrder::exact) {
    return run_weak_measurement(build_nested_mzi(r, t), c, order);
}

struct MeterProbabilities {
    double p_b = 0.0;
    double p_c = 0.0;
    std::string conditioned_on;  // detector label, e.g. "D1"
};

inline std::size_t parse_detector(std::string_view label) {
    if (label == "D1") return 0;
    if (label == "D2") return 1;
    if (label == "D3") return 2;
    throw std::invalid_argument("parse_detector: expected one of D1, D2, D3");
}

// Unnormalized meter populations in coincidence with one detector: the joint
// probabilities of (detector fired, meter found in b/c). Dividing by their
// sum would give the conditional meter state; the raw values are kept so
// detection rates stay visible.
inline MeterProbabilities postselected_meter_probabilities(const StateVector& joint_final,
                                                           std::string_view detector) {
    if (joint_final.dim() != kJointDim) {
        throw std::invalid_argument(
            "postselected_meter_probabilities: expected a photon-meter joint state");
    }
    const std::size_t mode = parse_detector(detector);
    MeterProbabilities out;
    out.p_b = std::norm(joint_final[mode * kMeterLevels + 0]);
    out.p_c = std::norm(joint_final[mode * kMeterLevels + 1]);
    out.conditioned_on = std::string(detector);
    return out;
}

// Probability to find the photon at `at` (optionally in coincidence with one
// meter level) while the coupling acts at c.position. The photon must reach
// `at` no earlier than the coupling, otherwise the question is ill-posed.
inline double position_probability(const StagePipeline& p, const WeakCoupling& c, Position at,
                                   EvolutionOrder order = EvolutionOrder::exact,
                                   std::optional<std::size_t> meter_level = std::nullopt) {
    validate_coupling(c);
    if (stage_of(at) < stage_of(c.position)) {
        throw std::invalid_argument(
            "position_probability: probed position precedes the coupling");
    }
    if (meter_level && *meter_level >= kMeterLevels) {
        throw std::invalid_argument("position_probability: meter level must be 0 or 1");
    }
    const StateVector joint = joint_state_after_stage(p, c, order, stage_of(at));
    const std::size_t mode = mode_of(at);
    if (meter_level) {
        return std::norm(joint[mode * kMeterLevels + *meter_level]);
    }
    return std::norm(joint[mode * kMeterLevels + 0]) + std::norm(joint[mode * kMeterLevels + 1]);
}

inline double position_probability(double r, double t, const WeakCoupling& c, Position at,
                                   EvolutionOrder order = EvolutionOrder::exact,
                                   std::optional<std::size_t> meter_level = std::nullopt) {
    return position_probability(build_nested_mzi(r, t), c, at, order, meter_level);
}

}  // namespace nmzi
