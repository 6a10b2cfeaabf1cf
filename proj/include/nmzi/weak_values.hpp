// Weak values of path projectors between the injected state and detection on
// detector 1. The weak value of a projector P inserted at a position is
//     <post| P |pre> / <post|pre>
// with |pre> the state evolved up to that position and <post| the boundary
// state that propagates back from detector 1. Equivalently, and how it is
// computed here: insert P into the stage sequence and read off the detector-1
// amplitude, normalized by the undisturbed detector-1 amplitude.
//
// For the nested loop probed on its lower inner arm this gives t^2/(2 r^2),
// the upper inner arm gives -t^2/(2 r^2) (they sum with the outer arm's +1 to
// exactly 1), and the loop's input and output arms both give 0 even though
// the inner arms individually do not.

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "interferometer.hpp"
#include "weak_measurement.hpp"

namespace nmzi {

struct WeakValueResult {
    Amplitude value{0.0, 0.0};
    Amplitude overlap{0.0, 0.0};       // undisturbed detector-1 amplitude
    std::vector<Position> positions;   // probed position(s), in time order
};

// Projector on `mode` inserted after `stage_after` splitters have acted.
struct ProjectorInsertion {
    std::size_t stage_after = 0;
    std::size_t mode = 0;
};

namespace detail {

inline Amplitude detector1_amplitude(const StagePipeline& p,
                                     const std::vector<ProjectorInsertion>& insertions) {
    StateVector s = photon_basis_state(0);
    for (std::size_t k = 1; k <= p.stages.size(); ++k) {
        s = apply_operator(p.stages[k - 1], s);
        for (const auto& ins : insertions) {
            if (ins.stage_after == k) s = project_component(s, ins.mode);
        }
    }
    return s[0];
}

inline void validate_insertion(const ProjectorInsertion& ins) {
    if (ins.stage_after < 1 || ins.stage_after > 3) {
        throw std::invalid_argument("weak value: projector stage must be 1, 2 or 3");
    }
    if (ins.mode >= kPathModes) {
        throw std::invalid_argument("weak value: projector mode must be a path mode");
    }
}

inline Amplitude checked_overlap(const StagePipeline& p) {
    const Amplitude overlap = detector1_amplitude(p, {});
    if (std::abs(overlap) < 1e-12) {
        throw std::domain_error("weak value: detection amplitude vanishes, post-selection is degenerate");
    }
    return overlap;
}

}  // namespace detail

inline WeakValueResult weak_value(const StagePipeline& p, Position pos) {
    const Amplitude overlap = detail::checked_overlap(p);
    const Amplitude num = detail::detector1_amplitude(p, {{stage_of(pos), mode_of(pos)}});
    return {num / overlap, overlap, {pos}};
}

inline WeakValueResult weak_value(double r, double t, Position pos) {
    return weak_value(build_nested_mzi(r, t), pos);
}

// Weak value of a time-ordered product of two projectors. The first insertion
// must act strictly before the second.
inline WeakValueResult joint_weak_value(const StagePipeline& p, ProjectorInsertion first,
                                        ProjectorInsertion second) {
    detail::validate_insertion(first);
    detail::validate_insertion(second);
    if (first.stage_after >= second.stage_after) {
        throw std::invalid_argument("joint weak value: insertions must be in increasing stage order");
    }
    const Amplitude overlap = detail::checked_overlap(p);
    const Amplitude num = detail::detector1_amplitude(p, {first, second});
    return {num / overlap, overlap, {}};
}

inline WeakValueResult joint_weak_value(const StagePipeline& p, Position first, Position second) {
    if (stage_of(first) >= stage_of(second)) {
        throw std::invalid_argument("joint weak value: positions must be in increasing stage order");
    }
    WeakValueResult res = joint_weak_value(p, ProjectorInsertion{stage_of(first), mode_of(first)},
                                           ProjectorInsertion{stage_of(second), mode_of(second)});
    res.positions = {first, second};
    return res;
}

inline WeakValueResult joint_weak_value(double r, double t, Position first, Position second) {
    return joint_weak_value(build_nested_mzi(r, t), first, second);
}

// Reads a weak value back out of conditioned meter populations:
//     A = asin((p_c - p_b) / (p_c + p_b)) / theta.
// Valid to first order in theta; the bias is O(theta^2).
inline double infer_weak_value(const MeterProbabilities& m, double theta) {
    if (theta == 0.0 || !std::isfinite(theta)) {
        throw std::invalid_argument("infer_weak_value: theta must be nonzero and finite");
    }
    const double total = m.p_b + m.p_c;
    if (!(total > 0.0)) {
        throw std::invalid_argument("infer_weak_value: meter populations must have positive total");
    }
    const double contrast = (m.p_c - m.p_b) / total;
    if (std::abs(contrast) > 1.0) {
        throw std::domain_error("infer_weak_value: population contrast outside [-1, 1]");
    }
    return std::asin(contrast) / theta;
}

}  // namespace nmzi
