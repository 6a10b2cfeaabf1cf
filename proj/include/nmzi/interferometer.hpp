// Nested Mach-Zehnder interferometer on three path modes 100, 010, 001.
//
// Splitter convention: a lossless splitter with reflectivity r and
// transmissivity t (r^2 + t^2 = 1) maps
//     |a> -> r|a> + t|b>,   |b> -> r|b> - t|a>,
// i.e. the reflected-into-the-other-arm term picks up the minus sign on the
// second input. The outer splitters (stages 1 and 4) act on modes (0,1) with
// parameters (r,t); the inner pair (stages 2 and 3) are balanced 50:50
// splitters on modes (1,2). With this convention the inner loop is tuned so
// a photon entering it on mode 1 exits entirely on mode 2, leaving mode 1
// dark between stages 3 and 4.

#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "core.hpp"

namespace nmzi {

inline constexpr std::size_t kPathModes = 3;

inline std::vector<std::string> photon_basis_labels() {
    return {"100", "010", "001"};
}

// |mode> in the three-mode path basis.
inline StateVector photon_basis_state(std::size_t mode) {
    return StateVector::basis_state(mode, photon_basis_labels());
}

struct BeamSplitter {
    double reflectivity = 0.0;   // r
    double transmissivity = 0.0; // t
    std::size_t mode_a = 0;      // |a> -> r|a> + t|b>
    std::size_t mode_b = 1;      // |b> -> r|b> - t|a>
};

inline DenseOperator beam_splitter_unitary(const BeamSplitter& bs) {
    const double r = bs.reflectivity, t = bs.transmissivity;
    if (!(r >= 0.0 && r <= 1.0 && t >= 0.0 && t <= 1.0)) {
        throw std::invalid_argument("beam_splitter_unitary: r and t must lie in [0, 1]");
    }
    if (std::abs(r * r + t * t - 1.0) > 1e-12) {
        throw std::invalid_argument("beam_splitter_unitary: r^2 + t^2 must equal 1");
    }
    if (bs.mode_a >= kPathModes || bs.mode_b >= kPathModes || bs.mode_a == bs.mode_b) {
        throw std::invalid_argument("beam_splitter_unitary: modes must be distinct path modes");
    }
    DenseOperator u = DenseOperator::identity(kPathModes);
    u.at(bs.mode_a, bs.mode_a) = r;
    u.at(bs.mode_b, bs.mode_a) = t;
    u.at(bs.mode_b, bs.mode_b) = r;
    u.at(bs.mode_a, bs.mode_b) = -t;
    return u;
}

// Marked positions inside the interferometer. The stage number is how many
// splitters have acted when the photon is at that position.
enum class Position { A, B, C, E, F };

inline std::size_t stage_of(Position p) {
    switch (p) {
        case Position::A: return 1;  // outer arm, after the first splitter
        case Position::F: return 1;  // inner-loop input arm, after the first splitter
        case Position::B: return 2;  // upper inner arm
        case Position::C: return 2;  // lower inner arm
        case Position::E: return 3;  // inner-loop output arm, dark when untouched
    }
    throw std::invalid_argument("stage_of: unknown position");
}

inline std::size_t mode_of(Position p) {
    switch (p) {
        case Position::A: return 0;
        case Position::F: return 1;
        case Position::B: return 1;
        case Position::C: return 2;
        case Position::E: return 1;
    }
    throw std::invalid_argument("mode_of: unknown position");
}

inline std::string_view to_string(Position p) {
    switch (p) {
        case Position::A: return "A";
        case Position::B: return "B";
        case Position::C: return "C";
        case Position::E: return "E";
        case Position::F: return "F";
    }
    return "?";
}

inline Position parse_position(std::string_view s) {
    if (s == "A") return Position::A;
    if (s == "B") return Position::B;
    if (s == "C") return Position::C;
    if (s == "E") return Position::E;
    if (s == "F") return Position::F;
    throw std::invalid_argument("parse_position: expected one of A, B, C, E, F");
}

// Projector onto the path mode occupied at a position.
inline DenseOperator position_projector(Position p) {
    return basis_projector(kPathModes, mode_of(p));
}

// The four splitter unitaries in the order they act.
struct StagePipeline {
    std::array<DenseOperator, 4> stages;
    double r = 0.0;
    double t = 0.0;

    StagePipeline()
        : stages{DenseOperator::identity(kPathModes), DenseOperator::identity(kPathModes),
                 DenseOperator::identity(kPathModes), DenseOperator::identity(kPathModes)} {}
};

// Applies the first `upto_stage` splitters to `input` (0 leaves it untouched).
inline StateVector evolve_to_stage(const StagePipeline& p, const StateVector& input,
                                   std::size_t upto_stage) {
    if (upto_stage > p.stages.size()) {
        throw std::out_of_range("evolve_to_stage: stage must be between 0 and 4");
    }
    if (input.dim() != kPathModes) {
        throw std::invalid_argument("evolve_to_stage: input must live on the three path modes");
    }
    StateVector s = input;
    for (std::size_t k = 0; k < upto_stage; ++k) s = apply_operator(p.stages[k], s);
    return s;
}

// State between stages 2 and 3 for a photon injected on mode 0:
// r|100> + (t/sqrt(2))(|010> + |001>).
inline StateVector preselected_state(const StagePipeline& p) {
    return evolve_to_stage(p, photon_basis_state(0), 2);
}

// Boundary state whose overlap with the mid-circuit state gives the
// amplitude to end on detector 1: (U4 U3)^dagger |100>, which equals
// r|100> - (t/sqrt(2))|010> + (t/sqrt(2))|001>.
inline StateVector postselected_state(const StagePipeline& p) {
    const DenseOperator back = (p.stages[3] * p.stages[2]).adjoint();
    return apply_operator(back, photon_basis_state(0));
}

struct DetectorProbabilities {
    double d1 = 0.0;  // mode 0
    double d2 = 0.0;  // mode 1
    double d3 = 0.0;  // mode 2
};

inline DetectorProbabilities detector_probabilities(const StateVector& final_state) {
    if (final_state.dim() != kPathModes) {
        throw std::invalid_argument("detector_probabilities: expected a three-mode state");
    }
    return {std::norm(final_state[0]), std::norm(final_state[1]), std::norm(final_state[2])};
}

namespace detail {

inline DenseOperator balanced_splitter_12(bool flip_sign) {
    const double s = 1.0 / std::sqrt(2.0);
    DenseOperator u = DenseOperator::identity(kPathModes);
    const double sgn = flip_sign ? -1.0 : 1.0;
    u.at(1, 1) = s;
    u.at(2, 1) = sgn * s;
    u.at(1, 2) = -sgn * s;
    u.at(2, 2) = s;
    return u;
}

inline StagePipeline assemble_nested_mzi(double r, double t, bool flip_second_inner) {
    StagePipeline p;
    p.r = r;
    p.t = t;
    p.stages[0] = beam_splitter_unitary({r, t, 0, 1});
    p.stages[1] = balanced_splitter_12(false);
    p.stages[2] = balanced_splitter_12(flip_second_inner);
    p.stages[3] = beam_splitter_unitary({r, t, 0, 1});
    return p;
}

inline double max_component_residual(const StateVector& got, const std::vector<Amplitude>& want) {
    double worst = 0.0;
    for (std::size_t k = 0; k < got.dim(); ++k)
        worst = std::max(worst, std::abs(got[k] - want[k]));
    return worst;
}

}  // namespace detail

// Builds the four-stage pipeline and self-checks the sign convention against
// three anchors: the mid-circuit state, the detector-1 boundary state, and
// the dark output arm of the inner loop. A convention drift (e.g. a flipped
// splitter sign) would silently change every downstream quantity, so failing
// any anchor is a logic error, not bad input.
inline StagePipeline build_nested_mzi(double r, double t) {
    if (!(r > 0.0 && r <= 1.0)) {
        throw std::invalid_argument("build_nested_mzi: r must lie in (0, 1]");
    }
    if (!(t >= 0.0 && t < 1.0)) {
        throw std::invalid_argument("build_nested_mzi: t must lie in [0, 1)");
    }
    if (std::abs(r * r + t * t - 1.0) > 1e-12) {
        throw std::invalid_argument("build_nested_mzi: r^2 + t^2 must equal 1");
    }
    StagePipeline p = detail::assemble_nested_mzi(r, t, false);

    const double h = t / std::sqrt(2.0);
    const double anchors =
        std::max({detail::max_component_residual(preselected_state(p), {r, h, h}),
                  detail::max_component_residual(postselected_state(p), {r, -h, h}),
                  std::abs(evolve_to_stage(p, photon_basis_state(0), 3)[1])});
    if (anchors > 1e-12) {
        throw std::logic_error("build_nested_mzi: splitter convention failed anchor self-check");
    }
    return p;
}

inline StagePipeline build_nested_mzi(double r) {
    const double t2 = 1.0 - r * r;
    return build_nested_mzi(r, std::sqrt(t2 < 0.0 ? 0.0 : t2));
}

// Deliberately mis-signs the second inner splitter and skips the anchor
// self-check. Negative control: consistency checks run against this pipeline
// must fail loudly.
inline StagePipeline build_nested_mzi_corrupted(double r, double t) {
    return detail::assemble_nested_mzi(r, t, true);
}

}  // namespace nmzi
