// Self-verification: every closed-form identity the simulator is supposed to
// reproduce, evaluated over a parameter grid and reported with its worst
// residual. A check never throws out of this module; a check body that
// aborts (for instance because a corrupted pipeline makes the detection
// amplitude vanish) is reported as failed with an infinite residual.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "interferometer.hpp"
#include "weak_measurement.hpp"
#include "weak_values.hpp"

namespace nmzi {

struct VerifyCheck {
    std::string name;
    std::string detail;
    double residual = 0.0;   // worst deviation over the grid, in the check's own units
    double tolerance = 0.0;
    bool passed = false;
};

struct VerifyGrid {
    std::vector<double> r_squared;  // outer-splitter reflection probabilities
    std::vector<double> thetas;     // coupling phases
};

inline VerifyGrid default_verify_grid() {
    VerifyGrid g;
    for (int k = 0; k < 20; ++k)
        g.r_squared.push_back(0.05 + 0.90 * k / 19.0);
    g.thetas = {0.01, 0.1, 1.0, std::numbers::pi};
    return g;
}

inline VerifyGrid dense_verify_grid() {
    VerifyGrid g;
    for (int k = 0; k < 49; ++k)
        g.r_squared.push_back(0.02 + 0.96 * k / 48.0);
    g.thetas = {1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, std::numbers::pi};
    return g;
}

struct VerifyOptions {
    // Mis-signs the second inner splitter before running the checks; used as
    // a negative control, the identity suite must then fail.
    bool corrupt_inner_splitter = false;
};

namespace detail {

template <typename Body>
VerifyCheck run_check(std::string name, std::string what, double tol, Body&& body) {
    VerifyCheck c;
    c.name = std::move(name);
    c.detail = std::move(what);
    c.tolerance = tol;
    try {
        c.residual = body();
    } catch (const std::exception& e) {
        c.residual = std::numeric_limits<double>::infinity();
        c.detail += std::string(" [aborted: ") + e.what() + "]";
    }
    c.passed = c.residual <= tol;
    return c;
}

inline double state_residual(const StateVector& got, const std::vector<Amplitude>& want) {
    double worst = 0.0;
    for (std::size_t k = 0; k < got.dim(); ++k)
        worst = std::max(worst, std::abs(got[k] - want[k]));
    return worst;
}

inline double unitarity_residual(const DenseOperator& u) {
    const DenseOperator gram = u.adjoint() * u;
    double worst = 0.0;
    for (std::size_t i = 0; i < u.dim(); ++i)
        for (std::size_t j = 0; j < u.dim(); ++j) {
            const Amplitude want = (i == j) ? Amplitude{1.0, 0.0} : Amplitude{0.0, 0.0};
            worst = std::max(worst, std::abs(gram.at(i, j) - want));
        }
    return worst;
}

}  // namespace detail

inline std::vector<VerifyCheck> verify_identities(const VerifyGrid& grid,
                                                  const VerifyOptions& options = {}) {
    if (grid.r_squared.empty() || grid.thetas.empty()) {
        throw std::invalid_argument("verify: grid must contain at least one point");
    }
    for (const double r2 : grid.r_squared) {
        if (!(r2 > 0.0 && r2 < 1.0)) {
            throw std::invalid_argument("verify: grid r^2 values must lie in (0, 1)");
        }
    }
    for (const double th : grid.thetas) {
        if (!std::isfinite(th)) {
            throw std::invalid_argument("verify: grid theta values must be finite");
        }
    }

    const auto make_pipeline = [&options](double r, double t) {
        return options.corrupt_inner_splitter ? build_nested_mzi_corrupted(r, t)
                                              : build_nested_mzi(r, t);
    };
    const double s2 = 1.0 / std::sqrt(2.0);
    const Amplitude one_plus_i{1.0, 1.0};

    std::vector<VerifyCheck> checks;

    checks.push_back(detail::run_check(
        "unitarity", "splitter stages, their product, the exact coupling and the meter rotation",
        1e-12, [&] {
            double worst = 0.0;
            for (const double r2 : grid.r_squared) {
                const StagePipeline p = make_pipeline(std::sqrt(r2), std::sqrt(1.0 - r2));
                DenseOperator total = DenseOperator::identity(kPathModes);
                for (const auto& u : p.stages) {
                    worst = std::max(worst, detail::unitarity_residual(u));
                    total = u * total;
                }
                worst = std::max(worst, detail::unitarity_residual(total));
            }
            for (const double th : grid.thetas)
                worst = std::max(worst, detail::unitarity_residual(
                                            coupling_unitary_exact({th, Position::C, 0})));
            worst = std::max(worst, detail::unitarity_residual(meter_rotation()));
            return worst;
        }));

    checks.push_back(detail::run_check(
        "mid-circuit-state", "two stages map the input to (r, t/sqrt2, t/sqrt2)", 1e-12, [&] {
            double worst = 0.0;
            for (const double r2 : grid.r_squared) {
                const double r = std::sqrt(r2), t = std::sqrt(1.0 - r2);
                worst = std::max(worst, detail::state_residual(
                                            preselected_state(make_pipeline(r, t)),
                                            {r, t * s2, t * s2}));
            }
            return worst;
        }));

    checks.push_back(detail::run_check(
        "detection-boundary-state", "(U4 U3)^dag |100> = (r, -t/sqrt2, t/sqrt2)", 1e-12, [&] {
            double worst = 0.0;
            for (const double r2 : grid.r_squared) {
                const double r = std::sqrt(r2), t = std::sqrt(1.0 - r2);
                worst = std::max(worst, detail::state_residual(
                                            postselected_state(make_pipeline(r, t)),
                                            {r, -t * s2, t * s2}));
            }
            return worst;
        }));

    checks.push_back(detail::run_check(
        "dark-output-arm", "without coupling the inner loop's output arm stays empty", 1e-12,
        [&] {
            double worst = 0.0;
            for (const double r2 : grid.r_squared) {
                const double r = std::sqrt(r2), t = std::sqrt(1.0 - r2);
                const StagePipeline p = make_pipeline(r, t);
                worst = std::max(worst,
                                 std::abs(evolve_to_stage(p, photon_basis_state(0), 3)[1]));
                // the inner pair alone sends a mode-1 photon entirely to mode 2
                const StateVector through =
                    apply_operator(p.stages[2], apply_operator(p.stages[1], photon_basis_state(1)));
                worst = std::max(worst, detail::state_residual(through, {0.0, 0.0, 1.0}));
            }
            return worst;
        }));

    checks.push_back(detail::run_check(
        "undisturbed-detection", "P_D1 = r^4 and the three detectors exhaust the photon", 1e-12,
        [&] {
            double worst = 0.0;
            for (const double r2 : grid.r_squared) {
                const double r = std::sqrt(r2), t = std::sqrt(1.0 - r2);
                const StateVector out =
                    evolve_to_stage(make_pipeline(r, t), photon_basis_state(0), 4);
                const DetectorProbabilities dp = detector_probabilities(out);
                worst = std::max(worst, std::abs(dp.d1 - r2 * r2));
                worst = std::max(worst, std::abs(dp.d1 + dp.d2 + dp.d3 - 1.0));
            }
            return worst;
        }));

    checks.push_back(detail::run_check(
        "path-weak-values",
        "A_A = 1, A_B = -t^2/(2r^2), A_C = t^2/(2r^2), A_E = A_F = 0, all real", 1e-12, [&] {
            double worst = 0.0;
            for (const double r2 : grid.r_squared) {
                const double r = std::sqrt(r2), t = std::sqrt(1.0 - r2);
                const StagePipeline p = make_pipeline(r, t);
                const double ac = (1.0 - r2) / (2.0 * r2);
                const std::pair<Position, double> want[] = {{Position::A, 1.0},
                                                            {Position::B, -ac},
                                                            {Position::C, ac},
                                                            {Position::E, 0.0},
                                                            {Position::F, 0.0}};
                for (const auto& [pos, expect] : want) {
                    const Amplitude v = weak_value(p, pos).value;
                    worst = std::max(worst, std::abs(v - Amplitude{expect, 0.0}));
                }
            }
            return worst;
        }));

    checks.push_back(detail::run_check(
        "weak-value-sum-rule", "A_A + A_B + A_C = 1", 1e-12, [&] {
            double worst = 0.0;
            for (const double r2 : grid.r_squared) {
                const double r = std::sqrt(r2), t = std::sqrt(1.0 - r2);
                const StagePipeline p = make_pipeline(r, t);
                const Amplitude sum = weak_value(p, Position::A).value +
                                      weak_value(p, Position::B).value +
                                      weak_value(p, Position::C).value;
                worst = std::max(worst, std::abs(sum - Amplitude{1.0, 0.0}));
            }
            return worst;
        }));

    checks.push_back(detail::run_check(
        "detection-amplitude", "the undisturbed detection amplitude is r^2, squaring to P_D1",
        1e-12, [&] {
            double worst = 0.0;
            for (const double r2 : grid.r_squared) {
                const double r = std::sqrt(r2), t = std::sqrt(1.0 - r2);
                const StagePipeline p = make_pipeline(r, t);
                const Amplitude overlap = weak_value(p, Position::C).overlap;
                worst = std::max(worst, std::abs(overlap - Amplitude{r2, 0.0}));
                const double pd1 = detector_probabilities(
                                       evolve_to_stage(p, photon_basis_state(0), 4))
                                       .d1;
                worst = std::max(worst, std::abs(std::norm(overlap) - pd1));
            }
            return worst;
        }));

    checks.push_back(detail::run_check(
        "meter-populations",
        "P_b = |(1+i)r^2/2 + z|^2 and P_c = |(1+i)r^2/2 + iz|^2 with z = (t^2/4)(e^{-i theta}-1)",
        1e-12, [&] {
            double worst = 0.0;
            for (const double r2 : grid.r_squared) {
                const double r = std::sqrt(r2), t = std::sqrt(1.0 - r2);
                const StagePipeline p = make_pipeline(r, t);
                for (const double th : grid.thetas) {
                    const StateVector joint = run_weak_measurement(p, {th, Position::C, 0});
                    const MeterProbabilities m = postselected_meter_probabilities(joint, "D1");
                    const Amplitude z = (1.0 - r2) / 4.0 * (std::exp(Amplitude{0.0, -th}) - 1.0);
                    const Amplitude w = one_plus_i * (r2 / 2.0);
                    worst = std::max(worst, std::abs(m.p_b - std::norm(w + z)));
                    worst = std::max(worst, std::abs(m.p_c - std::norm(w + Amplitude{0.0, 1.0} * z)));
                }
            }
            return worst;
        }));

    checks.push_back(detail::run_check(
        "total-detection-shift",
        "P_b + P_c = r^4 + (t^2/2)(1 - cos theta)(t^2/2 - r^2)", 1e-12, [&] {
            double worst = 0.0;
            for (const double r2 : grid.r_squared) {
                const double r = std::sqrt(r2), t = std::sqrt(1.0 - r2), t2 = 1.0 - r2;
                const StagePipeline p = make_pipeline(r, t);
                for (const double th : grid.thetas) {
                    const MeterProbabilities m = postselected_meter_probabilities(
                        run_weak_measurement(p, {th, Position::C, 0}), "D1");
                    const double want =
                        r2 * r2 + (t2 / 2.0) * (1.0 - std::cos(th)) * (t2 / 2.0 - r2);
                    worst = std::max(worst, std::abs(m.p_b + m.p_c - want));
                }
            }
            return worst;
        }));

    checks.push_back(detail::run_check(
        "leak-at-dark-arm",
        "P_E = (t^2/4)(1 - cos theta), split evenly across the meter levels", 1e-12, [&] {
            double worst = 0.0;
            for (const double r2 : grid.r_squared) {
                const double r = std::sqrt(r2), t = std::sqrt(1.0 - r2), t2 = 1.0 - r2;
                const StagePipeline p = make_pipeline(r, t);
                for (const double th : grid.thetas) {
                    const WeakCoupling c{th, Position::C, 0};
                    const double pe = position_probability(p, c, Position::E);
                    const double pe_b = position_probability(p, c, Position::E,
                                                             EvolutionOrder::exact, 0);
                    const double pe_c = position_probability(p, c, Position::E,
                                                             EvolutionOrder::exact, 1);
                    const double want = (t2 / 4.0) * (1.0 - std::cos(th));
                    worst = std::max(worst, std::abs(pe - want));
                    worst = std::max(worst, std::abs(pe_b - pe_c));
                }
            }
            return worst;
        }));

    checks.push_back(detail::run_check(
        "final-joint-state",
        "output state (1+i)/2 (r^2, rt, t)(x)(1,1) + (t/4)(e^{-i theta}-1) (t, -r, 1)(x)(1,i)",
        1e-12, [&] {
            double worst = 0.0;
            for (const double r2 : grid.r_squared) {
                const double r = std::sqrt(r2), t = std::sqrt(1.0 - r2);
                const StagePipeline p = make_pipeline(r, t);
                for (const double th : grid.thetas) {
                    const StateVector joint = run_weak_measurement(p, {th, Position::C, 0});
                    const Amplitude f = (t / 4.0) * (std::exp(Amplitude{0.0, -th}) - 1.0);
                    const Amplitude i{0.0, 1.0};
                    const double path[3] = {r * r, r * t, t};
                    const double noise[3] = {t, -r, 1.0};
                    std::vector<Amplitude> want(kJointDim);
                    for (std::size_t mode = 0; mode < kPathModes; ++mode) {
                        want[mode * 2 + 0] = one_plus_i / 2.0 * path[mode] + f * noise[mode];
                        want[mode * 2 + 1] = one_plus_i / 2.0 * path[mode] + i * f * noise[mode];
                    }
                    worst = std::max(worst, detail::state_residual(joint, want));
                }
            }
            return worst;
        }));

    checks.push_back(detail::run_check(
        "linearization-error-scaling",
        "|P_b/c(exact) - first-order form| shrinks fourfold per halving of theta "
        "(theta in {0.04, 0.02, 0.01}, away from the balanced point t^2 = 2r^2)",
        0.1, [&] {
            double worst = 0.0;
            for (const double r2 : {0.2, 0.3, 0.5, 0.8}) {
                const double r = std::sqrt(r2), t = std::sqrt(1.0 - r2);
                const StagePipeline p = make_pipeline(r, t);
                const double ac = (1.0 - r2) / (2.0 * r2);
                double gap_b[3], gap_c[3];
                const double thetas[3] = {4e-2, 2e-2, 1e-2};
                for (int k = 0; k < 3; ++k) {
                    const MeterProbabilities m = postselected_meter_probabilities(
                        run_weak_measurement(p, {thetas[k], Position::C, 0}), "D1");
                    const double form_b = r2 * r2 / 2.0 * (1.0 - std::sin(ac * thetas[k]));
                    const double form_c = r2 * r2 / 2.0 * (1.0 + std::sin(ac * thetas[k]));
                    gap_b[k] = std::abs(m.p_b - form_b);
                    gap_c[k] = std::abs(m.p_c - form_c);
                }
                for (int k = 0; k < 2; ++k) {
                    worst = std::max(worst, std::abs(gap_b[k] / gap_b[k + 1] / 4.0 - 1.0));
                    worst = std::max(worst, std::abs(gap_c[k] / gap_c[k + 1] / 4.0 - 1.0));
                }
            }
            return worst;
        }));

    checks.push_back(detail::run_check(
        "deviation-order-structure",
        "halving theta halves the leaked amplitude and quarters the leaked probability "
        "(theta 1e-2 vs 5e-3)",
        0.01, [&] {
            double worst = 0.0;
            for (const double r2 : grid.r_squared) {
                const double r = std::sqrt(r2), t = std::sqrt(1.0 - r2);
                const StagePipeline p = make_pipeline(r, t);
                const double pe_big =
                    position_probability(p, {1e-2, Position::C, 0}, Position::E);
                const double pe_small =
                    position_probability(p, {5e-3, Position::C, 0}, Position::E);
                worst = std::max(worst, std::abs(std::sqrt(pe_big / pe_small) / 2.0 - 1.0));
                worst = std::max(worst, std::abs(pe_big / pe_small / 4.0 - 1.0));
            }
            return worst;
        }));

    checks.push_back(detail::run_check(
        "first-order-leak",
        "linearized evolution puts exactly theta^2 t^2/16 on the dark arm's unrotated level",
        1e-12, [&] {
            double worst = 0.0;
            for (const double r2 : grid.r_squared) {
                const double r = std::sqrt(r2), t = std::sqrt(1.0 - r2), t2 = 1.0 - r2;
                const StagePipeline p = make_pipeline(r, t);
                for (const double th : grid.thetas) {
                    const double got = position_probability(p, {th, Position::C, 0}, Position::E,
                                                            EvolutionOrder::first_order, 0);
                    worst = std::max(worst, std::abs(got - th * th * t2 / 16.0));
                }
            }
            return worst;
        }));

    checks.push_back(detail::run_check(
        "inference-from-linear-form",
        "populations built from the first-order forms invert back to A_C exactly", 1e-12, [&] {
            double worst = 0.0;
            for (const double r2 : grid.r_squared) {
                const double ac = (1.0 - r2) / (2.0 * r2);
                // stay inside the invertible window |A_C * theta| < pi/2
                const double th = std::min(0.3, 1.0 / (std::abs(ac) + 1.0));
                MeterProbabilities m;
                m.p_b = r2 * r2 / 2.0 * (1.0 - std::sin(ac * th));
                m.p_c = r2 * r2 / 2.0 * (1.0 + std::sin(ac * th));
                m.conditioned_on = "D1";
                worst = std::max(worst, std::abs(infer_weak_value(m, th) - ac));
            }
            return worst;
        }));

    checks.push_back(detail::run_check(
        "inference-small-theta-bias",
        "exact populations at theta = 1e-3 recover A_C to 1e-3 relative", 1e-3, [&] {
            double worst = 0.0;
            for (const double r2 : grid.r_squared) {
                const double r = std::sqrt(r2), t = std::sqrt(1.0 - r2);
                const StagePipeline p = make_pipeline(r, t);
                const double ac = (1.0 - r2) / (2.0 * r2);
                const MeterProbabilities m = postselected_meter_probabilities(
                    run_weak_measurement(p, {1e-3, Position::C, 0}), "D1");
                worst = std::max(worst,
                                 std::abs(infer_weak_value(m, 1e-3) - ac) / std::abs(ac));
            }
            return worst;
        }));

    checks.push_back(detail::run_check(
        "sequential-weak-value",
        "ordered pair values: (C,E) = t^2/(2r^2), (B,E) = -t^2/(2r^2), outer arm twice = 1",
        1e-12, [&] {
            double worst = 0.0;
            for (const double r2 : grid.r_squared) {
                const double r = std::sqrt(r2), t = std::sqrt(1.0 - r2);
                const StagePipeline p = make_pipeline(r, t);
                const double ac = (1.0 - r2) / (2.0 * r2);
                worst = std::max(worst, std::abs(joint_weak_value(p, Position::C, Position::E).value -
                                                 Amplitude{ac, 0.0}));
                worst = std::max(worst, std::abs(joint_weak_value(p, Position::B, Position::E).value -
                                                 Amplitude{-ac, 0.0}));
                worst = std::max(
                    worst, std::abs(joint_weak_value(p, ProjectorInsertion{2, 0},
                                                     ProjectorInsertion{3, 0})
                                        .value -
                                    Amplitude{1.0, 0.0}));
            }
            return worst;
        }));

    checks.push_back(detail::run_check(
        "balanced-three-path-point",
        "at r^2 = 1/3: equal path amplitudes, A_C = 1, A_B = -1", 1e-12, [&] {
            const double r = 1.0 / std::sqrt(3.0), t = std::sqrt(2.0 / 3.0);
            const StagePipeline p = make_pipeline(r, t);
            double worst = detail::state_residual(preselected_state(p), {r, r, r});
            worst = std::max(worst, std::abs(weak_value(p, Position::C).value - Amplitude{1.0, 0.0}));
            worst = std::max(worst, std::abs(weak_value(p, Position::B).value - Amplitude{-1.0, 0.0}));
            return worst;
        }));

    checks.push_back(detail::run_check(
        "boundary-overlap-equivalence",
        "projecting the mid-circuit joint state on the detection boundary state reproduces the "
        "full-evolution detector-1 amplitudes",
        1e-12, [&] {
            double worst = 0.0;
            for (const double r2 : grid.r_squared) {
                const double r = std::sqrt(r2), t = std::sqrt(1.0 - r2);
                const StagePipeline p = make_pipeline(r, t);
                const StateVector post = postselected_state(p);
                const StateVector meter_b = StateVector::basis_state(0, meter_basis_labels());
                const StateVector meter_c = StateVector::basis_state(1, meter_basis_labels());
                for (const double th : grid.thetas) {
                    const WeakCoupling c{th, Position::C, 0};
                    const StateVector mid = joint_state_after_stage(p, c, EvolutionOrder::exact, 2);
                    const StateVector fin = run_weak_measurement(p, c);
                    const Amplitude amp_b = inner_product(tensor_product(post, meter_b), mid);
                    const Amplitude amp_c = inner_product(tensor_product(post, meter_c), mid);
                    worst = std::max(worst, std::abs(amp_b - fin[0]));
                    worst = std::max(worst, std::abs(amp_c - fin[1]));
                }
            }
            return worst;
        }));

    checks.push_back(detail::run_check(
        "joint-norm-conservation", "the exact coupled evolution conserves the joint norm", 1e-12,
        [&] {
            double worst = 0.0;
            for (const double r2 : grid.r_squared) {
                const double r = std::sqrt(r2), t = std::sqrt(1.0 - r2);
                const StagePipeline p = make_pipeline(r, t);
                for (const double th : grid.thetas) {
                    const StateVector joint = run_weak_measurement(p, {th, Position::C, 0});
                    worst = std::max(worst, std::abs(joint.norm_squared() - 1.0));
                }
                const StateVector photon = evolve_to_stage(p, photon_basis_state(0), 4);
                worst = std::max(worst, std::abs(photon.norm_squared() - 1.0));
            }
            return worst;
        }));

    return checks;
}

inline bool all_passed(const std::vector<VerifyCheck>& checks) {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

inline std::string verify_report(const std::vector<VerifyCheck>& checks) {
    std::string out;
    std::size_t name_width = 0;
    for (const auto& c : checks) name_width = std::max(name_width, c.name.size());
    for (const auto& c : checks) {
        char line[160];
        std::snprintf(line, sizeof(line), "[%s] %-*s  residual %-12.5g tol %-8.3g  ",
                      c.passed ? "PASS" : "FAIL", static_cast<int>(name_width), c.name.c_str(),
                      c.residual, c.tolerance);
        out += line;
        out += c.detail;
        out += '\n';
    }
    std::size_t failed = 0;
    for (const auto& c : checks)
        if (!c.passed) ++failed;
    char tail[96];
    std::snprintf(tail, sizeof(tail), "%zu checks, %zu failed\n", checks.size(), failed);
    out += tail;
    return out;
}

}  // namespace nmzi
