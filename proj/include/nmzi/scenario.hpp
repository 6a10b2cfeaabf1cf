// Scenario layer: resolves user-facing configuration into simulation
// parameters, runs single configurations and parameter sweeps, and renders
// result tables as CSV or JSON. All numbers are printed with 12 significant
// digits ("%.12g"); undefined values render as "nan" in CSV and null in JSON.

#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "interferometer.hpp"
#include "weak_measurement.hpp"
#include "weak_values.hpp"

namespace nmzi {

inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

struct Cell {
    std::string text;
    bool quoted = false;  // true for non-numeric cells (JSON strings)
};

inline Cell number_cell(double v) { return {format_number(v), false}; }
inline Cell text_cell(std::string s) { return {std::move(s), true}; }

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

inline std::string to_csv(const ResultTable& table) {
    std::string out;
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        if (j) out += ',';
        out += table.columns[j];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out += ',';
            out += row[j].text;
        }
        out += '\n';
    }
    return out;
}

// Array of row objects; keys follow the column order, numbers stay in the
// same 12-digit form as CSV, "nan" becomes null.
inline std::string to_json(const ResultTable& table) {
    std::string out = "[";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        out += (i ? ",\n  {" : "\n  {");
        const auto& row = table.rows[i];
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out += ", ";
            out += '"';
            out += table.columns[j];
            out += "\": ";
            if (row[j].quoted) {
                out += '"';
                out += row[j].text;
                out += '"';
            } else if (row[j].text == "nan") {
                out += "null";
            } else {
                out += row[j].text;
            }
        }
        out += '}';
    }
    out += table.rows.empty() ? "]\n" : "\n]\n";
    return out;
}

// Raw inputs as they arrive from flags or a config file, before consistency
// resolution. Unset optionals fall back to defaults in resolve_scenario.
struct ScenarioInputs {
    std::optional<double> r;
    std::optional<double> t;
    std::optional<double> theta;
    std::optional<double> eta;      // coupling rate; theta = eta * tau
    std::optional<double> tau;      // interaction time
    std::optional<std::string> position;
    std::optional<std::string> order;
    std::vector<std::string> outputs;
    std::optional<double> max_theta;
};

struct ScenarioConfig {
    double r = 0.0;
    double t = 0.0;
    double theta = 0.0;
    Position position = Position::C;
    EvolutionOrder order = EvolutionOrder::exact;
    std::vector<std::string> outputs;  // empty selects every quantity
    double max_theta = std::numbers::pi;
};

inline const std::vector<std::string>& run_quantity_names() {
    static const std::vector<std::string> names = {
        "P_D1", "P_D2", "P_D3", "P_b", "P_c", "P_E",
        "A_A", "A_B", "A_C", "A_E", "A_F", "A_C_inferred", "A_CE_joint"};
    return names;
}

inline ScenarioConfig resolve_scenario(const ScenarioInputs& in) {
    ScenarioConfig cfg;

    if (in.r) {
        if (!(*in.r > 0.0 && *in.r <= 1.0)) {
            throw std::invalid_argument("config: r must lie in (0, 1]");
        }
        cfg.r = *in.r;
        if (in.t) {
            if (std::abs(cfg.r * cfg.r + *in.t * *in.t - 1.0) > 1e-9) {
                throw std::invalid_argument("config: r and t are inconsistent, r^2 + t^2 must equal 1");
            }
            cfg.t = *in.t;
        } else {
            cfg.t = std::sqrt(std::max(0.0, 1.0 - cfg.r * cfg.r));
        }
    } else if (in.t) {
        if (!(*in.t >= 0.0 && *in.t < 1.0)) {
            throw std::invalid_argument("config: t must lie in [0, 1)");
        }
        cfg.t = *in.t;
        cfg.r = std::sqrt(std::max(0.0, 1.0 - cfg.t * cfg.t));
    } else {
        throw std::invalid_argument("config: one of r or t is required");
    }

    if (in.eta.has_value() != in.tau.has_value()) {
        throw std::invalid_argument("config: eta and tau must be given together");
    }
    if (in.theta) {
        cfg.theta = *in.theta;
        if (in.eta && std::abs(*in.eta * *in.tau - cfg.theta) > 1e-12) {
            throw std::invalid_argument("config: theta and eta*tau disagree");
        }
    } else if (in.eta) {
        cfg.theta = *in.eta * *in.tau;
    }
    if (!std::isfinite(cfg.theta)) {
        throw std::invalid_argument("config: theta must be finite");
    }

    if (in.max_theta) {
        if (!(*in.max_theta > 0.0)) {
            throw std::invalid_argument("config: max_theta must be positive");
        }
        cfg.max_theta = *in.max_theta;
    }
    if (std::abs(cfg.theta) > cfg.max_theta) {
        throw std::invalid_argument("config: |theta| exceeds max_theta (raise max_theta to allow it)");
    }

    if (in.position) cfg.position = parse_position(*in.position);
    if (in.order) cfg.order = parse_order(*in.order);

    for (const auto& name : in.outputs) {
        const auto& known = run_quantity_names();
        bool found = false;
        for (const auto& k : known) found = found || (k == name);
        if (!found) {
            std::string msg = "config: unknown output '" + name + "', valid names:";
            for (const auto& k : known) msg += " " + k;
            throw std::invalid_argument(msg);
        }
        cfg.outputs.push_back(name);
    }
    return cfg;
}

namespace detail {

inline bool wants(const ScenarioConfig& cfg, const std::string& name) {
    if (cfg.outputs.empty()) return true;
    for (const auto& o : cfg.outputs)
        if (o == name) return true;
    return false;
}

}  // namespace detail

// One configuration, one row. Columns: the echoed configuration followed by
// the selected quantities. P_b/P_c are meter populations in coincidence with
// detector 1; P_E is the photon population on the loop output arm after three
// stages. A_C_inferred is nan when theta = 0 (nothing to invert) or when the
// population contrast falls outside the invertible range.
inline ResultTable run_scenario(const ScenarioConfig& cfg) {
    const StagePipeline pipeline = build_nested_mzi(cfg.r, cfg.t);
    const WeakCoupling coupling{cfg.theta, cfg.position, 0};

    const StateVector joint = run_weak_measurement(pipeline, coupling, cfg.order);
    const MeterProbabilities meter = postselected_meter_probabilities(joint, "D1");

    double p_det[3] = {0.0, 0.0, 0.0};
    for (std::size_t mode = 0; mode < kPathModes; ++mode)
        p_det[mode] = std::norm(joint[mode * kMeterLevels]) + std::norm(joint[mode * kMeterLevels + 1]);

    const double p_e = position_probability(pipeline, coupling, Position::E, cfg.order);

    const double a_a = weak_value(pipeline, Position::A).value.real();
    const double a_b = weak_value(pipeline, Position::B).value.real();
    const double a_c = weak_value(pipeline, Position::C).value.real();
    const double a_e = weak_value(pipeline, Position::E).value.real();
    const double a_f = weak_value(pipeline, Position::F).value.real();
    const double a_ce = joint_weak_value(pipeline, Position::C, Position::E).value.real();

    double inferred = std::numeric_limits<double>::quiet_NaN();
    if (cfg.theta != 0.0) {
        try {
            inferred = infer_weak_value(meter, cfg.theta);
        } catch (const std::domain_error&) {
            // contrast outside [-1, 1]; leave as nan
        }
    }

    ResultTable table;
    table.columns = {"r", "t", "theta", "position", "order"};
    std::vector<Cell> row = {number_cell(cfg.r), number_cell(cfg.t), number_cell(cfg.theta),
                             text_cell(std::string(to_string(cfg.position))),
                             text_cell(std::string(to_string(cfg.order)))};

    const std::vector<std::pair<std::string, double>> quantities = {
        {"P_D1", p_det[0]}, {"P_D2", p_det[1]}, {"P_D3", p_det[2]},
        {"P_b", meter.p_b}, {"P_c", meter.p_c}, {"P_E", p_e},
        {"A_A", a_a}, {"A_B", a_b}, {"A_C", a_c}, {"A_E", a_e}, {"A_F", a_f},
        {"A_C_inferred", inferred}, {"A_CE_joint", a_ce}};
    for (const auto& [name, value] : quantities) {
        if (!detail::wants(cfg, name)) continue;
        table.columns.push_back(name);
        row.push_back(number_cell(value));
    }
    table.rows.push_back(std::move(row));
    return table;
}

struct SweepSpec {
    std::string parameter = "theta";  // "theta" or "r"
    double start = 0.0;
    double stop = 0.0;
    std::size_t points = 0;
    bool log_spacing = false;
};

inline std::vector<double> sweep_values(const SweepSpec& s) {
    if (s.parameter != "theta" && s.parameter != "r") {
        throw std::invalid_argument("sweep: parameter must be 'theta' or 'r'");
    }
    if (s.points < 1) {
        throw std::invalid_argument("sweep: points must be at least 1");
    }
    if (!std::isfinite(s.start) || !std::isfinite(s.stop)) {
        throw std::invalid_argument("sweep: start and stop must be finite");
    }
    if (s.points == 1) {
        // Degenerate single-point sweep: evaluated at start; stop must agree.
        if (s.stop != s.start) {
            throw std::invalid_argument("sweep: a single-point sweep needs stop == start");
        }
        return {s.start};
    }
    if (!(s.start < s.stop)) {
        throw std::invalid_argument("sweep: start must be less than stop");
    }
    if (s.log_spacing && !(s.start > 0.0)) {
        throw std::invalid_argument("sweep: log spacing requires start > 0");
    }
    std::vector<double> vals(s.points);
    if (s.log_spacing) {
        const double la = std::log(s.start), lb = std::log(s.stop);
        for (std::size_t k = 0; k < s.points; ++k)
            vals[k] = std::exp(la + (lb - la) * static_cast<double>(k) / static_cast<double>(s.points - 1));
    } else {
        for (std::size_t k = 0; k < s.points; ++k)
            vals[k] = s.start + (s.stop - s.start) * static_cast<double>(k) / static_cast<double>(s.points - 1);
    }
    vals.back() = s.stop;
    return vals;
}

// Sweeps theta or r and tabulates detector-1 meter populations from the exact
// evolution next to the linearized one, their gap, and the loop leak. Rows
// come out in sweep order. The configured order is ignored here: the point of
// the table is the exact/first-order comparison.
inline ResultTable sweep_theta(const ScenarioConfig& cfg, const SweepSpec& spec) {
    const std::vector<double> values = sweep_values(spec);

    ResultTable table;
    table.columns = {"r", "t", "theta", "position",
                     "P_b_exact", "P_c_exact", "P_b_first", "P_c_first",
                     "P_b_diff", "P_c_diff", "P_E_exact"};

    for (const double v : values) {
        double r = cfg.r, t = cfg.t, theta = cfg.theta;
        if (spec.parameter == "theta") {
            theta = v;
            if (std::abs(theta) > cfg.max_theta) {
                throw std::invalid_argument("sweep: |theta| exceeds max_theta (raise max_theta to allow it)");
            }
        } else {
            if (!(v > 0.0 && v <= 1.0)) {
                throw std::invalid_argument("sweep: r must lie in (0, 1]");
            }
            r = v;
            t = std::sqrt(std::max(0.0, 1.0 - r * r));
        }

        const StagePipeline pipeline = build_nested_mzi(r, t);
        const WeakCoupling coupling{theta, cfg.position, 0};
        const MeterProbabilities exact =
            postselected_meter_probabilities(run_weak_measurement(pipeline, coupling), "D1");
        const MeterProbabilities first = postselected_meter_probabilities(
            run_weak_measurement(pipeline, coupling, EvolutionOrder::first_order), "D1");
        const double p_e = position_probability(pipeline, coupling, Position::E);

        table.rows.push_back({number_cell(r), number_cell(t), number_cell(theta),
                              text_cell(std::string(to_string(cfg.position))),
                              number_cell(exact.p_b), number_cell(exact.p_c),
                              number_cell(first.p_b), number_cell(first.p_c),
                              number_cell(std::abs(exact.p_b - first.p_b)),
                              number_cell(std::abs(exact.p_c - first.p_c)),
                              number_cell(p_e)});
    }
    return table;
}

}  // namespace nmzi
