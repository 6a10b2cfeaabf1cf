// Command line front end. Subcommands:
//   run         single configuration, one result row
//   sweep       parameter sweep over theta or r
//   verify      identity checks over a grid; exit 2 if any fail
//   weak-value  single or ordered-pair path weak values
//
// Exit codes: 0 success, 1 usage or configuration error, 2 verification
// failure. Results go to stdout, diagnostics to stderr.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "nmzi/scenario.hpp"
#include "nmzi/verify.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<double> r, t, theta, eta, tau, max_theta;
    std::optional<std::string> position, order;
    std::vector<std::string> outputs;
    std::string format = "csv";
};

void add_config_flags(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--config", opt.config_path, "JSON configuration file; flags override it");
    cmd->add_option("--r", opt.r, "outer splitter reflectivity, in (0, 1]");
    cmd->add_option("--t", opt.t, "outer splitter transmissivity, in [0, 1)");
    cmd->add_option("--theta", opt.theta, "coupling phase");
    cmd->add_option("--eta", opt.eta, "coupling rate; theta = eta * tau");
    cmd->add_option("--tau", opt.tau, "interaction time; theta = eta * tau");
    cmd->add_option("--position", opt.position, "coupling position: A, B, C, E or F");
    cmd->add_option("--max-theta", opt.max_theta, "largest accepted |theta| (default pi)");
    cmd->add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
}

nmzi::ScenarioInputs load_inputs(const CommonOptions& opt) {
    nmzi::ScenarioInputs in;
    if (!opt.config_path.empty()) {
        std::ifstream file(opt.config_path);
        if (!file) {
            throw std::invalid_argument("config: cannot open '" + opt.config_path + "'");
        }
        nlohmann::json doc;
        try {
            file >> doc;
        } catch (const nlohmann::json::parse_error& e) {
            throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
        }
        if (!doc.is_object()) {
            throw std::invalid_argument("config: top level must be a JSON object");
        }
        for (const auto& [key, value] : doc.items()) {
            if (key == "r") in.r = value.get<double>();
            else if (key == "t") in.t = value.get<double>();
            else if (key == "theta") in.theta = value.get<double>();
            else if (key == "eta") in.eta = value.get<double>();
            else if (key == "tau") in.tau = value.get<double>();
            else if (key == "position") in.position = value.get<std::string>();
            else if (key == "order") in.order = value.get<std::string>();
            else if (key == "max_theta") in.max_theta = value.get<double>();
            else if (key == "outputs") in.outputs = value.get<std::vector<std::string>>();
            else throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    }
    if (opt.r) in.r = opt.r;
    if (opt.t) in.t = opt.t;
    if (opt.theta) in.theta = opt.theta;
    if (opt.eta) in.eta = opt.eta;
    if (opt.tau) in.tau = opt.tau;
    if (opt.position) in.position = opt.position;
    if (opt.order) in.order = opt.order;
    if (opt.max_theta) in.max_theta = opt.max_theta;
    if (!opt.outputs.empty()) in.outputs = opt.outputs;
    return in;
}

void emit(const nmzi::ResultTable& table, const std::string& format) {
    const std::string text = (format == "json") ? nmzi::to_json(table) : nmzi::to_csv(table);
    std::fputs(text.c_str(), stdout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nested Mach-Zehnder interferometer with a weak path probe"};
    app.require_subcommand(1);

    CommonOptions run_opt;
    auto* run_cmd = app.add_subcommand("run", "evaluate one configuration");
    add_config_flags(run_cmd, run_opt);
    run_cmd->add_option("--order", run_opt.order, "evolution order: exact or first");
    run_cmd->add_option("--outputs", run_opt.outputs,
                        "comma-separated quantity names (default: all)")
        ->delimiter(',');

    CommonOptions sweep_opt;
    nmzi::SweepSpec sweep_spec;
    auto* sweep_cmd = app.add_subcommand("sweep", "sweep theta or r, tabulating exact vs linearized");
    add_config_flags(sweep_cmd, sweep_opt);
    sweep_cmd->add_option("--param", sweep_spec.parameter, "swept parameter: theta or r");
    sweep_cmd->add_option("--start", sweep_spec.start, "first value")->required();
    sweep_cmd->add_option("--stop", sweep_spec.stop, "last value")->required();
    sweep_cmd->add_option("--points", sweep_spec.points, "number of rows")->required();
    sweep_cmd->add_flag("--log", sweep_spec.log_spacing, "logarithmic spacing (start > 0)");

    std::string grid_name = "default";
    bool corrupt = false;
    auto* verify_cmd = app.add_subcommand("verify", "check the closed-form identities, exit 2 on failure");
    verify_cmd->add_option("--grid", grid_name, "parameter grid")
        ->check(CLI::IsMember({"default", "dense"}));
    verify_cmd->add_flag("--corrupt-inner-splitter", corrupt,
                         "negative control: mis-sign one splitter so the checks must fail");

    CommonOptions wv_opt;
    std::optional<std::string> wv_first, wv_second;
    auto* wv_cmd = app.add_subcommand("weak-value", "path projector weak values for detection on D1");
    wv_cmd->add_option("--config", wv_opt.config_path, "JSON configuration file; flags override it");
    wv_cmd->add_option("--r", wv_opt.r, "outer splitter reflectivity, in (0, 1]");
    wv_cmd->add_option("--t", wv_opt.t, "outer splitter transmissivity, in [0, 1)");
    wv_cmd->add_option("--position", wv_opt.position, "probed position (default C)");
    wv_cmd->add_option("--first", wv_first, "earlier position of an ordered pair");
    wv_cmd->add_option("--second", wv_second, "later position of an ordered pair");
    wv_cmd->add_option("--format", wv_opt.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (run_cmd->parsed()) {
            const nmzi::ScenarioConfig cfg = nmzi::resolve_scenario(load_inputs(run_opt));
            emit(nmzi::run_scenario(cfg), run_opt.format);
            return 0;
        }
        if (sweep_cmd->parsed()) {
            const nmzi::ScenarioConfig cfg = nmzi::resolve_scenario(load_inputs(sweep_opt));
            emit(nmzi::sweep_theta(cfg, sweep_spec), sweep_opt.format);
            return 0;
        }
        if (verify_cmd->parsed()) {
            const nmzi::VerifyGrid grid =
                (grid_name == "dense") ? nmzi::dense_verify_grid() : nmzi::default_verify_grid();
            const auto checks = nmzi::verify_identities(grid, {corrupt});
            std::fputs(nmzi::verify_report(checks).c_str(), stdout);
            return nmzi::all_passed(checks) ? 0 : 2;
        }
        if (wv_cmd->parsed()) {
            if (wv_first.has_value() != wv_second.has_value()) {
                throw std::invalid_argument("weak-value: --first and --second must be given together");
            }
            if (wv_first && wv_opt.position) {
                throw std::invalid_argument(
                    "weak-value: give --position or the --first/--second pair, not both");
            }
            const nmzi::ScenarioConfig cfg = nmzi::resolve_scenario(load_inputs(wv_opt));
            const nmzi::StagePipeline pipeline = nmzi::build_nested_mzi(cfg.r, cfg.t);

            nmzi::WeakValueResult res;
            std::string positions;
            if (wv_first) {
                const nmzi::Position a = nmzi::parse_position(*wv_first);
                const nmzi::Position b = nmzi::parse_position(*wv_second);
                res = nmzi::joint_weak_value(pipeline, a, b);
                positions = std::string(nmzi::to_string(a)) + "+" + std::string(nmzi::to_string(b));
            } else {
                res = nmzi::weak_value(pipeline, cfg.position);
                positions = std::string(nmzi::to_string(cfg.position));
            }

            nmzi::ResultTable table;
            table.columns = {"r", "t", "positions", "value_re", "value_im",
                             "overlap_re", "overlap_im"};
            table.rows.push_back({nmzi::number_cell(cfg.r), nmzi::number_cell(cfg.t),
                                  nmzi::text_cell(positions), nmzi::number_cell(res.value.real()),
                                  nmzi::number_cell(res.value.imag()),
                                  nmzi::number_cell(res.overlap.real()),
                                  nmzi::number_cell(res.overlap.imag())});
            emit(table, wv_opt.format);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
