// Command-line front end: equilibrium curve export, mechanism simulation,
// parameter sweeps, regret-exponent fitting, and the incentive battery.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spp/spp.hpp"

namespace {

using nlohmann::json;

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

// Reads a trace (or any CSV with t and cumulative_regret columns; falls back
// to the first two columns) into a RegretTrace.
spp::RegretTrace read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open trace file: " + path);
    std::string line;
    int t_col = 0, r_col = 1;
    bool header_seen = false;
    spp::RegretTrace trace;
    std::vector<std::pair<double, double>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields = split_list(line);
        if (!header_seen) {
            header_seen = true;
            bool numeric = true;
            try {
                (void)std::stod(fields.at(0));
            } catch (...) {
                numeric = false;
            }
            if (!numeric) {
                for (std::size_t i = 0; i < fields.size(); ++i) {
                    if (fields[i] == "t") t_col = static_cast<int>(i);
                    if (fields[i] == "cumulative_regret") r_col = static_cast<int>(i);
                }
                continue;
            }
        }
        rows.emplace_back(std::stod(fields.at(static_cast<std::size_t>(t_col))),
                          std::stod(fields.at(static_cast<std::size_t>(r_col))));
    }
    trace.cumulative.reserve(rows.size());
    for (const auto& [t, r] : rows) trace.cumulative.push_back(r);
    return trace;
}

int run(int argc, char** argv) {
    CLI::App app{"sequential peer prediction simulator"};
    app.require_subcommand(1);

    std::string config_path, trace_path, param, values_csv;
    int grid = 101;
    long samples = 100000;
    double window = 0.1;

    auto* eq = app.add_subcommand("equilibrium", "print the equilibrium curve as CSV");
    eq->add_option("--config", config_path, "world or experiment JSON")->required();
    eq->add_option("--grid", grid, "bonus grid resolution");

    auto* sim = app.add_subcommand("simulate", "run the posted-price mechanism");
    sim->add_option("--config", config_path, "experiment JSON")->required();

    auto* sweep = app.add_subcommand("sweep", "run the mechanism over a parameter list");
    sweep->add_option("--config", config_path, "experiment JSON")->required();
    sweep->add_option("--param", param, "dotted config path, e.g. world.eta")->required();
    sweep->add_option("--values", values_csv, "comma-separated values")->required();

    auto* an = app.add_subcommand("analyze", "fit the regret exponent of a trace");
    an->add_option("--trace", trace_path, "trace CSV")->required();
    an->add_option("--window", window, "final fraction of the horizon");

    auto* bat = app.add_subcommand("battery", "run the incentive test battery");
    bat->add_option("--config", config_path, "world or experiment JSON")->required();
    bat->add_option("--samples", samples, "Monte-Carlo samples per case");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (eq->parsed()) {
        json doc = spp::cfgio::load_json_file(config_path);
        spp::WorldConfig world = spp::cfgio::world_from_any(doc);
        spp::EquilibriumCurve curve = spp::build_curve(world, grid);
        spp::csvio::write_curve(std::cout, curve);
        return 0;
    }

    if (sim->parsed()) {
        json doc = spp::cfgio::load_json_file(config_path);
        spp::ExperimentConfig ec = spp::cfgio::parse_experiment(doc);
        spp::ExperimentSummary summary = spp::run_experiment(ec);
        json out;
        out["output_dir"] = ec.output_dir;
        out["seeds"] = ec.seeds.size();
        out["final_regret_mean"] = summary.mean_regret.empty() ? 0.0 : summary.mean_regret.back();
        std::cout << out.dump() << '\n';
        return 0;
    }

    if (sweep->parsed()) {
        json doc = spp::cfgio::load_json_file(config_path);
        std::string pointer = "/" + param;
        for (auto& c : pointer)
            if (c == '.') c = '/';
        json results = json::array();
        for (const std::string& v : split_list(values_csv)) {
            json variant = doc;
            variant[json::json_pointer(pointer)] = json::parse(v);
            std::string base = doc.at("output_dir").get<std::string>();
            variant["output_dir"] = base + "/" + param + "=" + v;
            spp::ExperimentConfig ec = spp::cfgio::parse_experiment(variant);
            spp::ExperimentSummary summary = spp::run_experiment(ec);
            json row;
            row["value"] = json::parse(v);
            row["output_dir"] = ec.output_dir;
            row["final_regret_mean"] =
                summary.mean_regret.empty() ? 0.0 : summary.mean_regret.back();
            results.push_back(row);
        }
        std::cout << results.dump() << '\n';
        return 0;
    }

    if (an->parsed()) {
        spp::RegretTrace trace = read_trace_csv(trace_path);
        spp::SlopeFit fit = spp::fit_regret_exponent(trace, window);
        json out;
        out["slope"] = fit.slope;
        out["intercept"] = fit.intercept;
        out["points"] = fit.points;
        out["window"] = window;
        std::cout << out.dump() << '\n';
        return 0;
    }

    if (bat->parsed()) {
        json doc = spp::cfgio::load_json_file(config_path);
        spp::WorldConfig world = spp::cfgio::world_from_any(doc);
        spp::BatteryReport report = spp::incentive_battery(world, samples);
        std::cout << report.to_string();
        if (!report.pass()) {
            json err;
            err["error"] = "incentive battery failed";
            std::cerr << err.dump() << '\n';
            return 2;
        }
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        nlohmann::json err;
        err["error"] = e.what();
        std::cerr << err.dump() << '\n';
        return 1;
    }
}
