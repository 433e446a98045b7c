#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "errsurf/analysis.hpp"
#include "errsurf/error.hpp"

namespace {

// exit codes: 0 report produced, 1 command-line usage, then one per category
int exit_code(errsurf::ErrorCategory cat) {
    switch (cat) {
        case errsurf::ErrorCategory::schema: return 2;
        case errsurf::ErrorCategory::expression: return 3;
        case errsurf::ErrorCategory::measurement: return 4;
        case errsurf::ErrorCategory::numerical: return 5;
    }
    return 1;
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw errsurf::SchemaError("cannot open output file '" + path + "'");
    return file;
}

struct CommonOptions {
    std::string input;
    std::string output;
    std::string format = "text";
    std::string mode;
    double rank_tolerance = errsurf::kDefaultRankTolerance;
    std::string estimator;
    std::string policy;
};

void add_request_flags(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("input", opt.input, "request file (JSON)")->required();
    cmd->add_option("-o,--output", opt.output, "output path (default: stdout)");
    cmd->add_option("--mode", opt.mode, "override the request mode (absolute|relative)");
    cmd->add_option("--rank-tolerance", opt.rank_tolerance,
                    "relative eigenvalue threshold for rank decisions");
    cmd->add_option("--estimator", opt.estimator,
                    "representative inaccuracy estimator (mean_abs_deviation|max_deviation)");
    cmd->add_option("--evaluation-point", opt.policy,
                    "derivative evaluation points (mean_anchored|joint_indexed)");
}

void apply_overrides(errsurf::AnalysisRequest& req, const CommonOptions& opt,
                     bool tolerance_set) {
    if (!opt.mode.empty()) req.mode = errsurf::mode_from_string(opt.mode);
    if (tolerance_set) req.options.rank_tolerance = opt.rank_tolerance;
    if (!opt.estimator.empty())
        req.options.estimator = errsurf::estimator_from_string(opt.estimator);
    if (!opt.policy.empty()) req.options.policy = errsurf::policy_from_string(opt.policy);
}

int run_analyze(const CommonOptions& opt, bool tolerance_set) {
    errsurf::AnalysisRequest req = errsurf::load_request(opt.input);
    apply_overrides(req, opt, tolerance_set);
    const errsurf::AnalysisResult result = errsurf::analyze(req);

    std::ofstream file;
    std::ostream& out = open_output(file, opt.output);
    if (opt.format == "machine")
        out << errsurf::report_to_json(result).dump(2) << "\n";
    else
        out << errsurf::report_to_text(result);
    return 0;
}

int run_classify(const CommonOptions& opt) {
    const errsurf::InfluenceSet inf = errsurf::load_coefficients(opt.input);
    std::ofstream file;
    std::ostream& out = open_output(file, opt.output);
    if (opt.format == "machine")
        out << errsurf::classification_to_json(inf, opt.rank_tolerance).dump(2) << "\n";
    else
        out << errsurf::classification_to_text(inf, opt.rank_tolerance);
    return 0;
}

int run_derive(const CommonOptions& opt, const std::vector<std::string>& wrt) {
    const errsurf::AnalysisRequest req = errsurf::load_request(opt.input);
    const errsurf::Experiment exp = req.to_experiment();
    exp.validate();

    std::ofstream file;
    std::ostream& out = open_output(file, opt.output);

    auto print_first = [&](const std::string& v) {
        out << "d/d" << v << ": " << errsurf::to_string(differentiate(exp.formula, v)) << "\n";
    };
    auto print_second = [&](const std::string& v, const std::string& w) {
        out << "d2/d" << v << "d" << w << ": "
            << errsurf::to_string(second_partial(exp.formula, v, w)) << "\n";
    };

    auto known = [&](const std::string& name) {
        for (const auto& series : exp.variables)
            if (series.name == name) return true;
        return false;
    };
    for (const auto& name : wrt)
        if (!known(name))
            throw errsurf::SchemaError("'" + name + "' is not a declared variable");

    if (wrt.size() > 2) throw errsurf::SchemaError("--wrt takes at most two variable names");
    if (wrt.size() == 1) {
        print_first(wrt[0]);
    } else if (wrt.size() == 2) {
        print_second(wrt[0], wrt[1]);
    } else {
        for (const auto& series : exp.variables) print_first(series.name);
        for (std::size_t i = 0; i < exp.variables.size(); ++i)
            for (std::size_t j = i; j < exp.variables.size(); ++j)
                print_second(exp.variables[i].name, exp.variables[j].name);
    }
    return 0;
}

int run_surface_grid(const CommonOptions& opt, bool tolerance_set,
                     std::vector<double>& lower, std::vector<double>& upper,
                     std::vector<int>& points) {
    errsurf::AnalysisRequest req = errsurf::load_request(opt.input);
    apply_overrides(req, opt, tolerance_set);
    const errsurf::Experiment exp = req.to_experiment();
    exp.validate();
    const errsurf::InfluenceSet inf = errsurf::influence_set(exp);

    const std::size_t n = req.variables.size();
    if (lower.empty()) lower.assign(n, 0.0);
    if (upper.empty()) upper.assign(n, 1.0);
    if (points.empty()) points.assign(n, 11);
    if (lower.size() == 1 && n > 1) lower.assign(n, lower[0]);
    if (upper.size() == 1 && n > 1) upper.assign(n, upper[0]);
    if (points.size() == 1 && n > 1) points.assign(n, points[0]);

    errsurf::GridSpec grid{lower, upper, points};
    std::vector<std::string> names;
    for (const auto& series : req.variables) names.push_back(series.name);

    std::ofstream file;
    std::ostream& out = open_output(file, opt.output);
    errsurf::write_surface_grid(out, inf, names, grid);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"maximum-inaccuracy analysis of indirectly measured quantities"};
    app.require_subcommand(1);

    CommonOptions opt;
    std::vector<std::string> wrt;
    std::vector<double> grid_lower, grid_upper;
    std::vector<int> grid_points;

    CLI::App* analyze_cmd =
        app.add_subcommand("analyze", "full analysis of a request file");
    add_request_flags(analyze_cmd, opt);
    analyze_cmd->add_option("--format", opt.format, "text|machine")
        ->check(CLI::IsMember({"text", "machine"}));

    CLI::App* classify_cmd = app.add_subcommand(
        "classify", "classify a surface from influence coefficients, no raw observations");
    classify_cmd->add_option("input", opt.input, "coefficients file (JSON)")->required();
    classify_cmd->add_option("-o,--output", opt.output, "output path (default: stdout)");
    classify_cmd->add_option("--format", opt.format, "text|machine")
        ->check(CLI::IsMember({"text", "machine"}));
    classify_cmd->add_option("--rank-tolerance", opt.rank_tolerance,
                             "relative eigenvalue threshold for rank decisions");

    CLI::App* derive_cmd =
        app.add_subcommand("derive", "print symbolic partial derivatives of the formula");
    derive_cmd->add_option("input", opt.input, "request file (JSON)")->required();
    derive_cmd->add_option("-o,--output", opt.output, "output path (default: stdout)");
    derive_cmd->add_option("--wrt", wrt,
                           "one variable (first partial) or two (second partial); "
                           "default prints all");

    CLI::App* grid_cmd = app.add_subcommand(
        "surface-grid", "sample the total-inaccuracy surface over a box in inaccuracy space");
    add_request_flags(grid_cmd, opt);
    grid_cmd->add_option("--min", grid_lower, "lower bounds, one per variable (or one for all)")
        ->delimiter(',');
    grid_cmd->add_option("--max", grid_upper, "upper bounds, one per variable (or one for all)")
        ->delimiter(',');
    grid_cmd
        ->add_option("--resolution", grid_points,
                     "grid points per axis, one per variable (or one for all)")
        ->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        const bool tolerance_set =
            analyze_cmd->count("--rank-tolerance") > 0 || grid_cmd->count("--rank-tolerance") > 0;
        if (analyze_cmd->parsed()) return run_analyze(opt, tolerance_set);
        if (classify_cmd->parsed()) return run_classify(opt);
        if (derive_cmd->parsed()) return run_derive(opt, wrt);
        if (grid_cmd->parsed()) return run_surface_grid(opt, tolerance_set, grid_lower,
                                                        grid_upper, grid_points);
    } catch (const errsurf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.category());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
