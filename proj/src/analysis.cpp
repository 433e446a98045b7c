#include "errsurf/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "errsurf/error.hpp"

namespace errsurf {

const char* to_string(Mode m) { return m == Mode::absolute ? "absolute" : "relative"; }

const char* to_string(InaccuracyEstimator e) {
    return e == InaccuracyEstimator::max_deviation ? "max_deviation" : "mean_abs_deviation";
}

const char* to_string(EvalPointPolicy p) {
    return p == EvalPointPolicy::joint_indexed ? "joint_indexed" : "mean_anchored";
}

Mode mode_from_string(const std::string& s) {
    if (s == "absolute") return Mode::absolute;
    if (s == "relative") return Mode::relative;
    throw SchemaError("mode must be 'absolute' or 'relative', got '" + s + "'");
}

InaccuracyEstimator estimator_from_string(const std::string& s) {
    if (s == "mean_abs_deviation") return InaccuracyEstimator::mean_abs_deviation;
    if (s == "max_deviation") return InaccuracyEstimator::max_deviation;
    throw SchemaError("estimator must be 'mean_abs_deviation' or 'max_deviation', got '" + s +
                      "'");
}

EvalPointPolicy policy_from_string(const std::string& s) {
    if (s == "mean_anchored") return EvalPointPolicy::mean_anchored;
    if (s == "joint_indexed") return EvalPointPolicy::joint_indexed;
    throw SchemaError("evaluation_point must be 'mean_anchored' or 'joint_indexed', got '" + s +
                      "'");
}

namespace {

std::string fmt(double v, const char* spec = "%.17g") {
    char buf[40];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string fmt4(double v) { return fmt(v, "%.4g"); }

// --- delimited-text observation columns ------------------------------------

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (ch != '\r') {
            cell += ch;
        }
    }
    cells.push_back(cell);
    return cells;
}

std::string trimmed(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

/// Column-per-variable table; blank cells let columns have unequal lengths.
std::map<std::string, std::vector<double>> read_columns(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw SchemaError("cannot open observations file '" + file.string() + "'");
    std::string line;
    if (!std::getline(in, line))
        throw SchemaError("observations file '" + file.string() + "' is empty");
    std::vector<std::string> header = split_row(line);
    for (auto& h : header) h = trimmed(h);

    std::map<std::string, std::vector<double>> columns;
    for (const auto& h : header)
        if (!h.empty()) columns[h];

    while (std::getline(in, line)) {
        if (trimmed(line).empty()) continue;
        const std::vector<std::string> cells = split_row(line);
        for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) {
            const std::string cell = trimmed(cells[i]);
            if (cell.empty() || header[i].empty()) continue;
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw SchemaError("bad number '" + cell + "' in column '" + header[i] + "' of '" +
                                  file.string() + "'");
            columns[header[i]].push_back(v);
        }
    }
    return columns;
}

// --- JSON helpers -----------------------------------------------------------

const nlohmann::json& require(const nlohmann::json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) throw SchemaError(std::string("missing field '") + key + "'");
    return *it;
}

double number_field(const nlohmann::json& j, const std::string& where) {
    if (!j.is_number()) throw SchemaError("'" + where + "' must be a number");
    return j.get<double>();
}

std::string string_field(const nlohmann::json& j, const std::string& where) {
    if (!j.is_string()) throw SchemaError("'" + where + "' must be a string");
    return j.get<std::string>();
}

}  // namespace

AnalysisRequest request_from_json(const nlohmann::json& doc,
                                  const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw SchemaError("request document must be a JSON object");
    AnalysisRequest req;
    req.formula_text = string_field(require(doc, "formula"), "formula");

    const nlohmann::json& vars = require(doc, "variables");
    if (!vars.is_array() || vars.empty())
        throw SchemaError("'variables' must be a nonempty array");

    for (std::size_t i = 0; i < vars.size(); ++i) {
        const nlohmann::json& v = vars[i];
        const std::string where = "variables[" + std::to_string(i) + "]";
        if (!v.is_object()) throw SchemaError("'" + where + "' must be an object");
        ObservationSeries series;
        series.name = string_field(require(v, "name"), where + ".name");

        if (v.contains("observations")) {
            const nlohmann::json& obs = v["observations"];
            if (!obs.is_array() || obs.empty())
                throw SchemaError("'" + where + ".observations' must be a nonempty array");
            for (const auto& x : obs)
                series.values.push_back(number_field(x, where + ".observations"));
        } else if (v.contains("observations_file")) {
            const std::filesystem::path file =
                base_dir / string_field(v["observations_file"], where + ".observations_file");
            const std::string column =
                v.contains("column") ? string_field(v["column"], where + ".column") : series.name;
            auto columns = read_columns(file);
            auto it = columns.find(column);
            if (it == columns.end() || it->second.empty())
                throw SchemaError("column '" + column + "' not found or empty in '" +
                                  file.string() + "'");
            series.values = it->second;
        } else {
            throw SchemaError("'" + where + "' needs 'observations' or 'observations_file'");
        }
        req.variables.push_back(std::move(series));
    }

    if (doc.contains("constants")) {
        const nlohmann::json& consts = doc["constants"];
        if (!consts.is_object()) throw SchemaError("'constants' must be an object");
        for (auto it = consts.begin(); it != consts.end(); ++it)
            req.constants[it.key()] = number_field(it.value(), "constants." + it.key());
    }

    req.mode = doc.contains("mode") ? mode_from_string(string_field(doc["mode"], "mode"))
                                    : Mode::relative;

    if (doc.contains("options")) {
        const nlohmann::json& opt = doc["options"];
        if (!opt.is_object()) throw SchemaError("'options' must be an object");
        if (opt.contains("rank_tolerance")) {
            req.options.rank_tolerance =
                number_field(opt["rank_tolerance"], "options.rank_tolerance");
            if (!(req.options.rank_tolerance > 0.0))
                throw SchemaError("'options.rank_tolerance' must be positive");
        }
        if (opt.contains("estimator"))
            req.options.estimator =
                estimator_from_string(string_field(opt["estimator"], "options.estimator"));
        if (opt.contains("evaluation_point"))
            req.options.policy = policy_from_string(
                string_field(opt["evaluation_point"], "options.evaluation_point"));
    }
    return req;
}

AnalysisRequest load_request(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw SchemaError("cannot open request file '" + file.string() + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("request file '" + file.string() + "' is not valid JSON: " + e.what());
    }
    return request_from_json(doc, file.parent_path());
}

Experiment AnalysisRequest::to_experiment() const {
    SymbolTable symbols;
    for (const auto& series : variables) symbols.variables.push_back(series.name);
    for (const auto& [name, value] : constants) symbols.constants.push_back(name);

    Experiment exp;
    exp.formula = parse(formula_text, symbols);
    exp.variables = variables;
    exp.constants = constants;
    exp.mode = mode;
    exp.policy = options.policy;
    return exp;
}

AnalysisResult analyze(const AnalysisRequest& request) {
    AnalysisResult res;
    res.request = request;

    Experiment exp = request.to_experiment();
    exp.validate();
    const double tol = request.options.rank_tolerance;

    for (const auto& series : exp.variables) res.sample_means.push_back(sample_mean(series));

    res.influence = influence_set(exp);
    const InaccuracyPoint mean = mean_inaccuracy_point(exp, request.options.estimator);
    res.representative_inaccuracies = mean.magnitudes;

    res.delta1 = delta_first(res.influence, mean);
    res.delta2 = delta_second(res.influence, mean);
    res.delta_total_at_mean = delta_total(res.influence, mean);

    res.quadric = build_quadric(res.influence);
    res.block_eigen = eigen_symmetric(res.quadric.a.leading_block(res.quadric.n), tol);
    res.kind = classify(res.quadric, tol);
    if (res.kind.cls != SurfaceClass::hyperplane && res.kind.cls != SurfaceClass::line)
        res.canonical = canonicalize(res.quadric, tol);

    res.accuracy = accuracy_report(res.influence, mean);

    if (res.influence.all_zero())
        res.warnings.push_back(
            "all influence coefficients are zero; the surface degenerates to the sample "
            "hyperplane");
    double max_abs = 0.0;
    for (double lam : res.block_eigen.values) max_abs = std::max(max_abs, std::abs(lam));
    const double cut = tol * std::max(1.0, max_abs);
    for (double lam : res.block_eigen.values)
        if (lam != 0.0 && std::abs(lam) <= cut)
            res.warnings.push_back("eigenvalue " + fmt(lam, "%.3g") +
                                   " treated as zero under rank tolerance " + fmt(tol, "%.1g"));

    res.notes.push_back(std::string("representative inaccuracy estimator: ") +
                        to_string(request.options.estimator));
    res.notes.push_back(std::string("derivative evaluation points: ") +
                        to_string(request.options.policy));
    res.notes.push_back(
        "gradient taken at the mean inaccuracy point; for a quadratic surface this equals the "
        "mean of the per-observation gradients");
    res.notes.push_back(
        "surface kind and classification are invariant under positive rescaling of the "
        "equation");
    return res;
}

namespace {

nlohmann::json kind_to_json(const SurfaceKind& kind) {
    const char* name = "";
    switch (kind.cls) {
        case SurfaceClass::hyperplane: name = "hyperplane"; break;
        case SurfaceClass::line: name = "line"; break;
        case SurfaceClass::parabola: name = "parabola"; break;
        case SurfaceClass::elliptic_paraboloid: name = "elliptic paraboloid"; break;
        case SurfaceClass::hyperbolic_paraboloid: name = "hyperbolic paraboloid"; break;
        case SurfaceClass::parabolic_cylinder: name = "parabolic cylinder"; break;
    }
    return {{"kind", name}, {"type", kind.detail}};
}

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json canonical_to_json(const CanonicalForm& form) {
    return {{"rank", form.rank},
            {"parameters", form.parameters},
            {"signs", form.signs},
            {"linear_axis", form.linear_axis + 1},  // 1-based, matching the equation text
            {"rotation", matrix_to_json(form.rotation)},
            {"translation", form.translation},
            {"rotated_linear", form.rotated_linear},
            {"residual_constant", form.residual_constant},
            {"equation", form.equation}};
}

nlohmann::json quadric_to_json(const QuadricModel& q) {
    return {{"n", q.n},
            {"mode", to_string(q.mode)},
            {"matrix", matrix_to_json(q.a.dense())},
            {"linear", q.b}};
}

nlohmann::json influence_to_json(const InfluenceSet& inf,
                                 const std::vector<std::string>& names) {
    nlohmann::json first = nlohmann::json::object();
    for (int i = 0; i < inf.dimension(); ++i)
        first[names[static_cast<std::size_t>(i)]] = inf.first(i);
    nlohmann::json second = nlohmann::json::array();
    for (int i = 0; i < inf.dimension(); ++i)
        for (int j = i; j < inf.dimension(); ++j)
            second.push_back({{"i", names[static_cast<std::size_t>(i)]},
                              {"j", names[static_cast<std::size_t>(j)]},
                              {"value", inf.second(i, j)}});
    return {{"first", std::move(first)}, {"second", std::move(second)}};
}

nlohmann::json request_to_json(const AnalysisRequest& req) {
    nlohmann::json vars = nlohmann::json::array();
    for (const auto& series : req.variables)
        vars.push_back({{"name", series.name}, {"observations", series.values}});
    return {{"formula", req.formula_text},
            {"mode", to_string(req.mode)},
            {"variables", std::move(vars)},
            {"constants", req.constants},
            {"options",
             {{"rank_tolerance", req.options.rank_tolerance},
              {"estimator", to_string(req.options.estimator)},
              {"evaluation_point", to_string(req.options.policy)}}}};
}

}  // namespace

nlohmann::json report_to_json(const AnalysisResult& res) {
    std::vector<std::string> names;
    for (const auto& series : res.request.variables) names.push_back(series.name);

    nlohmann::json means = nlohmann::json::object();
    nlohmann::json reps = nlohmann::json::object();
    for (std::size_t i = 0; i < names.size(); ++i) {
        means[names[i]] = res.sample_means[i];
        reps[names[i]] = res.representative_inaccuracies[i];
    }

    nlohmann::json out{
        {"request", request_to_json(res.request)},
        {"sample_means", std::move(means)},
        {"representative_inaccuracies", std::move(reps)},
        {"influence", influence_to_json(res.influence, names)},
        {"delta_at_mean",
         {{"first", res.delta1}, {"second", res.delta2}, {"total", res.delta_total_at_mean}}},
        {"quadric", quadric_to_json(res.quadric)},
        {"eigen", {{"values", res.block_eigen.values}, {"rank", res.block_eigen.rank}}},
        {"surface", kind_to_json(res.kind)},
        {"accuracy",
         {{"k_first", res.accuracy.k_first},
          {"k_second", res.accuracy.k_second},
          {"mean_point", res.accuracy.mean_point.magnitudes},
          {"gradient_at_mean", res.accuracy.gradient_at_mean},
          {"criterion_sum", res.accuracy.criterion_sum}}},
        {"warnings", res.warnings},
        {"notes", res.notes}};
    out["surface"]["canonical"] =
        res.canonical ? canonical_to_json(*res.canonical) : nlohmann::json();
    return out;
}

std::string report_to_text(const AnalysisResult& res) {
    std::ostringstream out;
    out << "formula: " << res.request.formula_text << "   [" << to_string(res.request.mode)
        << " mode]\n\n";

    out << "variable        sample mean     representative inaccuracy\n";
    for (std::size_t i = 0; i < res.request.variables.size(); ++i) {
        char line[120];
        std::snprintf(line, sizeof line, "%-15s %-15s %s\n",
                      res.request.variables[i].name.c_str(), fmt4(res.sample_means[i]).c_str(),
                      fmt4(res.representative_inaccuracies[i]).c_str());
        out << line;
    }

    out << "\ninfluence coefficients\n  first order: ";
    for (int i = 0; i < res.influence.dimension(); ++i) {
        if (i) out << ", ";
        out << "A[" << res.request.variables[static_cast<std::size_t>(i)].name
            << "] = " << fmt4(res.influence.first(i));
    }
    out << "\n  second order: ";
    bool first_pair = true;
    for (int i = 0; i < res.influence.dimension(); ++i)
        for (int j = i; j < res.influence.dimension(); ++j) {
            if (!first_pair) out << ", ";
            first_pair = false;
            out << "A[" << res.request.variables[static_cast<std::size_t>(i)].name << ","
                << res.request.variables[static_cast<std::size_t>(j)].name
                << "] = " << fmt4(res.influence.second(i, j));
        }

    out << "\n\ninaccuracy at the mean point\n";
    out << "  first degree:  " << fmt4(res.delta1) << "\n";
    out << "  second-order form: " << fmt4(res.delta2) << "\n";
    out << "  second degree: " << fmt4(res.delta_total_at_mean) << "\n";

    out << "\nquadric surface (n = " << res.quadric.n << ")\n";
    out << "  eigenvalues of the quadratic block:";
    for (double lam : res.block_eigen.values) out << " " << fmt4(lam);
    out << "   (rank " << res.block_eigen.rank << ")\n";
    out << "  kind: " << to_string(res.kind) << "\n";
    if (res.canonical) {
        out << "  canonical equation: " << res.canonical->equation << "\n";
        out << "  parameters:";
        for (std::size_t k = 0; k < res.canonical->parameters.size(); ++k)
            out << " p" << (k + 1) << " = " << fmt4(res.canonical->parameters[k]);
        out << "\n";
    }

    out << "\naccuracy scale (0, 1]\n";
    out << "  k_first  = " << fmt4(res.accuracy.k_first) << "\n";
    out << "  k_second = " << fmt4(res.accuracy.k_second) << "\n";
    out << "  gradient at the mean point: (";
    for (std::size_t i = 0; i < res.accuracy.gradient_at_mean.size(); ++i) {
        if (i) out << ", ";
        out << fmt4(res.accuracy.gradient_at_mean[i]);
    }
    out << ")\n  criterion sum = " << fmt4(res.accuracy.criterion_sum) << "\n";

    if (!res.warnings.empty()) {
        out << "\nwarnings\n";
        for (const auto& w : res.warnings) out << "  - " << w << "\n";
    }
    out << "\nnotes\n";
    for (const auto& n : res.notes) out << "  - " << n << "\n";
    return out.str();
}

InfluenceSet coefficients_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("coefficients document must be a JSON object");
    const int n = static_cast<int>(number_field(require(doc, "n"), "n"));
    if (n < 1) throw SchemaError("'n' must be at least 1");
    const Mode mode = doc.contains("mode")
                          ? mode_from_string(string_field(doc["mode"], "mode"))
                          : Mode::relative;
    InfluenceSet inf(n, mode);

    const nlohmann::json& first = require(doc, "first");
    if (!first.is_array() || static_cast<int>(first.size()) != n)
        throw SchemaError("'first' must be an array of length n");
    for (int i = 0; i < n; ++i) {
        const double v = number_field(first[static_cast<std::size_t>(i)], "first");
        if (v < 0.0) throw SchemaError("'first' coefficients must be nonnegative");
        inf.set_first(i, v);
    }

    const nlohmann::json& second = require(doc, "second");
    if (!second.is_array() || static_cast<int>(second.size()) != n)
        throw SchemaError("'second' must be an n x n matrix");
    for (int i = 0; i < n; ++i) {
        const nlohmann::json& row = second[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != n)
            throw SchemaError("'second' must be an n x n matrix");
        for (int j = 0; j < n; ++j) {
            const double v = number_field(row[static_cast<std::size_t>(j)], "second");
            if (v < 0.0) throw SchemaError("'second' coefficients must be nonnegative");
            if (j >= i)
                inf.set_second(i, j, v);
            else if (v != inf.second(i, j))
                throw SchemaError("'second' must be symmetric: entry (" + std::to_string(i + 1) +
                                  "," + std::to_string(j + 1) + ") mismatches its mirror");
        }
    }
    return inf;
}

InfluenceSet load_coefficients(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw SchemaError("cannot open coefficients file '" + file.string() + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("coefficients file '" + file.string() +
                          "' is not valid JSON: " + e.what());
    }
    return coefficients_from_json(doc);
}

nlohmann::json classification_to_json(const InfluenceSet& inf, double rank_tolerance) {
    const QuadricModel q = build_quadric(inf);
    const EigenDecomposition eig = eigen_symmetric(q.a.leading_block(q.n), rank_tolerance);
    const SurfaceKind kind = classify(q, rank_tolerance);

    nlohmann::json out{{"quadric", quadric_to_json(q)},
                       {"eigen", {{"values", eig.values}, {"rank", eig.rank}}},
                       {"surface", kind_to_json(kind)}};
    out["surface"]["canonical"] =
        (kind.cls != SurfaceClass::hyperplane && kind.cls != SurfaceClass::line)
            ? canonical_to_json(canonicalize(q, rank_tolerance))
            : nlohmann::json();
    return out;
}

std::string classification_to_text(const InfluenceSet& inf, double rank_tolerance) {
    const QuadricModel q = build_quadric(inf);
    const EigenDecomposition eig = eigen_symmetric(q.a.leading_block(q.n), rank_tolerance);
    const SurfaceKind kind = classify(q, rank_tolerance);

    std::ostringstream out;
    out << "quadric surface (n = " << q.n << ")\n";
    out << "  eigenvalues of the quadratic block:";
    for (double lam : eig.values) out << " " << fmt4(lam);
    out << "   (rank " << eig.rank << ")\n";
    out << "  kind: " << to_string(kind) << "\n";
    if (kind.cls != SurfaceClass::hyperplane && kind.cls != SurfaceClass::line) {
        const CanonicalForm form = canonicalize(q, rank_tolerance);
        out << "  canonical equation: " << form.equation << "\n";
        out << "  parameters:";
        for (std::size_t k = 0; k < form.parameters.size(); ++k)
            out << " p" << (k + 1) << " = " << fmt4(form.parameters[k]);
        out << "\n";
    }
    return out.str();
}

void write_surface_grid(std::ostream& out, const InfluenceSet& inf,
                        const std::vector<std::string>& names, const GridSpec& grid) {
    const int n = inf.dimension();
    const std::size_t dims = static_cast<std::size_t>(n);
    if (grid.lower.size() != dims || grid.upper.size() != dims || grid.points.size() != dims)
        throw SchemaError("grid bounds must list one entry per variable");
    if (names.size() != dims) throw SchemaError("grid needs one column name per variable");
    for (std::size_t i = 0; i < dims; ++i) {
        if (grid.points[i] < 1) throw SchemaError("grid resolution must be at least 1");
        if (!(grid.lower[i] <= grid.upper[i]) || !std::isfinite(grid.lower[i]) ||
            !std::isfinite(grid.upper[i]))
            throw SchemaError("invalid grid bounds for axis '" + names[i] + "'");
    }

    for (std::size_t i = 0; i < dims; ++i) out << names[i] << ",";
    out << "delta_total\n";

    std::vector<int> index(dims, 0);
    InaccuracyPoint p;
    p.magnitudes.resize(dims, 0.0);
    while (true) {
        for (std::size_t i = 0; i < dims; ++i) {
            const int steps = grid.points[i] - 1;
            p.magnitudes[i] =
                steps == 0 ? grid.lower[i]
                           : grid.lower[i] + (grid.upper[i] - grid.lower[i]) *
                                                 (static_cast<double>(index[i]) / steps);
        }
        for (std::size_t i = 0; i < dims; ++i) out << fmt(p.magnitudes[i]) << ",";
        out << fmt(delta_total(inf, p)) << "\n";

        std::size_t axis = dims;
        while (axis > 0) {
            --axis;
            if (++index[axis] < grid.points[axis]) break;
            index[axis] = 0;
            if (axis == 0) return;
        }
    }
}

}  // namespace errsurf
