#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "errsurf/measure.hpp"
#include "errsurf/quadric.hpp"
#include "errsurf/scale.hpp"

namespace errsurf {

struct AnalysisOptions {
    double rank_tolerance = kDefaultRankTolerance;
    InaccuracyEstimator estimator = InaccuracyEstimator::mean_abs_deviation;
    EvalPointPolicy policy = EvalPointPolicy::mean_anchored;
};

/// One self-describing analysis request: formula, observation series,
/// exact constants, mode and options.
struct AnalysisRequest {
    std::string formula_text;
    std::vector<ObservationSeries> variables;
    Bindings constants;
    Mode mode = Mode::relative;
    AnalysisOptions options;

    Experiment to_experiment() const;
};

/// Everything the pipeline produces for one request.
struct AnalysisResult {
    AnalysisRequest request;
    std::vector<double> sample_means;                // per variable
    std::vector<double> representative_inaccuracies; // per variable
    InfluenceSet influence;
    double delta1 = 0.0;  // at the mean inaccuracy point
    double delta2 = 0.0;
    double delta_total_at_mean = 0.0;
    QuadricModel quadric;
    EigenDecomposition block_eigen;  // of the upper n x n quadratic block
    SurfaceKind kind;
    std::optional<CanonicalForm> canonical;  // absent for hyperplane / line
    AccuracyReport accuracy;
    std::vector<std::string> warnings;
    std::vector<std::string> notes;
};

/// Parse a request document. Observation lists are inline arrays or
/// references into a delimited-text file with one named column per variable
/// (unequal lengths via blank cells).
AnalysisRequest load_request(const std::filesystem::path& file);
AnalysisRequest request_from_json(const nlohmann::json& doc,
                                  const std::filesystem::path& base_dir);

/// Run the full pipeline. Deterministic for identical input and options.
AnalysisResult analyze(const AnalysisRequest& request);

/// Machine format: full precision, round-trips through JSON.
nlohmann::json report_to_json(const AnalysisResult& result);

/// Human format: 4 significant digits.
std::string report_to_text(const AnalysisResult& result);

/// User-supplied coefficients (no raw observations): document with fields
/// n, mode, "first" (array of A_i) and "second" (n x n symmetric matrix of
/// A_ij).
InfluenceSet load_coefficients(const std::filesystem::path& file);
InfluenceSet coefficients_from_json(const nlohmann::json& doc);

/// Classification + canonical form for a coefficient set.
nlohmann::json classification_to_json(const InfluenceSet& inf, double rank_tolerance);
std::string classification_to_text(const InfluenceSet& inf, double rank_tolerance);

struct GridSpec {
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<int> points;  // per axis, >= 1
};

/// Delimited samples of the total-inaccuracy surface over a box in
/// inaccuracy space: one row per grid node, columns p_1..p_n, delta_total.
void write_surface_grid(std::ostream& out, const InfluenceSet& inf,
                        const std::vector<std::string>& names, const GridSpec& grid);

const char* to_string(Mode m);
const char* to_string(InaccuracyEstimator e);
const char* to_string(EvalPointPolicy p);
Mode mode_from_string(const std::string& s);
InaccuracyEstimator estimator_from_string(const std::string& s);
EvalPointPolicy policy_from_string(const std::string& s);

}  // namespace errsurf
