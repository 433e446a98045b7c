#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "errsurf/expr.hpp"

namespace errsurf {

enum class Mode { absolute, relative };

/// Estimator for the representative inaccuracy of a series.
enum class InaccuracyEstimator { mean_abs_deviation, max_deviation };

/// Where the derivative for the m-th term of a coefficient is evaluated.
/// mean_anchored fixes the active variable(s) at their m-th observation and
/// every other variable at its sample mean; it is total for unequal series
/// lengths. joint_indexed evaluates all variables at their m-th observation
/// and requires equal lengths.
enum class EvalPointPolicy { mean_anchored, joint_indexed };

struct ObservationSeries {
    std::string name;
    std::vector<double> values;
};

struct Experiment {
    Expr formula;
    std::vector<ObservationSeries> variables;
    Bindings constants;
    Mode mode = Mode::relative;
    EvalPointPolicy policy = EvalPointPolicy::mean_anchored;

    /// Throws SchemaError/MeasureError if the invariants do not hold:
    /// distinct variable names covering the formula's non-constant symbols,
    /// nonempty finite observation series.
    void validate() const;
};

/// Nonnegative first-order (A_i) and second-order (A_ij, unordered pairs)
/// coefficients of influence.
class InfluenceSet {
public:
    InfluenceSet() = default;
    InfluenceSet(int n, Mode mode);

    int dimension() const noexcept { return n_; }
    Mode mode() const noexcept { return mode_; }

    double first(int i) const;
    void set_first(int i, double value);

    /// Unordered access: second(i, j) == second(j, i).
    double second(int i, int j) const;
    void set_second(int i, int j, double value);

    bool all_zero() const;

private:
    std::size_t pair_index(int i, int j) const;

    int n_ = 0;
    Mode mode_ = Mode::relative;
    std::vector<double> first_;
    std::vector<double> second_;  // packed i <= j
};

/// Point in inaccuracy space: |dX_i| (absolute mode) or |dX_i/X_i| (relative).
struct InaccuracyPoint {
    std::vector<double> magnitudes;

    int dimension() const noexcept { return static_cast<int>(magnitudes.size()); }
};

double sample_mean(const ObservationSeries& s);

/// Spread of a series around its mean: mean absolute deviation by default,
/// divided by |mean| in relative mode.
double representative_inaccuracy(const ObservationSeries& s, Mode mode,
                                 InaccuracyEstimator estimator =
                                     InaccuracyEstimator::mean_abs_deviation);

/// User-supplied spread estimator: maps (values, sample mean) to an
/// absolute spread; the relative-mode division by |mean| still applies.
using SpreadEstimator = std::function<double(std::span<const double>, double)>;
double representative_inaccuracy(const ObservationSeries& s, Mode mode,
                                 const SpreadEstimator& spread);

/// First-order coefficient of influence A_i (0-based index into
/// exp.variables): the per-observation mean of |df/dX_i|, scaled by |x_i/f|
/// in relative mode.
double influence_first(const Experiment& exp, int i);

/// Second-order coefficient A_ij for the unordered pair (i, j): the mean of
/// |d2f/dX_i dX_j| (scaled by |x_i x_j/f| in relative mode) over the pairing
/// scheme implied by the experiment's evaluation-point policy.
double influence_second(const Experiment& exp, int i, int j);

/// All coefficients at once (the partial derivatives are built once).
InfluenceSet influence_set(const Experiment& exp);

/// Representative inaccuracy per variable, as a point in inaccuracy space.
InaccuracyPoint mean_inaccuracy_point(const Experiment& exp,
                                      InaccuracyEstimator estimator =
                                          InaccuracyEstimator::mean_abs_deviation);

/// First degree of approximation: sum A_i p_i.
double delta_first(const InfluenceSet& inf, const InaccuracyPoint& p);

/// Second-order form: sum over unordered pairs A_ij p_i p_j.
double delta_second(const InfluenceSet& inf, const InaccuracyPoint& p);

/// Second degree of approximation: delta_first + delta_second / 2.
double delta_total(const InfluenceSet& inf, const InaccuracyPoint& p);

}  // namespace errsurf
