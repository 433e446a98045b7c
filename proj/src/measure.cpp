#include "errsurf/measure.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "errsurf/error.hpp"

namespace errsurf {

void Experiment::validate() const {
    if (variables.empty()) throw SchemaError("experiment declares no variables");
    std::set<std::string> names;
    for (const auto& series : variables) {
        if (series.name.empty()) throw SchemaError("variable with empty name");
        if (!names.insert(series.name).second)
            throw SchemaError("duplicate variable '" + series.name + "'");
        if (series.values.empty())
            throw SchemaError("variable '" + series.name + "' has no observations");
        for (double v : series.values)
            if (!std::isfinite(v))
                throw SchemaError("variable '" + series.name + "' has a non-finite observation");
        if (constants.count(series.name))
            throw SchemaError("'" + series.name + "' is declared both variable and constant");
    }
    for (const auto& name : free_symbols(formula)) {
        if (names.count(name) || constants.count(name)) continue;
        throw SchemaError("formula symbol '" + name + "' is neither a variable nor a constant");
    }
}

InfluenceSet::InfluenceSet(int n, Mode mode)
    : n_(n),
      mode_(mode),
      first_(static_cast<std::size_t>(n), 0.0),
      second_(static_cast<std::size_t>(n) * (n + 1) / 2, 0.0) {}

std::size_t InfluenceSet::pair_index(int i, int j) const {
    if (i > j) std::swap(i, j);
    return static_cast<std::size_t>(i * n_ - i * (i - 1) / 2 + (j - i));
}

double InfluenceSet::first(int i) const { return first_[static_cast<std::size_t>(i)]; }

void InfluenceSet::set_first(int i, double value) {
    first_[static_cast<std::size_t>(i)] = value;
}

double InfluenceSet::second(int i, int j) const { return second_[pair_index(i, j)]; }

void InfluenceSet::set_second(int i, int j, double value) { second_[pair_index(i, j)] = value; }

bool InfluenceSet::all_zero() const {
    auto zero = [](double v) { return v == 0.0; };
    return std::all_of(first_.begin(), first_.end(), zero) &&
           std::all_of(second_.begin(), second_.end(), zero);
}

double sample_mean(const ObservationSeries& s) {
    if (s.values.empty()) throw MeasureError("series '" + s.name + "' is empty");
    double sum = 0.0;
    for (double v : s.values) sum += v;
    return sum / static_cast<double>(s.values.size());
}

double representative_inaccuracy(const ObservationSeries& s, Mode mode,
                                 const SpreadEstimator& spread_fn) {
    const double mean = sample_mean(s);
    double spread = spread_fn(s.values, mean);
    if (mode == Mode::relative) {
        if (mean == 0.0)
            throw MeasureError("variable '" + s.name +
                               "' has zero sample mean; relative inaccuracy undefined");
        spread /= std::abs(mean);
    }
    return spread;
}

double representative_inaccuracy(const ObservationSeries& s, Mode mode,
                                 InaccuracyEstimator estimator) {
    switch (estimator) {
        case InaccuracyEstimator::max_deviation:
            return representative_inaccuracy(
                s, mode, [](std::span<const double> xs, double mean) {
                    double dev = 0.0;
                    for (double x : xs) dev = std::max(dev, std::abs(x - mean));
                    return dev;
                });
        case InaccuracyEstimator::mean_abs_deviation: break;
    }
    return representative_inaccuracy(s, mode, [](std::span<const double> xs, double mean) {
        double dev = 0.0;
        for (double x : xs) dev += std::abs(x - mean);
        return dev / static_cast<double>(xs.size());
    });
}

namespace {

struct EvalContext {
    const Experiment& exp;
    std::vector<double> means;
    Bindings base;  // constants + all variables at their means

    explicit EvalContext(const Experiment& e) : exp(e), base(e.constants) {
        means.reserve(e.variables.size());
        for (const auto& series : e.variables) {
            const double m = sample_mean(series);
            means.push_back(m);
            base[series.name] = m;
        }
    }

    std::size_t common_length() const {
        const std::size_t k = exp.variables.front().values.size();
        for (const auto& series : exp.variables)
            if (series.values.size() != k)
                throw MeasureError(
                    "joint evaluation-point policy requires equal observation counts; '" +
                    series.name + "' differs");
        return k;
    }

    double formula_value(const Bindings& at) const {
        const double f = evaluate(exp.formula, at);
        if (exp.mode == Mode::relative && f == 0.0)
            throw MeasureError("formula evaluates to zero; relative influence undefined");
        return f;
    }
};

double mean_abs_first(const EvalContext& ctx, const Expr& df, int i) {
    const Experiment& exp = ctx.exp;
    const ObservationSeries& series = exp.variables[static_cast<std::size_t>(i)];
    double accum = 0.0;
    std::size_t count = 0;

    if (exp.policy == EvalPointPolicy::joint_indexed) {
        const std::size_t k = ctx.common_length();
        Bindings at = ctx.base;
        for (std::size_t m = 0; m < k; ++m) {
            for (const auto& s : exp.variables) at[s.name] = s.values[m];
            double term = evaluate(df, at);
            if (exp.mode == Mode::relative)
                term *= series.values[m] / ctx.formula_value(at);
            accum += std::abs(term);
            ++count;
        }
    } else {
        Bindings at = ctx.base;
        for (double x : series.values) {
            at[series.name] = x;
            double term = evaluate(df, at);
            if (exp.mode == Mode::relative) term *= x / ctx.formula_value(at);
            accum += std::abs(term);
            ++count;
        }
    }
    return accum / static_cast<double>(count);
}

double mean_abs_second(const EvalContext& ctx, const Expr& d2f, int i, int j) {
    const Experiment& exp = ctx.exp;
    const ObservationSeries& si = exp.variables[static_cast<std::size_t>(i)];
    const ObservationSeries& sj = exp.variables[static_cast<std::size_t>(j)];
    double accum = 0.0;
    std::size_t count = 0;

    if (exp.policy == EvalPointPolicy::joint_indexed) {
        const std::size_t k = ctx.common_length();
        Bindings at = ctx.base;
        for (std::size_t m = 0; m < k; ++m) {
            for (const auto& s : exp.variables) at[s.name] = s.values[m];
            double term = evaluate(d2f, at);
            if (exp.mode == Mode::relative)
                term *= si.values[m] * sj.values[m] / ctx.formula_value(at);
            accum += std::abs(term);
            ++count;
        }
    } else if (i == j) {
        Bindings at = ctx.base;
        for (double x : si.values) {
            at[si.name] = x;
            double term = evaluate(d2f, at);
            if (exp.mode == Mode::relative) term *= x * x / ctx.formula_value(at);
            accum += std::abs(term);
            ++count;
        }
    } else {
        // cross pair: average over the Cartesian product of observation indices
        Bindings at = ctx.base;
        for (double xi : si.values) {
            at[si.name] = xi;
            for (double xj : sj.values) {
                at[sj.name] = xj;
                double term = evaluate(d2f, at);
                if (exp.mode == Mode::relative)
                    term *= xi * xj / ctx.formula_value(at);
                accum += std::abs(term);
                ++count;
            }
            at[sj.name] = ctx.means[static_cast<std::size_t>(j)];
        }
    }
    return accum / static_cast<double>(count);
}

}  // namespace

double influence_first(const Experiment& exp, int i) {
    exp.validate();
    EvalContext ctx(exp);
    const Expr df = differentiate(exp.formula, exp.variables[static_cast<std::size_t>(i)].name);
    return mean_abs_first(ctx, df, i);
}

double influence_second(const Experiment& exp, int i, int j) {
    exp.validate();
    EvalContext ctx(exp);
    if (i > j) std::swap(i, j);
    const Expr d2f =
        second_partial(exp.formula, exp.variables[static_cast<std::size_t>(i)].name,
                       exp.variables[static_cast<std::size_t>(j)].name);
    return mean_abs_second(ctx, d2f, i, j);
}

InfluenceSet influence_set(const Experiment& exp) {
    exp.validate();
    EvalContext ctx(exp);
    const int n = static_cast<int>(exp.variables.size());
    InfluenceSet inf(n, exp.mode);

    std::vector<Expr> partials;
    partials.reserve(static_cast<std::size_t>(n));
    for (const auto& series : exp.variables)
        partials.push_back(differentiate(exp.formula, series.name));

    for (int i = 0; i < n; ++i)
        inf.set_first(i, mean_abs_first(ctx, partials[static_cast<std::size_t>(i)], i));

    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const Expr d2f = differentiate(partials[static_cast<std::size_t>(i)],
                                           exp.variables[static_cast<std::size_t>(j)].name);
            inf.set_second(i, j, mean_abs_second(ctx, d2f, i, j));
        }
    return inf;
}

InaccuracyPoint mean_inaccuracy_point(const Experiment& exp, InaccuracyEstimator estimator) {
    InaccuracyPoint p;
    p.magnitudes.reserve(exp.variables.size());
    for (const auto& series : exp.variables)
        p.magnitudes.push_back(representative_inaccuracy(series, exp.mode, estimator));
    return p;
}

namespace {

void check_dimensions(const InfluenceSet& inf, const InaccuracyPoint& p) {
    if (inf.dimension() != p.dimension())
        throw SchemaError("inaccuracy point dimension " + std::to_string(p.dimension()) +
                          " does not match influence set dimension " +
                          std::to_string(inf.dimension()));
}

}  // namespace

double delta_first(const InfluenceSet& inf, const InaccuracyPoint& p) {
    check_dimensions(inf, p);
    double sum = 0.0;
    for (int i = 0; i < inf.dimension(); ++i)
        sum += inf.first(i) * p.magnitudes[static_cast<std::size_t>(i)];
    return sum;
}

double delta_second(const InfluenceSet& inf, const InaccuracyPoint& p) {
    check_dimensions(inf, p);
    double sum = 0.0;
    for (int i = 0; i < inf.dimension(); ++i)
        for (int j = i; j < inf.dimension(); ++j)
            sum += inf.second(i, j) * p.magnitudes[static_cast<std::size_t>(i)] *
                   p.magnitudes[static_cast<std::size_t>(j)];
    return sum;
}

double delta_total(const InfluenceSet& inf, const InaccuracyPoint& p) {
    return delta_first(inf, p) + 0.5 * delta_second(inf, p);
}

}  // namespace errsurf
