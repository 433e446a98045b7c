#include "errsurf/scale.hpp"

#include <cmath>

#include "errsurf/error.hpp"

namespace errsurf {

double accuracy_first(const InfluenceSet& inf) {
    double sum = 0.0;
    for (int i = 0; i < inf.dimension(); ++i) sum += inf.first(i) * inf.first(i);
    return 1.0 / std::sqrt(sum + 1.0);
}

std::vector<double> gradient_at_mean(const InfluenceSet& inf, const InaccuracyPoint& mean) {
    const int n = inf.dimension();
    if (mean.dimension() != n)
        throw SchemaError("mean point dimension does not match influence set dimension");
    std::vector<double> g(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        double gi = inf.first(i) + inf.second(i, i) * mean.magnitudes[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j)
            if (j != i) gi += 0.5 * inf.second(i, j) * mean.magnitudes[static_cast<std::size_t>(j)];
        g[static_cast<std::size_t>(i)] = gi;
    }
    g[static_cast<std::size_t>(n)] = -1.0;
    return g;
}

double accuracy_second(std::span<const double> gradient) {
    if (gradient.empty() || gradient.back() != -1.0)
        throw SchemaError("surface gradient must end with component -1");
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < gradient.size(); ++i) sum += gradient[i] * gradient[i];
    return 1.0 / std::sqrt(sum + 1.0);
}

AccuracyReport accuracy_report(const InfluenceSet& inf, const InaccuracyPoint& mean) {
    AccuracyReport report;
    report.k_first = accuracy_first(inf);
    report.mean_point = mean;
    report.gradient_at_mean = gradient_at_mean(inf, mean);
    report.k_second = accuracy_second(report.gradient_at_mean);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < report.gradient_at_mean.size(); ++i)
        sum += report.gradient_at_mean[i] * report.gradient_at_mean[i];
    report.criterion_sum = sum;
    return report;
}

}  // namespace errsurf
