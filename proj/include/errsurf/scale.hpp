#pragma once

#include <span>
#include <vector>

#include "errsurf/measure.hpp"

namespace errsurf {

/// Dimensionless accuracy score of an experiment. Both coefficients live in
/// (0, 1]: 1 is the ideal perfectly accurate experiment, values near 0 an
/// arbitrarily inaccurate one.
struct AccuracyReport {
    double k_first = 1.0;
    double k_second = 1.0;
    InaccuracyPoint mean_point;
    std::vector<double> gradient_at_mean;  // length n+1, last component -1
    double criterion_sum = 0.0;            // sum of squared gradient components 1..n
};

/// First-order coefficient: cosine between the inaccuracy hyperplane normal
/// (A_1, ..., A_n, -1) and the sample-plane normal, 1/sqrt(sum A_i^2 + 1).
double accuracy_first(const InfluenceSet& inf);

/// Gradient of the second-order surface at the mean inaccuracy point:
/// component i is A_i + A_ii m_i + (1/2) sum_{j != i} A_ij m_j, last is -1.
/// For a quadratic surface this equals the mean of per-observation gradients.
std::vector<double> gradient_at_mean(const InfluenceSet& inf, const InaccuracyPoint& mean);

/// Second-order coefficient from a surface gradient whose last component is
/// -1: 1/sqrt(sum of squares of the leading components + 1).
double accuracy_second(std::span<const double> gradient);

/// Assembled report; two experiments compare by k_second exactly opposite to
/// how they compare by criterion_sum.
AccuracyReport accuracy_report(const InfluenceSet& inf, const InaccuracyPoint& mean);

}  // namespace errsurf
