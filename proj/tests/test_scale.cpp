#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "errsurf/error.hpp"
#include "errsurf/scale.hpp"
#include "oracles.hpp"

using namespace errsurf;

namespace {

InfluenceSet viscometer_influence() {
    InfluenceSet inf(2, Mode::relative);
    inf.set_first(0, 1.0);
    inf.set_first(1, 1.0);
    inf.set_second(0, 1, 1.0);
    inf.set_second(1, 1, 2.0);
    return inf;
}

}  // namespace

TEST_CASE("first-order accuracy coefficient") {
    CHECK(accuracy_first(viscometer_influence()) ==
          doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));

    InfluenceSet ideal(4, Mode::relative);
    CHECK(accuracy_first(ideal) == 1.0);

    InfluenceSet one(1, Mode::absolute);
    one.set_first(0, 1.0);
    CHECK(accuracy_first(one) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("gradient at the mean inaccuracy point") {
    const std::vector<double> g =
        gradient_at_mean(viscometer_influence(), InaccuracyPoint{{0.014, 0.013}});
    REQUIRE(g.size() == 3);
    // 1 + 0.013/2 and 1 + 0.014/2 + 2*0.013
    CHECK(g[0] == doctest::Approx(1.0065).epsilon(1e-12));
    CHECK(g[1] == doctest::Approx(1.033).epsilon(1e-12));
    CHECK(g[2] == -1.0);

    // purely linear surface: the gradient is the coefficient vector
    InfluenceSet lin(3, Mode::absolute);
    lin.set_first(0, 0.5);
    lin.set_first(1, 1.5);
    lin.set_first(2, 0.25);
    std::mt19937 rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        InaccuracyPoint p;
        for (int i = 0; i < 3; ++i) p.magnitudes.push_back(oracles::uniform(rng, 0.0, 2.0));
        CHECK(gradient_at_mean(lin, p) == std::vector<double>{0.5, 1.5, 0.25, -1.0});
    }

    InfluenceSet zero(2, Mode::relative);
    CHECK(gradient_at_mean(zero, InaccuracyPoint{{0.1, 0.2}}) ==
          std::vector<double>{0.0, 0.0, -1.0});

    CHECK_THROWS_AS(gradient_at_mean(lin, InaccuracyPoint{{1.0}}), SchemaError);
}

TEST_CASE("second-order accuracy coefficient") {
    const std::vector<double> g{1.0065, 1.0335, -1.0};
    const double k = accuracy_second(g);
    CHECK(k == doctest::Approx(1.0 / std::sqrt(1.0065 * 1.0065 + 1.0335 * 1.0335 + 1.0))
                   .epsilon(1e-15));
    CHECK(std::round(k * 100.0) / 100.0 == 0.57);

    CHECK(accuracy_second(std::vector<double>{0.0, 0.0, 0.0, -1.0}) == 1.0);
    CHECK(accuracy_second(std::vector<double>{1.0, -1.0}) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

    CHECK_THROWS_AS(accuracy_second(std::vector<double>{1.0, 1.0}), SchemaError);
    CHECK_THROWS_AS(accuracy_second(std::vector<double>{}), SchemaError);
}

TEST_CASE("report is internally consistent") {
    const AccuracyReport rep =
        accuracy_report(viscometer_influence(), InaccuracyPoint{{0.014, 0.013}});
    CHECK(rep.k_first == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(rep.k_second == 1.0 / std::sqrt(rep.criterion_sum + 1.0));
    CHECK(rep.gradient_at_mean.back() == -1.0);
    CHECK(rep.mean_point.magnitudes == std::vector<double>{0.014, 0.013});
}

TEST_CASE("k values stay in (0, 1] and shrink when influence grows") {
    std::mt19937 rng(321);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(oracles::uniform(rng, 0.0, 5.0));
        const InfluenceSet inf = oracles::random_influence(rng, n);
        InaccuracyPoint mean;
        for (int i = 0; i < n; ++i) mean.magnitudes.push_back(oracles::uniform(rng, 0.0, 0.5));

        const AccuracyReport rep = accuracy_report(inf, mean);
        CHECK(rep.k_first > 0.0);
        CHECK(rep.k_first <= 1.0);
        CHECK(rep.k_second > 0.0);
        CHECK(rep.k_second <= 1.0);

        // enlarging one |A_i| strictly decreases k_first
        InfluenceSet bigger = inf;
        const int axis = static_cast<int>(oracles::uniform(rng, 0.0, 1.0) * n) % n;
        bigger.set_first(axis, inf.first(axis) + 1.0);
        CHECK(accuracy_first(bigger) < rep.k_first);

        // enlarging one mean gradient component strictly decreases k_second
        std::vector<double> g = rep.gradient_at_mean;
        g[static_cast<std::size_t>(axis)] = std::abs(g[static_cast<std::size_t>(axis)]) + 1.0;
        CHECK(accuracy_second(g) < rep.k_second);
    }
}

TEST_CASE("purely linear influence reduces k_second to k_first exactly") {
    std::mt19937 rng(654);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(oracles::uniform(rng, 0.0, 5.0));
        InfluenceSet inf(n, Mode::relative);
        for (int i = 0; i < n; ++i)
            if (oracles::chance(rng, 0.8)) inf.set_first(i, oracles::uniform(rng, 0.0, 3.0));

        InaccuracyPoint mean;
        for (int i = 0; i < n; ++i) mean.magnitudes.push_back(oracles::uniform(rng, 0.0, 2.0));

        const AccuracyReport rep = accuracy_report(inf, mean);
        CHECK(rep.k_second == rep.k_first);  // exact: the gradient collapses to A_i
    }
}

TEST_CASE("maximizing k_second is minimizing the criterion sum") {
    std::mt19937 rng(987);
    std::vector<AccuracyReport> family;
    for (int e = 0; e < 12; ++e) {
        const int n = 3;
        const InfluenceSet inf = oracles::random_influence(rng, n);
        InaccuracyPoint mean;
        for (int i = 0; i < n; ++i) mean.magnitudes.push_back(oracles::uniform(rng, 0.0, 0.5));
        family.push_back(accuracy_report(inf, mean));
    }
    std::size_t best_k = 0, best_c = 0;
    for (std::size_t i = 1; i < family.size(); ++i) {
        if (family[i].k_second > family[best_k].k_second) best_k = i;
        if (family[i].criterion_sum < family[best_c].criterion_sum) best_c = i;
    }
    CHECK(best_k == best_c);
}
