#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "qwalk/analysis.hpp"

using namespace qwalk;

TEST_CASE("similarity basics") {
    std::vector<double> p{0.3, 0.2, 0.5};
    CHECK(similarity(std::span<const double>(p), std::span<const double>(p)) ==
          doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> a{1.0, 0.0}, b{0.0, 1.0};
    CHECK(similarity(std::span<const double>(a), std::span<const double>(b)) == 0.0);

    std::vector<double> half{0.5, 0.5}, point{1.0, 0.0};
    CHECK(similarity(std::span<const double>(half), std::span<const double>(point)) ==
          doctest::Approx(1.0 / std::numbers::sqrt2).epsilon(1e-12));

    // scale invariance and symmetry
    std::vector<double> p2{0.6, 0.4, 1.0};
    std::vector<double> q2{0.1, 0.9, 0.2};
    std::vector<double> q2_scaled{0.05, 0.45, 0.1};
    CHECK(similarity(std::span<const double>(p2), std::span<const double>(q2)) ==
          doctest::Approx(similarity(std::span<const double>(q2), std::span<const double>(p2)))
              .epsilon(1e-12));
    CHECK(similarity(std::span<const double>(p2), std::span<const double>(q2_scaled)) ==
          doctest::Approx(similarity(std::span<const double>(p2), std::span<const double>(q2)))
              .epsilon(1e-12));
    CHECK(similarity(std::span<const double>(p2), std::span<const double>(q2)) < 1.0);

    std::vector<double> zero{0.0, 0.0};
    std::vector<double> shorter{1.0};
    CHECK_THROWS_AS(similarity(std::span<const double>(p), std::span<const double>(shorter)),
                    std::invalid_argument);
    CHECK_THROWS_AS(similarity(std::span<const double>(a), std::span<const double>(zero)),
                    std::invalid_argument);
}

TEST_CASE("similarity on distributions uses the union of keys") {
    ModeDistribution a, b;
    a.entries[{1, Coin::H}] = 0.5;
    a.entries[{-1, Coin::V}] = 0.5;
    b.entries[{1, Coin::H}] = 1.0;
    CHECK(similarity(a, b) == doctest::Approx(1.0 / std::numbers::sqrt2).epsilon(1e-12));
    b.entries.clear();
    b.entries[{3, Coin::H}] = 1.0;
    CHECK(similarity(a, b) == 0.0);
}

TEST_CASE("averaging over step-1 losses restores left-right symmetry") {
    for (int n : {3, 5, 8}) {
        ModeDistribution avg = average_conditioned({1}, n);
        // manual two-event mixture: the two step-1 losses have equal weight
        auto left = conditioned_distribution({1, {-1, Coin::V}}, n);
        auto right = conditioned_distribution({1, {1, Coin::H}}, n);
        ModeDistribution manual;
        for (const auto& [m, p] : left.distribution.entries) manual.entries[m] += 0.5 * p;
        for (const auto& [m, p] : right.distribution.entries) manual.entries[m] += 0.5 * p;
        CHECK(oracles::max_entry_diff(avg, manual) < 1e-12);

        PositionDistribution pos = sum_over_coins(avg);
        for (const auto& [x, p] : pos.entries)
            CHECK(p == doctest::Approx(pos.at(-x)).epsilon(1e-9));
        CHECK(avg.total() == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("the weight cutoff keeps only the admissible loss events") {
    // at step 4 the weights split into a strong mirror pair (~0.55 each) and
    // a weak tier (~0.12); a cutoff between the tiers leaves two events
    TwoPhotonState joint = evolve_joint(initial_state(), 4);
    auto weights = detection_weights(joint);
    REQUIRE(weights.at({-2, Coin::V}) > 0.5);
    REQUIRE(weights.at({2, Coin::H}) > 0.5);

    AveragingScheme top_tier;
    top_tier.epsilon = 0.3;
    ModeDistribution avg = average_conditioned({4}, 6, top_tier);
    auto left = conditioned_distribution({4, {-2, Coin::V}}, 6);
    auto right = conditioned_distribution({4, {2, Coin::H}}, 6);
    ModeDistribution manual;
    manual.step = 6;
    for (const auto& [m, p] : left.distribution.entries) manual.entries[m] += 0.5 * p;
    for (const auto& [m, p] : right.distribution.entries) manual.entries[m] += 0.5 * p;
    CHECK(oracles::max_entry_diff(avg, manual) < 1e-12);
}

TEST_CASE("uniform loss averaging converges to the symmetric single walker") {
    ModeDistribution avg = average_conditioned({1, 2, 3, 4, 5, 6}, 7);
    ModeDistribution ref = mode_distribution(evolve(WalkerState::symmetric_origin(), 7));
    CHECK(similarity(sum_over_coins(avg), sum_over_coins(ref)) >= 0.99);
    CHECK(avg.total() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("born-weighted averaging at a fixed step equals the marginal") {
    AveragingScheme born{AveragingScheme::Kind::BornWeighted};
    for (int m : {1, 2, 3, 4, 5, 6}) {
        ModeDistribution avg =
            average_conditioned({m}, 8, born, Convention::Annihilation);
        ModeDistribution marginal = single_photon_marginal(evolve_joint(initial_state(), 8));
        CHECK(oracles::max_entry_diff(avg, marginal) < 1e-10);
    }
}

TEST_CASE("averaging errors") {
    CHECK_THROWS_AS(average_conditioned({}, 5), std::invalid_argument);
    CHECK_THROWS_AS(average_conditioned({5}, 5), std::invalid_argument);
    AveragingScheme absurd;
    absurd.epsilon = 10.0;  // no weight can exceed this
    CHECK_THROWS_AS(average_conditioned({1}, 5, absurd), EmptySelection);
}

TEST_CASE("variance of position distributions") {
    PositionDistribution point;
    point.entries[0] = 1.0;
    CHECK(variance_1d(point) == 0.0);

    PositionDistribution two;
    two.entries[1] = 0.5;
    two.entries[-1] = 0.5;
    CHECK(variance_1d(two) == doctest::Approx(1.0).epsilon(1e-12));

    PositionDistribution walk2;
    walk2.entries[2] = 0.25;
    walk2.entries[0] = 0.5;
    walk2.entries[-2] = 0.25;
    CHECK(variance_1d(walk2) == doctest::Approx(2.0).epsilon(1e-12));

    // translation invariance
    PositionDistribution shifted;
    for (const auto& [x, p] : walk2.entries) shifted.entries[x + 13] = p;
    CHECK(variance_1d(shifted) == doctest::Approx(variance_1d(walk2)).epsilon(1e-12));
}

TEST_CASE("variance of the mean coordinate") {
    JointPositionDistribution point;
    point.entries[{0, 0}] = 1.0;
    CHECK(variance_2d(point) == 0.0);

    JointPositionDistribution bunched;
    bunched.entries[{1, 1}] = 0.5;
    bunched.entries[{-1, -1}] = 0.5;
    CHECK(variance_2d(bunched) == doctest::Approx(1.0).epsilon(1e-12));

    JointPositionDistribution antipodal;
    antipodal.entries[{1, -1}] = 1.0;
    CHECK(variance_2d(antipodal) == 0.0);

    JointPositionDistribution shifted;
    shifted.entries[{4, 4}] = 0.5;
    shifted.entries[{2, 2}] = 0.5;
    JointPositionDistribution base;
    base.entries[{1, 1}] = 0.5;
    base.entries[{-1, -1}] = 0.5;
    CHECK(variance_2d(shifted) == doctest::Approx(variance_2d(base)).epsilon(1e-12));
}

TEST_CASE("ballistic fit recovers exact power laws") {
    std::vector<std::pair<int, double>> quadratic, linear;
    for (int t = 1; t <= 60; ++t) {
        quadratic.emplace_back(t, 0.29 * t * t);
        linear.emplace_back(t, 1.7 * t);
    }
    CHECK(ballistic_fit(quadratic, 10, 50) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(ballistic_fit(linear, 10, 50) == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<std::pair<int, double>> with_zero = quadratic;
    with_zero[19].second = 0.0;
    CHECK_THROWS_AS(ballistic_fit(with_zero, 10, 50), std::invalid_argument);
    CHECK_THROWS_AS(ballistic_fit(quadratic, 10, 80), std::invalid_argument);
}

TEST_CASE("a conditioned walk spreads ballistically") {
    TwoPhotonState joint = evolve_joint(initial_state(), 2);
    WalkerState s = condition(joint, {-2, Coin::V}, Convention::Annihilation).survivor;
    std::vector<std::pair<int, double>> series;
    for (int t = 3; t <= 50; ++t) {
        s = evolve(s, 1);
        series.emplace_back(t, variance_1d(position_distribution(s)));
    }
    CHECK(std::abs(ballistic_fit(series, 10, 50) - 2.0) <= 0.05);
}

TEST_CASE("monitored recurrence of the H-started walker") {
    RecurrenceSeries r = monitored_recurrence_single(WalkerState::basis({0, Coin::H}), 30);
    CHECK(r.at(1) == 0.0);
    CHECK(r.at(2) == doctest::Approx(0.5).epsilon(1e-12));
    for (int t = 2; t <= 30; ++t) CHECK(r.at(t) >= r.at(t - 1));
    for (int t = 1; t <= 30; ++t) {
        CHECK(r.at(t) >= 0.0);
        CHECK(r.at(t) <= 1.0);
    }
}

TEST_CASE("monitored recurrence matches the path-sum oracle") {
    for (const WalkerState& start : {WalkerState::basis({0, Coin::H}),
                                     WalkerState::symmetric_origin()}) {
        RecurrenceSeries got = monitored_recurrence_single(start, 8);
        std::vector<double> expected = oracles::recurrence_pathsum(start, 8);
        for (int t = 1; t <= 8; ++t)
            CHECK(got.at(t) == doctest::Approx(expected[static_cast<size_t>(t) - 1])
                                   .epsilon(1e-10));
    }
}

TEST_CASE("civilization recurrence is well-formed") {
    CHECK_THROWS_AS(civilization_recurrence(1), std::invalid_argument);

    RecurrenceSeries civ = civilization_recurrence(10);
    CHECK(civ.horizon == 10);
    CHECK(civ.protocol == RecurrenceProtocol::Civilization);
    CHECK(civ.at(1) == 0.0);  // no detection and no return after one step
    for (int t = 2; t <= 10; ++t) {
        CHECK(civ.at(t) >= civ.at(t - 1));
        CHECK(civ.at(t) <= 1.0);
    }
    CHECK(civ.at(10) > 0.0);

    // both projector conventions give a valid monotone series
    RecurrenceSeries annih = civilization_recurrence(8, Convention::Annihilation);
    for (int t = 2; t <= 8; ++t) CHECK(annih.at(t) >= annih.at(t - 1));
}
