#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qwalk/walk.hpp"

using namespace qwalk;

namespace {
const double kRoot2Inv = 1.0 / std::numbers::sqrt2;

void check_amplitude(const WalkerState& s, Mode m, cplx expected, double tol = 1e-12) {
    CHECK(std::abs(s.amplitude(m) - expected) < tol);
}
}  // namespace

TEST_CASE("coin rotation splits the basis states 50:50") {
    WalkerState h = apply_coin(WalkerState::basis({0, Coin::H}));
    check_amplitude(h, {0, Coin::H}, kRoot2Inv);
    check_amplitude(h, {0, Coin::V}, kRoot2Inv);

    WalkerState v = apply_coin(WalkerState::basis({0, Coin::V}));
    check_amplitude(v, {0, Coin::H}, kRoot2Inv);
    check_amplitude(v, {0, Coin::V}, -kRoot2Inv);

    // the 45 degree coin is its own inverse, so (|H>+|V>)/sqrt2 maps back to |H>
    WalkerState plus(0, {{{0, Coin::H}, kRoot2Inv}, {{0, Coin::V}, kRoot2Inv}});
    WalkerState back = apply_coin(plus);
    check_amplitude(back, {0, Coin::H}, 1.0);
    check_amplitude(back, {0, Coin::V}, 0.0);
}

TEST_CASE("coin keeps the step counter and the norm") {
    WalkerState s = evolve(WalkerState::basis({0, Coin::H}), 3);
    WalkerState c = apply_coin(s);
    CHECK(c.step() == 3);
    CHECK(c.norm2() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("shift moves H right and V left") {
    WalkerState plus(0, {{{0, Coin::H}, kRoot2Inv}, {{0, Coin::V}, kRoot2Inv}});
    WalkerState shifted = apply_step(plus);
    CHECK(shifted.step() == 1);
    check_amplitude(shifted, {1, Coin::H}, kRoot2Inv);
    check_amplitude(shifted, {-1, Coin::V}, kRoot2Inv);

    check_amplitude(apply_step(WalkerState::basis({5, Coin::V})), {4, Coin::V}, 1.0);
    check_amplitude(apply_step(WalkerState::basis({-3, Coin::H})), {-2, Coin::H}, 1.0);
}

TEST_CASE("evolve composes coin and shift") {
    const WalkerState start = WalkerState::basis({0, Coin::H});

    WalkerState same = evolve(start, 0);
    check_amplitude(same, {0, Coin::H}, 1.0);
    CHECK(same.step() == 0);

    WalkerState one = evolve(start, 1);
    check_amplitude(one, {1, Coin::H}, kRoot2Inv);
    check_amplitude(one, {-1, Coin::V}, kRoot2Inv);

    WalkerState two = evolve(start, 2);
    check_amplitude(two, {2, Coin::H}, 0.5);
    check_amplitude(two, {0, Coin::V}, 0.5);
    check_amplitude(two, {0, Coin::H}, 0.5);
    check_amplitude(two, {-2, Coin::V}, -0.5);
}

TEST_CASE("position distribution sums coins") {
    WalkerState one = evolve(WalkerState::basis({0, Coin::H}), 1);
    PositionDistribution p1 = position_distribution(one);
    CHECK(p1.at(1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p1.at(-1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p1.entries.size() == 2);

    PositionDistribution p2 = position_distribution(evolve(WalkerState::basis({0, Coin::H}), 2));
    CHECK(p2.at(2) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(p2.at(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p2.at(-2) == doctest::Approx(0.25).epsilon(1e-12));

    PositionDistribution point = position_distribution(WalkerState::basis({7, Coin::V}));
    CHECK(point.at(7) == doctest::Approx(1.0));
    CHECK(point.entries.size() == 1);
}

TEST_CASE("mode distribution resolves coins and coin-summing reproduces positions") {
    WalkerState one = evolve(WalkerState::basis({0, Coin::H}), 1);
    ModeDistribution m1 = mode_distribution(one);
    CHECK(m1.at({1, Coin::H}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m1.at({-1, Coin::V}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m1.entries.size() == 2);

    ModeDistribution point = mode_distribution(WalkerState::basis({0, Coin::H}));
    CHECK(point.at({0, Coin::H}) == doctest::Approx(1.0));

    WalkerState two = evolve(WalkerState::basis({0, Coin::H}), 2);
    ModeDistribution m2 = mode_distribution(two);
    for (Mode m : {Mode{2, Coin::H}, Mode{0, Coin::V}, Mode{0, Coin::H}, Mode{-2, Coin::V}})
        CHECK(m2.at(m) == doctest::Approx(0.25).epsilon(1e-12));

    // exact agreement with the coin-summed view
    PositionDistribution summed = sum_over_coins(m2);
    PositionDistribution direct = position_distribution(two);
    for (const auto& [x, p] : direct.entries) CHECK(summed.at(x) == p);
}

TEST_CASE("evolution is unitary for random states") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        WalkerState s = oracles::random_state(rng, 3);
        WalkerState e = evolve(s, 100);
        CHECK(std::abs(e.norm2() - 1.0) < 1e-12);
    }
}

TEST_CASE("support stays inside the light cone with matching parity") {
    for (Coin c : {Coin::H, Coin::V}) {
        WalkerState s = evolve(WalkerState::basis({0, c}), 15);
        for (const auto& [m, a] : s.support()) {
            CHECK(std::abs(m.x) <= 15);
            CHECK((m.x % 2 + 2) % 2 == 15 % 2);
        }
    }
}

TEST_CASE("coin is an involution on random states") {
    std::mt19937_64 rng(11);
    WalkerState s = oracles::random_state(rng, 4);
    WalkerState twice = apply_coin(apply_coin(s));
    for (const auto& [m, a] : s.support())
        CHECK(std::abs(twice.amplitude(m) - a) < 1e-12);
}

TEST_CASE("evolution agrees with the dense matrix-power oracle up to 8 steps") {
    std::mt19937_64 rng(23);
    oracles::DenseWalkOracle oracle(12);
    std::vector<WalkerState> starts = {WalkerState::basis({0, Coin::H}),
                                       WalkerState::symmetric_origin(),
                                       oracles::random_state(rng, 2)};
    for (const WalkerState& start : starts)
        for (int n = 0; n <= 8; ++n) {
            WalkerState got = evolve(start, n);
            auto expected = oracle.evolve(start, n);
            for (int x = -12; x <= 12; ++x)
                for (Coin c : {Coin::H, Coin::V}) {
                    const Mode m{x, c};
                    CHECK(std::abs(got.amplitude(m) - oracle.amplitude(expected, m)) < 1e-12);
                }
        }
}

TEST_CASE("the H-started walk leans right, the i-symmetric walk is even") {
    WalkerState leaning = evolve(WalkerState::basis({0, Coin::H}), 12);
    PositionDistribution pl = position_distribution(leaning);
    double mean = 0.0;
    for (const auto& [x, p] : pl.entries) mean += x * p;
    CHECK(mean > 0.1);

    WalkerState sym = evolve(WalkerState::symmetric_origin(), 12);
    PositionDistribution ps = position_distribution(sym);
    for (const auto& [x, p] : ps.entries)
        CHECK(std::abs(p - ps.at(-x)) < 1e-12);
}

TEST_CASE("custom coin angles drive the splitting ratio") {
    // 0 degrees: coin acts as (H->H, V->-V); the walker never branches
    WalkerState straight = evolve(WalkerState::basis({0, Coin::H}), 4, CoinSpec::constant(0.0));
    CHECK(position_distribution(straight).at(4) == doctest::Approx(1.0));

    // 90 degrees: coin swaps H and V each step; the walker oscillates
    WalkerState zigzag = evolve(WalkerState::basis({0, Coin::H}), 2, CoinSpec::constant(90.0));
    CHECK(position_distribution(zigzag).at(0) == doctest::Approx(1.0));
}

TEST_CASE("position- and time-dependent coin schedules are honoured") {
    // transmit on the right half-line, reflect-swap on the left
    CoinSpec split;
    split.phase_deg = [](int x, int) { return x < 0 ? 90.0 : 0.0; };
    WalkerState s = evolve(WalkerState::basis({0, Coin::H}), 6, split);
    CHECK(std::abs(s.norm2() - 1.0) < 1e-12);
    CHECK(position_distribution(s).at(6) == doctest::Approx(1.0));  // never turns left

    // time-dependent: Hadamard on the first step only, identity-like after
    CoinSpec first_only;
    first_only.phase_deg = [](int, int t) { return t == 0 ? 45.0 : 0.0; };
    WalkerState w = evolve(WalkerState::basis({0, Coin::H}), 3, first_only);
    PositionDistribution p = position_distribution(w);
    CHECK(p.at(3) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p.at(-3) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("constructor rejects unnormalised amplitude lists") {
    CHECK_THROWS_AS(WalkerState(0, {{{0, Coin::H}, cplx{0.5, 0.0}}}), std::invalid_argument);
    CHECK_NOTHROW(WalkerState::normalized(0, {{{0, Coin::H}, cplx{0.5, 0.0}}}));
}
