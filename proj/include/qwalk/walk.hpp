#pragma once

// Single-walker discrete-time quantum walk on the 1-D lattice: basis modes,
// complex state vectors, the coin/step evolution and output distributions.

#include <algorithm>
#include <cmath>
#include <complex>
#include <compare>
#include <functional>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qwalk/errors.hpp"

namespace qwalk {

using cplx = std::complex<double>;

// Internal polarisation degree of freedom steering the shift direction.
enum class Coin : int { H = 0, V = 1 };

inline char coin_char(Coin c) { return c == Coin::H ? 'H' : 'V'; }

inline Coin coin_flip(Coin c) { return c == Coin::H ? Coin::V : Coin::H; }

// One basis label for a single walker: lattice position and coin state.
// Ordering is by position first, H before V, which fixes the row order of
// every serialised distribution.
struct Mode {
    int x = 0;
    Coin c = Coin::H;

    friend bool operator==(const Mode&, const Mode&) = default;
    friend auto operator<=>(const Mode&, const Mode&) = default;
};

// Reflection (x -> -x, H <-> V); maps the walk network onto its mirror image.
inline Mode mirrored(Mode m) { return Mode{-m.x, coin_flip(m.c)}; }

inline std::string to_string(Mode m) {
    return std::to_string(m.x) + "," + coin_char(m.c);
}

// cos/sin of an angle given in degrees, exact at the multiples of 45 the
// walks actually use (libm sin/cos at pi/4 differ in the last ulp, which
// would leave ghost amplitudes where the Hadamard coin cancels exactly).
inline std::pair<double, double> cos_sin_deg(double degrees) {
    double r = std::fmod(degrees, 360.0);
    if (r < 0.0) r += 360.0;
    if (std::fmod(r, 45.0) == 0.0) {
        constexpr double rh = std::numbers::sqrt2 / 2.0;
        const int octant = static_cast<int>(r / 45.0);
        switch (octant) {
            case 0: return {1.0, 0.0};
            case 1: return {rh, rh};
            case 2: return {0.0, 1.0};
            case 3: return {-rh, rh};
            case 4: return {-1.0, 0.0};
            case 5: return {-rh, -rh};
            case 6: return {0.0, -1.0};
            default: return {rh, -rh};
        }
    }
    const double rad = degrees * std::numbers::pi / 180.0;
    return {std::cos(rad), std::sin(rad)};
}

// Coin phase schedule in degrees, possibly position and time dependent.
// A default-constructed spec is the constant 45 degree (Hadamard) coin.
struct CoinSpec {
    std::function<double(int x, int t)> phase_deg;

    static CoinSpec constant(double degrees) {
        CoinSpec s;
        s.phase_deg = [degrees](int, int) { return degrees; };
        return s;
    }

    double degrees_at(int x, int t) const {
        return phase_deg ? phase_deg(x, t) : 45.0;
    }

    // (cos phi, sin phi) of the rotation at position x and step t
    std::pair<double, double> coefficients(int x, int t) const {
        return cos_sin_deg(degrees_at(x, t));
    }
};

// Probability table keyed by position, mode or position pair, tagged with the
// step it was taken at. Entries hold only the strictly positive outcomes.
template <class Key>
struct Distribution {
    int step = 0;
    std::map<Key, double> entries;

    double at(const Key& k) const {
        auto it = entries.find(k);
        return it == entries.end() ? 0.0 : it->second;
    }

    double total() const {
        double t = 0.0;
        for (const auto& [k, p] : entries) t += p;
        return t;
    }
};

using PositionDistribution = Distribution<int>;
using ModeDistribution = Distribution<Mode>;
using JointPositionDistribution = Distribution<std::pair<int, int>>;

// Normalised single-walker state over the light cone of its initial support.
// Amplitudes are stored densely, two coin entries per lattice position.
class WalkerState {
  public:
    // |0,H> at step 0.
    WalkerState() : step_(0), min_x_(0), amps_(2, cplx{}) { amps_[0] = 1.0; }

    // State with the given amplitudes; requires unit norm within 1e-9.
    WalkerState(int step, const std::vector<std::pair<Mode, cplx>>& terms)
        : WalkerState(step, terms, /*renormalize=*/false) {}

    static WalkerState basis(Mode m, int step = 0) {
        return WalkerState(step, {{m, cplx{1.0, 0.0}}});
    }

    // Rescales the given amplitudes to unit norm.
    static WalkerState normalized(int step,
                                  const std::vector<std::pair<Mode, cplx>>& terms) {
        return WalkerState(step, terms, /*renormalize=*/true);
    }

    // |0> x (|H> + i|V>)/sqrt(2); start of the symmetric reference walk.
    static WalkerState symmetric_origin() {
        const double r = 1.0 / std::numbers::sqrt2;
        return WalkerState(0, {{Mode{0, Coin::H}, cplx{r, 0.0}},
                               {Mode{0, Coin::V}, cplx{0.0, r}}});
    }

    int step() const { return step_; }
    int min_x() const { return min_x_; }
    int max_x() const { return min_x_ + static_cast<int>(amps_.size()) / 2 - 1; }

    cplx amplitude(Mode m) const {
        if (m.x < min_x() || m.x > max_x()) return cplx{};
        return amps_[index(m)];
    }

    double norm2() const {
        double n = 0.0;
        for (const cplx& a : amps_) n += std::norm(a);
        return n;
    }

    // Nonzero amplitudes in mode order.
    std::vector<std::pair<Mode, cplx>> support() const {
        std::vector<std::pair<Mode, cplx>> out;
        for (int x = min_x(); x <= max_x(); ++x)
            for (Coin c : {Coin::H, Coin::V}) {
                const cplx a = amps_[index(Mode{x, c})];
                if (a != cplx{}) out.emplace_back(Mode{x, c}, a);
            }
        return out;
    }

    friend cplx inner_product(const WalkerState& a, const WalkerState& b) {
        cplx out{};
        const int lo = std::max(a.min_x(), b.min_x());
        const int hi = std::min(a.max_x(), b.max_x());
        for (int x = lo; x <= hi; ++x)
            for (Coin c : {Coin::H, Coin::V}) {
                const Mode m{x, c};
                out += std::conj(a.amplitude(m)) * b.amplitude(m);
            }
        return out;
    }

    friend WalkerState apply_coin(const WalkerState& state, const CoinSpec& spec);
    friend WalkerState apply_step(const WalkerState& state);

  private:
    WalkerState(int step, const std::vector<std::pair<Mode, cplx>>& terms,
                bool renormalize)
        : step_(step) {
        if (terms.empty()) throw std::invalid_argument("WalkerState: no amplitudes");
        int lo = terms.front().first.x, hi = lo;
        for (const auto& [m, a] : terms) {
            lo = std::min(lo, m.x);
            hi = std::max(hi, m.x);
        }
        min_x_ = lo;
        amps_.assign(2 * static_cast<size_t>(hi - lo + 1), cplx{});
        for (const auto& [m, a] : terms) amps_[index(m)] += a;
        double n2 = norm2();
        if (n2 <= 0.0)
            throw std::invalid_argument("WalkerState: zero norm");
        if (renormalize) {
            const double inv = 1.0 / std::sqrt(n2);
            for (cplx& a : amps_) a *= inv;
        } else if (std::abs(n2 - 1.0) > 1e-9) {
            throw std::invalid_argument("WalkerState: amplitudes not normalised");
        }
    }

    size_t index(Mode m) const {
        return 2 * static_cast<size_t>(m.x - min_x_) + static_cast<size_t>(m.c);
    }

    int step_;
    int min_x_;
    std::vector<cplx> amps_;
};

// Coin rotation at every position: (h, v) -> (cos*h + sin*v, sin*h - cos*v).
// Norm preserving; the step counter is unchanged.
inline WalkerState apply_coin(const WalkerState& state, const CoinSpec& spec = {}) {
    WalkerState out = state;
    const int n_pos = static_cast<int>(out.amps_.size()) / 2;
    for (int i = 0; i < n_pos; ++i) {
        const int x = out.min_x_ + i;
        const auto [cs, sn] = spec.coefficients(x, out.step_);
        const cplx h = out.amps_[2 * static_cast<size_t>(i)];
        const cplx v = out.amps_[2 * static_cast<size_t>(i) + 1];
        out.amps_[2 * static_cast<size_t>(i)] = cs * h + sn * v;
        out.amps_[2 * static_cast<size_t>(i) + 1] = sn * h - cs * v;
    }
    return out;
}

// Conditional shift: H moves right, V moves left; advances the step counter.
inline WalkerState apply_step(const WalkerState& state) {
    const int n_pos = static_cast<int>(state.amps_.size()) / 2;
    WalkerState out = state;
    out.step_ = state.step_ + 1;
    out.min_x_ = state.min_x_ - 1;
    out.amps_.assign(2 * static_cast<size_t>(n_pos + 2), cplx{});
    // the new grid starts one position further left, so old slot i sits at
    // new slot i+1; H lands one slot right of that, V one slot left
    for (int i = 0; i < n_pos; ++i) {
        out.amps_[2 * static_cast<size_t>(i + 2)] = state.amps_[2 * static_cast<size_t>(i)];
        out.amps_[2 * static_cast<size_t>(i) + 1] =
            state.amps_[2 * static_cast<size_t>(i) + 1];
    }
    return out;
}

// n applications of step∘coin.
inline WalkerState evolve(const WalkerState& state, int n, const CoinSpec& spec = {}) {
    if (n < 0) throw std::invalid_argument("evolve: negative step count");
    WalkerState out = state;
    for (int i = 0; i < n; ++i) out = apply_step(apply_coin(out, spec));
    return out;
}

// P(x) = |amp(x,H)|^2 + |amp(x,V)|^2.
inline PositionDistribution position_distribution(const WalkerState& state) {
    PositionDistribution d;
    d.step = state.step();
    for (int x = state.min_x(); x <= state.max_x(); ++x) {
        const double p = std::norm(state.amplitude(Mode{x, Coin::H})) +
                         std::norm(state.amplitude(Mode{x, Coin::V}));
        if (p > 0.0) d.entries[x] = p;
    }
    return d;
}

// P(x,c) = |amp(x,c)|^2.
inline ModeDistribution mode_distribution(const WalkerState& state) {
    ModeDistribution d;
    d.step = state.step();
    for (const auto& [m, a] : state.support()) {
        const double p = std::norm(a);
        if (p > 0.0) d.entries[m] = p;
    }
    return d;
}

// Coin-summed view of a mode distribution; reproduces position_distribution
// exactly when applied to one.
inline PositionDistribution sum_over_coins(const ModeDistribution& d) {
    PositionDistribution out;
    out.step = d.step;
    for (const auto& [m, p] : d.entries) out.entries[m.x] += p;
    return out;
}

}  // namespace qwalk
