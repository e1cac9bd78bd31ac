#pragma once

// Two-photon walk states with bosonic exchange symmetry, their joint
// evolution, and the partial projection that removes one photon in a known
// mode ("conditioning") while the other keeps walking.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "qwalk/errors.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

// How the partial projector treats a doubly occupied conditioning mode.
// Projector keeps the diagonal coefficient at 1; Annihilation uses the
// second-quantised sqrt(2). The two agree on every singly occupied mode.
enum class Convention { Projector, Annihilation };

inline const char* to_string(Convention c) {
    return c == Convention::Projector ? "projector" : "annihilation";
}

// Symmetric complex amplitude tensor over ordered mode pairs, stored densely
// on the light-cone position range. Unit Frobenius norm. A "classical"
// tensor is the plain product without symmetrisation and is kept out of the
// conditioning path.
class TwoPhotonState {
  public:
    TwoPhotonState() = delete;

    // Builds a tensor from explicit entries. Entries are added to both (m1,m2)
    // and (m2,m1) unless given on the diagonal, so the input lists each
    // unordered pair once.
    static TwoPhotonState from_pairs(
        int step, const std::vector<std::tuple<Mode, Mode, cplx>>& entries,
        bool renormalize = false) {
        if (entries.empty())
            throw std::invalid_argument("TwoPhotonState: no amplitudes");
        int lo = std::get<0>(entries.front()).x, hi = lo;
        for (const auto& [m1, m2, a] : entries) {
            lo = std::min({lo, m1.x, m2.x});
            hi = std::max({hi, m1.x, m2.x});
        }
        TwoPhotonState s(step, lo, hi - lo + 1);
        for (const auto& [m1, m2, a] : entries) {
            s.at(m1, m2) += a;
            if (!(m1 == m2)) s.at(m2, m1) += a;
        }
        const double n2 = s.norm2();
        if (n2 <= 0.0) throw std::invalid_argument("TwoPhotonState: zero norm");
        if (renormalize) {
            const double inv = 1.0 / std::sqrt(n2);
            for (cplx& a : s.amps_) a *= inv;
        } else if (std::abs(n2 - 1.0) > 1e-9) {
            throw std::invalid_argument("TwoPhotonState: tensor not normalised");
        }
        return s;
    }

    int step() const { return step_; }
    int min_x() const { return min_x_; }
    int max_x() const { return min_x_ + span_ - 1; }
    bool classical() const { return classical_; }

    // Number of single-walker modes covered by the stored grid.
    int dim() const { return 2 * span_; }

    Mode mode_at(int index) const {
        return Mode{min_x_ + index / 2, static_cast<Coin>(index % 2)};
    }

    cplx amplitude(Mode m1, Mode m2) const {
        if (!contains(m1) || !contains(m2)) return cplx{};
        return amps_[static_cast<size_t>(idx(m1)) * dim() + idx(m2)];
    }

    double norm2() const {
        double n = 0.0;
        for (const cplx& a : amps_) n += std::norm(a);
        return n;
    }

    friend TwoPhotonState symmetrize(const WalkerState& psi1, const WalkerState& psi2);
    friend TwoPhotonState classical_product(const WalkerState& psi1,
                                            const WalkerState& psi2);
    friend TwoPhotonState initial_state();
    friend TwoPhotonState evolve_joint(const TwoPhotonState& state, int n,
                                       const CoinSpec& spec);
    friend TwoPhotonState project_out_position(const TwoPhotonState& state, int x,
                                               double* removed_mass);

  private:
    TwoPhotonState(int step, int min_x, int span, bool classical = false)
        : step_(step),
          min_x_(min_x),
          span_(span),
          classical_(classical),
          amps_(static_cast<size_t>(2 * span) * static_cast<size_t>(2 * span),
                cplx{}) {}

    bool contains(Mode m) const { return m.x >= min_x() && m.x <= max_x(); }

    int idx(Mode m) const { return 2 * (m.x - min_x_) + static_cast<int>(m.c); }

    cplx& at(Mode m1, Mode m2) {
        return amps_[static_cast<size_t>(idx(m1)) * dim() + idx(m2)];
    }

    int step_;
    int min_x_;
    int span_;
    bool classical_;
    std::vector<cplx> amps_;
};

// Bosonic combination (psi1 x psi2 + psi2 x psi1), normalised by
// sqrt(2 (1 + |<psi1|psi2>|^2)). Inputs must sit at the same step.
inline TwoPhotonState symmetrize(const WalkerState& psi1, const WalkerState& psi2) {
    if (psi1.step() != psi2.step())
        throw std::invalid_argument("symmetrize: step mismatch");
    const int lo = std::min(psi1.min_x(), psi2.min_x());
    const int hi = std::max(psi1.max_x(), psi2.max_x());
    TwoPhotonState out(psi1.step(), lo, hi - lo + 1);
    const double overlap2 = std::norm(inner_product(psi1, psi2));
    const double nf = 1.0 / std::sqrt(2.0 * (1.0 + overlap2));
    const int d = out.dim();
    for (int i = 0; i < d; ++i) {
        const Mode mi = out.mode_at(i);
        const cplx a1 = psi1.amplitude(mi), a2 = psi2.amplitude(mi);
        for (int j = 0; j < d; ++j) {
            const Mode mj = out.mode_at(j);
            out.amps_[static_cast<size_t>(i) * d + j] =
                nf * (a1 * psi2.amplitude(mj) + a2 * psi1.amplitude(mj));
        }
    }
    return out;
}

// Distinguishable-particle tensor product, no symmetrisation. Flagged so it
// cannot be fed into the conditioning path by accident.
inline TwoPhotonState classical_product(const WalkerState& psi1,
                                        const WalkerState& psi2) {
    if (psi1.step() != psi2.step())
        throw std::invalid_argument("classical_product: step mismatch");
    const int lo = std::min(psi1.min_x(), psi2.min_x());
    const int hi = std::max(psi1.max_x(), psi2.max_x());
    TwoPhotonState out(psi1.step(), lo, hi - lo + 1, /*classical=*/true);
    const int d = out.dim();
    for (int i = 0; i < d; ++i) {
        const cplx a1 = psi1.amplitude(out.mode_at(i));
        for (int j = 0; j < d; ++j)
            out.amps_[static_cast<size_t>(i) * d + j] =
                a1 * psi2.amplitude(out.mode_at(j));
    }
    return out;
}

// Symmetrised projector expectation for a classical tensor: the average of
// |A[i][j]|^2 and |A[j][i]|^2 off the diagonal, |A[i][i]|^2 on it.
inline double classical_projection_prob(const TwoPhotonState& tensor, Mode i, Mode j) {
    if (i == j) return std::norm(tensor.amplitude(i, i));
    return 0.5 * (std::norm(tensor.amplitude(i, j)) + std::norm(tensor.amplitude(j, i)));
}

// Photon pair entering at the central node: (|0,H>|0,V> + |0,V>|0,H>)/sqrt(2).
inline TwoPhotonState initial_state() {
    TwoPhotonState s(0, 0, 1);
    const double r = 1.0 / std::numbers::sqrt2;
    s.at(Mode{0, Coin::H}, Mode{0, Coin::V}) = r;
    s.at(Mode{0, Coin::V}, Mode{0, Coin::H}) = r;
    return s;
}

// n steps of U x U: the coin then the conditional shift on each slot.
// Exchange symmetry and norm are preserved.
inline TwoPhotonState evolve_joint(const TwoPhotonState& state, int n,
                                   const CoinSpec& spec = {}) {
    if (n < 0) throw std::invalid_argument("evolve_joint: negative step count");
    TwoPhotonState cur = state;
    for (int k = 0; k < n; ++k) {
        const int d = cur.dim();
        const int t = cur.step_;
        // coin on slot 1 (rows), then slot 2 (columns)
        for (int p = 0; p < cur.span_; ++p) {
            const auto [cs, sn] = spec.coefficients(cur.min_x_ + p, t);
            const int ih = 2 * p, iv = 2 * p + 1;
            for (int j = 0; j < d; ++j) {
                const cplx h = cur.amps_[static_cast<size_t>(ih) * d + j];
                const cplx v = cur.amps_[static_cast<size_t>(iv) * d + j];
                cur.amps_[static_cast<size_t>(ih) * d + j] = cs * h + sn * v;
                cur.amps_[static_cast<size_t>(iv) * d + j] = sn * h - cs * v;
            }
            for (int i = 0; i < d; ++i) {
                const cplx h = cur.amps_[static_cast<size_t>(i) * d + ih];
                const cplx v = cur.amps_[static_cast<size_t>(i) * d + iv];
                cur.amps_[static_cast<size_t>(i) * d + ih] = cs * h + sn * v;
                cur.amps_[static_cast<size_t>(i) * d + iv] = sn * h - cs * v;
            }
        }
        // shift both slots onto a grid grown by one position per side
        TwoPhotonState next(t + 1, cur.min_x_ - 1, cur.span_ + 2, cur.classical_);
        const int dn = next.dim();
        auto shifted = [&](int index) {
            const Mode m = cur.mode_at(index);
            const int nx = m.c == Coin::H ? m.x + 1 : m.x - 1;
            return next.idx(Mode{nx, m.c});
        };
        for (int i = 0; i < d; ++i) {
            const int si = shifted(i);
            for (int j = 0; j < d; ++j)
                next.amps_[static_cast<size_t>(si) * dn + shifted(j)] =
                    cur.amps_[static_cast<size_t>(i) * d + j];
        }
        cur = std::move(next);
    }
    return cur;
}

// One photon removed in `mode`; the remaining (renormalised) walker plus the
// probability mass of the heralding event.
struct ConditionedOutcome {
    WalkerState survivor;
    double weight = 0.0;
};

// Applies the partial projection at `mode`. Off-diagonal contributions enter
// with sqrt(2)*A[mode][m']; the doubly occupied diagonal enters with
// coefficient 1 (Projector) or sqrt(2) (Annihilation).
inline ConditionedOutcome condition(const TwoPhotonState& state, Mode mode,
                                    Convention convention = Convention::Projector) {
    if (state.classical())
        throw std::invalid_argument("condition: classical tensor is not supported");
    const double diag_coeff =
        convention == Convention::Annihilation ? std::numbers::sqrt2 : 1.0;
    std::vector<std::pair<Mode, cplx>> terms;
    double weight = 0.0;
    for (int j = 0; j < state.dim(); ++j) {
        const Mode mj = state.mode_at(j);
        const cplx a = state.amplitude(mode, mj);
        if (a == cplx{}) continue;
        const cplx s = (mj == mode ? diag_coeff : std::numbers::sqrt2) * a;
        terms.emplace_back(mj, s);
        weight += std::norm(s);
    }
    if (weight < 1e-12)
        throw ZeroConditioningProbability("condition: no amplitude in mode " +
                                          to_string(mode) + " at step " +
                                          std::to_string(state.step()));
    const double inv = 1.0 / std::sqrt(weight);
    for (auto& [m, a] : terms) a *= inv;
    return ConditionedOutcome{WalkerState::normalized(state.step(), terms), weight};
}

// Where and how one photon is removed.
struct ConditioningSpec {
    int loss_step = 1;
    Mode mode;
    Convention convention = Convention::Projector;
};

struct ConditionedDistribution {
    ModeDistribution distribution;
    double weight = 0.0;
};

// Full conditioned run from the central-node pair: joint evolution to the
// loss step, partial projection, single-walker evolution to `final_step`,
// coin-resolved output. The weight reported is that of the loss event.
inline ConditionedDistribution conditioned_distribution(const ConditioningSpec& cond,
                                                        int final_step,
                                                        const CoinSpec& spec = {}) {
    if (cond.loss_step < 1 || cond.loss_step > final_step)
        throw std::invalid_argument("conditioned_distribution: need 1 <= M <= N");
    TwoPhotonState joint = evolve_joint(initial_state(), cond.loss_step, spec);
    ConditionedOutcome out = condition(joint, cond.mode, cond.convention);
    WalkerState survivor = evolve(out.survivor, final_step - cond.loss_step, spec);
    return ConditionedDistribution{mode_distribution(survivor), out.weight};
}

// Squared norms of the unnormalised projected state, per mode. Under the
// Annihilation convention these sum to 2 (one per photon); under the
// Projector they sum to 2 minus the doubly occupied mass.
inline std::map<Mode, double> detection_weights(
    const TwoPhotonState& state, Convention convention = Convention::Projector) {
    const double diag_coeff2 = convention == Convention::Annihilation ? 2.0 : 1.0;
    std::map<Mode, double> weights;
    for (int i = 0; i < state.dim(); ++i) {
        const Mode mi = state.mode_at(i);
        double w = 0.0;
        for (int j = 0; j < state.dim(); ++j) {
            const Mode mj = state.mode_at(j);
            const double a2 = std::norm(state.amplitude(mi, mj));
            w += (mj == mi ? diag_coeff2 : 2.0) * a2;
        }
        if (w > 0.0) weights[mi] = w;
    }
    return weights;
}

// P(x,y) summed over both coins; the (y,x) entry is set to the same double,
// so the symmetry is exact.
inline JointPositionDistribution joint_position_distribution(const TwoPhotonState& state) {
    JointPositionDistribution d;
    d.step = state.step();
    for (int x = state.min_x(); x <= state.max_x(); ++x)
        for (int y = x; y <= state.max_x(); ++y) {
            double p = 0.0;
            for (Coin c1 : {Coin::H, Coin::V})
                for (Coin c2 : {Coin::H, Coin::V})
                    p += std::norm(state.amplitude(Mode{x, c1}, Mode{y, c2}));
            if (p > 0.0) {
                d.entries[{x, y}] = p;
                if (y != x) d.entries[{y, x}] = p;
            }
        }
    return d;
}

// Single-photon statistics with the partner ignored: P(m) = sum_k |A[m][k]|^2.
inline ModeDistribution single_photon_marginal(const TwoPhotonState& state) {
    ModeDistribution d;
    d.step = state.step();
    for (int i = 0; i < state.dim(); ++i) {
        const Mode mi = state.mode_at(i);
        double p = 0.0;
        for (int j = 0; j < state.dim(); ++j)
            p += std::norm(state.amplitude(mi, state.mode_at(j)));
        if (p > 0.0) d.entries[mi] = p;
    }
    return d;
}

// Removes every component with a photon at position x and renormalises; the
// removed probability mass is reported through `removed_mass`. Used by the
// monitored (absorbing-origin) recurrence protocols.
inline TwoPhotonState project_out_position(const TwoPhotonState& state, int x,
                                           double* removed_mass = nullptr) {
    TwoPhotonState out = state;
    const int d = out.dim();
    double removed = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (out.mode_at(i).x != x && out.mode_at(j).x != x) continue;
            cplx& a = out.amps_[static_cast<size_t>(i) * d + j];
            removed += std::norm(a);
            a = cplx{};
        }
    if (removed_mass) *removed_mass = removed;
    const double n2 = out.norm2();
    if (n2 > 0.0) {
        const double inv = 1.0 / std::sqrt(n2);
        for (cplx& a : out.amps_) a *= inv;
    }
    return out;
}

}  // namespace qwalk
