#pragma once

// Derived quantities on walk outputs: similarity of distributions, averaging
// over loss configurations, variances and ballistic-slope fits, and the
// monitored-recurrence protocols (single walker and the two-walker
// "civilization" variant).

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qwalk/errors.hpp"
#include "qwalk/two_photon.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

// Normalised overlap of two nonnegative arrays: 1 iff proportional, 0 iff
// disjoint support.
inline double similarity(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        throw std::invalid_argument("similarity: shape mismatch");
    double dot = 0.0, np = 0.0, nq = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        if (p[i] < 0.0 || q[i] < 0.0)
            throw std::invalid_argument("similarity: negative entry");
        dot += p[i] * q[i];
        np += p[i] * p[i];
        nq += q[i] * q[i];
    }
    if (np == 0.0 || nq == 0.0)
        throw std::invalid_argument("similarity: all-zero input");
    return dot / std::sqrt(np * nq);
}

// Distribution overload; the index set is the union of both key sets with
// missing entries read as zero.
template <class Key>
double similarity(const Distribution<Key>& p, const Distribution<Key>& q) {
    std::set<Key> keys;
    for (const auto& [k, v] : p.entries) keys.insert(k);
    for (const auto& [k, v] : q.entries) keys.insert(k);
    std::vector<double> vp, vq;
    vp.reserve(keys.size());
    vq.reserve(keys.size());
    for (const Key& k : keys) {
        vp.push_back(p.at(k));
        vq.push_back(q.at(k));
    }
    return similarity(std::span<const double>(vp), std::span<const double>(vq));
}

// Weighting of the loss configurations entering an average.
struct AveragingScheme {
    enum class Kind { UniformOverModes, BornWeighted };
    Kind kind = Kind::UniformOverModes;
    // Modes with conditioning weight at or below this cutoff are inadmissible
    // (their conditioned distribution is undefined).
    double epsilon = 1e-12;
};

// Mixture over all admissible loss events (M, mode) with M in `loss_steps`,
// each conditioned walk evaluated at `final_step`. UniformOverModes gives
// every admissible event the same weight; BornWeighted uses the conditioning
// weights themselves.
inline ModeDistribution average_conditioned(const std::vector<int>& loss_steps,
                                            int final_step,
                                            const AveragingScheme& scheme = {},
                                            Convention convention = Convention::Projector,
                                            const CoinSpec& spec = {}) {
    std::set<int> steps(loss_steps.begin(), loss_steps.end());
    if (steps.empty())
        throw std::invalid_argument("average_conditioned: no loss steps");
    for (int m : steps)
        if (m < 1 || m >= final_step)
            throw std::invalid_argument("average_conditioned: need 1 <= M < N");

    struct Event {
        ModeDistribution dist;
        double weight;
    };
    std::vector<Event> events;
    TwoPhotonState joint = initial_state();
    int reached = 0;
    for (int m : steps) {
        joint = evolve_joint(joint, m - reached, spec);
        reached = m;
        for (const auto& [mode, w] : detection_weights(joint, convention)) {
            if (w <= scheme.epsilon) continue;
            ConditionedOutcome out = condition(joint, mode, convention);
            WalkerState survivor = evolve(out.survivor, final_step - m, spec);
            events.push_back({mode_distribution(survivor), w});
        }
    }
    if (events.empty())
        throw EmptySelection("average_conditioned: no admissible loss modes");

    double total_weight = 0.0;
    for (const Event& e : events)
        total_weight += scheme.kind == AveragingScheme::Kind::BornWeighted ? e.weight : 1.0;
    ModeDistribution avg;
    avg.step = final_step;
    for (const Event& e : events) {
        const double a =
            (scheme.kind == AveragingScheme::Kind::BornWeighted ? e.weight : 1.0) /
            total_weight;
        for (const auto& [mode, p] : e.dist.entries) avg.entries[mode] += a * p;
    }
    return avg;
}

// Var(x) of a position distribution.
inline double variance_1d(const PositionDistribution& p) {
    double m1 = 0.0, m2 = 0.0;
    for (const auto& [x, prob] : p.entries) {
        m1 += x * prob;
        m2 += static_cast<double>(x) * x * prob;
    }
    return m2 - m1 * m1;
}

// Variance of the mean coordinate (x+y)/2 of a joint position distribution.
inline double variance_2d(const JointPositionDistribution& p) {
    double m1 = 0.0, m2 = 0.0;
    for (const auto& [xy, prob] : p.entries) {
        const double mean_coord = 0.5 * (xy.first + xy.second);
        m1 += mean_coord * prob;
        m2 += mean_coord * mean_coord * prob;
    }
    return m2 - m1 * m1;
}

// Least-squares slope of log Var against log t over the given step window.
inline double ballistic_fit(const std::vector<std::pair<int, double>>& var_series,
                            int window_lo, int window_hi) {
    if (window_lo < 1 || window_hi < window_lo)
        throw std::invalid_argument("ballistic_fit: bad window");
    std::vector<std::pair<double, double>> pts;
    int seen_lo = 0, seen_hi = 0;
    for (const auto& [t, var] : var_series) {
        if (t < window_lo || t > window_hi) continue;
        if (var <= 0.0)
            throw std::invalid_argument("ballistic_fit: nonpositive variance at step " +
                                        std::to_string(t));
        seen_lo = seen_lo == 0 ? t : std::min(seen_lo, t);
        seen_hi = std::max(seen_hi, t);
        pts.emplace_back(std::log(static_cast<double>(t)), std::log(var));
    }
    if (pts.size() < 2 || seen_lo != window_lo || seen_hi != window_hi)
        throw std::invalid_argument("ballistic_fit: window not covered by series");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(pts.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

enum class RecurrenceProtocol { SingleMonitored, Civilization };

// Cumulative return probabilities R(1..T) to the origin under repeated
// absorbing measurements there.
struct RecurrenceSeries {
    int horizon = 0;
    std::vector<double> values;  // values[t-1] = R(t)
    RecurrenceProtocol protocol = RecurrenceProtocol::SingleMonitored;

    double at(int t) const { return values.at(static_cast<size_t>(t) - 1); }
};

// Monitored recurrence of one walker: after each step the origin is measured;
// a hit absorbs the walker, a miss removes the origin amplitudes and
// renormalises. R(T) = 1 - prod_{t<=T} (1 - q_t).
inline RecurrenceSeries monitored_recurrence_single(const WalkerState& initial, int horizon,
                                                    const CoinSpec& spec = {}) {
    if (horizon < 1) throw std::invalid_argument("recurrence: horizon must be >= 1");
    RecurrenceSeries series;
    series.horizon = horizon;
    series.protocol = RecurrenceProtocol::SingleMonitored;
    WalkerState state = initial;
    double not_returned = 1.0;
    bool exhausted = false;
    for (int t = 1; t <= horizon; ++t) {
        if (exhausted) {
            series.values.push_back(1.0 - not_returned);
            continue;
        }
        state = evolve(state, 1, spec);
        const double q = std::norm(state.amplitude(Mode{0, Coin::H})) +
                         std::norm(state.amplitude(Mode{0, Coin::V}));
        not_returned *= (1.0 - q);
        series.values.push_back(1.0 - not_returned);
        // absorb the origin
        std::vector<std::pair<Mode, cplx>> rest;
        for (const auto& [m, a] : state.support())
            if (m.x != 0) rest.emplace_back(m, a);
        if (rest.empty()) {
            exhausted = true;  // everything was absorbed
            continue;
        }
        state = WalkerState::normalized(state.step(), rest);
    }
    return series;
}

// Two-walker generalisation: the pair evolves until one photon is first
// detected at the origin (monitored, absorbing), then the surviving walker is
// watched for its own visit to the origin. The detected branch at step t is
// the incoherent mixture of the conditioned survivors over the origin coin
// modes, weighted by their conditioning weights; photon bunching often leaves
// the survivor right at the origin, and that simultaneous coincidence counts
// as a visit, so the watch starts with the survivor's own origin occupancy at
// the detection step and continues as a monitored recurrence after it. The
// series reports, relative to all first detections within the horizon, the
// mass that has both been detected and revisited by step t.
inline RecurrenceSeries civilization_recurrence(int horizon,
                                                Convention convention = Convention::Projector,
                                                const CoinSpec& spec = {}) {
    if (horizon < 2) throw std::invalid_argument("civilization: horizon must be >= 2");

    struct Detection {
        int step;
        double p_first;
        // r[k] = probability the survivor has visited the origin by step + k
        std::vector<double> r;
    };
    std::vector<Detection> detections;

    TwoPhotonState joint = initial_state();
    double survival = 1.0;
    for (int t = 1; t <= horizon; ++t) {
        joint = evolve_joint(joint, 1, spec);
        double at_origin = 0.0;
        TwoPhotonState pruned = project_out_position(joint, 0, &at_origin);
        if (at_origin > 1e-15) {
            // detected branch: survivors conditioned on the origin modes
            std::map<Mode, double> weights = detection_weights(joint, convention);
            std::vector<std::pair<WalkerState, double>> mixture;
            double wsum = 0.0;
            for (Coin c : {Coin::H, Coin::V}) {
                auto it = weights.find(Mode{0, c});
                if (it == weights.end() || it->second <= 1e-12) continue;
                mixture.emplace_back(condition(joint, Mode{0, c}, convention).survivor,
                                     it->second);
                wsum += it->second;
            }
            Detection det;
            det.step = t;
            det.p_first = survival * at_origin;
            det.r.assign(static_cast<size_t>(horizon - t) + 1, 0.0);
            for (const auto& [survivor, w] : mixture) {
                const double mu = w / wsum;
                const double q0 = std::norm(survivor.amplitude(Mode{0, Coin::H})) +
                                  std::norm(survivor.amplitude(Mode{0, Coin::V}));
                for (double& r : det.r) r += mu * q0;
                if (1.0 - q0 <= 1e-15 || horizon - t < 1) continue;
                std::vector<std::pair<Mode, cplx>> away;
                for (const auto& [m, a] : survivor.support())
                    if (m.x != 0) away.emplace_back(m, a);
                if (away.empty()) continue;
                RecurrenceSeries rs = monitored_recurrence_single(
                    WalkerState::normalized(survivor.step(), away), horizon - t, spec);
                for (int k = 1; k <= horizon - t; ++k)
                    det.r[static_cast<size_t>(k)] +=
                        mu * (1.0 - q0) * rs.values[static_cast<size_t>(k) - 1];
            }
            detections.push_back(std::move(det));
            survival *= (1.0 - at_origin);
            if (survival < 1e-15) break;
            joint = pruned;
        }
    }
    if (detections.empty())
        throw EmptySelection("civilization: no origin detection possible within horizon");

    double detected_mass = 0.0;
    for (const Detection& d : detections) detected_mass += d.p_first;

    RecurrenceSeries series;
    series.horizon = horizon;
    series.protocol = RecurrenceProtocol::Civilization;
    for (int t = 1; t <= horizon; ++t) {
        double mass_returned = 0.0;
        for (const Detection& d : detections) {
            if (d.step > t) continue;
            mass_returned += d.p_first * d.r[static_cast<size_t>(t - d.step)];
        }
        series.values.push_back(mass_returned / detected_mass);
    }
    return series;
}

}  // namespace qwalk
