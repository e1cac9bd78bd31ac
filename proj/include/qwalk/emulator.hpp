#pragma once

// Monte-Carlo emulation of the time-multiplexed loop experiment: photon pairs
// walk in a fibre loop, a fraction of the light is coupled out to the
// detectors each roundtrip, and lattice positions arrive as time bins.
// Coincidence post-selection on the resulting click stream reconstructs the
// conditioned distributions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qwalk/analysis.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/two_photon.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

enum class DetectorChannel : int { HPort = 0, VPort = 1 };

inline DetectorChannel channel_for(Coin c) {
    return c == Coin::H ? DetectorChannel::HPort : DetectorChannel::VPort;
}

// Loop and detection parameters. Defaults follow the hardware they emulate:
// 171.6 ns position separation, 5.3227 us roundtrip, 85:15 loop/outcoupling
// split, 80% detector efficiency with 70 ns dead time, 20% setup Klyshko
// efficiency, pair generation probability 0.1, 10 kHz repetition rate.
struct EmulatorConfig {
    double roundtrip_ns = 5322.7;
    double bin_separation_ns = 171.6;
    double outcoupling_prob = 0.15;
    double detector_efficiency = 0.80;
    double dead_time_ns = 70.0;
    double setup_klyshko = 0.20;
    double pair_generation_prob = 0.1;
    double repetition_rate_hz = 1e4;
    int max_step = 10;
    std::uint64_t runs = 0;
    std::uint64_t rng_seed = 1;
    Convention convention = Convention::Annihilation;

    double period_ns() const { return 1e9 / repetition_rate_hz; }

    void validate() const {
        auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (!prob(outcoupling_prob) || outcoupling_prob == 0.0 ||
            !prob(detector_efficiency) || !prob(setup_klyshko) ||
            !prob(pair_generation_prob))
            throw std::invalid_argument("EmulatorConfig: probabilities must be in [0,1]");
        if (roundtrip_ns <= 0.0 || bin_separation_ns <= 0.0 || dead_time_ns < 0.0 ||
            repetition_rate_hz <= 0.0)
            throw std::invalid_argument("EmulatorConfig: timings must be positive");
        if (bin_separation_ns <= dead_time_ns)
            throw std::invalid_argument(
                "EmulatorConfig: time-bin separation must exceed the dead time");
        if (max_step < 1)
            throw std::invalid_argument("EmulatorConfig: max_step must be >= 1");
        if (static_cast<double>(max_step) * roundtrip_ns > period_ns())
            throw std::invalid_argument(
                "EmulatorConfig: walk does not complete before the next run starts");
    }
};

// One synthetic detector record. The arrival time is a pure function of
// (run, step, position): run start + step roundtrips + position time bins.
struct ClickEvent {
    std::uint64_t run_id = 0;
    int step = 0;
    int position = 0;
    Coin polarization = Coin::H;
    DetectorChannel detector = DetectorChannel::HPort;
    double time_ns = 0.0;

    friend bool operator==(const ClickEvent&, const ClickEvent&) = default;
};

inline double encode_time_ns(const EmulatorConfig& cfg, std::uint64_t run_id, int step,
                             int position) {
    return static_cast<double>(run_id) * cfg.period_ns() +
           static_cast<double>(step) * cfg.roundtrip_ns +
           static_cast<double>(position) * cfg.bin_separation_ns;
}

struct TimeBin {
    std::uint64_t run_id;
    int step;
    int position;
};

// Inverts encode_time_ns for any tuple valid under the configuration (the
// position offsets span less than half a roundtrip and the walk fits in one
// repetition period).
inline std::optional<TimeBin> decode_time_ns(const EmulatorConfig& cfg, double time_ns) {
    if (time_ns < 0.0) return std::nullopt;
    const double period = cfg.period_ns();
    const std::uint64_t run = static_cast<std::uint64_t>(time_ns / period);
    const double rem = time_ns - static_cast<double>(run) * period;
    const int step = static_cast<int>(std::lround(rem / cfg.roundtrip_ns));
    if (step < 1 || step > cfg.max_step) return std::nullopt;
    const double left = rem - static_cast<double>(step) * cfg.roundtrip_ns;
    const int position = static_cast<int>(std::lround(left / cfg.bin_separation_ns));
    if (std::abs(left - position * cfg.bin_separation_ns) > 0.25 * cfg.bin_separation_ns)
        return std::nullopt;
    if (std::abs(position) > step) return std::nullopt;
    return TimeBin{run, step, position};
}

// Deterministic per-run random stream: the engine seed is derived from the
// master seed and the run index with a splitmix64 mix, so run r draws the
// same numbers no matter how runs are scheduled.
class RunRng {
  public:
    RunRng(std::uint64_t master_seed, std::uint64_t run_id)
        : engine_(mix(master_seed ^ mix(run_id + 0x632be59bd9b4e019ull))) {}

    // uniform double in [0,1) with 53 random bits
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // first success in trials 1,2,...; INT_MAX when p == 0
    int geometric(double p) {
        if (p >= 1.0) return 1;
        if (p <= 0.0) return std::numeric_limits<int>::max();
        const double u = uniform();
        const double k = std::floor(std::log1p(-u) / std::log1p(-p));
        if (k >= static_cast<double>(std::numeric_limits<int>::max() - 1))
            return std::numeric_limits<int>::max();
        return 1 + static_cast<int>(k);
    }

    // index into a cumulative weight table (last entry = total mass)
    size_t pick(const std::vector<double>& cumulative) {
        const double u = uniform() * cumulative.back();
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        return std::min(static_cast<size_t>(it - cumulative.begin()),
                        cumulative.size() - 1);
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
};

struct SimulationStats {
    std::uint64_t runs = 0;
    std::uint64_t pairs_generated = 0;
    std::uint64_t photons_outcoupled = 0;
    std::uint64_t clicks_emitted = 0;
    std::uint64_t same_bin_dead_time_drops = 0;
    std::uint64_t cross_bin_dead_time_drops = 0;
};

struct SimulationResult {
    std::vector<ClickEvent> events;  // sorted by (run_id, time_ns)
    SimulationStats stats;
};

namespace detail {

// Sampling tables shared by every run: the exact walk states per step, the
// outcoupling mode weights, and (lazily) the survivor distributions per
// (first step, first mode, second step).
class EmulatorTables {
  public:
    EmulatorTables(const EmulatorConfig& cfg, const CoinSpec& spec)
        : cfg_(cfg), spec_(spec) {
        states_.reserve(static_cast<size_t>(cfg.max_step) + 1);
        states_.push_back(initial_state());
        for (int s = 1; s <= cfg.max_step; ++s)
            states_.push_back(evolve_joint(states_.back(), 1, spec));
        first_mode_.resize(static_cast<size_t>(cfg.max_step) + 1);
        for (int s = 1; s <= cfg.max_step; ++s) {
            auto weights = detection_weights(states_[static_cast<size_t>(s)],
                                             cfg.convention);
            auto& table = first_mode_[static_cast<size_t>(s)];
            double acc = 0.0;
            for (const auto& [mode, w] : weights) {
                acc += w;
                table.modes.push_back(mode);
                table.cumulative.push_back(acc);
            }
        }
    }

    const TwoPhotonState& state(int step) const {
        return states_[static_cast<size_t>(step)];
    }

    Mode sample_first_mode(int step, RunRng& rng) const {
        const auto& table = first_mode_[static_cast<size_t>(step)];
        return table.modes[rng.pick(table.cumulative)];
    }

    Mode sample_second_mode(int first_step, Mode first_mode, int second_step,
                            RunRng& rng) {
        const auto key = std::make_tuple(first_step, first_mode, second_step);
        auto it = survivor_.find(key);
        if (it == survivor_.end()) {
            ConditionedOutcome out =
                condition(state(first_step), first_mode, cfg_.convention);
            WalkerState survivor = evolve(out.survivor, second_step - first_step, spec_);
            WeightedModes table;
            double acc = 0.0;
            for (const auto& [mode, p] : mode_distribution(survivor).entries) {
                acc += p;
                table.modes.push_back(mode);
                table.cumulative.push_back(acc);
            }
            it = survivor_.emplace(key, std::move(table)).first;
        }
        return it->second.modes[rng.pick(it->second.cumulative)];
    }

  private:
    struct WeightedModes {
        std::vector<Mode> modes;
        std::vector<double> cumulative;
    };

    EmulatorConfig cfg_;
    CoinSpec spec_;
    std::vector<TwoPhotonState> states_;
    std::vector<WeightedModes> first_mode_;
    std::map<std::tuple<int, Mode, int>, WeightedModes> survivor_;
};

}  // namespace detail

// Runs the loop experiment `cfg.runs` times. Each run: a photon pair is
// generated with pair_generation_prob; each photon independently leaves the
// loop in any roundtrip with outcoupling_prob (never, if that exceeds
// max_step); the first outcoupled photon's mode is drawn from the detection
// weights of the exact two-photon state, the second from the conditioned
// survivor's distribution at its own outcoupling step. Detector efficiency
// and Klyshko losses are independent per photon; clicks on one channel
// within the dead time drop the later click. Deterministic given rng_seed.
inline SimulationResult simulate_runs(const EmulatorConfig& cfg, const CoinSpec& spec = {}) {
    cfg.validate();
    detail::EmulatorTables tables(cfg, spec);
    SimulationResult result;
    result.stats.runs = cfg.runs;

    std::vector<ClickEvent> run_clicks;
    for (std::uint64_t run = 0; run < cfg.runs; ++run) {
        RunRng rng(cfg.rng_seed, run);
        if (!rng.bernoulli(cfg.pair_generation_prob)) continue;
        result.stats.pairs_generated += 1;

        const int k1 = rng.geometric(cfg.outcoupling_prob);
        const int k2 = rng.geometric(cfg.outcoupling_prob);
        const int s_first = std::min(k1, k2);
        const int s_second = std::max(k1, k2);
        if (s_first > cfg.max_step) continue;  // neither photon ever left the loop

        run_clicks.clear();
        const Mode m1 = tables.sample_first_mode(s_first, rng);
        result.stats.photons_outcoupled += 1;
        run_clicks.push_back(ClickEvent{run, s_first, m1.x, m1.c, channel_for(m1.c),
                                        encode_time_ns(cfg, run, s_first, m1.x)});
        if (s_second <= cfg.max_step) {
            const Mode m2 = tables.sample_second_mode(s_first, m1, s_second, rng);
            result.stats.photons_outcoupled += 1;
            run_clicks.push_back(ClickEvent{run, s_second, m2.x, m2.c, channel_for(m2.c),
                                            encode_time_ns(cfg, run, s_second, m2.x)});
        }

        // detection losses, independent per photon
        std::vector<ClickEvent> surviving;
        for (const ClickEvent& click : run_clicks) {
            const bool detected = rng.bernoulli(cfg.detector_efficiency);
            const bool through_setup = rng.bernoulli(cfg.setup_klyshko);
            if (detected && through_setup) surviving.push_back(click);
        }

        std::stable_sort(surviving.begin(), surviving.end(),
                         [](const ClickEvent& a, const ClickEvent& b) {
                             if (a.time_ns != b.time_ns) return a.time_ns < b.time_ns;
                             return a.detector < b.detector;
                         });

        // dead time per channel
        double last_time[2] = {-std::numeric_limits<double>::infinity(),
                               -std::numeric_limits<double>::infinity()};
        ClickEvent last_click[2];
        for (const ClickEvent& click : surviving) {
            const int ch = static_cast<int>(click.detector);
            if (click.time_ns - last_time[ch] < cfg.dead_time_ns) {
                const bool same_bin = click.step == last_click[ch].step &&
                                      click.position == last_click[ch].position;
                if (same_bin)
                    result.stats.same_bin_dead_time_drops += 1;
                else
                    result.stats.cross_bin_dead_time_drops += 1;
                continue;
            }
            last_time[ch] = click.time_ns;
            last_click[ch] = click;
            result.events.push_back(click);
            result.stats.clicks_emitted += 1;
        }
    }
    return result;
}

struct ReconstructionResult {
    ModeDistribution distribution;   // normalised histogram of the later click
    std::map<Mode, std::uint64_t> counts;  // raw coincidence counts per mode
    std::uint64_t total_coincidences = 0;
};

// Post-selects runs with exactly two clicks whose earlier click sits in
// (loss_step, loss_mode) and whose later click arrives at out_step, and
// histograms the later click's mode. Events must be ordered by run (as
// produced by simulate_runs).
inline ReconstructionResult reconstruct_conditioned(const std::vector<ClickEvent>& events,
                                                    int loss_step, Mode loss_mode,
                                                    int out_step) {
    ReconstructionResult result;
    result.distribution.step = out_step;
    std::uint64_t runs_with_two = 0;
    std::uint64_t loss_matches = 0;

    size_t i = 0;
    while (i < events.size()) {
        size_t j = i;
        while (j < events.size() && events[j].run_id == events[i].run_id) ++j;
        if (j - i == 2) {
            runs_with_two += 1;
            const ClickEvent* first = &events[i];
            const ClickEvent* second = &events[i + 1];
            if (second->time_ns < first->time_ns) std::swap(first, second);
            // the loss photon must leave in a strictly earlier step; same-step
            // double extractions are not conditioning events
            if (first->step < second->step && first->step == loss_step &&
                first->position == loss_mode.x && first->polarization == loss_mode.c) {
                loss_matches += 1;
                if (second->step == out_step) {
                    result.counts[Mode{second->position, second->polarization}] += 1;
                    result.total_coincidences += 1;
                }
            }
        }
        i = j;
    }
    if (result.total_coincidences == 0) {
        std::ostringstream msg;
        msg << "reconstruct_conditioned: no coincidences for loss (" << loss_step << ", "
            << to_string(loss_mode) << ") and output step " << out_step << " ("
            << events.size() << " clicks, " << runs_with_two << " two-click runs, "
            << loss_matches << " loss-mode matches)";
        throw EmptySelection(msg.str());
    }
    for (const auto& [mode, n] : result.counts)
        result.distribution.entries[mode] =
            static_cast<double>(n) / static_cast<double>(result.total_coincidences);
    return result;
}

// Expected coincidences per second for the labelled event "photon one leaves
// at step M, photon two at step N": generation probability, one outcoupling
// success per photon, one loop-survival factor per completed roundtrip, and
// the detection efficiencies of both photons. Counting both photon labels,
// an (M, N) coincidence with M != N occurs at twice this rate.
inline double effective_rate(const EmulatorConfig& cfg, int loss_step, int out_step) {
    cfg.validate();
    auto outcouple_at = [&](int step) {
        if (step < 1 || step > cfg.max_step) return 0.0;
        return cfg.outcoupling_prob *
               std::pow(1.0 - cfg.outcoupling_prob, static_cast<double>(step - 1));
    };
    const double per_photon_detection = cfg.detector_efficiency * cfg.setup_klyshko;
    return cfg.repetition_rate_hz * cfg.pair_generation_prob * outcouple_at(loss_step) *
           outcouple_at(out_step) * per_photon_detection * per_photon_detection;
}

// ---- click stream serialisation ----

inline void write_clicks_csv(std::ostream& os, const std::vector<ClickEvent>& events) {
    os << "run_id,step,position,polarization,detector,time_ns\n";
    char buf[64];
    for (const ClickEvent& e : events) {
        std::snprintf(buf, sizeof buf, "%.17g", e.time_ns);
        os << e.run_id << ',' << e.step << ',' << e.position << ','
           << coin_char(e.polarization) << ','
           << (e.detector == DetectorChannel::HPort ? 'H' : 'V') << ',' << buf << '\n';
    }
}

inline std::vector<ClickEvent> read_clicks_csv(std::istream& is) {
    std::vector<ClickEvent> events;
    std::string line;
    if (!std::getline(is, line)) return events;
    if (line != "run_id,step,position,polarization,detector,time_ns")
        throw std::invalid_argument("click CSV: unexpected header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        ClickEvent e;
        std::getline(row, field, ',');
        e.run_id = std::stoull(field);
        std::getline(row, field, ',');
        e.step = std::stoi(field);
        std::getline(row, field, ',');
        e.position = std::stoi(field);
        std::getline(row, field, ',');
        e.polarization = field == "H" ? Coin::H : Coin::V;
        std::getline(row, field, ',');
        e.detector = field == "H" ? DetectorChannel::HPort : DetectorChannel::VPort;
        std::getline(row, field, ',');
        e.time_ns = std::stod(field);
        events.push_back(e);
    }
    return events;
}

// Compact little-endian framing per click:
// u64 run, u16 step, i16 position, u8 polarization, u8 detector, f64 time.
inline void write_clicks_binary(std::ostream& os, const std::vector<ClickEvent>& events) {
    auto put = [&os](const void* p, size_t n) {
        os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    };
    for (const ClickEvent& e : events) {
        unsigned char rec[22];
        std::uint64_t run = e.run_id;
        std::uint16_t step = static_cast<std::uint16_t>(e.step);
        std::int16_t pos = static_cast<std::int16_t>(e.position);
        std::uint8_t pol = static_cast<std::uint8_t>(e.polarization);
        std::uint8_t det = static_cast<std::uint8_t>(e.detector);
        std::uint64_t time_bits;
        std::memcpy(&time_bits, &e.time_ns, 8);
        for (int b = 0; b < 8; ++b) rec[b] = static_cast<unsigned char>(run >> (8 * b));
        rec[8] = static_cast<unsigned char>(step & 0xff);
        rec[9] = static_cast<unsigned char>(step >> 8);
        rec[10] = static_cast<unsigned char>(static_cast<std::uint16_t>(pos) & 0xff);
        rec[11] = static_cast<unsigned char>(static_cast<std::uint16_t>(pos) >> 8);
        rec[12] = pol;
        rec[13] = det;
        for (int b = 0; b < 8; ++b)
            rec[14 + b] = static_cast<unsigned char>(time_bits >> (8 * b));
        put(rec, sizeof rec);
    }
}

inline std::vector<ClickEvent> read_clicks_binary(std::istream& is) {
    std::vector<ClickEvent> events;
    unsigned char rec[22];
    while (is.read(reinterpret_cast<char*>(rec), sizeof rec)) {
        ClickEvent e;
        std::uint64_t run = 0, time_bits = 0;
        for (int b = 0; b < 8; ++b) run |= static_cast<std::uint64_t>(rec[b]) << (8 * b);
        const std::uint16_t step =
            static_cast<std::uint16_t>(rec[8] | (static_cast<unsigned>(rec[9]) << 8));
        const std::uint16_t upos =
            static_cast<std::uint16_t>(rec[10] | (static_cast<unsigned>(rec[11]) << 8));
        for (int b = 0; b < 8; ++b)
            time_bits |= static_cast<std::uint64_t>(rec[14 + b]) << (8 * b);
        e.run_id = run;
        e.step = step;
        e.position = static_cast<std::int16_t>(upos);
        e.polarization = static_cast<Coin>(rec[12]);
        e.detector = static_cast<DetectorChannel>(rec[13]);
        std::memcpy(&e.time_ns, &time_bits, 8);
        events.push_back(e);
    }
    return events;
}

}  // namespace qwalk
