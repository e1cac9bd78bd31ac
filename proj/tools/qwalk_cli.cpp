// Command line front end: runs walks, conditionings, loss averages, variance
// and recurrence studies, and the loop-experiment emulation; writes result
// files plus a manifest with checksums so every invocation can be reproduced
// byte for byte. All numerics live in the library; this file only parses
// arguments and moves data.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qwalk/analysis.hpp"
#include "qwalk/emulator.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/results_io.hpp"
#include "qwalk/two_photon.hpp"
#include "qwalk/walk.hpp"

namespace {

using namespace qwalk;
using nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitEmpty = 3;
constexpr int kExitIo = 4;

Mode parse_mode(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw std::invalid_argument("mode must be 'x,H' or 'x,V': " + text);
    const int x = std::stoi(text.substr(0, comma));
    const std::string coin = text.substr(comma + 1);
    if (coin != "H" && coin != "V")
        throw std::invalid_argument("coin must be H or V: " + text);
    return Mode{x, coin == "H" ? Coin::H : Coin::V};
}

WalkerState parse_init(const std::string& text) {
    if (text == "symmetric") return WalkerState::symmetric_origin();
    return WalkerState::basis(parse_mode(text));
}

Convention parse_convention(const std::string& text) {
    if (text == "projector") return Convention::Projector;
    if (text == "annihilation") return Convention::Annihilation;
    throw std::invalid_argument("convention must be 'projector' or 'annihilation'");
}

// "1..6" or "1,3,5"
std::vector<int> parse_steps(const std::string& text) {
    std::vector<int> out;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const int lo = std::stoi(text.substr(0, dots));
        const int hi = std::stoi(text.substr(dots + 2));
        for (int s = lo; s <= hi; ++s) out.push_back(s);
        return out;
    }
    std::istringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(std::stoi(field));
    return out;
}

std::string default_output_dir() {
    const char* env = std::getenv("QWALK_OUTPUT_DIR");
    return env && *env ? env : ".";
}

std::string resolve_output(const std::string& explicit_path, const std::string& fallback) {
    if (!explicit_path.empty()) return explicit_path;
    return default_output_dir() + "/" + fallback;
}

json meta_json(const std::string& command, const json& params, std::uint64_t seed) {
    return json{{"command", command},
                {"parameters", params},
                {"rng_seed", seed},
                {"tool_version", kToolVersion}};
}

// Writes the result file and its manifest; prints one summary line.
void emit(const std::string& command, const json& params, std::uint64_t seed,
          const std::string& path, const std::string& bytes) {
    write_text_file(path, bytes);
    RunManifest manifest;
    manifest.command = command;
    manifest.parameters = params;
    manifest.rng_seed = seed;
    manifest.outputs.emplace_back(path, checksum_hex(bytes));
    write_text_file(path + ".manifest.json", manifest.to_json().dump(2) + "\n");
    std::cout << "wrote " << path << " (checksum " << checksum_hex(bytes) << ")\n";
}

std::string render_distribution(const ModeDistribution& dist, const std::string& format,
                                const json& meta) {
    if (format == "csv") {
        std::ostringstream os;
        write_distribution_csv(os, dist);
        return os.str();
    }
    json doc;
    doc["meta"] = meta;
    doc["distribution"] = distribution_to_json(dist);
    return doc.dump(2) + "\n";
}

std::string render_blocks(const std::vector<ModeDistribution>& blocks,
                          const std::string& format, const json& meta) {
    if (format == "csv") {
        std::ostringstream os;
        os << "step,x,coin,probability\n";
        for (const ModeDistribution& d : blocks)
            for (const auto& [mode, p] : d.entries)
                os << d.step << ',' << mode.x << ',' << coin_char(mode.c) << ','
                   << format_probability(p) << '\n';
        return os.str();
    }
    json doc;
    doc["meta"] = meta;
    json rows = json::array();
    for (const ModeDistribution& d : blocks)
        for (const auto& row : distribution_to_json(d)) rows.push_back(row);
    doc["distribution"] = rows;
    return doc.dump(2) + "\n";
}

std::string render_series(const std::string& key_header, const std::string& value_header,
                          const std::vector<std::pair<int, double>>& rows,
                          const std::string& format, const json& meta) {
    if (format == "csv") {
        std::ostringstream os;
        write_series_csv(os, key_header, value_header, rows);
        return os.str();
    }
    json doc;
    doc["meta"] = meta;
    json arr = json::array();
    for (const auto& [k, v] : rows) arr.push_back({{key_header, k}, {value_header, v}});
    doc["series"] = arr;
    return doc.dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"discrete-time quantum walk simulator and loop-experiment emulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    std::string format = "csv";
    std::string output;
    std::uint64_t seed = 1;
    app.add_option("--format", format, "result format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--output", output, "result file path");
    app.add_option("--seed", seed, "random seed for stochastic commands");

    // walk
    auto* walk_cmd = app.add_subcommand("walk", "single-walker evolution");
    int walk_steps = 0;
    std::string walk_init = "0,H";
    bool walk_per_step = false;
    walk_cmd->add_option("--steps", walk_steps, "number of steps")->required();
    walk_cmd->add_option("--init", walk_init, "initial mode 'x,H'/'x,V' or 'symmetric'");
    walk_cmd->add_flag("--per-step", walk_per_step, "emit one block per step");

    // condition
    auto* cond_cmd = app.add_subcommand("condition", "conditioned two-photon walk");
    int cond_loss_step = 1, cond_out_step = 2;
    std::string cond_mode, cond_convention = "projector";
    bool cond_per_step = false;
    cond_cmd->add_option("--loss-step", cond_loss_step, "step of the photon loss")->required();
    cond_cmd->add_option("--loss-mode", cond_mode, "lost photon's mode 'x,H'/'x,V'")->required();
    cond_cmd->add_option("--out-step", cond_out_step, "output step")->required();
    cond_cmd->add_option("--convention", cond_convention, "'projector' or 'annihilation'");
    cond_cmd->add_flag("--per-step", cond_per_step, "emit every step from loss to output");

    // average
    auto* avg_cmd = app.add_subcommand("average", "average over loss configurations");
    std::string avg_steps, avg_scheme = "uniform", avg_convention = "projector", avg_compare;
    int avg_out_step = 7;
    avg_cmd->add_option("--loss-steps", avg_steps, "loss steps, '1..6' or '1,3,5'")->required();
    avg_cmd->add_option("--out-step", avg_out_step, "output step")->required();
    avg_cmd->add_option("--scheme", avg_scheme, "'uniform' or 'born'")
        ->check(CLI::IsMember({"uniform", "born"}));
    avg_cmd->add_option("--convention", avg_convention, "'projector' or 'annihilation'");
    avg_cmd->add_option("--compare", avg_compare,
                        "compare against a reference ('symmetric-single')");

    // variance
    auto* var_cmd = app.add_subcommand("variance", "variance growth of a walk");
    std::string var_source = "walk", var_init = "symmetric", var_mode,
                var_convention = "projector", var_fit;
    int var_loss_step = 2, var_from = 1, var_to = 50;
    var_cmd->add_option("--source", var_source, "'walk', 'two-photon' or 'conditioned'")
        ->check(CLI::IsMember({"walk", "two-photon", "conditioned"}));
    var_cmd->add_option("--init", var_init, "walk initial state");
    var_cmd->add_option("--loss-step", var_loss_step, "loss step (conditioned source)");
    var_cmd->add_option("--loss-mode", var_mode, "loss mode (conditioned source)");
    var_cmd->add_option("--convention", var_convention, "'projector' or 'annihilation'");
    var_cmd->add_option("--from", var_from, "first step of the series");
    var_cmd->add_option("--to", var_to, "last step of the series");
    var_cmd->add_option("--fit-window", var_fit, "log-log fit window, e.g. '10..50'");

    // recurrence
    auto* rec_cmd = app.add_subcommand("recurrence", "monitored return probability");
    int rec_horizon = 10;
    std::string rec_init = "0,H";
    rec_cmd->add_option("--horizon", rec_horizon, "number of monitored steps")->required();
    rec_cmd->add_option("--init", rec_init, "initial mode or 'symmetric'");

    // civilization
    auto* civ_cmd = app.add_subcommand("civilization", "two-walker conditioned recurrence");
    int civ_horizon = 10;
    std::string civ_convention = "projector";
    civ_cmd->add_option("--horizon", civ_horizon, "number of steps")->required();
    civ_cmd->add_option("--convention", civ_convention, "'projector' or 'annihilation'");

    // emulate
    auto* emu_cmd = app.add_subcommand("emulate", "loop-experiment click stream");
    EmulatorConfig emu_cfg;
    std::uint64_t emu_runs = 100000;
    int emu_max_step = 10;
    std::string emu_format = "csv";
    emu_cmd->add_option("--runs", emu_runs, "number of experiment runs")->required();
    emu_cmd->add_option("--max-step", emu_max_step, "last observed roundtrip");
    emu_cmd->add_option("--outcoupling", emu_cfg.outcoupling_prob, "per-roundtrip outcoupling");
    emu_cmd->add_option("--pair-prob", emu_cfg.pair_generation_prob, "pair generation probability");
    emu_cmd->add_option("--efficiency", emu_cfg.detector_efficiency, "detector efficiency");
    emu_cmd->add_option("--klyshko", emu_cfg.setup_klyshko, "setup Klyshko efficiency");
    emu_cmd->add_option("--dead-time", emu_cfg.dead_time_ns, "detector dead time [ns]");
    emu_cmd->add_option("--rep-rate", emu_cfg.repetition_rate_hz, "repetition rate [Hz]");
    emu_cmd->add_option("--roundtrip", emu_cfg.roundtrip_ns, "roundtrip time [ns]");
    emu_cmd->add_option("--bin-separation", emu_cfg.bin_separation_ns, "position separation [ns]");
    emu_cmd->add_option("--stream-format", emu_format, "'csv' or 'bin'")
        ->check(CLI::IsMember({"csv", "bin"}));

    // reconstruct
    auto* rcn_cmd = app.add_subcommand("reconstruct", "coincidence post-selection");
    std::string rcn_input, rcn_mode, rcn_input_format = "csv";
    int rcn_loss_step = 1, rcn_out_step = 2;
    rcn_cmd->add_option("--input", rcn_input, "click stream file")->required();
    rcn_cmd->add_option("--input-format", rcn_input_format, "'csv' or 'bin'")
        ->check(CLI::IsMember({"csv", "bin"}));
    rcn_cmd->add_option("--loss-step", rcn_loss_step, "earlier click's step")->required();
    rcn_cmd->add_option("--loss-mode", rcn_mode, "earlier click's mode")->required();
    rcn_cmd->add_option("--out-step", rcn_out_step, "later click's step")->required();

    // similarity
    auto* sim_cmd = app.add_subcommand("similarity", "overlap of two distribution files");
    std::string sim_a, sim_b;
    sim_cmd->add_option("--a", sim_a, "first distribution CSV")->required();
    sim_cmd->add_option("--b", sim_b, "second distribution CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*walk_cmd) {
            json params{{"steps", walk_steps}, {"init", walk_init}, {"per_step", walk_per_step}};
            const json meta = meta_json("walk", params, seed);
            const std::string path =
                resolve_output(output, std::string("walk.") + (format == "csv" ? "csv" : "json"));
            std::string bytes;
            if (walk_per_step) {
                std::vector<ModeDistribution> blocks;
                WalkerState s = parse_init(walk_init);
                blocks.push_back(mode_distribution(s));
                for (int t = 1; t <= walk_steps; ++t) {
                    s = evolve(s, 1);
                    blocks.push_back(mode_distribution(s));
                }
                bytes = render_blocks(blocks, format, meta);
            } else {
                bytes = render_distribution(
                    mode_distribution(evolve(parse_init(walk_init), walk_steps)), format, meta);
            }
            emit("walk", params, seed, path, bytes);
        } else if (*cond_cmd) {
            const Mode loss = parse_mode(cond_mode);
            const Convention conv = parse_convention(cond_convention);
            json params{{"loss_step", cond_loss_step},
                        {"loss_mode", cond_mode},
                        {"out_step", cond_out_step},
                        {"convention", cond_convention},
                        {"per_step", cond_per_step}};
            const std::string path = resolve_output(
                output, std::string("condition.") + (format == "csv" ? "csv" : "json"));
            double weight = 0.0;
            std::string bytes;
            if (cond_per_step) {
                TwoPhotonState joint = evolve_joint(initial_state(), cond_loss_step);
                ConditionedOutcome out = condition(joint, loss, conv);
                weight = out.weight;
                std::vector<ModeDistribution> blocks;
                WalkerState s = out.survivor;
                blocks.push_back(mode_distribution(s));
                for (int t = cond_loss_step + 1; t <= cond_out_step; ++t) {
                    s = evolve(s, 1);
                    blocks.push_back(mode_distribution(s));
                }
                json params_w = params;
                params_w["conditioning_weight"] = weight;
                bytes = render_blocks(blocks, format, meta_json("condition", params_w, seed));
                params = params_w;
            } else {
                auto result = conditioned_distribution(
                    ConditioningSpec{cond_loss_step, loss, conv}, cond_out_step);
                weight = result.weight;
                json params_w = params;
                params_w["conditioning_weight"] = weight;
                bytes = render_distribution(result.distribution, format,
                                            meta_json("condition", params_w, seed));
                params = params_w;
            }
            std::cout << "conditioning weight " << format_probability(weight) << "\n";
            emit("condition", params, seed, path, bytes);
        } else if (*avg_cmd) {
            AveragingScheme scheme;
            scheme.kind = avg_scheme == "born" ? AveragingScheme::Kind::BornWeighted
                                               : AveragingScheme::Kind::UniformOverModes;
            const Convention conv = parse_convention(avg_convention);
            json params{{"loss_steps", avg_steps},
                        {"out_step", avg_out_step},
                        {"scheme", avg_scheme},
                        {"convention", avg_convention}};
            ModeDistribution avg =
                average_conditioned(parse_steps(avg_steps), avg_out_step, scheme, conv);
            if (!avg_compare.empty()) {
                if (avg_compare != "symmetric-single")
                    throw std::invalid_argument("unknown --compare reference: " + avg_compare);
                ModeDistribution ref =
                    mode_distribution(evolve(WalkerState::symmetric_origin(), avg_out_step));
                const double s = similarity(sum_over_coins(avg), sum_over_coins(ref));
                params["compare"] = avg_compare;
                params["similarity"] = s;
                std::cout << "similarity " << format_probability(s) << "\n";
            }
            const std::string path = resolve_output(
                output, std::string("average.") + (format == "csv" ? "csv" : "json"));
            emit("average", params, seed, path,
                 render_distribution(avg, format, meta_json("average", params, seed)));
        } else if (*var_cmd) {
            json params{{"source", var_source}, {"from", var_from}, {"to", var_to}};
            std::vector<std::pair<int, double>> series;
            if (var_source == "walk") {
                params["init"] = var_init;
                WalkerState s = parse_init(var_init);
                for (int t = 1; t <= var_to; ++t) {
                    s = evolve(s, 1);
                    if (t >= var_from) series.emplace_back(t, variance_1d(position_distribution(s)));
                }
            } else if (var_source == "two-photon") {
                TwoPhotonState s = initial_state();
                for (int t = 1; t <= var_to; ++t) {
                    s = evolve_joint(s, 1);
                    if (t >= var_from)
                        series.emplace_back(t, variance_2d(joint_position_distribution(s)));
                }
            } else {
                if (var_mode.empty())
                    throw std::invalid_argument("--loss-mode is required for --source conditioned");
                params["loss_step"] = var_loss_step;
                params["loss_mode"] = var_mode;
                params["convention"] = var_convention;
                TwoPhotonState joint = evolve_joint(initial_state(), var_loss_step);
                WalkerState s =
                    condition(joint, parse_mode(var_mode), parse_convention(var_convention))
                        .survivor;
                for (int t = var_loss_step + 1; t <= var_to; ++t) {
                    s = evolve(s, 1);
                    if (t >= var_from) series.emplace_back(t, variance_1d(position_distribution(s)));
                }
            }
            if (!var_fit.empty()) {
                const std::vector<int> window = parse_steps(var_fit);
                if (window.size() < 2) throw std::invalid_argument("--fit-window needs 'lo..hi'");
                const double slope = ballistic_fit(series, window.front(), window.back());
                params["fit_window"] = var_fit;
                params["slope"] = slope;
                std::cout << "slope " << format_probability(slope) << "\n";
            }
            const std::string path = resolve_output(
                output, std::string("variance.") + (format == "csv" ? "csv" : "json"));
            emit("variance", params, seed, path,
                 render_series("step", "variance", series, format,
                               meta_json("variance", params, seed)));
        } else if (*rec_cmd) {
            json params{{"horizon", rec_horizon}, {"init", rec_init}};
            RecurrenceSeries r = monitored_recurrence_single(parse_init(rec_init), rec_horizon);
            std::vector<std::pair<int, double>> rows;
            for (int t = 1; t <= rec_horizon; ++t) rows.emplace_back(t, r.at(t));
            const std::string path = resolve_output(
                output, std::string("recurrence.") + (format == "csv" ? "csv" : "json"));
            emit("recurrence", params, seed, path,
                 render_series("T", "R", rows, format, meta_json("recurrence", params, seed)));
        } else if (*civ_cmd) {
            json params{{"horizon", civ_horizon}, {"convention", civ_convention}};
            RecurrenceSeries r =
                civilization_recurrence(civ_horizon, parse_convention(civ_convention));
            std::vector<std::pair<int, double>> rows;
            for (int t = 1; t <= civ_horizon; ++t) rows.emplace_back(t, r.at(t));
            const std::string path = resolve_output(
                output, std::string("civilization.") + (format == "csv" ? "csv" : "json"));
            emit("civilization", params, seed, path,
                 render_series("T", "R", rows, format, meta_json("civilization", params, seed)));
        } else if (*emu_cmd) {
            emu_cfg.runs = emu_runs;
            emu_cfg.max_step = emu_max_step;
            emu_cfg.rng_seed = seed;
            json params{{"runs", emu_runs},
                        {"max_step", emu_max_step},
                        {"outcoupling_prob", emu_cfg.outcoupling_prob},
                        {"pair_generation_prob", emu_cfg.pair_generation_prob},
                        {"detector_efficiency", emu_cfg.detector_efficiency},
                        {"setup_klyshko", emu_cfg.setup_klyshko},
                        {"dead_time_ns", emu_cfg.dead_time_ns},
                        {"repetition_rate_hz", emu_cfg.repetition_rate_hz},
                        {"roundtrip_ns", emu_cfg.roundtrip_ns},
                        {"bin_separation_ns", emu_cfg.bin_separation_ns},
                        {"stream_format", emu_format}};
            SimulationResult sim = simulate_runs(emu_cfg);
            params["pairs_generated"] = sim.stats.pairs_generated;
            params["clicks_emitted"] = sim.stats.clicks_emitted;
            params["same_bin_dead_time_drops"] = sim.stats.same_bin_dead_time_drops;
            params["cross_bin_dead_time_drops"] = sim.stats.cross_bin_dead_time_drops;
            std::ostringstream os(std::ios::binary);
            if (emu_format == "csv")
                write_clicks_csv(os, sim.events);
            else
                write_clicks_binary(os, sim.events);
            const std::string path = resolve_output(
                output, std::string("clicks.") + (emu_format == "csv" ? "csv" : "bin"));
            std::cout << sim.stats.clicks_emitted << " clicks from " << emu_runs << " runs\n";
            emit("emulate", params, seed, path, os.str());
        } else if (*rcn_cmd) {
            json params{{"input", rcn_input},
                        {"input_format", rcn_input_format},
                        {"loss_step", rcn_loss_step},
                        {"loss_mode", rcn_mode},
                        {"out_step", rcn_out_step}};
            const std::string raw = read_text_file(rcn_input);
            std::istringstream is(raw, std::ios::binary);
            const std::vector<ClickEvent> events =
                rcn_input_format == "csv" ? read_clicks_csv(is) : read_clicks_binary(is);
            ReconstructionResult rec =
                reconstruct_conditioned(events, rcn_loss_step, parse_mode(rcn_mode), rcn_out_step);
            params["coincidences"] = rec.total_coincidences;
            std::cout << rec.total_coincidences << " coincidences\n";
            const std::string path = resolve_output(
                output, std::string("reconstruct.") + (format == "csv" ? "csv" : "json"));
            emit("reconstruct", params, seed, path,
                 render_distribution(rec.distribution, format,
                                     meta_json("reconstruct", params, seed)));
        } else if (*sim_cmd) {
            json params{{"a", sim_a}, {"b", sim_b}};
            std::istringstream ia(read_text_file(sim_a));
            std::istringstream ib(read_text_file(sim_b));
            const double s = similarity(read_distribution_csv(ia), read_distribution_csv(ib));
            params["similarity"] = s;
            std::cout << "similarity " << format_probability(s) << "\n";
            const std::string path = resolve_output(output, "similarity.json");
            json doc;
            doc["meta"] = meta_json("similarity", params, seed);
            doc["similarity"] = s;
            emit("similarity", params, seed, path, doc.dump(2) + "\n");
        }
    } catch (const ZeroConditioningProbability& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEmpty;
    } catch (const EmptySelection& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEmpty;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return 0;
}
