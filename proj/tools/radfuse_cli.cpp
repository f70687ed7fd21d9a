// SPDX-License-Identifier: Apache-2.0
//
// radfuse - multi-radar respiratory sensing and signal fusion
// Copyright (C) 2026 The radfuse authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// radfuse command-line front end.
//
// Exit codes: 0 success, 2 invalid input or no usable result, 3 I/O or
// format error, 1 anything else.

#include "radfuse/radfuse.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace radfuse;
using radfuse::json;

namespace
{

// Sections of the combined --config file.
struct RunConfig
{
    json root = json::object();

    json section(const char *name) const { return root.contains(name) ? root.at(name) : json::object(); }
};

RunConfig load_run_config(const std::string &path)
{
    RunConfig rc;
    if (path.empty())
        return rc;
    rc.root = io::read_json_file(path);
    io::detail::check_keys(rc.root, {"radar", "vmd", "fusion", "peaks", "scenario", "theta_rr"}, "config");
    return rc;
}

void emit(const json &report, const std::string &out)
{
    const std::string text = report.dump(2) + "\n";
    if (out.empty())
        std::cout << text;
    else
        io::write_file(out, text);
}

struct VmdFlags
{
    std::optional<std::size_t> modes;
    std::optional<double> alpha, eta, tol;
    std::optional<std::size_t> max_iter;
    std::optional<std::string> init;

    void add(CLI::App *cmd)
    {
        cmd->add_option("--modes", modes, "number of modes K");
        cmd->add_option("--alpha", alpha, "bandwidth penalty");
        cmd->add_option("--eta", eta, "dual ascent step");
        cmd->add_option("--tol", tol, "convergence threshold");
        cmd->add_option("--max-iter", max_iter, "iteration cap");
        cmd->add_option("--init", init, "uniform | spectral-peaks")->check(CLI::IsMember({"uniform", "spectral-peaks"}));
    }

    VmdConfig resolve(const RunConfig &rc) const
    {
        auto j = rc.section("vmd");
        if (modes)
            j["modes"] = *modes;
        if (alpha)
            j["alpha"] = *alpha;
        if (eta)
            j["eta"] = *eta;
        if (tol)
            j["tol"] = *tol;
        if (max_iter)
            j["max_iter"] = *max_iter;
        if (init)
            j["init"] = *init;
        return io::vmd_config_from_json(j);
    }
};

struct FusionFlags
{
    std::optional<double> f_rr, max_lag;

    void add(CLI::App *cmd)
    {
        cmd->add_option("--f-rr", f_rr, "expected respiratory frequency (Hz)");
        cmd->add_option("--max-align-lag", max_lag, "alignment search limit (s)");
    }

    FusionConfig resolve(const RunConfig &rc) const
    {
        auto j = rc.section("fusion");
        if (f_rr)
            j["f_rr"] = *f_rr;
        if (max_lag)
            j["max_align_lag"] = *max_lag;
        return io::fusion_config_from_json(j);
    }
};

struct PeakFlags
{
    std::optional<double> min_sep, min_prom;

    void add(CLI::App *cmd)
    {
        cmd->add_option("--min-separation", min_sep, "minimum breath spacing (s)");
        cmd->add_option("--min-prominence", min_prom, "minimum prominence (multiples of std)");
    }

    PeakConfig resolve(const RunConfig &rc) const
    {
        auto j = rc.section("peaks");
        if (min_sep)
            j["min_separation"] = *min_sep;
        if (min_prom)
            j["min_prominence"] = *min_prom;
        return io::peak_config_from_json(j);
    }
};

json scenario_json(const RunConfig &rc, const std::string &preset, std::optional<double> duration, std::optional<double> snr,
                   bool randomize)
{
    auto j = rc.section("scenario");
    if (!preset.empty())
    {
        for (const char *k : {"radars", "subjects", "reflectors", "name"})
            j.erase(k);
        j["preset"] = preset;
    }
    if (!j.contains("preset") && !j.contains("radars"))
        throw InvalidInput("no scenario: pass --preset or a config with a scenario section");
    if (duration)
        j["duration"] = *duration;
    if (snr)
        j["snr_db"] = *snr;
    if (randomize)
        j["randomize_breathing"] = true;
    return j;
}

// ---------------------------------------------------------------------------

struct SimulateArgs
{
    std::string config, preset, out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<double> duration, snr;
    bool randomize = false;
};

int cmd_simulate(const SimulateArgs &a)
{
    const auto rc = load_run_config(a.config);
    const auto sj = scenario_json(rc, a.preset, a.duration, a.snr, a.randomize);
    const auto sc = io::scenario_from_json(sj, *a.seed);

    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec)
        throw IoError("cannot create '" + a.out_dir + "': " + ec.message());

    json files = json::array();
    for (std::size_t i = 0; i < sc.radars.size(); ++i)
    {
        const auto cube = synthesize_cube(sc, i);
        const std::string name = "radar_" + std::to_string(sc.radars[i].id) + ".rcub";
        io::write_cube((fs::path(a.out_dir) / name).string(), cube, sc.radars[i].config, sc.radars[i].id);
        files.push_back({{"radar_id", sc.radars[i].id}, {"file", name}, {"frames", cube.frames()}});
    }

    // Ground truth on the first radar's frame clock.
    const double rate = sc.radars.front().config.slow_time_rate;
    const auto truths = scenario_breathing(sc, rate);
    io::CsvTable gt;
    gt.header = {"time_s"};
    std::vector<double> time(truths[0].displacement.size());
    for (std::size_t i = 0; i < time.size(); ++i)
        time[i] = truths[0].displacement.time_at(i);
    gt.columns.push_back(std::move(time));
    for (std::size_t s = 0; s < truths.size(); ++s)
    {
        gt.header.push_back("subject_" + std::to_string(s) + "_chest_m");
        gt.columns.push_back(truths[s].displacement.values());
    }
    for (std::size_t i = 0; i < sc.radars.size(); ++i)
    {
        gt.header.push_back("radar_" + std::to_string(sc.radars[i].id));
        gt.columns.push_back(projected_displacement(sc, i, 0, truths[0]).values());
    }
    io::write_csv((fs::path(a.out_dir) / "ground_truth.csv").string(), gt);
    io::write_csv((fs::path(a.out_dir) / "ground_truth_peaks.csv").string(), io::peak_table(truths[0].peak_times));

    json geometry = json::array();
    for (std::size_t i = 0; i < sc.radars.size(); ++i)
    {
        const auto g = subject_geometry(sc, sc.radars[i], sc.subjects[0]);
        geometry.push_back({{"radar_id", sc.radars[i].id},
                            {"range_m", g.range},
                            {"angle_deg", rad2deg(g.angle)},
                            {"aspect_deg", g.psi_deg},
                            {"displacement_gain", g.gain}});
    }
    json manifest{{"preset", sj.value("preset", std::string())},
                  {"seed", *a.seed},
                  {"scenario", io::to_json(sc)},
                  {"cubes", files},
                  {"subject_0_geometry", geometry},
                  {"ground_truth", "ground_truth.csv"},
                  {"ground_truth_peaks", "ground_truth_peaks.csv"}};
    io::write_file((fs::path(a.out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    emit(json{{"written", files.size()}, {"out_dir", a.out_dir}, {"manifest", "manifest.json"}}, "");
    return 0;
}

struct ProcessArgs
{
    std::vector<std::string> cubes;
    std::string config, out, meta;
};

int cmd_process(const ProcessArgs &a)
{
    const auto rc = load_run_config(a.config);
    std::vector<RealSeries> channels;
    std::vector<std::string> ids;
    json radars = json::array();
    for (const auto &path : a.cubes)
    {
        auto file = io::read_cube(path);
        RadarConfig cfg = file.config;
        if (rc.root.contains("radar"))
            cfg = io::radar_config_from_json(rc.section("radar"), cfg);
        const auto track = process_cube(file.cube, cfg);
        channels.push_back(track.displacement);
        ids.push_back(std::to_string(file.radar_id));
        radars.push_back({{"radar_id", file.radar_id},
                          {"file", path},
                          {"r_max_m", track.range},
                          {"theta_max_deg", rad2deg(track.angle)},
                          {"peak_power", track.power.at(track.cell.range_index, track.cell.angle_index)}});
    }
    const MultiChannelSeries all(std::move(channels), std::move(ids));
    io::write_csv(a.out, io::displacement_table(all));
    emit(json{{"displacement_csv", a.out}, {"radars", radars}}, a.meta.empty() ? a.out + ".json" : a.meta);
    return 0;
}

struct DecomposeArgs
{
    std::string in, config, out, meta;
    bool multichannel = false;
    VmdFlags vmd;
};

int cmd_decompose(const DecomposeArgs &a)
{
    const auto rc = load_run_config(a.config);
    const auto cfg = a.vmd.resolve(rc);
    const auto x = io::displacement_from_table(io::read_csv(a.in), a.in);

    io::CsvTable table;
    table.header = {"time_s"};
    std::vector<double> time(x.length());
    for (std::size_t i = 0; i < time.size(); ++i)
        time[i] = x[0].time_at(i);
    table.columns.push_back(std::move(time));

    json report{{"multichannel", a.multichannel}, {"vmd", io::to_json(cfg)}, {"channels", json::array()}};
    auto hz = [](const std::vector<double> &w) {
        std::vector<double> out;
        for (double v : w)
            out.push_back(v / (2.0 * std::numbers::pi));
        return out;
    };
    if (a.multichannel)
    {
        const auto m = mvmd_decompose(x, cfg);
        for (std::size_t k = 0; k < m.mode_count(); ++k)
            for (std::size_t c = 0; c < x.channel_count(); ++c)
            {
                table.header.push_back("mode" + std::to_string(k) + "_radar_" + x.ids()[c]);
                table.columns.push_back(m.modes[k][c].values());
            }
        report["center_freqs_hz"] = hz(m.center_freqs);
        report["iterations"] = m.iterations_used;
        report["converged"] = m.converged;
        report["reconstruction_error"] = m.reconstruction_error;
        report["channels"] = x.ids();
    }
    else
    {
        for (std::size_t c = 0; c < x.channel_count(); ++c)
        {
            const auto m = vmd_decompose(x[c], cfg);
            for (std::size_t k = 0; k < m.modes.size(); ++k)
            {
                table.header.push_back("mode" + std::to_string(k) + "_radar_" + x.ids()[c]);
                table.columns.push_back(m.modes[k].values());
            }
            report["channels"].push_back({{"id", x.ids()[c]},
                                          {"center_freqs_hz", hz(m.center_freqs)},
                                          {"iterations", m.iterations_used},
                                          {"converged", m.converged}});
        }
    }
    io::write_csv(a.out, table);
    emit(report, a.meta.empty() ? a.out + ".json" : a.meta);
    return 0;
}

struct FuseArgs
{
    std::string in, config, out, meta;
    VmdFlags vmd;
    FusionFlags fusion;
};

int cmd_fuse(const FuseArgs &a)
{
    const auto rc = load_run_config(a.config);
    const auto vcfg = a.vmd.resolve(rc);
    const auto fcfg = a.fusion.resolve(rc);
    const auto x = io::displacement_from_table(io::read_csv(a.in), a.in);
    const auto f = fuse(x, vcfg, fcfg);

    io::CsvTable table;
    table.header = {"time_s", "upsilon"};
    std::vector<double> time(f.upsilon.size());
    for (std::size_t i = 0; i < time.size(); ++i)
        time[i] = f.upsilon.time_at(i);
    table.columns = {std::move(time), f.upsilon.values()};
    io::write_csv(a.out, table);

    std::vector<double> centers;
    for (double w : f.center_freqs)
        centers.push_back(w / (2.0 * std::numbers::pi));
    std::vector<bool> flagged(f.flagged.begin(), f.flagged.end());
    emit(json{{"fused_csv", a.out},
              {"channels", x.ids()},
              {"weights", f.weights},
              {"eigenvalues", f.eigenvalues},
              {"lags_s", f.lags},
              {"zero_power_channels", flagged},
              {"reference_channel_index", f.reference_channel},
              {"reference_channel", x.ids()[f.reference_channel]},
              {"selected_mode_index", f.selected_mode},
              {"center_freqs_hz", centers},
              {"vmd", io::to_json(vcfg)},
              {"fusion", io::to_json(fcfg)}},
         a.meta.empty() ? a.out + ".json" : a.meta);
    return 0;
}

struct EvaluateArgs
{
    std::string estimate, reference, config, out;
    std::optional<double> theta;
    std::string estimate_polarity = "range", reference_polarity = "chest";
    PeakFlags peaks;
};

// A peak CSV (single peak_time_s column) is used as is; a waveform CSV
// (time_s plus one column) goes through breath detection. Range-polarity
// waveforms dip on inhalation and are negated first.
std::vector<double> load_peaks(const std::string &path, const std::string &polarity, const PeakConfig &pc)
{
    const auto table = io::read_csv(path);
    if (table.header.size() == 1 && table.header[0] == "peak_time_s")
        return table.columns[0];
    const auto x = io::displacement_from_table(table, path);
    if (x.channel_count() != 1)
        throw InvalidInput(path + ": waveform CSV must hold exactly one signal column");
    return polarity == "range" ? breath_times(x[0], pc) : detect_peaks(x[0], pc);
}

int cmd_evaluate(const EvaluateArgs &a)
{
    const auto rc = load_run_config(a.config);
    const auto pc = a.peaks.resolve(rc);
    double theta = rc.root.value("theta_rr", 2.0);
    if (a.theta)
        theta = *a.theta;
    const auto est = intervals_from_peaks(load_peaks(a.estimate, a.estimate_polarity, pc));
    const auto ref = intervals_from_peaks(load_peaks(a.reference, a.reference_polarity, pc));
    const auto match = match_intervals(est, ref);
    const auto m = compute_metrics(match.pairs, theta);
    auto report = io::to_json(m);
    report["matched_peaks"] = match.matched_peaks;
    report["unmatched_reference_peaks"] = match.unmatched_reference;
    report["unmatched_estimate_peaks"] = match.unmatched_estimate;
    report["reference_intervals"] = ref.intervals.size();
    emit(report, a.out);
    return 0;
}

struct ExperimentArgs
{
    std::string config, preset, out, csv;
    std::vector<std::string> methods;
    std::size_t seeds = 20;
    std::uint64_t seed_base = 1;
    std::optional<double> duration, snr;
    bool fixed_breathing = false;
    VmdFlags vmd;
    FusionFlags fusion;
    PeakFlags peaks;
    std::optional<double> theta;
};

int cmd_experiment(const ExperimentArgs &a)
{
    const auto rc = load_run_config(a.config);
    PipelineSettings ps{a.vmd.resolve(rc), a.fusion.resolve(rc), a.peaks.resolve(rc), rc.root.value("theta_rr", 2.0)};
    if (a.theta)
        ps.theta_rr = *a.theta;
    const auto sj = scenario_json(rc, a.preset, a.duration, a.snr, !a.fixed_breathing);
    auto methods = a.methods;
    if (methods.empty())
    {
        methods = {"single:1", "single:2", "single:3", "single:4", "fused:1+3", "fused:1+3+4"};
        if (!sj.contains("preset"))
        {
            methods.clear();
            std::string all;
            for (const auto &r : io::scenario_from_json(sj, a.seed_base).radars)
            {
                methods.push_back("single:" + std::to_string(r.id));
                all += (all.empty() ? "" : "+") + std::to_string(r.id);
            }
            if (methods.size() > 1)
                methods.push_back("fused:" + all);
        }
    }
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < a.seeds; ++i)
        seeds.push_back(a.seed_base + i);

    const auto result = run_experiment([&](std::uint64_t seed) { return io::scenario_from_json(sj, seed); }, methods, seeds, ps);

    json rows = json::array(), per_seed = json::array();
    io::CsvTable table;
    for (const auto &s : result.summary)
        rows.push_back({{"method", s.method},
                        {"runs", s.runs},
                        {"failures", s.failures},
                        {"rmse_rri_s", s.rmse_rri},
                        {"mae_rr_bpm", s.mae_rr},
                        {"accuracy", s.accuracy}});
    for (const auto &so : result.seeds)
    {
        json entry{{"seed", so.seed}, {"methods", json::array()}};
        for (const auto &m : so.methods)
        {
            json mj{{"method", m.method}, {"ok", m.ok}};
            if (m.ok)
                mj.update(io::to_json(m.metrics));
            else
                mj["failure"] = m.failure;
            entry["methods"].push_back(mj);
        }
        per_seed.push_back(entry);
    }
    emit(json{{"scenario", result.scenario}, {"seeds", seeds}, {"summary", rows}, {"per_seed", per_seed}}, a.out);

    if (!a.csv.empty())
    {
        std::string text = "method,runs,failures,rmse_rri_s,mae_rr_bpm,accuracy\n";
        for (const auto &s : result.summary)
            text += s.method + "," + std::to_string(s.runs) + "," + std::to_string(s.failures) + "," + io::format_double(s.rmse_rri) +
                    "," + io::format_double(s.mae_rr) + "," + io::format_double(s.accuracy) + "\n";
        io::write_file(a.csv, text);
    }
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"radfuse: multi-radar respiratory sensing toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "radfuse 0.1.0");

    SimulateArgs sim;
    auto *c_sim = app.add_subcommand("simulate", "synthesize radar cubes and ground truth for a scene");
    c_sim->add_option("--config", sim.config, "combined JSON config")->check(CLI::ExistingFile);
    c_sim->add_option("--preset", sim.preset, "C1..C6")->check(CLI::IsMember({"C1", "C2", "C3", "C4", "C5", "C6"}));
    c_sim->add_option("--seed", sim.seed, "random seed")->required();
    c_sim->add_option("--duration", sim.duration, "scene length (s)");
    c_sim->add_option("--snr-db", sim.snr, "per-element SNR after range compression");
    c_sim->add_flag("--randomize-breathing", sim.randomize, "draw breathing rate, depth and wander from the seed");
    c_sim->add_option("--out-dir", sim.out_dir, "output directory");

    ProcessArgs proc;
    auto *c_proc = app.add_subcommand("process", "radar cubes to displacement CSV");
    c_proc->add_option("cubes", proc.cubes, "RCUB files")->required();
    c_proc->add_option("--config", proc.config, "combined JSON config (radar section overrides cube headers)")->check(CLI::ExistingFile);
    c_proc->add_option("--out", proc.out, "displacement CSV")->required();
    c_proc->add_option("--meta", proc.meta, "metadata JSON (default <out>.json)");

    DecomposeArgs dec;
    auto *c_dec = app.add_subcommand("decompose", "VMD / MVMD of a displacement CSV");
    c_dec->add_option("--in", dec.in, "displacement CSV")->required();
    c_dec->add_option("--config", dec.config, "combined JSON config")->check(CLI::ExistingFile);
    c_dec->add_flag("--multichannel", dec.multichannel, "joint MVMD across columns");
    c_dec->add_option("--out", dec.out, "modes CSV")->required();
    c_dec->add_option("--meta", dec.meta, "metadata JSON (default <out>.json)");
    dec.vmd.add(c_dec);

    FuseArgs fu;
    auto *c_fu = app.add_subcommand("fuse", "MVMD fusion of a displacement CSV");
    c_fu->add_option("--in", fu.in, "displacement CSV")->required();
    c_fu->add_option("--config", fu.config, "combined JSON config")->check(CLI::ExistingFile);
    c_fu->add_option("--out", fu.out, "fused waveform CSV")->required();
    c_fu->add_option("--meta", fu.meta, "metadata JSON (default <out>.json)");
    fu.vmd.add(c_fu);
    fu.fusion.add(c_fu);

    EvaluateArgs ev;
    auto *c_ev = app.add_subcommand("evaluate", "breath-interval metrics against a reference");
    c_ev->add_option("--estimate", ev.estimate, "peak CSV or waveform CSV")->required();
    c_ev->add_option("--reference", ev.reference, "peak CSV or waveform CSV")->required();
    c_ev->add_option("--config", ev.config, "combined JSON config")->check(CLI::ExistingFile);
    c_ev->add_option("--theta-rr", ev.theta, "rate tolerance (bpm), default 2");
    c_ev->add_option("--estimate-polarity", ev.estimate_polarity, "range | chest")->check(CLI::IsMember({"range", "chest"}));
    c_ev->add_option("--reference-polarity", ev.reference_polarity, "range | chest")->check(CLI::IsMember({"range", "chest"}));
    c_ev->add_option("--out", ev.out, "report JSON (default stdout)");
    ev.peaks.add(c_ev);

    ExperimentArgs ex;
    auto *c_ex = app.add_subcommand("experiment", "seeded comparison of single-radar and fused methods");
    c_ex->add_option("--config", ex.config, "combined JSON config")->check(CLI::ExistingFile);
    c_ex->add_option("--preset", ex.preset, "C1..C6")->check(CLI::IsMember({"C1", "C2", "C3", "C4", "C5", "C6"}));
    c_ex->add_option("--methods", ex.methods, "single:<id> or fused:<id>+<id>...")->delimiter(',');
    c_ex->add_option("--seeds", ex.seeds, "number of seeds")->check(CLI::PositiveNumber);
    c_ex->add_option("--seed-base", ex.seed_base, "first seed");
    c_ex->add_option("--duration", ex.duration, "scene length (s)");
    c_ex->add_option("--snr-db", ex.snr, "per-element SNR after range compression");
    c_ex->add_flag("--fixed-breathing", ex.fixed_breathing, "use the scenario's breathing model for every seed");
    c_ex->add_option("--theta-rr", ex.theta, "rate tolerance (bpm), default 2");
    c_ex->add_option("--out", ex.out, "report JSON (default stdout)");
    c_ex->add_option("--csv", ex.csv, "summary CSV");
    ex.vmd.add(c_ex);
    ex.fusion.add(c_ex);
    ex.peaks.add(c_ex);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForVersion &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return 2;
    }

    try
    {
        if (*c_sim)
            return cmd_simulate(sim);
        if (*c_proc)
            return cmd_process(proc);
        if (*c_dec)
            return cmd_decompose(dec);
        if (*c_fu)
            return cmd_fuse(fu);
        if (*c_ev)
            return cmd_evaluate(ev);
        if (*c_ex)
            return cmd_experiment(ex);
    }
    catch (const ParseError &e)
    {
        std::cerr << "error: " << e.what() << " (byte " << e.byte_offset() << ")\n";
        return 3;
    }
    catch (const IoError &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    catch (const Error &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
