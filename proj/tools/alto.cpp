// alto: simulate, ingest, calibrate, locate and run experiments.
//
//   alto simulate --config scenarios/default.cfg --out run/
//   alto ingest --lr run/left_right.pcm --tb run/top_bottom.pcm --out run/observations.csv
//   alto calibrate --config scenarios/default.cfg --out run/profile.cfg
//   alto locate --observations run/observations.csv --profile run/profile.cfg --out run/estimates.csv
//   alto experiment accuracy_2d --config scenarios/default.cfg --out report.csv --seed 7

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "alto/alto.hpp"

namespace fs = std::filesystem;
using namespace alto;

namespace {

struct Common {
    std::string config;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "Scenario file (key = value)")->check(CLI::ExistingFile);
    cmd->add_option("--set", c.overrides, "Override a scenario key, e.g. --set surface.noise_stddev=0");
    cmd->add_option("--seed", c.seed, "Run seed (overrides the 'seed' key)");
}

// defaults < config file < --set < --seed
Scenario load_scenario(const Common& c) {
    KeyValues kv;
    if (!c.config.empty()) kv = KeyValues::load(c.config);
    for (const auto& o : c.overrides) kv.set_assignment(o);
    if (c.seed) kv.set("seed", std::to_string(*c.seed));
    return scenario_from(kv);
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

ChannelMap parse_map(const std::string& text, Pair expected) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw Error(ErrorKind::usage, "channel map needs two names, e.g. left,right");
    ChannelMap m{parse_channel(trim(std::string_view(text).substr(0, comma))),
                 parse_channel(trim(std::string_view(text).substr(comma + 1)))};
    m.validate();
    if (pair_of(m.channel0) != expected) throw Error(ErrorKind::usage, "channel map '" + text + "' is for the wrong device");
    return m;
}

int cmd_simulate(const Common& c, const fs::path& out_dir) {
    const Scenario sc = load_scenario(c);
    std::vector<Point> taps = sc.taps;
    if (taps.empty()) taps = make_experiment(ExperimentKind::accuracy_2d, sc).positions;
    const auto session = render_session(sc, taps, sc.seed);
    fs::create_directories(out_dir);
    export_pcm(session.left_right, out_dir / "left_right.pcm", ChannelMap::canonical(Pair::left_right));
    export_pcm(session.top_bottom, out_dir / "top_bottom.pcm", ChannelMap::canonical(Pair::top_bottom));
    write_text(out_dir / "events.csv", events_csv(session.events));
    print_warnings(session.warnings);
    std::cout << "simulated " << taps.size() << " taps, " << session.left_right.size() << " chunks per device at "
              << sc.detector.sample_rate << " Hz -> " << out_dir.string() << "\n";
    return 0;
}

int cmd_ingest(const Common& c, const std::string& lr_path, const std::string& tb_path, const std::string& lr_map,
               const std::string& tb_map, const fs::path& out) {
    const Scenario sc = load_scenario(c);
    const auto& cfg = sc.detector;
    std::vector<TdoaObservation> all;
    if (!lr_path.empty()) {
        const auto stream = ingest_pcm_file(lr_path, parse_map(lr_map, Pair::left_right), cfg.sample_rate, cfg.chunk_size);
        const auto obs = run_detector(stream, cfg);
        all.insert(all.end(), obs.begin(), obs.end());
    }
    if (!tb_path.empty()) {
        const auto stream = ingest_pcm_file(tb_path, parse_map(tb_map, Pair::top_bottom), cfg.sample_rate, cfg.chunk_size);
        const auto obs = run_detector(stream, cfg);
        all.insert(all.end(), obs.begin(), obs.end());
    }
    if (lr_path.empty() && tb_path.empty()) throw Error(ErrorKind::usage, "ingest needs --lr and/or --tb");
    write_text(out, observations_csv(all));
    std::cout << "wrote " << all.size() << " observations to " << out.string() << "\n";
    return 0;
}

int cmd_calibrate(const Common& c, const fs::path& out, const std::string& report) {
    const Scenario sc = load_scenario(c);
    const auto run = run_calibrate(make_experiment(ExperimentKind::calibrate, sc));
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_profile(run.profile, out);
    if (!report.empty()) write_text(report, report_csv(run.report));
    std::cout << report_text(run.report);
    return 0;
}

int cmd_locate(const Common& c, const std::string& observations, const std::string& profile_path, const fs::path& out) {
    const Scenario sc = load_scenario(c);
    const CalibrationProfile profile = profile_path.empty() ? exact_profile(sc) : read_profile(profile_path);
    const auto obs = parse_observations_csv(read_text(observations), sc.detector.sample_rate);
    std::map<std::size_t, TdoaObservation> lr;
    std::map<std::size_t, TdoaObservation> tb;
    for (const auto& o : obs) (o.pair() == Pair::left_right ? lr : tb)[o.tap_id] = o;

    std::vector<TapEstimate> estimates;
    std::size_t failed = 0;
    for (const auto& [id, l] : lr) {
        const auto t = tb.find(id);
        if (t == tb.end()) {
            std::cerr << "warning: tap " << id << " has no top_bottom observation\n";
            ++failed;
            continue;
        }
        try {
            estimates.push_back(locate_tap(l, t->second, profile.speeds(), profile.layout));
        } catch (const Error& e) {
            std::cerr << "warning: tap " << id << " unsolved: " << e.what() << "\n";
            ++failed;
        }
    }
    for (const auto& [id, t] : tb)
        if (!lr.count(id)) {
            std::cerr << "warning: tap " << id << " has no left_right observation\n";
            ++failed;
        }
    write_text(out, estimates_csv(estimates));
    std::cout << "located " << estimates.size() << " taps, " << failed << " unsolved -> " << out.string() << "\n";
    return 0;
}

int cmd_experiment(const Common& c, const std::string& kind_name, const std::string& out, const std::string& profile_path) {
    const Scenario sc = load_scenario(c);
    const ExperimentKind kind = parse_experiment_kind(kind_name);
    const ExperimentSpec spec = make_experiment(kind, sc);
    std::string csv;
    switch (kind) {
        case ExperimentKind::linearity_1d: {
            const auto r = run_linearity_1d(spec);
            csv = report_csv(r);
            std::cout << report_text(r);
            break;
        }
        case ExperimentKind::sampling_sweep: {
            const auto r = run_sampling_sweep(spec);
            csv = report_csv(r.low) + report_csv(r.high, false);
            std::cout << report_text(r.low) << report_text(r.high) << "locations with lower TDOA spread at "
                      << r.high.sample_rate << " Hz: " << format_number(100 * r.fraction_lower_stddev)
                      << "%; R^2 improved: " << (r.r2_improved ? "yes" : "no") << "\n";
            break;
        }
        case ExperimentKind::calibrate: {
            const auto r = run_calibrate(spec);
            csv = report_csv(r.report);
            std::cout << report_text(r.report) << format_profile(r.profile);
            break;
        }
        case ExperimentKind::accuracy_2d: {
            const CalibrationProfile profile = profile_path.empty() ? exact_profile(sc) : read_profile(profile_path);
            const auto r = run_accuracy_2d(spec, profile);
            csv = report_csv(r);
            std::cout << report_text(r);
            break;
        }
    }
    if (!out.empty()) write_text(out, csv);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acoustic tap localization: simulator, detector, solver and experiment harness"};
    app.require_subcommand(1);

    Common common;
    std::string out;
    std::string profile;

    auto* simulate = app.add_subcommand("simulate", "Render taps to per-device PCM files plus a ground-truth log");
    add_common(simulate, common);
    simulate->add_option("--out", out, "Output directory")->required();

    std::string lr_path, tb_path, lr_map = "left,right", tb_map = "top,bottom";
    auto* ingest = app.add_subcommand("ingest", "Detect taps in recorded PCM files");
    add_common(ingest, common);
    ingest->add_option("--lr", lr_path, "Left/right device recording")->check(CLI::ExistingFile);
    ingest->add_option("--tb", tb_path, "Top/bottom device recording")->check(CLI::ExistingFile);
    ingest->add_option("--lr-map", lr_map, "Sensors on file channels 0,1")->capture_default_str();
    ingest->add_option("--tb-map", tb_map, "Sensors on file channels 0,1")->capture_default_str();
    ingest->add_option("--out", out, "Observations CSV")->required();

    std::string report;
    auto* calibrate = app.add_subcommand("calibrate", "Fit per-axis speeds from simulated calibration taps");
    add_common(calibrate, common);
    calibrate->add_option("--out", out, "Profile file")->required();
    calibrate->add_option("--report", report, "Per-location CSV");

    std::string observations;
    auto* locate = app.add_subcommand("locate", "Turn observations into positions");
    add_common(locate, common);
    locate->add_option("--observations", observations, "Observations CSV")->required()->check(CLI::ExistingFile);
    locate->add_option("--profile", profile, "Calibration profile (default: scenario speeds)")->check(CLI::ExistingFile);
    locate->add_option("--out", out, "Estimates CSV")->required();

    std::string kind;
    auto* experiment = app.add_subcommand("experiment", "Run one of the end-to-end experiments");
    add_common(experiment, common);
    experiment->add_option("kind", kind, "linearity_1d | sampling_sweep | calibrate | accuracy_2d")
        ->required()
        ->check(CLI::IsMember({"linearity_1d", "sampling_sweep", "calibrate", "accuracy_2d"}));
    experiment->add_option("--out", out, "Report CSV");
    experiment->add_option("--profile", profile, "Calibration profile for accuracy_2d")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*simulate) return cmd_simulate(common, out);
        if (*ingest) return cmd_ingest(common, lr_path, tb_path, lr_map, tb_map, out);
        if (*calibrate) return cmd_calibrate(common, out, report);
        if (*locate) return cmd_locate(common, observations, profile, out);
        if (*experiment) return cmd_experiment(common, kind, out, profile);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::usage || e.kind() == ErrorKind::config ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
