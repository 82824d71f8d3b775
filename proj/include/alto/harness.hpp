#pragma once

// End-to-end experiments over the simulator: 1D linearity, sampling-rate
// sweep, per-axis calibration and 2D accuracy. Every tap is rendered into
// its own short stream with a seed derived from (run seed, tap index), so
// results do not depend on thread count or evaluation order.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "alto/calibration.hpp"
#include "alto/config.hpp"
#include "alto/error.hpp"
#include "alto/geometry.hpp"
#include "alto/signal_pipeline.hpp"
#include "alto/surface_sim.hpp"

namespace alto {

enum class ExperimentKind { linearity_1d, sampling_sweep, calibrate, accuracy_2d };

constexpr std::string_view to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::linearity_1d: return "linearity_1d";
        case ExperimentKind::sampling_sweep: return "sampling_sweep";
        case ExperimentKind::calibrate: return "calibrate";
        case ExperimentKind::accuracy_2d: return "accuracy_2d";
    }
    return "?";
}

inline ExperimentKind parse_experiment_kind(std::string_view s) {
    for (auto k : {ExperimentKind::linearity_1d, ExperimentKind::sampling_sweep, ExperimentKind::calibrate,
                   ExperimentKind::accuracy_2d})
        if (to_string(k) == s) return k;
    throw Error(ErrorKind::usage, "unknown experiment kind '" + std::string(s) + "'");
}

/// Everything needed to render and process taps. Defaults reproduce the
/// prototype: 26 cm half-separations, 192 kHz, 8192-sample chunks,
/// thresholds 1000/500, speeds 45014/37259 cm/s.
struct Scenario {
    SurfaceModel surface;
    SensorLayout layout;
    DetectorConfig detector;
    std::uint64_t seed = 1;
    std::size_t stream_chunks = 4;
    double max_device_offset_chunks = 1.0;
    unsigned threads = 0;  // 0: hardware concurrency

    // Optional overrides of the per-experiment default tap grid.
    std::optional<double> grid_min_cm;
    std::optional<double> grid_max_cm;
    std::optional<double> grid_step_cm;
    std::optional<int> repetitions;
    std::vector<Point> taps;
};

inline const std::set<std::string>& scenario_keys() {
    static const std::set<std::string> keys{
        "surface.speed_x_cm_per_s", "surface.speed_y_cm_per_s", "surface.noise_stddev", "surface.peak_amplitude",
        "surface.attenuation_per_cm", "surface.rise_samples", "surface.decay_samples", "surface.onset_jitter_samples",
        "layout.half_sep_x_cm", "layout.half_sep_y_cm", "detector.detect_threshold", "detector.onset_threshold",
        "detector.debounce_chunks", "detector.chunk_size", "detector.sample_rate", "grid.min_cm", "grid.max_cm",
        "grid.step_cm", "grid.repetitions", "grid.taps", "sim.stream_chunks", "sim.max_device_offset_chunks",
        "sim.threads", "seed"};
    return keys;
}

/// "x,y; x,y; ..."
inline std::vector<Point> parse_tap_list(std::string_view text) {
    std::vector<Point> out;
    while (!trim(text).empty()) {
        const auto semi = text.find(';');
        const std::string_view item = trim(text.substr(0, semi));
        text = semi == std::string_view::npos ? std::string_view{} : text.substr(semi + 1);
        if (item.empty()) continue;
        const auto comma = item.find(',');
        if (comma == std::string_view::npos) throw Error(ErrorKind::config, "tap '" + std::string(item) + "' needs x,y");
        KeyValues kv;
        kv.set("x", std::string(trim(item.substr(0, comma))));
        kv.set("y", std::string(trim(item.substr(comma + 1))));
        out.push_back({kv.require_double("x"), kv.require_double("y")});
    }
    return out;
}

inline Scenario scenario_from(const KeyValues& kv) {
    kv.require_known(scenario_keys());
    Scenario s;
    s.surface.speed_x = kv.get_double("surface.speed_x_cm_per_s", s.surface.speed_x);
    s.surface.speed_y = kv.get_double("surface.speed_y_cm_per_s", s.surface.speed_y);
    s.surface.noise_stddev = kv.get_double("surface.noise_stddev", s.surface.noise_stddev);
    s.surface.peak_amplitude = kv.get_double("surface.peak_amplitude", s.surface.peak_amplitude);
    s.surface.attenuation_per_cm = kv.get_double("surface.attenuation_per_cm", s.surface.attenuation_per_cm);
    s.surface.rise_samples = kv.get_int("surface.rise_samples", s.surface.rise_samples);
    s.surface.decay_samples = kv.get_double("surface.decay_samples", s.surface.decay_samples);
    s.surface.onset_jitter_samples = kv.get_double("surface.onset_jitter_samples", s.surface.onset_jitter_samples);
    s.layout.half_sep_x = kv.get_double("layout.half_sep_x_cm", s.layout.half_sep_x);
    s.layout.half_sep_y = kv.get_double("layout.half_sep_y_cm", s.layout.half_sep_y);
    s.detector.detect_threshold = kv.get_int("detector.detect_threshold", s.detector.detect_threshold);
    s.detector.onset_threshold = kv.get_int("detector.onset_threshold", s.detector.onset_threshold);
    s.detector.debounce_chunks = kv.get_int("detector.debounce_chunks", s.detector.debounce_chunks);
    s.detector.chunk_size = kv.get_int("detector.chunk_size", s.detector.chunk_size);
    s.detector.sample_rate = kv.get_int("detector.sample_rate", s.detector.sample_rate);
    s.stream_chunks = kv.get_int("sim.stream_chunks", s.stream_chunks);
    s.max_device_offset_chunks = kv.get_double("sim.max_device_offset_chunks", s.max_device_offset_chunks);
    s.threads = kv.get_int("sim.threads", s.threads);
    s.seed = kv.get_int("seed", s.seed);
    if (kv.contains("grid.min_cm")) s.grid_min_cm = kv.require_double("grid.min_cm");
    if (kv.contains("grid.max_cm")) s.grid_max_cm = kv.require_double("grid.max_cm");
    if (kv.contains("grid.step_cm")) s.grid_step_cm = kv.require_double("grid.step_cm");
    if (kv.contains("grid.repetitions")) s.repetitions = kv.get_int("grid.repetitions", 10);
    if (kv.contains("grid.taps")) s.taps = parse_tap_list(kv.get_string("grid.taps", ""));

    s.detector.validate();
    s.layout.validate();
    s.surface.validate(s.detector.detect_threshold);
    if (s.stream_chunks < 3) throw Error(ErrorKind::config, "sim.stream_chunks must be >= 3");
    if (s.max_device_offset_chunks < 0.0 || s.max_device_offset_chunks > 1.0)
        throw Error(ErrorKind::config, "sim.max_device_offset_chunks must be in [0, 1]");
    return s;
}

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::accuracy_2d;
    Scenario scenario;
    std::vector<Point> positions;  // 1D kinds: points on the x-axis
    int repetitions = 10;
    std::uint64_t seed = 1;
};

inline std::vector<double> linspace_step(double lo, double hi, double step) {
    if (!(step > 0.0) || hi < lo) throw Error(ErrorKind::config, "grid needs min <= max and a positive step");
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

/// Default tap plans: 1D every 2.5 cm; sweep 10 locations; calibration every
/// 1 cm; 2D every 10 cm. Ten taps per location throughout.
inline ExperimentSpec make_experiment(ExperimentKind kind, const Scenario& scenario) {
    ExperimentSpec spec;
    spec.kind = kind;
    spec.scenario = scenario;
    spec.seed = scenario.seed;
    spec.repetitions = scenario.repetitions.value_or(10);
    if (spec.repetitions < 1) throw Error(ErrorKind::config, "repetitions must be >= 1");

    double lo = -25.0, hi = 25.0, step = 2.5;
    if (kind == ExperimentKind::sampling_sweep) lo = -22.5, hi = 22.5, step = 5.0;
    if (kind == ExperimentKind::calibrate) step = 1.0;
    if (kind == ExperimentKind::accuracy_2d) lo = -20.0, hi = 20.0, step = 10.0;
    lo = scenario.grid_min_cm.value_or(lo);
    hi = scenario.grid_max_cm.value_or(hi);
    step = scenario.grid_step_cm.value_or(step);

    if (!scenario.taps.empty()) {
        spec.positions = scenario.taps;
    } else if (kind == ExperimentKind::accuracy_2d) {
        for (double y : linspace_step(lo, hi, step))
            for (double x : linspace_step(lo, hi, step)) spec.positions.push_back({x, y});
    } else {
        for (double x : linspace_step(lo, hi, step)) spec.positions.push_back({x, 0.0});
    }
    return spec;
}

template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n && !failed; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

struct TapOutcome {
    SimulatedTap tap;
    std::optional<TdoaObservation> left_right;
    std::optional<TdoaObservation> top_bottom;
    std::vector<std::string> warnings;
};

/// Renders one tap into fresh streams and runs both detectors. Emission time
/// and each device's clock offset are drawn from the tap's own seed.
inline TapOutcome simulate_tap(const Scenario& sc, Point position, std::size_t tap_index, std::uint64_t run_seed) {
    const std::uint64_t seed = mix_seed(run_seed, tap_index);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double chunk_s = static_cast<double>(sc.detector.chunk_size) / sc.detector.sample_rate;
    const double emit = (0.25 + unit(rng)) * chunk_s;
    const std::array<double, 2> offsets{unit(rng) * sc.max_device_offset_chunks * chunk_s,
                                        unit(rng) * sc.max_device_offset_chunks * chunk_s};
    TapOutcome out;
    out.tap = make_tap(tap_index, position, emit, offsets, sc.layout, sc.surface);
    const auto rendered = synthesize(std::span(&out.tap, 1), sc.surface, sc.layout, sc.detector, sc.stream_chunks, seed);
    out.warnings = rendered.warnings;
    for (Pair p : {Pair::left_right, Pair::top_bottom}) {
        const auto obs = run_detector(rendered.stream(p), sc.detector);
        if (obs.size() > 1)
            out.warnings.push_back("tap " + std::to_string(tap_index) + ": " + std::to_string(obs.size()) + " detections on " +
                                   std::string(to_string(p)));
        if (!obs.empty()) {
            auto o = obs.front();
            o.tap_id = tap_index;
            (p == Pair::left_right ? out.left_right : out.top_bottom) = o;
        }
    }
    return out;
}

/// Several taps in one continuous recording per device, spaced so the
/// debounce window of one tap closes well before the next one arrives.
inline SynthesisResult render_session(const Scenario& sc, std::span<const Point> positions, std::uint64_t run_seed) {
    std::mt19937_64 rng(mix_seed(run_seed, 0x5e55));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double chunk_s = static_cast<double>(sc.detector.chunk_size) / sc.detector.sample_rate;
    const std::size_t spacing = static_cast<std::size_t>(sc.detector.debounce_chunks) + 4;
    const std::array<double, 2> offsets{unit(rng) * sc.max_device_offset_chunks * chunk_s,
                                        unit(rng) * sc.max_device_offset_chunks * chunk_s};
    std::vector<SimulatedTap> taps;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const double emit = (static_cast<double>(i * spacing) + 0.25 + unit(rng)) * chunk_s;
        taps.push_back(make_tap(i, positions[i], emit, offsets, sc.layout, sc.surface));
    }
    const std::size_t chunks = positions.size() * spacing + sc.stream_chunks;
    return synthesize(taps, sc.surface, sc.layout, sc.detector, chunks, run_seed);
}

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct LocationRow {
    Point truth;
    std::size_t requested = 0;
    std::size_t detected = 0;
    std::size_t missed = 0;
    std::size_t failed = 0;
    double mean_x = kNaN;
    double mean_y = kNaN;
    double mae_x = kNaN;
    double mae_y = kNaN;
    double stddev_x = kNaN;
    double stddev_y = kNaN;
    double tdoa_mean_s = kNaN;
    double tdoa_stddev_s = kNaN;
};

struct RunReport {
    ExperimentKind kind = ExperimentKind::accuracy_2d;
    std::uint32_t sample_rate = 192000;
    std::uint64_t seed = 1;
    std::vector<LocationRow> rows;
    std::optional<AxisFit> fit_x;
    std::optional<AxisFit> fit_y;
    std::size_t requested = 0;
    std::size_t detected = 0;
    std::size_t missed = 0;
    std::size_t failed = 0;
    double mae_x = kNaN;
    double mae_y = kNaN;
    std::vector<TapEstimate> estimates;
    std::vector<std::string> warnings;
    double runtime_s = 0.0;
};

namespace detail {

inline void tally(RunReport& r) {
    for (const auto& row : r.rows) {
        r.requested += row.requested;
        r.detected += row.detected;
        r.missed += row.missed;
        r.failed += row.failed;
    }
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline void check_kind(const ExperimentSpec& spec, std::initializer_list<ExperimentKind> allowed) {
    for (auto k : allowed)
        if (spec.kind == k) return;
    throw Error(ErrorKind::usage, "experiment spec has kind " + std::string(to_string(spec.kind)));
}

// Taps along one pair's axis; returns per-location TDOA samples and fills
// the rows/fit of the report.
inline std::vector<CalibrationSample> axis_run(const ExperimentSpec& spec, Axis axis, std::size_t index_base,
                                               RunReport& report) {
    const auto& sc = spec.scenario;
    const Pair pair = axis == Axis::x ? Pair::left_right : Pair::top_bottom;
    const std::size_t reps = static_cast<std::size_t>(spec.repetitions);
    const std::size_t n = spec.positions.size() * reps;
    std::vector<TapOutcome> outcomes(n);
    parallel_for(n, sc.threads, [&](std::size_t i) {
        const double p = spec.positions[i / reps].x;
        const Point at = axis == Axis::x ? Point{p, 0.0} : Point{0.0, p};
        outcomes[i] = simulate_tap(sc, at, index_base + i, spec.seed);
    });

    std::vector<CalibrationSample> samples;
    for (std::size_t loc = 0; loc < spec.positions.size(); ++loc) {
        const double p = spec.positions[loc].x;
        const Point at = axis == Axis::x ? Point{p, 0.0} : Point{0.0, p};
        LocationRow row;
        row.truth = at;
        row.requested = reps;
        for (std::size_t r = 0; r < reps; ++r) {
            const auto& o = outcomes[loc * reps + r];
            for (const auto& w : o.warnings) report.warnings.push_back(w);
            const auto& obs = pair == Pair::left_right ? o.left_right : o.top_bottom;
            if (!obs) {
                ++row.missed;
                report.warnings.push_back("tap " + std::to_string(index_base + loc * reps + r) + " at " +
                                          format_number(p) + " cm missed");
                continue;
            }
            ++row.detected;
            samples.push_back({p, distance_difference(at, pair, sc.layout), obs->tdoa_seconds});
        }
        report.rows.push_back(row);
    }
    return samples;
}

// fit may be null: TDOA spread is still filled, positions are left NaN
inline void fill_axis_rows(RunReport& report, std::size_t first_row, std::size_t end_row, const AxisFit* fit,
                           Axis axis, std::span<const CalibrationSample> samples, const SensorLayout& layout) {
    const double half = axis == Axis::x ? layout.half_sep_x : layout.half_sep_y;
    for (std::size_t i = first_row; i < end_row; ++i) {
        auto& row = report.rows[i];
        const double truth = axis == Axis::x ? row.truth.x : row.truth.y;
        std::vector<double> tdoas;
        std::vector<double> positions;
        for (const auto& s : samples)
            if (s.known_position_cm == truth) {
                tdoas.push_back(s.tdoa_s);
                if (!fit) continue;
                // the 1D map measures toward the second sensor (right, bottom)
                const double along = one_d_position(s.tdoa_s, *fit, 0.0, half).position_cm;
                positions.push_back(axis == Axis::x ? along : -along);
            }
        if (tdoas.empty()) continue;
        const auto n = static_cast<double>(tdoas.size());
        double mt = 0.0, mp = 0.0, mae = 0.0;
        for (double t : tdoas) mt += t;
        row.tdoa_mean_s = mt / n;
        row.tdoa_stddev_s = sample_stddev(tdoas);
        if (!fit) continue;
        for (double q : positions) {
            mp += q;
            mae += std::abs(q - truth);
        }
        (axis == Axis::x ? row.mean_x : row.mean_y) = mp / n;
        (axis == Axis::x ? row.mae_x : row.mae_y) = mae / n;
        (axis == Axis::x ? row.stddev_x : row.stddev_y) = sample_stddev(positions);
    }
}

} // namespace detail

/// Taps along the left/right line, TDOA regressed on distance difference.
inline RunReport run_linearity_1d(const ExperimentSpec& spec) {
    detail::check_kind(spec, {ExperimentKind::linearity_1d, ExperimentKind::sampling_sweep});
    const auto t0 = std::chrono::steady_clock::now();
    RunReport report;
    report.kind = spec.kind;
    report.sample_rate = spec.scenario.detector.sample_rate;
    report.seed = spec.seed;
    const auto samples = detail::axis_run(spec, Axis::x, 0, report);
    try {
        report.fit_x = fit_axis(samples, Axis::x);
    } catch (const Error& e) {
        report.warnings.push_back(std::string("fit failed: ") + e.what());
    }
    detail::fill_axis_rows(report, 0, report.rows.size(), report.fit_x ? &*report.fit_x : nullptr, Axis::x, samples,
                           spec.scenario.layout);
    detail::tally(report);
    report.runtime_s = detail::seconds_since(t0);
    return report;
}

struct SweepReport {
    RunReport low;   // 44100 Hz
    RunReport high;  // 192000 Hz
    double fraction_lower_stddev = 0.0;  // locations where high-rate TDOA stddev < low-rate
    bool r2_improved = false;
};

inline SweepReport run_sampling_sweep(const ExperimentSpec& spec) {
    detail::check_kind(spec, {ExperimentKind::sampling_sweep});
    SweepReport out;
    ExperimentSpec low = spec;
    low.scenario.detector.sample_rate = 44100;
    ExperimentSpec high = spec;
    high.scenario.detector.sample_rate = 192000;
    out.low = run_linearity_1d(low);
    out.high = run_linearity_1d(high);
    std::size_t compared = 0, better = 0;
    for (std::size_t i = 0; i < out.low.rows.size(); ++i) {
        const double a = out.low.rows[i].tdoa_stddev_s;
        const double b = out.high.rows[i].tdoa_stddev_s;
        if (std::isnan(a) || std::isnan(b)) continue;
        ++compared;
        if (b < a) ++better;
    }
    out.fraction_lower_stddev = compared ? static_cast<double>(better) / compared : 0.0;
    out.r2_improved = out.low.fit_x && out.high.fit_x && out.high.fit_x->r_squared > out.low.fit_x->r_squared;
    return out;
}

struct CalibrationRun {
    CalibrationProfile profile;
    RunReport report;
};

/// Taps along both axes; each axis pair is fitted on its own.
inline CalibrationRun run_calibrate(const ExperimentSpec& spec) {
    detail::check_kind(spec, {ExperimentKind::calibrate});
    const auto t0 = std::chrono::steady_clock::now();
    CalibrationRun out;
    auto& report = out.report;
    report.kind = spec.kind;
    report.sample_rate = spec.scenario.detector.sample_rate;
    report.seed = spec.seed;
    const std::size_t per_axis = spec.positions.size() * static_cast<std::size_t>(spec.repetitions);

    const auto xs = detail::axis_run(spec, Axis::x, 0, report);
    const std::size_t y_first_row = report.rows.size();
    const auto ys = detail::axis_run(spec, Axis::y, per_axis, report);
    report.fit_x = fit_axis(xs, Axis::x);
    report.fit_y = fit_axis(ys, Axis::y);
    detail::fill_axis_rows(report, 0, y_first_row, &*report.fit_x, Axis::x, xs, spec.scenario.layout);
    detail::fill_axis_rows(report, y_first_row, report.rows.size(), &*report.fit_y, Axis::y, ys, spec.scenario.layout);

    for (const auto* fit : {&*report.fit_x, &*report.fit_y})
        if (fit->r_squared < 0.9)
            report.warnings.push_back("calibration quality: R^2 on " + std::string(to_string(fit->axis)) + " is " +
                                      format_number(fit->r_squared));

    out.profile.speed_x_cm_per_s = report.fit_x->speed_cm_per_s;
    out.profile.speed_y_cm_per_s = report.fit_y->speed_cm_per_s;
    out.profile.intercept_x = report.fit_x->intercept_cm;
    out.profile.intercept_y = report.fit_y->intercept_cm;
    out.profile.r2_x = report.fit_x->r_squared;
    out.profile.r2_y = report.fit_y->r_squared;
    out.profile.layout = spec.scenario.layout;
    detail::tally(report);
    report.runtime_s = detail::seconds_since(t0);
    return out;
}

/// Profile carrying the scenario's true speeds (no calibration step).
inline CalibrationProfile exact_profile(const Scenario& sc) {
    CalibrationProfile p;
    p.speed_x_cm_per_s = sc.surface.speed_x;
    p.speed_y_cm_per_s = sc.surface.speed_y;
    p.layout = sc.layout;
    return p;
}

/// Grid taps through detector and solver; Fig.-12-style per-location stats.
inline RunReport run_accuracy_2d(const ExperimentSpec& spec, const CalibrationProfile& profile) {
    detail::check_kind(spec, {ExperimentKind::accuracy_2d});
    const auto t0 = std::chrono::steady_clock::now();
    const auto& sc = spec.scenario;
    const std::size_t reps = static_cast<std::size_t>(spec.repetitions);
    const std::size_t n = spec.positions.size() * reps;

    struct Solved {
        TapOutcome outcome;
        std::optional<TapEstimate> estimate;
        std::string failure;
    };
    std::vector<Solved> solved(n);
    parallel_for(n, sc.threads, [&](std::size_t i) {
        auto& s = solved[i];
        s.outcome = simulate_tap(sc, spec.positions[i / reps], i, spec.seed);
        if (!s.outcome.left_right || !s.outcome.top_bottom) return;
        try {
            s.estimate = locate_tap(*s.outcome.left_right, *s.outcome.top_bottom, profile.speeds(), profile.layout);
            s.estimate->tap_id = i;
        } catch (const Error& e) {
            s.failure = e.what();
        }
    });

    RunReport report;
    report.kind = spec.kind;
    report.sample_rate = sc.detector.sample_rate;
    report.seed = spec.seed;
    std::vector<EstimateGroup> groups;
    std::vector<std::size_t> group_row;
    for (std::size_t loc = 0; loc < spec.positions.size(); ++loc) {
        LocationRow row;
        row.truth = spec.positions[loc];
        row.requested = reps;
        EstimateGroup g{row.truth, {}};
        for (std::size_t r = 0; r < reps; ++r) {
            const std::size_t i = loc * reps + r;
            const auto& s = solved[i];
            for (const auto& w : s.outcome.warnings) report.warnings.push_back(w);
            if (!s.outcome.left_right || !s.outcome.top_bottom) {
                ++row.missed;
                report.warnings.push_back("tap " + std::to_string(i) + " missed on " +
                                          (s.outcome.left_right ? "top_bottom" : "left_right"));
                continue;
            }
            ++row.detected;
            if (!s.estimate) {
                ++row.failed;
                report.warnings.push_back("tap " + std::to_string(i) + " unsolved: " + s.failure);
                continue;
            }
            report.estimates.push_back(*s.estimate);
            g.estimates.push_back(s.estimate->position);
        }
        if (!g.estimates.empty()) {
            groups.push_back(std::move(g));
            group_row.push_back(report.rows.size());
        }
        report.rows.push_back(row);
    }
    if (!groups.empty()) {
        const auto summary = location_stats(groups);
        for (std::size_t k = 0; k < summary.groups.size(); ++k) {
            auto& row = report.rows[group_row[k]];
            const auto& gs = summary.groups[k];
            row.mean_x = gs.mean.x;
            row.mean_y = gs.mean.y;
            row.mae_x = gs.mae_x;
            row.mae_y = gs.mae_y;
            row.stddev_x = gs.stddev_x;
            row.stddev_y = gs.stddev_y;
        }
        report.mae_x = summary.mae_x;
        report.mae_y = summary.mae_y;
    }
    detail::tally(report);
    report.runtime_s = detail::seconds_since(t0);
    return report;
}

inline constexpr std::string_view kReportHeader =
    "sample_rate,x_true_cm,y_true_cm,requested,detected,missed,failed,x_mean_cm,y_mean_cm,x_mae_cm,y_mae_cm,"
    "x_stddev_cm,y_stddev_cm,tdoa_mean_s,tdoa_stddev_s";

/// Per-location rows; empty cells where a quantity does not apply.
inline std::string report_csv(const RunReport& report, bool with_header = true) {
    auto cell = [](double v) { return std::isnan(v) ? std::string() : format_number(v); };
    std::string out = with_header ? std::string(kReportHeader) + "\n" : std::string();
    for (const auto& r : report.rows) {
        out += std::to_string(report.sample_rate) + "," + format_number(r.truth.x) + "," + format_number(r.truth.y) + "," +
               std::to_string(r.requested) + "," + std::to_string(r.detected) + "," + std::to_string(r.missed) + "," +
               std::to_string(r.failed) + "," + cell(r.mean_x) + "," + cell(r.mean_y) + "," + cell(r.mae_x) + "," +
               cell(r.mae_y) + "," + cell(r.stddev_x) + "," + cell(r.stddev_y) + "," + cell(r.tdoa_mean_s) + "," +
               cell(r.tdoa_stddev_s) + "\n";
    }
    return out;
}

inline std::string report_text(const RunReport& report) {
    std::ostringstream os;
    os << "experiment " << to_string(report.kind) << " @ " << report.sample_rate << " Hz, seed " << report.seed << "\n";
    os << "taps requested " << report.requested << ", detected " << report.detected << ", missed " << report.missed
       << ", unsolved " << report.failed << "\n";
    for (const auto* fit : {&report.fit_x, &report.fit_y}) {
        if (!*fit) continue;
        const auto& f = **fit;
        os << "fit " << to_string(f.axis) << ": speed " << format_number(f.speed_cm_per_s) << " cm/s, intercept "
           << format_number(f.intercept_cm) << " cm, R^2 " << format_number(f.r_squared) << " (" << f.sample_count
           << " taps)\n";
    }
    if (!std::isnan(report.mae_x))
        os << "mean abs error: x " << format_number(report.mae_x) << " cm, y " << format_number(report.mae_y) << " cm\n";
    os << "runtime " << format_number(report.runtime_s) << " s\n";
    for (const auto& w : report.warnings) os << "warning: " << w << "\n";
    return os.str();
}

} // namespace alto
