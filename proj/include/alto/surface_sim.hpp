#pragma once

// Forward model of a tap on an anisotropic board, rendered into the same
// per-device chunk streams the detector consumes. Stands in for the physical
// piezo prototype.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "alto/config.hpp"
#include "alto/error.hpp"
#include "alto/geometry.hpp"
#include "alto/signal_pipeline.hpp"
#include "alto/types.hpp"

namespace alto {

/// splitmix64 finalizer; derives independent stream seeds from (seed, index).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct SurfaceModel {
    double speed_x = 45014.0;  // cm/s
    double speed_y = 37259.0;  // cm/s
    double noise_stddev = 30.0;
    double peak_amplitude = 12000.0;
    double attenuation_per_cm = 0.01;
    int rise_samples = 8;
    double decay_samples = 200.0;
    double onset_jitter_samples = 2.0;
    // Optional per-region speeds, e.g. for sensitivity studies of a slower
    // patch of the board. Evaluated at the tap position.
    std::function<AxisSpeeds(Point)> speed_override;

    void validate(int detect_threshold) const {
        if (!(speed_x > 0.0) || !(speed_y > 0.0)) throw Error(ErrorKind::config, "surface speeds must be positive");
        if (!(peak_amplitude > detect_threshold) || peak_amplitude > 32767.0)
            throw Error(ErrorKind::config, "peak_amplitude must be in (detect_threshold, 32767]");
        if (!(attenuation_per_cm >= 0.0) || attenuation_per_cm >= 1.0)
            throw Error(ErrorKind::config, "attenuation_per_cm must be in [0, 1)");
        if (rise_samples < 1) throw Error(ErrorKind::config, "rise_samples must be >= 1");
        if (!(decay_samples > 0.0)) throw Error(ErrorKind::config, "decay_samples must be positive");
        if (!(noise_stddev >= 0.0) || !(onset_jitter_samples >= 0.0))
            throw Error(ErrorKind::config, "noise and jitter must be non-negative");
    }

    AxisSpeeds speeds_at(Point tap) const {
        return speed_override ? speed_override(tap) : AxisSpeeds{speed_x, speed_y};
    }
};

/// Seconds from tap to each sensor, indexed by Channel.
using ArrivalTimes = std::array<double, 4>;

inline double& at(ArrivalTimes& t, Channel c) { return t[static_cast<std::size_t>(c)]; }
inline double at(const ArrivalTimes& t, Channel c) { return t[static_cast<std::size_t>(c)]; }

/// Travel time √((Δx/vx)² + (Δy/vy)²); Euclidean distance / speed when the
/// two speeds agree.
inline ArrivalTimes arrival_times(Point tap, const SensorLayout& layout, const SurfaceModel& surface) {
    const AxisSpeeds v = surface.speeds_at(tap);
    ArrivalTimes t{};
    for (Channel c : {Channel::left, Channel::right, Channel::top, Channel::bottom}) {
        const Point s = layout.sensor(c);
        at(t, c) = std::hypot((tap.x - s.x) / v.x, (tap.y - s.y) / v.y);
    }
    return t;
}

struct SimulatedTap {
    std::size_t tap_id = 0;
    Point position;
    double emit_time_s = 0.0;
    ArrivalTimes arrival_times{};
    // Where each device's sample clock stands relative to the ideal clock,
    // indexed by Pair. The two devices are unrelated.
    std::array<double, 2> device_start_offsets{};
};

inline SimulatedTap make_tap(std::size_t id, Point position, double emit_time_s,
                             std::array<double, 2> device_start_offsets, const SensorLayout& layout,
                             const SurfaceModel& surface) {
    return {id, position, emit_time_s, arrival_times(position, layout, surface), device_start_offsets};
}

struct InjectedEvent {
    std::size_t tap_id = 0;
    Point position;
    Channel sensor = Channel::left;
    std::int64_t injected_sample_index = 0;
    double peak = 0.0;
};

struct SynthesisResult {
    std::vector<ChunkPair> left_right;
    std::vector<ChunkPair> top_bottom;
    std::vector<InjectedEvent> events;
    std::vector<std::string> warnings;

    const std::vector<ChunkPair>& stream(Pair p) const { return p == Pair::left_right ? left_right : top_bottom; }
};

namespace detail {

// Linear rise over rise_samples to the peak, then exponential decay.
inline void add_impulse(std::vector<double>& buffer, std::int64_t start, double peak, const SurfaceModel& s) {
    const auto n = static_cast<std::int64_t>(buffer.size());
    for (std::int64_t k = 0;; ++k) {
        double v = 0.0;
        if (k < s.rise_samples) {
            v = peak * static_cast<double>(k + 1) / s.rise_samples;
        } else {
            v = peak * std::exp(-static_cast<double>(k - s.rise_samples + 1) / s.decay_samples);
            if (v < 0.5) break;
        }
        const std::int64_t i = start + k;
        if (i >= n) break;
        if (i >= 0) buffer[static_cast<std::size_t>(i)] += v;
    }
}

inline std::vector<ChunkPair> chunk_device(Pair pair, const std::vector<double>& first,
                                           const std::vector<double>& second, const DetectorConfig& cfg) {
    auto quantize = [](double v) {
        return static_cast<std::int16_t>(std::clamp(std::round(v), -32768.0, 32767.0));
    };
    std::vector<ChunkPair> out;
    for (std::size_t start = 0, index = 0; start < first.size(); start += cfg.chunk_size, ++index) {
        const std::size_t n = std::min(cfg.chunk_size, first.size() - start);
        ChunkPair cp;
        cp.first = {first_of(pair), std::vector<std::int16_t>(n), index, cfg.sample_rate};
        cp.second = {second_of(pair), std::vector<std::int16_t>(n), index, cfg.sample_rate};
        for (std::size_t i = 0; i < n; ++i) {
            cp.first.samples[i] = quantize(first[start + i]);
            cp.second.samples[i] = quantize(second[start + i]);
        }
        out.push_back(std::move(cp));
    }
    return out;
}

} // namespace detail

/// Renders taps into both devices' chunk streams (`chunk_count` chunks each)
/// and logs the exact injected onset index of every impulse.
inline SynthesisResult synthesize(std::span<const SimulatedTap> taps, const SurfaceModel& surface,
                                  const SensorLayout& layout, const DetectorConfig& cfg, std::size_t chunk_count,
                                  std::uint64_t seed) {
    cfg.validate();
    layout.validate();
    surface.validate(cfg.detect_threshold);
    const std::size_t total = chunk_count * cfg.chunk_size;
    const double rate = cfg.sample_rate;
    constexpr std::array<Channel, 4> channels{Channel::left, Channel::right, Channel::top, Channel::bottom};

    std::array<std::vector<double>, 4> buffers;
    for (std::size_t c = 0; c < 4; ++c) {
        buffers[c].assign(total, 0.0);
        if (surface.noise_stddev > 0.0) {
            std::mt19937_64 rng(mix_seed(seed, c));
            std::normal_distribution<double> noise(0.0, surface.noise_stddev);
            for (double& v : buffers[c]) v = noise(rng);
        }
    }

    SynthesisResult out;
    std::mt19937_64 jitter_rng(mix_seed(seed, 0x6a177e5));
    std::normal_distribution<double> jitter(0.0, 1.0);
    for (const auto& tap : taps) {
        for (Channel c : channels) {
            const std::size_t device = static_cast<std::size_t>(pair_of(c));
            const double j = surface.onset_jitter_samples > 0.0 ? surface.onset_jitter_samples * jitter(jitter_rng) : 0.0;
            const auto index = static_cast<std::int64_t>(
                std::llround((tap.emit_time_s + at(tap.arrival_times, c)) * rate + tap.device_start_offsets[device] * rate + j));
            if (index < 0 || index >= static_cast<std::int64_t>(total))
                throw Error(ErrorKind::usage, "tap " + std::to_string(tap.tap_id) + " arrives outside the " +
                                                  std::to_string(total) + "-sample stream");
            const double dist = distance(tap.position, layout.sensor(c));
            const double peak = surface.peak_amplitude * std::pow(1.0 - surface.attenuation_per_cm, dist);
            if (peak < cfg.detect_threshold)
                out.warnings.push_back("tap " + std::to_string(tap.tap_id) + ": " + std::string(to_string(c)) +
                                       " peak " + format_number(peak) + " below detect threshold");
            detail::add_impulse(buffers[static_cast<std::size_t>(c)], index, peak, surface);
            out.events.push_back({tap.tap_id, tap.position, c, index, peak});
        }
    }

    out.left_right = detail::chunk_device(Pair::left_right, buffers[0], buffers[1], cfg);
    out.top_bottom = detail::chunk_device(Pair::top_bottom, buffers[2], buffers[3], cfg);
    return out;
}

inline std::string events_csv(std::span<const InjectedEvent> events) {
    std::string out = "tap_id,x_cm,y_cm,sensor,injected_sample_index\n";
    for (const auto& e : events) {
        out += std::to_string(e.tap_id) + "," + format_number(e.position.x) + "," + format_number(e.position.y) + "," +
               std::string(to_string(e.sensor)) + "," + std::to_string(e.injected_sample_index) + "\n";
    }
    return out;
}

} // namespace alto
