#pragma once

// Tap onset detection on chunked two-channel streams and per-pair time
// difference extraction. Each device (pair) is processed as an independent
// sequential stream; nothing here compares indices across devices.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "alto/error.hpp"
#include "alto/types.hpp"

namespace alto {

inline constexpr bool is_supported_rate(std::uint32_t rate) {
    return rate == 44100 || rate == 48000 || rate == 96000 || rate == 192000;
}

struct SampleChunk {
    Channel channel = Channel::left;
    std::vector<std::int16_t> samples;
    std::uint64_t chunk_index = 0;
    std::uint32_t sample_rate = 192000;

    friend bool operator==(const SampleChunk&, const SampleChunk&) = default;
};

// One read from a device: both channels of the pair, canonical order
// (first = left/top, second = right/bottom).
struct ChunkPair {
    SampleChunk first;
    SampleChunk second;

    Pair pair() const { return pair_of(first.channel); }
    friend bool operator==(const ChunkPair&, const ChunkPair&) = default;
};

struct DetectorConfig {
    int detect_threshold = 1000;
    int onset_threshold = 500;
    int debounce_chunks = 5;
    std::size_t chunk_size = 8192;
    std::uint32_t sample_rate = 192000;

    void validate() const {
        if (detect_threshold <= 0 || detect_threshold > 32767)
            throw Error(ErrorKind::config, "detect_threshold must be in (0, 32767]");
        if (onset_threshold <= 0 || onset_threshold > 32767)
            throw Error(ErrorKind::config, "onset_threshold must be in (0, 32767]");
        if (onset_threshold > detect_threshold)
            throw Error(ErrorKind::config, "onset_threshold must not exceed detect_threshold");
        if (debounce_chunks < 0) throw Error(ErrorKind::config, "debounce_chunks must be >= 0");
        if (chunk_size == 0) throw Error(ErrorKind::config, "chunk_size must be positive");
        if (!is_supported_rate(sample_rate))
            throw Error(ErrorKind::config,
                        "sample_rate must be one of 44100, 48000, 96000, 192000");
    }
};

struct OnsetEvent {
    Channel channel = Channel::left;
    std::uint64_t global_sample_index = 0;
    std::uint32_t sample_rate = 192000;

    double onset_time() const {
        return static_cast<double>(global_sample_index) / static_cast<double>(sample_rate);
    }
};

inline OnsetEvent make_onset(Channel channel, std::uint64_t chunk_index, std::size_t in_chunk,
                             std::size_t chunk_size, std::uint32_t sample_rate) {
    return {channel, chunk_index * chunk_size + in_chunk, sample_rate};
}

enum class Arrival { first, second, indeterminate };

/// Signed time difference for one sensor pair.
///
/// `tdoa_seconds = t(second) - t(first)`, so a positive value means the first
/// channel heard the tap first. Observations coming out of the detector are in
/// canonical order (left/right, top/bottom); `pair_tdoa` keeps argument order.
struct TdoaObservation {
    Channel first_channel = Channel::left;
    Channel second_channel = Channel::right;
    double tdoa_seconds = 0.0;
    std::int64_t lag_samples = 0;  // second index minus first index
    Arrival first_arrival = Arrival::indeterminate;
    std::uint64_t first_sample_index = 0;
    std::uint64_t second_sample_index = 0;
    std::uint32_t sample_rate = 192000;
    std::size_t tap_id = 0;

    Pair pair() const { return pair_of(first_channel); }

    std::optional<Channel> earliest() const {
        switch (first_arrival) {
            case Arrival::first: return first_channel;
            case Arrival::second: return second_channel;
            case Arrival::indeterminate: break;
        }
        return std::nullopt;
    }

    TdoaObservation swapped() const {
        TdoaObservation o = *this;
        std::swap(o.first_channel, o.second_channel);
        std::swap(o.first_sample_index, o.second_sample_index);
        o.tdoa_seconds = -tdoa_seconds;
        o.lag_samples = -lag_samples;
        if (first_arrival == Arrival::first) o.first_arrival = Arrival::second;
        else if (first_arrival == Arrival::second) o.first_arrival = Arrival::first;
        return o;
    }

    TdoaObservation canonical() const {
        return first_channel == first_of(pair()) ? *this : swapped();
    }
};

/// |tdoa| cannot exceed the pair separation divided by the propagation speed.
inline bool is_feasible(const TdoaObservation& obs, double pair_separation_cm,
                        double speed_cm_per_s) {
    return std::abs(obs.tdoa_seconds) <= pair_separation_cm / speed_cm_per_s;
}

/// First index whose absolute amplitude reaches `threshold`.
inline std::optional<std::size_t> detect_onset(std::span<const std::int16_t> samples,
                                               int threshold) {
    if (threshold <= 0) throw Error(ErrorKind::usage, "detect threshold must be positive");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (std::abs(static_cast<int>(samples[i])) >= threshold) return i;
    }
    return std::nullopt;
}

inline std::optional<std::size_t> detect_onset(const SampleChunk& chunk, int threshold) {
    return detect_onset(std::span<const std::int16_t>(chunk.samples), threshold);
}

/// Locates the onset at the lower threshold once a detection is known.
/// The result never exceeds `coarse_index`.
inline std::size_t refine_onset(std::span<const std::int16_t> samples, std::size_t coarse_index,
                                int onset_threshold) {
    if (onset_threshold <= 0) throw Error(ErrorKind::usage, "onset threshold must be positive");
    const std::size_t end = std::min(coarse_index + 1, samples.size());
    for (std::size_t i = 0; i < end; ++i) {
        if (std::abs(static_cast<int>(samples[i])) >= onset_threshold) return i;
    }
    throw Error(ErrorKind::internal_inconsistency,
                "no sample at or before index " + std::to_string(coarse_index) +
                    " crosses the onset threshold");
}

inline std::size_t refine_onset(const SampleChunk& chunk, std::size_t coarse_index,
                                int onset_threshold) {
    return refine_onset(std::span<const std::int16_t>(chunk.samples), coarse_index,
                        onset_threshold);
}

inline TdoaObservation pair_tdoa(const OnsetEvent& a, const OnsetEvent& b) {
    if (a.channel == b.channel)
        throw Error(ErrorKind::usage, "pair_tdoa needs two different channels, got " +
                                          std::string(to_string(a.channel)) + " twice");
    if (pair_of(a.channel) != pair_of(b.channel))
        throw Error(ErrorKind::cross_device,
                    std::string(to_string(a.channel)) + " and " +
                        std::string(to_string(b.channel)) +
                        " are on different devices; their clocks are unrelated");
    if (a.sample_rate != b.sample_rate)
        throw Error(ErrorKind::usage, "onset events carry different sample rates");

    TdoaObservation obs;
    obs.first_channel = a.channel;
    obs.second_channel = b.channel;
    obs.first_sample_index = a.global_sample_index;
    obs.second_sample_index = b.global_sample_index;
    obs.sample_rate = a.sample_rate;
    obs.lag_samples = static_cast<std::int64_t>(b.global_sample_index) -
                      static_cast<std::int64_t>(a.global_sample_index);
    obs.tdoa_seconds = static_cast<double>(obs.lag_samples) / static_cast<double>(a.sample_rate);
    obs.first_arrival = obs.lag_samples > 0   ? Arrival::first
                        : obs.lag_samples < 0 ? Arrival::second
                                              : Arrival::indeterminate;
    return obs;
}

/// Streaming detector for one device.
///
/// A tap is emitted once both channels have crossed the detect threshold in
/// the same or adjacent chunks. After an emission the next `debounce_chunks`
/// chunks are skipped; a one-sided onset is dropped when its window lapses.
class PairDetector {
public:
    PairDetector(Pair pair, DetectorConfig config) : pair_(pair), config_(config) {
        config_.validate();
    }

    Pair pair() const { return pair_; }

    std::optional<TdoaObservation> push(const ChunkPair& chunk) {
        check(chunk);
        const std::uint64_t index = chunk.first.chunk_index;
        expected_ = index + 1;
        if (chunk.first.samples.size() < config_.chunk_size) saw_short_ = true;

        std::optional<TdoaObservation> out;
        if (suppress_ > 0) {
            --suppress_;
        } else {
            for (auto* p : {&pending_first_, &pending_second_}) {
                if (*p && p->value().chunk_index + 1 < index) p->reset();
            }
            scan(chunk.first, previous_first_, pending_first_);
            scan(chunk.second, previous_second_, pending_second_);
            if (pending_first_ && pending_second_) {
                const OnsetEvent a{first_of(pair_), pending_first_->global_index,
                                   config_.sample_rate};
                const OnsetEvent b{second_of(pair_), pending_second_->global_index,
                                   config_.sample_rate};
                TdoaObservation obs = pair_tdoa(a, b);
                obs.tap_id = emitted_++;
                pending_first_.reset();
                pending_second_.reset();
                suppress_ = config_.debounce_chunks;
                out = obs;
            }
        }
        previous_first_ = chunk.first.samples;
        previous_second_ = chunk.second.samples;
        return out;
    }

    std::size_t emitted() const { return emitted_; }

private:
    struct Pending {
        std::uint64_t global_index;
        std::uint64_t chunk_index;
    };

    void check(const ChunkPair& c) const {
        if (c.first.channel != first_of(pair_) || c.second.channel != second_of(pair_))
            throw Error(ErrorKind::usage, "chunk channels do not match the " +
                                              std::string(to_string(pair_)) + " device");
        if (c.first.chunk_index != c.second.chunk_index ||
            c.first.samples.size() != c.second.samples.size())
            throw Error(ErrorKind::stream_integrity, "channels of one read disagree");
        if (c.first.sample_rate != config_.sample_rate ||
            c.second.sample_rate != config_.sample_rate)
            throw Error(ErrorKind::usage, "chunk sample rate differs from detector config");
        if (c.first.samples.size() > config_.chunk_size)
            throw Error(ErrorKind::stream_integrity, "chunk longer than configured chunk_size");
        if (saw_short_)
            throw Error(ErrorKind::stream_integrity, "chunk after a short final chunk");
        if (expected_ && c.first.chunk_index != *expected_)
            throw Error(ErrorKind::stream_integrity,
                        "chunk_index " + std::to_string(c.first.chunk_index) +
                            " out of order, expected " + std::to_string(*expected_));
    }

    void scan(const SampleChunk& chunk, const std::vector<std::int16_t>& previous,
              std::optional<Pending>& pending) const {
        if (pending) return;
        const auto hit = detect_onset(chunk, config_.detect_threshold);
        if (!hit) return;
        const std::size_t onset = refine_onset(chunk, *hit, config_.onset_threshold);
        std::uint64_t global = chunk.chunk_index * config_.chunk_size + onset;
        // Rise that started at the end of the previous read.
        if (onset == 0 && chunk.chunk_index > 0) {
            std::size_t run = 0;
            while (run < previous.size() &&
                   std::abs(static_cast<int>(previous[previous.size() - 1 - run])) >=
                       config_.onset_threshold)
                ++run;
            global -= run;
        }
        pending = Pending{global, chunk.chunk_index};
    }

    Pair pair_;
    DetectorConfig config_;
    std::optional<std::uint64_t> expected_;
    std::optional<Pending> pending_first_;
    std::optional<Pending> pending_second_;
    std::vector<std::int16_t> previous_first_;
    std::vector<std::int16_t> previous_second_;
    int suppress_ = 0;
    bool saw_short_ = false;
    std::size_t emitted_ = 0;
};

inline std::vector<TdoaObservation> run_detector(std::span<const ChunkPair> stream,
                                                 const DetectorConfig& config) {
    std::vector<TdoaObservation> out;
    if (stream.empty()) return out;
    PairDetector detector(stream.front().pair(), config);
    for (const auto& chunk : stream) {
        if (auto obs = detector.push(chunk)) out.push_back(*obs);
    }
    return out;
}

struct DeviceObservations {
    std::vector<TdoaObservation> left_right;
    std::vector<TdoaObservation> top_bottom;
};

/// Single-threaded driver alternating reads between the two devices, the way
/// a capture loop would. Output equals running each device on its own.
inline DeviceObservations run_interleaved(std::span<const ChunkPair> left_right,
                                          std::span<const ChunkPair> top_bottom,
                                          const DetectorConfig& config) {
    DeviceObservations out;
    PairDetector lr(Pair::left_right, config);
    PairDetector tb(Pair::top_bottom, config);
    const std::size_t n = std::max(left_right.size(), top_bottom.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (i < left_right.size())
            if (auto o = lr.push(left_right[i])) out.left_right.push_back(*o);
        if (i < top_bottom.size())
            if (auto o = tb.push(top_bottom[i])) out.top_bottom.push_back(*o);
    }
    return out;
}

} // namespace alto
