#pragma once

// Raw PCM files: interleaved signed 16-bit little-endian, two channels,
// laid out [ch0-val1, ch1-val1, ch0-val2, ch1-val2, ...].

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "alto/error.hpp"
#include "alto/signal_pipeline.hpp"
#include "alto/types.hpp"

namespace alto {

// Which sensor sits on file channel 0 and which on channel 1.
struct ChannelMap {
    Channel channel0 = Channel::left;
    Channel channel1 = Channel::right;

    static ChannelMap canonical(Pair p) { return {first_of(p), second_of(p)}; }

    void validate() const {
        if (channel0 == channel1 || pair_of(channel0) != pair_of(channel1))
            throw Error(ErrorKind::usage,
                        "channel map must name the two sensors of one device");
    }
};

inline std::vector<ChunkPair> decode_pcm(std::span<const std::uint8_t> bytes, ChannelMap map,
                                         std::uint32_t sample_rate, std::size_t chunk_size) {
    map.validate();
    if (chunk_size == 0) throw Error(ErrorKind::usage, "chunk_size must be positive");
    if (bytes.size() % 2 != 0)
        throw Error(ErrorKind::format, "odd byte count; dangling byte at offset " +
                                           std::to_string(bytes.size() - 1));
    if (bytes.size() % 4 != 0)
        throw Error(ErrorKind::format, "truncated frame at byte offset " +
                                           std::to_string(bytes.size() - bytes.size() % 4));

    const std::size_t frames = bytes.size() / 4;
    const bool swap = map.channel0 != first_of(pair_of(map.channel0));
    std::vector<ChunkPair> out;
    out.reserve((frames + chunk_size - 1) / chunk_size);
    auto sample_at = [&](std::size_t offset) {
        return static_cast<std::int16_t>(static_cast<std::uint16_t>(bytes[offset]) |
                                         (static_cast<std::uint16_t>(bytes[offset + 1]) << 8));
    };
    for (std::size_t start = 0, index = 0; start < frames; start += chunk_size, ++index) {
        const std::size_t n = std::min(chunk_size, frames - start);
        ChunkPair cp;
        cp.first = {map.channel0, {}, index, sample_rate};
        cp.second = {map.channel1, {}, index, sample_rate};
        cp.first.samples.resize(n);
        cp.second.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t offset = (start + i) * 4;
            cp.first.samples[i] = sample_at(offset);
            cp.second.samples[i] = sample_at(offset + 2);
        }
        if (swap) std::swap(cp.first, cp.second);
        out.push_back(std::move(cp));
    }
    return out;
}

inline std::vector<ChunkPair> ingest_pcm_file(const std::filesystem::path& path, ChannelMap map,
                                              std::uint32_t sample_rate, std::size_t chunk_size) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                          std::istreambuf_iterator<char>());
    return decode_pcm(bytes, map, sample_rate, chunk_size);
}

inline std::vector<std::uint8_t> encode_pcm(std::span<const ChunkPair> stream, ChannelMap map) {
    map.validate();
    std::vector<std::uint8_t> out;
    for (const auto& cp : stream) {
        const bool swap = cp.first.channel != map.channel0;
        const auto& c0 = swap ? cp.second : cp.first;
        const auto& c1 = swap ? cp.first : cp.second;
        if (c0.channel != map.channel0 || c1.channel != map.channel1)
            throw Error(ErrorKind::usage, "stream channels do not match the channel map");
        for (std::size_t i = 0; i < c0.samples.size(); ++i) {
            for (std::int16_t v : {c0.samples[i], c1.samples[i]}) {
                const auto u = static_cast<std::uint16_t>(v);
                out.push_back(static_cast<std::uint8_t>(u & 0xff));
                out.push_back(static_cast<std::uint8_t>(u >> 8));
            }
        }
    }
    return out;
}

inline void export_pcm(std::span<const ChunkPair> stream, const std::filesystem::path& path,
                       ChannelMap map) {
    const auto bytes = encode_pcm(stream, map);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

} // namespace alto
