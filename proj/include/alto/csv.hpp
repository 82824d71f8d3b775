#pragma once

// CSV tables exchanged between the CLI verbs.
//
//   observations: pair,tap_id,tdoa_seconds,first_arrival,left_sample_index,right_sample_index
//   estimates:    tap_id,x_cm,y_cm,quadrant,residual_lr,residual_tb,method
//
// For the top/bottom device the left/right index columns hold the top and
// bottom indices (first-listed channel first).

#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "alto/config.hpp"
#include "alto/error.hpp"
#include "alto/geometry.hpp"
#include "alto/signal_pipeline.hpp"

namespace alto {

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::vector<std::vector<std::string>> read_csv_rows(std::string_view text, std::string_view expected_header) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header = true;
    std::size_t line_no = 0;
    const auto width = split_csv_line(expected_header).size();
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        if (header) {
            if (trim(line) != expected_header)
                throw Error(ErrorKind::format, "unexpected CSV header '" + std::string(trim(line)) + "'");
            header = false;
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() != width)
            throw Error(ErrorKind::format, "line " + std::to_string(line_no) + ": expected " + std::to_string(width) + " fields");
        rows.push_back(std::move(fields));
    }
    if (header) throw Error(ErrorKind::format, "missing CSV header");
    return rows;
}

inline constexpr std::string_view kObservationHeader =
    "pair,tap_id,tdoa_seconds,first_arrival,left_sample_index,right_sample_index";
inline constexpr std::string_view kEstimateHeader = "tap_id,x_cm,y_cm,quadrant,residual_lr,residual_tb,method";

inline std::string observations_csv(std::span<const TdoaObservation> observations) {
    std::string out = std::string(kObservationHeader) + "\n";
    for (const auto& raw : observations) {
        const auto o = raw.canonical();
        const auto e = o.earliest();
        out += std::string(to_string(o.pair())) + "," + std::to_string(o.tap_id) + "," + format_number(o.tdoa_seconds) + "," +
               (e ? std::string(to_string(*e)) : "indeterminate") + "," + std::to_string(o.first_sample_index) + "," +
               std::to_string(o.second_sample_index) + "\n";
    }
    return out;
}

inline std::vector<TdoaObservation> parse_observations_csv(std::string_view text, std::uint32_t sample_rate) {
    std::vector<TdoaObservation> out;
    for (const auto& f : read_csv_rows(text, kObservationHeader)) {
        TdoaObservation o;
        const Pair p = parse_pair(f[0]);
        o.first_channel = first_of(p);
        o.second_channel = second_of(p);
        o.tap_id = std::stoul(f[1]);
        o.tdoa_seconds = std::stod(f[2]);
        if (f[3] == "indeterminate") {
            o.first_arrival = Arrival::indeterminate;
        } else {
            const Channel c = parse_channel(f[3]);
            if (pair_of(c) != p) throw Error(ErrorKind::format, "first_arrival " + f[3] + " is not on " + f[0]);
            o.first_arrival = c == o.first_channel ? Arrival::first : Arrival::second;
        }
        o.first_sample_index = std::stoull(f[4]);
        o.second_sample_index = std::stoull(f[5]);
        o.lag_samples = static_cast<std::int64_t>(o.second_sample_index) - static_cast<std::int64_t>(o.first_sample_index);
        o.sample_rate = sample_rate;
        out.push_back(o);
    }
    return out;
}

inline std::string estimates_csv(std::span<const TapEstimate> estimates) {
    std::string out = std::string(kEstimateHeader) + "\n";
    for (const auto& e : estimates) {
        out += std::to_string(e.tap_id) + "," + format_number(e.position.x) + "," + format_number(e.position.y) + "," +
               std::string(e.quadrant.name()) + "," + format_number(e.residual_lr) + "," + format_number(e.residual_tb) +
               "," + std::string(to_string(e.method)) + "\n";
    }
    return out;
}

} // namespace alto
