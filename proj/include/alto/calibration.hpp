#pragma once

// Per-axis propagation speed from taps at known positions.
//
// For each axis the known distance difference (cm) is regressed on the
// measured TDOA (s); the slope is the speed in cm/s.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "alto/config.hpp"
#include "alto/error.hpp"
#include "alto/geometry.hpp"
#include "alto/types.hpp"

namespace alto {

struct CalibrationSample {
    double known_position_cm = 0.0;
    double distance_diff_cm = 0.0;  // d(second) - d(first), same sign as the TDOA
    double tdoa_s = 0.0;
};

struct LocationSpread {
    double position_cm = 0.0;
    std::size_t count = 0;
    double tdoa_mean_s = 0.0;
    double tdoa_stddev_s = 0.0;
};

struct AxisFit {
    Axis axis = Axis::x;
    double speed_cm_per_s = 0.0;
    double intercept_cm = 0.0;
    double r_squared = 0.0;
    std::size_t sample_count = 0;
    std::vector<LocationSpread> per_location;
};

/// Sample standard deviation (n - 1); zero for a single value.
inline double sample_stddev(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

inline AxisFit fit_axis(std::span<const CalibrationSample> samples, Axis axis) {
    if (samples.size() < 2) throw Error(ErrorKind::singular_fit, "need at least two samples");
    const auto n = static_cast<double>(samples.size());
    double mt = 0.0;
    double md = 0.0;
    for (const auto& s : samples) {
        mt += s.tdoa_s;
        md += s.distance_diff_cm;
    }
    mt /= n;
    md /= n;
    double stt = 0.0;
    double std_ = 0.0;
    double sdd = 0.0;
    for (const auto& s : samples) {
        const double dt = s.tdoa_s - mt;
        const double dd = s.distance_diff_cm - md;
        stt += dt * dt;
        std_ += dt * dd;
        sdd += dd * dd;
    }
    if (sdd == 0.0) throw Error(ErrorKind::usage, "need at least two distinct distance differences");
    if (stt == 0.0) throw Error(ErrorKind::singular_fit, "all TDOA values are identical");

    AxisFit fit;
    fit.axis = axis;
    fit.sample_count = samples.size();
    fit.speed_cm_per_s = std_ / stt;
    fit.intercept_cm = md - fit.speed_cm_per_s * mt;
    fit.r_squared = std::clamp(std_ * std_ / (stt * sdd), 0.0, 1.0);

    std::map<double, std::vector<double>> groups;
    for (const auto& s : samples) groups[s.known_position_cm].push_back(s.tdoa_s);
    for (const auto& [pos, tdoas] : groups) {
        LocationSpread spread;
        spread.position_cm = pos;
        spread.count = tdoas.size();
        for (double t : tdoas) spread.tdoa_mean_s += t;
        spread.tdoa_mean_s /= static_cast<double>(tdoas.size());
        spread.tdoa_stddev_s = sample_stddev(tdoas);
        fit.per_location.push_back(spread);
    }
    return fit;
}

struct OneDPosition {
    double position_cm = 0.0;
    bool out_of_range = false;
};

/// Position along the line between a pair from a signed TDOA.
///
/// The fitted line gives d(second) - d(first) = speed * tdoa + intercept, and
/// on the pair axis that difference is -2 * (offset from the midpoint toward
/// the second sensor). `origin_offset` is the coordinate of the midpoint in
/// the caller's frame.
inline OneDPosition one_d_position(double tdoa_s, const AxisFit& fit, double origin_offset, double half_sep) {
    if (!(fit.speed_cm_per_s > 0.0)) throw Error(ErrorKind::usage, "fit has no valid speed");
    OneDPosition out;
    const double along = -(fit.speed_cm_per_s * tdoa_s + fit.intercept_cm) / 2.0;
    out.position_cm = origin_offset + along;
    out.out_of_range = std::abs(along) > 1.1 * half_sep;
    return out;
}

struct EstimateGroup {
    Point truth;
    std::vector<Point> estimates;
};

struct GroupStats {
    Point truth;
    std::size_t count = 0;
    Point mean;
    double mae_x = 0.0;
    double mae_y = 0.0;
    double stddev_x = 0.0;
    double stddev_y = 0.0;
};

struct LocationSummary {
    std::vector<GroupStats> groups;
    std::size_t estimate_count = 0;
    double mae_x = 0.0;  // over all estimates
    double mae_y = 0.0;
};

inline LocationSummary location_stats(std::span<const EstimateGroup> groups) {
    if (groups.empty()) throw Error(ErrorKind::usage, "location_stats needs at least one group");
    LocationSummary out;
    for (const auto& g : groups) {
        if (g.estimates.empty()) throw Error(ErrorKind::usage, "every group needs at least one estimate");
        GroupStats s;
        s.truth = g.truth;
        s.count = g.estimates.size();
        std::vector<double> xs;
        std::vector<double> ys;
        for (const auto& e : g.estimates) {
            xs.push_back(e.x);
            ys.push_back(e.y);
            s.mean.x += e.x;
            s.mean.y += e.y;
            s.mae_x += std::abs(e.x - g.truth.x);
            s.mae_y += std::abs(e.y - g.truth.y);
        }
        out.mae_x += s.mae_x;
        out.mae_y += s.mae_y;
        const auto n = static_cast<double>(s.count);
        s.mean.x /= n;
        s.mean.y /= n;
        s.mae_x /= n;
        s.mae_y /= n;
        s.stddev_x = sample_stddev(xs);
        s.stddev_y = sample_stddev(ys);
        out.estimate_count += s.count;
        out.groups.push_back(s);
    }
    out.mae_x /= static_cast<double>(out.estimate_count);
    out.mae_y /= static_cast<double>(out.estimate_count);
    return out;
}

/// Calibration result shared between runs.
struct CalibrationProfile {
    double speed_x_cm_per_s = 45014.0;
    double speed_y_cm_per_s = 37259.0;
    double intercept_x = 0.0;
    double intercept_y = 0.0;
    double r2_x = 1.0;
    double r2_y = 1.0;
    SensorLayout layout;

    AxisSpeeds speeds() const { return {speed_x_cm_per_s, speed_y_cm_per_s}; }
};

inline std::string format_profile(const CalibrationProfile& p) {
    std::string out;
    auto line = [&](const char* key, double v) { out += std::string(key) + " = " + format_number(v) + "\n"; };
    line("speed_x_cm_per_s", p.speed_x_cm_per_s);
    line("speed_y_cm_per_s", p.speed_y_cm_per_s);
    line("intercept_x", p.intercept_x);
    line("intercept_y", p.intercept_y);
    line("r2_x", p.r2_x);
    line("r2_y", p.r2_y);
    line("layout.half_sep_x", p.layout.half_sep_x);
    line("layout.half_sep_y", p.layout.half_sep_y);
    return out;
}

inline CalibrationProfile parse_profile(const KeyValues& kv) {
    kv.require_known({"speed_x_cm_per_s", "speed_y_cm_per_s", "intercept_x", "intercept_y", "r2_x", "r2_y",
                      "layout.half_sep_x", "layout.half_sep_y"});
    CalibrationProfile p;
    p.speed_x_cm_per_s = kv.require_double("speed_x_cm_per_s");
    p.speed_y_cm_per_s = kv.require_double("speed_y_cm_per_s");
    p.intercept_x = kv.get_double("intercept_x", 0.0);
    p.intercept_y = kv.get_double("intercept_y", 0.0);
    p.r2_x = kv.get_double("r2_x", 1.0);
    p.r2_y = kv.get_double("r2_y", 1.0);
    p.layout.half_sep_x = kv.require_double("layout.half_sep_x");
    p.layout.half_sep_y = kv.require_double("layout.half_sep_y");
    p.layout.validate();
    if (!(p.speed_x_cm_per_s > 0.0) || !(p.speed_y_cm_per_s > 0.0))
        throw Error(ErrorKind::config, "profile speeds must be positive");
    return p;
}

inline void write_profile(const CalibrationProfile& p, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
    out << format_profile(p);
    if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

inline CalibrationProfile read_profile(const std::filesystem::path& path) {
    return parse_profile(KeyValues::load(path));
}

} // namespace alto
