#pragma once

// Pseudo-range multilateration on the four-sensor cross.
//
// Sensors sit at (±sx, 0) and (0, ±sy). A pair's distance difference Δ
// confines the tap to one branch of a hyperbola with the two sensors as foci
// and vertex at |Δ|/2 from the origin. Intersecting the left/right and
// top/bottom hyperbolas gives four mirror-image points; the pair that heard
// the tap first on each axis selects one.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>

#include "alto/error.hpp"
#include "alto/signal_pipeline.hpp"
#include "alto/types.hpp"

namespace alto {

enum class Axis { x, y };

constexpr std::string_view to_string(Axis a) { return a == Axis::x ? "x" : "y"; }

struct SensorLayout {
    double half_sep_x = 26.0;
    double half_sep_y = 26.0;

    void validate() const {
        if (!(half_sep_x > 0.0) || !(half_sep_y > 0.0))
            throw Error(ErrorKind::config, "sensor half-separations must be positive");
    }

    double half_sep(Pair p) const { return p == Pair::left_right ? half_sep_x : half_sep_y; }

    Point sensor(Channel c) const {
        switch (c) {
            case Channel::left: return {-half_sep_x, 0.0};
            case Channel::right: return {half_sep_x, 0.0};
            case Channel::top: return {0.0, half_sep_y};
            case Channel::bottom: return {0.0, -half_sep_y};
        }
        return {};
    }
};

/// Number of distinct sensor pairs (hyperbolas) available from n sensors.
inline std::size_t enumerate_pairs(std::size_t n) {
    if (n < 2) throw Error(ErrorKind::usage, "need at least two sensors");
    return n * (n - 1) / 2;
}

/// d(second) - d(first) for the pair, e.g. d_right - d_left.
inline double distance_difference(Point p, Pair pair, const SensorLayout& layout) {
    return distance(p, layout.sensor(second_of(pair))) - distance(p, layout.sensor(first_of(pair)));
}

struct DeltaDistance {
    Pair pair = Pair::left_right;
    double delta_cm = 0.0;  // d(second) - d(first)
};

inline DeltaDistance delta_from_tdoa(const TdoaObservation& obs, double speed_cm_per_s,
                                     const SensorLayout& layout) {
    if (!(speed_cm_per_s > 0.0)) throw Error(ErrorKind::usage, "speed must be positive");
    const TdoaObservation c = obs.canonical();
    const DeltaDistance d{c.pair(), c.tdoa_seconds * speed_cm_per_s};
    const double limit = 2.0 * layout.half_sep(d.pair);
    if (std::abs(d.delta_cm) > limit)
        throw Error(ErrorKind::infeasible_observation,
                    "|delta| = " + std::to_string(std::abs(d.delta_cm)) + " cm exceeds pair separation " +
                        std::to_string(limit) + " cm");
    return d;
}

/// Sign of the solution on each axis; 0 means the tap lies on that axis.
struct QuadrantHint {
    int x_sign = 0;
    int y_sign = 0;

    friend bool operator==(const QuadrantHint&, const QuadrantHint&) = default;

    std::string_view name() const {
        if (x_sign > 0 && y_sign > 0) return "I";
        if (x_sign < 0 && y_sign > 0) return "II";
        if (x_sign < 0 && y_sign < 0) return "III";
        if (x_sign > 0 && y_sign < 0) return "IV";
        if (x_sign > 0) return "+x";
        if (x_sign < 0) return "-x";
        if (y_sign > 0) return "+y";
        if (y_sign < 0) return "-y";
        return "origin";
    }
};

inline QuadrantHint parse_quadrant(std::string_view s) {
    for (int x = -1; x <= 1; ++x)
        for (int y = -1; y <= 1; ++y)
            if (QuadrantHint{x, y}.name() == s) return {x, y};
    throw Error(ErrorKind::format, "unknown quadrant '" + std::string(s) + "'");
}

/// The tap is on the side of whichever sensor of each pair fired first.
inline QuadrantHint resolve_quadrant(const TdoaObservation& lr, const TdoaObservation& tb) {
    if (lr.pair() != Pair::left_right || tb.pair() != Pair::top_bottom)
        throw Error(ErrorKind::usage, "resolve_quadrant expects (left_right, top_bottom)");
    QuadrantHint h;
    if (auto e = lr.earliest()) h.x_sign = *e == Channel::right ? 1 : -1;
    if (auto e = tb.earliest()) h.y_sign = *e == Channel::top ? 1 : -1;
    return h;
}

/// Signed vertex coordinates of the two hyperbolas: `a` on the x-axis
/// (left/right pair, a > 0 on the right sensor's side), `b` on the y-axis
/// (top/bottom pair, b > 0 on the top sensor's side).
struct HyperbolaIntercepts {
    double a = 0.0;
    double b = 0.0;
    QuadrantHint hint;
};

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

inline HyperbolaIntercepts intercepts_from_deltas(const DeltaDistance& lr, const DeltaDistance& tb,
                                                  QuadrantHint hint) {
    if (lr.pair != Pair::left_right || tb.pair != Pair::top_bottom)
        throw Error(ErrorKind::usage, "intercepts_from_deltas expects (left_right, top_bottom)");
    // d_right - d_left is negative on the right side; d_bottom - d_top is
    // positive on the top side.
    return {-lr.delta_cm / 2.0, tb.delta_cm / 2.0, hint};
}

inline HyperbolaIntercepts intercepts_from_deltas(const DeltaDistance& lr, const DeltaDistance& tb) {
    return intercepts_from_deltas(lr, tb, {sign_of(-lr.delta_cm), sign_of(tb.delta_cm)});
}

inline constexpr double kDegenerateIntercept = 1e-9;  // cm
inline constexpr double kRadicandTolerance = 1e-9;    // relative

/// LHS - 1 of the hyperbola through vertex `intercept` with foci at
/// ±half_sep on `axis`:
///   axis x:  x²/a² - y²/(s² - a²) - 1
///   axis y:  y²/b² - x²/(s² - b²) - 1
/// Zero exactly on the curve (either branch).
inline double hyperbola_residual(Point p, double intercept, double half_sep, Axis axis) {
    const double a = std::abs(intercept);
    if (a < kDegenerateIntercept || a >= half_sep)
        throw Error(ErrorKind::degenerate_hyperbola,
                    "intercept " + std::to_string(intercept) + " has no proper hyperbola for half-separation " +
                        std::to_string(half_sep));
    const double along = axis == Axis::x ? p.x : p.y;
    const double across = axis == Axis::x ? p.y : p.x;
    const double conj = (half_sep - a) * (half_sep + a);
    return along * along / (a * a) - across * across / conj - 1.0;
}

enum class Method { closed_form, oracle };

constexpr std::string_view to_string(Method m) { return m == Method::closed_form ? "closed_form" : "oracle"; }

struct TapEstimate {
    std::size_t tap_id = 0;
    Point position;
    QuadrantHint quadrant;
    double residual_lr = 0.0;
    double residual_tb = 0.0;
    Method method = Method::closed_form;
};

namespace detail {

inline double checked_sqrt(double value, double scale, const char* what) {
    if (value >= 0.0) return std::sqrt(value);
    if (value >= -kRadicandTolerance * scale) return 0.0;
    throw Error(ErrorKind::no_intersection,
                std::string(what) + " radicand is negative; the two hyperbolas do not meet");
}

inline double residual_or_line(Point p, double intercept, double half_sep, Axis axis) {
    if (std::abs(intercept) < kDegenerateIntercept)
        return (axis == Axis::x ? p.x : p.y) / half_sep;
    return hyperbola_residual(p, intercept, half_sep, axis);
}

} // namespace detail

/// Intersection of the two hyperbolas.
///
/// With A = |a|, B = |b|, C = sx² - A², D = sy² - B² and E = CD - A²B²:
///   x² = A² D (B² + C) / E
///   y² = C (x²/A² - 1) = B² C (A² + D) / E
/// For a square layout this is the closed form `abs_x_square_layout` written
/// in terms of the vertex-to-sensor gaps. a = 0 collapses the left/right
/// locus to the y-axis and b = 0 the top/bottom locus to the x-axis.
inline TapEstimate solve_closed_form(const HyperbolaIntercepts& in, const SensorLayout& layout) {
    layout.validate();
    const double sx = layout.half_sep_x;
    const double sy = layout.half_sep_y;
    const double A = std::abs(in.a);
    const double B = std::abs(in.b);
    if (!std::isfinite(A) || !std::isfinite(B) || A >= sx || B >= sy)
        throw Error(ErrorKind::infeasible_observation,
                    "intercepts (" + std::to_string(in.a) + ", " + std::to_string(in.b) +
                        ") must lie strictly inside the sensor half-separations");

    const bool flat_a = A < kDegenerateIntercept;
    const bool flat_b = B < kDegenerateIntercept;
    if ((in.hint.x_sign == 0 && !flat_a) || (in.hint.y_sign == 0 && !flat_b))
        throw Error(ErrorKind::usage, "quadrant hint puts the tap on an axis the intercepts rule out");

    double x = 0.0;
    double y = 0.0;
    if (flat_a && flat_b) {
        // origin
    } else if (flat_a) {
        y = B;
    } else if (flat_b) {
        x = A;
    } else {
        const double C = (sx - A) * (sx + A);
        const double D = (sy - B) * (sy + B);
        const double E = C * D - A * A * B * B;
        const double scale = C * D + A * A * B * B;
        if (!(E > kRadicandTolerance * scale))
            throw Error(ErrorKind::no_intersection,
                        "hyperbolas with intercepts (" + std::to_string(in.a) + ", " +
                            std::to_string(in.b) + ") do not intersect");
        x = A * detail::checked_sqrt(D * (B * B + C) / E, 1.0, "x");
        y = B * detail::checked_sqrt(C * (A * A + D) / E, 1.0, "y");
    }
    // + 0.0 keeps on-axis results from printing as -0
    x = x * in.hint.x_sign + 0.0;
    y = y * in.hint.y_sign + 0.0;
    if (!std::isfinite(x) || !std::isfinite(y))
        throw Error(ErrorKind::no_intersection, "solution is not finite");

    TapEstimate est;
    est.position = {x, y};
    est.quadrant = in.hint;
    est.residual_lr = detail::residual_or_line(est.position, A, sx, Axis::x);
    est.residual_tb = detail::residual_or_line(est.position, B, sy, Axis::y);
    est.method = Method::closed_form;
    return est;
}

/// Coefficients of the closed-form |x| for a square layout (sx = sy = s),
/// written in the gaps g = s - |a| and h = s - |b| between each vertex and
/// its nearer sensor:
///
///   |x| = (s - g) √h √-(-g²h + c1 g² + c1 gh - c2 g + h³ - c3 h² + c4 h - c5)
///         / √-(d1 g² - d2 g + d1 h² - d2 h + d3)
struct SquareLayoutCoefficients {
    double c1;  // 2s
    double c2;  // 4s²
    double c3;  // 4s
    double c4;  // 5s²
    double c5;  // 2s³
    double d1;  // s²
    double d2;  // 2s³
    double d3;  // s⁴
};

constexpr SquareLayoutCoefficients square_layout_coefficients(double s) {
    return {2 * s, 4 * s * s, 4 * s, 5 * s * s, 2 * s * s * s, s * s, 2 * s * s * s, s * s * s * s};
}

inline double abs_x_square_layout(double gap_x, double gap_y, double s) {
    const auto k = square_layout_coefficients(s);
    const double g = gap_x;
    const double h = gap_y;
    const double num = -g * g * h + k.c1 * g * g + k.c1 * g * h - k.c2 * g + h * h * h - k.c3 * h * h +
                       k.c4 * h - k.c5;
    const double den = k.d1 * g * g - k.d2 * g + k.d1 * h * h - k.d2 * h + k.d3;
    return std::abs(s - g) * std::sqrt(h) * std::sqrt(-num) / std::sqrt(-den);
}

struct AxisSpeeds {
    double x = 45014.0;  // cm/s
    double y = 37259.0;
};

/// TDOA pair to position, honouring separate per-axis speeds.
///
/// Travel time over the surface is √((Δx/vx)² + (Δy/vy)²). Stretching y by
/// vx/vy makes that metric Euclidean with speed vx, so both hyperbolas are
/// solved in the stretched frame and y is mapped back. Equal speeds leave
/// the frame unchanged.
inline TapEstimate locate_tap(const TdoaObservation& lr, const TdoaObservation& tb, AxisSpeeds speeds,
                              const SensorLayout& layout) {
    const DeltaDistance d_lr = delta_from_tdoa(lr, speeds.x, layout);
    const DeltaDistance d_tb = delta_from_tdoa(tb, speeds.y, layout);
    const double stretch = speeds.x / speeds.y;
    const SensorLayout frame{layout.half_sep_x, layout.half_sep_y * stretch};
    const DeltaDistance d_tb_frame{Pair::top_bottom, d_tb.delta_cm * stretch};
    TapEstimate est = solve_closed_form(intercepts_from_deltas(d_lr, d_tb_frame, resolve_quadrant(lr, tb)), frame);
    est.position.y /= stretch;
    est.tap_id = lr.tap_id;
    return est;
}

struct SearchBox {
    double x_min = -60.0;
    double x_max = 60.0;
    double y_min = -60.0;
    double y_max = 60.0;
};

/// Brute-force reference solver: grid search over `box` at `resolution`
/// minimizing the squared distance-difference residuals of both pairs, then
/// one local pass at resolution/100 from the lowest coarse minima.
inline TapEstimate oracle_solve(const DeltaDistance& lr, const DeltaDistance& tb, const SensorLayout& layout,
                                SearchBox box, double resolution) {
    if (!(resolution > 0.0)) throw Error(ErrorKind::usage, "resolution must be positive");
    if (lr.pair != Pair::left_right || tb.pair != Pair::top_bottom)
        throw Error(ErrorKind::usage, "oracle_solve expects (left_right, top_bottom)");
    const std::array<Point, 4> s{layout.sensor(Channel::left), layout.sensor(Channel::right),
                                 layout.sensor(Channel::top), layout.sensor(Channel::bottom)};
    auto cost = [&](double x, double y) {
        const Point p{x, y};
        const double r1 = distance(p, s[1]) - distance(p, s[0]) - lr.delta_cm;
        const double r2 = distance(p, s[3]) - distance(p, s[2]) - tb.delta_cm;
        return r1 * r1 + r2 * r2;
    };

    const auto nx = static_cast<long>(std::floor((box.x_max - box.x_min) / resolution)) + 1;
    const auto ny = static_cast<long>(std::floor((box.y_max - box.y_min) / resolution)) + 1;
    if (nx < 3 || ny < 3) throw Error(ErrorKind::box_too_small, "search box spans fewer than 3 cells");
    std::vector<double> grid(static_cast<std::size_t>(nx * ny));
    auto cell = [&](long i, long j) -> double& { return grid[static_cast<std::size_t>(i * ny + j)]; };
    for (long i = 0; i < nx; ++i)
        for (long j = 0; j < ny; ++j)
            cell(i, j) = cost(box.x_min + static_cast<double>(i) * resolution, box.y_min + static_cast<double>(j) * resolution);

    // Coarse local minima, lowest first. Where the two loci cross at a
    // shallow angle the valley breaks into several of these.
    std::vector<std::pair<double, Point>> starts;
    for (long i = 0; i < nx; ++i)
        for (long j = 0; j < ny; ++j) {
            bool low = true;
            for (long di = -1; di <= 1 && low; ++di)
                for (long dj = -1; dj <= 1 && low; ++dj) {
                    const long u = i + di;
                    const long v = j + dj;
                    if ((di || dj) && u >= 0 && v >= 0 && u < nx && v < ny && cell(u, v) < cell(i, j)) low = false;
                }
            if (low)
                starts.push_back({cell(i, j), {box.x_min + static_cast<double>(i) * resolution,
                                               box.y_min + static_cast<double>(j) * resolution}});
        }
    std::sort(starts.begin(), starts.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    constexpr std::size_t kStarts = 6;
    if (starts.size() > kStarts) starts.resize(kStarts);

    // Refinement window of ±2 coarse cells, re-centred while the best point
    // sits on its edge so it can walk along the valley.
    const double fine = resolution / 100.0;
    constexpr long kHalfWidth = 200;
    const double x_hi = box.x_min + static_cast<double>(nx - 1) * resolution;
    const double y_hi = box.y_min + static_cast<double>(ny - 1) * resolution;
    double best = std::numeric_limits<double>::infinity();
    Point arg = starts.front().second;
    for (const auto& start : starts) {
        double local = start.first;
        Point at = start.second;
        for (int moves = 0; moves < 10000; ++moves) {
            const Point center = at;
            long edge_i = 0;
            long edge_j = 0;
            for (long i = -kHalfWidth; i <= kHalfWidth; ++i) {
                const double x = center.x + static_cast<double>(i) * fine;
                if (x < box.x_min || x > x_hi) continue;
                for (long j = -kHalfWidth; j <= kHalfWidth; ++j) {
                    const double y = center.y + static_cast<double>(j) * fine;
                    if (y < box.y_min || y > y_hi) continue;
                    const double c = cost(x, y);
                    if (c < local) {
                        local = c;
                        at = {x, y};
                        edge_i = i;
                        edge_j = j;
                    }
                }
            }
            if (std::abs(edge_i) < kHalfWidth && std::abs(edge_j) < kHalfWidth) break;
        }
        if (local < best) {
            best = local;
            arg = at;
        }
    }
    const double eps = fine / 2.0;
    if (arg.x < box.x_min + eps || arg.x > x_hi - eps || arg.y < box.y_min + eps || arg.y > y_hi - eps)
        throw Error(ErrorKind::box_too_small, "minimum lies on the search box boundary");

    TapEstimate est;
    est.position = arg;
    est.quadrant = {sign_of(-lr.delta_cm), sign_of(tb.delta_cm)};
    const double a = -lr.delta_cm / 2.0;
    const double b = tb.delta_cm / 2.0;
    auto safe_residual = [](Point p, double v, double half, Axis axis) {
        if (std::abs(v) < kDegenerateIntercept) return (axis == Axis::x ? p.x : p.y) / half;
        if (std::abs(v) >= half) return std::numeric_limits<double>::quiet_NaN();
        return hyperbola_residual(p, v, half, axis);
    };
    est.residual_lr = safe_residual(arg, a, layout.half_sep_x, Axis::x);
    est.residual_tb = safe_residual(arg, b, layout.half_sep_y, Axis::y);
    est.method = Method::oracle;
    return est;
}

} // namespace alto
