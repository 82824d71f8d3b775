#include <catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <limits>

#include "alto/geometry.hpp"
#include "alto/surface_sim.hpp"
#include "oracles.hpp"

using namespace alto;
using Catch::Approx;

namespace {

TdoaObservation obs_for(Pair p, double tdoa) {
    TdoaObservation o;
    o.first_channel = first_of(p);
    o.second_channel = second_of(p);
    o.tdoa_seconds = tdoa;
    o.first_arrival = tdoa > 0 ? Arrival::first : tdoa < 0 ? Arrival::second : Arrival::indeterminate;
    return o;
}

HyperbolaIntercepts from_tap(Point p, double s = 26.0) {
    return intercepts_from_deltas({Pair::left_right, oracle::delta_lr(p, s)}, {Pair::top_bottom, oracle::delta_tb(p, s)});
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an alto::Error");
    return ErrorKind::internal_inconsistency;
}

} // namespace

TEST_CASE("enumerate_pairs") {
    CHECK(enumerate_pairs(4) == 6);
    CHECK(enumerate_pairs(2) == 1);
    CHECK(enumerate_pairs(3) == 3);
    CHECK(kind_of([] { enumerate_pairs(1); }) == ErrorKind::usage);
}

TEST_CASE("delta_from_tdoa") {
    const SensorLayout layout;
    CHECK(delta_from_tdoa(obs_for(Pair::left_right, 0.0), 45014, layout).delta_cm == 0.0);
    CHECK(delta_from_tdoa(obs_for(Pair::left_right, 5.0e-4), 45014, layout).delta_cm == Approx(22.507).epsilon(1e-12));

    // a swapped observation comes back in canonical orientation
    const auto swapped = obs_for(Pair::left_right, 5.0e-4).swapped();
    const auto d = delta_from_tdoa(swapped, 45014, layout);
    CHECK(d.pair == Pair::left_right);
    CHECK(d.delta_cm == Approx(22.507));

    // tap at (10, 0): right sensor 16 cm away, left 36 cm
    const double exact = oracle::delta_lr({10, 0}, 26);
    CHECK(exact == Approx(-20.0).epsilon(1e-15));
    const auto from_time = delta_from_tdoa(obs_for(Pair::left_right, exact / 45014), 45014, layout);
    CHECK(from_time.delta_cm == Approx(exact).epsilon(1e-12));

    CHECK(kind_of([&] { delta_from_tdoa(obs_for(Pair::left_right, 53.0 / 45014), 45014, layout); }) ==
          ErrorKind::infeasible_observation);
    CHECK(kind_of([&] { delta_from_tdoa(obs_for(Pair::left_right, 1e-4), 0.0, layout); }) == ErrorKind::usage);
}

TEST_CASE("hyperbola_residual") {
    CHECK(hyperbola_residual({0, 5}, 5, 26, Axis::y) == Approx(0.0).margin(1e-15));
    CHECK(hyperbola_residual({7, 0}, 7, 26, Axis::x) == Approx(0.0).margin(1e-15));
    CHECK(hyperbola_residual({0, 0}, 5, 26, Axis::x) == -1.0);
    CHECK(hyperbola_residual({0, 0}, 5, 26, Axis::y) == -1.0);

    oracle::Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        const double a = rng.uniform(0.1, 25.9);
        const double t = rng.uniform(-2.0, 2.0);
        CHECK(std::abs(hyperbola_residual(oracle::on_x_hyperbola(a, 26, t), a, 26, Axis::x)) < 1e-10);
        CHECK(std::abs(hyperbola_residual(oracle::on_y_hyperbola(a, 26, t), a, 26, Axis::y)) < 1e-10);
    }
    CHECK(kind_of([] { hyperbola_residual({1, 1}, 0.0, 26, Axis::x); }) == ErrorKind::degenerate_hyperbola);
    CHECK(kind_of([] { hyperbola_residual({1, 1}, 26.0, 26, Axis::x); }) == ErrorKind::degenerate_hyperbola);
}

TEST_CASE("points on the hyperbola have the matching distance difference") {
    oracle::Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        const double a = rng.uniform(0.5, 25);
        const Point p = oracle::on_x_hyperbola(a, 26, rng.uniform(-1.5, 1.5));
        CHECK(-oracle::delta_lr(p, 26) / 2 == Approx(a).epsilon(1e-9));
    }
}

TEST_CASE("resolve_quadrant") {
    const auto right_first = obs_for(Pair::left_right, -1e-4);
    const auto left_first = obs_for(Pair::left_right, 1e-4);
    const auto top_first = obs_for(Pair::top_bottom, 1e-4);
    const auto tie_tb = obs_for(Pair::top_bottom, 0.0);
    CHECK(resolve_quadrant(right_first, top_first).name() == "I");
    CHECK(resolve_quadrant(obs_for(Pair::left_right, 0.0), tie_tb).name() == "origin");
    CHECK(resolve_quadrant(left_first, tie_tb).name() == "-x");
    CHECK(resolve_quadrant(left_first, top_first.swapped()).name() == "II");
    CHECK(kind_of([&] { resolve_quadrant(top_first, right_first); }) == ErrorKind::usage);
    for (const char* n : {"I", "II", "III", "IV", "+x", "-x", "+y", "-y", "origin"})
        CHECK(parse_quadrant(n).name() == n);
    CHECK(kind_of([] { parse_quadrant("V"); }) == ErrorKind::format);
}

TEST_CASE("solve_closed_form degenerate intercepts") {
    const SensorLayout layout;
    const auto origin = solve_closed_form({0, 0, {0, 0}}, layout);
    CHECK(origin.position.x == 0.0);
    CHECK(origin.position.y == 0.0);
    CHECK_FALSE(std::signbit(origin.position.x));

    const auto on_y = solve_closed_form({0, 5, {0, 1}}, layout);
    CHECK(on_y.position.x == 0.0);
    CHECK(on_y.position.y == Approx(5.0));
    const auto on_y_neg = solve_closed_form({0, -5, {0, -1}}, layout);
    CHECK(on_y_neg.position.y == Approx(-5.0));

    // the grid oracle agrees with (0, 5) for the same deltas
    const auto check = oracle_solve({Pair::left_right, 0.0}, {Pair::top_bottom, 10.0}, layout, {}, 0.5);
    CHECK(distance(check.position, on_y.position) < 0.05);

    CHECK(kind_of([&] { solve_closed_form({3, 5, {0, 1}}, layout); }) == ErrorKind::usage);
}

TEST_CASE("solve_closed_form round trip on random interior taps") {
    oracle::Rng rng(9);
    const SensorLayout layout;
    for (int i = 0; i < 2000; ++i) {
        const Point p{rng.uniform(-20, 20), rng.uniform(-20, 20)};
        const auto est = solve_closed_form(from_tap(p), layout);
        CHECK(distance(est.position, p) < 1e-6);
        CHECK(std::abs(est.residual_lr) < 1e-8);
        CHECK(std::abs(est.residual_tb) < 1e-8);
    }
}

TEST_CASE("solve_closed_form handles exterior taps and rectangular layouts") {
    const SensorLayout layout;
    const auto out = solve_closed_form(from_tap({30, 5}), layout);
    CHECK(out.position.x == Approx(30).epsilon(1e-9));
    CHECK(out.position.y == Approx(5).epsilon(1e-9));

    const SensorLayout rect{30, 18};
    oracle::Rng rng(10);
    for (int i = 0; i < 500; ++i) {
        const Point p{rng.uniform(-25, 25), rng.uniform(-15, 15)};
        const DeltaDistance lr{Pair::left_right, distance_difference(p, Pair::left_right, rect)};
        const DeltaDistance tb{Pair::top_bottom, distance_difference(p, Pair::top_bottom, rect)};
        CHECK(distance(solve_closed_form(intercepts_from_deltas(lr, tb), rect).position, p) < 1e-6);
    }
}

TEST_CASE("square-layout gap form matches the general solver") {
    constexpr auto k = square_layout_coefficients(26.0);
    STATIC_REQUIRE(k.c1 == 52);
    STATIC_REQUIRE(k.c2 == 2704);
    STATIC_REQUIRE(k.c4 == 3380);
    STATIC_REQUIRE(k.c5 == 35152);
    STATIC_REQUIRE(k.d3 == 456976);
    oracle::Rng rng(11);
    for (int i = 0; i < 300; ++i) {
        const Point p{rng.uniform(0.5, 20), rng.uniform(0.5, 20)};
        const auto in = from_tap(p);
        const double x = abs_x_square_layout(26 - in.a, 26 - in.b, 26);
        CHECK(x == Approx(p.x).epsilon(1e-10));
        CHECK(x == Approx(oracle::literal_abs_x_26(26 - in.a, 26 - in.b)).epsilon(1e-12));
    }
}

TEST_CASE("solve_closed_form limits and errors stay finite or typed") {
    const SensorLayout layout;
    CHECK(kind_of([&] { solve_closed_form({26, 1, {1, 1}}, layout); }) == ErrorKind::infeasible_observation);
    CHECK(kind_of([&] { solve_closed_form({-27, 1, {-1, 1}}, layout); }) == ErrorKind::infeasible_observation);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(kind_of([&] { solve_closed_form({inf, 1, {1, 1}}, layout); }) == ErrorKind::infeasible_observation);
    // two wide-open hyperbolas that never meet
    CHECK(kind_of([&] { solve_closed_form({20, 20, {1, 1}}, layout); }) == ErrorKind::no_intersection);
    for (int k = 1; k <= 16; ++k) {
        const double a = 26.0 - std::pow(10.0, -k);
        try {
            const auto e = solve_closed_form({a, 0.0, {1, 0}}, layout);
            CHECK(std::isfinite(e.position.x));
            CHECK(e.position.x == Approx(a));
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::infeasible_observation);
        }
    }
}

TEST_CASE("locate_tap with anisotropic speeds is exact for the travel-time metric") {
    const SensorLayout layout;
    SurfaceModel surface;
    oracle::Rng rng(12);
    for (int i = 0; i < 500; ++i) {
        const Point p{rng.uniform(-22, 22), rng.uniform(-22, 22)};
        const auto t = arrival_times(p, layout, surface);
        auto lr = obs_for(Pair::left_right, at(t, Channel::right) - at(t, Channel::left));
        auto tb = obs_for(Pair::top_bottom, at(t, Channel::bottom) - at(t, Channel::top));
        lr.tap_id = 40 + i;
        const auto est = locate_tap(lr, tb, {surface.speed_x, surface.speed_y}, layout);
        CHECK(distance(est.position, p) < 1e-6);
        CHECK(est.tap_id == 40u + i);
    }
    // equal speeds: same as the plain isotropic solve
    const Point p{7, -11};
    const auto lr = obs_for(Pair::left_right, oracle::delta_lr(p, 26) / 40000);
    const auto tb = obs_for(Pair::top_bottom, oracle::delta_tb(p, 26) / 40000);
    CHECK(distance(locate_tap(lr, tb, {40000, 40000}, layout).position, p) < 1e-9);
}

TEST_CASE("oracle_solve") {
    const SensorLayout layout;
    const auto zero = oracle_solve({Pair::left_right, 0}, {Pair::top_bottom, 0}, layout, {}, 1.0);
    CHECK(distance(zero.position, {0, 0}) <= 1.0);
    CHECK(zero.method == Method::oracle);

    for (Point p : {Point{30, 5}, Point{-12, 17}, Point{3, -4}, Point{-35, -20}}) {
        const DeltaDistance lr{Pair::left_right, oracle::delta_lr(p, 26)};
        const DeltaDistance tb{Pair::top_bottom, oracle::delta_tb(p, 26)};
        const auto o = oracle_solve(lr, tb, layout, {}, 1.0);
        const auto c = solve_closed_form(intercepts_from_deltas(lr, tb), layout);
        CHECK(distance(o.position, p) <= 0.1);       // 10 x refinement resolution
        CHECK(distance(o.position, c.position) <= 0.1);
    }

    const DeltaDistance lr{Pair::left_right, oracle::delta_lr({30, 5}, 26)};
    const DeltaDistance tb{Pair::top_bottom, oracle::delta_tb({30, 5}, 26)};
    CHECK(kind_of([&] { oracle_solve(lr, tb, layout, {-20, 20, -20, 20}, 1.0); }) == ErrorKind::box_too_small);
    CHECK(kind_of([&] { oracle_solve(lr, tb, layout, {0, 1, 0, 1}, 1.0); }) == ErrorKind::box_too_small);
    CHECK(kind_of([&] { oracle_solve(lr, tb, layout, {}, 0.0); }) == ErrorKind::usage);
}
