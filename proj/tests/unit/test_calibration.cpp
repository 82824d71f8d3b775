#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <vector>

#include "alto/calibration.hpp"
#include "alto/harness.hpp"

using namespace alto;
using Catch::Approx;

TEST_CASE("fit_axis on two exact points") {
    const std::vector<CalibrationSample> s{{0, 0, 0}, {1, 45.014, 1e-3}};
    const auto f = fit_axis(s, Axis::x);
    CHECK(f.speed_cm_per_s == Approx(45014).epsilon(1e-12));
    CHECK(f.intercept_cm == Approx(0).margin(1e-12));
    CHECK(f.r_squared == Approx(1.0));
    CHECK(f.sample_count == 2);
    CHECK(f.per_location.size() == 2);
}

TEST_CASE("fit_axis groups repeated positions") {
    std::vector<CalibrationSample> s;
    for (double pos : {-5.0, 0.0, 5.0})
        for (double jitter : {-1e-6, 0.0, 1e-6}) s.push_back({pos, -2 * pos, -2 * pos / 40000 + jitter});
    const auto f = fit_axis(s, Axis::y);
    CHECK(f.axis == Axis::y);
    CHECK(f.speed_cm_per_s == Approx(40000).epsilon(1e-3));
    REQUIRE(f.per_location.size() == 3);
    CHECK(f.per_location[1].position_cm == 0.0);
    CHECK(f.per_location[1].count == 3);
    CHECK(f.per_location[1].tdoa_stddev_s == Approx(1e-6));
}

TEST_CASE("fit_axis errors") {
    auto kind = [](std::vector<CalibrationSample> s) {
        try {
            fit_axis(s, Axis::x);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::internal_inconsistency;
    };
    CHECK(kind({{0, 0, 0}}) == ErrorKind::singular_fit);
    CHECK(kind({{0, 1, 0}, {1, 2, 0}}) == ErrorKind::singular_fit);
    CHECK(kind({{0, 1, 0}, {0, 1, 1e-4}}) == ErrorKind::usage);
}

TEST_CASE("one_d_position") {
    AxisFit fit;
    fit.speed_cm_per_s = 2 * 22248.5249228;  // the prototype's half-speed constant, doubled
    fit.intercept_cm = 0.0;
    CHECK(one_d_position(0.0, fit, 26.4164968363, 26).position_cm == Approx(26.4164968363));

    // tdoa at the right sensor: d_right - d_left = -52
    fit.speed_cm_per_s = 45014;
    const auto at_right = one_d_position(-52.0 / 45014, fit, 0.0, 26);
    CHECK(at_right.position_cm == Approx(26.0));
    CHECK_FALSE(at_right.out_of_range);
    CHECK(one_d_position(-60.0 / 45014, fit, 0.0, 26).out_of_range);

    fit.speed_cm_per_s = 0;
    CHECK_THROWS_AS(one_d_position(0.0, fit, 0.0, 26), Error);
}

TEST_CASE("location_stats") {
    const std::vector<EstimateGroup> exact{{{3, 4}, {{3, 4}}}};
    const auto e = location_stats(exact);
    CHECK(e.groups[0].mae_x == 0.0);
    CHECK(e.groups[0].stddev_x == 0.0);

    // sample (n - 1) standard deviation of {9, 11} is sqrt(2)
    const std::vector<EstimateGroup> g{{{10, 0}, {{9, 0}, {11, 0}}}};
    const auto s = location_stats(g);
    CHECK(s.groups[0].mae_x == Approx(1.0));
    CHECK(s.groups[0].stddev_x == Approx(std::sqrt(2.0)));
    CHECK(s.groups[0].mean.x == Approx(10.0));
    CHECK(s.mae_x == Approx(1.0));

    CHECK_THROWS_AS(location_stats(std::vector<EstimateGroup>{}), Error);
    CHECK_THROWS_AS(location_stats(std::vector<EstimateGroup>{{{0, 0}, {}}}), Error);
}

TEST_CASE("profile round trip") {
    CalibrationProfile p;
    p.speed_x_cm_per_s = 44987.25;
    p.speed_y_cm_per_s = 37301.5;
    p.intercept_x = 0.0125;
    p.r2_y = 0.9993;
    p.layout = {30, 20};
    const auto path = std::filesystem::temp_directory_path() / "alto_test_profile.cfg";
    write_profile(p, path);
    const auto q = read_profile(path);
    CHECK(q.speed_x_cm_per_s == p.speed_x_cm_per_s);
    CHECK(q.speed_y_cm_per_s == p.speed_y_cm_per_s);
    CHECK(q.intercept_x == p.intercept_x);
    CHECK(q.r2_y == p.r2_y);
    CHECK(q.layout.half_sep_x == 30);
    CHECK(q.layout.half_sep_y == 20);

    CHECK_THROWS_AS(parse_profile(KeyValues::parse("speed_x_cm_per_s = 1\n")), Error);
    CHECK_THROWS_AS(parse_profile(KeyValues::parse(format_profile(p) + "bogus = 1\n")), Error);
}

TEST_CASE("simulated calibration recovers injected speeds") {
    Scenario sc;
    const auto run = run_calibrate(make_experiment(ExperimentKind::calibrate, sc));
    CHECK(run.profile.speed_x_cm_per_s == Approx(45014).epsilon(0.01));
    CHECK(run.profile.speed_y_cm_per_s == Approx(37259).epsilon(0.01));
    CHECK(run.profile.r2_x >= 0.99);
    CHECK(run.report.rows.size() == 2 * 51);

    Scenario iso;
    iso.surface.speed_y = iso.surface.speed_x;
    iso.grid_step_cm = 5.0;
    const auto r = run_calibrate(make_experiment(ExperimentKind::calibrate, iso));
    CHECK(r.profile.speed_x_cm_per_s == Approx(r.profile.speed_y_cm_per_s).epsilon(0.01));

    // three positions still fit
    Scenario few;
    few.taps = {{-20, 0}, {0, 0}, {20, 0}};
    const auto f = run_calibrate(make_experiment(ExperimentKind::calibrate, few));
    CHECK(f.report.fit_x->per_location.size() == 3);
    CHECK(f.profile.speed_x_cm_per_s == Approx(45014).epsilon(0.02));
}
