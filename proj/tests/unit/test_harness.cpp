#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>

#include "alto/csv.hpp"
#include "alto/harness.hpp"

using namespace alto;
using Catch::Approx;

namespace {

Scenario noiseless() {
    Scenario sc;
    sc.surface.noise_stddev = 0;
    sc.surface.onset_jitter_samples = 0;
    return sc;
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

} // namespace

TEST_CASE("default experiment plans") {
    const Scenario sc;
    CHECK(make_experiment(ExperimentKind::linearity_1d, sc).positions.size() == 21);
    CHECK(make_experiment(ExperimentKind::sampling_sweep, sc).positions.size() == 10);
    CHECK(make_experiment(ExperimentKind::calibrate, sc).positions.size() == 51);
    CHECK(make_experiment(ExperimentKind::accuracy_2d, sc).positions.size() == 25);
    CHECK(make_experiment(ExperimentKind::accuracy_2d, sc).repetitions == 10);
    Scenario bad;
    bad.repetitions = 0;
    CHECK_THROWS_AS(make_experiment(ExperimentKind::accuracy_2d, bad), Error);
    CHECK(parse_experiment_kind("calibrate") == ExperimentKind::calibrate);
    CHECK_THROWS_AS(parse_experiment_kind("nope"), Error);
}

TEST_CASE("linearity_1d: noiseless fit and per-location spread") {
    const Scenario sc = noiseless();
    const auto r = run_linearity_1d(make_experiment(ExperimentKind::linearity_1d, sc));
    REQUIRE(r.fit_x);
    CHECK(r.fit_x->r_squared >= 0.999);
    CHECK(r.rows.size() == 21);
    CHECK(r.detected + r.missed == r.requested);
    // recovered positions within two sample periods of travel
    const double tol = 2.0 * sc.surface.speed_x / sc.detector.sample_rate;
    for (const auto& row : r.rows) CHECK(std::abs(row.mean_x - row.truth.x) <= tol);

    Scenario one = sc;
    one.taps = {{5, 0}};
    const auto single = run_linearity_1d(make_experiment(ExperimentKind::linearity_1d, one));
    REQUIRE(single.rows.size() == 1);
    CHECK(single.rows[0].tdoa_stddev_s <= 1.0 / sc.detector.sample_rate);
}

TEST_CASE("sampling sweep: higher rate tightens TDOA spread") {
    const auto sweep = run_sampling_sweep(make_experiment(ExperimentKind::sampling_sweep, Scenario{}));
    CHECK(sweep.low.sample_rate == 44100);
    CHECK(sweep.high.sample_rate == 192000);
    CHECK(sweep.fraction_lower_stddev >= 0.8);
    CHECK(sweep.r2_improved);
}

TEST_CASE("accuracy_2d: noiseless error bound and accounting") {
    const Scenario sc = noiseless();
    const auto r = run_accuracy_2d(make_experiment(ExperimentKind::accuracy_2d, sc), exact_profile(sc));
    CHECK(r.mae_x <= 0.3);
    CHECK(r.mae_y <= 0.3);
    CHECK(r.rows.size() == 25);
    CHECK(r.detected + r.missed == r.requested);
    CHECK(r.estimates.size() == r.detected - r.failed);
}

TEST_CASE("accuracy_2d: default noise stays within twice the reference error") {
    const Scenario sc;
    const auto r = run_accuracy_2d(make_experiment(ExperimentKind::accuracy_2d, sc), exact_profile(sc));
    CHECK(r.mae_x <= 2 * 1.45);
    CHECK(r.mae_y <= 2 * 2.72);
}

TEST_CASE("accuracy_2d: exterior taps are solved") {
    Scenario sc = noiseless();
    sc.taps = {{30, 5}, {-32, -10}, {8, 31}, {0, 0}};
    sc.repetitions = 3;
    const auto r = run_accuracy_2d(make_experiment(ExperimentKind::accuracy_2d, sc), exact_profile(sc));
    CHECK(r.failed == 0);
    CHECK(r.missed == 0);
    for (const auto& row : r.rows) {
        CHECK(std::abs(row.mean_x - row.truth.x) < 1.0);
        CHECK(std::abs(row.mean_y - row.truth.y) < 1.0);
    }
}

TEST_CASE("missed taps are counted, not dropped") {
    Scenario sc = noiseless();
    sc.surface.peak_amplitude = 1500;
    sc.surface.attenuation_per_cm = 0.02;  // far sensors fall below 1000
    sc.taps = {{-20, -20}, {0, 0}};
    sc.repetitions = 2;
    const auto r = run_accuracy_2d(make_experiment(ExperimentKind::accuracy_2d, sc), exact_profile(sc));
    CHECK(r.requested == 4);
    CHECK(r.missed >= 2);
    CHECK(r.detected + r.missed == r.requested);
    CHECK(r.rows.size() == 2);
    CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("determinism: same seed, byte-identical CSV, any thread count") {
    Scenario a;
    a.seed = 42;
    a.threads = 1;
    Scenario b = a;
    b.threads = 4;
    const auto ra = run_accuracy_2d(make_experiment(ExperimentKind::accuracy_2d, a), exact_profile(a));
    const auto rb = run_accuracy_2d(make_experiment(ExperimentKind::accuracy_2d, b), exact_profile(b));
    CHECK(report_csv(ra) == report_csv(rb));
    CHECK(estimates_csv(ra.estimates) == estimates_csv(rb.estimates));
    Scenario c = a;
    c.seed = 43;
    const auto rc = run_accuracy_2d(make_experiment(ExperimentKind::accuracy_2d, c), exact_profile(c));
    CHECK(report_csv(ra) != report_csv(rc));
}

TEST_CASE("pipeline composition equals staged execution") {
    Scenario sc;
    sc.taps = {{-11, 6}, {14, -3}};
    sc.repetitions = 2;
    const auto spec = make_experiment(ExperimentKind::accuracy_2d, sc);
    const auto r = run_accuracy_2d(spec, exact_profile(sc));
    REQUIRE(r.estimates.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        const auto staged = simulate_tap(sc, spec.positions[i / 2], i, spec.seed);
        REQUIRE(staged.left_right);
        REQUIRE(staged.top_bottom);
        const auto est = locate_tap(*staged.left_right, *staged.top_bottom, {sc.surface.speed_x, sc.surface.speed_y},
                                    sc.layout);
        CHECK(est.position.x == r.estimates[i].position.x);
        CHECK(est.position.y == r.estimates[i].position.y);
    }
}

TEST_CASE("report emission") {
    RunReport empty;
    CHECK(report_csv(empty) == std::string(kReportHeader) + "\n");
    RunReport one;
    one.rows.push_back({});
    one.rows[0].truth = {10, 0};
    one.rows[0].requested = 10;
    one.rows[0].detected = 10;
    const auto csv = report_csv(one);
    CHECK(count_lines(csv) == 2);
    CHECK(csv.find("\n192000,10,0,10,10,0,0,,,,,,,,\n") != std::string::npos);
    CHECK(report_text(one).find("taps requested 0") != std::string::npos);
}

TEST_CASE("scenario keys") {
    auto kv = KeyValues::parse("surface.noise_stddev = 0\ndetector.sample_rate = 44100\ngrid.taps = 1,2; -3, 4\nseed=9");
    const auto sc = scenario_from(kv);
    CHECK(sc.surface.noise_stddev == 0);
    CHECK(sc.detector.sample_rate == 44100);
    CHECK(sc.seed == 9);
    REQUIRE(sc.taps.size() == 2);
    CHECK(sc.taps[1].x == -3);
    CHECK(sc.taps[1].y == 4);

    CHECK_THROWS_AS(scenario_from(KeyValues::parse("surface.speed = 3")), Error);
    CHECK_THROWS_AS(scenario_from(KeyValues::parse("detector.sample_rate = 22050")), Error);
    CHECK_THROWS_AS(scenario_from(KeyValues::parse("grid.taps = 1")), Error);
    CHECK_THROWS_AS(scenario_from(KeyValues::parse("sim.stream_chunks = 1")), Error);
}

TEST_CASE("render_session: one observation per tap on each device") {
    Scenario sc;
    const std::vector<Point> taps{{0, 0}, {10, 10}, {-15, 5}};
    const auto s = render_session(sc, taps, 5);
    const auto both = run_interleaved(s.left_right, s.top_bottom, sc.detector);
    CHECK(both.left_right.size() == 3);
    CHECK(both.top_bottom.size() == 3);
    CHECK(s.events.size() == 12);
}
