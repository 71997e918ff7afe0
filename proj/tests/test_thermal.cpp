#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qpack/error.hpp"
#include "qpack/thermal.hpp"

using namespace qpack;

namespace {

FridgePayload qpu() { return load_payload(std::string(QPACK_DATA_DIR) + "/payload_qpu_mode.txt"); }
FridgePayload ht() {
    return load_payload(std::string(QPACK_DATA_DIR) + "/payload_high_throughput.txt");
}

LineSpec one_drive_line(double device_power_w) {
    LineSpec line;
    line.kind = LineKind::drive;
    line.count = 1;
    line.signal_power_at_device_w = device_power_w;
    line.attenuation_budget_db = 60.0;
    line.attenuation_db[static_cast<int>(StageName::PT2)] = 20.0;
    line.attenuation_db[static_cast<int>(StageName::CLD)] = 20.0;
    line.attenuation_db[static_cast<int>(StageName::MXC)] = 20.0;
    return line;
}

}  // namespace

TEST_CASE("per-line energy conservation is exact") {
    LineSpec line = one_drive_line(1.585e-11);
    CHECK(line_conservation_residual(line) < 1e-12);

    // Input = delivered + dissipated: check the identity explicitly.
    auto loads = dissipative_loads({line});
    double dissipated = 0.0;
    for (double w : loads) dissipated += w;
    const double input = line.signal_power_at_device_w * std::pow(10.0, 6.0);
    CHECK(input - dissipated ==
          doctest::Approx(line.signal_power_at_device_w).epsilon(1e-12));
    // A 60 dB line dumps (10^6 - 1) times the device power.
    CHECK(dissipated ==
          doctest::Approx(line.signal_power_at_device_w * (1e6 - 1.0)).epsilon(1e-12));
}

TEST_CASE("schedule/budget mismatch is rejected") {
    LineSpec line = one_drive_line(1e-12);
    line.attenuation_db[static_cast<int>(StageName::MXC)] = 10.0;  // sums to 50, budget 60
    CHECK_THROWS_WITH_AS(line.validate(), doctest::Contains("budget"), Error);
    CHECK_THROWS_AS(dissipative_loads({line}), Error);
}

TEST_CASE("504 drive lines at -78 dBm with 20 dB at MXC dissipate ~0.79 uW there") {
    LineSpec line = one_drive_line(1e-3 * std::pow(10.0, -7.8));
    line.count = 504;
    auto loads = dissipative_loads({line});
    const double expected = 504.0 * 1.585e-11 * (1e2 - 1.0);
    CHECK(expected == doctest::Approx(0.79e-6).epsilon(0.01));
    CHECK(loads[static_cast<int>(StageName::MXC)] == doctest::Approx(expected).epsilon(1e-3));
    // Within 10% of the modeled 771.4 nW operating point.
    CHECK(loads[static_cast<int>(StageName::MXC)] == doctest::Approx(771.4e-9).epsilon(0.10));

    SUBCASE("zero device power dissipates nothing") {
        line.signal_power_at_device_w = 0.0;
        auto zero = dissipative_loads({line});
        for (double w : zero) CHECK(w == 0.0);
    }
}

TEST_CASE("doubling the line count doubles passive and dissipative loads exactly") {
    FridgePayload payload = qpu();
    LoadReport base = aggregate_loads(payload.lines, payload.active);
    auto doubled_lines = payload.lines;
    for (auto& line : doubled_lines) line.count *= 2;
    LoadReport doubled = aggregate_loads(doubled_lines, payload.active);
    for (int s = 0; s < kStageCount; ++s) {
        CHECK(doubled.stages[s].passive_w == doctest::Approx(2.0 * base.stages[s].passive_w));
        CHECK(doubled.stages[s].dissipative_w ==
              doctest::Approx(2.0 * base.stages[s].dissipative_w));
    }
}

TEST_CASE("load aggregation is permutation-invariant and additive") {
    FridgePayload payload = qpu();
    LoadReport base = aggregate_loads(payload.lines, payload.active);
    auto reversed = payload.lines;
    std::reverse(reversed.begin(), reversed.end());
    LoadReport perm = aggregate_loads(reversed, payload.active);
    for (int s = 0; s < kStageCount; ++s)
        CHECK(base.stages[s].total_w() == doctest::Approx(perm.stages[s].total_w()).epsilon(1e-15));

    LoadReport empty = aggregate_loads({payload.lines[0]}, {});
    LoadReport full = aggregate_loads(payload.lines, {});
    CHECK(empty.stages[0].passive_w <= full.stages[0].passive_w);
}

TEST_CASE("QPU preset reproduces the modeled MXC operating point") {
    FridgePayload payload = qpu();
    LoadReport report = aggregate_loads(payload.lines, payload.active);
    const auto& mxc = report.stages[static_cast<int>(StageName::MXC)];
    CHECK(mxc.passive_w == doctest::Approx(752.9e-9).epsilon(0.15));
    CHECK(mxc.active_w + mxc.dissipative_w == doctest::Approx(771.4e-9).epsilon(0.10));

    solve_temperatures(report, payload.curves);
    CHECK(report.temperature_k[static_cast<int>(StageName::MXC)] ==
          doctest::Approx(9.5e-3).epsilon(0.02));
    // Monotone cold to warm.
    for (int s = 1; s < kStageCount; ++s)
        CHECK(report.temperature_k[s] < report.temperature_k[s - 1]);
    // Other stages land near their modeled operating points.
    CHECK(report.temperature_k[static_cast<int>(StageName::PT1)] ==
          doctest::Approx(35.1).epsilon(0.02));
    CHECK(report.temperature_k[static_cast<int>(StageName::PT2)] ==
          doctest::Approx(4.1).epsilon(0.02));
    CHECK(report.temperature_k[static_cast<int>(StageName::STL)] ==
          doctest::Approx(0.917).epsilon(0.02));
    CHECK(report.temperature_k[static_cast<int>(StageName::CLD)] ==
          doctest::Approx(0.1273).epsilon(0.03));
}

TEST_CASE("high-throughput preset reproduces the modeled MXC dissipation") {
    FridgePayload payload = ht();
    LoadReport report = aggregate_loads(payload.lines, payload.active);
    const auto& mxc = report.stages[static_cast<int>(StageName::MXC)];
    CHECK(mxc.dissipative_w == doctest::Approx(2.2e-6).epsilon(0.25));
    CHECK(mxc.passive_w == doctest::Approx(769.0e-9).epsilon(0.15));
    solve_temperatures(report, payload.curves);
    CHECK(report.temperature_k[static_cast<int>(StageName::MXC)] ==
          doctest::Approx(10.6e-3).epsilon(0.06));
}

TEST_CASE("solve_temperatures semantics") {
    CoolingCurve quad;
    quad.kind = CoolingCurve::Kind::quadratic;
    quad.a = 0.0758;
    quad.t0 = 8.378e-3;
    // Calibration anchors of the quadratic mixing-chamber curve.
    CHECK(quad.power_at(20e-3) == doctest::Approx(25e-6).epsilon(0.01));
    CHECK(quad.power_at(9.5e-3) == doctest::Approx(1.52e-6).epsilon(0.01));
    CHECK(quad.solve_temperature(1.524e-6) == doctest::Approx(9.5e-3).epsilon(0.01));
    // Zero load sits at the base temperature.
    CHECK(quad.solve_temperature(0.0) == doctest::Approx(8.378e-3));

    CoolingCurve table;
    table.kind = CoolingCurve::Kind::table;
    table.points = {{0.1, 0.0}, {0.15, 1e-3}, {0.2, 3e-3}};
    CHECK(table.solve_temperature(1e-3) == doctest::Approx(0.15).epsilon(1e-3));
    CHECK_THROWS_WITH_AS(table.solve_temperature(5e-3), doctest::Contains("insufficient"),
                         Error);

    SUBCASE("monotone: more load never cools a stage") {
        double prev = 0.0;
        for (double load = 0.0; load <= 20e-6; load += 1e-6) {
            const double t = quad.solve_temperature(load);
            CHECK(t >= prev);
            prev = t;
        }
    }
    SUBCASE("non-monotone curve tables are rejected") {
        CoolingCurve bad;
        bad.kind = CoolingCurve::Kind::table;
        bad.points = {{0.1, 0.0}, {0.15, 1e-3}, {0.2, 0.5e-3}};
        CHECK_THROWS_AS(bad.validate(), Error);
    }
}

TEST_CASE("headroom ratios") {
    FridgePayload payload = qpu();
    LoadReport report = aggregate_loads(payload.lines, payload.active);
    solve_temperatures(report, payload.curves);

    // The op itself is a plain ratio: 3 uW against 25 uW reads 0.12.
    LoadReport synthetic = report;
    synthetic.stages[static_cast<int>(StageName::MXC)] = {3e-6, 0.0, 0.0};
    CHECK(headroom(synthetic, 25e-6) == doctest::Approx(0.12).epsilon(1e-12));
    synthetic.stages[static_cast<int>(StageName::MXC)] = {0.0, 0.0, 0.0};
    CHECK(headroom(synthetic, 25e-6) == 0.0);
    synthetic.stages[static_cast<int>(StageName::MXC)] = {25e-6, 0.0, 0.0};
    CHECK(headroom(synthetic, 25e-6) == doctest::Approx(1.0));

    LoadReport unsolved;
    CHECK_THROWS_AS(headroom(unsolved, 25e-6), Error);
}

TEST_CASE("differential contraction") {
    // Al vs sapphire across the wafer radius: ~128 um of relative travel.
    const double d = differential_contraction(38.1e-3, 0.00415, 0.00080);
    CHECK(d == doctest::Approx(127.6e-6).epsilon(0.005));
    CHECK(d == doctest::Approx(120e-6).epsilon(0.15));
    // Symmetric and linear in radius.
    CHECK(differential_contraction(38.1e-3, 0.00080, 0.00415) == doctest::Approx(d));
    CHECK(differential_contraction(76.2e-3, 0.00415, 0.00080) == doctest::Approx(2.0 * d));
    CHECK(differential_contraction(38.1e-3, 0.003, 0.003) == 0.0);
    CHECK(differential_contraction(0.0, 0.00415, 0.00080) == 0.0);
    CHECK_THROWS_AS(differential_contraction(38.1e-3, 0.2, 0.001), Error);
}

TEST_CASE("payload files parse with their contraction sections") {
    FridgePayload payload = qpu();
    CHECK(payload.name == "qpu_mode");
    CHECK(payload.lines.size() == 4);
    CHECK(payload.mxc_budget_w == doctest::Approx(25e-6));
    CHECK(payload.contraction_radius_m == doctest::Approx(38.1e-3));
    CHECK(payload.contraction_material_a == "Al");
    CHECK(payload.contraction_a == doctest::Approx(0.00415));
    CHECK(payload.contraction_b == doctest::Approx(0.00080));

    CHECK_THROWS_AS(parse_payload("name = x\n", "inline"), Error);  // no curves/lines
    CHECK_THROWS_AS(
        parse_payload("line drive count=1 device_power=0W budget=60dB atten=PT2:30\n", "inline"),
        Error);
}

TEST_CASE("active components land on their stages") {
    FridgePayload payload = qpu();
    LoadReport report = aggregate_loads(payload.lines, payload.active);
    // 56 amplifiers at 17.5 mW each.
    CHECK(report.stages[static_cast<int>(StageName::PT2)].active_w ==
          doctest::Approx(56 * 17.5e-3).epsilon(1e-12));
    CHECK(report.stages[static_cast<int>(StageName::MXC)].active_w == 0.0);

    ActiveComponent bad{"x", StageName::CLD, -1.0, 1};
    CHECK_THROWS_AS(aggregate_loads(payload.lines, {bad}), Error);
}

TEST_CASE("empty payload aggregates to zero loads") {
    LineSpec line;
    line.kind = LineKind::drive;
    line.count = 0;
    LoadReport report = aggregate_loads({line}, {});
    for (int s = 0; s < kStageCount; ++s) CHECK(report.stages[s].total_w() == 0.0);
}
