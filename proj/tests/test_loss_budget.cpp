#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qpack/constants.hpp"
#include "qpack/error.hpp"
#include "qpack/loss_budget.hpp"
#include "qpack/materials.hpp"

using namespace qpack;

namespace {

MaterialTable table_s1() {
    return load_material_table(std::string(QPACK_DATA_DIR) + "/materials_default.txt");
}

/// Two-region relabeling of a pillbox grid by radius threshold.
void split_by_radius(FieldGrid& grid, double r_split) {
    grid.regions = {{"inner", 1.0}, {"outer", 1.0}};
    for (std::size_t i = 0; i < grid.cell_count(); ++i) {
        auto p = grid.cell_position(i);
        grid.region[i] = std::hypot(p[0], p[1]) < r_split ? 0 : 1;
    }
}

}  // namespace

TEST_CASE("dielectric participation: whole grid is 1, symmetric halves are 1/2") {
    oracle::Pillbox box(0.04, 0.004);
    FieldGrid grid = oracle::sample_pillbox(box, box.a / 40.0);
    MaterialTable mats;
    CHECK(dielectric_participation(grid, "vacuum", mats) == doctest::Approx(1.0).epsilon(1e-12));

    // Uniform |E| with two equal-volume, equal-eps regions.
    FieldGrid uniform = grid;
    for (auto& e : uniform.e_field) e = {Complex(0, 0), Complex(0, 0), Complex(1.0, 0)};
    uniform.regions = {{"left", 1.0}, {"right", 1.0}};
    for (std::size_t i = 0; i < uniform.cell_count(); ++i) {
        auto p = uniform.cell_position(i);
        uniform.region[i] = p[0] < 0.0 ? 0 : 1;
    }
    const double p_left = dielectric_participation(uniform, "left", mats);
    CHECK(p_left == doctest::Approx(0.5).epsilon(0.02));  // staircase tie-break only

    CHECK_THROWS_WITH_AS(dielectric_participation(grid, "nope", mats),
                         doctest::Contains("unknown region"), Error);
}

TEST_CASE("dielectric participation matches the series-capacitor slab oracle") {
    // Parallel-plate column with uniform displacement field: 70% vacuum,
    // 30% filled with eps_r = 10. Closed form:
    //   p_slab = (f/eps) / ((1-f)/1 + f/eps).
    FieldGrid grid;
    grid.dimensionality = 3;
    grid.shape = {1, 1, 10};
    grid.spacing = {1e-3, 1e-3, 1e-4};
    grid.origin = {0, 0, 0};
    grid.regions = {{"vacuum", 1.0}, {"slab", 10.0}};
    for (int k = 0; k < 10; ++k) {
        grid.coords.push_back({0, 0, k});
        const bool slab = k >= 7;
        grid.region.push_back(slab ? 1 : 0);
        grid.measure.push_back(1e-10);
        // Continuity of D: E in the slab is eps times smaller.
        grid.e_field.push_back({Complex(0, 0), Complex(0, 0), Complex(slab ? 0.1 : 1.0, 0)});
        grid.h_field.push_back({});
    }
    MaterialTable mats;
    const double expected = (0.3 / 10.0) / (0.7 / 1.0 + 0.3 / 10.0);
    CHECK(dielectric_participation(grid, "slab", mats) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(dielectric_participation(grid, "vacuum", mats) ==
          doctest::Approx(1.0 - expected).epsilon(1e-12));
}

TEST_CASE("full-partition participations sum to one within 1e-9") {
    oracle::Pillbox box(0.0473, 0.004);
    FieldGrid grid = oracle::sample_pillbox(box, box.a / 60.0);
    split_by_radius(grid, box.a / 2.0);
    MaterialTable mats;
    const double p_in = dielectric_participation(grid, "inner", mats);
    const double p_out = dielectric_participation(grid, "outer", mats);
    CHECK(p_in + p_out == doctest::Approx(1.0).epsilon(1e-9));

    // And the sub-disc value agrees with the closed-form Bessel integral.
    const double exact = box.disc_participation(box.a / 2.0);
    CHECK(p_in == doctest::Approx(exact).epsilon(0.01));
}

TEST_CASE("participations and admittances are invariant under field rescaling") {
    oracle::Pillbox box(0.04, 0.004);
    FieldGrid grid = oracle::sample_pillbox(box, box.a / 30.0);
    split_by_radius(grid, box.a / 2.0);
    FieldGrid scaled = grid;
    for (auto& e : scaled.e_field)
        for (auto& c : e) c *= 7.0;
    for (auto& h : scaled.h_field)
        for (auto& c : h) c *= 7.0;
    MaterialTable mats;
    CHECK(dielectric_participation(scaled, "inner", mats) ==
          doctest::Approx(dielectric_participation(grid, "inner", mats)).epsilon(1e-12));
    CHECK(conductor_participation(scaled, "floor", 50e-9) ==
          doctest::Approx(conductor_participation(grid, "floor", 50e-9)).epsilon(1e-12));
    CHECK(seam_admittance(scaled, "sidewall_seam", box.frequency_hz) ==
          doctest::Approx(seam_admittance(grid, "sidewall_seam", box.frequency_hz))
              .epsilon(1e-12));
}

TEST_CASE("surface-oxide participation: scaling laws and the slab oracle") {
    oracle::Pillbox box(0.0473, 0.004);
    FieldGrid grid = oracle::sample_pillbox(box, box.a / 60.0);
    MaterialTable mats;

    const double t = 3e-9, eps_ox = 10.0;
    const double p_floor = surface_dielectric_participation(grid, "floor", t, eps_ox, mats);
    // 1-D analytic slab formula for one plate of the TM010 mode.
    CHECK(p_floor == doctest::Approx(box.plate_oxide_participation(t, eps_ox)).epsilon(1e-9));

    // Thickness enters linearly.
    CHECK(surface_dielectric_participation(grid, "floor", 2.0 * t, eps_ox, mats) ==
          doctest::Approx(2.0 * p_floor).epsilon(1e-12));
    // Doubling the oxide permittivity at fixed vacuum-side fields divides by 4.
    CHECK(surface_dielectric_participation(grid, "floor", t, 2.0 * eps_ox, mats) ==
          doctest::Approx(p_floor / 4.0).epsilon(1e-12));

    CHECK_THROWS_AS(surface_dielectric_participation(grid, "floor", 0.0, eps_ox, mats), Error);
    CHECK_THROWS_WITH_AS(surface_dielectric_participation(grid, "lid", t, eps_ox, mats),
                         doctest::Contains("unknown surface"), Error);
}

TEST_CASE("conductor participation matches the closed-form pillbox value at first order") {
    oracle::Pillbox box(0.0473, 0.004);
    const double lambda = 50e-9;
    const double exact = box.conductor_participation(lambda);

    auto p_all_walls = [&](double h) {
        FieldGrid grid = oracle::sample_pillbox(box, h);
        return conductor_participation(grid, "floor", lambda) +
               conductor_participation(grid, "ceiling", lambda) +
               conductor_participation(grid, "sidewall", lambda);
    };
    const double err_h = std::abs(p_all_walls(box.a / 50.0) - exact) / exact;
    const double err_h2 = std::abs(p_all_walls(box.a / 100.0) - exact) / exact;
    CHECK(err_h < 0.05);
    CHECK(err_h2 < err_h);
    const double order = std::log2(err_h / err_h2);
    CHECK(order >= 0.8);
    MESSAGE("conductor oracle: err " << err_h << " -> " << err_h2 << ", order " << order);

    FieldGrid grid = oracle::sample_pillbox(box, box.a / 50.0);
    // Doubling lambda doubles p_cond.
    CHECK(conductor_participation(grid, "floor", 2.0 * lambda) ==
          doctest::Approx(2.0 * conductor_participation(grid, "floor", lambda)).epsilon(1e-12));

    // A surface where H is everywhere normal: rotate H to be radial on the
    // side wall; tangential component vanishes.
    FieldGrid radial = grid;
    for (std::size_t i = 0; i < radial.cell_count(); ++i) {
        auto p = radial.cell_position(i);
        const double r = std::hypot(p[0], p[1]);
        if (r == 0.0) continue;
        const double mag = std::sqrt(norm_sq(radial.h_field[i]));
        radial.h_field[i] = {Complex(0, mag * p[0] / r), Complex(0, mag * p[1] / r),
                             Complex(0, 0)};
    }
    CHECK(conductor_participation(radial, "sidewall", lambda) <
          1e-3 * conductor_participation(grid, "sidewall", lambda));
}

TEST_CASE("seam admittance matches the analytic side-wall ring value") {
    oracle::Pillbox box(0.0473, 0.004);
    const double exact = box.sidewall_seam_admittance();

    auto y_at = [&](double h) {
        FieldGrid grid = oracle::sample_pillbox(box, h);
        return seam_admittance(grid, "sidewall_seam", box.frequency_hz);
    };
    const double err_h = std::abs(y_at(box.a / 50.0) - exact) / exact;
    const double err_h2 = std::abs(y_at(box.a / 100.0) - exact) / exact;
    CHECK(err_h < 0.05);
    CHECK(err_h2 < err_h);
    MESSAGE("seam oracle: err " << err_h << " -> " << err_h2 << ", order "
                                << std::log2(err_h / err_h2));

    FieldGrid grid = oracle::sample_pillbox(box, box.a / 50.0);
    // Explicit 1/omega: doubling the frequency at fixed fields halves y.
    CHECK(seam_admittance(grid, "sidewall_seam", 2.0 * box.frequency_hz) ==
          doctest::Approx(0.5 * seam_admittance(grid, "sidewall_seam", box.frequency_hz))
              .epsilon(1e-12));

    // A seam along which H_par vanishes: make H purely radial.
    FieldGrid radial = grid;
    for (std::size_t i = 0; i < radial.cell_count(); ++i) {
        auto p = radial.cell_position(i);
        const double r = std::hypot(p[0], p[1]);
        if (r == 0.0) continue;
        const double mag = std::sqrt(norm_sq(radial.h_field[i]));
        radial.h_field[i] = {Complex(0, mag * p[0] / r), Complex(0, mag * p[1] / r),
                             Complex(0, 0)};
    }
    CHECK(seam_admittance(radial, "sidewall_seam", box.frequency_hz) <
          1e-3 * seam_admittance(grid, "sidewall_seam", box.frequency_hz));

    SUBCASE("empty path and unknown seam are errors") {
        SeamPath empty{"x", true, {}};
        CHECK_THROWS_AS(seam_admittance_path(grid, empty, box.frequency_hz), Error);
        CHECK_THROWS_AS(seam_admittance(grid, "nope", box.frequency_hz), Error);
    }
}

TEST_CASE("q_from_channel arithmetic") {
    MaterialTable mats = table_s1();
    const double f = 4.5e9;

    SUBCASE("full dielectric participation at the PCB loss tangent") {
        LossChannel ch;
        ch.kind = ChannelKind::bulk_dielectric;
        ch.material = "Rogers";
        ch.participation = 1.0;
        CHECK(q_from_channel(ch, mats, f) == doctest::Approx(1.0 / 7e-4).epsilon(1e-12));
    }
    SUBCASE("seam Q is the conductance over the admittance") {
        LossChannel ch;
        ch.kind = ChannelKind::seam;
        ch.material = "AlAl_joint";  // 700 S/m
        ch.admittance = 700.0;
        ch.eval_frequency_hz = f;
        CHECK(q_from_channel(ch, mats, f) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("conductor Q in the physically consistent orientation") {
        LossChannel ch;
        ch.kind = ChannelKind::conductor;
        ch.material = "Al";  // lambda 50 nm, R_s 3 uOhm
        ch.participation = 1e-9;
        // Independent arithmetic: omega mu0 lambda / (R_s p).
        const double expected = (2.0 * kPi * f) * kMu0 * 50e-9 / (3e-6 * 1e-9);
        CHECK(expected == doctest::Approx(5.92e11).epsilon(0.01));
        CHECK(q_from_channel(ch, mats, f) == doctest::Approx(expected).epsilon(1e-12));
        // Q falls as the surface resistance grows.
        MaterialTable worse = mats;
        worse.set("Al", MaterialProperty::surface_resistance, 6e-6);
        CHECK(q_from_channel(ch, worse, f) < q_from_channel(ch, mats, f));
    }
    SUBCASE("monotone: larger loss rates never increase Q") {
        LossChannel die;
        die.kind = ChannelKind::bulk_dielectric;
        die.material = "Rogers";
        die.participation = 0.3;
        MaterialTable lossier = mats;
        lossier.set("Rogers", MaterialProperty::loss_tangent, 7e-3);
        CHECK(q_from_channel(die, lossier, f) < q_from_channel(die, mats, f));

        LossChannel seam;
        seam.kind = ChannelKind::seam;
        seam.material = "AlAl_joint";
        seam.eval_frequency_hz = f;
        seam.admittance = 1e-3;
        const double q1 = q_from_channel(seam, mats, f);
        seam.admittance = 2e-3;
        CHECK(q_from_channel(seam, mats, f) < q1);
    }
    SUBCASE("missing loss rates are reported") {
        LossChannel ch;
        ch.kind = ChannelKind::surface_dielectric;
        ch.material = "AgOx";  // no loss tangent in the table
        ch.participation = 1e-6;
        CHECK_THROWS_WITH_AS(q_from_channel(ch, mats, f), doctest::Contains("property absent"),
                             Error);
    }
}

TEST_CASE("assemble_budget: inverse-Q summation, T1, unbudgeted carry-through") {
    MaterialTable mats = table_s1();
    const double f = 4.5e9;

    SUBCASE("two equal channels halve the Q") {
        std::vector<LossChannel> channels(2);
        for (auto& ch : channels) {
            ch.kind = ChannelKind::bulk_dielectric;
            ch.material = "Rogers";
            ch.participation = 1.0 / (1e6 * 7e-4);  // Q = 1e6
        }
        QBudget b = assemble_budget(channels, mats, f);
        CHECK(b.total_q == doctest::Approx(5e5).epsilon(1e-9));
        CHECK(b.total_q <= b.entries[0].q_limit);
        // 1/total = sum of inverses, to 1e-12.
        double inv = 0.0;
        for (const auto& e : b.entries) inv += 1.0 / e.q_limit;
        CHECK(1.0 / b.total_q == doctest::Approx(inv).epsilon(1e-12));
    }
    SUBCASE("large budget Qs map to T1 = Q/omega") {
        std::vector<LossChannel> channels(1);
        channels[0].kind = ChannelKind::bulk_dielectric;
        channels[0].material = "Rogers";
        channels[0].participation = 1.0 / (5e8 * 7e-4);  // total Q 5e8
        QBudget b = assemble_budget(channels, mats, f);
        CHECK(b.total_q == doctest::Approx(5e8).epsilon(1e-9));
        CHECK(b.t1_limit_s == doctest::Approx(17.7e-3).epsilon(0.005));

        channels[0].participation = 1.0 / (3.5e7 * 7e-4);  // Q ~ 35 million
        b = assemble_budget(channels, mats, f);
        CHECK(b.t1_limit_s == doctest::Approx(1.24e-3).epsilon(0.005));
    }
    SUBCASE("channels without loss rates are carried as unbudgeted") {
        std::vector<LossChannel> channels(2);
        channels[0].kind = ChannelKind::bulk_dielectric;
        channels[0].material = "Rogers";
        channels[0].participation = 1e-6;
        channels[1].kind = ChannelKind::surface_dielectric;
        channels[1].material = "AgOx";  // no tan delta in Table S1
        channels[1].region_or_surface = "pcb_traces";
        channels[1].participation = 1e-7;
        QBudget b = assemble_budget(channels, mats, f);
        REQUIRE(b.entries.size() == 2);
        CHECK(b.entries[0].budgeted);
        CHECK(!b.entries[1].budgeted);
        CHECK(b.entries[1].note.find("property absent") != std::string::npos);
        CHECK(b.total_q == doctest::Approx(1.0 / (1e-6 * 7e-4)).epsilon(1e-9));
    }
    SUBCASE("empty channel list is an error") {
        CHECK_THROWS_AS(assemble_budget({}, mats, f), Error);
    }
}

TEST_CASE("seam bound inversion and linearity") {
    const double f = 4.5e9;
    const double omega = 2.0 * kPi * f;
    // y chosen so the bound lands at 3e3 S/m for T1 = 100 us.
    const double y = 3e3 / (omega * 100e-6);
    CHECK(y == doctest::Approx(1.06e-3).epsilon(0.005));
    CHECK(seam_bound_from_t1(100e-6, f, y) == doctest::Approx(3e3).epsilon(1e-12));
    CHECK(seam_bound_from_t1(200e-6, f, y) ==
          doctest::Approx(2.0 * seam_bound_from_t1(100e-6, f, y)).epsilon(1e-12));
    CHECK_THROWS_AS(seam_bound_from_t1(0.0, f, y), Error);
    CHECK_THROWS_AS(seam_bound_from_t1(100e-6, f, -1.0), Error);
}

TEST_CASE("t1_bound: 1/f law for fixed-Q budgets") {
    MaterialTable mats = table_s1();
    std::vector<LossChannel> channels(1);
    channels[0].kind = ChannelKind::bulk_dielectric;
    channels[0].material = "Rogers";
    channels[0].participation = 1.0 / (2.8e6 * 7e-4);  // Q = 2.8e6

    auto curve = t1_bound({4.5e9, 9e9}, channels, mats);
    REQUIRE(curve.size() == 2);
    CHECK(curve[0].second == doctest::Approx(2.8e6 / (2.0 * kPi * 4.5e9)).epsilon(1e-12));
    CHECK(curve[0].second == doctest::Approx(99e-6).epsilon(0.01));
    // Doubling f exactly halves T1 for frequency-independent participations.
    CHECK(curve[1].second == doctest::Approx(curve[0].second / 2.0).epsilon(1e-12));

    CHECK_THROWS_AS(t1_bound({}, channels, mats), Error);
}

TEST_CASE("channel declarations parse") {
    auto channels = parse_channels(
        "# packaging channels\n"
        "bulk_dielectric region=gap_effective material=Rogers\n"
        "surface_dielectric surface=floor material=AlOx\n"
        "conductor surface=sidewall material=Al\n"
        "seam seam=lid_joint material=AlAl_joint\n",
        "inline");
    REQUIRE(channels.size() == 4);
    CHECK(channels[0].kind == ChannelKind::bulk_dielectric);
    CHECK(channels[1].material == "AlOx");
    CHECK(channels[3].region_or_surface == "lid_joint");
    CHECK_THROWS_AS(parse_channels("weird_kind region=a material=b\n", "inline"), Error);
    CHECK_THROWS_AS(parse_channels("conductor material=Al\n", "inline"), Error);
}

TEST_CASE("channel evaluation on the pillbox grid resolves material geometry") {
    MaterialTable mats = table_s1();
    oracle::Pillbox box(0.0473, 0.004);
    FieldGrid grid = oracle::sample_pillbox(box, box.a / 50.0);

    LossChannel oxide;
    oxide.kind = ChannelKind::surface_dielectric;
    oxide.region_or_surface = "floor";
    oxide.material = "AlOx";
    evaluate_channel(oxide, grid, mats, box.frequency_hz);
    CHECK(oxide.participation ==
          doctest::Approx(box.plate_oxide_participation(3e-9, 10.0)).epsilon(1e-9));

    LossChannel wall;
    wall.kind = ChannelKind::conductor;
    wall.region_or_surface = "sidewall";
    wall.material = "Al";
    evaluate_channel(wall, grid, mats, box.frequency_hz);
    CHECK(wall.participation > 0.0);

    LossChannel seam;
    seam.kind = ChannelKind::seam;
    seam.region_or_surface = "sidewall_seam";
    seam.material = "AlAl_joint";
    evaluate_channel(seam, grid, mats, box.frequency_hz);
    CHECK(seam.admittance ==
          doctest::Approx(box.sidewall_seam_admittance()).epsilon(0.05));
    CHECK(seam.eval_frequency_hz == box.frequency_hz);
}
