#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lcmatch/errors.hpp"
#include "lcmatch/maps_io.hpp"
#include "lcmatch/rng.hpp"
#include "lcmatch/synthlab.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

using namespace lcmatch;

namespace {

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

SweepGrid small_grid() {
    SweepGrid grid = SweepGrid::make({0.1, 0.2}, {-0.5, 0.5}, Unit::Watts);
    grid.at(0, 0) = 1.25e-9;
    grid.at(0, 1) = -3.0;
    grid.at(1, 0) = 0.1 + 0.2; // not exactly representable: exercises round trip
    grid.at(1, 1) = 7.25e307;
    return grid;
}

} // namespace

TEST_CASE("csv round trip is bitwise for axes and values") {
    const auto path = temp_file("lcmatch_grid_rt.csv");
    SweepGrid grid = small_grid();
    grid.mask_cell(0, 1);
    save_grid(grid, path);
    const SweepGrid back = load_grid(path, Unit::Watts);
    REQUIRE(back.gate_axis.size() == 2);
    REQUIRE(back.bias_axis.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(std::memcmp(&back.gate_axis[i], &grid.gate_axis[i], sizeof(double)) == 0);
        CHECK(std::memcmp(&back.bias_axis[i], &grid.bias_axis[i], sizeof(double)) == 0);
    }
    for (std::size_t g = 0; g < 2; ++g)
        for (std::size_t b = 0; b < 2; ++b) {
            CHECK(back.is_masked(g, b) == grid.is_masked(g, b));
            if (!back.is_masked(g, b))
                CHECK(std::memcmp(&back.values[back.index(g, b)],
                                  &grid.values[grid.index(g, b)], sizeof(double)) == 0);
        }
    CHECK(back.unit == Unit::Watts);

    // a second save produces byte-identical files
    const auto path2 = temp_file("lcmatch_grid_rt2.csv");
    save_grid(back, path2);
    std::ifstream f1(path), f2(path2);
    std::string s1((std::istreambuf_iterator<char>(f1)), {});
    std::string s2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(s1 == s2);
}

TEST_CASE("csv round trip over random doubles") {
    Rng rng(99);
    std::vector<double> gate(7), bias(9);
    double acc = -1.0;
    for (auto& v : gate) { acc += rng.uniform(1e-6, 0.1); v = acc; }
    acc = -2.0;
    for (auto& v : bias) { acc += rng.uniform(1e-6, 0.5); v = acc; }
    SweepGrid grid = SweepGrid::make(gate, bias, Unit::AmpSqPerHz);
    for (auto& v : grid.values) v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-30, 10));
    const auto path = temp_file("lcmatch_grid_rand.csv");
    save_grid(grid, path);
    const SweepGrid back = load_grid(path, Unit::AmpSqPerHz);
    REQUIRE(back.values.size() == grid.values.size());
    for (std::size_t i = 0; i < grid.values.size(); ++i)
        CHECK(std::memcmp(&back.values[i], &grid.values[i], sizeof(double)) == 0);
}

TEST_CASE("csv parse errors carry line numbers") {
    const auto path = temp_file("lcmatch_grid_bad.csv");

    SUBCASE("duplicated gate value") {
        std::ofstream os(path);
        os << "# unit: watts\n# gate_axis: 0.1,0.1\n# bias_axis: 0,1\n1,2\n3,4\n";
        os.close();
        CHECK_THROWS_AS((void)load_grid(path), ParseError);
        try {
            (void)load_grid(path);
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("gate axis") != std::string::npos);
            CHECK(std::string(e.what()).find("entry 1") != std::string::npos);
        }
    }
    SUBCASE("ragged row") {
        std::ofstream os(path);
        os << "# unit: watts\n# gate_axis: 0.1,0.2\n# bias_axis: 0,1\n1,2\n3\n";
        os.close();
        try {
            (void)load_grid(path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line == 5);
        }
    }
    SUBCASE("bad number") {
        std::ofstream os(path);
        os << "# unit: watts\n# gate_axis: 0.1,0.2\n# bias_axis: 0,1\n1,zap\n3,4\n";
        os.close();
        try {
            (void)load_grid(path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line == 4);
        }
    }
    SUBCASE("unit mismatch") {
        std::ofstream os(path);
        os << "# unit: watts\n# gate_axis: 0.1,0.2\n# bias_axis: 0,1\n1,2\n3,4\n";
        os.close();
        CHECK_THROWS_AS((void)load_grid(path, Unit::Amperes), ParseError);
    }
    SUBCASE("missing header") {
        std::ofstream os(path);
        os << "nonsense\n";
        os.close();
        CHECK_THROWS_AS((void)load_grid(path), ParseError);
    }
}

TEST_CASE("large grid load performance") {
    GridSpec spec{-0.1, 0.1, 201, -10e-3, 10e-3, 401};
    SweepGrid grid = SweepGrid::make(spec.gate_axis(), spec.bias_axis(), Unit::Dimensionless);
    Rng rng(5);
    for (auto& v : grid.values) v = rng.uniform();
    const auto path = temp_file("lcmatch_grid_big.csv");
    save_grid(grid, path);
    const auto start = std::chrono::steady_clock::now();
    const SweepGrid back = load_grid(path);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(back.values.size() == grid.values.size());
    CHECK(seconds < 1.0);
}

TEST_CASE("differential conductance: linear map is exact everywhere") {
    std::vector<double> gate{0.0, 1.0, 2.0};
    std::vector<double> bias{-2e-3, -0.5e-3, 0.1e-3, 1.5e-3, 2e-3}; // non-uniform
    SweepGrid current = SweepGrid::make(gate, bias, Unit::Amperes);
    const double g0 = 17e-6;
    for (std::size_t g = 0; g < 3; ++g)
        for (std::size_t b = 0; b < 5; ++b) current.at(g, b) = g0 * bias[b];
    const SweepGrid cond = differential_conductance(current);
    CHECK(cond.unit == Unit::Siemens);
    for (std::size_t g = 0; g < 3; ++g)
        for (std::size_t b = 0; b < 5; ++b)
            CHECK(cond.at(g, b) == doctest::Approx(g0).epsilon(1e-12));
}

TEST_CASE("differential conductance: quadratic current gives linear derivative") {
    std::vector<double> gate{0.0, 1.0};
    std::vector<double> bias(41);
    for (int i = 0; i < 41; ++i) bias[i] = -2e-3 + i * 1e-4;
    SweepGrid current = SweepGrid::make(gate, bias, Unit::Amperes);
    const double a = 3.7e-3;
    for (std::size_t g = 0; g < 2; ++g)
        for (std::size_t b = 0; b < 41; ++b) current.at(g, b) = a * bias[b] * bias[b];
    const SweepGrid cond = differential_conductance(current);
    for (std::size_t b = 0; b < 41; ++b)
        CHECK(cond.at(0, b) == doctest::Approx(2.0 * a * bias[b]).epsilon(1e-9).scale(1e-9));
}

TEST_CASE("differential conductance is linear in its input") {
    Rng rng(123);
    std::vector<double> gate{0.0, 0.5, 1.0, 1.5};
    std::vector<double> bias(21);
    for (int i = 0; i < 21; ++i) bias[i] = -1e-3 + i * 1e-4;
    SweepGrid i1 = SweepGrid::make(gate, bias, Unit::Amperes);
    SweepGrid i2 = SweepGrid::make(gate, bias, Unit::Amperes);
    for (auto& v : i1.values) v = rng.uniform(-1e-9, 1e-9);
    for (auto& v : i2.values) v = rng.uniform(-1e-9, 1e-9);
    const double a = 2.5, b = -0.75;
    SweepGrid combo = SweepGrid::make(gate, bias, Unit::Amperes);
    for (std::size_t i = 0; i < combo.values.size(); ++i)
        combo.values[i] = a * i1.values[i] + b * i2.values[i];
    const SweepGrid d1 = differential_conductance(i1);
    const SweepGrid d2 = differential_conductance(i2);
    const SweepGrid dc = differential_conductance(combo);
    for (std::size_t i = 0; i < dc.values.size(); ++i) {
        const double expect = a * d1.values[i] + b * d2.values[i];
        CHECK(dc.values[i] == doctest::Approx(expect).epsilon(1e-12).scale(1e-12));
    }
}

TEST_CASE("differential conductance input checks") {
    SweepGrid two = SweepGrid::make({0.0, 1.0}, {0.0, 1.0}, Unit::Amperes);
    CHECK_THROWS_AS((void)differential_conductance(two), DomainError);
    SweepGrid wrong = SweepGrid::make({0.0, 1.0}, {0.0, 0.5, 1.0}, Unit::Watts);
    CHECK_THROWS_AS((void)differential_conductance(wrong), DomainError);
}

TEST_CASE("reflectance inversion: forward round trip on the low branch") {
    const CircuitParams params{37e-9, 63e-15, 0.0, 50.0};
    const double baseline = 0.82, f_m = 3.23e9;
    std::vector<double> gate{0.0, 0.1, 0.2};
    std::vector<double> bias{-1e-3, 0.0, 1e-3};
    SweepGrid g_true = SweepGrid::make(gate, bias, Unit::Siemens);
    Rng rng(31);
    for (auto& v : g_true.values) v = rng.uniform(1e-6, 30e-6);
    SweepGrid refl = SweepGrid::make(gate, bias, Unit::Dimensionless);
    for (std::size_t i = 0; i < refl.values.size(); ++i)
        refl.values[i] = vna_reflectance(params, Load{g_true.values[i]}, f_m, baseline);

    const InversionResult inv = conductance_from_reflectance(refl, params, baseline, f_m);
    CHECK(inv.below_minimum_cells.empty());
    CHECK(inv.out_of_model_cells.empty());
    for (std::size_t i = 0; i < g_true.values.size(); ++i)
        CHECK(inv.conductance.values[i] ==
              doctest::Approx(g_true.values[i]).epsilon(1e-6).scale(1e-12));

    // monotonicity on the low branch: larger measured reflectance, smaller G
    const double y1 = vna_reflectance(params, Load{5e-6}, f_m, baseline);
    const double y2 = vna_reflectance(params, Load{20e-6}, f_m, baseline);
    CHECK(y2 < y1);
}

TEST_CASE("reflectance inversion: endpoint, below-minimum and out-of-model cells") {
    const CircuitParams params{37e-9, 63e-15, 0.0, 50.0};
    const double baseline = 0.82, f_m = 3.25e9;
    SweepGrid refl = SweepGrid::make({0.0, 1.0}, {0.0, 1.0}, Unit::Dimensionless);
    refl.at(0, 0) = baseline;          // |Gamma| = 1: open load
    refl.at(0, 1) = baseline * 1.01;   // within the 2% epsilon: clamps to G = 0
    refl.at(1, 0) = 0.0;               // below the curve minimum
    refl.at(1, 1) = baseline * 1.5;    // far above baseline: out of model
    const InversionResult inv = conductance_from_reflectance(refl, params, baseline, f_m);
    CHECK(inv.conductance.at(0, 0) == 0.0);
    CHECK(inv.conductance.at(0, 1) == 0.0);
    CHECK(inv.conductance.at(1, 0) == doctest::Approx(inv.branch_boundary));
    REQUIRE(inv.below_minimum_cells.size() == 1);
    CHECK(inv.below_minimum_cells[0] == std::make_pair<std::size_t, std::size_t>(1, 0));
    CHECK(inv.conductance.is_masked(1, 1));
    REQUIRE(inv.out_of_model_cells.size() == 1);
    CHECK(inv.out_of_model_cells[0] == std::make_pair<std::size_t, std::size_t>(1, 1));
}

TEST_CASE("reflectance inversion: high branch recovers above-match conductances") {
    const CircuitParams params{37e-9, 63e-15, 0.0, 50.0};
    const double baseline = 1.0, f_m = 3.28e9;
    SweepGrid refl = SweepGrid::make({0.0, 1.0}, {0.0, 1.0}, Unit::Dimensionless);
    const std::vector<double> g_true{150e-6, 300e-6, 500e-6, 1e-3};
    for (std::size_t i = 0; i < 4; ++i)
        refl.values[i] = vna_reflectance(params, Load{g_true[i]}, f_m, baseline);
    InversionOptions options;
    options.branch = Branch::High;
    const InversionResult inv =
        conductance_from_reflectance(refl, params, baseline, f_m, options);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(inv.conductance.values[i] == doctest::Approx(g_true[i]).epsilon(1e-6));
}

TEST_CASE("extract_cut picks the nearest gridline, ties toward lower index") {
    SweepGrid grid = SweepGrid::make({0.0, 1.0, 2.0}, {-1.0, 0.0, 1.0}, Unit::Siemens);
    for (std::size_t g = 0; g < 3; ++g)
        for (std::size_t b = 0; b < 3; ++b) grid.at(g, b) = 10.0 * g + b;

    const Cut exact = extract_cut(grid, CutAxis::Gate, 1.0);
    CHECK(exact.axis_value_used == 1.0);
    CHECK(exact.index == 1);
    CHECK(exact.values == std::vector<double>{10.0, 11.0, 12.0});
    CHECK(exact.coordinates == grid.bias_axis);

    const Cut tie = extract_cut(grid, CutAxis::Gate, 0.5); // midway: lower index wins
    CHECK(tie.index == 0);
    CHECK(tie.axis_value_used == 0.0);

    const Cut bias_cut = extract_cut(grid, CutAxis::Bias, 0.9);
    CHECK(bias_cut.index == 2);
    CHECK(bias_cut.values == std::vector<double>{2.0, 12.0, 22.0});

    CHECK_THROWS_AS((void)extract_cut(grid, CutAxis::Gate, 5.0), DomainError);
}

TEST_CASE("masked cells propagate through cuts and stay non-numeric") {
    SweepGrid grid = SweepGrid::make({0.0, 1.0}, {0.0, 1.0, 2.0}, Unit::Dimensionless, 3.5);
    grid.mask_cell(0, 1);
    CHECK(std::isnan(grid.at(0, 1)));
    const Cut cut = extract_cut(grid, CutAxis::Gate, 0.0);
    CHECK(cut.mask[1] == 1);
    CHECK(std::isnan(cut.values[1]));
    // bijective partition: unmasked cells are numeric, masked are NaN
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        if (grid.mask[i])
            CHECK(std::isnan(grid.values[i]));
        else
            CHECK(std::isfinite(grid.values[i]));
    }
}

TEST_CASE("grid metadata sidecar") {
    const auto path = temp_file("lcmatch_meta_grid.csv");
    SweepGrid grid = SweepGrid::make({0.0, 1.0}, {0.0, 1.0}, Unit::Siemens);
    save_grid(grid, path);
    save_grid_metadata(path, "{\"seed\": 7}");
    std::ifstream is(metadata_path_for(path));
    REQUIRE(is.good());
    std::string text((std::istreambuf_iterator<char>(is)), {});
    CHECK(text.find("\"seed\"") != std::string::npos);
}
