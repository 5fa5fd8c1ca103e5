#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "shiftcast/domain/pipeline.hpp"
#include "shiftcast/domain/records_io.hpp"
#include "shiftcast/error.hpp"
#include "shiftcast/io/csv.hpp"

using namespace shiftcast;
using namespace shiftcast::domain;

namespace {

const ComponentSpec& c0402() { return *find_spec(builtin_specs(), "C0402"); }

PasteDeposit deposit(std::string comp, int pad, double vol = 100.0) {
    return {"B1", std::move(comp), pad, 10.0, -4.0, 1.5, vol};
}

PlacementRecord placement(std::string comp, std::string spec = "C0402") {
    PlacementRecord p;
    p.board_id = "B1";
    p.component_id = std::move(comp);
    p.spec_name = std::move(spec);
    p.setting_id = 1;
    p.designed_offset_x_um = 235.37;
    p.tested_offset_x_um = 242.17;
    p.place_pressure_gf = 150.0;
    return p;
}

template <typename F>
ErrorKind error_kind(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected shiftcast::Error");
    return ErrorKind::Io;
}

struct RandomRecords {
    std::vector<PasteDeposit> deposits;
    std::vector<PlacementRecord> placements;
};

RandomRecords random_records(std::mt19937_64& rng, std::size_t count) {
    std::uniform_real_distribution<double> off(-300.0, 300.0);
    std::uniform_real_distribution<double> ang(-8.0, 8.0);
    std::uniform_real_distribution<double> vol(40.0, 160.0);
    std::uniform_int_distribution<int> spec_pick(0, 5);
    std::uniform_int_distribution<int> setting(1, 33);
    RandomRecords out;
    for (std::size_t i = 0; i < count; ++i) {
        const std::string comp = "K" + std::to_string(1000 + i);
        for (int pad : {2, 1}) {
            out.deposits.push_back({"B7", comp, pad, off(rng), off(rng), ang(rng), vol(rng)});
        }
        PlacementRecord p;
        p.board_id = "B7";
        p.component_id = comp;
        p.spec_name = builtin_specs()[static_cast<std::size_t>(spec_pick(rng))].name;
        p.setting_id = setting(rng);
        p.designed_offset_x_um = off(rng);
        p.designed_offset_y_um = off(rng);
        p.designed_angle_deg = ang(rng);
        p.place_pressure_gf = 150.0;
        p.tested_offset_x_um = off(rng);
        p.tested_offset_y_um = off(rng);
        p.tested_angle_deg = ang(rng);
        out.placements.push_back(std::move(p));
    }
    return out;
}

}  // namespace

TEST_SUITE("component specs") {
    TEST_CASE("built-in dimensions") {
        REQUIRE(builtin_specs().size() == 6);
        CHECK(c0402().length_um == 1000.0);
        CHECK(c0402().width_um == 500.0);
        CHECK(find_spec(builtin_specs(), "R01005")->length_um == 400.0);
        CHECK(find_spec(builtin_specs(), "C0201")->width_um == 300.0);
        CHECK(find_spec(builtin_specs(), "X9999") == nullptr);
        for (const auto& s : builtin_specs()) {
            CHECK(s.length_um >= s.width_um);
            CHECK(s.width_um > 0.0);
        }
    }
}

TEST_SUITE("pair_deposits") {
    TEST_CASE("orders by pad index") {
        const std::vector<PasteDeposit> ds{deposit("K1", 2), deposit("K1", 1)};
        const auto pair = pair_deposits(ds);
        CHECK(pair.pad1.pad_index == 1);
        CHECK(pair.pad2.pad_index == 2);
    }
    TEST_CASE("wrong counts") {
        const std::vector<PasteDeposit> one{deposit("K1", 1)};
        const std::vector<PasteDeposit> three{deposit("K1", 1), deposit("K1", 2), deposit("K1", 2)};
        CHECK(error_kind([&] { (void)pair_deposits(one); }) == ErrorKind::MissingDeposit);
        CHECK(error_kind([&] { (void)pair_deposits(three); }) == ErrorKind::MissingDeposit);
    }
    TEST_CASE("duplicate pad") {
        const std::vector<PasteDeposit> dup{deposit("K1", 1), deposit("K1", 1)};
        CHECK(error_kind([&] { (void)pair_deposits(dup); }) == ErrorKind::DuplicatePad);
    }
}

TEST_SUITE("featurize") {
    TEST_CASE("setting-1 values on C0402") {
        PlacementRecord p = placement("K1");
        p.designed_offset_x_um = 76.84;
        p.tested_offset_x_um = 76.84;
        const DepositPair pair{deposit("K1", 1, 80.0), deposit("K1", 2, 80.0)};
        const auto row = featurize(pair, p, c0402());
        CHECK(row.x[5] == doctest::Approx(0.07684).epsilon(1e-12));
        CHECK(row.x[3] == doctest::Approx(0.80).epsilon(1e-12));
        CHECK(row.x[4] == 0.0);
    }
    TEST_CASE("shift X ratio") {
        const DepositPair pair{deposit("K1", 1), deposit("K1", 2)};
        const auto row = featurize(pair, placement("K1"), c0402());
        CHECK(std::abs(row.y_x - 0.0068) < 1e-12);
    }
    TEST_CASE("tested equals designed gives zero shift") {
        PlacementRecord p = placement("K1");
        p.designed_offset_y_um = 71.12;
        p.designed_angle_deg = -6.92;
        p.tested_offset_x_um = p.designed_offset_x_um;
        p.tested_offset_y_um = p.designed_offset_y_um;
        p.tested_angle_deg = p.designed_angle_deg;
        const auto row = featurize({deposit("K1", 1), deposit("K1", 2)}, p, c0402());
        CHECK(row.y_x == 0.0);
        CHECK(row.y_y == 0.0);
        CHECK(row.y_ang == 0.0);
    }
    TEST_CASE("pair center, mean angle and volume difference sign") {
        DepositPair pair{{"B1", "K1", 1, 100.0, 20.0, 2.0, 110.0},
                         {"B1", "K1", 2, 60.0, -10.0, 1.0, 70.0}};
        const auto row = featurize(pair, placement("K1"), c0402());
        CHECK(row.x[0] == doctest::Approx(80.0 / 1000.0));
        CHECK(row.x[1] == doctest::Approx(5.0 / 500.0));
        CHECK(row.x[2] == doctest::Approx(1.5));
        CHECK(row.x[3] == doctest::Approx(0.9));
        CHECK(row.x[4] == doctest::Approx(0.4));
        CHECK(row.x[8] == 150.0);
    }
    TEST_CASE("error paths") {
        ComponentSpec bad{"BAD", ComponentKind::Resistor, 0.0, 100.0};
        const DepositPair pair{deposit("K1", 1), deposit("K1", 2)};
        CHECK(error_kind([&] { (void)featurize(pair, placement("K1"), bad); }) ==
              ErrorKind::NonPositiveDimension);
        PlacementRecord p = placement("K1");
        p.tested_angle_deg = NAN;
        CHECK(error_kind([&] { (void)featurize(pair, p, c0402()); }) == ErrorKind::NonFiniteInput);
    }
    TEST_CASE("round trip, purity and antisymmetry on random records") {
        std::mt19937_64 rng(21);
        const auto recs = random_records(rng, 300);
        for (std::size_t i = 0; i < recs.placements.size(); ++i) {
            const auto& p = recs.placements[i];
            const auto& spec = *find_spec(builtin_specs(), p.spec_name);
            const auto pair = pair_deposits(std::span(recs.deposits).subspan(2 * i, 2));
            const auto row = featurize(pair, p, spec);
            CHECK(std::abs(row.x[5] * spec.length_um - p.designed_offset_x_um) <=
                  1e-9 * std::max(1.0, std::abs(p.designed_offset_x_um)));
            CHECK(std::abs((row.y_x + row.x[5]) * spec.length_um - p.tested_offset_x_um) <=
                  1e-9 * std::max(1.0, std::abs(p.tested_offset_x_um)));
            CHECK(featurize(pair, p, spec) == row);
            for (double v : row.x) {
                CHECK(std::isfinite(v));
            }
            CHECK(row.x[3] > 0.0);

            DepositPair swapped = pair;
            std::swap(swapped.pad1.volume_pct, swapped.pad2.volume_pct);
            const auto row2 = featurize(swapped, p, spec);
            CHECK(row2.x[4] == -row.x[4]);
            CHECK(row2.x[3] == row.x[3]);
        }
    }
}

TEST_SUITE("join_spi_aoi") {
    TEST_CASE("full-size matched join") {
        std::vector<PasteDeposit> deposits;
        std::vector<PlacementRecord> placements;
        for (const auto& spec : builtin_specs()) {
            for (int k = 0; k < 660; ++k) {
                const std::string comp = spec.name + "-" + std::to_string(10000 + k);
                PlacementRecord p = placement(comp, spec.name);
                p.board_id = "B-" + spec.name;
                placements.push_back(p);
                for (int pad : {1, 2}) {
                    PasteDeposit d = deposit(comp, pad);
                    d.board_id = p.board_id;
                    deposits.push_back(d);
                }
            }
        }
        REQUIRE(deposits.size() == 7920);
        const auto result = join_spi_aoi(deposits, placements, builtin_specs());
        CHECK(result.rows.size() == 3960);
        CHECK(result.diagnostics.clean());
        for (std::size_t i = 1; i < result.rows.size(); ++i) {
            const auto& a = result.rows[i - 1];
            const auto& b = result.rows[i];
            CHECK(std::tie(a.board_id, a.component_id) < std::tie(b.board_id, b.component_id));
        }
    }
    TEST_CASE("empty inputs") {
        const auto result = join_spi_aoi({}, {}, builtin_specs());
        CHECK(result.rows.empty());
        CHECK(result.diagnostics.clean());
    }
    TEST_CASE("one placement with one deposit") {
        const std::vector<PasteDeposit> ds{deposit("K1", 1)};
        const std::vector<PlacementRecord> ps{placement("K1")};
        const auto result = join_spi_aoi(ds, ps, builtin_specs());
        CHECK(result.rows.empty());
        REQUIRE(result.diagnostics.orphan_placements.size() == 1);
        CHECK(result.diagnostics.orphan_placements[0].reason == OrphanReason::MissingDeposit);
        CHECK(result.diagnostics.orphan_deposits.empty());
    }
    TEST_CASE("orphans on both sides are reported") {
        const std::vector<PasteDeposit> ds{deposit("K1", 1), deposit("K1", 2), deposit("K9", 1)};
        const std::vector<PlacementRecord> ps{placement("K1"), placement("K2")};
        const auto result = join_spi_aoi(ds, ps, builtin_specs());
        CHECK(result.rows.size() == 1);
        REQUIRE(result.diagnostics.orphan_placements.size() == 1);
        CHECK(result.diagnostics.orphan_placements[0].component_id == "K2");
        CHECK(result.diagnostics.orphan_placements[0].reason == OrphanReason::NoDeposits);
        REQUIRE(result.diagnostics.orphan_deposits.size() == 1);
        CHECK(result.diagnostics.orphan_deposits[0].component_id == "K9");
    }
    TEST_CASE("unknown spec") {
        const std::vector<PlacementRecord> ps{placement("K1", "C9999")};
        CHECK(error_kind([&] { (void)join_spi_aoi({}, ps, builtin_specs()); }) ==
              ErrorKind::UnknownSpec);
    }
    TEST_CASE("output size plus orphan placements equals placement count") {
        std::mt19937_64 rng(33);
        for (int trial = 0; trial < 20; ++trial) {
            auto recs = random_records(rng, 40);
            // Drop a random subset of deposits and duplicate a placement.
            std::vector<PasteDeposit> kept;
            std::bernoulli_distribution keep(0.8);
            for (const auto& d : recs.deposits) {
                if (keep(rng)) kept.push_back(d);
            }
            recs.placements.push_back(recs.placements.front());
            const auto result = join_spi_aoi(kept, recs.placements, builtin_specs());
            CHECK(result.rows.size() + result.diagnostics.orphan_placements.size() ==
                  recs.placements.size());
        }
    }
}

TEST_SUITE("shift_summary") {
    TEST_CASE("constant sample") {
        std::vector<FeatureRow> rows(20);
        for (auto& r : rows) {
            r.spec_name = "C0402";
            r.setting_id = 1;
            r.y_x = 0.0068;
        }
        const auto summary = shift_summary(rows, c0402());
        REQUIRE(summary.size() == 1);
        CHECK(summary[0].count == 20);
        CHECK(summary[0].x_um.avg == doctest::Approx(6.8).epsilon(1e-12));
        CHECK(summary[0].x_um.min == doctest::Approx(6.8).epsilon(1e-12));
        CHECK(summary[0].x_um.max == doctest::Approx(6.8).epsilon(1e-12));
        CHECK(summary[0].x_um.std == doctest::Approx(0.0));
    }
    TEST_CASE("two-sample extremes") {
        std::vector<FeatureRow> rows(2);
        rows[0].y_x = -9.7 / 1000.0;
        rows[1].y_x = 25.3 / 1000.0;
        for (auto& r : rows) {
            r.spec_name = "C0402";
            r.setting_id = 1;
        }
        const auto s = shift_summary(rows, c0402()).at(0);
        CHECK(s.x_um.min == doctest::Approx(-9.7));
        CHECK(s.x_um.max == doctest::Approx(25.3));
        CHECK(s.x_um.avg == doctest::Approx(7.8));
        CHECK(s.x_um.std == doctest::Approx(35.0 / std::sqrt(2.0)));
    }
    TEST_CASE("single row has zero std") {
        std::vector<FeatureRow> rows(1);
        rows[0].spec_name = "C0402";
        rows[0].y_ang = 2.7;
        const auto s = shift_summary(rows, c0402()).at(0);
        CHECK(s.angle_deg.std == 0.0);
        CHECK(s.angle_deg.avg == 2.7);
    }
    TEST_CASE("mixed specs are rejected") {
        std::vector<FeatureRow> rows(2);
        rows[0].spec_name = "C0402";
        rows[1].spec_name = "R0402";
        CHECK(error_kind([&] { (void)shift_summary(rows, c0402()); }) == ErrorKind::MixedSpec);
    }
    TEST_CASE("concatenation of disjoint settings") {
        std::mt19937_64 rng(8);
        std::normal_distribution<double> noise(0.0, 0.01);
        std::vector<FeatureRow> a, b;
        for (int i = 0; i < 60; ++i) {
            FeatureRow r;
            r.spec_name = "C0402";
            r.setting_id = 1 + i % 5;
            r.y_x = noise(rng);
            r.y_y = noise(rng);
            r.y_ang = noise(rng);
            a.push_back(r);
            r.setting_id = 10 + i % 4;
            b.push_back(r);
        }
        auto both = a;
        both.insert(both.end(), b.begin(), b.end());
        const auto sa = shift_summary(a, c0402());
        const auto sb = shift_summary(b, c0402());
        const auto sab = shift_summary(both, c0402());
        REQUIRE(sab.size() == sa.size() + sb.size());
        for (std::size_t i = 0; i < sab.size(); ++i) {
            const auto& expected = i < sa.size() ? sa[i] : sb[i - sa.size()];
            CHECK(sab[i].setting_id == expected.setting_id);
            CHECK(sab[i].x_um.avg == expected.x_um.avg);
            CHECK(sab[i].y_um.std == expected.y_um.std);
            CHECK(sab[i].angle_deg.max == expected.angle_deg.max);
            CHECK(sab[i].x_um.min <= sab[i].x_um.avg);
            CHECK(sab[i].x_um.avg <= sab[i].x_um.max);
        }
    }
}

TEST_SUITE("csv") {
    TEST_CASE("number formatting round-trips without exponents") {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> mant(-1.0, 1.0);
        std::uniform_int_distribution<int> expo(-12, 6);
        for (int i = 0; i < 2000; ++i) {
            const double v = mant(rng) * std::pow(10.0, expo(rng));
            const std::string s = io::format_number(v);
            CHECK(s.find_first_of("eE") == std::string::npos);
            CHECK(std::stod(s) == v);
        }
        CHECK(io::format_number(-0.0) == "0");
        CHECK(io::format_number(150.0) == "150");
    }
    TEST_CASE("feature rows survive a write/read cycle bit-exactly") {
        std::mt19937_64 rng(99);
        const auto recs = random_records(rng, 50);
        const auto joined = join_spi_aoi(recs.deposits, recs.placements, builtin_specs());
        std::istringstream in(features_csv(joined.rows));
        const auto back = read_features(io::read_csv(in, "mem"));
        CHECK(back == joined.rows);
    }
    TEST_CASE("schema errors name the column and line") {
        std::istringstream in(
            "board_id,component_id,pad_index,offset_x_um,offset_y_um,angle_deg,volume_pct\n"
            "B1,K1,1,1.0,2.0,0.5,80\n"
            "B1,K1,2,abc,2.0,0.5,80\n");
        try {
            (void)read_deposits(io::read_csv(in, "spi.csv"));
            FAIL("expected Schema error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Schema);
            const std::string msg = e.what();
            CHECK(msg.find("offset_x_um") != std::string::npos);
            CHECK(msg.find("spi.csv:3") != std::string::npos);
        }
    }
    TEST_CASE("missing column") {
        std::istringstream in("board_id,component_id\nB1,K1\n");
        CHECK_THROWS_AS((void)read_deposits(io::read_csv(in, "spi.csv")), Error);
    }
    TEST_CASE("unknown spec names its line") {
        std::istringstream in(
            "board_id,component_id,spec_name,setting_id,designed_offset_x_um,designed_offset_y_um,"
            "designed_angle_deg,place_pressure_gf,tested_offset_x_um,tested_offset_y_um,"
            "tested_angle_deg\n"
            "B1,K1,C0402,1,0,0,0,150,0,0,0\n"
            "B1,K2,Z0000,1,0,0,0,150,0,0,0\n");
        try {
            (void)read_placements(io::read_csv(in, "aoi.csv"), builtin_specs());
            FAIL("expected UnknownSpec");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::UnknownSpec);
            CHECK(std::string(e.what()).find("aoi.csv:3") != std::string::npos);
        }
    }
    TEST_CASE("empty stream") {
        std::istringstream in("");
        const auto table = io::read_csv(in, "empty");
        CHECK(read_features(table).empty());
    }
}
