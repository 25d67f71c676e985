#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fdrkit/campaign.hpp"
#include "fdrkit/synth.hpp"

using namespace fdrkit;

namespace {

const std::filesystem::path kFixtures = FDRKIT_FIXTURE_DIR;

Netlist parse_fixture(const std::string& name) {
    CellLibrary lib = CellLibrary::load_file(kFixtures / "stdcells.lib");
    return load_netlist(kFixtures / name, lib);
}

// Test-local behavioural model of shift3: state = (s0, s1, s2), output = s2
// entering the cycle, then shift. Enumerates every (ff, cycle) injection.
struct Shift3Oracle {
    std::vector<uint8_t> din; // per cycle

    std::vector<uint8_t> golden_outputs() const {
        uint8_t st[3] = {0, 0, 0};
        std::vector<uint8_t> out;
        for (uint8_t d : din) {
            out.push_back(st[2]);
            st[2] = st[1];
            st[1] = st[0];
            st[0] = d;
        }
        return out;
    }

    bool inject(size_t ff, size_t cycle) const {
        auto golden = golden_outputs();
        // replay to the injection cycle
        uint8_t st[3] = {0, 0, 0};
        for (size_t c = 0; c < cycle; ++c) {
            st[2] = st[1];
            st[1] = st[0];
            st[0] = din[c];
        }
        st[ff] ^= 1;
        for (size_t c = cycle; c < din.size(); ++c) {
            if (st[2] != golden[c]) return true;
            st[2] = st[1];
            st[1] = st[0];
            st[0] = din[c];
        }
        return false;
    }
};

} // namespace

TEST_CASE("shift3 exhaustive campaign matches the brute-force oracle exactly") {
    Netlist n = parse_fixture("shift3.v");
    const size_t N = 16;
    Stimulus s = Stimulus::random(n, N, 31);

    FaultPlan plan;
    plan.mode = FaultPlan::Mode::Exhaustive;
    FdrTable table = run_campaign(n, s, plan);

    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0].ff == "ff1");
    CHECK(table.rows[1].ff == "ff2");
    CHECK(table.rows[2].ff == "ff3");

    size_t din_pos = n.nets[n.primary_inputs[0]] == "din" ? 0 : 1;
    Shift3Oracle oracle;
    for (size_t c = 0; c < N; ++c) oracle.din.push_back(s.input_vectors[c][din_pos]);

    for (size_t ff = 0; ff < 3; ++ff) {
        uint64_t expected_failures = 0;
        for (size_t c = 0; c < N; ++c)
            if (oracle.inject(ff, c)) ++expected_failures;
        CHECK(table.rows[ff].injections == N);
        CHECK(table.rows[ff].failures == expected_failures);
        CHECK(table.rows[ff].fdr == double(expected_failures) / double(N));
    }

    // transparent chain: fdr has the closed form (N - distance) / N
    CHECK(table.rows[0].fdr == doctest::Approx((N - 2.0) / N));
    CHECK(table.rows[1].fdr == doctest::Approx((N - 1.0) / N));
    CHECK(table.rows[2].fdr == doctest::Approx(1.0));
}

TEST_CASE("disconnected flip-flop has fdr 0 under any plan") {
    Netlist n = parse_fixture("disc.v");
    Stimulus s = Stimulus::random(n, 24, 5);

    FaultPlan exhaustive;
    FdrTable t1 = run_campaign(n, s, exhaustive);
    CHECK(t1.find("ffb")->fdr == 0.0);
    CHECK(t1.find("ffa")->fdr == 1.0);

    FaultPlan random_plan;
    random_plan.mode = FaultPlan::Mode::Random;
    random_plan.samples = 200;
    random_plan.seed = 77;
    FdrTable t2 = run_campaign(n, s, random_plan);
    CHECK(t2.find("ffb")->fdr == 0.0);
}

TEST_CASE("fdr bookkeeping invariant: fdr * injections == failures") {
    Netlist n = parse_fixture("toy_counter.v");
    Stimulus s = Stimulus::random(n, 16, 3);
    FaultPlan plan;
    FdrTable table = run_campaign(n, s, plan);
    for (const FdrRow& row : table.rows) {
        CHECK(row.fdr * double(row.injections) == double(row.failures));
        CHECK(row.fdr >= 0.0);
        CHECK(row.fdr <= 1.0);
    }
}

TEST_CASE("extending observed outputs never lowers fdr") {
    Netlist n = parse_fixture("multi.v");
    Stimulus narrow = Stimulus::random(n, 20, 8);
    narrow.observed_outputs = {*n.find_net("y1")};
    Stimulus wide = narrow;
    wide.observed_outputs = {*n.find_net("y1"), *n.find_net("y2")};

    FaultPlan plan;
    FdrTable t_narrow = run_campaign(n, narrow, plan);
    FdrTable t_wide = run_campaign(n, wide, plan);
    REQUIRE(t_narrow.rows.size() == t_wide.rows.size());
    for (size_t i = 0; i < t_narrow.rows.size(); ++i)
        CHECK(t_wide.rows[i].fdr >= t_narrow.rows[i].fdr);
    // ffb only reaches y2
    CHECK(t_narrow.find("ffb")->fdr == 0.0);
    CHECK(t_wide.find("ffb")->fdr > 0.0);
}

TEST_CASE("exhaustive campaign is a pure function of netlist and stimulus") {
    Netlist n = parse_fixture("toy_counter.v");
    Stimulus s = Stimulus::random(n, 32, 17);
    FaultPlan plan;
    FdrTable a = run_campaign(n, s, plan);
    FdrTable b = run_campaign(n, s, plan);
    REQUIRE(a.rows.size() == b.rows.size());
    for (size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].ff == b.rows[i].ff);
        CHECK(a.rows[i].failures == b.rows[i].failures);
    }
    CHECK(a.to_csv() == b.to_csv());
}

TEST_CASE("random campaign converges to the exhaustive result") {
    Netlist n = parse_fixture("toy_counter.v");
    Stimulus s = Stimulus::random(n, 16, 23);

    FaultPlan exhaustive;
    FdrTable exact = run_campaign(n, s, exhaustive);

    FaultPlan random_plan;
    random_plan.mode = FaultPlan::Mode::Random;
    random_plan.samples = 4096;
    random_plan.seed = 1001;
    FdrTable approx = run_campaign(n, s, random_plan);

    REQUIRE(exact.rows.size() == approx.rows.size());
    for (size_t i = 0; i < exact.rows.size(); ++i) {
        double p = exact.rows[i].fdr;
        double bound = 1.96 * std::sqrt(p * (1 - p) / double(random_plan.samples)) + 0.01;
        CHECK(std::abs(approx.rows[i].fdr - p) <= bound);
    }

    // same seed, same estimate
    FdrTable again = run_campaign(n, s, random_plan);
    CHECK(approx.to_csv() == again.to_csv());
}

TEST_CASE("worker count does not change the result") {
    Netlist n = parse_fixture("shift3.v");
    Stimulus s = Stimulus::random(n, 24, 4);
    FaultPlan plan;
    plan.mode = FaultPlan::Mode::Random;
    plan.samples = 300;
    plan.seed = 5;
    CHECK(run_campaign(n, s, plan, 1).to_csv() == run_campaign(n, s, plan, 4).to_csv());
}

TEST_CASE("target subset keeps netlist flip-flop order") {
    Netlist n = parse_fixture("shift3.v");
    Stimulus s = Stimulus::random(n, 8, 2);
    FaultPlan plan;
    plan.targets = {"ff3", "ff1"}; // out of order on purpose
    FdrTable table = run_campaign(n, s, plan);
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].ff == "ff1");
    CHECK(table.rows[1].ff == "ff3");

    plan.targets = {"missing"};
    CHECK_THROWS_AS(run_campaign(n, s, plan), Error);
}

TEST_CASE("chain benchmark fdr has the closed form (N - m) / N") {
    SynthSpec spec;
    spec.target_ffs = 12;
    spec.length_pattern = {2, 4, 6};
    spec.seed = 3;
    SynthCircuit circ = generate_chain_benchmark(spec);

    CellLibrary lib = CellLibrary::load_file(kFixtures / "stdcells.lib");
    Netlist n = parse_netlist(circ.netlist_text, lib);
    REQUIRE(n.flip_flops.size() == 12);
    CHECK(validate_netlist(n).empty());

    const size_t N = 16;
    Stimulus s = Stimulus::random(n, N, 29);
    FdrTable table = run_campaign(n, s, FaultPlan{});

    REQUIRE(circ.ff_distances.size() == table.rows.size());
    for (size_t i = 0; i < table.rows.size(); ++i) {
        CHECK(table.rows[i].ff == circ.ff_distances[i].first);
        double expected = double(N - size_t(circ.ff_distances[i].second)) / double(N);
        CHECK(table.rows[i].fdr == expected);
    }
}

TEST_CASE("fdr csv round trip") {
    Netlist n = parse_fixture("toy_counter.v");
    Stimulus s = Stimulus::random(n, 16, 3);
    FdrTable table = run_campaign(n, s, FaultPlan{});
    FdrTable back = FdrTable::from_csv(table.to_csv());
    REQUIRE(back.rows.size() == table.rows.size());
    for (size_t i = 0; i < table.rows.size(); ++i) {
        CHECK(back.rows[i].ff == table.rows[i].ff);
        CHECK(back.rows[i].injections == table.rows[i].injections);
        CHECK(back.rows[i].failures == table.rows[i].failures);
        CHECK(back.rows[i].fdr == table.rows[i].fdr);
    }
    CHECK_THROWS_AS(FdrTable::from_csv("bogus header\n"), Error);
}
