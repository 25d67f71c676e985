#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "fdrkit/rng.hpp"
#include "fdrkit/simulator.hpp"

using namespace fdrkit;

namespace {

const std::filesystem::path kFixtures = FDRKIT_FIXTURE_DIR;

Netlist parse_fixture(const std::string& name) {
    CellLibrary lib = CellLibrary::load_file(kFixtures / "stdcells.lib");
    return load_netlist(kFixtures / name, lib);
}

Stimulus zeros_stimulus(const Netlist& n, size_t cycles) {
    Stimulus s;
    s.cycles = cycles;
    s.input_vectors.assign(cycles, std::vector<uint8_t>(n.primary_inputs.size(), 0));
    s.initial_state.assign(n.flip_flops.size(), 0);
    s.observed_outputs = n.primary_outputs;
    return s;
}

} // namespace

TEST_CASE("toggle flip-flop: Q trace 0,1,0,1") {
    Netlist n = parse_fixture("toggle.v");
    Stimulus s = zeros_stimulus(n, 4);
    SimTrace trace = simulate_golden(n, s);
    REQUIRE(trace.outputs.size() == 4);
    REQUIRE(trace.states.size() == 4);
    CHECK(trace.outputs[0][0] == 0);
    CHECK(trace.outputs[1][0] == 1);
    CHECK(trace.outputs[2][0] == 0);
    CHECK(trace.outputs[3][0] == 1);
}

TEST_CASE("constant-0 circuit: all-zero trace") {
    Netlist n = parse_fixture("const0.v");
    Stimulus s = Stimulus::random(n, 12, 5);
    SimTrace trace = simulate_golden(n, s);
    for (const auto& row : trace.outputs) CHECK(row[0] == 0);
}

TEST_CASE("toy_counter golden run equals the truth-table oracle") {
    Netlist n = parse_fixture("toy_counter.v");
    REQUIRE(n.primary_inputs.size() == 2); // clk, en
    size_t en_pos = n.nets[n.primary_inputs[0]] == "en" ? 0 : 1;

    Stimulus s = Stimulus::random(n, 50, 202);
    SimTrace trace = simulate_golden(n, s);

    // independent hand-coded next-state function of the counter
    uint8_t q0 = 0, q1 = 0;
    for (size_t c = 0; c < s.cycles; ++c) {
        uint8_t en = s.input_vectors[c][en_pos];
        uint8_t out = (q0 & q1);
        CHECK(trace.states[c][0] == q0); // ff0 first in lexicographic order
        CHECK(trace.states[c][1] == q1);
        CHECK(trace.outputs[c][0] == out);
        uint8_t nq0 = q0 ^ en;
        uint8_t nq1 = q1 ^ (q0 & en);
        q0 = nq0;
        q1 = nq1;
    }
}

TEST_CASE("synchronous reset forces the next state to 0") {
    Netlist n = parse_fixture("rst.v");
    // inputs are clk, r, d in declaration order
    REQUIRE(n.primary_inputs.size() == 3);
    Stimulus s = zeros_stimulus(n, 4);
    auto set = [&](size_t cycle, const std::string& net, uint8_t v) {
        for (size_t p = 0; p < n.primary_inputs.size(); ++p)
            if (n.nets[n.primary_inputs[p]] == net) s.input_vectors[cycle][p] = v;
    };
    set(0, "d", 1);           // load 1
    set(1, "d", 1);
    set(1, "r", 1);           // reset wins over d
    set(2, "d", 1);
    SimTrace trace = simulate_golden(n, s);
    CHECK(trace.outputs[0][0] == 0);
    CHECK(trace.outputs[1][0] == 1); // loaded
    CHECK(trace.outputs[2][0] == 0); // reset cleared it
    CHECK(trace.outputs[3][0] == 1);
}

TEST_CASE("inject_seu on the toggle circuit diverges at the injection cycle") {
    Netlist n = parse_fixture("toggle.v");
    Stimulus s = zeros_stimulus(n, 4);
    CHECK(inject_seu(n, s, "ff", 1));

    // the first mismatching cycle is the injection cycle itself
    Simulator sim(n);
    SimTrace golden = sim.run_golden(s);
    std::vector<uint8_t> state = golden.states[1];
    state[0] ^= 1;
    auto tail = sim.run_tail(s, 1, state);
    CHECK(tail[0][0] != golden.outputs[1][0]);
}

TEST_CASE("flip with no structural path to an observed output never fails") {
    Netlist n = parse_fixture("disc.v");
    Stimulus s = Stimulus::random(n, 16, 99);
    for (size_t c = 0; c < s.cycles; ++c) CHECK(!inject_seu(n, s, "ffb", c));
    // ffa feeds y combinationally: any flip is visible immediately
    for (size_t c = 0; c < s.cycles; ++c) CHECK(inject_seu(n, s, "ffa", c));
}

TEST_CASE("a flip that cannot reach the output before the trace ends is masked") {
    Netlist n = parse_fixture("shift3.v");
    Stimulus s = Stimulus::random(n, 16, 7);
    // ff1 is two stages from dout: a flip at cycle 15 or 14 dies in transit
    CHECK(!inject_seu(n, s, "ff1", 15));
    CHECK(!inject_seu(n, s, "ff1", 14));
    CHECK(inject_seu(n, s, "ff1", 13));
    // the last stage is observed directly
    CHECK(inject_seu(n, s, "ff3", 15));
}

TEST_CASE("golden-run consistency: double flip restores the golden trace") {
    Netlist n = parse_fixture("shift3.v");
    Stimulus s = Stimulus::random(n, 20, 11);
    Simulator sim(n);
    SimTrace golden = sim.run_golden(s);
    for (size_t c : {size_t(0), size_t(7), size_t(19)}) {
        std::vector<uint8_t> state = golden.states[c];
        state[1] ^= 1;
        state[1] ^= 1; // flip applied twice
        auto tail = sim.run_tail(s, c, state);
        for (size_t k = 0; k < tail.size(); ++k) CHECK(tail[k] == golden.outputs[c + k]);
        CHECK(!sim.diverges_from(s, golden, c, state));
    }
}

TEST_CASE("simulator error paths") {
    Netlist n = parse_fixture("toggle.v");
    Stimulus s = zeros_stimulus(n, 4);

    CHECK_THROWS_AS(inject_seu(n, s, "nope", 0), Error);
    try {
        inject_seu(n, s, "nope", 0);
        FAIL("expected");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unknown_flip_flop);
    }

    try {
        inject_seu(n, s, "ff", 4);
        FAIL("expected");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::cycle_out_of_range);
    }

    Stimulus bad_init = s;
    bad_init.initial_state.clear();
    try {
        simulate_golden(n, bad_init);
        FAIL("expected");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::uninitialized_state);
    }

    Stimulus bad_inputs = s;
    bad_inputs.input_vectors[2].clear();
    try {
        simulate_golden(n, bad_inputs);
        FAIL("expected");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unknown_input);
    }
}

TEST_CASE("undriven net read by the simulator is rejected") {
    CellLibrary lib = CellLibrary::standard();
    Netlist n = parse_netlist("module m (y);\n output y;\n wire w;\n BUF u1 (.A(w), .Y(y));\n"
                              "endmodule\n",
                              lib);
    try {
        Simulator sim(n);
        FAIL("expected");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::undriven_net);
    }
}

TEST_CASE("stimulus text format") {
    Netlist n = parse_fixture("toy_counter.v");
    Stimulus s = Stimulus::parse("# demo\n"
                                 "inputs clk en\n"
                                 "observe count_out\n"
                                 "init 0\n"
                                 "vector 2\n" // en=1 (bit 1), clk=0
                                 "vector 0\n"
                                 "vector 3\n",
                                 n);
    CHECK(s.cycles == 3);
    size_t en_pos = n.nets[n.primary_inputs[0]] == "en" ? 0 : 1;
    CHECK(s.input_vectors[0][en_pos] == 1);
    CHECK(s.input_vectors[1][en_pos] == 0);
    CHECK(s.observed_outputs == n.primary_outputs);

    CHECK_THROWS_AS(Stimulus::parse("inputs clk\ninit 0\nvector 0\n", n), Error); // en missing
    CHECK_THROWS_AS(Stimulus::parse("inputs clk en nope\ninit 0\nvector 0\n", n), Error);
    CHECK_THROWS_AS(Stimulus::parse("inputs clk en\ninit 0\nvector 7\n", n), Error); // too wide
    CHECK_THROWS_AS(Stimulus::parse("inputs clk en\nvector 0\n", n), Error);         // no init
    CHECK_THROWS_AS(Stimulus::parse("inputs clk en\ninit 0\nobserve clk\nvector 0\n", n), Error);
}

TEST_CASE("random stimulus is reproducible and well formed") {
    Netlist n = parse_fixture("toy_counter.v");
    Stimulus a = Stimulus::random(n, 32, 12);
    Stimulus b = Stimulus::random(n, 32, 12);
    CHECK(a.input_vectors == b.input_vectors);
    CHECK_NOTHROW(a.validate(n));
    Stimulus c = Stimulus::random(n, 32, 13);
    CHECK(a.input_vectors != c.input_vectors);
}
