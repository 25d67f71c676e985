#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "fdrkit/circuit_graph.hpp"
#include "fdrkit/gml.hpp"
#include "fdrkit/netlist.hpp"
#include "fdrkit/rng.hpp"
#include "fdrkit/util.hpp"

using namespace fdrkit;

namespace {

const std::filesystem::path kFixtures = FDRKIT_FIXTURE_DIR;

Netlist parse_fixture(const std::string& name) {
    CellLibrary lib = CellLibrary::load_file(kFixtures / "stdcells.lib");
    return load_netlist(kFixtures / name, lib);
}

std::vector<std::string> tokens_of(const std::string& text) {
    std::vector<std::string> out;
    for (std::string_view line : split(text, '\n'))
        for (std::string_view tok : split_ws(line)) out.emplace_back(tok);
    return out;
}

CircuitGraph random_graph(Rng& rng, size_t max_nodes = 24) {
    CircuitGraph::Builder b;
    size_t n = 1 + rng.next_below(max_nodes);
    for (size_t i = 0; i < n; ++i) {
        NodeKind kind = static_cast<NodeKind>(rng.next_below(4));
        b.add_node("n" + std::to_string(i) + "_" + std::to_string(rng.next_below(1000)), kind);
    }
    size_t edges = rng.next_below(2 * n + 1);
    for (size_t e = 0; e < edges; ++e) {
        uint32_t s = static_cast<uint32_t>(rng.next_below(n));
        uint32_t t = static_cast<uint32_t>(rng.next_below(n));
        // grid weights survive the 9-significant-digit GML format exactly
        double w = 0.25 * static_cast<double>(1 + rng.next_below(16));
        b.add_edge(s, t, w);
    }
    return b.build();
}

// Independent oracle: count distinct (driver element, load element) pairs by
// scanning nets, without going through netlist_to_graph.
size_t edge_count_oracle(const Netlist& n) {
    std::set<std::pair<std::string, std::string>> pairs;
    auto driver_name = [&](NetId net) -> std::string {
        const NetDriver& d = n.drivers[net];
        if (d.kind == NetDriver::PrimaryInput) return "port:" + n.nets[net];
        if (d.kind == NetDriver::InstancePin) return "inst:" + n.instances[d.inst].name;
        return "";
    };
    for (InstId i = 0; i < n.instances.size(); ++i) {
        const CellSpec& cell = n.cell_of(i);
        for (uint32_t pin : cell.input_pins) {
            std::string drv = driver_name(n.instances[i].pin_nets[pin]);
            if (!drv.empty()) pairs.emplace(drv, "inst:" + n.instances[i].name);
        }
    }
    for (NetId po : n.primary_outputs) {
        std::string drv = driver_name(po);
        if (!drv.empty()) pairs.emplace(drv, "port:" + n.nets[po]);
    }
    return pairs.size();
}

} // namespace

TEST_CASE("single INV: 3 nodes, 2 unit-weight edges") {
    CellLibrary lib = CellLibrary::standard();
    Netlist n = parse_netlist(
        "module tiny (a, y);\n input a;\n output y;\n INV inv1 (.A(a), .Y(y));\nendmodule\n", lib);
    CircuitGraph g = netlist_to_graph(n);
    REQUIRE(g.node_count() == 3);
    CHECK(g.node(0).label == "a");
    CHECK(g.node(0).kind == NodeKind::Input);
    CHECK(g.node(1).label == "inv1");
    CHECK(g.node(1).kind == NodeKind::Comb);
    CHECK(g.node(2).label == "y");
    CHECK(g.node(2).kind == NodeKind::Output);
    REQUIRE(g.edge_count() == 2);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 2));
    for (const GraphEdge& e : g.edges()) CHECK(e.weight == 1.0);
}

TEST_CASE("toy_counter graph matches the hand-enumerated schematic") {
    Netlist n = parse_fixture("toy_counter.v");
    CircuitGraph g = netlist_to_graph(n);
    REQUIRE(g.node_count() == 9); // 2 inputs + 2 FFs + 4 gates + 1 output

    std::vector<std::string> labels;
    for (const GraphNode& node : g.nodes()) labels.push_back(node.label);
    CHECK(labels == std::vector<std::string>{"clk", "en", "ff0", "ff1", "g0", "g1", "g2", "g3",
                                             "count_out"});
    CHECK(g.node(2).kind == NodeKind::FF);
    CHECK(g.node(4).kind == NodeKind::Comb);

    std::set<std::pair<uint32_t, uint32_t>> expected = {
        {0, 2}, {0, 3},         // clk -> ff0, ff1
        {1, 4}, {1, 5},         // en -> g0, g1
        {2, 4}, {2, 5}, {2, 7}, // q0 fanout
        {3, 6}, {3, 7},         // q1 fanout
        {4, 2},                 // d0 -> ff0
        {5, 6},                 // carry -> g2
        {6, 3},                 // d1 -> ff1
        {7, 8},                 // g3 -> count_out
    };
    std::set<std::pair<uint32_t, uint32_t>> actual;
    for (const GraphEdge& e : g.edges()) actual.emplace(e.source, e.target);
    CHECK(actual == expected);
    CHECK(g.edge_count() == edge_count_oracle(n));
}

TEST_CASE("a gate driving the same load through two pins collapses to one edge") {
    CellLibrary lib = CellLibrary::standard();
    Netlist n = parse_netlist("module m (a, y);\n input a;\n output y;\n wire n1;\n"
                              " BUF u1 (.A(a), .Y(n1));\n XOR2 u2 (.A(n1), .B(n1), .Y(y));\n"
                              "endmodule\n",
                              lib);
    CircuitGraph g = netlist_to_graph(n);
    size_t u1_to_u2 = 0;
    for (const GraphEdge& e : g.edges())
        if (g.node(e.source).label == "u1" && g.node(e.target).label == "u2") ++u1_to_u2;
    CHECK(u1_to_u2 == 1);
    CHECK(g.edge_count() == edge_count_oracle(n));
}

TEST_CASE("degree conservation") {
    Rng rng(555);
    for (int trial = 0; trial < 20; ++trial) {
        CircuitGraph g = random_graph(rng);
        size_t out_sum = 0, in_sum = 0;
        for (uint32_t v = 0; v < g.node_count(); ++v) {
            out_sum += g.out_neighbors(v).size();
            in_sum += g.in_neighbors(v).size();
        }
        CHECK(out_sum == g.edge_count());
        CHECK(in_sum == g.edge_count());
    }
}

TEST_CASE("gml writer layout") {
    CircuitGraph empty = CircuitGraph::Builder().build();
    CHECK(tokens_of(write_gml(empty)) ==
          std::vector<std::string>{"graph", "[", "directed", "1", "]"});

    CircuitGraph::Builder b;
    b.add_node("solo", NodeKind::FF);
    CircuitGraph solo = b.build();
    std::string text = write_gml(solo);
    CHECK(text.find("node [") != std::string::npos);
    CHECK(text.find("id 0") != std::string::npos);
    CHECK(text.find("label \"solo\"") != std::string::npos);
    CHECK(text.find("kind \"FF\"") != std::string::npos);
    // exactly one node block
    size_t count = 0;
    for (size_t pos = 0; (pos = text.find("node [", pos)) != std::string::npos; ++pos) ++count;
    CHECK(count == 1);

    // writer output is byte-deterministic
    CHECK(write_gml(solo) == text);
}

TEST_CASE("gml round-trip: fixtures") {
    for (const char* fixture : {"toy_counter.v", "shift3.v", "toggle.v", "multi.v"}) {
        CircuitGraph g = netlist_to_graph(parse_fixture(fixture));
        CircuitGraph back = read_gml(write_gml(g));
        CHECK(back == g);
    }
}

TEST_CASE("gml round-trip: randomized graphs") {
    Rng rng(99);
    for (int trial = 0; trial < 60; ++trial) {
        CircuitGraph g = random_graph(rng);
        CircuitGraph back = read_gml(write_gml(g));
        CHECK(back == g);
    }
}

TEST_CASE("gml reader errors") {
    CHECK_THROWS_AS(read_gml("graph [ directed 1 node [ id 0 label \"a\" kind \"COMB\" ]"
                             " edge [ source 0 target 99 weight 1 ] ]"),
                    Error);
    try {
        read_gml("graph [ directed 1 node [ id 0 label \"a\" kind \"COMB\" ]"
                 " node [ id 1 label \"b\" kind \"COMB\" ]"
                 " node [ id 2 label \"c\" kind \"COMB\" ]"
                 " edge [ source 0 target 99 weight 1 ] ]");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::dangling_edge);
    }

    try {
        read_gml("graph [ directed 1 node [ id 0 label \"a\" kind \"COMB\" ]"
                 " node [ id 1 label \"b\" kind \"COMB\" ]"
                 " edge [ source 0 target 1 weight 0 ] ]");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::non_positive_weight);
    }

    CHECK_THROWS_AS(read_gml("graph [ directed 0 ]"), Error);
    CHECK_THROWS_AS(read_gml("noise"), Error);
    CHECK_THROWS_AS(read_gml("graph [ directed 1 node [ id 5 label \"a\" kind \"COMB\" ] ]"),
                    Error); // ids must be dense
}

TEST_CASE("gml reader tolerates unknown attributes and missing weight") {
    std::vector<std::string> warnings;
    CircuitGraph g = read_gml("graph [ directed 1 creator \"tool\"\n"
                              " node [ id 0 label \"a\" kind \"COMB\" shape [ w 3 h 4 ] ]\n"
                              " node [ id 1 label \"b\" kind \"FF\" ]\n"
                              " edge [ source 0 target 1 ] ]",
                              &warnings);
    CHECK(g.node_count() == 2);
    REQUIRE(g.edge_count() == 1);
    CHECK(g.edges()[0].weight == 1.0);
    CHECK(warnings.size() == 2); // creator, shape
}

TEST_CASE("gml reader accepts nodes listed out of id order") {
    CircuitGraph g = read_gml("graph [ directed 1"
                              " node [ id 1 label \"b\" kind \"FF\" ]"
                              " node [ id 0 label \"a\" kind \"COMB\" ]"
                              " edge [ source 0 target 1 weight 2 ] ]");
    CHECK(g.node(0).label == "a");
    CHECK(g.node(1).label == "b");
    CHECK(g.edges()[0].weight == 2.0);
}

TEST_CASE("builder rejects bad input") {
    CircuitGraph::Builder b;
    b.add_node("a", NodeKind::Comb);
    CHECK_THROWS_AS(b.add_node("a", NodeKind::FF), Error);          // duplicate label
    CHECK_THROWS_AS(b.add_edge(0, 7), Error);                       // unknown node
    CHECK_THROWS_AS(b.add_edge(0, 0, 0.0), Error);                  // non-positive weight
    CHECK_THROWS_AS(b.add_edge(0, 0, -1.0), Error);
}
