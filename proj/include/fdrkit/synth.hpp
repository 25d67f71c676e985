#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fdrkit {

/// Generator for the desk-scale benchmark family: independent shift chains
/// of mixed depth, each with its own clock region and an observed output.
/// A bit flipped m stages before a chain's last flip-flop reaches the output
/// after exactly m clock edges, so with an N-cycle workload the exhaustive
/// functional derating factor is (N - m) / N — a smooth function of the
/// flip-flop's structural position.
struct SynthSpec {
    size_t target_ffs = 200;
    std::vector<int> length_pattern = {2, 3, 4, 6, 8, 10, 12, 14, 17, 20};
    double gate_density = 0.5; // chance of a BUF/INV between adjacent stages
    uint64_t seed = 1;
};

struct SynthCircuit {
    std::string netlist_text;
    std::string module_name;
    /// (flip-flop name, stages to the observed output), lexicographic order.
    std::vector<std::pair<std::string, int>> ff_distances;
};

SynthCircuit generate_chain_benchmark(const SynthSpec& spec);

} // namespace fdrkit
