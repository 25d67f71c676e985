#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "fdrkit/netlist.hpp"

namespace fdrkit {

/// Workload description: per-cycle primary-input bits, initial flip-flop
/// state, and the primary outputs whose values define failure.
struct Stimulus {
    size_t cycles = 0;
    std::vector<std::vector<uint8_t>> input_vectors; // [cycle][pi], netlist PI order
    std::vector<uint8_t> initial_state;              // [ff], netlist FF order
    std::vector<NetId> observed_outputs;             // non-empty subset of the POs

    /// Seeded uniform random input bits, all-zero initial state, all primary
    /// outputs observed.
    static Stimulus random(const Netlist& n, size_t cycles, uint64_t seed);

    /// Parses the stimulus text format (see docs/formats.md).
    static Stimulus parse(std::string_view text, const Netlist& n,
                          std::string_view filename = "<stimulus>");
    static Stimulus load_file(const std::filesystem::path& path, const Netlist& n);

    void validate(const Netlist& n) const;
};

struct SimTrace {
    std::vector<std::vector<uint8_t>> outputs; // [cycle][observed output]
    std::vector<std::vector<uint8_t>> states;  // [cycle][ff], state entering the cycle
};

/// Cycle-accurate evaluator. Each cycle: apply inputs, evaluate the
/// combinational logic in topological order, record the observed outputs,
/// then clock every flip-flop (D -> Q, reset sampled synchronously).
/// Immutable after construction; all run methods are const and thread-safe.
class Simulator {
public:
    explicit Simulator(const Netlist& n);

    const Netlist& netlist() const { return *netlist_; }

    SimTrace run_golden(const Stimulus& s) const;

    /// Simulates cycles [start_cycle, N) from an explicit flip-flop state.
    /// Returns the observed-output rows for that range.
    std::vector<std::vector<uint8_t>> run_tail(const Stimulus& s, size_t start_cycle,
                                               std::vector<uint8_t> state) const;

    /// True iff the tail simulation from `state` differs from the golden
    /// outputs anywhere in [start_cycle, N). Stops at the first mismatch.
    bool diverges_from(const Stimulus& s, const SimTrace& golden, size_t start_cycle,
                       std::vector<uint8_t> state) const;

    /// Single Event Upset: inverts `ff`'s state bit as the state enters
    /// `cycle` and reports whether any observed output in [cycle, N) differs
    /// from the golden run.
    bool inject_seu(const Stimulus& s, const SimTrace& golden, size_t ff_index,
                    size_t cycle) const;

    size_t ff_index_of(std::string_view ff_name) const; // throws UnknownFlipFlop

private:
    struct CombOp {
        CombFunc func;
        uint32_t operands[3];
        uint32_t arity;
        NetId out;
    };
    struct FfOp {
        NetId d = kNoNet;
        NetId q = kNoNet;
        NetId reset = kNoNet;
    };

    void eval_cycle(const std::vector<uint8_t>& inputs, std::vector<uint8_t>& state,
                    std::vector<uint8_t>& nets) const;

    const Netlist* netlist_;
    std::vector<CombOp> comb_ops_; // topological order
    std::vector<FfOp> ff_ops_;     // netlist FF order
};

SimTrace simulate_golden(const Netlist& n, const Stimulus& s);

bool inject_seu(const Netlist& n, const Stimulus& s, std::string_view ff_name, size_t cycle);

} // namespace fdrkit
