#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fdrkit/cell_library.hpp"
#include "fdrkit/error.hpp"

namespace fdrkit {

using NetId = uint32_t;
using InstId = uint32_t;
inline constexpr NetId kNoNet = std::numeric_limits<NetId>::max();

struct Instance {
    std::string name;
    uint32_t cell = 0;            // index into the library
    std::vector<NetId> pin_nets;  // aligned with CellSpec::pins
};

/// Who drives a net. At most one driver per net; undriven nets are legal in
/// the IR but rejected by the simulator when they feed anything observable.
struct NetDriver {
    enum Kind : uint8_t { None, PrimaryInput, InstancePin } kind = None;
    InstId inst = 0;
    uint32_t pin = 0;
};

/// Elaborated flattened gate-level circuit.
struct Netlist {
    std::string name;
    CellLibrary lib;
    std::vector<Instance> instances;    // source order
    std::vector<std::string> nets;      // declaration order; index = NetId
    std::vector<NetDriver> drivers;     // per net
    std::vector<NetId> primary_inputs;  // declaration order
    std::vector<NetId> primary_outputs; // declaration order
    std::vector<InstId> flip_flops;     // FF instances, lexicographic by name

    std::optional<NetId> find_net(std::string_view net_name) const;
    std::optional<InstId> find_instance(std::string_view inst_name) const;
    const CellSpec& cell_of(const Instance& inst) const { return lib.at(inst.cell); }
    const CellSpec& cell_of(InstId i) const { return lib.at(instances[i].cell); }
    std::vector<std::string> ff_names() const;

    void rebuild_index(); // refresh name lookup tables after direct IR edits

private:
    std::unordered_map<std::string, NetId> net_index_;
    std::unordered_map<std::string, InstId> inst_index_;
};

struct Diagnostic {
    enum Severity : uint8_t { Warning, Error } severity = Error;
    Errc code = Errc::invalid_params;
    std::string message;

    std::string to_string() const;
};

/// Parses the structural netlist subset (single flattened module, named port
/// connections; see docs/formats.md) and elaborates it against `lib`.
Netlist parse_netlist(std::string_view text, CellLibrary lib,
                      std::string_view filename = "<netlist>");

Netlist load_netlist(const std::filesystem::path& netlist_path, const CellLibrary& lib);

/// Re-checks the Netlist invariants on an already-built IR. Empty result
/// means the netlist is well-formed.
std::vector<Diagnostic> validate_netlist(const Netlist& n);

/// Topological order of the combinational instances (FF boundaries cut).
/// Throws CombinationalLoop with the cycle path when the check fails.
std::vector<InstId> comb_topo_order(const Netlist& n);

} // namespace fdrkit
