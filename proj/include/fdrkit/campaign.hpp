#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fdrkit/simulator.hpp"

namespace fdrkit {

struct FaultPlan {
    enum class Mode : uint8_t { Exhaustive, Random } mode = Mode::Exhaustive;
    size_t samples = 1024; // per flip-flop, Random mode only
    uint64_t seed = 1;
    std::vector<std::string> targets; // empty = every flip-flop

    void validate() const;
};

struct FdrRow {
    std::string ff;
    uint64_t injections = 0;
    uint64_t failures = 0;
    double fdr = 0.0; // failures / injections
};

struct FdrTable {
    std::vector<FdrRow> rows; // netlist flip-flop order

    std::string to_csv() const;
    static FdrTable from_csv(std::string_view text);
    const FdrRow* find(std::string_view ff_name) const;
};

/// Runs the SEU injection campaign. Exhaustive mode injects once per
/// (flip-flop, cycle); Random mode draws `samples` cycles per flip-flop
/// uniformly with replacement from a per-flip-flop seeded stream. Results
/// are identical for any worker count.
FdrTable run_campaign(const Netlist& n, const Stimulus& s, const FaultPlan& plan, int jobs = 1);

} // namespace fdrkit
