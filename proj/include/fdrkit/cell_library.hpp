#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fdrkit {

enum class CellKind : uint8_t { Comb, FlipFlop, Input, Output };
enum class PinDir : uint8_t { In, Out };
enum class PinRole : uint8_t { Data, Clock, Reset, Q };

enum class CombFunc : uint8_t { And2, Nand2, Or2, Nor2, Xor2, Xnor2, Inv, Buf, Mux2 };

const char* to_string(CellKind k);
const char* to_string(CombFunc f);

/// Required input-pin count for each boolean function.
int comb_arity(CombFunc f);

/// Evaluates a gate function. `inputs` follow the library's IN-pin order;
/// for Mux2 the third input is the select (select 0 -> first input).
bool eval_comb(CombFunc f, std::span<const uint8_t> inputs);

struct PinSpec {
    std::string name;
    PinDir dir;
    PinRole role;
};

struct CellSpec {
    std::string name;
    CellKind kind;
    std::optional<CombFunc> func; // set for Comb kind
    std::vector<PinSpec> pins;

    // Derived pin indices, filled at library validation.
    std::vector<uint32_t> input_pins; // all IN pins, declaration order
    int32_t output_pin = -1;          // the single OUT pin (Comb) or Q pin (FF)
    int32_t clock_pin = -1;
    int32_t reset_pin = -1;
    int32_t data_pin = -1; // FF data input

    int pin_index(std::string_view pin_name) const;
};

/// Gate/flip-flop catalogue the netlist parser resolves cell types against.
/// Text format (one cell per line, '#' comments):
///   cell <NAME> comb:<FUNC> <pin>:<in|out>:<data|clock|reset|q> ...
///   cell <NAME> ff          <pin>:... (one data-in, one clock-in, one q-out, optional reset-in)
class CellLibrary {
public:
    static CellLibrary parse(std::string_view text, std::string_view filename = "<library>");
    static CellLibrary load_file(const std::filesystem::path& path);

    /// The built-in demo library (INV/BUF/AND2/.../MUX2 gates plus DFF, DFFR).
    static CellLibrary standard();

    const CellSpec* find(std::string_view cell_name) const;
    const CellSpec& at(uint32_t index) const { return cells_[index]; }
    std::optional<uint32_t> index_of(std::string_view cell_name) const;
    size_t size() const { return cells_.size(); }

    void add(CellSpec spec); // validates the entry invariants

private:
    std::vector<CellSpec> cells_;
    std::unordered_map<std::string, uint32_t> by_name_;
};

} // namespace fdrkit
