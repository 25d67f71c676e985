#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace fdrkit {

enum class Errc {
    syntax_error,
    unknown_cell_type,
    multiple_drivers,
    unconnected_pin,
    combinational_loop,
    undriven_net,
    gml_syntax,
    dangling_edge,
    non_positive_weight,
    unknown_node,
    not_an_edge,
    empty_corpus,
    dimension_mismatch,
    degenerate_data,
    non_finite_loss,
    length_mismatch,
    empty_input,
    zero_variance,
    too_few_samples,
    unknown_input,
    uninitialized_state,
    unknown_flip_flop,
    cycle_out_of_range,
    label_mismatch,
    file_not_found,
    invalid_params,
    io_error,
};

const char* errc_name(Errc c);

/// Location of a diagnostic inside a source file (1-based line/column).
struct SourceLoc {
    std::string file;
    int line = 0;
    int col = 0;
};

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}
    Error(Errc code, std::string message, SourceLoc loc)
        : std::runtime_error(std::move(message)), code_(code), loc_(std::move(loc)) {}

    Errc code() const { return code_; }
    const std::optional<SourceLoc>& where() const { return loc_; }

    /// "SEVERITY file:line:col message" when a location is attached.
    std::string formatted() const;

private:
    Errc code_;
    std::optional<SourceLoc> loc_;
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::syntax_error: return "SyntaxError";
        case Errc::unknown_cell_type: return "UnknownCellType";
        case Errc::multiple_drivers: return "MultipleDrivers";
        case Errc::unconnected_pin: return "UnconnectedPin";
        case Errc::combinational_loop: return "CombinationalLoop";
        case Errc::undriven_net: return "UndrivenNet";
        case Errc::gml_syntax: return "GmlSyntaxError";
        case Errc::dangling_edge: return "DanglingEdge";
        case Errc::non_positive_weight: return "NonPositiveWeight";
        case Errc::unknown_node: return "UnknownNode";
        case Errc::not_an_edge: return "NotAnEdge";
        case Errc::empty_corpus: return "EmptyCorpus";
        case Errc::dimension_mismatch: return "DimensionMismatch";
        case Errc::degenerate_data: return "DegenerateData";
        case Errc::non_finite_loss: return "NonFiniteLoss";
        case Errc::length_mismatch: return "LengthMismatch";
        case Errc::empty_input: return "EmptyInput";
        case Errc::zero_variance: return "ZeroVariance";
        case Errc::too_few_samples: return "TooFewSamples";
        case Errc::unknown_input: return "UnknownInput";
        case Errc::uninitialized_state: return "UninitializedState";
        case Errc::unknown_flip_flop: return "UnknownFlipFlop";
        case Errc::cycle_out_of_range: return "CycleOutOfRange";
        case Errc::label_mismatch: return "LabelMismatch";
        case Errc::file_not_found: return "FileNotFound";
        case Errc::invalid_params: return "InvalidParams";
        case Errc::io_error: return "IoError";
    }
    return "Error";
}

inline std::string Error::formatted() const {
    std::string out = "ERROR ";
    if (loc_) {
        out += loc_->file;
        out += ':';
        out += std::to_string(loc_->line);
        out += ':';
        out += std::to_string(loc_->col);
        out += ' ';
    }
    out += '[';
    out += errc_name(code_);
    out += "] ";
    out += what();
    return out;
}

} // namespace fdrkit
