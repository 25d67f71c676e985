#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fdrkit/circuit_graph.hpp"

namespace fdrkit {

/// Serializes the graph as GML text:
///   graph [ directed 1 node [ id N label "..." kind "..." ] ...
///           edge [ source S target T weight W ] ... ]
/// Output bytes are a pure function of the graph. Weights are printed with
/// up to 9 significant digits; a weight of exactly 1 prints as "1".
std::string write_gml(const CircuitGraph& g);

/// Parses GML text produced by write_gml (or compatible). Unknown attributes
/// are ignored and reported through `warnings`; a missing edge weight
/// defaults to 1.
CircuitGraph read_gml(std::string_view text, std::vector<std::string>* warnings = nullptr);

} // namespace fdrkit
