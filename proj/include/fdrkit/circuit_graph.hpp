#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fdrkit/netlist.hpp"

namespace fdrkit {

enum class NodeKind : uint8_t { FF, Comb, Input, Output };

const char* to_string(NodeKind k);
std::optional<NodeKind> node_kind_from(std::string_view s);

struct GraphNode {
    std::string label;
    NodeKind kind;
};

struct GraphEdge {
    uint32_t source;
    uint32_t target;
    double weight;

    bool operator==(const GraphEdge&) const = default;
};

struct Neighbor {
    uint32_t node;
    double weight;
};

/// Directed weighted graph over circuit elements. Nodes have dense ids,
/// unique labels, positive edge weights, and no duplicate directed edges.
/// Immutable once built; edges are kept sorted by (source, target).
class CircuitGraph {
public:
    class Builder {
    public:
        uint32_t add_node(std::string label, NodeKind kind);
        /// Parallel (source, target) pairs collapse to the first edge added.
        void add_edge(uint32_t source, uint32_t target, double weight = 1.0);
        CircuitGraph build(); // consumes the builder

    private:
        std::vector<GraphNode> nodes_;
        std::vector<GraphEdge> edges_;
        std::unordered_map<std::string, uint32_t> labels_;
    };

    size_t node_count() const { return nodes_.size(); }
    size_t edge_count() const { return edges_.size(); }
    const GraphNode& node(uint32_t id) const { return nodes_[id]; }
    std::span<const GraphNode> nodes() const { return nodes_; }
    std::span<const GraphEdge> edges() const { return edges_; }

    std::span<const Neighbor> out_neighbors(uint32_t id) const;
    std::span<const Neighbor> in_neighbors(uint32_t id) const;

    std::optional<uint32_t> node_id(std::string_view label) const;
    bool has_edge(uint32_t source, uint32_t target) const;

    bool operator==(const CircuitGraph& other) const {
        return nodes_equal(other) && edges_ == other.edges_;
    }

private:
    bool nodes_equal(const CircuitGraph& other) const;

    std::vector<GraphNode> nodes_;
    std::vector<GraphEdge> edges_; // sorted by (source, target)
    std::vector<Neighbor> out_flat_, in_flat_;
    std::vector<uint32_t> out_offsets_, in_offsets_;
    std::unordered_map<std::string, uint32_t> label_index_;
};

/// One node per instance plus one per primary input/output; edges follow
/// signal direction driver -> load. Node order: inputs (declaration order),
/// instances (lexicographic), outputs (declaration order).
CircuitGraph netlist_to_graph(const Netlist& n);

} // namespace fdrkit
