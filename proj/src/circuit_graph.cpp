#include "fdrkit/circuit_graph.hpp"

#include <algorithm>

#include "fdrkit/error.hpp"

namespace fdrkit {

const char* to_string(NodeKind k) {
    switch (k) {
        case NodeKind::FF: return "FF";
        case NodeKind::Comb: return "COMB";
        case NodeKind::Input: return "INPUT";
        case NodeKind::Output: return "OUTPUT";
    }
    return "?";
}

std::optional<NodeKind> node_kind_from(std::string_view s) {
    if (s == "FF") return NodeKind::FF;
    if (s == "COMB") return NodeKind::Comb;
    if (s == "INPUT") return NodeKind::Input;
    if (s == "OUTPUT") return NodeKind::Output;
    return std::nullopt;
}

uint32_t CircuitGraph::Builder::add_node(std::string label, NodeKind kind) {
    if (labels_.count(label))
        throw Error(Errc::invalid_params, "duplicate node label '" + label + "'");
    uint32_t id = static_cast<uint32_t>(nodes_.size());
    labels_.emplace(label, id);
    nodes_.push_back({std::move(label), kind});
    return id;
}

void CircuitGraph::Builder::add_edge(uint32_t source, uint32_t target, double weight) {
    if (source >= nodes_.size() || target >= nodes_.size())
        throw Error(Errc::dangling_edge, "edge (" + std::to_string(source) + ", " +
                                             std::to_string(target) + ") references unknown node");
    if (!(weight > 0.0))
        throw Error(Errc::non_positive_weight,
                    "edge (" + std::to_string(source) + ", " + std::to_string(target) +
                        ") has non-positive weight");
    edges_.push_back({source, target, weight});
}

CircuitGraph CircuitGraph::Builder::build() {
    CircuitGraph g;
    g.nodes_ = std::move(nodes_);
    g.label_index_ = std::move(labels_);

    std::stable_sort(edges_.begin(), edges_.end(), [](const GraphEdge& a, const GraphEdge& b) {
        return a.source != b.source ? a.source < b.source : a.target < b.target;
    });
    for (const GraphEdge& e : edges_) {
        if (!g.edges_.empty() && g.edges_.back().source == e.source &&
            g.edges_.back().target == e.target)
            continue; // parallel pair collapses, first edge wins
        g.edges_.push_back(e);
    }

    size_t n = g.nodes_.size();
    std::vector<uint32_t> out_deg(n, 0), in_deg(n, 0);
    for (const GraphEdge& e : g.edges_) {
        ++out_deg[e.source];
        ++in_deg[e.target];
    }
    g.out_offsets_.assign(n + 1, 0);
    g.in_offsets_.assign(n + 1, 0);
    for (size_t i = 0; i < n; ++i) {
        g.out_offsets_[i + 1] = g.out_offsets_[i] + out_deg[i];
        g.in_offsets_[i + 1] = g.in_offsets_[i] + in_deg[i];
    }
    g.out_flat_.resize(g.edges_.size());
    g.in_flat_.resize(g.edges_.size());
    std::vector<uint32_t> out_pos(g.out_offsets_.begin(), g.out_offsets_.end() - 1);
    std::vector<uint32_t> in_pos(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
    for (const GraphEdge& e : g.edges_) {
        g.out_flat_[out_pos[e.source]++] = {e.target, e.weight};
        g.in_flat_[in_pos[e.target]++] = {e.source, e.weight};
    }
    return g;
}

std::span<const Neighbor> CircuitGraph::out_neighbors(uint32_t id) const {
    return {out_flat_.data() + out_offsets_[id], out_offsets_[id + 1] - out_offsets_[id]};
}

std::span<const Neighbor> CircuitGraph::in_neighbors(uint32_t id) const {
    return {in_flat_.data() + in_offsets_[id], in_offsets_[id + 1] - in_offsets_[id]};
}

std::optional<uint32_t> CircuitGraph::node_id(std::string_view label) const {
    auto it = label_index_.find(std::string(label));
    if (it == label_index_.end()) return std::nullopt;
    return it->second;
}

bool CircuitGraph::has_edge(uint32_t source, uint32_t target) const {
    auto nbrs = out_neighbors(source);
    return std::any_of(nbrs.begin(), nbrs.end(),
                       [target](const Neighbor& nb) { return nb.node == target; });
}

bool CircuitGraph::nodes_equal(const CircuitGraph& other) const {
    if (nodes_.size() != other.nodes_.size()) return false;
    for (size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].label != other.nodes_[i].label || nodes_[i].kind != other.nodes_[i].kind)
            return false;
    return true;
}

CircuitGraph netlist_to_graph(const Netlist& n) {
    CircuitGraph::Builder b;

    // Node order: primary inputs, instances (lexicographic), primary outputs.
    std::unordered_map<NetId, uint32_t> input_node; // PI net -> node
    for (NetId net : n.primary_inputs)
        input_node[net] = b.add_node(n.nets[net], NodeKind::Input);

    std::vector<InstId> order(n.instances.size());
    for (InstId i = 0; i < n.instances.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](InstId a, InstId c) { return n.instances[a].name < n.instances[c].name; });
    std::vector<uint32_t> inst_node(n.instances.size());
    for (InstId i : order) {
        NodeKind kind =
            n.cell_of(i).kind == CellKind::FlipFlop ? NodeKind::FF : NodeKind::Comb;
        inst_node[i] = b.add_node(n.instances[i].name, kind);
    }

    std::vector<std::pair<NetId, uint32_t>> output_nodes; // (net, node)
    for (NetId net : n.primary_outputs)
        output_nodes.emplace_back(net, b.add_node(n.nets[net], NodeKind::Output));

    // Driver node per net, if any.
    auto driver_node = [&](NetId net) -> std::optional<uint32_t> {
        const NetDriver& d = n.drivers[net];
        if (d.kind == NetDriver::PrimaryInput) return input_node.at(net);
        if (d.kind == NetDriver::InstancePin) return inst_node[d.inst];
        return std::nullopt;
    };

    // driver -> every instance loading the net through an input pin
    for (InstId i = 0; i < n.instances.size(); ++i) {
        const CellSpec& cell = n.cell_of(i);
        for (uint32_t pin : cell.input_pins) {
            NetId net = n.instances[i].pin_nets[pin];
            if (net == kNoNet) continue;
            if (auto src = driver_node(net)) b.add_edge(*src, inst_node[i]);
        }
    }
    // driver -> primary output node
    for (const auto& [net, node] : output_nodes)
        if (auto src = driver_node(net)) b.add_edge(*src, node);

    return b.build();
}

} // namespace fdrkit
