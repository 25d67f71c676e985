#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "fdrkit/circuit_graph.hpp"
#include "fdrkit/rng.hpp"

namespace fdrkit {

enum class Traversal : uint8_t { Directed, Undirected };

struct WalkParams {
    double return_p = 1.0; // p: likelihood of immediately revisiting the previous node
    double in_out_q = 1.0; // q: inward vs outward exploration
    int walk_length = 80;  // l, nodes per walk (>= 2)
    int walks_per_node = 10; // r
    int window = 10;         // context window w
    int dims = 8;            // embedding dimension d
    int negatives = 5;       // k negative samples per positive
    int epochs = 5;
    double learning_rate = 0.025; // linearly decayed to 1e-4 of the initial value
    uint64_t seed = 1;
    Traversal traversal = Traversal::Undirected;

    void validate() const; // throws InvalidParams on any bound violation
};

/// O(1) sampler over a discrete distribution (Vose alias method). Keeps the
/// normalized input probabilities so table-implied probabilities can be
/// compared against the construction input.
class AliasTable {
public:
    AliasTable() = default;
    /// weights need not be normalized; all must be > 0.
    AliasTable(std::vector<uint32_t> items, const std::vector<double>& weights);

    bool empty() const { return items_.empty(); }
    size_t size() const { return items_.size(); }
    uint32_t sample(Rng& rng) const;

    uint32_t item(size_t i) const { return items_[i]; }
    double probability(size_t i) const { return probs_[i]; }
    /// Probability of drawing slot i as implied by the alias structure.
    double implied_probability(size_t i) const;

private:
    std::vector<uint32_t> items_;
    std::vector<double> probs_;     // normalized input distribution
    std::vector<double> threshold_; // per-slot acceptance threshold
    std::vector<uint32_t> alias_;
};

/// Neighbor lists under the chosen traversal. Undirected traversal merges a
/// directed edge pair (u,v)/(v,u) into one neighbor whose weight is the sum.
class TraversalView {
public:
    TraversalView(const CircuitGraph& g, Traversal t);
    std::span<const Neighbor> neighbors(uint32_t node) const {
        return {flat_.data() + offsets_[node], offsets_[node + 1] - offsets_[node]};
    }
    bool adjacent(uint32_t a, uint32_t b) const;
    size_t node_count() const { return offsets_.size() - 1; }

private:
    std::vector<Neighbor> flat_;
    std::vector<uint32_t> offsets_;
};

/// Hop count clamped to {0, 1, 2}: 0 if x == t, 1 if x adjacent to t under
/// the traversal, 2 otherwise.
int shortest_hop(const CircuitGraph& g, uint32_t t, uint32_t x, Traversal traversal);

/// Second-order transition law: probability of stepping v -> x for a walk
/// that arrived over (t, v). Bias 1/p at hop 0, 1 at hop 1, 1/q at hop 2,
/// scaled by the edge weight and normalized over v's neighbors.
double transition_probability(const CircuitGraph& g, uint32_t t, uint32_t v, uint32_t x,
                              const WalkParams& params);

/// Precomputed samplers: one first-step table per node (proportional to edge
/// weight) and one table per traversal edge (t, v) encoding the biased law.
class TransitionTables {
public:
    TransitionTables(const CircuitGraph& g, const WalkParams& params);

    const AliasTable& first_step(uint32_t node) const { return first_step_[node]; }
    /// Table for a walk currently at v that arrived from t; null if (t,v) is
    /// not a traversal edge.
    const AliasTable* edge_table(uint32_t t, uint32_t v) const;

    const TraversalView& view() const { return view_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    TraversalView view_;
    std::vector<AliasTable> first_step_;
    std::unordered_map<uint64_t, AliasTable> edge_tables_;
    std::vector<std::string> warnings_;
};

TransitionTables build_transition_tables(const CircuitGraph& g, const WalkParams& params);

using WalkCorpus = std::vector<std::vector<uint32_t>>;

/// r walks per source node, each at most l nodes (shorter on dead ends).
/// Walk (node u, index k) draws from an RNG stream derived from
/// (seed, u, k), so the corpus is identical however walks are scheduled.
WalkCorpus sample_walks(const CircuitGraph& g, const TransitionTables& tables,
                        const WalkParams& params);

std::string write_walks(const WalkCorpus& corpus);

} // namespace fdrkit
