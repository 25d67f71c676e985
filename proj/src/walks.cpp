#include "fdrkit/walks.hpp"

#include <algorithm>
#include <cmath>

#include "fdrkit/error.hpp"

namespace fdrkit {

void WalkParams::validate() const {
    auto fail = [](const std::string& msg) { throw Error(Errc::invalid_params, msg); };
    if (!(return_p > 0.0)) fail("return parameter p must be > 0");
    if (!(in_out_q > 0.0)) fail("in-out parameter q must be > 0");
    if (walk_length < 2) fail("walk_length must be >= 2");
    if (walks_per_node < 1) fail("walks_per_node must be >= 1");
    if (window < 1) fail("window must be >= 1");
    if (dims < 1) fail("dims must be >= 1");
    if (negatives < 1) fail("negatives must be >= 1");
    if (epochs < 1) fail("epochs must be >= 1");
    if (!(learning_rate > 0.0)) fail("learning_rate must be > 0");
}

// ---------------------------------------------------------------------------
// AliasTable
// ---------------------------------------------------------------------------

AliasTable::AliasTable(std::vector<uint32_t> items, const std::vector<double>& weights)
    : items_(std::move(items)) {
    if (items_.size() != weights.size())
        throw Error(Errc::invalid_params, "alias table: item/weight count mismatch");
    size_t n = items_.size();
    if (n == 0) return;

    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w))
            throw Error(Errc::invalid_params, "alias table: weights must be positive and finite");
        total += w;
    }
    probs_.resize(n);
    for (size_t i = 0; i < n; ++i) probs_[i] = weights[i] / total;

    threshold_.assign(n, 1.0);
    alias_.resize(n);
    for (size_t i = 0; i < n; ++i) alias_[i] = static_cast<uint32_t>(i);

    std::vector<double> scaled(n);
    for (size_t i = 0; i < n; ++i) scaled[i] = probs_[i] * static_cast<double>(n);

    std::vector<uint32_t> small, large;
    for (size_t i = 0; i < n; ++i)
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<uint32_t>(i));

    while (!small.empty() && !large.empty()) {
        uint32_t s = small.back();
        small.pop_back();
        uint32_t l = large.back();
        large.pop_back();
        threshold_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    // leftovers carry threshold 1 (self-alias)
}

uint32_t AliasTable::sample(Rng& rng) const {
    size_t slot = static_cast<size_t>(rng.next_below(items_.size()));
    double u = rng.next_double();
    return u < threshold_[slot] ? items_[slot] : items_[alias_[slot]];
}

double AliasTable::implied_probability(size_t i) const {
    double p = threshold_[i];
    for (size_t j = 0; j < items_.size(); ++j)
        if (j != i && alias_[j] == static_cast<uint32_t>(i)) p += 1.0 - threshold_[j];
    return p / static_cast<double>(items_.size());
}

// ---------------------------------------------------------------------------
// TraversalView
// ---------------------------------------------------------------------------

TraversalView::TraversalView(const CircuitGraph& g, Traversal t) {
    size_t n = g.node_count();
    std::vector<std::vector<Neighbor>> adj(n);
    if (t == Traversal::Directed) {
        for (uint32_t v = 0; v < n; ++v) {
            auto out = g.out_neighbors(v);
            adj[v].assign(out.begin(), out.end());
        }
    } else {
        for (uint32_t v = 0; v < n; ++v) {
            auto out = g.out_neighbors(v);
            adj[v].assign(out.begin(), out.end());
            for (const Neighbor& nb : g.in_neighbors(v)) {
                if (nb.node == v) continue; // self-loop already counted once
                auto it = std::find_if(adj[v].begin(), adj[v].end(),
                                       [&](const Neighbor& x) { return x.node == nb.node; });
                if (it != adj[v].end())
                    it->weight += nb.weight; // antiparallel pair merges by weight sum
                else
                    adj[v].push_back(nb);
            }
            std::sort(adj[v].begin(), adj[v].end(),
                      [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
        }
    }

    offsets_.assign(n + 1, 0);
    for (size_t v = 0; v < n; ++v) offsets_[v + 1] = offsets_[v] + static_cast<uint32_t>(adj[v].size());
    flat_.reserve(offsets_[n]);
    for (size_t v = 0; v < n; ++v) flat_.insert(flat_.end(), adj[v].begin(), adj[v].end());
}

bool TraversalView::adjacent(uint32_t a, uint32_t b) const {
    auto nbrs = neighbors(a);
    return std::any_of(nbrs.begin(), nbrs.end(), [b](const Neighbor& nb) { return nb.node == b; });
}

// ---------------------------------------------------------------------------
// Transition law
// ---------------------------------------------------------------------------

int shortest_hop(const CircuitGraph& g, uint32_t t, uint32_t x, Traversal traversal) {
    if (t >= g.node_count() || x >= g.node_count())
        throw Error(Errc::unknown_node, "shortest_hop: node id out of range");
    if (t == x) return 0;
    TraversalView view(g, traversal);
    return view.adjacent(t, x) ? 1 : 2;
}

namespace {

double search_bias(int hop, const WalkParams& params) {
    switch (hop) {
        case 0: return 1.0 / params.return_p;
        case 1: return 1.0;
        default: return 1.0 / params.in_out_q;
    }
}

int hop_with_marks(const std::vector<char>& t_mark, uint32_t t, uint32_t x) {
    if (x == t) return 0;
    return t_mark[x] ? 1 : 2;
}

} // namespace

double transition_probability(const CircuitGraph& g, uint32_t t, uint32_t v, uint32_t x,
                              const WalkParams& params) {
    params.validate();
    if (t >= g.node_count() || v >= g.node_count() || x >= g.node_count())
        throw Error(Errc::unknown_node, "transition_probability: node id out of range");
    TraversalView view(g, params.traversal);
    if (!view.adjacent(t, v))
        throw Error(Errc::not_an_edge, "(t, v) is not a traversal edge");
    if (!view.adjacent(v, x))
        throw Error(Errc::not_an_edge, "(v, x) is not a traversal edge");

    std::vector<char> t_mark(g.node_count(), 0);
    for (const Neighbor& nb : view.neighbors(t)) t_mark[nb.node] = 1;

    double z = 0.0, pi_x = 0.0;
    for (const Neighbor& nb : view.neighbors(v)) {
        double pi = search_bias(hop_with_marks(t_mark, t, nb.node), params) * nb.weight;
        z += pi;
        if (nb.node == x) pi_x = pi;
    }
    return pi_x / z;
}

// ---------------------------------------------------------------------------
// TransitionTables
// ---------------------------------------------------------------------------

namespace {
uint64_t edge_key(uint32_t t, uint32_t v) {
    return (static_cast<uint64_t>(t) << 32) | static_cast<uint64_t>(v);
}
} // namespace

TransitionTables::TransitionTables(const CircuitGraph& g, const WalkParams& params)
    : view_(g, params.traversal) {
    params.validate();
    size_t n = g.node_count();
    first_step_.resize(n);

    for (uint32_t u = 0; u < n; ++u) {
        auto nbrs = view_.neighbors(u);
        if (nbrs.empty()) {
            warnings_.push_back("node '" + g.node(u).label + "' is isolated under the traversal; "
                                "walks from it stop immediately");
            continue;
        }
        std::vector<uint32_t> items;
        std::vector<double> weights;
        items.reserve(nbrs.size());
        weights.reserve(nbrs.size());
        for (const Neighbor& nb : nbrs) {
            items.push_back(nb.node);
            weights.push_back(nb.weight);
        }
        first_step_[u] = AliasTable(std::move(items), weights);
    }

    // One table per traversal edge (t, v); d_tx resolved by marking t's
    // neighbor set while t is fixed in the outer loop.
    std::vector<char> t_mark(n, 0);
    for (uint32_t t = 0; t < n; ++t) {
        auto t_nbrs = view_.neighbors(t);
        for (const Neighbor& nb : t_nbrs) t_mark[nb.node] = 1;
        for (const Neighbor& edge : t_nbrs) {
            uint32_t v = edge.node;
            auto v_nbrs = view_.neighbors(v);
            std::vector<uint32_t> items;
            std::vector<double> weights;
            items.reserve(v_nbrs.size());
            weights.reserve(v_nbrs.size());
            for (const Neighbor& x : v_nbrs) {
                items.push_back(x.node);
                weights.push_back(search_bias(hop_with_marks(t_mark, t, x.node), params) * x.weight);
            }
            edge_tables_.emplace(edge_key(t, v), AliasTable(std::move(items), weights));
        }
        for (const Neighbor& nb : t_nbrs) t_mark[nb.node] = 0;
    }
}

const AliasTable* TransitionTables::edge_table(uint32_t t, uint32_t v) const {
    auto it = edge_tables_.find(edge_key(t, v));
    return it == edge_tables_.end() ? nullptr : &it->second;
}

TransitionTables build_transition_tables(const CircuitGraph& g, const WalkParams& params) {
    return TransitionTables(g, params);
}

// ---------------------------------------------------------------------------
// Walk sampling
// ---------------------------------------------------------------------------

WalkCorpus sample_walks(const CircuitGraph& g, const TransitionTables& tables,
                        const WalkParams& params) {
    params.validate();
    size_t n = g.node_count();
    WalkCorpus corpus;
    corpus.reserve(n * static_cast<size_t>(params.walks_per_node));

    for (uint32_t u = 0; u < n; ++u) {
        for (int k = 0; k < params.walks_per_node; ++k) {
            Rng rng(derive_seed(params.seed, u, static_cast<uint64_t>(k)));
            std::vector<uint32_t> walk;
            walk.reserve(static_cast<size_t>(params.walk_length));
            walk.push_back(u);
            const AliasTable& first = tables.first_step(u);
            if (!first.empty()) {
                walk.push_back(first.sample(rng));
                while (walk.size() < static_cast<size_t>(params.walk_length)) {
                    uint32_t prev = walk[walk.size() - 2];
                    uint32_t cur = walk.back();
                    const AliasTable* table = tables.edge_table(prev, cur);
                    if (!table || table->empty()) break; // dead end
                    walk.push_back(table->sample(rng));
                }
            }
            corpus.push_back(std::move(walk));
        }
    }
    return corpus;
}

std::string write_walks(const WalkCorpus& corpus) {
    std::string out;
    for (const auto& walk : corpus) {
        for (size_t i = 0; i < walk.size(); ++i) {
            if (i) out += ' ';
            out += std::to_string(walk[i]);
        }
        out += '\n';
    }
    return out;
}

} // namespace fdrkit
