#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fdrkit/walks.hpp"

namespace fdrkit {

/// Per-node feature vectors. `vectors` are the learned input embeddings
/// (|V| x d, row-major, row order = graph node order); `context_vectors`
/// are the output-side embeddings used during training.
struct EmbeddingMatrix {
    std::vector<std::string> labels;
    size_t dims = 0;
    std::vector<double> vectors;
    std::vector<double> context_vectors;

    size_t rows() const { return dims == 0 ? 0 : vectors.size() / dims; }
    std::span<double> row(size_t i) { return {vectors.data() + i * dims, dims}; }
    std::span<const double> row(size_t i) const { return {vectors.data() + i * dims, dims}; }
    std::span<double> context_row(size_t i) {
        return {context_vectors.data() + i * dims, dims};
    }
};

/// Negative-sampling objective for one (center, context, negatives) triple:
///   -log sigmoid(f.g) - sum_i log sigmoid(-f.n_i)
double sgns_pair_loss(std::span<const double> center, std::span<const double> context,
                      std::span<const std::span<const double>> negatives);

/// Analytic gradients of sgns_pair_loss with respect to every vector.
/// grad_negatives must have negatives.size() * dims entries.
void sgns_pair_gradients(std::span<const double> center, std::span<const double> context,
                         std::span<const std::span<const double>> negatives,
                         std::span<double> grad_center, std::span<double> grad_context,
                         std::span<double> grad_negatives);

struct SkipgramInfo {
    size_t pair_count = 0;
    std::vector<double> epoch_loss; // averaged objective per epoch
};

/// SGD over all (center, context) pairs within `window` of each other in a
/// walk, for `epochs` passes with seeded per-epoch shuffling. Noise
/// distribution for negatives is `noise_weights` when given (the graph
/// pipeline passes traversal degree^0.75), otherwise corpus frequency^0.75.
EmbeddingMatrix train_skipgram(const WalkCorpus& corpus, size_t num_nodes,
                               const WalkParams& params,
                               std::span<const double> noise_weights = {},
                               SkipgramInfo* info = nullptr);

/// build_transition_tables + sample_walks + train_skipgram, with node labels
/// attached. Deterministic given (graph, params).
EmbeddingMatrix embed(const CircuitGraph& g, const WalkParams& params,
                      SkipgramInfo* info = nullptr);

std::string write_embeddings_csv(const EmbeddingMatrix& m);
EmbeddingMatrix read_embeddings_csv(std::string_view text);

void write_embeddings_bin(const std::filesystem::path& path, const EmbeddingMatrix& m);
EmbeddingMatrix read_embeddings_bin(const std::filesystem::path& path);

} // namespace fdrkit
