#include "fdrkit/embedding.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "fdrkit/error.hpp"
#include "fdrkit/util.hpp"

namespace fdrkit {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double log_sigmoid(double x) {
    // -log(1 + e^-x), computed on the stable branch
    return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace

double sgns_pair_loss(std::span<const double> center, std::span<const double> context,
                      std::span<const std::span<const double>> negatives) {
    double loss = -log_sigmoid(dot(center, context));
    for (const auto& neg : negatives) loss -= log_sigmoid(-dot(center, neg));
    return loss;
}

void sgns_pair_gradients(std::span<const double> center, std::span<const double> context,
                         std::span<const std::span<const double>> negatives,
                         std::span<double> grad_center, std::span<double> grad_context,
                         std::span<double> grad_negatives) {
    size_t d = center.size();
    double pos_err = sigmoid(dot(center, context)) - 1.0; // d(-log σ(x))/dx = σ(x) - 1
    for (size_t i = 0; i < d; ++i) {
        grad_center[i] = pos_err * context[i];
        grad_context[i] = pos_err * center[i];
    }
    for (size_t k = 0; k < negatives.size(); ++k) {
        double neg_err = sigmoid(dot(center, negatives[k]));
        for (size_t i = 0; i < d; ++i) {
            grad_center[i] += neg_err * negatives[k][i];
            grad_negatives[k * d + i] = neg_err * center[i];
        }
    }
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

struct Pair {
    uint32_t center;
    uint32_t context;
};

std::vector<Pair> extract_pairs(const WalkCorpus& corpus, size_t num_nodes, int window) {
    std::vector<Pair> pairs;
    for (const auto& walk : corpus) {
        for (size_t i = 0; i < walk.size(); ++i) {
            if (walk[i] >= num_nodes)
                throw Error(Errc::unknown_node,
                            "corpus node id " + std::to_string(walk[i]) + " >= |V|");
            size_t lo = i >= static_cast<size_t>(window) ? i - static_cast<size_t>(window) : 0;
            size_t hi = std::min(walk.size(), i + static_cast<size_t>(window) + 1);
            for (size_t j = lo; j < hi; ++j)
                if (j != i) pairs.push_back({walk[i], walk[j]});
        }
    }
    return pairs;
}

} // namespace

EmbeddingMatrix train_skipgram(const WalkCorpus& corpus, size_t num_nodes,
                               const WalkParams& params, std::span<const double> noise_weights,
                               SkipgramInfo* info) {
    params.validate();
    std::vector<Pair> pairs = extract_pairs(corpus, num_nodes, params.window);
    if (pairs.empty())
        throw Error(Errc::empty_corpus, "walk corpus yields no (center, context) pairs");

    size_t d = static_cast<size_t>(params.dims);
    EmbeddingMatrix m;
    m.dims = d;
    m.vectors.resize(num_nodes * d);
    m.context_vectors.assign(num_nodes * d, 0.0);

    Rng init_rng(derive_seed(params.seed, "sgns-init"));
    double half = 0.5 / static_cast<double>(d);
    for (double& v : m.vectors) v = init_rng.next_range(-half, half);

    // Noise distribution for negative draws.
    std::vector<double> weights;
    if (noise_weights.empty()) {
        std::vector<double> counts(num_nodes, 0.0);
        for (const auto& walk : corpus)
            for (uint32_t node : walk) counts[node] += 1.0;
        weights.resize(num_nodes);
        for (size_t i = 0; i < num_nodes; ++i)
            weights[i] = counts[i] > 0.0 ? std::pow(counts[i], 0.75) : 0.0;
    } else {
        if (noise_weights.size() != num_nodes)
            throw Error(Errc::invalid_params, "noise weight count must equal |V|");
        weights.assign(noise_weights.begin(), noise_weights.end());
    }
    std::vector<uint32_t> noise_items;
    std::vector<double> noise_probs;
    for (uint32_t i = 0; i < num_nodes; ++i)
        if (weights[i] > 0.0) {
            noise_items.push_back(i);
            noise_probs.push_back(weights[i]);
        }
    if (noise_items.empty())
        throw Error(Errc::invalid_params, "noise distribution has no support");
    AliasTable noise(std::move(noise_items), noise_probs);

    Rng order_rng(derive_seed(params.seed, "sgns-order"));
    Rng neg_rng(derive_seed(params.seed, "sgns-negatives"));

    size_t k = static_cast<size_t>(params.negatives);
    std::vector<double> grad_center(d), grad_context(d), grad_negs(k * d);
    std::vector<uint32_t> neg_ids(k);
    std::vector<std::span<const double>> neg_views(k);

    std::vector<size_t> order(pairs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    const double lr0 = params.learning_rate;
    const double lr_floor = 1e-4 * lr0;
    const double total_updates =
        static_cast<double>(pairs.size()) * static_cast<double>(params.epochs);
    size_t update = 0;

    if (info) {
        info->pair_count = pairs.size();
        info->epoch_loss.clear();
    }

    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        shuffle(order, order_rng);
        double epoch_loss = 0.0;
        for (size_t idx : order) {
            const Pair& pr = pairs[idx];
            double lr = std::max(lr_floor,
                                 lr0 * (1.0 - static_cast<double>(update) / total_updates));
            ++update;

            size_t n_negs = 0;
            for (size_t t = 0; t < k; ++t) {
                uint32_t cand = noise.sample(neg_rng);
                if (cand == pr.context) continue; // never use the positive as a negative
                neg_ids[n_negs] = cand;
                neg_views[n_negs] =
                    std::span<const double>(m.context_vectors.data() + cand * d, d);
                ++n_negs;
            }

            auto center = std::span<double>(m.vectors.data() + pr.center * d, d);
            auto context = std::span<double>(m.context_vectors.data() + pr.context * d, d);
            auto negs = std::span<const std::span<const double>>(neg_views.data(), n_negs);

            if (info) epoch_loss += sgns_pair_loss(center, context, negs);
            sgns_pair_gradients(center, context, negs, grad_center, grad_context,
                                std::span<double>(grad_negs.data(), n_negs * d));

            for (size_t i = 0; i < d; ++i) {
                center[i] -= lr * grad_center[i];
                context[i] -= lr * grad_context[i];
            }
            for (size_t t = 0; t < n_negs; ++t) {
                double* neg = m.context_vectors.data() + neg_ids[t] * d;
                for (size_t i = 0; i < d; ++i) neg[i] -= lr * grad_negs[t * d + i];
            }
        }
        if (info) info->epoch_loss.push_back(epoch_loss / static_cast<double>(pairs.size()));
    }
    return m;
}

EmbeddingMatrix embed(const CircuitGraph& g, const WalkParams& params, SkipgramInfo* info) {
    TransitionTables tables(g, params);
    WalkCorpus corpus = sample_walks(g, tables, params);

    // Noise ∝ (weighted traversal degree)^0.75.
    std::vector<double> noise(g.node_count(), 0.0);
    for (uint32_t v = 0; v < g.node_count(); ++v) {
        double deg = 0.0;
        for (const Neighbor& nb : tables.view().neighbors(v)) deg += nb.weight;
        noise[v] = deg > 0.0 ? std::pow(deg, 0.75) : 0.0;
    }

    EmbeddingMatrix m = train_skipgram(corpus, g.node_count(), params, noise, info);
    m.labels.reserve(g.node_count());
    for (uint32_t v = 0; v < g.node_count(); ++v) m.labels.push_back(g.node(v).label);
    return m;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string write_embeddings_csv(const EmbeddingMatrix& m) {
    std::string out = "label";
    for (size_t i = 0; i < m.dims; ++i) out += ",f" + std::to_string(i);
    out += '\n';
    for (size_t r = 0; r < m.rows(); ++r) {
        out += r < m.labels.size() ? m.labels[r] : std::to_string(r);
        for (double v : m.row(r)) out += ',' + fmt_double(v);
        out += '\n';
    }
    return out;
}

EmbeddingMatrix read_embeddings_csv(std::string_view text) {
    auto lines = split(text, '\n');
    if (lines.empty() || trim(lines[0]).empty())
        throw Error(Errc::io_error, "embeddings csv: missing header");
    auto header = split(trim(lines[0]), ',');
    if (header.size() < 2 || header[0] != "label")
        throw Error(Errc::io_error, "embeddings csv: header must be label,f0,...");
    EmbeddingMatrix m;
    m.dims = header.size() - 1;
    for (size_t li = 1; li < lines.size(); ++li) {
        std::string_view line = trim(lines[li]);
        if (line.empty()) continue;
        auto fields = split(line, ',');
        if (fields.size() != header.size())
            throw Error(Errc::io_error,
                        "embeddings csv: row " + std::to_string(li) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
        m.labels.emplace_back(fields[0]);
        for (size_t c = 1; c < fields.size(); ++c) {
            double v;
            if (!parse_double(fields[c], v))
                throw Error(Errc::io_error, "embeddings csv: bad number '" +
                                                std::string(fields[c]) + "' in row " +
                                                std::to_string(li));
            m.vectors.push_back(v);
        }
    }
    return m;
}

namespace {
constexpr char kEmbMagic[4] = {'F', 'D', 'R', 'E'};
}

void write_embeddings_bin(const std::filesystem::path& path, const EmbeddingMatrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write '" + path.string() + "'");
    uint32_t version = 1;
    uint64_t rows = m.rows(), dims = m.dims;
    out.write(kEmbMagic, 4);
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&dims), sizeof dims);
    for (size_t r = 0; r < rows; ++r) {
        const std::string& label = r < m.labels.size() ? m.labels[r] : std::to_string(r);
        uint32_t len = static_cast<uint32_t>(label.size());
        out.write(reinterpret_cast<const char*>(&len), sizeof len);
        out.write(label.data(), len);
    }
    out.write(reinterpret_cast<const char*>(m.vectors.data()),
              static_cast<std::streamsize>(m.vectors.size() * sizeof(double)));
    if (!out) throw Error(Errc::io_error, "short write to '" + path.string() + "'");
}

EmbeddingMatrix read_embeddings_bin(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::file_not_found, "cannot open '" + path.string() + "'");
    char magic[4];
    uint32_t version = 0;
    uint64_t rows = 0, dims = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&rows), sizeof rows);
    in.read(reinterpret_cast<char*>(&dims), sizeof dims);
    if (!in || std::memcmp(magic, kEmbMagic, 4) != 0 || version != 1)
        throw Error(Errc::io_error, "'" + path.string() + "' is not an embedding cache");
    EmbeddingMatrix m;
    m.dims = dims;
    m.labels.resize(rows);
    for (auto& label : m.labels) {
        uint32_t len = 0;
        in.read(reinterpret_cast<char*>(&len), sizeof len);
        label.resize(len);
        in.read(label.data(), len);
    }
    m.vectors.resize(rows * dims);
    in.read(reinterpret_cast<char*>(m.vectors.data()),
            static_cast<std::streamsize>(m.vectors.size() * sizeof(double)));
    if (!in) throw Error(Errc::io_error, "truncated embedding cache '" + path.string() + "'");
    return m;
}

} // namespace fdrkit
