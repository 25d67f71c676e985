#include "fdrkit/mlp.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "fdrkit/error.hpp"
#include "fdrkit/rng.hpp"
#include "fdrkit/util.hpp"

#include <json.hpp>

namespace fdrkit {

void MlpParams::validate() const {
    auto fail = [](const std::string& msg) { throw Error(Errc::invalid_params, msg); };
    if (input_dim < 1) fail("input_dim must be >= 1");
    if (layer_sizes.empty()) fail("layer_sizes must not be empty");
    for (int s : layer_sizes)
        if (s < 1) fail("layer sizes must be >= 1");
    if (layer_sizes.back() != 1) fail("final layer size must be 1");
    if (batch_size < 1) fail("batch_size must be >= 1");
    if (epochs < 1) fail("epochs must be >= 1");
    if (!(learning_rate > 0.0)) fail("learning_rate must be > 0");
}

void Adam::step(std::span<double> params, std::span<const double> grads) {
    if (params.size() != m_.size() || grads.size() != m_.size())
        throw Error(Errc::dimension_mismatch, "adam: parameter/gradient size mismatch");
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t i = 0; i < params.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
        params[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
    }
}

std::vector<LayerCount> count_parameters(const MlpParams& params) {
    params.validate();
    std::vector<LayerCount> out;
    int fan_in = params.input_dim;
    for (int size : params.layer_sizes) {
        out.push_back({size, static_cast<int64_t>(size) * (fan_in + 1)});
        fan_in = size;
    }
    return out;
}

MlpModel init_mlp(const MlpParams& params) {
    params.validate();
    MlpModel m;
    m.params = params;
    Rng rng(derive_seed(params.seed, "mlp-init"));
    int fan_in = params.input_dim;
    for (int size : params.layer_sizes) {
        double bound = std::sqrt(6.0 / static_cast<double>(fan_in + size));
        Matrix w(static_cast<size_t>(size), static_cast<size_t>(fan_in));
        for (double& v : w.data) v = rng.next_range(-bound, bound);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(static_cast<size_t>(size), 0.0);
        fan_in = size;
    }
    return m;
}

namespace {

// Forward pass keeping post-activation values per layer (input included).
double forward(const MlpModel& m, std::span<const double> x,
               std::vector<std::vector<double>>* activations) {
    std::vector<double> cur(x.begin(), x.end());
    if (activations) {
        activations->clear();
        activations->push_back(cur);
    }
    for (size_t l = 0; l < m.weights.size(); ++l) {
        const Matrix& w = m.weights[l];
        std::vector<double> next(w.rows);
        bool hidden = l + 1 < m.weights.size();
        for (size_t r = 0; r < w.rows; ++r) {
            double z = m.biases[l][r];
            auto row = w.row(r);
            for (size_t c = 0; c < w.cols; ++c) z += row[c] * cur[c];
            next[r] = hidden ? std::max(0.0, z) : z;
        }
        cur = std::move(next);
        if (activations) activations->push_back(cur);
    }
    return cur[0];
}

struct GradBuffers {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    explicit GradBuffers(const MlpModel& m) {
        for (size_t l = 0; l < m.weights.size(); ++l) {
            weights.emplace_back(m.weights[l].rows, m.weights[l].cols);
            biases.emplace_back(m.biases[l].size(), 0.0);
        }
    }
    void zero() {
        for (auto& w : weights) std::fill(w.data.begin(), w.data.end(), 0.0);
        for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
    }
};

// Accumulates scale * (f(x) - y) * grad f(x) into `grads`; returns f(x).
// With ReLU hidden units d(relu)/dz is taken as 0 at z == 0.
double backward(const MlpModel& m, std::span<const double> x, double y, double scale,
                GradBuffers& grads, std::vector<std::vector<double>>& activations) {
    double pred = forward(m, x, &activations);
    double delta0 = scale * (pred - y);

    std::vector<double> delta{delta0}; // d(loss)/d(z) of the current layer
    for (size_t l = m.weights.size(); l-- > 0;) {
        const Matrix& w = m.weights[l];
        const auto& prev_act = activations[l];
        for (size_t r = 0; r < w.rows; ++r) {
            double d = delta[r];
            if (d == 0.0) continue;
            grads.biases[l][r] += d;
            auto grow = grads.weights[l].row(r);
            for (size_t c = 0; c < w.cols; ++c) grow[c] += d * prev_act[c];
        }
        if (l == 0) break;
        std::vector<double> prev_delta(w.cols, 0.0);
        for (size_t r = 0; r < w.rows; ++r) {
            double d = delta[r];
            if (d == 0.0) continue;
            auto row = w.row(r);
            for (size_t c = 0; c < w.cols; ++c) prev_delta[c] += d * row[c];
        }
        // activations[l] are the ReLU outputs of layer l-1
        for (size_t c = 0; c < w.cols; ++c)
            if (activations[l][c] <= 0.0) prev_delta[c] = 0.0;
        delta = std::move(prev_delta);
    }
    return pred;
}

// One Adam instance per layer array; all advance in lock step.
struct AdamState {
    std::vector<Adam> weights, biases;

    explicit AdamState(const MlpModel& m) {
        const MlpParams& p = m.params;
        for (size_t l = 0; l < m.weights.size(); ++l) {
            weights.emplace_back(m.weights[l].data.size(), p.learning_rate, p.beta1, p.beta2,
                                 p.adam_eps);
            biases.emplace_back(m.biases[l].size(), p.learning_rate, p.beta1, p.beta2, p.adam_eps);
        }
    }

    void step(MlpModel& m, const GradBuffers& grads) {
        for (size_t l = 0; l < m.weights.size(); ++l) {
            weights[l].step(m.weights[l].data, grads.weights[l].data);
            biases[l].step(m.biases[l], grads.biases[l]);
        }
    }
};

} // namespace

MlpModel fit_mlp(const Matrix& x, std::span<const double> y, const MlpParams& params) {
    params.validate();
    if (x.rows != y.size())
        throw Error(Errc::length_mismatch, "fit_mlp: " + std::to_string(x.rows) + " rows vs " +
                                               std::to_string(y.size()) + " targets");
    if (x.rows == 0) throw Error(Errc::empty_input, "fit_mlp: empty dataset");
    if (x.cols != static_cast<size_t>(params.input_dim))
        throw Error(Errc::dimension_mismatch,
                    "fit_mlp: data has " + std::to_string(x.cols) + " features, params.input_dim is " +
                        std::to_string(params.input_dim));

    MlpModel model = init_mlp(params);
    AdamState adam(model);
    GradBuffers grads(model);
    std::vector<std::vector<double>> scratch;

    Rng order_rng(derive_seed(params.seed, "mlp-order"));
    std::vector<size_t> order(x.rows);
    std::iota(order.begin(), order.end(), size_t{0});

    auto train_mse = [&] {
        double s = 0.0;
        for (size_t r = 0; r < x.rows; ++r) {
            double e = forward(model, x.row(r), nullptr) - y[r];
            s += e * e;
        }
        return s / static_cast<double>(x.rows);
    };

    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        shuffle(order, order_rng);
        for (size_t start = 0; start < order.size(); start += params.batch_size) {
            size_t end = std::min(order.size(), start + static_cast<size_t>(params.batch_size));
            double inv = 1.0 / static_cast<double>(end - start);
            grads.zero();
            double batch_loss = 0.0;
            for (size_t b = start; b < end; ++b) {
                size_t r = order[b];
                double pred = backward(model, x.row(r), y[r], 2.0 * inv, grads, scratch);
                batch_loss += (pred - y[r]) * (pred - y[r]) * inv;
            }
            if (!std::isfinite(batch_loss))
                throw Error(Errc::non_finite_loss,
                            "training diverged: non-finite batch loss in epoch " +
                                std::to_string(epoch + 1));
            adam.step(model, grads);
        }
        model.fit.epoch_mse.push_back(train_mse());
    }
    return model;
}

double predict_mlp(const MlpModel& model, std::span<const double> x) {
    if (x.size() != static_cast<size_t>(model.params.input_dim))
        throw Error(Errc::dimension_mismatch,
                    "predict_mlp: query has " + std::to_string(x.size()) + " features, model wants " +
                        std::to_string(model.params.input_dim));
    return forward(model, x, nullptr);
}

std::vector<double> predict_mlp(const MlpModel& model, const Matrix& x) {
    std::vector<double> out(x.rows);
    for (size_t r = 0; r < x.rows; ++r) out[r] = predict_mlp(model, x.row(r));
    return out;
}

std::vector<double> mlp_loss_gradients(const MlpModel& model, std::span<const double> x, double y,
                                       double* loss_out) {
    GradBuffers grads(model);
    std::vector<std::vector<double>> scratch;
    double pred = backward(model, x, y, 1.0, grads, scratch);
    if (loss_out) *loss_out = 0.5 * (pred - y) * (pred - y);

    std::vector<double> flat;
    flat.reserve(mlp_parameter_count(model));
    for (size_t l = 0; l < grads.weights.size(); ++l) {
        flat.insert(flat.end(), grads.weights[l].data.begin(), grads.weights[l].data.end());
        flat.insert(flat.end(), grads.biases[l].begin(), grads.biases[l].end());
    }
    return flat;
}

size_t mlp_parameter_count(const MlpModel& model) {
    size_t n = 0;
    for (size_t l = 0; l < model.weights.size(); ++l)
        n += model.weights[l].data.size() + model.biases[l].size();
    return n;
}

namespace {
// Flattened layout: per layer, weight matrix (row-major) then biases.
double* parameter_at(MlpModel& m, size_t index) {
    for (size_t l = 0; l < m.weights.size(); ++l) {
        if (index < m.weights[l].data.size()) return &m.weights[l].data[index];
        index -= m.weights[l].data.size();
        if (index < m.biases[l].size()) return &m.biases[l][index];
        index -= m.biases[l].size();
    }
    throw Error(Errc::invalid_params, "parameter index out of range");
}
} // namespace

double mlp_get_parameter(const MlpModel& model, size_t index) {
    return *parameter_at(const_cast<MlpModel&>(model), index);
}

void mlp_set_parameter(MlpModel& model, size_t index, double value) {
    *parameter_at(model, index) = value;
}

std::string MlpModel::summary_json() const {
    nlohmann::ordered_json j;
    j["model"] = "dnn";
    j["input_dim"] = params.input_dim;
    nlohmann::ordered_json layers = nlohmann::ordered_json::array();
    auto counts = count_parameters(params);
    for (size_t i = 0; i < counts.size(); ++i)
        layers.push_back({{"layer", "dense_" + std::to_string(i + 1)},
                          {"output_shape", counts[i].output_size},
                          {"parameters", counts[i].parameters}});
    j["layers"] = layers;
    j["optimizer"] = {{"name", "adam"},
                      {"learning_rate", params.learning_rate},
                      {"beta1", params.beta1},
                      {"beta2", params.beta2},
                      {"epsilon", params.adam_eps}};
    j["loss"] = "mse";
    j["batch_size"] = params.batch_size;
    j["epochs"] = params.epochs;
    if (!fit.epoch_mse.empty()) {
        j["fit"] = {{"first_epoch_mse", fit.epoch_mse.front()},
                    {"final_epoch_mse", fit.epoch_mse.back()}};
    }
    return j.dump(2) + "\n";
}

namespace {
constexpr char kMlpMagic[4] = {'M', 'L', 'P', '1'};
}

void MlpModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write '" + path.string() + "'");
    out.write(kMlpMagic, 4);
    uint64_t input_dim = static_cast<uint64_t>(params.input_dim);
    uint64_t n_layers = weights.size();
    out.write(reinterpret_cast<const char*>(&input_dim), sizeof input_dim);
    out.write(reinterpret_cast<const char*>(&n_layers), sizeof n_layers);
    for (size_t l = 0; l < weights.size(); ++l) {
        uint64_t size = weights[l].rows;
        out.write(reinterpret_cast<const char*>(&size), sizeof size);
    }
    for (size_t l = 0; l < weights.size(); ++l) {
        out.write(reinterpret_cast<const char*>(weights[l].data.data()),
                  static_cast<std::streamsize>(weights[l].data.size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(biases[l].data()),
                  static_cast<std::streamsize>(biases[l].size() * sizeof(double)));
    }
    if (!out) throw Error(Errc::io_error, "short write to '" + path.string() + "'");
}

MlpModel MlpModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::file_not_found, "cannot open '" + path.string() + "'");
    char magic[4];
    in.read(magic, 4);
    uint64_t input_dim = 0, n_layers = 0;
    in.read(reinterpret_cast<char*>(&input_dim), sizeof input_dim);
    in.read(reinterpret_cast<char*>(&n_layers), sizeof n_layers);
    if (!in || std::string_view(magic, 4) != std::string_view(kMlpMagic, 4))
        throw Error(Errc::io_error, "'" + path.string() + "' is not an MLP model file");
    MlpParams params;
    params.input_dim = static_cast<int>(input_dim);
    params.layer_sizes.clear();
    for (uint64_t l = 0; l < n_layers; ++l) {
        uint64_t size = 0;
        in.read(reinterpret_cast<char*>(&size), sizeof size);
        params.layer_sizes.push_back(static_cast<int>(size));
    }
    MlpModel m;
    m.params = params;
    uint64_t fan_in = input_dim;
    for (uint64_t l = 0; l < n_layers; ++l) {
        uint64_t size = static_cast<uint64_t>(params.layer_sizes[l]);
        Matrix w(size, fan_in);
        in.read(reinterpret_cast<char*>(w.data.data()),
                static_cast<std::streamsize>(w.data.size() * sizeof(double)));
        std::vector<double> b(size);
        in.read(reinterpret_cast<char*>(b.data()),
                static_cast<std::streamsize>(b.size() * sizeof(double)));
        m.weights.push_back(std::move(w));
        m.biases.push_back(std::move(b));
        fan_in = size;
    }
    if (!in) throw Error(Errc::io_error, "truncated MLP model '" + path.string() + "'");
    return m;
}

} // namespace fdrkit
