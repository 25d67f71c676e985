#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fdrkit/matrix.hpp"

namespace fdrkit {

struct MlpParams {
    int input_dim = 8;
    std::vector<int> layer_sizes = {126, 64, 36, 12, 1}; // last layer is the output
    double learning_rate = 0.001;                        // Adam
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int batch_size = 10;
    int epochs = 200;
    uint64_t seed = 1;

    void validate() const;
};

struct LayerCount {
    int output_size;
    int64_t parameters; // output_size * (fan_in + 1)
};

/// Adam over one parameter array. First and second moments start at zero, so
/// a step with an all-zero gradient leaves the parameters untouched.
class Adam {
public:
    Adam(size_t n, double lr, double beta1, double beta2, double eps)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

    void step(std::span<double> params, std::span<const double> grads);
    int64_t steps() const { return t_; }

private:
    double lr_, beta1_, beta2_, eps_;
    int64_t t_ = 0;
    std::vector<double> m_, v_;
};

/// Per-layer parameter counts for the dense stack.
std::vector<LayerCount> count_parameters(const MlpParams& params);

struct MlpFitInfo {
    std::vector<double> epoch_mse; // full training-set MSE after each epoch
};

/// Fully connected network: ReLU hidden layers, linear scalar output.
struct MlpModel {
    MlpParams params;
    std::vector<Matrix> weights;            // [layer](out x in)
    std::vector<std::vector<double>> biases; // [layer][out]
    MlpFitInfo fit;

    std::string summary_json() const;
    void save(const std::filesystem::path& path) const;
    static MlpModel load(const std::filesystem::path& path);
};

/// Fresh network with Glorot-uniform weights and zero biases from the seed.
MlpModel init_mlp(const MlpParams& params);

/// Mini-batch Adam on MSE with seeded shuffling each epoch. Throws
/// NonFiniteLoss if the loss leaves the reals.
MlpModel fit_mlp(const Matrix& x, std::span<const double> y, const MlpParams& params);

std::vector<double> predict_mlp(const MlpModel& model, const Matrix& x);
double predict_mlp(const MlpModel& model, std::span<const double> x);

/// Analytic parameter gradients of the squared error 0.5*(f(x)-y)^2 for one
/// sample, flattened layer by layer (weights row-major, then biases).
/// Exposed for gradient verification.
std::vector<double> mlp_loss_gradients(const MlpModel& model, std::span<const double> x, double y,
                                       double* loss_out = nullptr);

/// Total parameter count; the flattened gradient layout matches this.
size_t mlp_parameter_count(const MlpModel& model);
double mlp_get_parameter(const MlpModel& model, size_t index);
void mlp_set_parameter(MlpModel& model, size_t index, double value);

} // namespace fdrkit
