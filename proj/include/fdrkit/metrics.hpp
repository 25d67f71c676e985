#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fdrkit {

/// Mean squared error, (1/n) sum (y_i - yhat_i)^2.
double mse(std::span<const double> y, std::span<const double> y_hat);

/// Coefficient of determination, 1 - SS_res / SS_tot. Requires Var(y) > 0.
double r2(std::span<const double> y, std::span<const double> y_hat);

/// Explained variance score, 1 - Var(y - yhat) / Var(y), population variance.
double evs(std::span<const double> y, std::span<const double> y_hat);

struct Ci95 {
    double mean = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// Normal-approximation 95% interval of the mean: mean +- 1.96 * s / sqrt(n),
/// with s the sample standard deviation. Requires n >= 2.
Ci95 mean_ci95(std::span<const double> values);

struct Split {
    std::vector<size_t> train;
    std::vector<size_t> test;
};

/// Seeded shuffle of 0..n-1, then the first round(train_fraction * n) indices
/// go to train and the remainder to test. Round-half-up tie rule.
Split split_dataset(size_t n, double train_fraction, uint64_t seed);

struct RegressionReport {
    std::string model;
    size_t n_test = 0;
    double mse = 0.0;
    double r2 = 0.0;
    double evs = 0.0;
    double mean_true = 0.0;
    double mean_pred = 0.0;
    Ci95 ci95_true;
    Ci95 ci95_pred;
    uint64_t split_seed = 0;
    std::vector<size_t> train_indices;
    std::vector<size_t> test_indices;
    std::vector<std::string> dropped_labels; // nodes with embeddings but no ground truth

    std::string to_json() const;
    static std::string csv_header();
    std::string csv_row() const;
};

/// Evaluates all report metrics on a (true, predicted) pair of test vectors.
RegressionReport evaluate_predictions(const std::string& model, std::span<const double> y_true,
                                      std::span<const double> y_pred);

} // namespace fdrkit
