#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fdrkit/matrix.hpp"

namespace fdrkit {

/// Gaussian kernel exp(-gamma * ||x - x'||^2); value in (0, 1], symmetric.
double rbf_kernel(std::span<const double> x, std::span<const double> x2, double gamma);

struct SvrParams {
    double gamma = 0.01;    // kernel spread
    double epsilon = 0.0125; // tolerance tube
    double c = 10.0;         // box constraint
    double kkt_tol = 1e-3;   // per-point KKT violation bound at convergence
    int max_passes = 200;    // iteration budget is max_passes * n pair updates
    uint64_t seed = 1;

    void validate() const;
};

struct SvrFitInfo {
    bool converged = false;
    bool degenerate = false; // constant-target short circuit
    size_t iterations = 0;
    double max_kkt_violation = 0.0;
    double dual_objective = 0.0; // maximized dual value; 0 at the zero start
};

struct SvrModel {
    SvrParams params;
    Matrix support_vectors;         // one row per support vector
    std::vector<double> dual_coefs; // alpha_i - alpha_i*, each in [-C, C]
    double bias = 0.0;
    SvrFitInfo fit;

    std::string summary_json() const;
    void save(const std::filesystem::path& path) const;
    static SvrModel load(const std::filesystem::path& path);
};

/// Epsilon-SVR fit by SMO on the dual: working pair selected by maximal KKT
/// violation, analytic two-variable update under the box constraints.
/// A constant target vector short-circuits to a bias-only model.
SvrModel fit_svr(const Matrix& x, std::span<const double> y, const SvrParams& params);

std::vector<double> predict_svr(const SvrModel& model, const Matrix& x);
double predict_svr(const SvrModel& model, std::span<const double> x);

} // namespace fdrkit
