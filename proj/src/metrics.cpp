#include "fdrkit/metrics.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "fdrkit/error.hpp"
#include "fdrkit/rng.hpp"
#include "fdrkit/util.hpp"

#include <json.hpp>

namespace fdrkit {

namespace {

void check_lengths(std::span<const double> y, std::span<const double> y_hat) {
    if (y.size() != y_hat.size())
        throw Error(Errc::length_mismatch, "vector lengths differ: " + std::to_string(y.size()) +
                                               " vs " + std::to_string(y_hat.size()));
    if (y.empty()) throw Error(Errc::empty_input, "empty input vectors");
}

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Population variance (divide by n).
double pop_var(std::span<const double> v) {
    double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

} // namespace

double mse(std::span<const double> y, std::span<const double> y_hat) {
    check_lengths(y, y_hat);
    double s = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
        double e = y[i] - y_hat[i];
        s += e * e;
    }
    return s / static_cast<double>(y.size());
}

double r2(std::span<const double> y, std::span<const double> y_hat) {
    check_lengths(y, y_hat);
    if (y.size() < 2) throw Error(Errc::too_few_samples, "r2 needs at least 2 samples");
    double ybar = mean_of(y);
    double ss_res = 0.0, ss_tot = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
        ss_res += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    if (ss_tot == 0.0) throw Error(Errc::zero_variance, "r2 undefined: all y equal");
    return 1.0 - ss_res / ss_tot;
}

double evs(std::span<const double> y, std::span<const double> y_hat) {
    check_lengths(y, y_hat);
    if (y.size() < 2) throw Error(Errc::too_few_samples, "evs needs at least 2 samples");
    double var_y = pop_var(y);
    if (var_y == 0.0) throw Error(Errc::zero_variance, "evs undefined: all y equal");
    std::vector<double> residual(y.size());
    for (size_t i = 0; i < y.size(); ++i) residual[i] = y[i] - y_hat[i];
    return 1.0 - pop_var(residual) / var_y;
}

Ci95 mean_ci95(std::span<const double> values) {
    if (values.size() < 2)
        throw Error(Errc::too_few_samples, "mean_ci95 needs at least 2 samples");
    double n = static_cast<double>(values.size());
    double m = mean_of(values);
    double ss = 0.0;
    for (double x : values) ss += (x - m) * (x - m);
    double sample_sd = std::sqrt(ss / (n - 1.0));
    double half = 1.96 * sample_sd / std::sqrt(n);
    return {m, m - half, m + half};
}

Split split_dataset(size_t n, double train_fraction, uint64_t seed) {
    if (n < 2) throw Error(Errc::invalid_params, "split_dataset needs n >= 2");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw Error(Errc::invalid_params, "train_fraction must be in (0, 1)");
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    Rng rng(seed);
    shuffle(idx, rng);
    auto train_size = static_cast<size_t>(std::floor(train_fraction * static_cast<double>(n) + 0.5));
    if (train_size == 0) train_size = 1;
    if (train_size >= n) train_size = n - 1;
    Split s;
    s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(train_size));
    s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(train_size), idx.end());
    return s;
}

RegressionReport evaluate_predictions(const std::string& model, std::span<const double> y_true,
                                      std::span<const double> y_pred) {
    RegressionReport r;
    r.model = model;
    r.n_test = y_true.size();
    r.mse = mse(y_true, y_pred);
    r.r2 = r2(y_true, y_pred);
    r.evs = evs(y_true, y_pred);
    r.mean_true = mean_of(y_true);
    r.mean_pred = mean_of(y_pred);
    r.ci95_true = mean_ci95(y_true);
    r.ci95_pred = mean_ci95(y_pred);
    return r;
}

std::string RegressionReport::to_json() const {
    nlohmann::ordered_json j;
    j["model"] = model;
    j["n_test"] = n_test;
    j["metrics"] = {{"mse", mse}, {"r2", r2}, {"evs", evs}};
    j["mean_true"] = mean_true;
    j["mean_pred"] = mean_pred;
    j["ci95_true"] = {{"mean", ci95_true.mean}, {"lo", ci95_true.lo}, {"hi", ci95_true.hi}};
    j["ci95_pred"] = {{"mean", ci95_pred.mean}, {"lo", ci95_pred.lo}, {"hi", ci95_pred.hi}};
    j["split"] = {{"seed", split_seed}, {"train", train_indices}, {"test", test_indices}};
    j["dropped_labels"] = dropped_labels;
    return j.dump(2) + "\n";
}

std::string RegressionReport::csv_header() {
    return "model,n_test,mse,r2,evs,mean_true,mean_pred,ci95_true_lo,ci95_true_hi,"
           "ci95_pred_lo,ci95_pred_hi";
}

std::string RegressionReport::csv_row() const {
    std::string out = model;
    out += ',' + std::to_string(n_test);
    for (double v : {mse, r2, evs, mean_true, mean_pred, ci95_true.lo, ci95_true.hi, ci95_pred.lo,
                     ci95_pred.hi})
        out += ',' + fmt_double(v);
    return out;
}

} // namespace fdrkit
