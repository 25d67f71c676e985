#include "fdrkit/svr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "fdrkit/error.hpp"
#include "fdrkit/util.hpp"

#include <json.hpp>

namespace fdrkit {

double rbf_kernel(std::span<const double> x, std::span<const double> x2, double gamma) {
    if (x.size() != x2.size())
        throw Error(Errc::dimension_mismatch, "rbf_kernel: " + std::to_string(x.size()) + " vs " +
                                                  std::to_string(x2.size()) + " dimensions");
    double sq = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - x2[i];
        sq += d * d;
    }
    return std::exp(-gamma * sq);
}

void SvrParams::validate() const {
    auto fail = [](const std::string& msg) { throw Error(Errc::invalid_params, msg); };
    if (!(gamma > 0.0)) fail("gamma must be > 0");
    if (epsilon < 0.0) fail("epsilon must be >= 0");
    if (!(c > 0.0)) fail("C must be > 0");
    if (!(kkt_tol > 0.0)) fail("kkt_tol must be > 0");
    if (max_passes < 1) fail("max_passes must be >= 1");
}

namespace {

constexpr double kTau = 1e-12;

// The dual is solved over 2n variables: a[0..n) carries the upper-tube
// multipliers (sign +1), a[n..2n) the lower-tube ones (sign -1).
// Q_ij = s_i * s_j * K(i mod n, j mod n), G = Q a + p with
// p_i = eps - y_i (upper) or eps + y_i (lower).
struct SmoState {
    size_t n = 0;
    std::vector<double> a;
    std::vector<double> grad;
    const Matrix* kernel = nullptr;
    double c = 0.0;

    double sign(size_t t) const { return t < n ? 1.0 : -1.0; }
    double q(size_t t, size_t u) const {
        return sign(t) * sign(u) * kernel->at(t % n, u % n);
    }
    bool in_up(size_t t) const { return sign(t) > 0 ? a[t] < c : a[t] > 0.0; }
    bool in_low(size_t t) const { return sign(t) > 0 ? a[t] > 0.0 : a[t] < c; }
    double neg_sg(size_t t) const { return -sign(t) * grad[t]; }
};

} // namespace

SvrModel fit_svr(const Matrix& x, std::span<const double> y, const SvrParams& params) {
    params.validate();
    size_t n = x.rows;
    if (n < 2) throw Error(Errc::invalid_params, "fit_svr needs at least 2 samples");
    if (y.size() != n)
        throw Error(Errc::length_mismatch, "fit_svr: " + std::to_string(n) + " rows vs " +
                                               std::to_string(y.size()) + " targets");
    for (double v : x.data)
        if (!std::isfinite(v)) throw Error(Errc::invalid_params, "fit_svr: non-finite feature");
    for (double v : y)
        if (!std::isfinite(v)) throw Error(Errc::invalid_params, "fit_svr: non-finite target");

    SvrModel model;
    model.params = params;

    auto [y_min, y_max] = std::minmax_element(y.begin(), y.end());
    if (*y_min == *y_max) {
        // DegenerateData: constant target, nothing to optimize
        model.bias = *y_min;
        model.support_vectors = Matrix(0, x.cols);
        model.fit.converged = true;
        model.fit.degenerate = true;
        return model;
    }

    Matrix kernel(n, n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i; j < n; ++j) {
            double k = rbf_kernel(x.row(i), x.row(j), params.gamma);
            kernel.at(i, j) = k;
            kernel.at(j, i) = k;
        }

    SmoState st;
    st.n = n;
    st.kernel = &kernel;
    st.c = params.c;
    st.a.assign(2 * n, 0.0);
    st.grad.resize(2 * n);
    for (size_t i = 0; i < n; ++i) {
        st.grad[i] = params.epsilon - y[i];
        st.grad[n + i] = params.epsilon + y[i];
    }

    const size_t max_iterations = static_cast<size_t>(params.max_passes) * n;
    size_t iter = 0;
    bool converged = false;

    while (iter < max_iterations) {
        // maximal violating pair
        double m_up = -std::numeric_limits<double>::infinity();
        double m_low = std::numeric_limits<double>::infinity();
        size_t i = 2 * n, j = 2 * n;
        for (size_t t = 0; t < 2 * n; ++t) {
            if (st.in_up(t) && st.neg_sg(t) > m_up) {
                m_up = st.neg_sg(t);
                i = t;
            }
            if (st.in_low(t) && st.neg_sg(t) < m_low) {
                m_low = st.neg_sg(t);
                j = t;
            }
        }
        if (i == 2 * n || j == 2 * n || m_up - m_low < params.kkt_tol) {
            converged = true;
            break;
        }
        ++iter;

        double old_ai = st.a[i], old_aj = st.a[j];
        double qii = st.q(i, i), qjj = st.q(j, j), qij = st.q(i, j);
        double c = params.c;

        if (st.sign(i) != st.sign(j)) {
            double quad = qii + qjj + 2.0 * qij;
            if (quad <= 0) quad = kTau;
            double delta = (-st.grad[i] - st.grad[j]) / quad;
            double diff = st.a[i] - st.a[j];
            st.a[i] += delta;
            st.a[j] += delta;
            if (diff > 0) {
                if (st.a[j] < 0) {
                    st.a[j] = 0;
                    st.a[i] = diff;
                }
            } else {
                if (st.a[i] < 0) {
                    st.a[i] = 0;
                    st.a[j] = -diff;
                }
            }
            if (diff > 0) {
                if (st.a[i] > c) {
                    st.a[i] = c;
                    st.a[j] = c - diff;
                }
            } else {
                if (st.a[j] > c) {
                    st.a[j] = c;
                    st.a[i] = c + diff;
                }
            }
        } else {
            double quad = qii + qjj - 2.0 * qij;
            if (quad <= 0) quad = kTau;
            double delta = (st.grad[i] - st.grad[j]) / quad;
            double sum = st.a[i] + st.a[j];
            st.a[i] -= delta;
            st.a[j] += delta;
            if (sum > c) {
                if (st.a[i] > c) {
                    st.a[i] = c;
                    st.a[j] = sum - c;
                }
            } else {
                if (st.a[j] < 0) {
                    st.a[j] = 0;
                    st.a[i] = sum;
                }
            }
            if (sum > c) {
                if (st.a[j] > c) {
                    st.a[j] = c;
                    st.a[i] = sum - c;
                }
            } else {
                if (st.a[i] < 0) {
                    st.a[i] = 0;
                    st.a[j] = sum;
                }
            }
        }

        double dai = st.a[i] - old_ai, daj = st.a[j] - old_aj;
        if (dai == 0.0 && daj == 0.0) {
            // numerically stuck pair; treat as converged to avoid spinning
            converged = true;
            break;
        }
        for (size_t t = 0; t < 2 * n; ++t) st.grad[t] += st.q(t, i) * dai + st.q(t, j) * daj;
    }

    // bias from the free candidates, else the violation-bracket midpoint
    double free_sum = 0.0;
    size_t free_count = 0;
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    for (size_t t = 0; t < 2 * n; ++t) {
        if (st.a[t] > 0.0 && st.a[t] < params.c) {
            free_sum += st.neg_sg(t);
            ++free_count;
        }
        if (st.in_up(t)) m_up = std::max(m_up, st.neg_sg(t));
        if (st.in_low(t)) m_low = std::min(m_low, st.neg_sg(t));
    }
    double bias = free_count > 0 ? free_sum / static_cast<double>(free_count)
                                 : 0.5 * (m_up + m_low);

    double max_violation = 0.0;
    for (size_t t = 0; t < 2 * n; ++t) {
        if (st.in_up(t)) max_violation = std::max(max_violation, st.neg_sg(t) - bias);
        if (st.in_low(t)) max_violation = std::max(max_violation, bias - st.neg_sg(t));
    }

    double dual = 0.0;
    for (size_t t = 0; t < 2 * n; ++t) {
        double p_t = t < n ? params.epsilon - y[t] : params.epsilon + y[t - n];
        dual += st.a[t] * (st.grad[t] + p_t);
    }
    dual = -0.5 * dual;

    std::vector<size_t> sv_rows;
    for (size_t i = 0; i < n; ++i)
        if (std::abs(st.a[i] - st.a[n + i]) > 1e-12) sv_rows.push_back(i);

    model.support_vectors = Matrix(sv_rows.size(), x.cols);
    model.dual_coefs.resize(sv_rows.size());
    for (size_t r = 0; r < sv_rows.size(); ++r) {
        size_t i = sv_rows[r];
        model.dual_coefs[r] = st.a[i] - st.a[n + i];
        auto src = x.row(i);
        std::copy(src.begin(), src.end(), model.support_vectors.row(r).begin());
    }
    model.bias = bias;
    model.fit.converged = converged;
    model.fit.iterations = iter;
    model.fit.max_kkt_violation = std::max(0.0, max_violation);
    model.fit.dual_objective = dual;
    return model;
}

double predict_svr(const SvrModel& model, std::span<const double> x) {
    if (x.size() != model.support_vectors.cols && model.support_vectors.rows > 0)
        throw Error(Errc::dimension_mismatch,
                    "predict_svr: query has " + std::to_string(x.size()) + " features, model has " +
                        std::to_string(model.support_vectors.cols));
    double f = model.bias;
    for (size_t r = 0; r < model.support_vectors.rows; ++r)
        f += model.dual_coefs[r] *
             rbf_kernel(model.support_vectors.row(r), x, model.params.gamma);
    return f;
}

std::vector<double> predict_svr(const SvrModel& model, const Matrix& x) {
    std::vector<double> out(x.rows);
    for (size_t r = 0; r < x.rows; ++r) out[r] = predict_svr(model, x.row(r));
    return out;
}

std::string SvrModel::summary_json() const {
    nlohmann::ordered_json j;
    j["model"] = "svr";
    j["hyperparameters"] = {{"gamma", params.gamma},
                            {"epsilon", params.epsilon},
                            {"c", params.c},
                            {"kkt_tol", params.kkt_tol}};
    j["support_vectors"] = support_vectors.rows;
    j["bias"] = bias;
    j["fit"] = {{"converged", fit.converged},
                {"degenerate", fit.degenerate},
                {"iterations", fit.iterations},
                {"max_kkt_violation", fit.max_kkt_violation},
                {"dual_objective", fit.dual_objective}};
    return j.dump(2) + "\n";
}

namespace {
constexpr char kSvrMagic[4] = {'S', 'V', 'R', '1'};

template <typename T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <typename T>
void get(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof v);
}
} // namespace

void SvrModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write '" + path.string() + "'");
    out.write(kSvrMagic, 4);
    put(out, params.gamma);
    put(out, params.epsilon);
    put(out, params.c);
    put(out, bias);
    uint64_t rows = support_vectors.rows, cols = support_vectors.cols;
    put(out, rows);
    put(out, cols);
    for (double v : dual_coefs) put(out, v);
    for (double v : support_vectors.data) put(out, v);
    if (!out) throw Error(Errc::io_error, "short write to '" + path.string() + "'");
}

SvrModel SvrModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::file_not_found, "cannot open '" + path.string() + "'");
    char magic[4];
    in.read(magic, 4);
    SvrModel m;
    get(in, m.params.gamma);
    get(in, m.params.epsilon);
    get(in, m.params.c);
    get(in, m.bias);
    uint64_t rows = 0, cols = 0;
    get(in, rows);
    get(in, cols);
    if (!in || std::string_view(magic, 4) != std::string_view(kSvrMagic, 4))
        throw Error(Errc::io_error, "'" + path.string() + "' is not an SVR model file");
    m.dual_coefs.resize(rows);
    for (double& v : m.dual_coefs) get(in, v);
    m.support_vectors = Matrix(rows, cols);
    for (double& v : m.support_vectors.data) get(in, v);
    if (!in) throw Error(Errc::io_error, "truncated SVR model '" + path.string() + "'");
    return m;
}

} // namespace fdrkit
