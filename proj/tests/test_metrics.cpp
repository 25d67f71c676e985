#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fdrkit/error.hpp"
#include "fdrkit/metrics.hpp"
#include "fdrkit/rng.hpp"

using namespace fdrkit;

namespace {

// Definitional re-implementations, written straight from the formulas and
// kept independent of the library code paths.
double oracle_mse(const std::vector<double>& y, const std::vector<double>& yh) {
    double s = 0.0;
    for (size_t i = 0; i < y.size(); ++i) s += (y[i] - yh[i]) * (y[i] - yh[i]);
    return s / double(y.size());
}

double oracle_r2(const std::vector<double>& y, const std::vector<double>& yh) {
    double ybar = std::accumulate(y.begin(), y.end(), 0.0) / double(y.size());
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
        num += (y[i] - yh[i]) * (y[i] - yh[i]);
        den += (y[i] - ybar) * (y[i] - ybar);
    }
    return 1.0 - num / den;
}

double oracle_var(const std::vector<double>& v) {
    double m = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / double(v.size());
}

double oracle_evs(const std::vector<double>& y, const std::vector<double>& yh) {
    std::vector<double> res(y.size());
    for (size_t i = 0; i < y.size(); ++i) res[i] = y[i] - yh[i];
    return 1.0 - oracle_var(res) / oracle_var(y);
}

} // namespace

TEST_CASE("mse hand examples") {
    std::vector<double> a{1, 2, 3}, same{1, 2, 3};
    CHECK(mse(a, same) == 0.0);

    std::vector<double> y{0, 2}, yh{1, 1};
    CHECK(mse(y, yh) == doctest::Approx(1.0).epsilon(1e-15));

    std::vector<double> ys{0 + 7.5, 2 + 7.5}, yhs{1 + 7.5, 1 + 7.5};
    CHECK(mse(ys, yhs) == doctest::Approx(mse(y, yh)).epsilon(1e-15));
}

TEST_CASE("mse errors") {
    std::vector<double> a{1, 2}, b{1};
    CHECK_THROWS_AS(mse(a, b), Error);
    std::vector<double> e;
    CHECK_THROWS_AS(mse(e, e), Error);
    try {
        mse(e, e);
        FAIL("expected throw");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::empty_input);
    }
}

TEST_CASE("r2 hand examples") {
    std::vector<double> y{0, 1, 2};
    CHECK(r2(y, y) == 1.0);

    std::vector<double> mean_pred{1, 1, 1};
    CHECK(r2(y, mean_pred) == 0.0);

    std::vector<double> yh{0, 1, 1};
    CHECK(r2(y, yh) == doctest::Approx(0.5).epsilon(1e-15));

    std::vector<double> flat{3, 3, 3};
    CHECK_THROWS_AS(r2(flat, yh), Error);
}

TEST_CASE("evs hand examples") {
    std::vector<double> y{0, 1, 2};
    CHECK(evs(y, y) == 1.0);

    // constant offset has zero residual variance: evs stays 1 while r2 drops
    std::vector<double> off{0.5, 1.5, 2.5};
    CHECK(evs(y, off) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r2(y, off) < 1.0);

    std::vector<double> yh{0, 1, 1};
    CHECK(evs(y, yh) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("metrics match the definitional oracles on 1000 random pairs") {
    Rng rng(20240913);
    for (int trial = 0; trial < 1000; ++trial) {
        size_t n = 2 + rng.next_below(30);
        std::vector<double> y(n), yh(n);
        for (size_t i = 0; i < n; ++i) {
            y[i] = rng.next_range(-5, 5);
            yh[i] = rng.next_range(-5, 5);
        }
        if (oracle_var(y) == 0.0) continue;
        CHECK(mse(y, yh) == doctest::Approx(oracle_mse(y, yh)).epsilon(1e-12));
        CHECK(r2(y, yh) == doctest::Approx(oracle_r2(y, yh)).epsilon(1e-12));
        CHECK(evs(y, yh) == doctest::Approx(oracle_evs(y, yh)).epsilon(1e-12));
    }
}

TEST_CASE("evs >= r2, equal exactly when the mean residual is zero") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        size_t n = 2 + rng.next_below(20);
        std::vector<double> y(n), yh(n);
        for (size_t i = 0; i < n; ++i) {
            y[i] = rng.next_range(-2, 2);
            yh[i] = rng.next_range(-2, 2);
        }
        if (oracle_var(y) == 0.0) continue;
        CHECK(evs(y, yh) >= r2(y, yh) - 1e-12);
    }

    // centered residual: evs == r2
    std::vector<double> y{0, 1, 2, 3}, yh{0.5, 0.5, 2.5, 2.5};
    double mean_res = 0.0;
    for (size_t i = 0; i < y.size(); ++i) mean_res += y[i] - yh[i];
    REQUIRE(mean_res == 0.0);
    CHECK(evs(y, yh) == doctest::Approx(r2(y, yh)).epsilon(1e-14));
}

TEST_CASE("mean_ci95 hand examples") {
    std::vector<double> constant{0.7, 0.7, 0.7};
    Ci95 c = mean_ci95(constant);
    CHECK(c.mean == doctest::Approx(0.7));
    CHECK(c.lo == doctest::Approx(0.7));
    CHECK(c.hi == doctest::Approx(0.7));

    std::vector<double> sym{-1, 1, -2, 2};
    Ci95 s = mean_ci95(sym);
    CHECK(s.mean == doctest::Approx(0.0));
    CHECK(s.lo == doctest::Approx(-s.hi).epsilon(1e-12));

    std::vector<double> pair{0, 1};
    Ci95 p = mean_ci95(pair);
    CHECK(p.mean == doctest::Approx(0.5));
    CHECK(p.lo == doctest::Approx(-0.48).epsilon(1e-6));
    CHECK(p.hi == doctest::Approx(1.48).epsilon(1e-6));

    std::vector<double> one{1.0};
    CHECK_THROWS_AS(mean_ci95(one), Error);
}

TEST_CASE("split_dataset sizes and tie rule") {
    Split s = split_dataset(10, 0.6, 42);
    CHECK(s.train.size() == 6);
    CHECK(s.test.size() == 4);

    Split big = split_dataset(1202, 0.6, 42);
    CHECK(big.train.size() == 721);
    CHECK(big.test.size() == 481);

    // round-half-up
    CHECK(split_dataset(5, 0.5, 1).train.size() == 3);
}

TEST_CASE("split_dataset is disjoint, exhaustive and deterministic") {
    Split a = split_dataset(57, 0.6, 9001);
    Split b = split_dataset(57, 0.6, 9001);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);

    std::vector<char> seen(57, 0);
    for (size_t i : a.train) {
        CHECK(!seen[i]);
        seen[i] = 1;
    }
    for (size_t i : a.test) {
        CHECK(!seen[i]);
        seen[i] = 1;
    }
    CHECK(std::count(seen.begin(), seen.end(), 1) == 57);

    Split c = split_dataset(57, 0.6, 9002);
    CHECK(a.train != c.train);
}

TEST_CASE("report json and csv are stable") {
    std::vector<double> y{0.1, 0.5, 0.9, 0.3}, yh{0.2, 0.4, 0.8, 0.35};
    RegressionReport r = evaluate_predictions("svr", y, yh);
    CHECK(r.n_test == 4);
    std::string j1 = r.to_json(), j2 = r.to_json();
    CHECK(j1 == j2);
    CHECK(j1.find("\"model\": \"svr\"") != std::string::npos);
    CHECK(r.csv_row().rfind("svr,4,", 0) == 0);
}
