#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "tristrat/metrics.hpp"

using namespace tristrat;
using Vec = Eigen::VectorXd;

TEST_CASE("accumulated return") {
    CHECK(accumulated_return(Vec{{0.0}}) == 0.0);
    CHECK(accumulated_return(Vec{{0.10, -0.05}}) == doctest::Approx(0.045));
    CHECK(accumulated_return(Vec()) == 0.0);
}

TEST_CASE("sharpe") {
    CHECK(sharpe(Vec{{0.1, -0.1}}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(sharpe(Vec{{0.02, 0.02, 0.02}}), UndefinedMetric);
    CHECK_THROWS_AS(sharpe(Vec{{0.02}}), UndefinedMetric);
    // mean 0.02, sample sd 0.02 -> 1
    CHECK(sharpe(Vec{{0.0, 0.02, 0.04}}) == doctest::Approx(1.0));
}

TEST_CASE("max drawdown") {
    CHECK(max_drawdown(Vec{{0.0, 0.01, 0.02}}) == 0.0);
    CHECK(max_drawdown(Vec{{0.2, -0.1}}) == doctest::Approx(-0.1));
    CHECK(max_drawdown(Vec{{-0.1, 0.05}}) == doctest::Approx(-0.1)); // initial capital is the first peak
    const Vec w = wealth_curve(Vec{{0.2, -0.1}});
    CHECK(w(0) == doctest::Approx(1.2));
    CHECK(w(1) == doctest::Approx(1.08));
}

TEST_CASE("calmar") {
    CHECK(calmar(0.5, -0.1) == doctest::Approx(5.0));
    CHECK(calmar(0.0, -0.2) == 0.0);
    CHECK_THROWS_AS(calmar(0.3, 0.0), UndefinedMetric);
}

TEST_CASE("compute_metrics reports undefined ratios as absent") {
    const auto flat = compute_metrics(Vec{{0.01, 0.01}});
    CHECK_FALSE(flat.sharpe);
    CHECK_FALSE(flat.calmar);
    CHECK(flat.accumulated_return == doctest::Approx(0.0201));
    CHECK(flat.weeks == 2);
}

TEST_CASE("random sequences match brute-force oracles") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> r(-0.5, 0.5);
    std::uniform_int_distribution<int> len(5, 200);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(static_cast<std::size_t>(len(rng)));
        for (auto& x : v) x = r(rng);
        const Vec e = Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
        CHECK(oracle::close_rel(accumulated_return(e), oracle::accumulated_return(v), 1e-12, 1e-15));
        CHECK(oracle::close_rel(sharpe(e), oracle::sharpe(v), 1e-12, 1e-15));
        CHECK(oracle::close_rel(max_drawdown(e), oracle::max_drawdown(v), 1e-12, 1e-15));
    }
}
