#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "tristrat/indicators.hpp"

using namespace tristrat;
using Vec = Eigen::VectorXd;

namespace {

Vec from(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

void check_series(const Vec& got, const std::vector<double>& want, double tol = 1e-9) {
    REQUIRE(got.size() == static_cast<Eigen::Index>(want.size()));
    for (Eigen::Index i = 0; i < got.size(); ++i) {
        INFO("index " << i);
        CHECK(oracle::close_rel(got(i), want[static_cast<std::size_t>(i)], tol, tol));
    }
}

struct Ohlc {
    std::vector<double> h, l, c;
};

Ohlc random_walk(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> step(-0.03, 0.03), spread(0.0, 0.02);
    Ohlc s;
    double price = 100;
    for (int i = 0; i < n; ++i) {
        price *= 1 + step(rng);
        s.c.push_back(price);
        s.h.push_back(price * (1 + spread(rng)));
        s.l.push_back(price * (1 - spread(rng)));
    }
    return s;
}

} // namespace

TEST_CASE("sma") {
    const Vec s = sma(Vec{{1.0, 2.0, 3.0}}, 3);
    CHECK(is_absent(s(0)));
    CHECK(is_absent(s(1)));
    CHECK(s(2) == doctest::Approx(2.0));

    const Vec flat = sma(Vec::Constant(30, 5.0), 7);
    for (Eigen::Index i = 6; i < 30; ++i) CHECK(flat(i) == doctest::Approx(5.0));

    std::mt19937_64 rng(11);
    const auto w = random_walk(rng, 50);
    check_series(sma(from(w.c), 20), oracle::sma(w.c, 20));
    CHECK_THROWS(sma(Vec::Ones(3), 0));
}

TEST_CASE("atr") {
    const Vec flat = Vec::Constant(30, 10.0);
    const Vec a = atr(flat, flat, flat, 14);
    for (Eigen::Index i = 14; i < 30; ++i) CHECK(a(i) == 0.0);

    // TRs: bar1 max(12-9, |12-10|, |9-10|) = 3; bar2 max(11-10, |11-11|, |10-11|) = 1.
    const Vec h{{11.0, 12.0, 11.0}}, l{{9.0, 9.0, 10.0}}, c{{10.0, 11.0, 10.5}};
    const Vec two = atr(h, l, c, 2);
    CHECK(is_absent(two(1)));
    CHECK(two(2) == doctest::Approx(2.0));

    std::mt19937_64 rng(12);
    const auto w = random_walk(rng, 252);
    check_series(atr(from(w.h), from(w.l), from(w.c), 14), oracle::atr(w.h, w.l, w.c, 14));
}

TEST_CASE("rsi") {
    Vec up(30), down(30);
    for (int i = 0; i < 30; ++i) {
        up(i) = 10 + i;
        down(i) = 100 - i;
    }
    CHECK(rsi(up, 14)(20) == 100.0);
    CHECK(rsi(down, 14)(20) == 0.0);
    CHECK(rsi(Vec::Constant(30, 3.0), 14)(20) == 50.0);

    std::mt19937_64 rng(13);
    const auto w = random_walk(rng, 252);
    check_series(rsi(from(w.c), 14), oracle::rsi(w.c, 14));
}

TEST_CASE("macd") {
    const auto flat = macd(Vec::Constant(80, 42.0));
    for (Eigen::Index i = 33; i < 80; ++i) {
        CHECK(flat.line(i) == doctest::Approx(0.0));
        CHECK(flat.hist(i) == doctest::Approx(0.0));
    }
    CHECK_THROWS(macd(Vec::Ones(40), 12, 12, 9));

    std::mt19937_64 rng(14);
    const auto w = random_walk(rng, 252);
    const auto got = macd(from(w.c), 12, 26, 9);
    const auto want = oracle::macd(w.c, 12, 26, 9);
    check_series(got.line, want.line);
    check_series(got.signal, want.signal);
    check_series(got.hist, want.hist);
    CHECK(is_absent(got.signal(32)));
    CHECK_FALSE(is_absent(got.signal(33)));
}

TEST_CASE("bollinger") {
    const auto b = bollinger(Vec{{1.0, 3.0}}, 2, 2.0);
    CHECK(b.mid(1) == doctest::Approx(2.0));
    CHECK(b.upper(1) == doctest::Approx(4.0));
    CHECK(b.lower(1) == doctest::Approx(0.0));

    const auto flat = bollinger(Vec::Constant(25, 7.0));
    CHECK(flat.upper(24) == doctest::Approx(7.0));
    CHECK(flat.lower(24) == doctest::Approx(7.0));

    std::mt19937_64 rng(15);
    const auto w = random_walk(rng, 252);
    const auto got = bollinger(from(w.c), 20, 2.0);
    const auto want = oracle::bollinger(w.c, 20, 2.0);
    check_series(got.upper, want.upper);
    check_series(got.mid, want.mid);
    check_series(got.lower, want.lower);
}

TEST_CASE("indicator table") {
    std::vector<DailyBar> bars;
    Date d = parse_date("2024-01-01");
    for (int i = 0; i < 5; ++i) bars.push_back({StockId("A"), d + std::chrono::days(i), 10, 11, 9, 10, 1});
    for (const auto& row : indicator_table(bars)) {
        CHECK_FALSE(row.sma);
        CHECK_FALSE(row.atr);
        CHECK_FALSE(row.rsi);
        CHECK_FALSE(row.macd_hist);
        CHECK_FALSE(row.boll_mid);
    }

    bars.clear();
    for (int i = 0; i < 60; ++i) bars.push_back({StockId("A"), d + std::chrono::days(i), 10, 10, 10, 10, 1});
    const auto flat = indicator_table(bars);
    CHECK(*flat.back().atr == 0.0);
    CHECK(*flat.back().rsi == 50.0);
    CHECK(*flat.back().macd_hist == doctest::Approx(0.0));

    std::mt19937_64 rng(16);
    const auto w = random_walk(rng, 252);
    bars.clear();
    for (int i = 0; i < 252; ++i)
        bars.push_back({StockId("A"), d + std::chrono::days(i), w.c[i], w.h[i], w.l[i], w.c[i], 1});
    const auto rows = indicator_table(bars);
    const auto s = sma(from(w.c), 20);
    const auto m = macd(from(w.c));
    const auto b = bollinger(from(w.c));
    const auto a = atr(from(w.h), from(w.l), from(w.c));
    const auto r = rsi(from(w.c));
    for (int i = 0; i < 252; ++i) {
        if (!is_absent(s(i))) CHECK(*rows[i].sma == s(i));
        if (!is_absent(a(i))) CHECK(*rows[i].atr == a(i));
        if (!is_absent(r(i))) CHECK(*rows[i].rsi == r(i));
        if (!is_absent(m.hist(i))) CHECK(*rows[i].macd_hist == m.hist(i));
        if (!is_absent(b.upper(i))) CHECK(*rows[i].boll_upper == b.upper(i));
        CHECK(rows[i].macd_hist.has_value() == !is_absent(m.hist(i)));
    }
}

TEST_CASE("no lookahead: prefixes reproduce the full series") {
    std::mt19937_64 rng(17);
    const auto w = random_walk(rng, 120);
    const Vec h = from(w.h), l = from(w.l), c = from(w.c);
    const auto full_m = macd(c);
    const auto full_b = bollinger(c);
    const Vec full_a = atr(h, l, c), full_r = rsi(c), full_s = sma(c, 20);
    for (Eigen::Index n = 1; n <= c.size(); ++n) {
        const auto pm = macd(c.head(n));
        const auto pb = bollinger(c.head(n));
        const Vec pa = atr(h.head(n), l.head(n), c.head(n));
        const Vec pr = rsi(c.head(n));
        const Vec ps = sma(c.head(n), 20);
        const auto d = n - 1;
        auto same = [](double x, double y) { return (is_absent(x) && is_absent(y)) || x == y; };
        CHECK(same(pm.hist(d), full_m.hist(d)));
        CHECK(same(pb.upper(d), full_b.upper(d)));
        CHECK(same(pa(d), full_a(d)));
        CHECK(same(pr(d), full_r(d)));
        CHECK(same(ps(d), full_s(d)));
    }
}
