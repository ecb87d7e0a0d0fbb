#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mse/formula.hpp"
#include "mse/metric.hpp"
#include "mse/rational.hpp"
#include "mse/syntax.hpp"

using namespace mse;

namespace {
FinMetric three_point() {
    FinMetric m(3);
    m.set_sym(0, 1, Rational(1, 4));
    m.set_sym(0, 2, Rational(1, 2));
    m.set_sym(1, 2, Rational(1, 2));
    return m;
}
}  // namespace

TEST_CASE("rational arithmetic is exact and reduced") {
    Rational a(2, 4);
    CHECK(a.num() == 1);
    CHECK(a.den() == 2);
    CHECK(Rational(1, -3) == Rational(-1, 3));
    CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
    CHECK(Rational(1, 3) * Rational(3, 7) == Rational(1, 7));
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK(Rational::parse("-3/9") == Rational(-1, 3));
    CHECK(Rational::parse("5") == Rational(5));
    CHECK(Rational(7, 3).str() == "7/3");
    CHECK(clamp01(Rational(3, 2)) == Rational(1));
    CHECK(clamp01(Rational(-1, 2)) == Rational(0));
    CHECK_THROWS(Rational(1, 0));
    CHECK_THROWS(Rational::parse("1/x"));
    CHECK_THROWS(Rational(INT64_MAX) + Rational(1));
}

TEST_CASE("hausdorff conventions and the three-point example") {
    FinMetric m = three_point();
    CHECK(hausdorff({}, {}, m) == Rational(0));
    CHECK(hausdorff({}, {0}, m) == Rational(1));
    CHECK(hausdorff({0}, {1, 2}, m) == Rational(1, 2));
    CHECK(pointset_dist(1, {}, m) == Rational(1));
    CHECK(pointset_dist(0, {0, 2}, m) == Rational(0));
    CHECK(pointset_dist(0, {1, 2}, m) == Rational(1, 4));
}

TEST_CASE("metric_defect") {
    CHECK(metric_defect(three_point()) == Rational(0));
    FinMetric bad(3);
    bad.set_sym(0, 1, Rational(1));
    CHECK(metric_defect(bad) == Rational(1));
    CHECK(metric_defect(FinMetric(1)) == Rational(0));
}

TEST_CASE("hausdorff is a pseudo-metric on subsets and agrees with the sup formula") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        // random metric: shortest paths over random weights in {1..4}/4
        const std::size_t n = 4;
        FinMetric m(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) m.set_sym(i, j, Rational(1 + rng() % 4, 4));
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (m(i, k) + m(k, j) < m(i, j)) m.set(i, j, m(i, k) + m(k, j));
        REQUIRE(metric_defect(m) == Rational(0));
        std::vector<IndexSet> subsets;
        for (unsigned s = 0; s < (1u << n); ++s) {
            IndexSet a;
            for (std::size_t i = 0; i < n; ++i)
                if (s >> i & 1) a.push_back(i);
            subsets.push_back(a);
        }
        for (const auto& a : subsets)
            for (const auto& b : subsets) {
                CHECK(hausdorff(a, b, m) == hausdorff(b, a, m));
                if (!a.empty() && !b.empty()) {
                    Rational best(0);
                    for (std::size_t x = 0; x < n; ++x)
                        best = rmax(best, abs(pointset_dist(x, a, m) - pointset_dist(x, b, m)));
                    CHECK(best == hausdorff(a, b, m));
                }
                for (const auto& c : subsets)
                    CHECK(hausdorff(a, c, m) <= hausdorff(a, b, m) + hausdorff(b, c, m));
            }
    }
}

TEST_CASE("v, count_e, epsilon_phi") {
    CHECK(v_of(rf::dist("x", "y")) == Rational(1));
    CHECK(v_of(rf::sum(rf::dist("x", "y"), rf::dist("y", "z"))) == Rational(2));
    CHECK(v_of(rf::scale(Rational(-3), rf::max(rf::one(), rf::dist("x", "y")))) == Rational(3));
    CHECK(epsilon_phi(rf::e("x", "y")) == Rational(1, 6));
    CHECK(epsilon_phi(rf::scale(Rational(0), rf::e("x", "y"))) == Rational(1, 3));
    CHECK(epsilon_phi(rf::sum(rf::e("x", "y"), rf::e("y", "z"))) == Rational(1, 12));
    CHECK(count_e(lf::ein("x", "y")) == 1);
    CHECK(count_e(lf::eqe("x", "y")) == 2);
    CHECK(count_e(lf::bot()) == 0);
}

TEST_CASE("free variables") {
    CHECK(free_vars(rf::sup_in("x", "y", rf::dist("x", "z"))) == std::set<std::string>{"y", "z"});
    CHECK(free_vars(rf::dist("x", "x")) == std::set<std::string>{"x"});
    CHECK(free_vars(rf::one()).empty());
    CHECK_THROWS(rf::sup_in("x", "x", rf::one()));
}

TEST_CASE("parsing the canonical examples") {
    RF f = parse_sq("inf z in y . d(x,z)");
    CHECK(same(f, rf::inf_in("z", "y", rf::dist("x", "z"))));
    RF g = parse_e("sup x . min(e(x,a), 1/2 * 1)");
    CHECK(same(g, rf::sup("x", rf::min(rf::e("x", "a"), rf::constant(Rational(1, 2))))));
    LF h = parse_luk("forall x (x in z -> bot)");
    CHECK(same(h, lf::forall("x", lf::implies(lf::ein("x", "z"), lf::bot()))));
    CHECK_THROWS_AS(parse_sq("d(x,"), ParseError);
    CHECK_THROWS_AS(parse_e("d(x,y)"), ParseError);
}

TEST_CASE("print then parse is the identity on a corpus") {
    const char* sq[] = {"d(x,y) + d(y,z)", "(-3) * max(1, d(x,y))", "sup x in y . inf z in x . d(x,z)",
                        "min(d(x,y), 1/2 * 1) + (-1) * d(y,x)", "sup x . inf y . d(x,y)"};
    for (const char* s : sq) {
        RF f = parse_sq(s);
        CHECK(same(parse_sq(to_text(f)), f));
    }
    const char* e[] = {"e(x,y) + e(y,x)", "sup z . max(e(z,x) - e(z,y), e(z,y) - e(z,x))", "1 - e(x,x)"};
    for (const char* s : e) {
        RF f = parse_e(s);
        CHECK(same(parse_e(to_text(f)), f));
    }
    const char* lk[] = {"x in y -> bot", "forall x exists y (x in y (*) ~ y in x)", "x =e y <-> (x in y | y in x)",
                        "M[1; -1, 2](x in y, y in y)"};
    for (const char* s : lk) {
        LF f = parse_luk(s);
        CHECK(same(parse_luk(to_text(f)), f));
    }
    DF d = parse_dis("exists x : a . forall y : a . ~ y in x");
    CHECK(to_text(parse_dis(to_text(d))) == to_text(d));
}
