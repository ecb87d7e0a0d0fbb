#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mse/tree_models.hpp"

using namespace mse;

namespace {

FinMetric no_atoms() { return FinMetric(0); }

FinMetric two_atoms(Rational d) {
    FinMetric q(2);
    q.set_sym(0, 1, d);
    return q;
}

// level-beta truncation of a level-k node id
std::uint64_t trunc_to(const TreeLevels& lv, std::size_t k, std::uint64_t id, std::size_t beta) {
    for (std::size_t j = k; j > beta; --j) id = lv.trunc(j, id);
    return id;
}

void cross_check(const FinMetric& q, std::size_t h, const Gauge& s) {
    TreeUniverse u(q, h);
    ExplicitQuotient ex = explicit_quotient(u, s);
    QuotientModel m(q, h, s);
    REQUIRE(m.enumerated());
    CHECK(m.size() == ex.le.size());
    std::vector<std::size_t> cls;
    for (std::size_t x = 0; x < u.size(); ++x) cls.push_back(m.class_of(u, x));
    for (std::size_t x = 0; x < u.size(); ++x)
        for (std::size_t y = 0; y < u.size(); ++y) {
            CHECK(m.e(cls[x], cls[y]) == u.e_s(x, y, s));
            CHECK((cls[x] == cls[y]) == (ex.class_of[x] == ex.class_of[y]));
        }
}

}  // namespace

TEST_CASE("universe sizes") {
    CHECK(predicted_count(0, 1) == "2");
    CHECK(predicted_count(0, 4) == "65536");
    CHECK(predicted_count(0, 5) == "2^(65536)");
    TreeLevels lv(0, 4);
    CHECK(lv.count(0) == 1);
    CHECK(lv.count(1) == 2);
    CHECK(lv.count(2) == 4);
    CHECK(lv.count(3) == 16);
    CHECK(lv.count(4) == 65536);
    for (std::size_t k = 1; k <= 4; ++k)
        for (std::uint64_t d = 0; d < lv.count(k - 1); ++d) CHECK(!lv.preimages(k, d).empty());
    CHECK(enumerate_universe(no_atoms(), 4).size() == 65536);
    CHECK(enumerate_universe(no_atoms(), 0).size() == 1);
    CHECK(enumerate_universe(FinMetric(1), 1).size() == 5);
    try {
        enumerate_universe(no_atoms(), 5);
        FAIL("expected cap error");
    } catch (const CapExceeded& e) {
        CHECK(e.predicted == "2^(65536)");
    }
}

TEST_CASE("truncation, membership, tc") {
    TreeLevels lv(0, 2);
    // {{<>}} at level 2 is id 2, {<>} at level 1 is id 1
    CHECK(lv.trunc(2, 2) == 1);
    TreeUniverse u(FinMetric(1), 2);
    // level-1: bit0 = q, bit1 = <>; {q} = 1, empty = 0; level-2 {{q}, empty} = (0b11) << 1
    const std::size_t x = u.element_of_node(6);
    IndexSet t = u.tc(x);
    CHECK(std::find(t.begin(), t.end(), 0) != t.end());
    CHECK(u.tc(0) == IndexSet{0});
    CHECK(u.tc(u.element_of_node(0)).empty());
    CHECK(u.mem(0, 0));
    CHECK(!u.mem(u.element_of_node(0), 0));
    CHECK(u.mem(0, u.element_of_node(1)));
}

TEST_CASE("rho recursion") {
    TreeUniverse u(no_atoms(), 3);
    for (std::size_t x = 0; x < u.size(); ++x)
        for (std::size_t y = 0; y < u.size(); ++y)
            for (std::size_t b = 0; b <= 3; ++b) {
                const bool same = trunc_to(u.levels(), 3, x, b) == trunc_to(u.levels(), 3, y, b);
                CHECK(u.rho(b, x, y) == (same ? Rational(0) : Rational(1)));
            }
    TreeUniverse a(two_atoms(Rational(1, 2)), 1);
    for (std::size_t b = 0; b < 4; ++b) CHECK(a.rho(b, 0, 1) == Rational(1, 2));
    TreeUniverse w(FinMetric(1), 2);
    for (std::size_t x = 0; x < w.size(); ++x)
        for (std::size_t y = 0; y < w.size(); ++y)
            for (std::size_t b = 0; b < 4; ++b) {
                CHECK(w.rho(b, x, y) <= w.rho(b + 1, x, y));
                CHECK(w.e_beta(b, x, y) <= w.e_beta(b + 1, x, y));
            }
}

TEST_CASE("gauges") {
    Gauge s2 = pseudo_finite_gauge(2, 4);
    CHECK(s2.s == std::vector<Rational>{1, 1, Rational(1, 2), 0, 0});
    CHECK(s2.eps == Rational(1, 2));
    CHECK(s2.smooth());
    CHECK(s2.last_positive() == 2);
    Gauge s1 = pseudo_finite_gauge(1, 3);
    CHECK(s1.s == std::vector<Rational>{1, 1, 0, 0});
    CHECK(s1.eps == Rational(1));
    CHECK_THROWS_AS(pseudo_finite_gauge(2, 3), HeightError);
    CHECK(parse_gauge("sn:2").s == s2.s);
    CHECK(parse_gauge("sn:2:5").s.size() == 6);
    CHECK(parse_gauge("1, 1, 1/2, 0").eps == Rational(1, 2));
    CHECK_THROWS(parse_gauge("1,1/2,1"));
    CHECK_THROWS(parse_gauge("1/2,0"));
    CHECK_THROWS(parse_gauge("1,2"));
    CHECK(gauge_text(s2) == "1,1,1/2,0,0");
}

TEST_CASE("quotient models match the explicit construction") {
    cross_check(no_atoms(), 3, pseudo_finite_gauge(1, 3));
    cross_check(no_atoms(), 3, parse_gauge("1,1,1,0"));
    cross_check(no_atoms(), 3, parse_gauge("1,1,1/2,0"));
    cross_check(FinMetric(1), 2, parse_gauge("1,1,0"));
    cross_check(FinMetric(1), 2, parse_gauge("1,1,1"));
    cross_check(FinMetric(1), 2, parse_gauge("1,1/2,0"));
}

TEST_CASE("pseudo-finite models") {
    for (int n = 1; n <= 2; ++n) {
        Gauge s = pseudo_finite_gauge(n, n + 2);
        QuotientModel m(no_atoms(), n + 2, s);
        CHECK(m.size() == (n == 1 ? 4u : 16u));
        LeStructure le = m.le();
        FinMetric de = d_e_matrix(le);
        for (std::size_t i = 0; i < m.size(); ++i)
            for (std::size_t j = 0; j < m.size(); ++j) {
                Rational r = m.rho_s(i, j);
                CHECK(r <= de(i, j));
                CHECK(de(i, j) <= r + s.eps);
                bool allowed = r.is_zero();
                for (auto v : s.s) allowed = allowed || r == v;
                CHECK(allowed);
            }
        AxiomReport rep = certify(le, s, certificate_corpus());
        CHECK(rep.pass);
        CHECK(rep.hext_defect <= s.eps);
        CHECK(!m.class_label(0).empty());
    }
}

TEST_CASE("atoms as self-singletons") {
    QuineReport r = quine_atoms_check(two_atoms(Rational(1, 2)), 2, parse_gauge("1,1,0"));
    CHECK(r.pass);
    CHECK(r.enumerated);
    REQUIRE(r.atoms.size() == 2);
    for (auto& a : r.atoms) {
        CHECK(a.self_singleton);
        CHECK(a.e_self == Rational(0));
    }
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.pairs[0].d_e == Rational(1, 2));
    CHECK_THROWS(quine_atoms_check(no_atoms(), 3, pseudo_finite_gauge(1, 3)));
}

TEST_CASE("V_sigma codes") {
    TreeUniverse u(no_atoms(), 4);
    CHECK(v_sigma(0, u) == u.element_of_node(0));
    const std::size_t v2 = v_sigma(2, u);
    CHECK(std::popcount(u.levels().chmask(u.node_id(v2))) == 2);
    CHECK_THROWS_AS(v_sigma(3, u), HeightError);
    HfPool pool;
    CHECK(pool.members(pool.v(3)).size() == 4);
    CHECK(pool.code_width(pool.v(3), 5) == 4);
    CHECK(pool.code_width(pool.v(2), 4) == 2);
    // V_3 and its members: distinct, pairwise at distance 1 under a gauge that is 1 up to 5
    std::vector<std::size_t> sets = pool.members(pool.v(3));
    sets.push_back(pool.v(3));
    MetricSetStructure m = hf_substructure(pool, sets, 6, parse_gauge("1,1,1,1,1,1,0"));
    CHECK(m.exact());
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j) CHECK(m.metric()(i, j) == (i == j ? Rational(0) : Rational(1)));
    CHECK(m.ext(4).size() == 4);
}
