#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mse/syntax.hpp"
#include "mse/translation.hpp"
#include "mse/tree_models.hpp"
#include "mse/verification.hpp"

using namespace mse;

namespace {

// Pure sets, discrete metric. 0 = {}, 1 = {0}, 2 = {1,0}, 3 = {1}, 4 = {3}, 5 = {2,4}
MetricSetStructure pair_sets() {
    const std::vector<std::vector<std::size_t>> ext{{}, {0}, {0, 1}, {1}, {3}, {2, 4}};
    const std::size_t n = ext.size();
    FinMetric d(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d.set_sym(i, j, Rational(1));
    std::vector<char> mem(n * n, 0);
    for (std::size_t j = 0; j < n; ++j)
        for (auto i : ext[j]) mem[i * n + j] = 1;
    return MetricSetStructure(d, mem);
}

}  // namespace

TEST_CASE("find_extension") {
    MetricSetStructure m = pair_sets();
    REQUIRE(m.exact());
    auto w = find_extension(m, {0, 1});
    CHECK(w.satisfied);
    CHECK(w.element == 2);
    auto miss = find_extension(m, {5});
    CHECK(!miss.satisfied);
    CHECK(miss.residual == Rational(1));
    CHECK(find_extension(m, {}).element == 0);
}

TEST_CASE("exc_search") {
    MetricSetStructure m = pair_sets();
    RF phi = parse_sq("d(x,a)");
    auto w = exc_search(m, phi, "x", {{"a", 0}}, Rational(0), Rational(1, 2));
    CHECK(w.satisfied);
    CHECK(w.element == 1);
    // verify both halves of the contract by a full scan
    for (std::size_t c = 0; c < m.size(); ++c) {
        Rational v = eval_sq(phi, m, {{"x", c}, {"a", 0}});
        if (v <= Rational(0)) CHECK(m.mem(c, w.element));
        if (m.mem(c, w.element)) CHECK(v < Rational(1, 2));
    }
    try {
        exc_search(m, phi, "x", {{"a", 5}}, Rational(0), Rational(1, 2));
        FAIL("expected NoWitness");
    } catch (const NoWitness& e) {
        CHECK(e.best.residual > Rational(0));
        CHECK(!e.best.satisfied);
    }
    CHECK_THROWS(exc_search(m, phi, "x", {}, Rational(0), Rational(1, 2)));
    CHECK_THROWS(exc_search(m, phi, "x", {{"a", 0}}, Rational(1), Rational(1, 2)));
}

TEST_CASE("wiener pairs") {
    MetricSetStructure m = pair_sets();
    CHECK(wiener_pair(m, 0, 1) == 5);
    CHECK_THROWS_AS(wiener_pair(m, 1, 0), InsufficientDepth);
    std::mt19937_64 rng(42);
    for (int k = 0; k < 10; ++k) {
        FinMetric base = random_metric(rng, 4);
        CHECK(metric_defect(base) == Rational(0));
        PairLawResult r = wiener_pair_oracle(base);
        CHECK(r.quadruples == 256);
        CHECK(r.failures == 0);
    }
}

TEST_CASE("russell gap on a cyclic pair") {
    for (Rational t : {Rational(1, 2), Rational(1, 3), Rational(2, 3)}) {
        MetricSetStructure m = quine_cycle_structure(t);
        REQUIRE(m.exact());
        RussellResult r = russell_gap(m, Rational(1, 4));
        CHECK(r.satisfied);
        CHECK(r.element == 2);
        CHECK(r.e_value == t);
        CHECK(r.phi_value == Rational(1) - t);
        CHECK(Rational(1, 4) < r.phi_value);
        CHECK(r.phi_value < Rational(1));
    }
    // the L_e reading agrees on exact structures
    for (Rational t : {Rational(1, 2), Rational(1, 5)}) {
        MetricSetStructure m = quine_cycle_structure(t);
        RussellResult a = russell_gap(m, Rational(1, 4));
        RussellResult b = russell_gap(induced_le(m), Rational(1, 4));
        CHECK(a.element == b.element);
        CHECK(a.phi_value == b.phi_value);
    }
    // without the cycle no element fits: the witness would have to hold itself
    MetricSetStructure hf = pair_sets();
    CHECK_THROWS_AS(russell_gap(hf, Rational(1, 4)), NoWitness);
}

TEST_CASE("russell gap on the s_2 model") {
    QuotientModel q = quotient_model(FinMetric(0), 4, pseudo_finite_gauge(2, 4));
    LeStructure le = q.le();
    // {empty, {empty}} takes both phi-0 classes and nothing else
    RussellResult r = russell_gap(le, Rational(1, 4));
    CHECK(r.satisfied);
    CHECK(q.class_label(r.element) == "{{},{{}}}");
    CHECK(r.phi_value == Rational(1, 2));
    RussellResult loose = russell_gap(le, Rational(1, 4), Rational(1, 2));
    CHECK(Rational(-1, 4) < loose.phi_value);
    CHECK(loose.phi_value < Rational(1));
    // its completion is only 1/2-exact, and there the exact contract has no witness
    CHECK_THROWS_AS(russell_gap(completion(le).structure, Rational(1, 4)), NoWitness);
    CHECK_THROWS(exc_search(le, parse_sq("d(x,x)"), "x", {}, Rational(0), Rational(1)));
}

TEST_CASE("spectrum and chains") {
    MetricSetStructure m = pair_sets();
    auto dis = discreteness_spectrum(m);
    for (auto& v : dis) CHECK(v == Rational(1));
    auto rows = chain_report(m);
    CHECK(rows[0].chain);  // empty
    CHECK(rows[0].well_ordered);
    CHECK(rows[2].chain);  // {0, {0}}
    CHECK(rows[2].well_ordered);
    CHECK(!rows[5].chain);  // {{0,{0}}, {{{0}}}}: incomparable members
    CHECK(rows[5].chn > Rational(0));
    CHECK(!rows[5].well_ordered);

    MetricSetStructure q = quine_cycle_structure(Rational(1, 3));
    auto dq = discreteness_spectrum(q);
    CHECK(dq[0] == Rational(1));
    CHECK(dq[2] == Rational(1));
}

TEST_CASE("random exact structures") {
    std::mt19937_64 rng(1);
    for (std::size_t size = 1; size <= 8; ++size)
        for (std::size_t atoms = 0; atoms <= 3; ++atoms) {
            MetricSetStructure m = random_exact_structure(rng, size, atoms);
            CHECK(m.size() == size);
            CHECK(m.exact());
            CHECK(metric_defect(m.metric()) == Rational(0));
        }
    CHECK(corpus_sq().size() == 20);
    CHECK(corpus_e().size() == 20);
    for (auto& t : corpus_sq()) CHECK_NOTHROW(parse_sq(t));
    for (auto& t : corpus_e()) CHECK_NOTHROW(parse_e(t));
}
