#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mse/semantics.hpp"
#include "mse/syntax.hpp"

using namespace mse;

namespace {
// 0 = empty set, 1 = {0}; exact (d(0,1) = 1)
MetricSetStructure two_sets() {
    FinMetric d(2);
    d.set_sym(0, 1, Rational(1));
    return MetricSetStructure(d, {0, 1, 0, 0});
}

LeStructure swap_le() { return LeStructure(2, {Rational(0), Rational(1), Rational(1), Rational(0)}); }
}  // namespace

TEST_CASE("empty quantifier conventions") {
    MetricSetStructure m = two_sets();
    CHECK(m.exact());
    CHECK(eval_sq(parse_sq("sup x in a . d(x,x)"), m, {{"a", 0}}) == Rational(-1));
    CHECK(eval_sq(parse_sq("inf x in a . d(x,b)"), m, {{"a", 0}, {"b", 1}}) == Rational(1));
    CHECK(eval_sq(parse_sq("sup x in a . 2 * d(x,x)"), m, {{"a", 0}}) == Rational(-2));
    MetricSetStructure single(FinMetric(1), {0});
    CHECK(eval_sq(parse_sq("sup x . inf z in x . d(x,z)"), single, {}) == Rational(1));
}

TEST_CASE("eval_e and d_e") {
    LeStructure n = swap_le();
    CHECK(eval_e(rf::e("x", "y"), n, {{"x", 0}, {"y", 1}}) == Rational(1));
    CHECK(eval_e(parse_e("sup z . |e(z,a) - e(z,b)|"), n, {{"a", 0}, {"b", 1}}) == Rational(1));
    CHECK(d_e_matrix(n)(0, 1) == Rational(1));
    LeStructure one(1, {Rational(1, 3)});
    CHECK(eval_e(rf::d_e("x", "y"), one, {{"x", 0}, {"y", 0}}) == Rational(0));
    CHECK(d_e_matrix(one)(0, 0) == Rational(0));
    CHECK_THROWS(eval_e(rf::e("x", "y"), n, {{"x", 0}}));
    CHECK_THROWS_AS(eval_e(rf::dist("x", "y"), n, {{"x", 0}, {"y", 0}}), IllTyped);
}

TEST_CASE("eval_luk") {
    LeStructure n(2, {Rational(1, 4), Rational(1), Rational(0), Rational(1, 2)});
    CHECK(eval_luk(lf::bot(), n, {}) == Rational(0));
    CHECK(eval_luk(lf::ein("x", "y"), n, {{"x", 0}, {"y", 0}}) == Rational(3, 4));
    LF a = lf::ein("x", "y");
    for_each_assignment({"x", "y"}, 2, [&](const std::vector<std::size_t>& v) {
        Assignment r{{"x", v[0]}, {"y", v[1]}};
        CHECK(eval_luk(lf::implies(a, a), n, r) == Rational(1));
        // macros agree with their defining formulas
        LF b = lf::ein("y", "x");
        Rational A = eval_luk(a, n, r), B = eval_luk(b, n, r);
        CHECK(eval_luk(lf::strong(a, b), n, r) == rmax(A + B - Rational(1), Rational(0)));
        CHECK(eval_luk(lf::lor(a, b), n, r) == eval_luk(lf::implies(lf::implies(a, b), b), n, r));
        CHECK(eval_luk(lf::eqe("x", "y"), n, r) ==
              eval_luk(lf::forall("z", lf::iff(lf::ein("z", "x"), lf::ein("z", "y"))), n, r));
    });
    CHECK_THROWS_AS(LeStructure(0, {}), EmptyStructure);
}

TEST_CASE("induced_le and completion") {
    MetricSetStructure m = two_sets();
    LeStructure n = induced_le(m);
    CHECK(n.e(0, 0) == Rational(1));
    CHECK(n.e(1, 0) == Rational(1));
    CHECK(n.e(0, 1) == Rational(0));
    CHECK(n.e(1, 1) == Rational(1));
    Completion c = completion(n);
    CHECK(c.structure.size() == 2);
    CHECK(c.structure.mem(0, 1));
    CHECK(!c.structure.mem(1, 0));
    // duplicate an element: one class disappears
    LeStructure dup(3, {Rational(1), Rational(0), Rational(1), Rational(1), Rational(1), Rational(1), Rational(1),
                        Rational(0), Rational(1)});
    CHECK(completion(dup).structure.size() == 2);
}

TEST_CASE("eval_dis basics") {
    MetricSetStructure m = two_sets();
    DisContext ctx;
    ctx.witness["a"] = 1;
    CHECK(eval_dis(parse_dis("forall x : a . x = x"), m, ctx));
    CHECK(eval_dis(parse_dis("exists x : a . forall y : a . ~ y in x"), m, ctx));
    ctx.rho = {{"x", 0}, {"y", 1}};
    CHECK(eval_dis(parse_dis("x in y"), m, ctx));
    ctx.var_type["y"] = te::var("a");
    CHECK_THROWS_AS(eval_dis(parse_dis("x in y"), m, ctx), IllTyped);
}

TEST_CASE("model files round-trip exactly") {
    MetricSetStructure m = two_sets();
    auto back = model_from_json(to_json(m));
    REQUIRE(back.mss);
    CHECK(*back.mss == m);
    LeStructure n(2, {Rational(1, 3), Rational(2, 7), Rational(0), Rational(1)});
    auto back2 = model_from_json(to_json(n));
    REQUIRE(back2.le);
    CHECK(*back2.le == n);
    CHECK_THROWS(model_from_json(R"({"kind":"le","size":2,"e":["0"]})"));
}

TEST_CASE("memoized evaluation matches over repeated assignments") {
    MetricSetStructure m = two_sets();
    RF f = parse_sq("sup x in y . inf z in x . d(z,y) + d(x,w)");
    RealEvaluator ev(f, m, {"y", "w"});
    for (int round = 0; round < 2; ++round)
        for_each_assignment({"y", "w"}, 2, [&](const std::vector<std::size_t>& v) {
            CHECK(ev(v) == eval_sq(f, m, {{"y", v[0]}, {"w", v[1]}}));
        });
}
