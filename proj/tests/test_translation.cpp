#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <random>

#include "mse/syntax.hpp"
#include "mse/translation.hpp"
#include "mse/verification.hpp"

using namespace mse;

namespace {

std::vector<std::string> sorted_free(const RF& f) {
    auto s = free_vars(f);
    return {s.begin(), s.end()};
}

std::vector<MetricSetStructure> small_exact_structures() {
    std::vector<MetricSetStructure> out;
    std::mt19937_64 rng(7);
    for (std::size_t size = 1; size <= 4; ++size)
        for (std::size_t atoms = 0; atoms <= 2; ++atoms)
            for (int rep = 0; rep < 2; ++rep) out.push_back(random_exact_structure(rng, size, atoms));
    return out;
}

LeStructure random_le(std::mt19937_64& rng, std::size_t n) {
    std::vector<Rational> e;
    for (std::size_t i = 0; i < n * n; ++i) e.push_back(Rational(static_cast<std::int64_t>(rng() % 5), 4));
    return LeStructure(n, e);
}

}  // namespace

TEST_CASE("to_sq and to_e shapes") {
    RF s = to_sq(parse_e("e(x,y)"));
    CHECK(to_text(s) == to_text(parse_sq("inf w1 in y . d(x,w1)")));
    RF t = to_e(parse_sq("d(x,y)"));
    CHECK(is_e(t));
    CHECK(is_sq(to_sq(to_e(parse_sq("sup z in x . d(z,y)")))));
    CHECK(to_text(to_e(parse_sq("sup z in x . d(z,y)"))) == to_text(to_e(parse_sq("sup z in x . d(z,y)"))));
    CHECK_THROWS(to_sq(parse_sq("d(x,y)")));
}

TEST_CASE("round trips between the two languages") {
    auto structures = small_exact_structures();
    for (const auto& m : structures) REQUIRE(m.exact());
    std::size_t checked = 0;
    // e-formulas: value on N equals value of to_sq on the completion
    for (const auto& text : corpus_e()) {
        RF psi = parse_e(text);
        RF sq = to_sq(psi);
        auto vars = sorted_free(psi);
        for (const auto& m : structures) {
            LeStructure n = induced_le(m);
            Completion c = completion(n);
            for_each_assignment(vars, n.size(), [&](const std::vector<std::size_t>& v) {
                Assignment a, b;
                for (std::size_t i = 0; i < vars.size(); ++i) {
                    a[vars[i]] = v[i];
                    b[vars[i]] = c.class_of[v[i]];
                }
                CHECK_MESSAGE(eval_e(psi, n, a) == eval_sq(sq, c.structure, b), text);
                ++checked;
            });
        }
    }
    // d-formulas: value on M equals value of to_e on the induced L_e structure
    for (const auto& text : corpus_sq()) {
        RF phi = parse_sq(text);
        RF e = to_e(phi);
        auto vars = sorted_free(phi);
        for (const auto& m : structures) {
            LeStructure n = induced_le(m);
            for_each_assignment(vars, m.size(), [&](const std::vector<std::size_t>& v) {
                Assignment a;
                for (std::size_t i = 0; i < vars.size(); ++i) a[vars[i]] = v[i];
                CHECK_MESSAGE(eval_sq(phi, m, a) == eval_e(e, n, a), text);
                ++checked;
            });
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("prenex max-ANF preserves values") {
    std::mt19937_64 rng(3);
    for (const auto& text : corpus_e()) {
        RF psi = parse_e(text);
        RF back = anf_to_formula(prenex_max_anf(psi));
        auto vars = sorted_free(psi);
        for (int k = 0; k < 3; ++k) {
            LeStructure n = random_le(rng, 1 + k);
            for_each_assignment(vars, n.size(), [&](const std::vector<std::size_t>& v) {
                Assignment a;
                for (std::size_t i = 0; i < vars.size(); ++i) a[vars[i]] = v[i];
                CHECK_MESSAGE(eval_e(psi, n, a) == eval_e(back, n, a), text);
            });
        }
    }
}

TEST_CASE("McNaughton terms") {
    auto at = [](std::int64_t a, std::vector<std::int64_t> b, std::vector<Rational> xs) {
        std::vector<LF> args;
        for (std::size_t i = 0; i < b.size(); ++i) args.push_back(lf::ein("a" + std::to_string(i), "p"));
        LF t = mcnaughton(a, b, args);
        CHECK(is_pure(t));
        return eval_luk_prop(t, [&](const LNode& n) { return xs[std::stoul(n.x.substr(1))]; });
    };
    CHECK(at(0, {2}, {Rational(1, 2)}) == Rational(1));
    CHECK(at(0, {2}, {Rational(1, 3)}) == Rational(2, 3));
    CHECK(at(0, {1, -1}, {Rational(3, 5), Rational(1, 5)}) == Rational(2, 5));
    CHECK(at(0, {1, -1}, {Rational(1, 5), Rational(3, 5)}) == Rational(0));
    CHECK(at(-1, {1, 1}, {Rational(1), Rational(1)}) == Rational(1));
    CHECK(at(-1, {1, 1}, {Rational(1, 2), Rational(1, 4)}) == Rational(0));
    CHECK(at(3, {}, {}) == Rational(1));
    CHECK(at(-2, {}, {}) == Rational(0));
    for (auto [a, b] : std::vector<std::pair<std::int64_t, std::vector<std::int64_t>>>{
             {0, {2}}, {0, {1, -1}}, {-1, {1, 1}}, {1, {-3}}, {-2, {3, 2}}, {0, {6, -6}}, {2, {-1, -1, -1}}}) {
        ClampCertificate c = certify_mcnaughton(a, b, 1000, 11);
        CHECK(c.pass);
        CHECK(c.random_points == 1000);
        CHECK(c.counterexample.empty());
    }
}

TEST_CASE("compiled Lukasiewicz condition") {
    LukCondition c = to_luk_condition(parse_e("e(x,y) - 1/2"));
    CHECK(c.ell == 3);
    CHECK(c.scale == 6);
    LeStructure n(2, {Rational(1, 2), Rational(2, 3), Rational(0), Rational(1)});
    CHECK(eval_luk(c.psi, n, {{"x", 0}, {"y", 0}}) == Rational(0));
    CHECK(eval_luk(c.psi, n, {{"x", 0}, {"y", 1}}) == Rational(1));
    CHECK(eval_luk(expand(c.psi), n, {{"x", 0}, {"y", 1}}) == Rational(1));
    CHECK(is_pure(expand(c.psi)));

    std::mt19937_64 rng(5);
    for (const auto& text : corpus_e()) {
        RF f = parse_e(text);
        LukCondition lc = to_luk_condition(f);
        auto vars = sorted_free(f);
        for (std::size_t size = 1; size <= 2; ++size) {
            LeStructure m = random_le(rng, size);
            for_each_assignment(vars, size, [&](const std::vector<std::size_t>& v) {
                Assignment a;
                for (std::size_t i = 0; i < vars.size(); ++i) a[vars[i]] = v[i];
                CHECK_MESSAGE(eval_luk(lc.psi, m, a) == clamp01(Rational(lc.scale) * eval_e(f, m, a)), text);
            });
        }
    }
}

TEST_CASE("axioms") {
    std::mt19937_64 rng(9);
    for (int k = 0; k < 6; ++k) {
        MetricSetStructure m = random_exact_structure(rng, 1 + k % 4, k % 3);
        LeStructure n = induced_le(m);
        CHECK(eval_e(axiom_h_ext(), n, {}) == Rational(0));
        CHECK(eval_luk(luk_axiom_ext(), n, {}) == Rational(1));
    }
    LeStructure one(1, {Rational(1)});
    CHECK(eval_e(axiom_h_ext(), one, {}) == Rational(0));

    LF ex = luk_axiom_excision(lf::ein("x", "y"));
    CHECK(count_nodes(ex, LK::Neg) >= 6);
    // copies of the negated membership x in z
    std::size_t copies = 0;
    std::function<void(const LF&)> walk = [&](const LF& g) {
        if (!g) return;
        if (g->kind == LK::Neg && g->a->kind == LK::Ein && g->a->x == "x" && g->a->y == "z") ++copies;
        walk(g->a);
        walk(g->b);
        for (const auto& a : g->args) walk(a);
    };
    walk(ex);
    CHECK(copies == 6);
    CHECK_THROWS(luk_axiom_excision(lf::top()));
    CHECK_THROWS_AS(axiom_excision(parse_e("e(x,z)")), CaptureError);
}

TEST_CASE("named formulas") {
    // 0 = empty, 1 = {0}, 2 = {0,1}
    FinMetric d(3);
    d.set_sym(0, 1, Rational(1));
    d.set_sym(0, 2, Rational(1));
    d.set_sym(1, 2, Rational(1));
    MetricSetStructure m(d, {0, 1, 1, 0, 0, 1, 0, 0, 0});
    REQUIRE(m.exact());
    CHECK(eval_sq(schema_e(), m, {{"x", 0}, {"y", 1}}) == Rational(0));
    CHECK(eval_sq(schema_sigma(), m, {{"x", 1}, {"y", 2}}) == Rational(0));
    CHECK(eval_sq(schema_sigma(), m, {{"x", 2}, {"y", 1}}) == Rational(1));
    CHECK(eval_sq(schema_chn(), m, {{"x", 2}}) == Rational(0));
    CHECK(eval_sq(schema_russell(), m, {{"x", 2}}) == Rational(0));
    for (auto name : {"e", "sigma", "chn", "o", "phi_r", "E_r", "russell"}) CHECK(schema(name, Rational(1, 2)));
    CHECK_THROWS(schema("nope"));
}

TEST_CASE("discretized formulas") {
    // 0 = empty, 1 = {0}
    FinMetric d(2);
    d.set_sym(0, 1, Rational(1));
    MetricSetStructure m(d, {0, 1, 0, 0});
    DF f = parse_dis("exists x : a . forall y : a . ~ y in x");
    RF r = discretize(f, Rational(1));
    TE a = te::var("a");
    CHECK(eval_sq(r, m, {{witness_name(a), 1}}) == Rational(1));
    DF g = parse_dis("forall x : a . exists y : a . x in y");
    CHECK(eval_sq(discretize(g, Rational(1)), m, {{witness_name(a), 1}}) == Rational(0));
    DF h = parse_dis("x = y");
    CHECK(eval_sq(discretize(h, Rational(1, 2)), m, {{"x", 0}, {"y", 1}}) == Rational(0));
    CHECK(eval_sq(discretize(h, Rational(1, 2)), m, {{"x", 1}, {"y", 1}}) == Rational(1));
}
