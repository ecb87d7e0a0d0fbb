#include "mse/verification.hpp"

#include <algorithm>
#include <functional>

#include "mse/syntax.hpp"
#include "mse/translation.hpp"

namespace mse {

namespace {

template <class S>
std::vector<Rational> values_over(const S& m, const RF& phi, const std::string& x,
                                  const Assignment& params) {
    std::vector<std::string> order{x};
    std::vector<std::size_t> vals{0};
    for (const auto& v : free_vars(phi)) {
        if (v == x) continue;
        auto it = params.find(v);
        if (it == params.end()) throw std::invalid_argument("unbound variable: " + v);
        order.push_back(v);
        vals.push_back(it->second);
    }
    RealEvaluator ev(phi, m, order);
    std::vector<Rational> out;
    for (std::size_t c = 0; c < m.size(); ++c) {
        vals[0] = c;
        out.push_back(ev(vals));
    }
    return out;
}

}  // namespace

WitnessResult exc_search(const MetricSetStructure& m, const RF& phi, const std::string& x, const Assignment& params,
                         const Rational& r, const Rational& s) {
    if (!(r < s)) throw std::invalid_argument("exc_search needs r < s");
    const std::vector<Rational> val = values_over(m, phi, x, params);
    WitnessResult best;
    bool have = false;
    for (std::size_t b = 0; b < m.size(); ++b) {
        Rational res(0);
        bool ok = true;
        for (std::size_t c = 0; c < m.size(); ++c) {
            const bool in = m.mem(c, b);
            if (val[c] <= r && !in) {
                ok = false;
                res = rmax(res, pointset_dist(c, m.ext(b), m.metric()));
            }
            if (in && !(val[c] < s)) {
                ok = false;
                res = rmax(res, val[c] - s);
            }
        }
        if (ok) return WitnessResult{b, Rational(0), true};
        if (!have || res < best.residual) {
            best = WitnessResult{b, res, false};
            have = true;
        }
    }
    throw NoWitness("no element satisfies the excision contract", best);
}

WitnessResult exc_search(const LeStructure& n, const RF& phi, const std::string& x, const Assignment& params,
                         const Rational& r, const Rational& s, const Rational& slack) {
    if (!(r < s)) throw std::invalid_argument("exc_search needs r < s");
    if (slack.sign() < 0) throw std::invalid_argument("exc_search needs slack >= 0");
    if (!is_e(phi)) throw std::invalid_argument("exc_search on an L_e structure needs an e-formula");
    const std::vector<Rational> val = values_over(n, phi, x, params);
    WitnessResult best;
    bool have = false;
    for (std::size_t b = 0; b < n.size(); ++b) {
        Rational res(0);
        bool ok = true;
        for (std::size_t c = 0; c < n.size(); ++c) {
            const Rational& e = n.e(c, b);
            if (val[c] <= r && e > slack) {
                ok = false;
                res = rmax(res, e);
            }
            if (e.is_zero() && !(val[c] < s + slack)) {
                ok = false;
                res = rmax(res, val[c] - s);
            }
        }
        if (ok) return WitnessResult{b, res, true};
        if (!have || res < best.residual) {
            best = WitnessResult{b, res, false};
            have = true;
        }
    }
    throw NoWitness("no element satisfies the excision contract", best);
}

WitnessResult find_extension(const MetricSetStructure& m, const IndexSet& target) {
    WitnessResult best;
    bool have = false;
    for (std::size_t b = 0; b < m.size(); ++b) {
        Rational d = hausdorff(m.ext(b), target, m.metric());
        if (!have || d < best.residual) {
            best = WitnessResult{b, d, d.is_zero()};
            have = true;
            if (d.is_zero()) break;
        }
    }
    return best;
}

std::size_t wiener_pair(const MetricSetStructure& m, std::size_t a, std::size_t b) {
    auto exact = [&](const IndexSet& t) {
        WitnessResult w = find_extension(m, t);
        if (!w.satisfied) throw InsufficientDepth("wiener_pair: an intermediate extension is not realized exactly");
        return w.element;
    };
    const std::size_t empty = exact({});
    IndexSet first{exact({a}), empty};
    std::sort(first.begin(), first.end());
    const std::size_t f = exact(first);
    const std::size_t sb = exact({exact({b})});
    IndexSet top{f, sb};
    std::sort(top.begin(), top.end());
    return exact(top);
}

namespace {

// Nested finite set over base points; a leaf carries a point index.
struct Term {
    int point = -1;
    std::vector<Term> elems;
};

Rational term_dist(const Term& u, const Term& v, const FinMetric& base) {
    if (u.point >= 0 && v.point >= 0) return base(static_cast<std::size_t>(u.point), static_cast<std::size_t>(v.point));
    if (u.point >= 0 || v.point >= 0) throw std::logic_error("pair oracle compares a point with a set");
    // members of u first, then members of v; Hausdorff on that finite space
    const std::size_t n = u.elems.size() + v.elems.size();
    std::vector<const Term*> all;
    for (const auto& t : u.elems) all.push_back(&t);
    for (const auto& t : v.elems) all.push_back(&t);
    FinMetric local(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool ip = all[i]->point >= 0, jp = all[j]->point >= 0;
            local.set_sym(i, j, ip == jp ? term_dist(*all[i], *all[j], base) : Rational(1));
        }
    IndexSet a, b;
    for (std::size_t i = 0; i < u.elems.size(); ++i) a.push_back(i);
    for (std::size_t i = u.elems.size(); i < n; ++i) b.push_back(i);
    return hausdorff(a, b, local);
}

Term leaf(int p) { return Term{p, {}}; }
Term set_of(std::vector<Term> e) { return Term{-1, std::move(e)}; }

Term pair_term(int a, int b) {
    return set_of({set_of({set_of({leaf(a)}), set_of({})}), set_of({set_of({leaf(b)})})});
}

}  // namespace

PairLawResult wiener_pair_oracle(const FinMetric& base) {
    PairLawResult r;
    const int n = static_cast<int>(base.size());
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int f = 0; f < n; ++f) {
                    ++r.quadruples;
                    Rational lhs = term_dist(pair_term(a, b), pair_term(c, f), base);
                    Rational rhs = rmax(base(a, c), base(b, f));
                    if (lhs != rhs) ++r.failures;
                }
    return r;
}

RussellResult russell_gap(const MetricSetStructure& m, const Rational& r) {
    RF phi = schema_russell("x");
    WitnessResult w = exc_search(m, phi, "x", {}, r, Rational(1));
    RussellResult out;
    out.element = w.element;
    out.satisfied = w.satisfied;
    out.e_value = pointset_dist(w.element, m.ext(w.element), m.metric());
    out.phi_value = Rational(1) - out.e_value;
    return out;
}

RussellResult russell_gap(const LeStructure& n, const Rational& r, const Rational& slack) {
    RF phi = rf::sub(rf::one(), rf::e("x", "x"));
    WitnessResult w = exc_search(n, phi, "x", {}, r, Rational(1), slack);
    RussellResult out;
    out.element = w.element;
    out.satisfied = w.satisfied;
    out.e_value = n.e(w.element, w.element);
    out.phi_value = Rational(1) - out.e_value;
    return out;
}

std::vector<Rational> discreteness_spectrum(const MetricSetStructure& m) {
    std::vector<Rational> out;
    for (std::size_t x = 0; x < m.size(); ++x) {
        const auto& ex = m.ext(x);
        Rational best(1);
        for (std::size_t i = 0; i < ex.size(); ++i)
            for (std::size_t j = i + 1; j < ex.size(); ++j) best = rmin(best, m.metric()(ex[i], ex[j]));
        out.push_back(best);
    }
    return out;
}

std::vector<ChainRow> chain_report(const MetricSetStructure& m) {
    const std::size_t n = m.size();
    RealEvaluator chn(schema_chn("x"), m, {"x"});
    RealEvaluator sigma(schema_sigma("x", "y"), m, {"x", "y"});
    std::vector<Rational> sig(n * n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) sig[a * n + b] = sigma({a, b});
    const auto dis = discreteness_spectrum(m);
    std::vector<ChainRow> rows;
    for (std::size_t x = 0; x < n; ++x) {
        ChainRow row;
        row.chn = chn({x});
        row.chain = row.chn.sign() <= 0;  // empty members push sup below 0
        row.dis = dis[x];
        const auto& ex = m.ext(x);
        if (!row.chain) {
            row.well_ordered = false;
        } else if (ex.size() > 12) {
            row.well_ordered = true;  // finite chain
        } else {
            row.well_ordered = true;
            for (unsigned sub = 1; sub < (1u << ex.size()) && row.well_ordered; ++sub) {
                bool has_least = false;
                for (std::size_t i = 0; i < ex.size() && !has_least; ++i) {
                    if (!(sub >> i & 1)) continue;
                    bool least = true;
                    for (std::size_t j = 0; j < ex.size(); ++j)
                        if ((sub >> j & 1) && sig[ex[i] * n + ex[j]].sign() > 0) least = false;
                    has_least = least;
                }
                row.well_ordered = has_least;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------

FinMetric random_metric(std::mt19937_64& rng, std::size_t n, std::int64_t denominator) {
    FinMetric m(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            m.set_sym(i, j, Rational(1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(denominator)),
                                     denominator));
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (m(i, k) + m(k, j) < m(i, j)) m.set(i, j, m(i, k) + m(k, j));
    return m;
}

MetricSetStructure random_exact_structure(std::mt19937_64& rng, std::size_t size, std::size_t atoms) {
    if (size == 0) throw EmptyStructure();
    atoms = std::min(atoms, size);
    FinMetric base = random_metric(rng, atoms);
    std::vector<IndexSet> ext;
    std::vector<std::vector<Rational>> d;  // grows row by row
    for (std::size_t q = 0; q < atoms; ++q) {
        ext.push_back({q});
        std::vector<Rational> row;
        for (std::size_t p = 0; p < atoms; ++p) row.push_back(base(q, p));
        d.push_back(row);
    }
    for (auto& row : d) row.resize(atoms);
    auto current = [&]() {
        const std::size_t k = ext.size();
        FinMetric m(k);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) m.set(i, j, d[i][j]);
        return m;
    };
    std::size_t attempts = 0;
    while (ext.size() < size) {
        if (++attempts > 10000) throw std::runtime_error("random_exact_structure: could not grow structure");
        const std::size_t k = ext.size();
        IndexSet s;
        for (std::size_t i = 0; i < k; ++i)
            if (rng() % 2) s.push_back(i);
        FinMetric m = current();
        std::vector<Rational> row;
        bool fresh = true;
        for (std::size_t i = 0; i < k && fresh; ++i) {
            Rational v = hausdorff(s, ext[i], m);
            if (v.is_zero()) fresh = false;
            row.push_back(v);
        }
        if (!fresh) continue;
        for (std::size_t i = 0; i < k; ++i) d[i].push_back(row[i]);
        row.push_back(Rational(0));
        d.push_back(row);
        ext.push_back(s);
    }
    const std::size_t n = ext.size();
    std::vector<char> mem(n * n, 0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i : ext[j]) mem[i * n + j] = 1;
    return MetricSetStructure(current(), std::move(mem));
}

MetricSetStructure quine_cycle_structure(const Rational& t) {
    if (t.sign() <= 0 || t > Rational(1)) throw std::invalid_argument("quine_cycle_structure needs 0 < t <= 1");
    FinMetric d(4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) d.set_sym(i, j, Rational(1));
    d.set_sym(2, 3, t);
    // 0 = q = {q}, 1 = empty, 2 = {empty, 3}, 3 = {empty, 2}
    std::vector<char> mem(16, 0);
    mem[0 * 4 + 0] = 1;
    mem[1 * 4 + 2] = mem[3 * 4 + 2] = 1;
    mem[1 * 4 + 3] = mem[2 * 4 + 3] = 1;
    return MetricSetStructure(d, std::move(mem));
}

std::vector<std::string> corpus_sq() {
    return {
        "d(x,y)",
        "1",
        "e(x,y)",
        "d(x,y) + d(y,z)",
        "(-3) * max(1, d(x,y))",
        "sup z in x . d(z,y)",
        "inf z in y . d(x,z)",
        "sup u in x . inf w in y . d(u,w)",
        "1 - e(x,x)",
        "max(e(x,y), e(y,x))",
        "min(d(x,y), 1/2 - d(x,y))",
        "sup y . inf z in y . d(x,z)",
        "inf y . max(d(x,y), e(y,x))",
        "sup z in x . sup w in x . min(d(z,w), 1/2 - d(z,w))",
        "sup y in x . sup z in x . min(sup u in y . inf w in z . d(u,w), sup u in z . inf w in y . d(u,w))",
        "|d(x,y) - d(x,z)|",
        "2/3 * e(x,y) + 1/3 * e(y,z)",
        "sup z . min(e(z,x), 1 - e(z,y))",
        "inf z in x . sup w in z . d(w,y)",
        "max(min(2 - 3 * d(x,y), 1), 0)",
    };
}

std::vector<std::string> corpus_e() {
    return {
        "e(x,y)",
        "1",
        "e(x,y) + e(y,x)",
        "1 - e(x,x)",
        "sup z . |e(z,x) - e(z,y)|",
        "d_e(x,y)",
        "inf z . min(d_e(x,z) + 2 * e(z,y), 1)",
        "sup z . min(e(z,x), e(z,y))",
        "inf z . max(e(x,z), 1 - e(y,z))",
        "e(x,y) - 1/2",
        "max(e(x,y), e(y,z)) - min(e(x,z), 1/3)",
        "sup z . inf w . e(w,z) - e(x,z)",
        "(-2) * e(x,y) + e(y,y)",
        "min(e(x,x), e(y,y))",
        "sup x . e(x,y)",
        "inf y . sup z . |e(z,x) - e(z,y)|",
        "3/4 * e(x,z) + 1/4 * e(z,y)",
        "max(0, e(x,y) - e(y,x))",
        "inf z . e(z,x)",
        "sup z . sup w . min(e(z,w), e(w,z)) - e(x,y)",
    };
}

}  // namespace mse
