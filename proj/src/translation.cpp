#include "mse/translation.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <unordered_map>

#include "mse/syntax.hpp"

namespace mse {

namespace {

// Deterministic fresh names: base1, base2, ... skipping anything in use.
class Fresh {
public:
    explicit Fresh(std::set<std::string> used) : used_(std::move(used)) {}
    std::string next(const std::string& base) {
        while (true) {
            std::string s = base + std::to_string(++counter_);
            if (used_.insert(s).second) return s;
        }
    }

private:
    std::set<std::string> used_;
    int counter_ = 0;
};

std::string pick(const std::set<std::string>& avoid, const std::string& base) {
    if (!avoid.count(base)) return base;
    for (int i = 1;; ++i) {
        std::string s = base + std::to_string(i);
        if (!avoid.count(s)) return s;
    }
}

}  // namespace

// ---------------------------------------------------------------------------

RF to_sq(const RF& f) {
    Fresh fresh(all_vars(f));
    std::function<RF(const RF&)> go = [&](const RF& g) -> RF {
        switch (g->kind) {
            case RK::One: return g;
            case RK::E: {
                std::string w = fresh.next("w");
                return rf::inf_in(w, g->y, rf::dist(g->x, w));
            }
            case RK::Dist: throw std::invalid_argument("to_sq: input must be an e-formula");
            case RK::Sum: return rf::sum(go(g->a), go(g->b));
            case RK::Max: return rf::max(go(g->a), go(g->b));
            case RK::Min: return rf::min(go(g->a), go(g->b));
            case RK::Scale: return rf::scale(g->r, go(g->a));
            case RK::Sup: return rf::sup(g->x, go(g->a));
            case RK::Inf: return rf::inf(g->x, go(g->a));
            case RK::SupIn:
            case RK::InfIn: throw std::invalid_argument("to_sq: bounded quantifier in an e-formula");
        }
        return g;
    };
    return go(f);
}

RF to_e(const RF& f) {
    Fresh fresh(all_vars(f));
    std::function<RF(const RF&)> go = [&](const RF& g) -> RF {
        switch (g->kind) {
            case RK::One: return g;
            case RK::Dist: return rf::d_e(g->x, g->y, fresh.next("z"));
            case RK::E: throw std::invalid_argument("to_e: input must be a d-formula");
            case RK::Sum: return rf::sum(go(g->a), go(g->b));
            case RK::Max: return rf::max(go(g->a), go(g->b));
            case RK::Min: return rf::min(go(g->a), go(g->b));
            case RK::Scale: return rf::scale(g->r, go(g->a));
            case RK::Sup: return rf::sup(g->x, go(g->a));
            case RK::Inf: return rf::inf(g->x, go(g->a));
            case RK::InfIn:
            case RK::SupIn: {
                const Rational v = v_of(g->a);
                RF body = go(g->a);
                if (g->kind == RK::SupIn) body = rf::neg(body);
                RF inner = rf::inf(g->x, rf::min(rf::sum(body, rf::scale(Rational(2) * v, rf::e(g->x, g->y))),
                                                 rf::constant(v)));
                return g->kind == RK::SupIn ? rf::neg(inner) : inner;
            }
        }
        return g;
    };
    return go(f);
}

// ---------------------------------------------------------------------------

namespace {

using Atom = std::pair<std::string, std::string>;

struct Lit {
    Rational a;
    std::map<Atom, Rational> t;
    bool operator==(const Lit&) const = default;
};
using Group = std::vector<Lit>;
using Matrix = std::vector<Group>;

constexpr std::size_t kAnfLimit = 200000;

Lit add(const Lit& p, const Lit& q) {
    Lit r = p;
    r.a += q.a;
    for (const auto& [k, v] : q.t) {
        Rational s = r.t[k] + v;
        if (s.is_zero()) r.t.erase(k);
        else r.t[k] = s;
    }
    return r;
}

Lit scaled(const Lit& p, const Rational& c) {
    Lit r;
    r.a = p.a * c;
    if (!c.is_zero())
        for (const auto& [k, v] : p.t) r.t[k] = v * c;
    return r;
}

void dedupe(Group& g) {
    Group out;
    for (auto& l : g)
        if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(std::move(l));
    g.swap(out);
}

void dedupe(Matrix& m) {
    for (auto& g : m) dedupe(g);
    Matrix out;
    for (auto& g : m)
        if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(std::move(g));
    m.swap(out);
}

void guard(std::size_t n) {
    if (n > kAnfLimit) throw std::length_error("prenex_max_anf: normal form too large");
}

struct Norm {
    std::vector<std::pair<bool, std::string>> prefix;
    Matrix m;
};

Norm normalize(const RF& g) {
    switch (g->kind) {
        case RK::One: return {{}, {{Lit{Rational(1), {}}}}};
        case RK::E: return {{}, {{Lit{Rational(0), {{{g->x, g->y}, Rational(1)}}}}}};
        case RK::Dist:
        case RK::SupIn:
        case RK::InfIn: throw std::invalid_argument("prenex_max_anf: input must be a restricted e-formula");
        case RK::Sup:
        case RK::Inf: {
            Norm n = normalize(g->a);
            n.prefix.insert(n.prefix.begin(), {g->kind == RK::Sup, g->x});
            return n;
        }
        case RK::Scale: {
            Norm n = normalize(g->a);
            if (g->r.sign() >= 0) {
                for (auto& grp : n.m)
                    for (auto& l : grp) l = scaled(l, g->r);
                dedupe(n.m);
                return n;
            }
            for (auto& p : n.prefix) p.first = !p.first;
            // -(max_i min_j L) = max over choices (j_i) of min_i (-L_{i,j_i})
            Matrix out{Group{}};
            for (const auto& grp : n.m) {
                Matrix next;
                guard(out.size() * grp.size());
                for (const auto& partial : out)
                    for (const auto& l : grp) {
                        Group ext = partial;
                        ext.push_back(scaled(l, g->r));
                        next.push_back(std::move(ext));
                    }
                out.swap(next);
                dedupe(out);
            }
            n.m = std::move(out);
            return n;
        }
        case RK::Sum:
        case RK::Max:
        case RK::Min: {
            Norm a = normalize(g->a), b = normalize(g->b);
            Norm r;
            r.prefix = a.prefix;
            r.prefix.insert(r.prefix.end(), b.prefix.begin(), b.prefix.end());
            if (g->kind == RK::Max) {
                r.m = a.m;
                r.m.insert(r.m.end(), b.m.begin(), b.m.end());
            } else {
                guard(a.m.size() * b.m.size());
                for (const auto& ga : a.m)
                    for (const auto& gb : b.m) {
                        Group grp;
                        if (g->kind == RK::Min) {
                            grp = ga;
                            grp.insert(grp.end(), gb.begin(), gb.end());
                        } else {
                            guard(ga.size() * gb.size());
                            for (const auto& la : ga)
                                for (const auto& lb : gb) grp.push_back(add(la, lb));
                        }
                        r.m.push_back(std::move(grp));
                    }
            }
            dedupe(r.m);
            return r;
        }
    }
    return {};
}

// Renames every binder to a distinct fresh name so quantifiers can be pulled out.
RF rename_binders(const RF& f) {
    Fresh fresh(all_vars(f));
    std::function<RF(const RF&, const std::map<std::string, std::string>&)> go =
        [&](const RF& g, const std::map<std::string, std::string>& env) -> RF {
        auto nm = [&](const std::string& v) {
            auto it = env.find(v);
            return it == env.end() ? v : it->second;
        };
        switch (g->kind) {
            case RK::One: return g;
            case RK::E: return rf::e(nm(g->x), nm(g->y));
            case RK::Dist: return rf::dist(nm(g->x), nm(g->y));
            case RK::Sum: return rf::sum(go(g->a, env), go(g->b, env));
            case RK::Max: return rf::max(go(g->a, env), go(g->b, env));
            case RK::Min: return rf::min(go(g->a, env), go(g->b, env));
            case RK::Scale: return rf::scale(g->r, go(g->a, env));
            case RK::Sup:
            case RK::Inf:
            case RK::SupIn:
            case RK::InfIn: {
                auto inner = env;
                std::string b = fresh.next("q");
                inner[g->x] = b;
                RF body = go(g->a, inner);
                switch (g->kind) {
                    case RK::Sup: return rf::sup(b, body);
                    case RK::Inf: return rf::inf(b, body);
                    case RK::SupIn: return rf::sup_in(b, nm(g->y), body);
                    default: return rf::inf_in(b, nm(g->y), body);
                }
            }
        }
        return g;
    };
    return go(f, {});
}

AnfLiteral to_public(const Lit& l) {
    AnfLiteral out{l.a, {}};
    for (const auto& [k, v] : l.t) out.terms.push_back({v, k});
    return out;
}

RF literal_formula(const AnfLiteral& l) {
    RF f = rf::constant(l.a);
    for (const auto& [b, at] : l.terms) f = rf::sum(f, rf::scale(b, rf::e(at.first, at.second)));
    return f;
}

}  // namespace

MaxAnf prenex_max_anf(const RF& f) {
    Norm n = normalize(rename_binders(f));
    MaxAnf out;
    out.prefix = n.prefix;
    for (const auto& g : n.m) {
        std::vector<AnfLiteral> grp;
        for (const auto& l : g) grp.push_back(to_public(l));
        out.groups.push_back(std::move(grp));
    }
    return out;
}

RF anf_to_formula(const MaxAnf& m) {
    RF mat;
    for (const auto& g : m.groups) {
        RF gm;
        for (const auto& l : g) gm = gm ? rf::min(gm, literal_formula(l)) : literal_formula(l);
        mat = mat ? rf::max(mat, gm) : gm;
    }
    for (auto it = m.prefix.rbegin(); it != m.prefix.rend(); ++it)
        mat = it->first ? rf::sup(it->second, mat) : rf::inf(it->second, mat);
    return mat;
}

std::string anf_to_text(const MaxAnf& m) {
    std::string s = "prefix:";
    for (const auto& [sup, v] : m.prefix) s += std::string(" ") + (sup ? "sup " : "inf ") + v;
    s += "\nmatrix: max of " + std::to_string(m.groups.size()) + " groups\n";
    for (std::size_t i = 0; i < m.groups.size(); ++i) {
        s += "  min {";
        for (std::size_t j = 0; j < m.groups[i].size(); ++j) {
            const auto& l = m.groups[i][j];
            s += (j ? "; " : " ") + l.a.str();
            for (const auto& [b, at] : l.terms) s += " + " + b.str() + "*e(" + at.first + "," + at.second + ")";
        }
        s += " }\n";
    }
    return s;
}

// ---------------------------------------------------------------------------

namespace {
LF pneg(const LF& a) { return lf::implies(a, lf::bot()); }
LF poplus(const LF& a, const LF& b) { return lf::implies(pneg(a), b); }
LF pstrong(const LF& a, const LF& b) { return pneg(lf::implies(a, pneg(b))); }
LF ptop() { return lf::implies(lf::bot(), lf::bot()); }
}  // namespace

LF mcnaughton(std::int64_t a, const std::vector<std::int64_t>& b, const std::vector<LF>& args) {
    if (b.size() != args.size()) throw std::invalid_argument("mcnaughton: coefficient/argument count mismatch");
    std::vector<LF> negs;
    for (const auto& x : args) negs.push_back(pneg(x));
    const LF top = ptop(), bot = lf::bot();
    std::map<std::vector<std::int64_t>, LF> memo;
    // state = (c, b_0, ..., b_{n-1}); clamp(g + x) = (clamp(g) (+) x) (*) clamp(g + 1)
    std::function<LF(std::vector<std::int64_t>)> build = [&](std::vector<std::int64_t> st) -> LF {
        if (auto it = memo.find(st); it != memo.end()) return it->second;
        std::int64_t lo = st[0], hi = st[0];
        std::size_t first = 0;
        for (std::size_t i = 1; i < st.size(); ++i) {
            lo += std::min<std::int64_t>(st[i], 0);
            hi += std::max<std::int64_t>(st[i], 0);
            if (!first && st[i] != 0) first = i;
        }
        LF out;
        if (lo >= 1) out = top;
        else if (hi <= 0) out = bot;
        else {
            std::vector<std::int64_t> rest = st;
            LF x;
            if (st[first] > 0) {
                rest[first] -= 1;
                x = args[first - 1];
            } else {
                rest[first] += 1;
                rest[0] -= 1;
                x = negs[first - 1];
            }
            std::vector<std::int64_t> up = rest;
            up[0] += 1;
            out = pstrong(poplus(build(rest), x), build(up));
        }
        memo.emplace(std::move(st), out);
        return out;
    };
    std::vector<std::int64_t> st{a};
    st.insert(st.end(), b.begin(), b.end());
    return build(st);
}

ClampCertificate certify_mcnaughton(std::int64_t a, const std::vector<std::int64_t>& b, std::size_t random_points,
                                    std::uint64_t seed) {
    const std::size_t n = b.size();
    std::vector<LF> args;
    for (std::size_t i = 0; i < n; ++i) args.push_back(lf::ein("a" + std::to_string(i), "p"));
    LF term = mcnaughton(a, b, args);
    std::int64_t total = std::abs(a) + 1;
    for (auto c : b) total += std::abs(c);
    ClampCertificate cert;
    cert.grid_denominator = 2 * total;
    std::vector<Rational> pt(n);
    auto check = [&]() {
        Rational lin(a);
        for (std::size_t i = 0; i < n; ++i) lin += Rational(b[i]) * pt[i];
        Rational got = eval_luk_prop(term, [&](const LNode& at) {
            return pt[static_cast<std::size_t>(std::stoul(at.x.substr(1)))];
        });
        if (got != clamp01(lin) && cert.pass) {
            cert.pass = false;
            cert.counterexample = pt;
        }
    };
    const std::int64_t D = cert.grid_denominator;
    std::vector<std::int64_t> idx(n, 0);
    while (true) {
        for (std::size_t i = 0; i < n; ++i) pt[i] = Rational(idx[i], D);
        check();
        ++cert.grid_points;
        std::size_t k = 0;
        while (k < n && ++idx[k] > D) idx[k++] = 0;
        if (k == n) break;
    }
    std::mt19937_64 rng(seed);
    for (std::size_t r = 0; r < random_points; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            std::int64_t den = 1 + static_cast<std::int64_t>(rng() % 97);
            pt[i] = Rational(static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(den + 1)), den);
        }
        check();
        ++cert.random_points;
    }
    return cert;
}

LF expand(const LF& f) {
    std::unordered_map<const LNode*, LF> memo;
    std::function<LF(const LF&)> go = [&](const LF& g) -> LF {
        if (auto it = memo.find(g.get()); it != memo.end()) return it->second;
        LF out;
        switch (g->kind) {
            case LK::Bot:
            case LK::Ein: out = g; break;
            case LK::Implies: out = lf::implies(go(g->a), go(g->b)); break;
            case LK::Exists: out = lf::exists(g->x, go(g->a)); break;
            case LK::Forall: out = lf::forall(g->x, go(g->a)); break;
            case LK::Neg: out = pneg(go(g->a)); break;
            case LK::Strong: out = pstrong(go(g->a), go(g->b)); break;
            case LK::Or: {
                LF a = go(g->a), b = go(g->b);
                out = lf::implies(lf::implies(a, b), b);
                break;
            }
            case LK::And: {
                LF na = pneg(go(g->a)), nb = pneg(go(g->b));
                out = pneg(lf::implies(lf::implies(na, nb), nb));
                break;
            }
            case LK::Iff: {
                LF a = go(g->a), b = go(g->b);
                out = pstrong(lf::implies(a, b), lf::implies(b, a));
                break;
            }
            case LK::EqE: {
                std::string z = pick({g->x, g->y}, "z");
                LF a = lf::ein(z, g->x), b = lf::ein(z, g->y);
                out = lf::forall(z, pstrong(lf::implies(a, b), lf::implies(b, a)));
                break;
            }
            case LK::Clamp: {
                std::vector<LF> args;
                for (const auto& x : g->args) args.push_back(go(x));
                out = mcnaughton(g->c0, g->coeffs, args);
                break;
            }
        }
        memo.emplace(g.get(), out);
        return out;
    };
    return go(f);
}

LukCondition to_luk_condition(const RF& f) {
    LukCondition out;
    out.anf = prenex_max_anf(f);
    std::int64_t maxden = 1;
    for (const auto& g : out.anf.groups)
        for (const auto& l : g) {
            maxden = std::max(maxden, l.a.den());
            for (const auto& t : l.terms) maxden = std::max(maxden, t.first.den());
        }
    out.ell = maxden + 1;
    if (out.ell > 20) throw std::overflow_error("to_luk_condition: ell! exceeds 64-bit range");
    out.scale = 1;
    for (std::int64_t i = 2; i <= out.ell; ++i) out.scale *= i;
    const Rational L(out.scale);
    // e = 1 - (x in y): a + sum b e = (a + sum b) - sum b (x in y)
    LF mat;
    for (const auto& g : out.anf.groups) {
        LF gm;
        for (const auto& l : g) {
            Rational c0 = l.a;
            std::vector<std::int64_t> co;
            std::vector<LF> args;
            for (const auto& [b, at] : l.terms) {
                c0 += b;
                Rational k = -(L * b);
                co.push_back(k.num());
                args.push_back(lf::ein(at.first, at.second));
            }
            Rational k0 = L * c0;
            LF c = lf::clamp(k0.num(), co, args);
            gm = gm ? lf::land(gm, c) : c;
        }
        mat = mat ? lf::lor(mat, gm) : gm;
    }
    for (auto it = out.anf.prefix.rbegin(); it != out.anf.prefix.rend(); ++it)
        mat = it->first ? lf::exists(it->second, mat) : lf::forall(it->second, mat);
    out.psi = mat;
    return out;
}

// ---------------------------------------------------------------------------

RF axiom_h_ext() {
    RF inner = rf::inf("z", rf::min(rf::sum(rf::d_e("x", "z", "w"), rf::scale(Rational(2), rf::e("z", "y"))), rf::one()));
    return rf::sup("x", rf::sup("y", rf::absval(rf::sub(rf::e("x", "y"), inner))));
}

RF axiom_excision(const RF& f, const std::string& x, const std::string& z) {
    auto fv = free_vars(f);
    if (fv.count(z)) throw CaptureError("excision: variable " + z + " is free in the formula");
    if (x == z) throw CaptureError("excision: x and z must differ");
    const Rational eps = epsilon_phi(f);
    RF exz = rf::e(x, z);
    RF body = rf::max(rf::min(exz, rf::neg(f)), rf::min(rf::sub(rf::constant(eps), exz), rf::sub(f, rf::one())));
    RF out = rf::inf(z, rf::sup(x, body));
    fv.erase(x);
    for (auto it = fv.rbegin(); it != fv.rend(); ++it) out = rf::sup(*it, out);
    return out;
}

LF luk_axiom_ext() {
    LF inner = lf::exists("z", lf::strong(lf::strong(lf::eqe("x", "z"), lf::ein("z", "y")), lf::ein("z", "y")));
    return lf::forall("x", lf::forall("y", lf::iff(lf::ein("x", "y"), inner)));
}

LF luk_axiom_excision(const LF& f, const std::string& x, const std::string& z) {
    auto fv = free_vars(f);
    if (fv.count(z)) throw CaptureError("excision: variable " + z + " is free in the formula");
    if (x == z) throw CaptureError("excision: x and z must differ");
    const std::size_t k = count_e(f);
    if (k == 0) throw std::invalid_argument("excision: formula has no membership atoms (constant); refused");
    LF nf = lf::neg(f);
    LF negs3 = lf::strong(lf::strong(nf, nf), nf);
    LF pos3 = lf::strong(lf::strong(f, f), f);
    LF nxz = lf::neg(lf::ein(x, z));
    LF rep = nxz;
    for (std::size_t i = 1; i < 6 * k; ++i) rep = lf::strong(rep, nxz);
    LF body = lf::land(lf::lor(lf::ein(x, z), negs3), lf::lor(rep, pos3));
    LF out = lf::exists(z, lf::forall(x, body));
    fv.erase(x);
    for (auto it = fv.rbegin(); it != fv.rend(); ++it) out = lf::forall(*it, out);
    return out;
}

// ---------------------------------------------------------------------------

RF schema_e(const std::string& x, const std::string& y) {
    std::string w = pick({x, y}, "w");
    return rf::inf_in(w, y, rf::dist(x, w));
}

RF schema_sigma(const std::string& x, const std::string& y) {
    std::string u = pick({x, y}, "u");
    return rf::sup_in(u, x, schema_e(u, y));
}

RF schema_chn(const std::string& x) {
    std::string y = pick({x}, "y");
    std::string z = pick({x, y}, "z");
    return rf::sup_in(y, x, rf::sup_in(z, x, rf::min(schema_sigma(y, z), schema_sigma(z, y))));
}

RF schema_o(const std::string& x, const std::string& y) {
    std::string z = pick({x, y}, "z");
    std::string w = pick({x, y, z}, "w");
    return rf::sup_in(z, x, rf::sup_in(w, y, schema_sigma(z, w)));
}

RF schema_phi_r(const Rational& r, const std::string& x) {
    std::string z = pick({x}, "z");
    std::string y = pick({x, z}, "y");
    RF d = rf::dist(y, z);
    return rf::sup_in(z, x, rf::sup_in(y, x, rf::min(d, rf::sub(rf::constant(r), d))));
}

RF schema_E_r(const Rational& r, const std::string& x, const std::string& y) {
    if (r.sign() <= 0) throw std::invalid_argument("E_r needs r > 0");
    RF lin = rf::scale(Rational(1) / r, rf::sub(rf::constant(Rational(2) * r), rf::scale(Rational(3), rf::dist(x, y))));
    return rf::max(rf::min(lin, rf::one()), rf::constant(Rational(0)));
}

RF schema_russell(const std::string& x) { return rf::sub(rf::one(), schema_e(x, x)); }

RF schema(const std::string& name, const Rational& r) {
    if (name == "e") return schema_e();
    if (name == "sigma") return schema_sigma();
    if (name == "chn") return schema_chn();
    if (name == "o") return schema_o();
    if (name == "phi_r") return schema_phi_r(r);
    if (name == "E_r") return schema_E_r(r);
    if (name == "russell") return schema_russell();
    throw std::invalid_argument("unknown schema: " + name);
}

// ---------------------------------------------------------------------------

namespace {

void dis_names(const DF& f, std::set<std::string>& out) {
    if (!f) return;
    for (const auto* s : {&f->x, &f->y, &f->z})
        if (!s->empty()) out.insert(*s);
    if (f->type) out.insert(witness_name(f->type));
    dis_names(f->a, out);
    dis_names(f->b, out);
}

struct Term {
    std::string var;  // leaf when non-empty
    std::vector<Term> elems;
};

RF term_dist(const Term& t, const std::string& z, Fresh& fresh) {
    if (!t.var.empty()) return rf::dist(t.var, z);
    std::string m = fresh.next("m");
    if (t.elems.empty()) return rf::max(rf::sup_in(m, z, rf::one()), rf::constant(Rational(0)));
    RF forward, backward;
    for (const auto& el : t.elems) {
        RF f = rf::min(rf::inf_in(m, z, term_dist(el, m, fresh)), rf::one());
        forward = forward ? rf::max(forward, f) : f;
        RF b = term_dist(el, m, fresh);
        backward = backward ? rf::min(backward, b) : b;
    }
    return rf::max(forward, rf::max(rf::sup_in(m, z, backward), rf::constant(Rational(0))));
}

RF near_one(const RF& dist, const Rational& eps) {
    return rf::max(rf::sub(rf::one(), rf::scale(Rational(1) / eps, dist)), rf::constant(Rational(0)));
}

}  // namespace

RF discretize(const DF& f, const Rational& eps) {
    if (eps.sign() <= 0) throw std::invalid_argument("discretize: eps must be positive");
    std::set<std::string> names;
    dis_names(f, names);
    Fresh fresh(names);
    std::function<RF(const DF&)> go = [&](const DF& g) -> RF {
        const RF one = rf::one();
        switch (g->kind) {
            case DK::Eq: return near_one(rf::dist(g->x, g->y), eps);
            case DK::MemIn: {
                std::string w = fresh.next("w");
                return near_one(rf::inf_in(w, g->y, rf::dist(g->x, w)), eps);
            }
            case DK::PairEq: {
                // <x,y> = {{{x}, 0}, {{y}}}
                Term x{g->x, {}}, y{g->y, {}};
                Term pair{"", {Term{"", {Term{"", {x}}, Term{"", {}}}}, Term{"", {Term{"", {y}}}}}};
                return near_one(term_dist(pair, g->z, fresh), eps);
            }
            case DK::And: return rf::min(go(g->a), go(g->b));
            case DK::Not: return rf::sub(one, go(g->a));
            case DK::Or: return rf::sub(one, rf::min(rf::sub(one, go(g->a)), rf::sub(one, go(g->b))));
            case DK::Implies: return rf::sub(one, rf::min(go(g->a), rf::sub(one, go(g->b))));
            case DK::Exists: return rf::sup_in(g->x, witness_name(g->type), go(g->a));
            case DK::Forall:
                return rf::sub(one, rf::sup_in(g->x, witness_name(g->type), rf::sub(one, go(g->a))));
        }
        return one;
    };
    return go(f);
}

}  // namespace mse
