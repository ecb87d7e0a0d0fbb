#include "mse/tree_models.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "mse/formula.hpp"
#include "mse/syntax.hpp"
#include "mse/translation.hpp"

namespace mse {

std::string predicted_count(std::size_t atoms, std::size_t k) {
    std::uint64_t val = 1;
    bool fits = true;
    std::string txt = "1";
    for (std::size_t i = 1; i <= k; ++i) {
        if (fits && atoms + val < 63) {
            val = std::uint64_t(1) << (atoms + val);
            txt = std::to_string(val);
        } else {
            std::string e = fits ? std::to_string(atoms + val) : (atoms ? std::to_string(atoms) + "+" + txt : txt);
            fits = false;
            txt = "2^(" + e + ")";
        }
    }
    return txt;
}

// ---------------------------------------------------------------------------

std::size_t Gauge::last_positive() const {
    std::size_t b = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s[i].sign() > 0) b = i;
    return b;
}

bool Gauge::smooth() const { return s.size() >= 2 && s[0] == s[1] && s.back().is_zero(); }

Gauge make_gauge(std::vector<Rational> s) {
    if (s.empty()) throw std::invalid_argument("gauge: empty");
    if (s[0] != Rational(1)) throw std::invalid_argument("gauge: s(0) must be 1");
    Gauge g;
    g.eps = Rational(0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i].sign() < 0 || s[i] > Rational(1)) throw std::invalid_argument("gauge: values must lie in [0,1]");
        if (i > 0) {
            if (s[i] > s[i - 1]) throw std::invalid_argument("gauge: must be non-increasing");
            g.eps = rmax(g.eps, s[i - 1] - s[i]);
        }
    }
    g.s = std::move(s);
    return g;
}

Gauge pseudo_finite_gauge(int n, std::size_t h) {
    if (n < 1) throw std::invalid_argument("pseudo_finite_gauge: n >= 1");
    if (h < static_cast<std::size_t>(n) + 2)
        throw HeightError("pseudo_finite_gauge: height " + std::to_string(h) + " < n + 2");
    std::vector<Rational> s;
    for (std::size_t i = 0; i <= h; ++i)
        s.push_back(clamp01(Rational(1) - Rational(static_cast<std::int64_t>(i) - 1, n)));
    return make_gauge(s);
}

Gauge parse_gauge(const std::string& text) {
    if (text.rfind("sn:", 0) == 0) {
        std::string rest = text.substr(3);
        auto colon = rest.find(':');
        int n = std::stoi(rest.substr(0, colon));
        std::size_t h = colon == std::string::npos ? static_cast<std::size_t>(n) + 2 : std::stoul(rest.substr(colon + 1));
        return pseudo_finite_gauge(n, h);
    }
    std::vector<Rational> s;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw std::invalid_argument("gauge: empty entry");
        s.push_back(Rational::parse(item.substr(b, e - b + 1)));
    }
    return make_gauge(s);
}

std::string gauge_text(const Gauge& g) {
    std::string out;
    for (std::size_t i = 0; i < g.s.size(); ++i) out += (i ? "," : "") + g.s[i].str();
    return out;
}

// ---------------------------------------------------------------------------

TreeLevels::TreeLevels(std::size_t atoms, std::size_t height, std::uint64_t cap) : atoms_(atoms), height_(height) {
    counts_.push_back(1);
    trunc_.resize(height + 1);
    pre_.resize(height + 1);
    for (std::size_t k = 1; k <= height; ++k) {
        const std::uint64_t bits = atoms + counts_[k - 1];
        if (bits > 40 || (std::uint64_t(1) << bits) > cap)
            throw CapExceeded("level " + std::to_string(k) + " of the tree universe exceeds the cap",
                              predicted_count(atoms, k));
        const std::uint64_t n = std::uint64_t(1) << bits;
        counts_.push_back(n);
        auto& tr = trunc_[k];
        tr.resize(n);
        for (std::uint64_t id = 0; id < n; ++id) {
            if (k == 1) {
                tr[id] = 0;
                continue;
            }
            std::uint64_t out = qmask(id);
            for (std::uint64_t ch = chmask(id); ch; ch &= ch - 1)
                out |= std::uint64_t(1) << (atoms + trunc_[k - 1][std::countr_zero(ch)]);
            tr[id] = out;
        }
        pre_[k].assign(counts_[k - 1], {});
        for (std::uint64_t id = 0; id < n; ++id) pre_[k][tr[id]].push_back(id);
    }
}

std::uint64_t TreeLevels::trunc(std::size_t k, std::uint64_t id) const {
    if (k == 0 || k > height_) throw std::out_of_range("trunc: level out of range");
    return trunc_[k].at(id);
}

const std::vector<std::uint64_t>& TreeLevels::preimages(std::size_t k, std::uint64_t d) const {
    if (k == 0 || k > height_) throw std::out_of_range("preimages: level out of range");
    return pre_[k].at(d);
}

// ---------------------------------------------------------------------------

TreeUniverse::TreeUniverse(FinMetric q, std::size_t h, std::uint64_t cap)
    : q_(std::move(q)), levels_(q_.size(), h, cap) {
    if (q_.size() > 16) throw std::invalid_argument("tree universe: at most 16 atoms");
    if (q_.size() + levels_.count(h) > cap)
        throw CapExceeded("tree universe exceeds the cap", predicted_count(q_.size(), h));
}

TreeUniverse enumerate_universe(const FinMetric& q, std::size_t h, std::uint64_t cap) { return TreeUniverse(q, h, cap); }

bool TreeUniverse::mem(std::size_t x, std::size_t y) const {
    if (is_atom(y)) return x == y;
    const std::uint64_t yid = node_id(y);
    if (is_atom(x)) return levels_.qmask(yid) >> x & 1;
    if (height() == 0) return false;
    return levels_.chmask(yid) >> trunc_node(node_id(x)) & 1;
}

IndexSet TreeUniverse::members(std::size_t y) const {
    if (is_atom(y)) return {y};
    IndexSet out;
    const std::uint64_t yid = node_id(y);
    for (std::uint64_t m = levels_.qmask(yid); m; m &= m - 1) out.push_back(std::countr_zero(m));
    if (height() == 0) return out;
    for (std::uint64_t ch = levels_.chmask(yid); ch; ch &= ch - 1)
        for (std::uint64_t w : levels_.preimages(height(), std::countr_zero(ch))) out.push_back(element_of_node(w));
    return out;
}

IndexSet TreeUniverse::tc(std::size_t x) const {
    std::vector<char> seen(size(), 0);
    IndexSet todo = members(x), out;
    while (!todo.empty()) {
        std::size_t z = todo.back();
        todo.pop_back();
        if (seen[z]) continue;
        seen[z] = 1;
        out.push_back(z);
        for (std::size_t w : members(z))
            if (!seen[w]) todo.push_back(w);
    }
    std::sort(out.begin(), out.end());
    return out;
}

void TreeUniverse::require_explicit() const {
    if (size() > kExplicitLimit)
        throw CapExceeded("explicit rho tables need at most " + std::to_string(kExplicitLimit) + " elements",
                          std::to_string(size()));
}

const std::vector<Rational>& TreeUniverse::rho_table(std::size_t beta) const {
    require_explicit();
    const std::size_t n = size();
    if (members_.empty())
        for (std::size_t y = 0; y < n; ++y) members_.push_back(members(y));
    while (rho_.size() <= beta) {
        std::vector<Rational> t(n * n);
        if (rho_.empty()) {
            std::vector<IndexSet> atoms_in(n);
            for (std::size_t x = 0; x < n; ++x)
                for (std::size_t z : tc(x))
                    if (is_atom(z)) atoms_in[x].push_back(z);
            for (std::size_t x = 0; x < n; ++x)
                for (std::size_t y = 0; y < n; ++y) t[x * n + y] = hausdorff(atoms_in[x], atoms_in[y], q_);
        } else {
            const auto& prev = rho_.back();
            std::vector<Rational> e(n * n);
            for (std::size_t z = 0; z < n; ++z)
                for (std::size_t y = 0; y < n; ++y) {
                    Rational best(1);
                    for (std::size_t w : members_[y]) best = rmin(best, prev[z * n + w]);
                    e[z * n + y] = best;
                }
            for (std::size_t x = 0; x < n; ++x)
                for (std::size_t y = 0; y < n; ++y) {
                    Rational v(0);
                    for (std::size_t z : members_[x]) v = rmax(v, e[z * n + y]);
                    for (std::size_t w : members_[y]) v = rmax(v, e[w * n + x]);
                    t[x * n + y] = v;
                }
        }
        rho_.push_back(std::move(t));
    }
    return rho_[beta];
}

Rational TreeUniverse::rho(std::size_t beta, std::size_t x, std::size_t y) const {
    return rho_table(beta)[x * size() + y];
}

Rational TreeUniverse::e_beta(std::size_t beta, std::size_t x, std::size_t y) const {
    const auto& t = rho_table(beta);
    Rational best(1);
    for (std::size_t w : members_[y]) best = rmin(best, t[x * size() + w]);
    return best;
}

Rational TreeUniverse::rho_s(std::size_t x, std::size_t y, const Gauge& s) const {
    if (s.height() != height()) throw std::invalid_argument("rho_s: gauge length does not match the height");
    Rational v(0);
    for (std::size_t b = 0; b <= s.height(); ++b) v = rmax(v, rmin(rho(b, x, y), s.s[b]));
    return v;
}

Rational TreeUniverse::e_s(std::size_t x, std::size_t y, const Gauge& s) const {
    rho_table(0);
    Rational best(1);
    for (std::size_t w : members_[y]) best = rmin(best, rho_s(x, w, s));
    return best;
}

namespace {

std::uint64_t level_code(const std::vector<std::vector<std::size_t>>& sets, std::size_t a, std::size_t k,
                         std::size_t atoms) {
    if (k == 0) return 0;
    std::uint64_t out = 0;
    for (std::size_t b : sets[a]) out |= std::uint64_t(1) << (atoms + level_code(sets, b, k - 1, atoms));
    return out;
}

}  // namespace

std::size_t v_sigma(std::size_t sigma, const TreeUniverse& u) {
    if (sigma + 1 >= u.height())
        throw HeightError("v_sigma: height " + std::to_string(u.height()) + " too small for sigma " +
                          std::to_string(sigma));
    HfPool pool;
    std::size_t v = pool.v(sigma);
    std::vector<std::vector<std::size_t>> sets;
    for (std::size_t i = 0; i < pool.size(); ++i) sets.push_back(pool.members(i));
    return u.element_of_node(level_code(sets, v, u.height(), u.atoms()));
}

ExplicitQuotient explicit_quotient(const TreeUniverse& u, const Gauge& s) {
    const std::size_t n = u.size();
    std::vector<Rational> e(n * n);
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) e[x * n + y] = u.e_s(x, y, s);
    std::map<std::vector<Rational>, std::size_t> seen;
    ExplicitQuotient q{LeStructure(1, {Rational(0)}), {}, {}};
    for (std::size_t x = 0; x < n; ++x) {
        std::vector<Rational> prof;
        for (std::size_t z = 0; z < n; ++z) prof.push_back(e[x * n + z]);
        for (std::size_t z = 0; z < n; ++z) prof.push_back(e[z * n + x]);
        auto [it, fresh] = seen.emplace(prof, q.representative.size());
        if (fresh) q.representative.push_back(x);
        q.class_of.push_back(it->second);
    }
    const std::size_t k = q.representative.size();
    std::vector<Rational> le(k * k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) le[i * k + j] = e[q.representative[i] * n + q.representative[j]];
    q.le = LeStructure(k, le);
    return q;
}

// ---------------------------------------------------------------------------
// Families of subsets of {0..M-1}, as dense bitsets over 2^M.

namespace {

constexpr unsigned kMaxFamilyBits = 22;

struct Fam {
    unsigned M = 0;
    std::vector<std::uint64_t> w;
    bool operator==(const Fam& o) const { return M == o.M && w == o.w; }
};

struct FamHash {
    std::size_t operator()(const Fam& f) const {
        std::size_t h = f.M;
        for (auto x : f.w) h = h * 1000003u ^ std::hash<std::uint64_t>{}(x);
        return h;
    }
};

Fam fam_new(unsigned M) {
    if (M > kMaxFamilyBits) throw CapExceeded("type family too large", "2^" + std::to_string(M));
    return Fam{M, std::vector<std::uint64_t>(M >= 6 ? (std::size_t(1) << (M - 6)) : 1, 0)};
}
inline bool fam_test(const Fam& f, std::uint64_t s) { return f.w[s >> 6] >> (s & 63) & 1; }
inline void fam_set(Fam& f, std::uint64_t s) { f.w[s >> 6] |= std::uint64_t(1) << (s & 63); }

template <class F>
void fam_each(const Fam& f, F&& fn) {
    for (std::size_t i = 0; i < f.w.size(); ++i)
        for (std::uint64_t x = f.w[i]; x; x &= x - 1) fn(static_cast<std::uint64_t>(i * 64 + std::countr_zero(x)));
}

std::size_t fam_count(const Fam& f) {
    std::size_t c = 0;
    for (auto x : f.w) c += std::popcount(x);
    return c;
}

// nonempty unions of members of `sets`
Fam union_closure(const std::vector<std::uint64_t>& sets, unsigned M) {
    Fam out = fam_new(M);
    if (sets.empty()) return out;
    const std::size_t N = std::size_t(1) << M;
    std::vector<std::uint32_t> U(N, 0);
    std::vector<std::uint8_t> has(N, 0);
    for (auto s : sets) {
        has[s] = 1;
        U[s] |= static_cast<std::uint32_t>(s);
    }
    for (unsigned i = 0; i < M; ++i) {
        const std::size_t b = std::size_t(1) << i;
        for (std::size_t S = 0; S < N; ++S)
            if (S & b) {
                U[S] |= U[S ^ b];
                has[S] |= has[S ^ b];
            }
    }
    for (std::size_t S = 0; S < N; ++S)
        if (has[S] && U[S] == S) fam_set(out, S);
    return out;
}

// {a | b : a in A, b in B}
Fam or_product(const Fam& A, const Fam& B) {
    const unsigned M = A.M;
    Fam out = fam_new(M);
    const std::size_t ca = fam_count(A), cb = fam_count(B);
    if (!ca || !cb) return out;
    const std::size_t N = std::size_t(1) << M;
    if (ca * cb <= 3 * M * N + 64) {
        std::vector<std::uint64_t> as, bs;
        fam_each(A, [&](std::uint64_t a) { as.push_back(a); });
        fam_each(B, [&](std::uint64_t b) { bs.push_back(b); });
        for (auto a : as)
            for (auto b : bs) fam_set(out, a | b);
        return out;
    }
    std::vector<std::int64_t> fa(N, 0), fb(N, 0);
    fam_each(A, [&](std::uint64_t a) { fa[a] = 1; });
    fam_each(B, [&](std::uint64_t b) { fb[b] = 1; });
    for (unsigned i = 0; i < M; ++i) {
        const std::size_t b = std::size_t(1) << i;
        for (std::size_t S = 0; S < N; ++S)
            if (S & b) {
                fa[S] += fa[S ^ b];
                fb[S] += fb[S ^ b];
            }
    }
    for (std::size_t S = 0; S < N; ++S) fa[S] *= fb[S];
    for (unsigned i = 0; i < M; ++i) {
        const std::size_t b = std::size_t(1) << i;
        for (std::size_t S = 0; S < N; ++S)
            if (S & b) fa[S] -= fa[S ^ b];
    }
    for (std::size_t S = 0; S < N; ++S)
        if (fa[S]) fam_set(out, S);
    return out;
}

Fam shift(const Fam& F, std::uint64_t m) {
    Fam out = fam_new(F.M);
    fam_each(F, [&](std::uint64_t s) { fam_set(out, s | m); });
    return out;
}

Rational set_hausdorff(std::uint64_t a, std::uint64_t b, const std::function<Rational(std::size_t, std::size_t)>& d) {
    if (!a && !b) return Rational(0);
    if (!a || !b) return Rational(1);
    Rational h(0);
    for (std::uint64_t x = a; x; x &= x - 1) {
        Rational best(1);
        for (std::uint64_t y = b; y; y &= y - 1) best = rmin(best, d(std::countr_zero(x), std::countr_zero(y)));
        h = rmax(h, best);
    }
    for (std::uint64_t y = b; y; y &= y - 1) {
        Rational best(1);
        for (std::uint64_t x = a; x; x &= x - 1) best = rmin(best, d(std::countr_zero(x), std::countr_zero(y)));
        h = rmax(h, best);
    }
    return h;
}

}  // namespace

struct QuotientModel::Impl {
    FinMetric qd;
    std::size_t nq = 0, h = 0, B = 0;
    Gauge s;
    std::unique_ptr<TreeLevels> lv;
    std::uint64_t L = 0, D = 0;

    // rank r: realized types as masks over rank-(r-1) ids (over atoms for r = 0)
    std::vector<std::vector<std::uint64_t>> types;
    std::vector<std::unordered_map<std::uint64_t, std::uint32_t>> ids;
    std::vector<std::vector<std::uint32_t>> proj;  // rank r -> r-1, r >= 1
    std::vector<std::vector<std::uint32_t>> atom_id;  // [r][q]
    std::vector<std::uint64_t> xtop;  // X_B(c) as masks over rank-B ids, when they fit
    std::vector<Fam> et_pool;         // distinct ET_B families
    std::vector<std::uint32_t> et_of;  // c -> index into et_pool

    bool enumerated = false;
    std::vector<std::uint64_t> classes;
    mutable std::vector<std::int64_t> class_proj;

    mutable std::vector<std::unordered_map<std::uint64_t, Rational>> rho_memo;
    mutable std::unordered_map<std::uint64_t, Rational> rhos_memo;

    std::uint32_t lookup(std::size_t r, std::uint64_t mask) const {
        auto it = ids[r].find(mask);
        if (it == ids[r].end()) throw std::logic_error("type of rank " + std::to_string(r) + " not realized");
        return it->second;
    }

    // rank-r type (mask over rank-(r-1) ids) -> id of its rank-(r-1) projection
    std::uint32_t project(std::size_t r, std::uint64_t mask) const {
        std::uint64_t out = 0;
        if (r == 1) {
            for (std::uint64_t m = mask; m; m &= m - 1) out |= types[0][std::countr_zero(m)];
        } else {
            for (std::uint64_t m = mask; m; m &= m - 1) out |= std::uint64_t(1) << proj[r - 1][std::countr_zero(m)];
        }
        return lookup(r - 1, out);
    }

    Rational rho(std::size_t r, std::uint32_t i, std::uint32_t j) const {
        if (i == j) return Rational(0);
        if (i > j) std::swap(i, j);
        const std::uint64_t key = (std::uint64_t(i) << 32) | j;
        auto& memo = rho_memo[r];
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        Rational v;
        if (r == 0) {
            IndexSet a, b;
            for (std::uint64_t m = types[0][i]; m; m &= m - 1) a.push_back(std::countr_zero(m));
            for (std::uint64_t m = types[0][j]; m; m &= m - 1) b.push_back(std::countr_zero(m));
            v = hausdorff(a, b, qd);
        } else {
            v = set_hausdorff(types[r][i], types[r][j],
                              [&](std::size_t x, std::size_t y) { return rho(r - 1, x, y); });
        }
        memo.emplace(key, v);
        return v;
    }

    Rational rho_s(std::uint32_t u, std::uint32_t v) const {
        if (u == v) return Rational(0);
        const std::uint64_t key = (std::uint64_t(std::min(u, v)) << 32) | std::max(u, v);
        if (auto it = rhos_memo.find(key); it != rhos_memo.end()) return it->second;
        Rational out(0);
        std::uint32_t a = u, b = v;
        for (std::size_t beta = B + 1; beta-- > 0;) {
            out = rmax(out, rmin(rho(beta, a, b), s.s[beta]));
            if (beta > 0) {
                a = proj[beta][a];
                b = proj[beta][b];
            }
        }
        rhos_memo.emplace(key, out);
        return out;
    }

    std::uint32_t class_projection(std::size_t i) const {
        if (class_proj[i] < 0) class_proj[i] = project(B + 1, classes[i]);
        return static_cast<std::uint32_t>(class_proj[i]);
    }

    std::size_t class_index(std::uint64_t mask) const {
        auto it = std::lower_bound(classes.begin(), classes.end(), mask);
        if (it == classes.end() || *it != mask) throw std::logic_error("class not realized");
        return static_cast<std::size_t>(it - classes.begin());
    }

    void build(std::uint64_t cap);
};

void QuotientModel::Impl::build(std::uint64_t cap) {
    if (h < 2) throw HeightError("quotient_model: height must be at least 2");
    if (s.height() != h) throw std::invalid_argument("quotient_model: gauge length does not match the height");
    if (nq > 16) throw std::invalid_argument("quotient_model: at most 16 atoms");
    B = s.last_positive();
    lv = std::make_unique<TreeLevels>(nq, h - 1, cap);
    L = lv->count(h - 1);
    D = lv->count(h - 2);
    if (D > 24) throw CapExceeded("quotient_model: layer h-2 too wide", std::to_string(D));

    // union of tc-atoms over all realizations of c; least fixpoint
    std::vector<std::uint64_t> bu(L);
    for (std::uint64_t c = 0; c < L; ++c) bu[c] = lv->qmask(c);
    for (bool changed = true; changed;) {
        changed = false;
        std::vector<std::uint64_t> ud(D, 0);
        for (std::uint64_t c = 0; c < L; ++c) ud[lv->trunc(h - 1, c)] |= bu[c];
        for (std::uint64_t c = 0; c < L; ++c) {
            std::uint64_t v = bu[c];
            for (std::uint64_t ch = lv->chmask(c); ch; ch &= ch - 1) v |= ud[std::countr_zero(ch)];
            if (v != bu[c]) {
                bu[c] = v;
                changed = true;
            }
        }
    }

    std::vector<std::uint64_t> xprev = bu;  // members of ET_{r-1}(c) as a mask over rank-(r-1) ids
    std::vector<std::uint32_t> aprev(nq);
    for (std::size_t q = 0; q < nq; ++q) aprev[q] = static_cast<std::uint32_t>(q);
    unsigned Mprev = static_cast<unsigned>(nq);

    types.assign(B + 1, {});
    ids.assign(B + 1, {});
    proj.assign(B + 1, {});
    atom_id.assign(B + 1, std::vector<std::uint32_t>(nq));
    rho_memo.assign(B + 1, {});

    for (std::size_t r = 0; r <= B; ++r) {
        if (Mprev > kMaxFamilyBits)
            throw CapExceeded("quotient_model: rank " + std::to_string(r) + " families too large",
                              "2^" + std::to_string(Mprev));
        std::vector<Fam> cl(D);
        for (std::uint64_t d = 0; d < D; ++d) {
            std::vector<std::uint64_t> sets;
            for (std::uint64_t c : lv->preimages(h - 1, d)) sets.push_back(xprev[c]);
            std::sort(sets.begin(), sets.end());
            sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
            cl[d] = union_closure(sets, Mprev);
        }
        std::vector<Fam> pool;
        std::unordered_map<Fam, std::uint32_t, FamHash> pool_index;
        auto intern = [&](Fam f) {
            auto [it, fresh] = pool_index.emplace(f, static_cast<std::uint32_t>(pool.size()));
            if (fresh) pool.push_back(std::move(f));
            return it->second;
        };
        std::vector<std::int32_t> pmemo(std::size_t(1) << D, -1);
        {
            Fam unit = fam_new(Mprev);
            fam_set(unit, 0);
            pmemo[0] = static_cast<std::int32_t>(intern(unit));
        }
        std::function<std::uint32_t(std::uint64_t)> product = [&](std::uint64_t ch) -> std::uint32_t {
            if (pmemo[ch] >= 0) return static_cast<std::uint32_t>(pmemo[ch]);
            const unsigned top = 63 - std::countl_zero(ch);
            const std::uint32_t rest = product(ch ^ (std::uint64_t(1) << top));
            Fam f = or_product(pool[rest], cl[top]);
            const std::uint32_t id = intern(std::move(f));
            pmemo[ch] = static_cast<std::int32_t>(id);
            return id;
        };
        std::vector<std::uint32_t> et(L);
        std::map<std::pair<std::uint32_t, std::uint64_t>, std::uint32_t> shifted;
        for (std::uint64_t c = 0; c < L; ++c) {
            std::uint64_t a = 0;
            for (std::uint64_t m = lv->qmask(c); m; m &= m - 1) a |= std::uint64_t(1) << aprev[std::countr_zero(m)];
            const std::uint32_t p = product(lv->chmask(c));
            auto key = std::make_pair(p, a);
            auto it = shifted.find(key);
            if (it == shifted.end()) it = shifted.emplace(key, intern(shift(pool[p], a))).first;
            et[c] = it->second;
        }

        // realized rank-r types
        Fam realized = fam_new(Mprev);
        std::vector<char> used(pool.size(), 0);
        for (auto id : et) used[id] = 1;
        for (std::size_t i = 0; i < pool.size(); ++i)
            if (used[i])
                for (std::size_t k = 0; k < realized.w.size(); ++k) realized.w[k] |= pool[i].w[k];
        for (std::size_t q = 0; q < nq; ++q) fam_set(realized, std::uint64_t(1) << aprev[q]);
        fam_each(realized, [&](std::uint64_t t) {
            ids[r].emplace(t, static_cast<std::uint32_t>(types[r].size()));
            types[r].push_back(t);
        });
        for (std::size_t q = 0; q < nq; ++q) atom_id[r][q] = lookup(r, std::uint64_t(1) << aprev[q]);
        if (r >= 1) {
            proj[r].resize(types[r].size());
            for (std::size_t i = 0; i < types[r].size(); ++i) proj[r][i] = project(r, types[r][i]);
        }
        const std::size_t Mr = types[r].size();

        std::vector<std::uint64_t> xr;
        if (Mr <= 64) {
            std::vector<std::uint64_t> per(pool.size(), 0);
            std::vector<char> done(pool.size(), 0);
            xr.resize(L);
            for (std::uint64_t c = 0; c < L; ++c) {
                const auto id = et[c];
                if (!done[id]) {
                    std::uint64_t m = 0;
                    fam_each(pool[id], [&](std::uint64_t t) { m |= std::uint64_t(1) << lookup(r, t); });
                    per[id] = m;
                    done[id] = 1;
                }
                xr[c] = per[id];
            }
        } else if (r < B) {
            throw CapExceeded("quotient_model: too many rank-" + std::to_string(r) + " types", std::to_string(Mr));
        }

        if (r == B) {
            // keep the distinct ET_B families for the atom checks
            std::map<std::uint32_t, std::uint32_t> remap;
            for (std::uint64_t c = 0; c < L; ++c) {
                auto [it, fresh] = remap.emplace(et[c], static_cast<std::uint32_t>(et_pool.size()));
                if (fresh) et_pool.push_back(pool[et[c]]);
                et_of.push_back(it->second);
            }
            xtop = std::move(xr);
        } else {
            xprev = std::move(xr);
            for (std::size_t q = 0; q < nq; ++q) aprev[q] = atom_id[r][q];
            Mprev = static_cast<unsigned>(Mr);
        }
    }

    // classes: rank-(B+1) types of nodes and atoms
    const std::size_t MB = types[B].size();
    if (MB <= kMaxFamilyBits && !xtop.empty()) {
        std::vector<std::uint64_t> sets(xtop);
        std::sort(sets.begin(), sets.end());
        sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
        Fam cl = union_closure(sets, static_cast<unsigned>(MB));
        fam_set(cl, 0);
        Fam all = fam_new(static_cast<unsigned>(MB));
        for (std::uint64_t qm = 0; qm < (std::uint64_t(1) << nq); ++qm) {
            std::uint64_t a = 0;
            for (std::uint64_t m = qm; m; m &= m - 1) a |= std::uint64_t(1) << atom_id[B][std::countr_zero(m)];
            Fam sh = shift(cl, a);
            for (std::size_t k = 0; k < all.w.size(); ++k) all.w[k] |= sh.w[k];
        }
        for (std::size_t q = 0; q < nq; ++q) fam_set(all, std::uint64_t(1) << atom_id[B][q]);
        fam_each(all, [&](std::uint64_t t) { classes.push_back(t); });
        class_proj.assign(classes.size(), -1);
        enumerated = true;
    }
}

QuotientModel::QuotientModel(const FinMetric& q, std::size_t h, const Gauge& s, std::uint64_t cap)
    : impl_(std::make_unique<Impl>()) {
    impl_->qd = q;
    impl_->nq = q.size();
    impl_->h = h;
    impl_->s = s;
    impl_->build(cap);
}
QuotientModel::~QuotientModel() = default;
QuotientModel::QuotientModel(QuotientModel&&) noexcept = default;
QuotientModel& QuotientModel::operator=(QuotientModel&&) noexcept = default;

QuotientModel quotient_model(const FinMetric& q, std::size_t h, const Gauge& s, std::uint64_t cap) {
    return QuotientModel(q, h, s, cap);
}

const Gauge& QuotientModel::gauge() const { return impl_->s; }
std::size_t QuotientModel::height() const { return impl_->h; }
std::size_t QuotientModel::top_rank() const { return impl_->B + 1; }
std::size_t QuotientModel::type_count(std::size_t r) const { return impl_->types.at(r).size(); }
bool QuotientModel::enumerated() const { return impl_->enumerated; }

std::size_t QuotientModel::size() const {
    if (!impl_->enumerated)
        throw CapExceeded("class set not enumerated",
                          "subsets of " + std::to_string(impl_->types[impl_->B].size()) + " types");
    return impl_->classes.size();
}

Rational QuotientModel::e(std::size_t i, std::size_t j) const {
    size();
    const std::uint64_t y = impl_->classes.at(j);
    if (!y) return Rational(1);
    const std::uint32_t px = impl_->class_projection(i);
    Rational best(1);
    for (std::uint64_t m = y; m; m &= m - 1) {
        best = rmin(best, impl_->rho_s(px, static_cast<std::uint32_t>(std::countr_zero(m))));
        if (best.is_zero()) break;
    }
    return best;
}

Rational QuotientModel::rho_s(std::size_t i, std::size_t j) const {
    size();
    return impl_->rho_s(impl_->class_projection(i), impl_->class_projection(j));
}

std::vector<std::size_t> QuotientModel::atom_classes() const {
    std::vector<std::size_t> out;
    for (std::size_t q = 0; q < impl_->nq; ++q)
        out.push_back(impl_->class_index(std::uint64_t(1) << impl_->atom_id[impl_->B][q]));
    return out;
}

std::string QuotientModel::class_label(std::size_t i) const {
    std::function<std::string(std::size_t, std::uint64_t)> label = [&](std::size_t r, std::uint64_t mask) {
        std::string out = r == 0 ? "[" : "{";
        bool first = true;
        for (std::uint64_t m = mask; m; m &= m - 1) {
            const std::size_t k = std::countr_zero(m);
            out += first ? "" : ",";
            first = false;
            out += r == 0 ? "q" + std::to_string(k) : label(r - 1, impl_->types[r - 1][k]);
        }
        return out + (r == 0 ? "]" : "}");
    };
    size();
    return label(impl_->B + 1, impl_->classes.at(i));
}

LeStructure QuotientModel::le(std::size_t limit) const {
    const std::size_t n = size();
    if (n > limit) throw CapExceeded("quotient model too large to materialize", std::to_string(n));
    std::vector<Rational> e;
    e.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) e.push_back(this->e(i, j));
    return LeStructure(n, e);
}

std::size_t QuotientModel::class_of(const TreeUniverse& u, std::size_t x) const {
    const auto& I = *impl_;
    if (u.height() != I.h || u.atoms() != I.nq) throw std::invalid_argument("class_of: universe does not match");
    const std::size_t n = u.size();
    std::vector<std::vector<std::int64_t>> memo(I.B + 1, std::vector<std::int64_t>(n, -1));
    std::vector<IndexSet> mem(n);
    std::vector<char> have(n, 0);
    auto members = [&](std::size_t y) -> const IndexSet& {
        if (!have[y]) {
            mem[y] = u.members(y);
            have[y] = 1;
        }
        return mem[y];
    };
    std::function<std::uint32_t(std::size_t, std::size_t)> type = [&](std::size_t r, std::size_t y) -> std::uint32_t {
        if (memo[r][y] >= 0) return static_cast<std::uint32_t>(memo[r][y]);
        std::uint64_t mask = 0;
        if (r == 0) {
            for (std::size_t z : u.tc(y))
                if (u.is_atom(z)) mask |= std::uint64_t(1) << z;
        } else {
            for (std::size_t z : members(y)) mask |= std::uint64_t(1) << type(r - 1, z);
        }
        const std::uint32_t id = I.lookup(r, mask);
        memo[r][y] = id;
        return id;
    };
    std::uint64_t top = 0;
    for (std::size_t z : members(x)) top |= std::uint64_t(1) << type(I.B, z);
    size();
    return I.class_index(top);
}

QuineReport QuotientModel::quine_atoms_check() const {
    const auto& I = *impl_;
    QuineReport rep;
    rep.eps = I.s.eps;
    if (I.nq == 0) throw std::invalid_argument("quine_atoms_check: Q is empty");
    if (I.B == 0 || I.s.s[1] != Rational(1)) throw std::invalid_argument("quine_atoms_check: needs s(1) = 1");
    bool pass = true;
    for (std::size_t q = 0; q < I.nq; ++q) {
        const std::uint32_t qb = I.atom_id[I.B][q], qprev = I.atom_id[I.B - 1][q];
        bool ok = true;
        for (const Fam& f : I.et_pool) {
            bool inside = true, only_q = true;
            fam_each(f, [&](std::uint64_t t) {
                const std::uint32_t id = I.lookup(I.B, t);
                if (I.proj[I.B][id] != qprev) inside = false;
                if (id != qb) only_q = false;
            });
            if (inside && !only_q) ok = false;
        }
        QuineRow row{q, ok, I.rho_s(qb, qb)};
        pass = pass && ok && row.e_self.is_zero();
        rep.atoms.push_back(row);
    }
    const std::size_t MB = I.types[I.B].size();
    for (std::size_t a = 0; a < I.nq; ++a)
        for (std::size_t b = a + 1; b < I.nq; ++b) {
            QuinePair p;
            p.a = a;
            p.b = b;
            p.d = I.qd(a, b);
            p.d_e = Rational(0);
            const std::uint32_t qa = I.atom_id[I.B][a], qb = I.atom_id[I.B][b];
            for (std::uint32_t u = 0; u < MB; ++u) p.d_e = rmax(p.d_e, abs(I.rho_s(u, qa) - I.rho_s(u, qb)));
            p.gap = abs(p.d_e - p.d);
            pass = pass && p.gap <= rep.eps;
            rep.pairs.push_back(p);
        }
    if (I.enumerated && I.classes.size() <= 4096) {
        rep.enumerated = true;
        const std::size_t n = I.classes.size();
        auto ac = atom_classes();
        for (std::size_t k = 0; k < ac.size(); ++k) {
            bool single = e(ac[k], ac[k]).is_zero();
            for (std::size_t x = 0; x < n; ++x)
                if (x != ac[k] && e(x, ac[k]).is_zero()) single = false;
            if (single != rep.atoms[k].self_singleton) pass = false;
        }
        for (auto& p : rep.pairs) {
            Rational de(0);
            for (std::size_t z = 0; z < n; ++z) de = rmax(de, abs(e(z, ac[p.a]) - e(z, ac[p.b])));
            if (de != p.d_e) pass = false;
        }
    }
    rep.pass = pass;
    return rep;
}

QuineReport quine_atoms_check(const FinMetric& q, std::size_t h, const Gauge& s, std::uint64_t cap) {
    return QuotientModel(q, h, s, cap).quine_atoms_check();
}

// ---------------------------------------------------------------------------

std::vector<std::string> certificate_corpus() {
    return {"e(x,y)", "1 - e(x,x)", "e(x,y) + e(y,x)", to_text(to_e(schema_chn("x")))};
}

AxiomReport certify(const LeStructure& n, const Gauge& s, const std::vector<std::string>& e_corpus, std::uint64_t seed) {
    return certify(n, s.eps, e_corpus, seed);
}

AxiomReport certify(const LeStructure& n, const Rational& eps, const std::vector<std::string>& e_corpus,
                    std::uint64_t seed) {
    if (eps.sign() < 0) throw std::invalid_argument("certify: eps must be >= 0");
    AxiomReport rep;
    rep.eps = eps;
    rep.hext_defect = eval_e(axiom_h_ext(), n, {});
    bool pass = rep.hext_defect <= rep.eps;
    std::mt19937_64 rng(seed);
    for (const auto& text : e_corpus) {
        RF f = parse_e(text);
        ExcisionRow row;
        row.formula = text;
        row.v = v_of(f);
        row.bound = Rational(2) * row.v * rep.eps;
        RF ax = axiom_excision(f, "x", "z");
        if (n.size() <= 64) {
            row.mode = "exhaustive";
            row.value = eval_e(ax, n, {});
        } else {
            row.mode = "sampled";
            std::vector<std::string> outer;
            RF inner = ax;
            while (inner->kind == RK::Sup && inner->x != "x") {
                outer.push_back(inner->x);
                inner = inner->a;
            }
            row.value = Rational(-1000000);
            for (int k = 0; k < 16; ++k) {
                Assignment a;
                for (auto& v : outer) a[v] = rng() % n.size();
                row.value = rmax(row.value, eval_e(inner, n, a));
                if (outer.empty()) break;
            }
        }
        pass = pass && row.value <= row.bound;
        rep.excision.push_back(row);
    }
    rep.pass = pass;
    return rep;
}

std::string certificate_json(const AxiomReport& r, const Gauge& s) {
    nlohmann::json j;
    j["gauge"] = gauge_text(s);
    j["eps"] = r.eps.str();
    j["hext_defect"] = r.hext_defect.str();
    j["pass"] = r.pass;
    j["excision_defects"] = nlohmann::json::array();
    for (const auto& row : r.excision)
        j["excision_defects"].push_back({{"formula", row.formula},
                                         {"v", row.v.str()},
                                         {"bound", row.bound.str()},
                                         {"value", row.value.str()},
                                         {"mode", row.mode}});
    return j.dump(2);
}

// ---------------------------------------------------------------------------

HfPool::HfPool() {
    sets_.push_back({});
    index_.emplace(std::vector<std::size_t>{}, 0);
}

std::size_t HfPool::make(std::vector<std::size_t> members) {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    for (auto m : members)
        if (m >= sets_.size()) throw std::out_of_range("HfPool: unknown member");
    auto [it, fresh] = index_.emplace(members, sets_.size());
    if (fresh) sets_.push_back(members);
    return it->second;
}

std::size_t HfPool::power(std::size_t a) {
    const auto base = sets_.at(a);
    if (base.size() > 20) throw CapExceeded("power set too large", "2^" + std::to_string(base.size()));
    std::vector<std::size_t> subsets;
    for (std::uint64_t m = 0; m < (std::uint64_t(1) << base.size()); ++m) {
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < base.size(); ++i)
            if (m >> i & 1) s.push_back(base[i]);
        subsets.push_back(make(s));
    }
    return make(subsets);
}

std::size_t HfPool::v(std::size_t sigma) {
    std::size_t a = empty();
    for (std::size_t i = 0; i < sigma; ++i) a = power(a);
    return a;
}

std::size_t HfPool::code(std::size_t a, std::size_t k) {
    if (k == 0) return 0;
    auto key = std::make_pair(a, k);
    if (auto it = code_memo_.find(key); it != code_memo_.end()) return it->second;
    std::vector<std::size_t> kids;
    for (auto b : std::vector<std::size_t>(sets_.at(a))) kids.push_back(code(b, k - 1));
    std::sort(kids.begin(), kids.end());
    kids.erase(std::unique(kids.begin(), kids.end()), kids.end());
    if (level_index_.size() <= k) {
        level_index_.resize(k + 1);
        level_sets_.resize(k + 1);
    }
    auto [it, fresh] = level_index_[k].emplace(kids, level_sets_[k].size());
    if (fresh) level_sets_[k].push_back(kids);
    code_memo_.emplace(key, it->second);
    return it->second;
}

std::size_t HfPool::code_width(std::size_t a, std::size_t k) {
    if (k == 0) return 0;
    const std::size_t c = code(a, k);
    return level_sets_.at(k).at(c).size();
}

MetricSetStructure hf_substructure(HfPool& pool, const std::vector<std::size_t>& sets, std::size_t h, const Gauge& s) {
    if (s.height() != h) throw std::invalid_argument("hf_substructure: gauge length does not match the height");
    if (h == 0) throw HeightError("hf_substructure: height must be positive");
    const std::size_t n = sets.size();
    if (n == 0) throw EmptyStructure();
    FinMetric d(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Rational v(0);
            for (std::size_t b = 0; b <= h; ++b)
                if (pool.code(sets[i], b) != pool.code(sets[j], b)) {
                    v = s.s[b];
                    break;
                }
            d.set(i, j, v);
        }
    std::vector<char> mem(n * n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<std::size_t> kids;
        for (auto c : pool.members(sets[j])) kids.push_back(pool.code(c, h - 1));
        for (std::size_t i = 0; i < n; ++i)
            mem[i * n + j] = std::find(kids.begin(), kids.end(), pool.code(sets[i], h - 1)) != kids.end();
    }
    return MetricSetStructure(d, std::move(mem));
}

}  // namespace mse
