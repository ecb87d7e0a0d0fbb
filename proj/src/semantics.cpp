#include "mse/semantics.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>

#include <json.hpp>

namespace mse {

MetricSetStructure::MetricSetStructure(FinMetric d, std::vector<char> mem)
    : d_(std::move(d)), mem_(std::move(mem)) {
    const std::size_t n = d_.size();
    if (n == 0) throw EmptyStructure();
    if (mem_.size() != n * n) throw std::invalid_argument("membership matrix has wrong size");
    ext_.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
            if (mem_[i * n + j]) ext_[j].push_back(i);
    hext_ = Rational(0);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            Rational gap = abs(d_(a, b) - hausdorff(ext_[a], ext_[b], d_));
            if (hext_ < gap) hext_ = gap;
        }
}

LeStructure::LeStructure(std::size_t n, std::vector<Rational> e) : n_(n), e_(std::move(e)) {
    if (n == 0) throw EmptyStructure();
    if (e_.size() != n * n) throw std::invalid_argument("e matrix has wrong size");
    for (const auto& v : e_)
        if (v < Rational(0) || Rational(1) < v) throw std::invalid_argument("e entries must lie in [0,1]");
}

void for_each_assignment(const std::vector<std::string>& vars, std::size_t n,
                         const std::function<void(const std::vector<std::size_t>&)>& fn) {
    if (n == 0) throw EmptyStructure();
    std::vector<std::size_t> v(vars.size(), 0);
    while (true) {
        fn(v);
        std::size_t k = 0;
        while (k < v.size() && ++v[k] == n) v[k++] = 0;
        if (k == v.size()) return;
    }
}

namespace {

constexpr std::size_t kMemoLimit = std::size_t(1) << 20;

// Slot-compiled formula shared by the real and Lukasiewicz evaluators.
struct CNode {
    int kind = 0;
    int x = -1, y = -1;
    Rational r;
    int a = -1, b = -1;
    std::int64_t c0 = 0;
    std::vector<std::int64_t> coeffs;
    std::vector<int> args;
    std::vector<int> free;  // slots this node reads
    bool memo = false;
    std::unordered_map<std::uint64_t, Rational> table;
};

struct SlotMap {
    std::map<std::string, int> slot;
    int get(const std::string& v) {
        auto it = slot.find(v);
        if (it != slot.end()) return it->second;
        int s = static_cast<int>(slot.size());
        slot.emplace(v, s);
        return s;
    }
};

void merge_into(std::vector<int>& dst, const std::vector<int>& src) {
    std::vector<int> out;
    std::set_union(dst.begin(), dst.end(), src.begin(), src.end(), std::back_inserter(out));
    dst.swap(out);
}

void drop(std::vector<int>& v, int s) { v.erase(std::remove(v.begin(), v.end(), s), v.end()); }

void insert_slot(std::vector<int>& v, int s) {
    auto it = std::lower_bound(v.begin(), v.end(), s);
    if (it == v.end() || *it != s) v.insert(it, s);
}

bool key_fits(std::size_t n, std::size_t k) {
    unsigned __int128 p = 1;
    for (std::size_t i = 0; i < k; ++i) {
        p *= n;
        if (p >> 62) return false;
    }
    return true;
}

std::uint64_t memo_key(const CNode& c, const std::vector<std::size_t>& val, std::size_t n) {
    std::uint64_t k = 0;
    for (int s : c.free) k = k * n + val[static_cast<std::size_t>(s)];
    return k;
}

}  // namespace

// ---------------------------------------------------------------------------

struct RealEvaluator::Impl {
    const MetricSetStructure* mss = nullptr;
    const LeStructure* le = nullptr;
    std::size_t n = 0;
    std::vector<std::string> order;
    std::vector<int> order_slots;
    std::vector<CNode> nodes;
    std::vector<std::size_t> val;
    int root = -1;
    SlotMap slots;

    int compile(const RF& f) {
        CNode c;
        c.kind = static_cast<int>(f->kind);
        switch (f->kind) {
            case RK::One: break;
            case RK::Dist:
            case RK::E:
                if (f->kind == RK::Dist && !mss) throw IllTyped("d(x,y) needs a metric set structure");
                if (f->kind == RK::E && !le) throw IllTyped("e(x,y) needs an L_e structure");
                c.x = slots.get(f->x);
                c.y = slots.get(f->y);
                insert_slot(c.free, c.x);
                insert_slot(c.free, c.y);
                break;
            case RK::Sum:
            case RK::Max:
            case RK::Min: {
                c.a = compile(f->a);
                c.b = compile(f->b);
                c.free = nodes[c.a].free;
                merge_into(c.free, nodes[c.b].free);
                break;
            }
            case RK::Scale:
                c.r = f->r;
                c.a = compile(f->a);
                c.free = nodes[c.a].free;
                break;
            case RK::Sup:
            case RK::Inf:
            case RK::SupIn:
            case RK::InfIn: {
                bool bounded = f->kind == RK::SupIn || f->kind == RK::InfIn;
                if (bounded && !mss) throw IllTyped("bounded quantifier needs a metric set structure");
                c.x = slots.get(f->x);
                c.a = compile(f->a);
                c.free = nodes[c.a].free;
                drop(c.free, c.x);
                if (bounded) {
                    c.y = slots.get(f->y);
                    insert_slot(c.free, c.y);
                    c.r = v_of(f->a);
                }
                c.memo = key_fits(n, c.free.size());
                break;
            }
        }
        nodes.push_back(std::move(c));
        return static_cast<int>(nodes.size()) - 1;
    }

    Rational eval(int id) {
        CNode& c = nodes[static_cast<std::size_t>(id)];
        switch (static_cast<RK>(c.kind)) {
            case RK::One: return Rational(1);
            case RK::Dist: return mss->metric()(val[c.x], val[c.y]);
            case RK::E: return le->e(val[c.x], val[c.y]);
            case RK::Sum: return eval(c.a) + eval(c.b);
            case RK::Max: {
                Rational l = eval(c.a);
                return rmax(l, eval(c.b));
            }
            case RK::Min: {
                Rational l = eval(c.a);
                return rmin(l, eval(c.b));
            }
            case RK::Scale:
                if (c.r.is_zero()) return Rational(0);
                return c.r * eval(c.a);
            default: break;
        }
        std::uint64_t key = 0;
        if (c.memo) {
            key = memo_key(c, val, n);
            auto it = c.table.find(key);
            if (it != c.table.end()) return it->second;
        }
        const RK k = static_cast<RK>(c.kind);
        const bool sup = k == RK::Sup || k == RK::SupIn;
        const std::size_t saved = val[c.x];
        Rational best;
        bool any = false;
        auto visit = [&](std::size_t e) {
            val[c.x] = e;
            Rational r = eval(c.a);
            if (!any || (sup ? best < r : r < best)) best = r;
            any = true;
        };
        if (k == RK::Sup || k == RK::Inf) {
            for (std::size_t e = 0; e < n; ++e) visit(e);
        } else {
            // the range variable is read before the binder is overwritten
            const IndexSet members = mss->ext(val[c.y]);
            for (std::size_t e : members) visit(e);
            if (!any) best = sup ? -c.r : c.r;
        }
        val[c.x] = saved;
        CNode& c2 = nodes[static_cast<std::size_t>(id)];
        if (c2.memo && c2.table.size() < kMemoLimit) c2.table.emplace(key, best);
        return best;
    }

    void init(const RF& f, std::vector<std::string> ord) {
        order = std::move(ord);
        for (const auto& v : order) order_slots.push_back(slots.get(v));
        root = compile(f);
        for (int s : nodes[static_cast<std::size_t>(root)].free) {
            bool covered = std::find(order_slots.begin(), order_slots.end(), s) != order_slots.end();
            if (!covered) {
                for (const auto& [name, slot] : slots.slot)
                    if (slot == s) throw std::invalid_argument("unbound variable: " + name);
            }
        }
        val.assign(slots.slot.size(), 0);
    }
};

RealEvaluator::RealEvaluator(const RF& f, const MetricSetStructure& m, std::vector<std::string> order)
    : impl_(std::make_unique<Impl>()) {
    impl_->mss = &m;
    impl_->n = m.size();
    impl_->init(f, std::move(order));
}

RealEvaluator::RealEvaluator(const RF& f, const LeStructure& n, std::vector<std::string> order)
    : impl_(std::make_unique<Impl>()) {
    impl_->le = &n;
    impl_->n = n.size();
    impl_->init(f, std::move(order));
}

RealEvaluator::~RealEvaluator() = default;
RealEvaluator::RealEvaluator(RealEvaluator&&) noexcept = default;

const std::vector<std::string>& RealEvaluator::order() const { return impl_->order; }

Rational RealEvaluator::operator()(const std::vector<std::size_t>& values) {
    if (values.size() != impl_->order.size()) throw std::invalid_argument("assignment arity mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] >= impl_->n) throw std::out_of_range("assignment index out of range");
        impl_->val[static_cast<std::size_t>(impl_->order_slots[i])] = values[i];
    }
    return impl_->eval(impl_->root);
}

namespace {
template <class S, class F>
Rational eval_with(const F& f, const S& s, const Assignment& rho) {
    std::vector<std::string> order;
    std::vector<std::size_t> vals;
    for (const auto& v : free_vars(f)) {
        auto it = rho.find(v);
        if (it == rho.end()) throw std::invalid_argument("unbound variable: " + v);
        order.push_back(v);
        vals.push_back(it->second);
    }
    if constexpr (std::is_same_v<F, RF>) {
        RealEvaluator ev(f, s, order);
        return ev(vals);
    } else {
        LukEvaluator ev(f, s, order);
        return ev(vals);
    }
}
}  // namespace

Rational eval_sq(const RF& f, const MetricSetStructure& m, const Assignment& rho) {
    return eval_with(f, m, rho);
}

Rational eval_e(const RF& f, const LeStructure& n, const Assignment& rho) { return eval_with(f, n, rho); }

// ---------------------------------------------------------------------------

struct LukEvaluator::Impl {
    const LeStructure* le = nullptr;
    std::size_t n = 0;
    std::vector<std::string> order;
    std::vector<int> order_slots;
    std::vector<CNode> nodes;
    std::unordered_map<const LNode*, int> done;  // keeps shared subterms shared
    std::vector<std::size_t> val;
    int root = -1;
    SlotMap slots;

    int compile(const LF& f) {
        if (auto it = done.find(f.get()); it != done.end()) return it->second;
        CNode c;
        c.kind = static_cast<int>(f->kind);
        switch (f->kind) {
            case LK::Bot: break;
            case LK::Ein:
            case LK::EqE:
                c.x = slots.get(f->x);
                c.y = slots.get(f->y);
                insert_slot(c.free, c.x);
                insert_slot(c.free, c.y);
                break;
            case LK::Implies:
            case LK::Iff:
            case LK::And:
            case LK::Or:
            case LK::Strong:
                c.a = compile(f->a);
                c.b = compile(f->b);
                c.free = nodes[c.a].free;
                merge_into(c.free, nodes[c.b].free);
                break;
            case LK::Neg:
                c.a = compile(f->a);
                c.free = nodes[c.a].free;
                break;
            case LK::Exists:
            case LK::Forall:
                c.x = slots.get(f->x);
                c.a = compile(f->a);
                c.free = nodes[c.a].free;
                drop(c.free, c.x);
                c.memo = key_fits(n, c.free.size());
                break;
            case LK::Clamp:
                c.c0 = f->c0;
                c.coeffs = f->coeffs;
                for (const auto& g : f->args) {
                    int id = compile(g);
                    c.args.push_back(id);
                    merge_into(c.free, nodes[id].free);
                }
                break;
        }
        nodes.push_back(std::move(c));
        int id = static_cast<int>(nodes.size()) - 1;
        done.emplace(f.get(), id);
        return id;
    }

    Rational eval(int id) {
        CNode& c = nodes[static_cast<std::size_t>(id)];
        const Rational one(1);
        switch (static_cast<LK>(c.kind)) {
            case LK::Bot: return Rational(0);
            case LK::Ein: return one - le->e(val[c.x], val[c.y]);
            case LK::EqE: {
                Rational worst(0);
                for (std::size_t z = 0; z < n; ++z) {
                    Rational gap = abs(le->e(z, val[c.x]) - le->e(z, val[c.y]));
                    if (worst < gap) worst = gap;
                }
                return one - worst;
            }
            case LK::Implies: {
                Rational a = eval(c.a);
                return rmin(one - a + eval(c.b), one);
            }
            case LK::Iff: {
                Rational a = eval(c.a);
                return one - abs(a - eval(c.b));
            }
            case LK::Neg: return one - eval(c.a);
            case LK::And: {
                Rational a = eval(c.a);
                return rmin(a, eval(c.b));
            }
            case LK::Or: {
                Rational a = eval(c.a);
                return rmax(a, eval(c.b));
            }
            case LK::Strong: {
                Rational a = eval(c.a);
                return rmax(a + eval(c.b) - one, Rational(0));
            }
            case LK::Clamp: {
                Rational s(c.c0);
                std::vector<int> args = c.args;
                std::vector<std::int64_t> co = c.coeffs;
                for (std::size_t i = 0; i < args.size(); ++i) s += Rational(co[i]) * eval(args[i]);
                return clamp01(s);
            }
            default: break;
        }
        std::uint64_t key = 0;
        if (c.memo) {
            key = memo_key(c, val, n);
            auto it = c.table.find(key);
            if (it != c.table.end()) return it->second;
        }
        const bool sup = static_cast<LK>(c.kind) == LK::Exists;
        const int x = c.x, body = c.a;
        const std::size_t saved = val[x];
        Rational best = sup ? Rational(0) : one;
        for (std::size_t e = 0; e < n; ++e) {
            val[x] = e;
            Rational r = eval(body);
            if (sup ? best < r : r < best) best = r;
        }
        val[x] = saved;
        CNode& c2 = nodes[static_cast<std::size_t>(id)];
        if (c2.memo && c2.table.size() < kMemoLimit) c2.table.emplace(key, best);
        return best;
    }
};

LukEvaluator::LukEvaluator(const LF& f, const LeStructure& n, std::vector<std::string> order)
    : impl_(std::make_unique<Impl>()) {
    impl_->le = &n;
    impl_->n = n.size();
    impl_->order = std::move(order);
    for (const auto& v : impl_->order) impl_->order_slots.push_back(impl_->slots.get(v));
    impl_->root = impl_->compile(f);
    for (const auto& v : free_vars(f))
        if (std::find(impl_->order.begin(), impl_->order.end(), v) == impl_->order.end())
            throw std::invalid_argument("unbound variable: " + v);
    impl_->val.assign(impl_->slots.slot.size(), 0);
}

LukEvaluator::~LukEvaluator() = default;
LukEvaluator::LukEvaluator(LukEvaluator&&) noexcept = default;

Rational LukEvaluator::operator()(const std::vector<std::size_t>& values) {
    if (values.size() != impl_->order.size()) throw std::invalid_argument("assignment arity mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] >= impl_->n) throw std::out_of_range("assignment index out of range");
        impl_->val[static_cast<std::size_t>(impl_->order_slots[i])] = values[i];
    }
    return impl_->eval(impl_->root);
}

Rational eval_luk(const LF& f, const LeStructure& n, const Assignment& rho) { return eval_with(f, n, rho); }

Rational eval_luk_prop(const LF& f, const std::function<Rational(const LNode&)>& atom) {
    std::unordered_map<const LNode*, Rational> memo;
    const Rational one(1);
    std::function<Rational(const LF&)> go = [&](const LF& g) -> Rational {
        if (auto it = memo.find(g.get()); it != memo.end()) return it->second;
        Rational r;
        switch (g->kind) {
            case LK::Bot: r = Rational(0); break;
            case LK::Ein: r = atom(*g); break;
            case LK::Implies: r = rmin(one - go(g->a) + go(g->b), one); break;
            case LK::Iff: r = one - abs(go(g->a) - go(g->b)); break;
            case LK::Neg: r = one - go(g->a); break;
            case LK::And: r = rmin(go(g->a), go(g->b)); break;
            case LK::Or: r = rmax(go(g->a), go(g->b)); break;
            case LK::Strong: r = rmax(go(g->a) + go(g->b) - one, Rational(0)); break;
            case LK::Clamp: {
                Rational s(g->c0);
                for (std::size_t i = 0; i < g->args.size(); ++i) s += Rational(g->coeffs[i]) * go(g->args[i]);
                r = clamp01(s);
                break;
            }
            case LK::Exists:
            case LK::Forall:
            case LK::EqE: throw std::invalid_argument("eval_luk_prop: formula is not quantifier-free");
        }
        memo.emplace(g.get(), r);
        return r;
    };
    return go(f);
}

// ---------------------------------------------------------------------------

namespace {

struct DisEval {
    const MetricSetStructure& m;
    const DisContext& ctx;
    Assignment rho;

    std::size_t lookup(const std::string& v) const {
        auto it = rho.find(v);
        if (it == rho.end()) throw std::invalid_argument("unbound variable: " + v);
        return it->second;
    }
    std::size_t witness(const TE& t) const {
        auto it = ctx.witness.find(type_str(t));
        if (it == ctx.witness.end()) throw IllTyped("no witness for type " + type_str(t));
        return it->second;
    }
    bool equal(std::size_t a, std::size_t b) const { return m.metric()(a, b).is_zero(); }

    // <x,y> = {{{x},0},{{y}}}, compared extensionally
    bool is_singleton_of(std::size_t w, std::size_t x) const {
        const auto& ex = m.ext(w);
        return !ex.empty() && std::all_of(ex.begin(), ex.end(), [&](std::size_t u) { return equal(u, x); });
    }
    bool is_empty(std::size_t w) const { return m.ext(w).empty(); }
    bool is_first(std::size_t w, std::size_t x) const {  // {{x}, 0}
        const auto& ex = m.ext(w);
        bool has_s = false, has_e = false;
        for (std::size_t u : ex) {
            bool s = is_singleton_of(u, x), e = is_empty(u);
            if (!s && !e) return false;
            has_s = has_s || s;
            has_e = has_e || e;
        }
        return has_s && has_e;
    }
    bool is_second(std::size_t w, std::size_t y) const {  // {{y}}
        const auto& ex = m.ext(w);
        if (ex.empty()) return false;
        for (std::size_t u : ex)
            if (!is_singleton_of(u, y)) return false;
        return true;
    }
    bool pair(std::size_t z, std::size_t x, std::size_t y) const {
        bool f = false, s = false;
        for (std::size_t u : m.ext(z)) {
            bool a = is_first(u, x), b = is_second(u, y);
            if (!a && !b) return false;
            f = f || a;
            s = s || b;
        }
        return f && s;
    }

    bool eval(const DF& f) {
        switch (f->kind) {
            case DK::Eq: return equal(lookup(f->x), lookup(f->y));
            case DK::MemIn: return m.mem(lookup(f->x), lookup(f->y));
            case DK::PairEq: return pair(lookup(f->z), lookup(f->x), lookup(f->y));
            case DK::And: return eval(f->a) && eval(f->b);
            case DK::Or: return eval(f->a) || eval(f->b);
            case DK::Implies: return !eval(f->a) || eval(f->b);
            case DK::Not: return !eval(f->a);
            case DK::Exists:
            case DK::Forall: {
                const bool ex = f->kind == DK::Exists;
                const std::size_t w = witness(f->type);
                auto had = rho.find(f->x);
                std::optional<std::size_t> saved;
                if (had != rho.end()) saved = had->second;
                bool result = !ex;
                for (std::size_t c : m.ext(w)) {
                    rho[f->x] = c;
                    if (eval(f->a) == ex) {
                        result = ex;
                        break;
                    }
                }
                if (saved) rho[f->x] = *saved;
                else rho.erase(f->x);
                return result;
            }
        }
        return false;
    }
};

}  // namespace

bool eval_dis(const DF& f, const MetricSetStructure& m, const DisContext& ctx) {
    for (const auto& [v, t] : ctx.var_type) {
        auto it = ctx.rho.find(v);
        if (it == ctx.rho.end()) continue;
        auto w = ctx.witness.find(type_str(t));
        if (w == ctx.witness.end()) throw IllTyped("no witness for type " + type_str(t));
        if (!m.mem(it->second, w->second)) throw IllTyped("variable " + v + " is not in " + type_str(t));
    }
    DisEval ev{m, ctx, ctx.rho};
    return ev.eval(f);
}

// ---------------------------------------------------------------------------

FinMetric d_e_matrix(const LeStructure& n) {
    const std::size_t k = n.size();
    FinMetric d(k);
    for (std::size_t x = 0; x < k; ++x)
        for (std::size_t y = x + 1; y < k; ++y) {
            Rational best(0);
            for (std::size_t z = 0; z < k; ++z) {
                Rational g = abs(n.e(z, x) - n.e(z, y));
                if (best < g) best = g;
            }
            d.set_sym(x, y, best);
        }
    return d;
}

LeStructure induced_le(const MetricSetStructure& m) {
    const std::size_t k = m.size();
    std::vector<Rational> e(k * k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) e[i * k + j] = pointset_dist(i, m.ext(j), m.metric());
    return LeStructure(k, std::move(e));
}

Completion completion(const LeStructure& n) {
    const std::size_t k = n.size();
    FinMetric de = d_e_matrix(n);
    std::vector<std::size_t> class_of(k, SIZE_MAX), rep;
    for (std::size_t i = 0; i < k; ++i) {
        if (class_of[i] != SIZE_MAX) continue;
        class_of[i] = rep.size();
        for (std::size_t j = i + 1; j < k; ++j)
            if (class_of[j] == SIZE_MAX && de(i, j).is_zero()) class_of[j] = rep.size();
        rep.push_back(i);
    }
    const std::size_t c = rep.size();
    FinMetric d(c);
    std::vector<char> mem(c * c, 0);
    for (std::size_t a = 0; a < c; ++a)
        for (std::size_t b = 0; b < c; ++b) {
            d.set(a, b, de(rep[a], rep[b]));
            mem[a * c + b] = n.e(rep[a], rep[b]).is_zero() ? 1 : 0;
        }
    return Completion{MetricSetStructure(std::move(d), std::move(mem)), std::move(class_of), std::move(rep)};
}

// ---------------------------------------------------------------------------

namespace {
using nlohmann::json;

json rationals(const std::vector<Rational>& v) {
    json a = json::array();
    for (const auto& r : v) a.push_back(r.str());
    return a;
}

std::vector<Rational> read_rationals(const json& a, std::size_t expect) {
    if (!a.is_array() || a.size() != expect) throw std::invalid_argument("model file: matrix has wrong size");
    std::vector<Rational> out;
    out.reserve(expect);
    for (const auto& s : a) out.push_back(Rational::parse(s.get<std::string>()));
    return out;
}
}  // namespace

std::string to_json(const LeStructure& n) {
    json j{{"kind", "le"}, {"size", n.size()}, {"e", rationals(n.entries())}};
    return j.dump();
}

std::string to_json(const MetricSetStructure& m) {
    std::vector<Rational> mem;
    for (char c : m.mem_matrix()) mem.emplace_back(c ? 1 : 0);
    json j{{"kind", "mss"}, {"size", m.size()}, {"d", rationals(m.metric().entries())}, {"mem", rationals(mem)}};
    return j.dump();
}

LoadedModel model_from_json(const std::string& text) {
    json j = json::parse(text);
    const std::string kind = j.at("kind").get<std::string>();
    const std::size_t n = j.at("size").get<std::size_t>();
    LoadedModel out;
    if (kind == "le") {
        out.le = std::make_unique<LeStructure>(n, read_rationals(j.at("e"), n * n));
    } else if (kind == "mss") {
        FinMetric d(n, read_rationals(j.at("d"), n * n));
        std::vector<char> mem;
        for (const auto& r : read_rationals(j.at("mem"), n * n)) {
            if (!(r.is_zero() || r == Rational(1))) throw std::invalid_argument("model file: mem entries must be 0 or 1");
            mem.push_back(r.is_zero() ? 0 : 1);
        }
        out.mss = std::make_unique<MetricSetStructure>(std::move(d), std::move(mem));
    } else {
        throw std::invalid_argument("model file: unknown kind " + kind);
    }
    return out;
}

}  // namespace mse
