#include "mse/formula.hpp"

#include <stdexcept>

namespace mse {

namespace {

RF make(RK k, std::string x = {}, std::string y = {}, Rational r = Rational(0), RF a = nullptr,
        RF b = nullptr) {
    return std::make_shared<const RNode>(RNode{k, std::move(x), std::move(y), r, std::move(a), std::move(b)});
}

}  // namespace

namespace rf {
RF one() { return make(RK::One); }
RF dist(std::string x, std::string y) { return make(RK::Dist, std::move(x), std::move(y)); }
RF e(std::string x, std::string y) { return make(RK::E, std::move(x), std::move(y)); }
RF sum(RF a, RF b) { return make(RK::Sum, {}, {}, Rational(0), std::move(a), std::move(b)); }
RF max(RF a, RF b) { return make(RK::Max, {}, {}, Rational(0), std::move(a), std::move(b)); }
RF min(RF a, RF b) { return make(RK::Min, {}, {}, Rational(0), std::move(a), std::move(b)); }
RF scale(Rational r, RF a) { return make(RK::Scale, {}, {}, r, std::move(a)); }
RF sup(std::string x, RF body) { return make(RK::Sup, std::move(x), {}, Rational(0), std::move(body)); }
RF inf(std::string x, RF body) { return make(RK::Inf, std::move(x), {}, Rational(0), std::move(body)); }
RF sup_in(std::string x, std::string y, RF body) {
    if (x == y) throw std::invalid_argument("bounded quantifier binds its own range variable '" + x + "'");
    return make(RK::SupIn, std::move(x), std::move(y), Rational(0), std::move(body));
}
RF inf_in(std::string x, std::string y, RF body) {
    if (x == y) throw std::invalid_argument("bounded quantifier binds its own range variable '" + x + "'");
    return make(RK::InfIn, std::move(x), std::move(y), Rational(0), std::move(body));
}
RF constant(Rational r) { return scale(r, one()); }
RF neg(RF a) { return scale(Rational(-1), std::move(a)); }
RF sub(RF a, RF b) { return sum(std::move(a), neg(std::move(b))); }
RF absval(RF a) { return max(a, neg(a)); }
RF d_e(const std::string& x, const std::string& y, const std::string& z) {
    if (z == x || z == y) throw std::invalid_argument("d_e: witness variable clashes with an argument");
    return sup(z, absval(sub(e(z, x), e(z, y))));
}
}  // namespace rf

bool is_sq(const RF& f) {
    switch (f->kind) {
        case RK::E: return false;
        case RK::One:
        case RK::Dist: return true;
        case RK::Sum:
        case RK::Max:
        case RK::Min: return is_sq(f->a) && is_sq(f->b);
        default: return is_sq(f->a);
    }
}

bool is_e(const RF& f) {
    switch (f->kind) {
        case RK::Dist:
        case RK::SupIn:
        case RK::InfIn: return false;
        case RK::One:
        case RK::E: return true;
        case RK::Sum:
        case RK::Max:
        case RK::Min: return is_e(f->a) && is_e(f->b);
        default: return is_e(f->a);
    }
}

bool same(const RF& a, const RF& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->x != b->x || a->y != b->y || a->r != b->r) return false;
    return same(a->a, b->a) && same(a->b, b->b);
}

Rational v_of(const RF& f) {
    switch (f->kind) {
        case RK::One:
        case RK::Dist:
        case RK::E: return Rational(1);
        case RK::Sum: return v_of(f->a) + v_of(f->b);
        case RK::Max:
        case RK::Min: return rmax(v_of(f->a), v_of(f->b));
        case RK::Scale: return abs(f->r) * v_of(f->a);
        default: return v_of(f->a);
    }
}

std::size_t count_e(const RF& f) {
    switch (f->kind) {
        case RK::One:
        case RK::Dist: return 0;
        case RK::E: return 1;
        case RK::Sum:
        case RK::Max:
        case RK::Min: return count_e(f->a) + count_e(f->b);
        default: return count_e(f->a);
    }
}

Rational epsilon_phi(const RF& f) { return Rational(1) / rmax(Rational(6) * v_of(f), Rational(3)); }

std::set<std::string> free_vars(const RF& f) {
    switch (f->kind) {
        case RK::One: return {};
        case RK::Dist:
        case RK::E: return {f->x, f->y};
        case RK::Sum:
        case RK::Max:
        case RK::Min: {
            auto s = free_vars(f->a);
            auto t = free_vars(f->b);
            s.insert(t.begin(), t.end());
            return s;
        }
        case RK::Scale: return free_vars(f->a);
        case RK::Sup:
        case RK::Inf: {
            auto s = free_vars(f->a);
            s.erase(f->x);
            return s;
        }
        case RK::SupIn:
        case RK::InfIn: {
            auto s = free_vars(f->a);
            s.erase(f->x);
            s.insert(f->y);
            return s;
        }
    }
    return {};
}

std::set<std::string> all_vars(const RF& f) {
    std::set<std::string> s;
    if (!f) return s;
    if (!f->x.empty()) s.insert(f->x);
    if (!f->y.empty()) s.insert(f->y);
    for (const RF& c : {f->a, f->b}) {
        auto t = all_vars(c);
        s.insert(t.begin(), t.end());
    }
    return s;
}

std::size_t node_count(const RF& f) {
    if (!f) return 0;
    return 1 + node_count(f->a) + node_count(f->b);
}

// ---------------------------------------------------------------------------

namespace {

LF lmake(LK k, std::string x = {}, std::string y = {}, LF a = nullptr, LF b = nullptr) {
    auto n = std::make_shared<LNode>();
    n->kind = k;
    n->x = std::move(x);
    n->y = std::move(y);
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

}  // namespace

namespace lf {
LF bot() { return lmake(LK::Bot); }
LF top() { return implies(bot(), bot()); }
LF ein(std::string x, std::string y) { return lmake(LK::Ein, std::move(x), std::move(y)); }
LF implies(LF a, LF b) { return lmake(LK::Implies, {}, {}, std::move(a), std::move(b)); }
LF exists(std::string x, LF a) { return lmake(LK::Exists, std::move(x), {}, std::move(a)); }
LF forall(std::string x, LF a) { return lmake(LK::Forall, std::move(x), {}, std::move(a)); }
LF iff(LF a, LF b) { return lmake(LK::Iff, {}, {}, std::move(a), std::move(b)); }
LF neg(LF a) { return lmake(LK::Neg, {}, {}, std::move(a)); }
LF land(LF a, LF b) { return lmake(LK::And, {}, {}, std::move(a), std::move(b)); }
LF lor(LF a, LF b) { return lmake(LK::Or, {}, {}, std::move(a), std::move(b)); }
LF strong(LF a, LF b) { return lmake(LK::Strong, {}, {}, std::move(a), std::move(b)); }
LF eqe(std::string x, std::string y) { return lmake(LK::EqE, std::move(x), std::move(y)); }
LF clamp(std::int64_t c0, std::vector<std::int64_t> coeffs, std::vector<LF> args) {
    if (coeffs.size() != args.size()) throw std::invalid_argument("clamp: coefficient/argument count mismatch");
    auto n = std::make_shared<LNode>();
    n->kind = LK::Clamp;
    n->c0 = c0;
    n->coeffs = std::move(coeffs);
    n->args = std::move(args);
    return n;
}
LF oplus(LF a, LF b) { return implies(neg(std::move(a)), std::move(b)); }
}  // namespace lf

bool is_pure(const LF& f) {
    switch (f->kind) {
        case LK::Bot:
        case LK::Ein: return true;
        case LK::Implies: return is_pure(f->a) && is_pure(f->b);
        case LK::Exists:
        case LK::Forall: return is_pure(f->a);
        default: return false;
    }
}

// Connective macros count as connectives; EqE hides two atoms and a clamp
// counts the atoms of its arguments once each.
std::size_t count_e(const LF& f) {
    switch (f->kind) {
        case LK::Bot: return 0;
        case LK::Ein: return 1;
        case LK::EqE: return 2;
        case LK::Exists:
        case LK::Forall:
        case LK::Neg: return count_e(f->a);
        case LK::Clamp: {
            std::size_t n = 0;
            for (const LF& g : f->args) n += count_e(g);
            return n;
        }
        default: return count_e(f->a) + count_e(f->b);
    }
}

std::set<std::string> free_vars(const LF& f) {
    std::set<std::string> s;
    switch (f->kind) {
        case LK::Bot: break;
        case LK::Ein:
        case LK::EqE: s = {f->x, f->y}; break;
        case LK::Exists:
        case LK::Forall:
            s = free_vars(f->a);
            s.erase(f->x);
            break;
        case LK::Clamp:
            for (const LF& g : f->args) {
                auto t = free_vars(g);
                s.insert(t.begin(), t.end());
            }
            break;
        default:
            s = free_vars(f->a);
            if (f->b) {
                auto t = free_vars(f->b);
                s.insert(t.begin(), t.end());
            }
    }
    return s;
}

std::set<std::string> all_vars(const LF& f) {
    std::set<std::string> s;
    if (!f) return s;
    if (!f->x.empty()) s.insert(f->x);
    if (!f->y.empty()) s.insert(f->y);
    for (const LF& c : {f->a, f->b}) {
        auto t = all_vars(c);
        s.insert(t.begin(), t.end());
    }
    for (const LF& c : f->args) {
        auto t = all_vars(c);
        s.insert(t.begin(), t.end());
    }
    return s;
}

bool same(const LF& a, const LF& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->x != b->x || a->y != b->y || a->c0 != b->c0 || a->coeffs != b->coeffs ||
        a->args.size() != b->args.size())
        return false;
    for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!same(a->args[i], b->args[i])) return false;
    return same(a->a, b->a) && same(a->b, b->b);
}

std::size_t count_nodes(const LF& f, LK kind) {
    if (!f) return 0;
    std::size_t n = f->kind == kind ? 1 : 0;
    n += count_nodes(f->a, kind) + count_nodes(f->b, kind);
    for (const LF& g : f->args) n += count_nodes(g, kind);
    return n;
}

// ---------------------------------------------------------------------------

namespace te {
TE var(std::string n) { return std::make_shared<const TNode>(TNode{TK::Var, std::move(n), nullptr, nullptr}); }
TE prod(TE a, TE b) { return std::make_shared<const TNode>(TNode{TK::Prod, {}, std::move(a), std::move(b)}); }
TE pow(TE a) { return std::make_shared<const TNode>(TNode{TK::Pow, {}, std::move(a), nullptr}); }
}  // namespace te

std::string type_str(const TE& t) {
    switch (t->kind) {
        case TK::Var: return t->name;
        case TK::Pow: return "P(" + type_str(t->a) + ")";
        case TK::Prod: return "(" + type_str(t->a) + " x " + type_str(t->b) + ")";
    }
    return {};
}

std::string witness_name(const TE& t) {
    switch (t->kind) {
        case TK::Var: return t->name;
        case TK::Pow: return "P_" + witness_name(t->a);
        case TK::Prod: return "X_" + witness_name(t->a) + "_" + witness_name(t->b) + "_";
    }
    return {};
}

bool same(const TE& a, const TE& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return a->kind == b->kind && a->name == b->name && same(a->a, b->a) && same(a->b, b->b);
}

namespace {
DF dmake(DK k, std::string x = {}, std::string y = {}, std::string z = {}, TE t = nullptr, DF a = nullptr,
         DF b = nullptr) {
    return std::make_shared<const DNode>(
        DNode{k, std::move(x), std::move(y), std::move(z), std::move(t), std::move(a), std::move(b)});
}
}  // namespace

namespace df {
DF eq(std::string x, std::string y) { return dmake(DK::Eq, std::move(x), std::move(y)); }
DF pair_eq(std::string x, std::string y, std::string z) {
    return dmake(DK::PairEq, std::move(x), std::move(y), std::move(z));
}
DF mem(std::string x, std::string y) { return dmake(DK::MemIn, std::move(x), std::move(y)); }
DF land(DF a, DF b) { return dmake(DK::And, {}, {}, {}, nullptr, std::move(a), std::move(b)); }
DF lor(DF a, DF b) { return dmake(DK::Or, {}, {}, {}, nullptr, std::move(a), std::move(b)); }
DF implies(DF a, DF b) { return dmake(DK::Implies, {}, {}, {}, nullptr, std::move(a), std::move(b)); }
DF lnot(DF a) { return dmake(DK::Not, {}, {}, {}, nullptr, std::move(a)); }
DF exists(std::string x, TE t, DF a) { return dmake(DK::Exists, std::move(x), {}, {}, std::move(t), std::move(a)); }
DF forall(std::string x, TE t, DF a) { return dmake(DK::Forall, std::move(x), {}, {}, std::move(t), std::move(a)); }
}  // namespace df

std::set<std::string> free_vars(const DF& f) {
    std::set<std::string> s;
    switch (f->kind) {
        case DK::Eq:
        case DK::MemIn: s = {f->x, f->y}; break;
        case DK::PairEq: s = {f->x, f->y, f->z}; break;
        case DK::Exists:
        case DK::Forall:
            s = free_vars(f->a);
            s.erase(f->x);
            break;
        case DK::Not: s = free_vars(f->a); break;
        default: {
            s = free_vars(f->a);
            auto t = free_vars(f->b);
            s.insert(t.begin(), t.end());
        }
    }
    return s;
}

}  // namespace mse
