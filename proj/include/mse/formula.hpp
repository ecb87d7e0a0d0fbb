#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "mse/rational.hpp"

namespace mse {

// ---------------------------------------------------------------------------
// Real-valued formulas. One node type serves both L_sq (d, bounded
// quantifiers) and restricted L_e (e, unbounded quantifiers only); the
// fragment predicates below say which language a tree belongs to.

enum class RK { One, Dist, E, Sum, Max, Min, Scale, Sup, Inf, SupIn, InfIn };

struct RNode;
using RF = std::shared_ptr<const RNode>;

struct RNode {
    RK kind;
    std::string x;  // Dist/E first arg, binder of quantifiers
    std::string y;  // Dist/E second arg, range of bounded quantifiers
    Rational r;     // Scale coefficient
    RF a, b;        // operands / body in a
};

namespace rf {
RF one();
RF dist(std::string x, std::string y);
RF e(std::string x, std::string y);
RF sum(RF a, RF b);
RF max(RF a, RF b);
RF min(RF a, RF b);
RF scale(Rational r, RF a);
RF sup(std::string x, RF body);
RF inf(std::string x, RF body);
RF sup_in(std::string x, std::string y, RF body);  // throws if x == y
RF inf_in(std::string x, std::string y, RF body);

RF constant(Rational r);  // r * 1
RF neg(RF a);             // (-1) * a
RF sub(RF a, RF b);       // a + (-1) * b
RF absval(RF a);          // max(a, -a)
// d_e(x,y) = sup_z max(e(z,x) - e(z,y), e(z,y) - e(z,x)); z chosen != x,y
RF d_e(const std::string& x, const std::string& y, const std::string& z = "z");
}  // namespace rf

bool is_sq(const RF& f);  // no e atoms
bool is_e(const RF& f);   // no d atoms, no bounded quantifiers
bool same(const RF& a, const RF& b);  // structural equality

Rational v_of(const RF& f);
std::size_t count_e(const RF& f);
Rational epsilon_phi(const RF& f);  // 1 / max(6 v, 3)
std::set<std::string> free_vars(const RF& f);
std::set<std::string> all_vars(const RF& f);
std::size_t node_count(const RF& f);

// ---------------------------------------------------------------------------
// Lukasiewicz formulas. Bot, Ein, Implies, Exists, Forall are primitive;
// the rest are macros with an explicit expansion.

enum class LK { Bot, Ein, Implies, Exists, Forall, Iff, Neg, And, Or, Strong, EqE, Clamp };

struct LNode;
using LF = std::shared_ptr<const LNode>;

struct LNode {
    LK kind;
    std::string x, y;
    LF a, b;
    // Clamp: min(max(c0 + sum coeffs[i] * args[i], 0), 1)
    std::int64_t c0 = 0;
    std::vector<std::int64_t> coeffs;
    std::vector<LF> args;
};

namespace lf {
LF bot();
LF top();  // bot -> bot
LF ein(std::string x, std::string y);
LF implies(LF a, LF b);
LF exists(std::string x, LF a);
LF forall(std::string x, LF a);
LF iff(LF a, LF b);
LF neg(LF a);
LF land(LF a, LF b);
LF lor(LF a, LF b);
LF strong(LF a, LF b);
LF eqe(std::string x, std::string y);
LF clamp(std::int64_t c0, std::vector<std::int64_t> coeffs, std::vector<LF> args);
LF oplus(LF a, LF b);  // ~a -> b
}  // namespace lf

bool is_pure(const LF& f);  // only Bot/Ein/Implies/Exists/Forall
std::size_t count_e(const LF& f);  // after macro expansion
std::set<std::string> free_vars(const LF& f);
std::set<std::string> all_vars(const LF& f);
bool same(const LF& a, const LF& b);
std::size_t count_nodes(const LF& f, LK kind);  // tree count, shared nodes counted per use

// ---------------------------------------------------------------------------
// Typed discrete formulas.

enum class TK { Var, Prod, Pow };
struct TNode;
using TE = std::shared_ptr<const TNode>;
struct TNode {
    TK kind;
    std::string name;  // Var
    TE a, b;
};

namespace te {
TE var(std::string n);
TE prod(TE a, TE b);
TE pow(TE a);
}  // namespace te

std::string type_str(const TE& t);      // "a", "P(a)", "(a x b)"
std::string witness_name(const TE& t);  // identifier naming the witness variable
bool same(const TE& a, const TE& b);

enum class DK { Eq, PairEq, MemIn, And, Or, Implies, Not, Exists, Forall };
struct DNode;
using DF = std::shared_ptr<const DNode>;
struct DNode {
    DK kind;
    std::string x, y, z;  // Eq(x,y), MemIn(x,y), PairEq <x,y>=z, binder x
    TE type;              // binder type
    DF a, b;
};

namespace df {
DF eq(std::string x, std::string y);
DF pair_eq(std::string x, std::string y, std::string z);
DF mem(std::string x, std::string y);
DF land(DF a, DF b);
DF lor(DF a, DF b);
DF implies(DF a, DF b);
DF lnot(DF a);
DF exists(std::string x, TE t, DF a);
DF forall(std::string x, TE t, DF a);
}  // namespace df

std::set<std::string> free_vars(const DF& f);

}  // namespace mse
