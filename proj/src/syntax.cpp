#include "mse/syntax.hpp"

#include <cctype>
#include <optional>
#include <vector>

namespace mse {

namespace {

enum class T { Ident, Number, Punct, End };

struct Tok {
    T type;
    std::string text;
    std::size_t pos;
};

std::vector<Tok> lex(std::string_view s) {
    std::vector<Tok> out;
    std::size_t i = 0;
    auto is_id0 = [](unsigned char c) { return std::isalpha(c) || c == '_'; };
    auto is_id = [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '\''; };
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (is_id0(c)) {
            std::size_t j = i;
            while (j < s.size() && is_id(static_cast<unsigned char>(s[j]))) ++j;
            out.push_back({T::Ident, std::string(s.substr(i, j - i)), i});
            i = j;
            continue;
        }
        if (std::isdigit(c)) {
            std::size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            if (j + 1 < s.size() && s[j] == '/' && std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
                ++j;
                while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            }
            out.push_back({T::Number, std::string(s.substr(i, j - i)), i});
            i = j;
            continue;
        }
        for (std::string_view p : {"<->", "(*)", "->", "=e"}) {
            if (s.substr(i, p.size()) == p) {
                out.push_back({T::Punct, std::string(p), i});
                i += p.size();
                goto next;
            }
        }
        if (std::string_view("()[],.+-*|&~:;<>=").find(static_cast<char>(c)) != std::string_view::npos) {
            out.push_back({T::Punct, std::string(1, static_cast<char>(c)), i});
            ++i;
            continue;
        }
        throw ParseError(std::string("unexpected character '") + static_cast<char>(c) + "'", i);
    next:;
    }
    out.push_back({T::End, "", s.size()});
    return out;
}

class Cursor {
public:
    explicit Cursor(std::string_view s) : toks_(lex(s)) {}

    const Tok& peek(std::size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
    bool at(std::string_view p, std::size_t k = 0) const {
        const Tok& t = peek(k);
        return (t.type == T::Punct || t.type == T::Ident) && t.text == p;
    }
    bool accept(std::string_view p) {
        if (at(p)) {
            ++i_;
            return true;
        }
        return false;
    }
    void expect(std::string_view p) {
        if (!accept(p)) fail("expected '" + std::string(p) + "'");
    }
    std::string ident() {
        const Tok& t = peek();
        if (t.type != T::Ident) fail("expected identifier");
        ++i_;
        return t.text;
    }
    Rational number() {
        const Tok& t = peek();
        if (t.type != T::Number) fail("expected number");
        ++i_;
        return Rational::parse(t.text);
    }
    std::int64_t integer() {
        bool negative = accept("-");
        Rational r = number();
        if (!r.is_integer()) fail("expected integer");
        return negative ? -r.num() : r.num();
    }
    void done() {
        if (peek().type != T::End) fail("unexpected trailing input '" + peek().text + "'");
    }
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().pos); }

private:
    std::vector<Tok> toks_;
    std::size_t i_ = 0;
};

std::string fresh_avoiding(const std::set<std::string>& avoid, const std::string& base = "z") {
    if (!avoid.count(base)) return base;
    for (int k = 1;; ++k) {
        std::string c = base + std::to_string(k);
        if (!avoid.count(c)) return c;
    }
}

// ---------------------------------------------------------------------------
// real-valued formulas

class RealParser {
public:
    RealParser(std::string_view s, bool sq) : c_(s), sq_(sq) {}

    RF run() {
        RF f = expr();
        c_.done();
        return f;
    }

private:
    bool quant_ahead() const { return c_.at("sup") || c_.at("inf"); }

    RF expr() {
        RF f = term();
        for (;;) {
            if (c_.accept("+")) {
                f = rf::sum(f, term());
            } else if (c_.accept("-")) {
                f = rf::sub(f, term());
            } else {
                return f;
            }
        }
    }

    bool coef_ahead() const {
        if (c_.peek().type == T::Number && c_.at("*", 1)) return true;
        return c_.at("(") && c_.at("-", 1) && c_.peek(2).type == T::Number && c_.at(")", 3) && c_.at("*", 4);
    }

    RF term() {
        if (coef_ahead()) {
            Rational r;
            if (c_.accept("(")) {
                c_.expect("-");
                r = -c_.number();
                c_.expect(")");
            } else {
                r = c_.number();
            }
            c_.expect("*");
            return rf::scale(r, term());
        }
        if (c_.accept("-")) return rf::neg(term());
        if (quant_ahead()) return quant();
        return primary();
    }

    RF quant() {
        bool is_sup = c_.ident() == "sup";
        std::vector<std::string> vars{c_.ident()};
        while (c_.accept(",")) vars.push_back(c_.ident());
        std::optional<std::string> range;
        if (c_.accept("in")) range = c_.ident();
        c_.expect(".");
        RF body = expr();
        for (auto it = vars.rbegin(); it != vars.rend(); ++it) {
            if (range) {
                if (!sq_) c_.fail("bounded quantifier outside L_sq");
                body = is_sup ? rf::sup_in(*it, *range, body) : rf::inf_in(*it, *range, body);
            } else {
                body = is_sup ? rf::sup(*it, body) : rf::inf(*it, body);
            }
        }
        return body;
    }

    std::pair<std::string, std::string> args2() {
        c_.expect("(");
        std::string x = c_.ident();
        c_.expect(",");
        std::string y = c_.ident();
        c_.expect(")");
        return {x, y};
    }

    RF primary() {
        const Tok& t = c_.peek();
        if (t.type == T::Number) {
            Rational r = c_.number();
            if (r == Rational(1)) return rf::one();
            return rf::constant(r);
        }
        if (c_.accept("(")) {
            RF f = expr();
            c_.expect(")");
            return f;
        }
        if (c_.accept("|")) {
            RF f = expr();
            c_.expect("|");
            return rf::absval(f);
        }
        if (t.type == T::Ident && c_.at("(", 1)) {
            std::string name = c_.ident();
            if (name == "d") {
                if (!sq_) c_.fail("d(x,y) is not a restricted L_e atom; use d_e(x,y)");
                auto [x, y] = args2();
                return rf::dist(x, y);
            }
            if (name == "e") {
                auto [x, y] = args2();
                if (sq_) return rf::inf_in(fresh_avoiding({x, y}), y, rf::dist(x, fresh_avoiding({x, y})));
                return rf::e(x, y);
            }
            if (name == "d_e") {
                if (sq_) c_.fail("d_e is an L_e macro");
                auto [x, y] = args2();
                return rf::d_e(x, y, fresh_avoiding({x, y}));
            }
            if (name == "max" || name == "min") {
                c_.expect("(");
                RF a = expr();
                c_.expect(",");
                RF b = expr();
                c_.expect(")");
                return name == "max" ? rf::max(a, b) : rf::min(a, b);
            }
            c_.fail("unknown function '" + name + "'");
        }
        c_.fail("expected a formula");
    }

    Cursor c_;
    bool sq_;
};

bool is_quant(const RF& f) {
    return f->kind == RK::Sup || f->kind == RK::Inf || f->kind == RK::SupIn || f->kind == RK::InfIn;
}

std::string real_text(const RF& f);

std::string wrap_if(bool cond, const std::string& s) { return cond ? "(" + s + ")" : s; }

std::string real_text(const RF& f) {
    switch (f->kind) {
        case RK::One: return "1";
        case RK::Dist: return "d(" + f->x + "," + f->y + ")";
        case RK::E: return "e(" + f->x + "," + f->y + ")";
        case RK::Sum:
            return wrap_if(is_quant(f->a), real_text(f->a)) + " + " +
                   wrap_if(is_quant(f->b) || f->b->kind == RK::Sum, real_text(f->b));
        case RK::Max: return "max(" + real_text(f->a) + ", " + real_text(f->b) + ")";
        case RK::Min: return "min(" + real_text(f->a) + ", " + real_text(f->b) + ")";
        case RK::Scale: {
            std::string coef = f->r.sign() < 0 ? "(" + f->r.str() + ")" : f->r.str();
            return coef + " * " + wrap_if(is_quant(f->a) || f->a->kind == RK::Sum, real_text(f->a));
        }
        case RK::Sup: return "sup " + f->x + " . " + real_text(f->a);
        case RK::Inf: return "inf " + f->x + " . " + real_text(f->a);
        case RK::SupIn: return "sup " + f->x + " in " + f->y + " . " + real_text(f->a);
        case RK::InfIn: return "inf " + f->x + " in " + f->y + " . " + real_text(f->a);
    }
    return {};
}

// ---------------------------------------------------------------------------
// Lukasiewicz

class LukParser {
public:
    explicit LukParser(std::string_view s) : c_(s) {}
    LF run() {
        LF f = imp();
        c_.done();
        return f;
    }

private:
    LF imp() {
        LF a = iff();
        if (c_.accept("->")) return lf::implies(a, imp());
        return a;
    }
    LF iff() {
        LF a = disj();
        while (c_.accept("<->")) a = lf::iff(a, disj());
        return a;
    }
    LF disj() {
        LF a = conj();
        while (c_.accept("|")) a = lf::lor(a, conj());
        return a;
    }
    LF conj() {
        LF a = strong();
        while (c_.accept("&")) a = lf::land(a, strong());
        return a;
    }
    LF strong() {
        LF a = unary();
        while (c_.accept("(*)")) a = lf::strong(a, unary());
        return a;
    }
    LF unary() {
        if (c_.accept("~")) return lf::neg(unary());
        if (c_.accept("forall")) {
            std::string x = c_.ident();
            return lf::forall(x, unary());
        }
        if (c_.accept("exists")) {
            std::string x = c_.ident();
            return lf::exists(x, unary());
        }
        return atom();
    }
    LF atom() {
        if (c_.accept("(")) {
            LF f = imp();
            c_.expect(")");
            return f;
        }
        if (c_.accept("bot")) return lf::bot();
        if (c_.at("M") && c_.at("[", 1)) {
            c_.ident();
            c_.expect("[");
            std::int64_t c0 = c_.integer();
            c_.expect(";");
            std::vector<std::int64_t> coeffs;
            if (!c_.at("]")) {
                coeffs.push_back(c_.integer());
                while (c_.accept(",")) coeffs.push_back(c_.integer());
            }
            c_.expect("]");
            c_.expect("(");
            std::vector<LF> args;
            if (!c_.at(")")) {
                args.push_back(imp());
                while (c_.accept(",")) args.push_back(imp());
            }
            c_.expect(")");
            if (args.size() != coeffs.size()) c_.fail("clamp arity mismatch");
            return lf::clamp(c0, std::move(coeffs), std::move(args));
        }
        std::string x = c_.ident();
        if (c_.accept("in")) return lf::ein(x, c_.ident());
        if (c_.accept("=e")) return lf::eqe(x, c_.ident());
        c_.fail("expected 'in' or '=e' after variable");
    }

    Cursor c_;
};

int luk_prec(LK k) {
    switch (k) {
        case LK::Implies: return 1;
        case LK::Iff: return 2;
        case LK::Or: return 3;
        case LK::And: return 4;
        case LK::Strong: return 5;
        default: return 9;
    }
}

std::string luk_text(const LF& f) {
    auto sub = [](const LF& g, int min_prec) {
        std::string s = luk_text(g);
        return luk_prec(g->kind) < min_prec ? "(" + s + ")" : s;
    };
    switch (f->kind) {
        case LK::Bot: return "bot";
        case LK::Ein: return f->x + " in " + f->y;
        case LK::EqE: return f->x + " =e " + f->y;
        case LK::Implies: return sub(f->a, 2) + " -> " + sub(f->b, 1);
        case LK::Iff: return sub(f->a, 2) + " <-> " + sub(f->b, 3);
        case LK::Or: return sub(f->a, 3) + " | " + sub(f->b, 4);
        case LK::And: return sub(f->a, 4) + " & " + sub(f->b, 5);
        case LK::Strong: return sub(f->a, 5) + " (*) " + sub(f->b, 9);
        case LK::Neg: return "~" + sub(f->a, 9);
        case LK::Exists: return "exists " + f->x + " " + sub(f->a, 9);
        case LK::Forall: return "forall " + f->x + " " + sub(f->a, 9);
        case LK::Clamp: {
            std::string s = "M[" + std::to_string(f->c0) + ";";
            for (std::size_t i = 0; i < f->coeffs.size(); ++i) s += (i ? ", " : " ") + std::to_string(f->coeffs[i]);
            s += "](";
            for (std::size_t i = 0; i < f->args.size(); ++i) s += (i ? ", " : "") + luk_text(f->args[i]);
            return s + ")";
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// discrete typed

TE parse_type_at(Cursor& c) {
    if (c.accept("P")) {
        c.expect("(");
        TE t = parse_type_at(c);
        c.expect(")");
        return te::pow(t);
    }
    if (c.accept("(")) {
        TE a = parse_type_at(c);
        if (!c.accept("x")) c.fail("expected 'x' in product type");
        TE b = parse_type_at(c);
        c.expect(")");
        return te::prod(a, b);
    }
    return te::var(c.ident());
}

class DisParser {
public:
    explicit DisParser(std::string_view s) : c_(s) {}
    DF run() {
        DF f = imp();
        c_.done();
        return f;
    }

private:
    DF imp() {
        DF a = disj();
        if (c_.accept("->")) return df::implies(a, imp());
        return a;
    }
    DF disj() {
        DF a = conj();
        while (c_.accept("|")) a = df::lor(a, conj());
        return a;
    }
    DF conj() {
        DF a = unary();
        while (c_.accept("&")) a = df::land(a, unary());
        return a;
    }
    DF unary() {
        if (c_.accept("~")) return df::lnot(unary());
        bool fa = c_.at("forall");
        if (fa || c_.at("exists")) {
            c_.ident();
            std::string x = c_.ident();
            c_.expect(":");
            TE t = parse_type_at(c_);
            c_.expect(".");
            DF body = imp();
            return fa ? df::forall(x, t, body) : df::exists(x, t, body);
        }
        return atom();
    }
    DF atom() {
        if (c_.at("<")) {
            c_.expect("<");
            std::string x = c_.ident();
            c_.expect(",");
            std::string y = c_.ident();
            c_.expect(">");
            c_.expect("=");
            return df::pair_eq(x, y, c_.ident());
        }
        if (c_.accept("(")) {
            DF f = imp();
            c_.expect(")");
            return f;
        }
        std::string x = c_.ident();
        if (c_.accept("in")) return df::mem(x, c_.ident());
        if (c_.accept("=")) return df::eq(x, c_.ident());
        c_.fail("expected 'in' or '=' after variable");
    }

    Cursor c_;
};

int dis_prec(DK k) {
    switch (k) {
        case DK::Exists:
        case DK::Forall: return 0;
        case DK::Implies: return 1;
        case DK::Or: return 2;
        case DK::And: return 3;
        default: return 9;
    }
}

std::string dis_text(const DF& f) {
    auto sub = [](const DF& g, int min_prec) {
        std::string s = dis_text(g);
        return dis_prec(g->kind) < min_prec ? "(" + s + ")" : s;
    };
    switch (f->kind) {
        case DK::Eq: return f->x + " = " + f->y;
        case DK::PairEq: return "<" + f->x + "," + f->y + "> = " + f->z;
        case DK::MemIn: return f->x + " in " + f->y;
        case DK::And: return sub(f->a, 3) + " & " + sub(f->b, 4);
        case DK::Or: return sub(f->a, 2) + " | " + sub(f->b, 3);
        case DK::Implies: return sub(f->a, 2) + " -> " + sub(f->b, 1);
        case DK::Not: return "~" + sub(f->a, 9);
        case DK::Exists: return "exists " + f->x + " : " + type_str(f->type) + " . " + dis_text(f->a);
        case DK::Forall: return "forall " + f->x + " : " + type_str(f->type) + " . " + dis_text(f->a);
    }
    return {};
}

}  // namespace

RF parse_sq(std::string_view text) { return RealParser(text, true).run(); }
RF parse_e(std::string_view text) { return RealParser(text, false).run(); }
LF parse_luk(std::string_view text) { return LukParser(text).run(); }
DF parse_dis(std::string_view text) { return DisParser(text).run(); }
TE parse_type(std::string_view text) {
    Cursor c(text);
    TE t = parse_type_at(c);
    c.done();
    return t;
}

std::string to_text(const RF& f) { return real_text(f); }
std::string to_text(const LF& f) { return luk_text(f); }
std::string to_text(const DF& f) { return dis_text(f); }

void require_bound(const std::set<std::string>& free, const std::set<std::string>& allowed) {
    for (const auto& v : free)
        if (!allowed.count(v)) throw UnboundVariable(v);
}

}  // namespace mse
