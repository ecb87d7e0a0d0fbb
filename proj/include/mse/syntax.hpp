#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mse/formula.hpp"

namespace mse {

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " at offset " + std::to_string(pos)), pos(pos) {}
    std::size_t pos;
};

struct UnboundVariable : std::runtime_error {
    explicit UnboundVariable(const std::string& v) : std::runtime_error("unbound variable '" + v + "'"), var(v) {}
    std::string var;
};

// "sq": d atoms and bounded quantifiers; e(x,y) is accepted as sugar for
// inf z in y . d(x,z).  "e": e atoms and unbounded quantifiers; d_e(x,y)
// expands to its sup-formula.  Both accept a - b, -a, |a|, bare rational
// constants and "sup x, y in z . body".
RF parse_sq(std::string_view text);
RF parse_e(std::string_view text);
LF parse_luk(std::string_view text);
DF parse_dis(std::string_view text);
TE parse_type(std::string_view text);

std::string to_text(const RF& f);
std::string to_text(const LF& f);
std::string to_text(const DF& f);

// Throws UnboundVariable if a free variable is not in `allowed`.
void require_bound(const std::set<std::string>& free, const std::set<std::string>& allowed);

}  // namespace mse
