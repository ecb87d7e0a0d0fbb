#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mse/formula.hpp"
#include "mse/semantics.hpp"

namespace mse {

// e atoms become inf_{w in y} d(x,w) with fresh w.
RF to_sq(const RF& f);
// d(x,y) -> d_e, bounded quantifiers via the min(. + 2v e, v) clause.
// Fresh variables come from a counter, so output text is reproducible.
RF to_e(const RF& f);

// ---------------------------------------------------------------------------

struct AnfLiteral {
    Rational a;                                                     // constant
    std::vector<std::pair<Rational, std::pair<std::string, std::string>>> terms;  // b * e(x,y)
};

struct MaxAnf {
    std::vector<std::pair<bool, std::string>> prefix;  // (is_sup, variable), outermost first
    std::vector<std::vector<AnfLiteral>> groups;       // max over groups of min over literals
};

MaxAnf prenex_max_anf(const RF& f);
RF anf_to_formula(const MaxAnf& m);
std::string anf_to_text(const MaxAnf& m);

// ---------------------------------------------------------------------------

// Pure {->, bot} term equal to min(max(a + sum b_i * args_i, 0), 1) on [0,1]^n.
LF mcnaughton(std::int64_t a, const std::vector<std::int64_t>& b, const std::vector<LF>& args);

struct ClampCertificate {
    bool pass = true;
    std::int64_t grid_denominator = 0;
    std::size_t grid_points = 0;
    std::size_t random_points = 0;
    std::vector<Rational> counterexample;  // empty when pass
};
// Compares the term with the clamp on the grid {0,1/D,...,1}^n,
// D = 2(|a| + sum |b_i| + 1), and on `random_points` seeded rational points.
ClampCertificate certify_mcnaughton(std::int64_t a, const std::vector<std::int64_t>& b,
                                    std::size_t random_points = 1000, std::uint64_t seed = 1);

// Macro-free copy: Iff/Neg/And/Or/Strong/EqE by definition, Clamp by mcnaughton.
LF expand(const LF& f);

struct LukCondition {
    LF psi;               // keeps Clamp nodes
    std::int64_t ell = 0;
    std::int64_t scale = 0;  // ell!
    MaxAnf anf;
};
// psi evaluates to min(max(ell! * f, 0), 1) everywhere.
LukCondition to_luk_condition(const RF& f);

// ---------------------------------------------------------------------------

RF axiom_h_ext();
// sup_ybar inf_z sup_x max(min(e(x,z), -f), min(eps_f - e(x,z), f - 1))
RF axiom_excision(const RF& f, const std::string& x = "x", const std::string& z = "z");
LF luk_axiom_ext();
// Refuses formulas with no membership atoms.
LF luk_axiom_excision(const LF& f, const std::string& x = "x", const std::string& z = "z");

struct CaptureError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Named formulas (all in the d-language; e(x,y) stands for inf_{w in y} d(x,w)).

RF schema_e(const std::string& x = "x", const std::string& y = "y");
RF schema_sigma(const std::string& x = "x", const std::string& y = "y");
RF schema_chn(const std::string& x = "x");
RF schema_o(const std::string& x = "x", const std::string& y = "y");
RF schema_phi_r(const Rational& r, const std::string& x = "x");
RF schema_E_r(const Rational& r, const std::string& x = "x", const std::string& y = "y");
RF schema_russell(const std::string& x = "x");
// by name: e, sigma, chn, o, phi_r, E_r, russell
RF schema(const std::string& name, const Rational& r = Rational(1));

// Real-valued rendering of a typed discrete formula at scale eps:
// x=y -> max(1 - d/eps, 0), x in y -> max(1 - e/eps, 0), and -> min, not -> 1 -,
// exists x:t -> sup over the witness variable named witness_name(t).
RF discretize(const DF& f, const Rational& eps);

}  // namespace mse
