#pragma once

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mse/formula.hpp"
#include "mse/semantics.hpp"

namespace mse {

struct WitnessResult {
    std::size_t element = 0;
    Rational residual;       // 0 means the ideal target / contract is met exactly
    bool satisfied = false;  // contract holds exactly
};

struct NoWitness : std::runtime_error {
    NoWitness(const std::string& what, WitnessResult best) : std::runtime_error(what), best(best) {}
    WitnessResult best;
};

struct InsufficientDepth : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Smallest-index b with: phi(c) <= r  =>  c in b,  and  c in b  =>  phi(c) < s.
// Residual of a candidate: max of e(c,b) over forced members that are missing
// and of phi(c) - s over members that should not be there.
WitnessResult exc_search(const MetricSetStructure& m, const RF& phi, const std::string& x, const Assignment& params,
                         const Rational& r, const Rational& s);

// Same contract read in an L_e structure (phi an e-formula, c in b iff
// e(c,b) = 0), loosened by slack: phi(c) <= r => e(c,b) <= slack and
// e(c,b) = 0 => phi(c) < s + slack. slack = 0 is the exact contract.
WitnessResult exc_search(const LeStructure& n, const RF& phi, const std::string& x, const Assignment& params,
                         const Rational& r, const Rational& s, const Rational& slack = Rational(0));

// Element whose extension is Hausdorff-closest to target.
WitnessResult find_extension(const MetricSetStructure& m, const IndexSet& target);

// <a,b> = {{{a}, 0}, {{b}}} located by exact extension search.
std::size_t wiener_pair(const MetricSetStructure& m, std::size_t a, std::size_t b);

// Builds the nested pair terms over a base metric and compares
// d(<a,b>,<c,f>) with max(d(a,c), d(b,f)) using hausdorff alone.
struct PairLawResult {
    std::size_t quadruples = 0;
    std::size_t failures = 0;
};
PairLawResult wiener_pair_oracle(const FinMetric& base);

struct RussellResult {
    std::size_t element = 0;
    Rational e_value;    // e(a_r, a_r)
    Rational phi_value;  // 1 - e(a_r, a_r)
    bool satisfied = false;
};
// a_r = exc{x : 1 - e(x,x) | r, 1}.
RussellResult russell_gap(const MetricSetStructure& m, const Rational& r);
// In an L_e structure, with the contract loosened by slack (a certificate eps).
RussellResult russell_gap(const LeStructure& n, const Rational& r, const Rational& slack = Rational(0));

// Minimum distance between distinct members; 1 with at most one member.
std::vector<Rational> discreteness_spectrum(const MetricSetStructure& m);

struct ChainRow {
    Rational chn;
    bool chain = false;
    bool well_ordered = false;
    Rational dis;
};
std::vector<ChainRow> chain_report(const MetricSetStructure& m);

// ---------------------------------------------------------------------------
// Test material.

// Exact structure of the given size: Quine atoms under a random rational
// metric (when atoms > 0) plus sets of earlier elements, distances by Hausdorff.
MetricSetStructure random_exact_structure(std::mt19937_64& rng, std::size_t size, std::size_t atoms);

// Exact: Quine atom q, the empty set, and b = {empty, m}, m = {empty, b}
// with d(b,m) = t; e(b,b) = t.
MetricSetStructure quine_cycle_structure(const Rational& t);

// Random rational metric on n points (shortest paths over random weights).
FinMetric random_metric(std::mt19937_64& rng, std::size_t n, std::int64_t denominator = 12);

// Fixed formula corpora.
std::vector<std::string> corpus_sq();
std::vector<std::string> corpus_e();

}  // namespace mse
