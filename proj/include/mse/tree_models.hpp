#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mse/metric.hpp"
#include "mse/semantics.hpp"

namespace mse {

struct CapExceeded : std::runtime_error {
    CapExceeded(const std::string& what, std::string predicted)
        : std::runtime_error(what + " (predicted " + predicted + ")"), predicted(std::move(predicted)) {}
    std::string predicted;
};

struct HeightError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

constexpr std::uint64_t kDefaultCap = std::uint64_t(1) << 17;

// Number of non-atom elements of T_k(Q) with |Q| = atoms, as text
// ("65536", or "2^(...)" once it no longer fits).
std::string predicted_count(std::size_t atoms, std::size_t k);

// ---------------------------------------------------------------------------

struct Gauge {
    std::vector<Rational> s;  // s[0..h]
    Rational eps;             // least eps with s(b) <= s(b+1) + eps for all b
    std::size_t height() const { return s.size() - 1; }
    std::size_t last_positive() const;
    bool smooth() const;  // s(0) = s(1) and s(h) = 0
};

// Validates: non-empty, values in [0,1], non-increasing, s(0) = 1.
Gauge make_gauge(std::vector<Rational> s);
// s_n(i) = min(max(1 - (i-1)/n, 0), 1), i = 0..h; needs h >= n + 2.
Gauge pseudo_finite_gauge(int n, std::size_t h);
// "sn:N" (height N+2), "sn:N:H", or a comma list of rationals.
Gauge parse_gauge(const std::string& text);
std::string gauge_text(const Gauge& g);

// ---------------------------------------------------------------------------
// Fully enumerated T_k(Q) layers. A level-k node id encodes its content:
// bits [0, |Q|) are the atoms it holds, bit |Q| + j holds node j of level k-1.
// Level 0 is the single empty sequence.

class TreeLevels {
public:
    TreeLevels(std::size_t atoms, std::size_t height, std::uint64_t cap = kDefaultCap);
    std::size_t atoms() const { return atoms_; }
    std::size_t height() const { return height_; }
    std::uint64_t count(std::size_t k) const { return counts_.at(k); }
    std::uint64_t qmask(std::uint64_t id) const { return id & ((std::uint64_t(1) << atoms_) - 1); }
    std::uint64_t chmask(std::uint64_t id) const { return id >> atoms_; }
    // level k -> level k-1; atoms are kept, children truncated elementwise
    std::uint64_t trunc(std::size_t k, std::uint64_t id) const;
    // nodes of level k whose truncation is d (level k-1)
    const std::vector<std::uint64_t>& preimages(std::size_t k, std::uint64_t d) const;

private:
    std::size_t atoms_, height_;
    std::vector<std::uint64_t> counts_;
    std::vector<std::vector<std::uint64_t>> trunc_;              // [k][id], k >= 1
    std::vector<std::vector<std::vector<std::uint64_t>>> pre_;  // [k][d]
};

// Explicit universe: atoms 0..|Q|-1 followed by the level-h nodes.
class TreeUniverse {
public:
    TreeUniverse(FinMetric q, std::size_t h, std::uint64_t cap = kDefaultCap);

    const FinMetric& atom_metric() const { return q_; }
    const TreeLevels& levels() const { return levels_; }
    std::size_t height() const { return levels_.height(); }
    std::size_t atoms() const { return q_.size(); }
    std::size_t size() const { return atoms() + levels_.count(height()); }
    bool is_atom(std::size_t x) const { return x < atoms(); }
    std::uint64_t node_id(std::size_t x) const { return x - atoms(); }
    std::size_t element_of_node(std::uint64_t id) const { return atoms() + id; }

    // x at height h -> element at height h-1 (a universe built one lower is not
    // needed: the result is reported as a level-(h-1) node id, atoms unchanged)
    std::uint64_t trunc_node(std::uint64_t id) const { return levels_.trunc(height(), id); }

    bool mem(std::size_t x, std::size_t y) const;
    IndexSet members(std::size_t y) const;
    IndexSet tc(std::size_t x) const;

    // Exact recursion on explicit elements; universes of at most kExplicitLimit elements.
    static constexpr std::size_t kExplicitLimit = 300;
    Rational rho(std::size_t beta, std::size_t x, std::size_t y) const;
    Rational e_beta(std::size_t beta, std::size_t x, std::size_t y) const;
    Rational rho_s(std::size_t x, std::size_t y, const Gauge& s) const;
    Rational e_s(std::size_t x, std::size_t y, const Gauge& s) const;

private:
    void require_explicit() const;
    const std::vector<Rational>& rho_table(std::size_t beta) const;

    FinMetric q_;
    TreeLevels levels_;
    mutable std::vector<IndexSet> members_;
    mutable std::vector<std::vector<Rational>> rho_;  // [beta][x * n + y]
};

TreeUniverse enumerate_universe(const FinMetric& q, std::size_t h, std::uint64_t cap = kDefaultCap);

// Element coding V_sigma (pure sets, no atoms); needs sigma + 1 < h.
std::size_t v_sigma(std::size_t sigma, const TreeUniverse& u);

// Quotient computed straight from the definitions on an explicit universe:
// elements with identical e_s profiles (both argument positions) are merged.
struct ExplicitQuotient {
    LeStructure le;
    std::vector<std::size_t> class_of;        // element -> class
    std::vector<std::size_t> representative;  // class -> least element
};
ExplicitQuotient explicit_quotient(const TreeUniverse& u, const Gauge& s);

// ---------------------------------------------------------------------------
// Quotient by d_{e,s} = 0 without materializing T_h. Two elements are merged
// exactly when they have the same rank-(B+1) type, B the last index with
// s(B) > 0: the type of rank 0 is tc(x) cut to Q, rank r+1 the set of rank-r
// types of the members. Needs T_{h-1} enumerable.

struct QuineRow {
    std::size_t atom = 0;
    bool self_singleton = false;
    Rational e_self;
};
struct QuinePair {
    std::size_t a = 0, b = 0;
    Rational d, d_e, gap;  // gap = |d_e - d|
};
struct QuineReport {
    bool pass = false;
    bool enumerated = false;  // also cross-checked on the class matrix
    Rational eps;
    std::vector<QuineRow> atoms;
    std::vector<QuinePair> pairs;
};

class QuotientModel {
public:
    QuotientModel(const FinMetric& q, std::size_t h, const Gauge& s, std::uint64_t cap = kDefaultCap);
    ~QuotientModel();
    QuotientModel(QuotientModel&&) noexcept;
    QuotientModel& operator=(QuotientModel&&) noexcept;

    const Gauge& gauge() const;
    std::size_t height() const;
    std::size_t top_rank() const;  // B + 1
    std::size_t type_count(std::size_t r) const;  // realized rank-r types, r <= B

    bool enumerated() const;  // false when the class set is too large to list
    std::size_t size() const;  // throws CapExceeded when not enumerated
    Rational e(std::size_t i, std::size_t j) const;
    Rational rho_s(std::size_t i, std::size_t j) const;
    std::vector<std::size_t> atom_classes() const;
    std::string class_label(std::size_t i) const;
    LeStructure le(std::size_t limit = 4096) const;

    // Class of an element of an explicit universe of the same Q and height.
    std::size_t class_of(const TreeUniverse& u, std::size_t x) const;

    QuineReport quine_atoms_check() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

QuotientModel quotient_model(const FinMetric& q, std::size_t h, const Gauge& s, std::uint64_t cap = kDefaultCap);
QuineReport quine_atoms_check(const FinMetric& q, std::size_t h, const Gauge& s, std::uint64_t cap = kDefaultCap);

// ---------------------------------------------------------------------------
// Certificate for an emitted model.

struct ExcisionRow {
    std::string formula;
    Rational v, bound, value;
    std::string mode;  // exhaustive | sampled
};
struct AxiomReport {
    Rational eps;
    Rational hext_defect;
    std::vector<ExcisionRow> excision;
    bool pass = false;
};
// Excision scan is exhaustive up to 64 elements, sampled (seeded) above.
AxiomReport certify(const LeStructure& n, const Gauge& s, const std::vector<std::string>& e_corpus,
                    std::uint64_t seed = 1);
// Same with the slack given directly (eps = 0 demands an exact model).
AxiomReport certify(const LeStructure& n, const Rational& eps, const std::vector<std::string>& e_corpus,
                    std::uint64_t seed = 1);
std::vector<std::string> certificate_corpus();  // e(x,y), 1-e(x,x), e(x,y)+e(y,x), chn via to_e
std::string certificate_json(const AxiomReport& r, const Gauge& s);

// ---------------------------------------------------------------------------
// Hereditarily finite sets, hash-consed, with their codes in T_k(empty).

class HfPool {
public:
    HfPool();
    std::size_t empty() const { return 0; }
    std::size_t make(std::vector<std::size_t> members);
    const std::vector<std::size_t>& members(std::size_t a) const { return sets_.at(a); }
    std::size_t size() const { return sets_.size(); }
    std::size_t v(std::size_t sigma);  // V_sigma
    std::size_t power(std::size_t a);
    // code of the set in T_k(empty), interned per level; equal codes = equal k-truncations
    std::size_t code(std::size_t a, std::size_t k);
    std::size_t code_width(std::size_t a, std::size_t k);  // number of children of the code

private:
    std::vector<std::vector<std::size_t>> sets_;
    std::map<std::vector<std::size_t>, std::size_t> index_;
    std::vector<std::map<std::vector<std::size_t>, std::size_t>> level_index_;
    std::vector<std::vector<std::vector<std::size_t>>> level_sets_;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> code_memo_;
};

// Sub-structure of the gauge-s quotient of T_h(empty) on the given sets:
// d = rho_s (read off the first level where the codes differ),
// membership = the tree membership x|(h-1) in y(h-1).
MetricSetStructure hf_substructure(HfPool& pool, const std::vector<std::size_t>& sets, std::size_t h,
                                   const Gauge& s);

}  // namespace mse
