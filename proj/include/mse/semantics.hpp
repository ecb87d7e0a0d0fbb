#pragma once

#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mse/formula.hpp"
#include "mse/metric.hpp"

namespace mse {

using Assignment = std::map<std::string, std::size_t>;

struct EmptyStructure : std::invalid_argument {
    EmptyStructure() : std::invalid_argument("structures must be non-empty") {}
};

struct IllTyped : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A metric space with a membership relation; mem(i,j) means i is in j.
class MetricSetStructure {
public:
    MetricSetStructure(FinMetric d, std::vector<char> mem);

    std::size_t size() const { return d_.size(); }
    const FinMetric& metric() const { return d_; }
    bool mem(std::size_t i, std::size_t j) const { return mem_[i * size() + j] != 0; }
    const IndexSet& ext(std::size_t j) const { return ext_[j]; }
    const std::vector<char>& mem_matrix() const { return mem_; }
    // max over pairs of |d(a,b) - hausdorff(ext a, ext b)|
    const Rational& hext_defect() const { return hext_; }
    bool exact() const { return hext_.is_zero(); }

    friend bool operator==(const MetricSetStructure& a, const MetricSetStructure& b) {
        return a.d_ == b.d_ && a.mem_ == b.mem_;
    }

private:
    FinMetric d_;
    std::vector<char> mem_;
    std::vector<IndexSet> ext_;
    Rational hext_;
};

class LeStructure {
public:
    LeStructure(std::size_t n, std::vector<Rational> e);
    std::size_t size() const { return n_; }
    const Rational& e(std::size_t i, std::size_t j) const { return e_[i * n_ + j]; }
    const std::vector<Rational>& entries() const { return e_; }
    friend bool operator==(const LeStructure&, const LeStructure&) = default;

private:
    std::size_t n_;
    std::vector<Rational> e_;
};

// ---------------------------------------------------------------------------
// Real-valued evaluation. The compiled form memoizes every quantifier node
// on the values of its free variables, so repeated evaluation over many
// assignments of one structure is cheap. Results are exact and independent
// of evaluation order.

class RealEvaluator {
public:
    // `order` fixes which variables the value vector passed to operator()
    // binds; it must cover the formula's free variables.
    RealEvaluator(const RF& f, const MetricSetStructure& m, std::vector<std::string> order);
    RealEvaluator(const RF& f, const LeStructure& n, std::vector<std::string> order);
    ~RealEvaluator();
    RealEvaluator(RealEvaluator&&) noexcept;

    Rational operator()(const std::vector<std::size_t>& values);
    const std::vector<std::string>& order() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

Rational eval_sq(const RF& f, const MetricSetStructure& m, const Assignment& rho);
Rational eval_e(const RF& f, const LeStructure& n, const Assignment& rho);

// Calls fn for every assignment of `vars` into [0,n).
void for_each_assignment(const std::vector<std::string>& vars, std::size_t n,
                         const std::function<void(const std::vector<std::size_t>&)>& fn);

// ---------------------------------------------------------------------------
// Lukasiewicz evaluation: (x in y) = 1 - e(x,y), A -> B = min(1-A+B, 1),
// exists = sup, forall = inf; macros by their defining value.

class LukEvaluator {
public:
    LukEvaluator(const LF& f, const LeStructure& n, std::vector<std::string> order);
    ~LukEvaluator();
    LukEvaluator(LukEvaluator&&) noexcept;
    Rational operator()(const std::vector<std::size_t>& values);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

Rational eval_luk(const LF& f, const LeStructure& n, const Assignment& rho);

// Quantifier-free evaluation with atoms valued by a callback (used for
// certifying McNaughton terms at arbitrary points of [0,1]^n).
Rational eval_luk_prop(const LF& f, const std::function<Rational(const LNode&)>& atom);

// ---------------------------------------------------------------------------
// Typed discrete formulas.

struct DisContext {
    std::map<std::string, std::size_t> witness;  // type_str -> element realizing it
    Assignment rho;                              // free variables
    std::map<std::string, TE> var_type;          // declared types of free variables
};

bool eval_dis(const DF& f, const MetricSetStructure& m, const DisContext& ctx);

// ---------------------------------------------------------------------------

FinMetric d_e_matrix(const LeStructure& n);
LeStructure induced_le(const MetricSetStructure& m);

struct Completion {
    MetricSetStructure structure;
    std::vector<std::size_t> class_of;        // element -> class
    std::vector<std::size_t> representative;  // class -> smallest element
};
// Quotient by d_e = 0; metric d_e, mem(i,j) iff e(rep i, rep j) = 0.
Completion completion(const LeStructure& n);

// ---------------------------------------------------------------------------
// Model files: {"kind":"le","size":n,"e":[...]} or
// {"kind":"mss","size":n,"d":[...],"mem":[...]}; entries are rational strings.

std::string to_json(const LeStructure& n);
std::string to_json(const MetricSetStructure& m);
struct LoadedModel {
    std::unique_ptr<LeStructure> le;
    std::unique_ptr<MetricSetStructure> mss;
};
LoadedModel model_from_json(const std::string& text);

}  // namespace mse
