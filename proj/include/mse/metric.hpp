#pragma once

#include <cstddef>
#include <vector>

#include "mse/rational.hpp"

namespace mse {

using IndexSet = std::vector<std::size_t>;

// Finite [0,1]-valued (pseudo-)metric, row-major.
class FinMetric {
public:
    FinMetric() = default;
    explicit FinMetric(std::size_t n) : n_(n), d_(n * n, Rational(0)) {}
    FinMetric(std::size_t n, std::vector<Rational> entries);

    std::size_t size() const { return n_; }
    const Rational& operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, const Rational& v) { d_[i * n_ + j] = v; }
    // sets both (i,j) and (j,i)
    void set_sym(std::size_t i, std::size_t j, const Rational& v) {
        set(i, j, v);
        set(j, i, v);
    }
    const std::vector<Rational>& entries() const { return d_; }

    friend bool operator==(const FinMetric&, const FinMetric&) = default;

private:
    std::size_t n_ = 0;
    std::vector<Rational> d_;
};

// [0,1] Hausdorff distance: both empty -> 0, exactly one empty -> 1.
Rational hausdorff(const IndexSet& a, const IndexSet& b, const FinMetric& m);

// min over a of d(x,.); 1 when a is empty.
Rational pointset_dist(std::size_t x, const IndexSet& a, const FinMetric& m);

// 0 iff m is a pseudo-metric; otherwise the largest violation magnitude
// (asymmetry, nonzero diagonal, triangle excess).
Rational metric_defect(const FinMetric& m);

}  // namespace mse
