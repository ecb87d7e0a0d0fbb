#include "mse/metric.hpp"

#include <stdexcept>

namespace mse {

FinMetric::FinMetric(std::size_t n, std::vector<Rational> entries) : n_(n), d_(std::move(entries)) {
    if (d_.size() != n * n) throw std::invalid_argument("metric: expected n*n entries");
}

Rational pointset_dist(std::size_t x, const IndexSet& a, const FinMetric& m) {
    if (a.empty()) return Rational(1);
    Rational best = m(x, a.front());
    for (std::size_t y : a) best = rmin(best, m(x, y));
    return best;
}

Rational hausdorff(const IndexSet& a, const IndexSet& b, const FinMetric& m) {
    if (a.empty() && b.empty()) return Rational(0);
    if (a.empty() || b.empty()) return Rational(1);
    Rational h(0);
    for (std::size_t x : a) h = rmax(h, pointset_dist(x, b, m));
    for (std::size_t y : b) h = rmax(h, pointset_dist(y, a, m));
    return h;
}

Rational metric_defect(const FinMetric& m) {
    const std::size_t n = m.size();
    Rational worst(0);
    for (std::size_t i = 0; i < n; ++i) {
        worst = rmax(worst, abs(m(i, i)));
        for (std::size_t j = 0; j < n; ++j) {
            worst = rmax(worst, abs(m(i, j) - m(j, i)));
            for (std::size_t k = 0; k < n; ++k) worst = rmax(worst, m(i, k) - m(i, j) - m(j, k));
        }
    }
    return worst;
}

}  // namespace mse
