#include "wavelab/trig.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wavelab {

TrigPoly::TrigPoly(std::vector<Harmonic> harmonics) : harmonics_(std::move(harmonics)) {
    for (auto& h : harmonics_) {
        if (h.n < 0) throw std::invalid_argument("TrigPoly: harmonic index must be >= 0");
        if (!std::isfinite(h.c) || !std::isfinite(h.s))
            throw std::invalid_argument("TrigPoly: non-finite coefficient");
        if (h.n == 0) h.s = 0.0;
    }
    std::sort(harmonics_.begin(), harmonics_.end(),
              [](const Harmonic& a, const Harmonic& b) { return a.n < b.n; });
    std::vector<Harmonic> merged;
    for (const auto& h : harmonics_) {
        if (!merged.empty() && merged.back().n == h.n) {
            merged.back().c += h.c;
            merged.back().s += h.s;
        } else {
            merged.push_back(h);
        }
    }
    std::erase_if(merged, [](const Harmonic& h) { return h.c == 0.0 && h.s == 0.0; });
    harmonics_ = std::move(merged);
}

TrigPoly TrigPoly::constant(double c) { return TrigPoly({{0, c, 0.0}}); }

double TrigPoly::eval(double theta) const {
    double v = 0.0;
    for (const auto& h : harmonics_) v += h.c * std::cos(h.n * theta) + h.s * std::sin(h.n * theta);
    return v;
}

int TrigPoly::max_degree() const { return harmonics_.empty() ? 0 : harmonics_.back().n; }

bool TrigPoly::same_coefficients(const TrigPoly& other, double tol) const {
    std::size_t i = 0, j = 0;
    while (i < harmonics_.size() || j < other.harmonics_.size()) {
        const Harmonic* a = i < harmonics_.size() ? &harmonics_[i] : nullptr;
        const Harmonic* b = j < other.harmonics_.size() ? &other.harmonics_[j] : nullptr;
        if (a && b && a->n == b->n) {
            if (std::abs(a->c - b->c) > tol || std::abs(a->s - b->s) > tol) return false;
            ++i, ++j;
        } else if (a && (!b || a->n < b->n)) {
            if (std::abs(a->c) > tol || std::abs(a->s) > tol) return false;
            ++i;
        } else {
            if (std::abs(b->c) > tol || std::abs(b->s) > tol) return false;
            ++j;
        }
    }
    return true;
}

} // namespace wavelab
