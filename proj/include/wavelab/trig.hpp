// Finite trigonometric polynomials sum_n (c_n cos(n t) + s_n sin(n t)).

#pragma once

#include <vector>

namespace wavelab {

struct Harmonic {
    int n;
    double c; // cosine coefficient
    double s; // sine coefficient (ignored and kept 0 for n = 0)
};

class TrigPoly {
public:
    TrigPoly() = default; // identically zero
    explicit TrigPoly(std::vector<Harmonic> harmonics);

    static TrigPoly constant(double c);

    double eval(double theta) const;
    int max_degree() const;
    bool is_zero() const { return harmonics_.empty(); }
    const std::vector<Harmonic>& harmonics() const { return harmonics_; }

    // Coefficient-wise comparison (canonical forms compared term by term).
    bool same_coefficients(const TrigPoly& other, double tol) const;

private:
    std::vector<Harmonic> harmonics_; // sorted by n, no duplicates, no zero terms
};

} // namespace wavelab
