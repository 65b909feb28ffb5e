// Shared builders and generators for the test suites: the example systems
// exercised throughout (null-form combinations, the two-component cubic
// family, the coupled system with a direction-dependent weight, the scalar
// dissipator) and seeded random tensors.

#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "wavelab/conditions.hpp"
#include "wavelab/tensors.hpp"

namespace testutil {

using namespace wavelab;

// ---- null forms -----------------------------------------------------------

inline QuadraticTensor q0_tensor(int n, int j, int k, int l, double coeff = 1.0) {
    return QuadraticTensor(n, {{j, k, l, 0, 0, coeff},
                               {j, k, l, 1, 1, -coeff},
                               {j, k, l, 2, 2, -coeff}});
}

inline QuadraticTensor qab_tensor(int n, int j, int k, int l, int a, int b, double coeff = 1.0) {
    return QuadraticTensor(n, {{j, k, l, a, b, coeff}, {j, k, l, b, a, -coeff}});
}

// (d_c u_m) Q0(u_k, u_l)
inline CubicTensor cubic_q0_tensor(int n, int j, int k, int l, int m, int c, double coeff = 1.0) {
    return CubicTensor(n, {{j, k, l, m, 0, 0, c, coeff},
                           {j, k, l, m, 1, 1, c, -coeff},
                           {j, k, l, m, 2, 2, c, -coeff}});
}

// ---- canonical example systems --------------------------------------------

// N=1 cubic dissipator F = -(dt u)^3 (reduced form Y^3) and its sign flip.
inline CubicTensor dissipator_1d(double sign = -1.0) {
    return CubicTensor(1, {{0, 0, 0, 0, 0, 0, 0, sign}});
}

// N=1 quadratic F = (dt u)^2, the classic null-condition violator.
inline QuadraticTensor violator_quadratic() { return QuadraticTensor(1, {{0, 0, 0, 0, 0, 1.0}}); }

// Two-component cubic family with reduced form (a Y1^3 - b Y1 Y2^2, Y2^3):
//   F1 = -a (dt u1)^3 + b (dt u1)(dt u2)^2,  F2 = -(dt u2)^3.
inline CubicTensor ab_family(double a, double b) {
    return CubicTensor(2, {{0, 0, 0, 0, 0, 0, 0, -a},
                           {0, 0, 1, 1, 0, 0, 0, b},
                           {1, 1, 1, 1, 0, 0, 0, -1.0}});
}

// Diagonal weight diag(1, 1 + |b|^2/(2a)) matched to ab_family with a > 0.
inline WeightMatrix ab_family_weight(double a, double b) {
    return WeightMatrix::constant_diagonal({1.0, 1.0 + b * b / (2.0 * a)});
}

// Two-component system whose strict dissipativity needs a non-diagonal,
// direction-dependent weight.
inline CubicTensor coupled_system() {
    return CubicTensor(2, {
                              {0, 0, 0, 0, 0, 0, 0, -1.0},
                              {0, 1, 1, 1, 0, 0, 0, -1.0},
                              {0, 0, 0, 0, 1, 1, 2, -0.5},
                              {0, 0, 0, 1, 1, 1, 2, 0.5},
                              {0, 1, 1, 0, 1, 1, 2, 0.5},
                              {0, 1, 1, 1, 1, 1, 2, -0.5},
                              {1, 0, 0, 0, 0, 0, 0, 1.0},
                              {1, 0, 0, 1, 0, 0, 0, -3.0},
                              {1, 0, 0, 0, 1, 2, 1, 0.5},
                              {1, 0, 0, 1, 1, 2, 1, -0.5},
                              {1, 1, 1, 0, 1, 2, 1, -0.5},
                              {1, 1, 1, 1, 1, 2, 1, 0.5},
                          });
}

// Its weight 4 [[2-w, 1-w], [1-w, 2-w]] with w = cos^2(theta) sin(theta)
// = (sin(theta) + sin(3 theta))/4.
inline WeightMatrix coupled_weight() {
    const TrigPoly diag({{0, 8.0, 0.0}, {1, 0.0, -1.0}, {3, 0.0, -1.0}});
    const TrigPoly off({{0, 4.0, 0.0}, {1, 0.0, -1.0}, {3, 0.0, -1.0}});
    return WeightMatrix(2, {{diag, off}, {off, diag}});
}

// Hand-evaluated reduced form of coupled_system, for cross-checks.
inline std::vector<double> coupled_reduced(double theta, double y1, double y2) {
    const double w = std::cos(theta) * std::cos(theta) * std::sin(theta);
    const double cross = 0.5 * w * (y1 * y1 - y2 * y2) * (y1 - y2);
    return {y1 * y1 * y1 + y2 * y2 * y2 - cross,
            -y1 * y1 * y1 + 3.0 * y1 * y1 * y2 + cross};
}

// Hand-evaluated Y . A(omega) F^{c,red} of the coupled system:
// (3 - 2w)(Y1+Y2)^4 + (Y1-Y2)^4.
inline double coupled_g(double theta, double y1, double y2) {
    const double w = std::cos(theta) * std::cos(theta) * std::sin(theta);
    const double p = y1 + y2, q = y1 - y2;
    return (3.0 - 2.0 * w) * p * p * p * p + q * q * q * q;
}

// ---- random generators (deterministic per seed) ----------------------------

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline std::vector<double> random_vector(std::mt19937_64& rng, int n, double amp = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform(rng, -amp, amp);
    return v;
}

inline QuadraticTensor random_quadratic(std::mt19937_64& rng, int n, int max_entries = 6) {
    std::uniform_int_distribution<int> comp(0, n - 1), deriv(0, 2), count(1, max_entries);
    std::vector<QuadEntry> es;
    const int k = count(rng);
    for (int i = 0; i < k; ++i)
        es.push_back({comp(rng), comp(rng), comp(rng), deriv(rng), deriv(rng),
                      uniform(rng, -2.0, 2.0)});
    return QuadraticTensor(n, std::move(es));
}

inline CubicTensor random_cubic(std::mt19937_64& rng, int n, int max_entries = 6) {
    std::uniform_int_distribution<int> comp(0, n - 1), deriv(0, 2), count(1, max_entries);
    std::vector<CubicEntry> es;
    const int k = count(rng);
    for (int i = 0; i < k; ++i)
        es.push_back({comp(rng), comp(rng), comp(rng), comp(rng), deriv(rng), deriv(rng),
                      deriv(rng), uniform(rng, -2.0, 2.0)});
    return CubicTensor(n, std::move(es));
}

// Random combination of Q0 and Q_ab terms; satisfies the quadratic null
// condition by construction.
inline QuadraticTensor random_null_combination(std::mt19937_64& rng, int n, int terms = 4) {
    std::uniform_int_distribution<int> comp(0, n - 1), pick(0, 3);
    constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    std::vector<QuadEntry> es;
    for (int i = 0; i < terms; ++i) {
        const int j = comp(rng), k = comp(rng), l = comp(rng);
        const double c = uniform(rng, -2.0, 2.0);
        const int which = pick(rng);
        if (which == 0) {
            es.push_back({j, k, l, 0, 0, c});
            es.push_back({j, k, l, 1, 1, -c});
            es.push_back({j, k, l, 2, 2, -c});
        } else {
            const auto& ab = pairs[which - 1];
            es.push_back({j, k, l, ab[0], ab[1], c});
            es.push_back({j, k, l, ab[1], ab[0], -c});
        }
    }
    return QuadraticTensor(n, std::move(es));
}

// Random combination of (d_c u_m) Q0/Q_ab(u_k, u_l); satisfies the cubic
// null condition by construction.
inline CubicTensor random_cubic_null_combination(std::mt19937_64& rng, int n, int terms = 4) {
    std::uniform_int_distribution<int> comp(0, n - 1), deriv(0, 2), pick(0, 3);
    constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    std::vector<CubicEntry> es;
    for (int i = 0; i < terms; ++i) {
        const int j = comp(rng), k = comp(rng), l = comp(rng), m = comp(rng), c = deriv(rng);
        const double v = uniform(rng, -2.0, 2.0);
        const int which = pick(rng);
        if (which == 0) {
            es.push_back({j, k, l, m, 0, 0, c, v});
            es.push_back({j, k, l, m, 1, 1, c, -v});
            es.push_back({j, k, l, m, 2, 2, c, -v});
        } else {
            const auto& ab = pairs[which - 1];
            es.push_back({j, k, l, m, ab[0], ab[1], c, v});
            es.push_back({j, k, l, m, ab[1], ab[0], c, -v});
        }
    }
    return CubicTensor(n, std::move(es));
}

} // namespace testutil
