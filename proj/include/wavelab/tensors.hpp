// Sparse coefficient tensors for quadratic/cubic gradient nonlinearities
// F(du) acting on an N-component field in 2+1 dimensions, together with
// their reduced forms on the unit circle.
//
// Derivative slots are indexed a in {0,1,2} with a=0 the time derivative.
// Component indices are 0-based in code; file formats use 1-based component
// indices (see io.hpp).

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace wavelab {

// Unit direction on S^1, stored by angle so the unit length never drifts.
// omega_hat() is the extended vector (-1, w1, w2) contracted against the
// time/space derivative slots of the tensors.
class Direction {
public:
    explicit Direction(double theta);

    double theta() const { return theta_; }
    double omega(int i) const { return hat_[i]; } // i in {1,2}
    const std::array<double, 3>& omega_hat() const { return hat_; }

private:
    double theta_;
    std::array<double, 3> hat_;
};

// One gradient sample: p(a, j) = d_a u_j. Stored a-major, length 3N.
class GradientVector {
public:
    explicit GradientVector(int n_components);

    int n_components() const { return n_; }
    double& at(int a, int j) { return p_[a * n_ + j]; }
    double at(int a, int j) const { return p_[a * n_ + j]; }
    const double* data() const { return p_.data(); }

    // p(a, j) = omega_hat[a] * y[j]; the substitution that turns a plain
    // evaluation into a reduced one.
    static GradientVector outer(const Direction& omega, std::span<const double> y);

private:
    int n_;
    std::vector<double> p_;
};

struct QuadEntry {
    int j, k, l; // component indices, 0-based
    int a, b;    // derivative indices in {0,1,2}
    double value;
};

struct CubicEntry {
    int j, k, l, m;
    int a, b, c;
    double value;
};

// Sparse tensor B with F^q_j = sum B_{jkl}^{ab} (d_a u_k)(d_b u_l).
// Canonical form: entries sorted by index tuple, duplicates summed,
// exact zeros dropped. Construction validates all indices and throws
// std::invalid_argument naming the offending entry ordinal.
class QuadraticTensor {
public:
    QuadraticTensor() = default;
    QuadraticTensor(int n_components, std::vector<QuadEntry> entries);

    int n_components() const { return n_; }
    const std::vector<QuadEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    double magnitude() const { return magnitude_; } // sum of |value|

private:
    int n_ = 0;
    std::vector<QuadEntry> entries_;
    double magnitude_ = 0.0;
};

// Sparse tensor C with F^c_j = sum C_{jklm}^{abc} (d_a u_k)(d_b u_l)(d_c u_m).
class CubicTensor {
public:
    CubicTensor() = default;
    CubicTensor(int n_components, std::vector<CubicEntry> entries);

    int n_components() const { return n_; }
    const std::vector<CubicEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    double magnitude() const { return magnitude_; }

private:
    int n_ = 0;
    std::vector<CubicEntry> entries_;
    double magnitude_ = 0.0;
};

// Full nonlinearity F = F^q + F^c. Higher-order remainders are not modeled.
struct SystemSpec {
    int n_components = 1;
    QuadraticTensor quadratic;
    CubicTensor cubic;

    SystemSpec() = default;
    SystemSpec(int n, QuadraticTensor q, CubicTensor c);
};

// Plain evaluations at a gradient sample.
std::vector<double> eval_quadratic(const QuadraticTensor& b, const GradientVector& p);
std::vector<double> eval_cubic(const CubicTensor& c, const GradientVector& p);

// Reduced evaluations: derivative slots contracted with omega_hat.
std::vector<double> eval_reduced_quadratic(const QuadraticTensor& b, const Direction& omega,
                                           std::span<const double> y);
std::vector<double> eval_reduced_cubic(const CubicTensor& c, const Direction& omega,
                                       std::span<const double> y);

// Jacobian dF^{c,red}_j/dY_k at (omega, y); exact polynomial differentiation.
// Row-major N x N.
std::vector<double> grad_reduced_cubic(const CubicTensor& c, const Direction& omega,
                                       std::span<const double> y);

// Allocation-free variants used by grid sweeps and integrators. `out` must
// hold n_components (or n^2 for the Jacobian) doubles; results are written,
// not accumulated.
void eval_reduced_quadratic_into(const QuadraticTensor& b, const std::array<double, 3>& omega_hat,
                                 const double* y, double* out);
void eval_reduced_cubic_into(const CubicTensor& c, const std::array<double, 3>& omega_hat,
                             const double* y, double* out);
void grad_reduced_cubic_into(const CubicTensor& c, const std::array<double, 3>& omega_hat,
                             const double* y, double* out);

} // namespace wavelab
