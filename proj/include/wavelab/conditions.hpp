// Structural conditions on the nonlinearity: the quadratic and cubic null
// conditions (exact trigonometric-polynomial identities), the Agemi
// positivity condition with a direction-dependent weight matrix, its strict
// variant, and the dissipation constant extracted from the strict form.

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "wavelab/tensors.hpp"
#include "wavelab/trig.hpp"

namespace wavelab {

enum class Verdict { holds, fails, holds_strictly, inconclusive };

std::string to_string(Verdict v);

struct Witness {
    double theta = 0.0;
    std::vector<double> y;
    double value = 0.0; // tested quantity at the witness point
};

struct ConditionReport {
    Verdict verdict = Verdict::inconclusive;
    double margin = 0.0; // signed minimum of the tested quantity over the test set
    std::optional<Witness> witness;
    std::string method; // "exact-identity" or "grid"
    int n_theta = 0;
    int n_y = 0;
    double scale = 1.0; // normalization applied to margin before thresholding

    bool satisfied() const { return verdict == Verdict::holds || verdict == Verdict::holds_strictly; }
};

struct SweepOptions {
    int n_theta = 512;
    int n_y = 512;
    double identity_tol = 1e-12; // relative, identity checks
    double agemi_tol = 1e-9;     // allowed negative slack, inequality checks
    double strict_margin = 1e-6; // normalized threshold for strict positivity
    double pd_tol = 1e-10;       // smallest acceptable eigenvalue
};

// N x N symmetric matrix function of the circle angle; entries are finite
// trigonometric polynomials. Symmetry is enforced coefficient-wise at
// construction.
class WeightMatrix {
public:
    WeightMatrix(int n, std::vector<std::vector<TrigPoly>> entries);

    static WeightMatrix identity(int n);
    static WeightMatrix constant_diagonal(std::vector<double> diag);

    int size() const { return n_; }
    int max_degree() const { return max_degree_; }
    const TrigPoly& entry(int j, int k) const { return entries_[j][k]; }

    void eval(double theta, Eigen::MatrixXd& out) const;
    Eigen::MatrixXd eval(double theta) const;

private:
    int n_;
    std::vector<std::vector<TrigPoly>> entries_;
    int max_degree_ = 0;
};

struct PositiveDefiniteReport {
    Verdict verdict = Verdict::inconclusive;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    double m0 = 0.0; // max(lambda_max, 1/lambda_min) when positive definite
    double theta_at_min = 0.0;
    int n_theta = 0;
};

// Exact identity checks. The coefficient of each Y-monomial is a
// trigonometric polynomial of known degree (2 for quadratic, 3 for cubic
// contractions), so interpolation at 5 resp. 7 equally spaced angles decides
// the identity up to round-off.
ConditionReport check_null_quadratic(const QuadraticTensor& b, const SweepOptions& opt = {});
ConditionReport check_null_cubic(const CubicTensor& c, const SweepOptions& opt = {});

// Least-squares expansion of a quadratic nonlinearity over the null forms
// Q0(u_k,u_l) and Q_ab(u_k,u_l). Succeeds exactly when the quadratic null
// condition holds. Coefficients are the minimum-norm representative (the
// spanning family is linearly dependent).
struct NullFormDecomposition {
    bool success = false;
    double residual = 0.0; // Frobenius residual of the symmetrized match
    int n = 0;
    std::vector<double> c0;  // [j][k][l], flattened
    std::vector<double> cab; // [j][pair][k][l], pair over (a,b) in {(0,1),(0,2),(1,2)}

    double c0_at(int j, int k, int l) const { return c0[(j * n + k) * n + l]; }
    double cab_at(int j, int pair, int k, int l) const {
        return cab[((j * 3 + pair) * n + k) * n + l];
    }
};

NullFormDecomposition decompose_null_forms(const QuadraticTensor& b);

PositiveDefiniteReport check_positive_definite(const WeightMatrix& a, int n_theta = 512,
                                               double pd_tol = 1e-10);

// Agemi condition sweep: g(theta, Y) = Y . A(omega) F^{c,red}(omega, Y) over
// a theta grid times a unit-sphere grid in Y. Verdict thresholds are applied
// to g normalized by the largest eigenvalue of A over the grid, which makes
// the verdict invariant under positive scaling of A. Requires A positive
// definite (throws std::invalid_argument otherwise).
ConditionReport check_agemi(const CubicTensor& c, const WeightMatrix& a,
                            const SweepOptions& opt = {});

// Strict variant: holds iff the normalized minimum over |Y| = 1 clears the
// strict margin.
ConditionReport check_strict(const CubicTensor& c, const WeightMatrix& a,
                             const SweepOptions& opt = {});

// min over the grid of [Y . A F^{c,red}] / (Y . A Y)^2; degree-0 homogeneous
// in Y. Requires check_strict to hold (throws std::invalid_argument).
double estimate_c0(const CubicTensor& c, const WeightMatrix& a, const SweepOptions& opt = {});

// Deterministic unit-sphere grid used by the sweeps (exposed for tests).
// N=1: {+1,-1}; N=2: n_y equally spaced angles; N>=3: hyperspherical
// product grid with n_y points per angle.
std::vector<std::vector<double>> unit_sphere_grid(int n, int n_y);

} // namespace wavelab
