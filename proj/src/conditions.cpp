#include "wavelab/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace wavelab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

// Fourier coefficients of a trig polynomial of degree <= deg from 2*deg+1
// equally spaced samples (exact by DFT orthogonality).
// Returns |coefficients| max.
double max_fourier_coefficient(std::span<const double> samples, int deg) {
    const int k = 2 * deg + 1;
    double worst = 0.0;
    double a0 = 0.0;
    for (int i = 0; i < k; ++i) a0 += samples[i];
    worst = std::abs(a0 / k);
    for (int n = 1; n <= deg; ++n) {
        double an = 0.0, bn = 0.0;
        for (int i = 0; i < k; ++i) {
            const double th = kTwoPi * i / k;
            an += samples[i] * std::cos(n * th);
            bn += samples[i] * std::sin(n * th);
        }
        worst = std::max(worst, std::abs(2.0 * an / k));
        worst = std::max(worst, std::abs(2.0 * bn / k));
    }
    return worst;
}

// Deterministic sign convention for eigenvector witnesses.
void normalize_sign(std::vector<double>& y) {
    for (double v : y) {
        if (std::abs(v) > 1e-12) {
            if (v < 0.0)
                for (double& w : y) w = -w;
            return;
        }
    }
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

} // namespace

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::holds: return "holds";
        case Verdict::fails: return "fails";
        case Verdict::holds_strictly: return "holds_strictly";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

WeightMatrix::WeightMatrix(int n, std::vector<std::vector<TrigPoly>> entries)
    : n_(n), entries_(std::move(entries)) {
    require(n_ > 0, "WeightMatrix: dimension must be positive");
    require(static_cast<int>(entries_.size()) == n_, "WeightMatrix: row count mismatch");
    for (const auto& row : entries_)
        require(static_cast<int>(row.size()) == n_, "WeightMatrix: column count mismatch");
    for (int j = 0; j < n_; ++j)
        for (int k = j + 1; k < n_; ++k)
            require(entries_[j][k].same_coefficients(entries_[k][j], 0.0),
                    "WeightMatrix: entries must be symmetric coefficient-wise");
    for (const auto& row : entries_)
        for (const auto& e : row) max_degree_ = std::max(max_degree_, e.max_degree());
}

WeightMatrix WeightMatrix::identity(int n) {
    std::vector<std::vector<TrigPoly>> e(n, std::vector<TrigPoly>(n));
    for (int j = 0; j < n; ++j) e[j][j] = TrigPoly::constant(1.0);
    return WeightMatrix(n, std::move(e));
}

WeightMatrix WeightMatrix::constant_diagonal(std::vector<double> diag) {
    const int n = static_cast<int>(diag.size());
    std::vector<std::vector<TrigPoly>> e(n, std::vector<TrigPoly>(n));
    for (int j = 0; j < n; ++j) e[j][j] = TrigPoly::constant(diag[j]);
    return WeightMatrix(n, std::move(e));
}

void WeightMatrix::eval(double theta, Eigen::MatrixXd& out) const {
    out.resize(n_, n_);
    for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k) out(j, k) = entries_[j][k].eval(theta);
}

Eigen::MatrixXd WeightMatrix::eval(double theta) const {
    Eigen::MatrixXd m;
    eval(theta, m);
    return m;
}

ConditionReport check_null_quadratic(const QuadraticTensor& b, const SweepOptions& opt) {
    ConditionReport rep;
    rep.method = "exact-identity";
    rep.scale = std::max(b.magnitude(), 0.0);
    const int n = std::max(b.n_components(), 1);
    if (b.empty()) {
        rep.verdict = Verdict::holds;
        rep.margin = 0.0;
        return rep;
    }

    // Coefficient matrices M_j(theta) with F^{q,red}_j = Y^T M_j Y, sampled
    // at the 5 interpolation angles; each entry is a trig polynomial of
    // degree <= 2.
    constexpr int kSamples = 5;
    std::vector<Eigen::MatrixXd> mats(kSamples * n);
    for (auto& m : mats) m = Eigen::MatrixXd::Zero(n, n);
    std::array<std::array<double, 3>, kSamples> hats;
    for (int i = 0; i < kSamples; ++i) {
        const double th = kTwoPi * i / kSamples;
        hats[i] = {-1.0, std::cos(th), std::sin(th)};
    }
    for (const auto& e : b.entries()) {
        for (int i = 0; i < kSamples; ++i) {
            const double w = e.value * hats[i][e.a] * hats[i][e.b];
            mats[i * n + e.j](e.k, e.l) += 0.5 * w;
            mats[i * n + e.j](e.l, e.k) += 0.5 * w;
        }
    }

    double worst_coef = 0.0;
    std::array<double, kSamples> samples{};
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            for (int l = k; l < n; ++l) {
                for (int i = 0; i < kSamples; ++i) samples[i] = mats[i * n + j](k, l);
                worst_coef = std::max(worst_coef, max_fourier_coefficient(samples, 2));
            }

    if (worst_coef <= opt.identity_tol * rep.scale) {
        rep.verdict = Verdict::holds;
        rep.margin = 0.0;
        return rep;
    }

    // Violated: witness at the sample angle and component whose symmetrized
    // coefficient matrix has the largest absolute eigenvalue.
    rep.verdict = Verdict::fails;
    double best = -1.0;
    int best_i = 0, best_j = 0;
    Eigen::VectorXd best_vec;
    for (int i = 0; i < kSamples; ++i)
        for (int j = 0; j < n; ++j) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mats[i * n + j]);
            const auto& ev = es.eigenvalues();
            const int pick = std::abs(ev(0)) > std::abs(ev(n - 1)) ? 0 : n - 1;
            if (std::abs(ev(pick)) > best) {
                best = std::abs(ev(pick));
                best_i = i;
                best_j = j;
                best_vec = es.eigenvectors().col(pick);
            }
        }
    Witness w;
    w.theta = kTwoPi * best_i / kSamples;
    w.y.assign(best_vec.data(), best_vec.data() + n);
    normalize_sign(w.y);
    const auto f = eval_reduced_quadratic(b, Direction(w.theta), w.y);
    w.value = norm2(f);
    rep.margin = -w.value;
    rep.witness = std::move(w);
    (void)best_j;
    return rep;
}

ConditionReport check_null_cubic(const CubicTensor& c, const SweepOptions& opt) {
    ConditionReport rep;
    rep.method = "exact-identity";
    rep.scale = std::max(c.magnitude(), 0.0);
    const int n = std::max(c.n_components(), 1);
    if (c.empty()) {
        rep.verdict = Verdict::holds;
        rep.margin = 0.0;
        return rep;
    }

    // Coefficient of each monomial Y_k Y_l Y_m (multiset over components) is
    // a trig polynomial of degree <= 3: 7 samples decide it exactly.
    constexpr int kSamples = 7;
    std::array<std::array<double, 3>, kSamples> hats;
    for (int i = 0; i < kSamples; ++i) {
        const double th = kTwoPi * i / kSamples;
        hats[i] = {-1.0, std::cos(th), std::sin(th)};
    }
    std::vector<std::array<double, kSamples>> coef(static_cast<std::size_t>(n) * n * n * n,
                                                   std::array<double, kSamples>{});
    for (const auto& e : c.entries()) {
        int k = e.k, l = e.l, m = e.m;
        if (k > l) std::swap(k, l);
        if (l > m) std::swap(l, m);
        if (k > l) std::swap(k, l);
        auto& slot = coef[((static_cast<std::size_t>(e.j) * n + k) * n + l) * n + m];
        for (int i = 0; i < kSamples; ++i)
            slot[i] += e.value * hats[i][e.a] * hats[i][e.b] * hats[i][e.c];
    }

    double worst_coef = 0.0;
    for (const auto& slot : coef)
        worst_coef = std::max(worst_coef, max_fourier_coefficient(slot, 3));

    if (worst_coef <= opt.identity_tol * rep.scale) {
        rep.verdict = Verdict::holds;
        rep.margin = 0.0;
        return rep;
    }

    // Witness by direct sweep of |F^{c,red}| over the sample angles and the
    // unit sphere grid.
    rep.verdict = Verdict::fails;
    const auto ys = unit_sphere_grid(n, std::max(opt.n_y, 64));
    std::vector<double> f(n);
    double best = -1.0;
    Witness w;
    for (int i = 0; i < kSamples; ++i) {
        const double th = kTwoPi * i / kSamples;
        for (const auto& y : ys) {
            eval_reduced_cubic_into(c, hats[i], y.data(), f.data());
            const double v = norm2(f);
            if (v > best) {
                best = v;
                w.theta = th;
                w.y = y;
                w.value = v;
            }
        }
    }
    rep.margin = -best;
    rep.witness = std::move(w);
    return rep;
}

NullFormDecomposition decompose_null_forms(const QuadraticTensor& b) {
    NullFormDecomposition out;
    const int n = std::max(b.n_components(), 1);
    out.n = n;
    out.c0.assign(static_cast<std::size_t>(n) * n * n, 0.0);
    out.cab.assign(static_cast<std::size_t>(n) * 3 * n * n, 0.0);

    // Work with the symmetrized coefficient array S[(a,k)][(b,l)]; two
    // tensors induce the same quadratic form iff their S arrays agree.
    const int slots = 3 * n;        // flattened (a, k) -> a*n + k
    const int rows = slots * (slots + 1) / 2;
    const int cols = 4 * n * n;     // c0 block then 3 pair blocks

    auto sym_of = [&](const std::vector<QuadEntry>& entries) {
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(slots, slots);
        for (const auto& e : entries) {
            const int p = e.a * n + e.k;
            const int q = e.b * n + e.l;
            s(p, q) += 0.5 * e.value;
            s(q, p) += 0.5 * e.value;
        }
        return s;
    };
    const double sqrt2 = std::numbers::sqrt2;
    auto vec_of = [&](const Eigen::MatrixXd& s) {
        Eigen::VectorXd v(rows);
        int r = 0;
        for (int p = 0; p < slots; ++p)
            for (int q = p; q < slots; ++q) v(r++) = (p == q) ? s(p, p) : sqrt2 * s(p, q);
        return v;
    };

    Eigen::MatrixXd basis(rows, cols);
    int col = 0;
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            // Q0(u_k, u_l): dt dt - d1 d1 - d2 d2
            basis.col(col++) = vec_of(sym_of({{0, k, l, 0, 0, 1.0},
                                              {0, k, l, 1, 1, -1.0},
                                              {0, k, l, 2, 2, -1.0}}));
        }
    constexpr int kPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (const auto& ab : kPairs)
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
                // Q_ab(u_k, u_l): da db - db da
                basis.col(col++) = vec_of(sym_of({{0, k, l, ab[0], ab[1], 1.0},
                                                  {0, k, l, ab[1], ab[0], -1.0}}));
            }

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(basis);

    double res_sq = 0.0;
    double target_sq = 0.0;
    for (int j = 0; j < n; ++j) {
        std::vector<QuadEntry> ej;
        for (const auto& e : b.entries())
            if (e.j == j) ej.push_back(e);
        const Eigen::VectorXd target = vec_of(sym_of(ej));
        target_sq += target.squaredNorm();
        const Eigen::VectorXd x = cod.solve(target);
        res_sq += (basis * x - target).squaredNorm();
        int idx = 0;
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) out.c0[(static_cast<std::size_t>(j) * n + k) * n + l] = x(idx++);
        for (int pair = 0; pair < 3; ++pair)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    out.cab[((static_cast<std::size_t>(j) * 3 + pair) * n + k) * n + l] = x(idx++);
    }
    out.residual = std::sqrt(res_sq);
    out.success = out.residual <= 1e-10 * std::max(1.0, std::sqrt(target_sq));
    return out;
}

PositiveDefiniteReport check_positive_definite(const WeightMatrix& a, int n_theta, double pd_tol) {
    require(n_theta >= 8, "check_positive_definite: n_theta must be >= 8");
    PositiveDefiniteReport rep;
    rep.n_theta = n_theta;
    double min_eig = std::numeric_limits<double>::infinity();
    double max_eig = -std::numeric_limits<double>::infinity();
    Eigen::MatrixXd m;
    for (int i = 0; i < n_theta; ++i) {
        const double th = kTwoPi * i / n_theta;
        a.eval(th, m);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues()(0);
        const double hi = es.eigenvalues()(a.size() - 1);
        if (lo < min_eig) {
            min_eig = lo;
            rep.theta_at_min = th;
        }
        max_eig = std::max(max_eig, hi);
    }
    rep.min_eigenvalue = min_eig;
    rep.max_eigenvalue = max_eig;
    rep.verdict = min_eig >= pd_tol ? Verdict::holds : Verdict::fails;
    rep.m0 = min_eig > 0.0 ? std::max(max_eig, 1.0 / min_eig)
                           : std::numeric_limits<double>::infinity();
    return rep;
}

std::vector<std::vector<double>> unit_sphere_grid(int n, int n_y) {
    std::vector<std::vector<double>> ys;
    if (n == 1) {
        ys.push_back({1.0});
        ys.push_back({-1.0});
        return ys;
    }
    if (n == 2) {
        ys.reserve(n_y);
        for (int i = 0; i < n_y; ++i) {
            const double phi = kTwoPi * i / n_y;
            ys.push_back({std::cos(phi), std::sin(phi)});
        }
        return ys;
    }
    // Hyperspherical product grid: polar angles in [0, pi], azimuth in
    // [0, 2*pi). Duplicate pole points are harmless for min sweeps.
    const int n_pol = std::max(2, n_y / 2);
    std::vector<int> idx(n - 1, 0);
    const long total = static_cast<long>(std::pow(n_pol, n - 2)) * n_y;
    ys.reserve(total);
    while (true) {
        std::vector<double> y(n);
        double sines = 1.0;
        for (int d = 0; d < n - 2; ++d) {
            const double phi = std::numbers::pi * idx[d] / (n_pol - 1);
            y[d] = sines * std::cos(phi);
            sines *= std::sin(phi);
        }
        const double phi_az = kTwoPi * idx[n - 2] / n_y;
        y[n - 2] = sines * std::cos(phi_az);
        y[n - 1] = sines * std::sin(phi_az);
        ys.push_back(std::move(y));
        int d = n - 2;
        for (; d >= 0; --d) {
            const int lim = (d == n - 2) ? n_y : n_pol;
            if (++idx[d] < lim) break;
            idx[d] = 0;
        }
        if (d < 0) break;
    }
    return ys;
}

namespace {

struct AgemiSweep {
    double min_g = std::numeric_limits<double>::infinity();
    double theta_min = 0.0;
    std::vector<double> y_min;
    double min_ratio = std::numeric_limits<double>::infinity();
    double scale = 1.0;
};

AgemiSweep agemi_sweep(const CubicTensor& c, const WeightMatrix& a, const SweepOptions& opt,
                       const char* caller) {
    require(a.size() == std::max(c.n_components(), 1) || c.empty(),
            std::string(caller) + ": weight dimension does not match the tensor");
    require(opt.n_y >= 64, std::string(caller) + ": n_y must be >= 64");
    const auto pd = check_positive_definite(a, opt.n_theta, opt.pd_tol);
    require(pd.verdict == Verdict::holds,
            std::string(caller) + ": weight matrix is not positive definite on the sweep grid");

    const int n = a.size();
    const auto ys = unit_sphere_grid(n, opt.n_y);
    AgemiSweep sweep;
    sweep.scale = pd.max_eigenvalue;

    Eigen::MatrixXd am;
    std::vector<double> f(n), af(n), ay(n);
    for (int ti = 0; ti < opt.n_theta; ++ti) {
        const double th = kTwoPi * ti / opt.n_theta;
        a.eval(th, am);
        const std::array<double, 3> hat{-1.0, std::cos(th), std::sin(th)};
        for (const auto& y : ys) {
            eval_reduced_cubic_into(c, hat, y.data(), f.data());
            double g = 0.0, yay = 0.0;
            for (int r = 0; r < n; ++r) {
                double afr = 0.0, ayr = 0.0;
                for (int s = 0; s < n; ++s) {
                    afr += am(r, s) * f[s];
                    ayr += am(r, s) * y[s];
                }
                g += y[r] * afr;
                yay += y[r] * ayr;
            }
            if (g < sweep.min_g) {
                sweep.min_g = g;
                sweep.theta_min = th;
                sweep.y_min = y;
            }
            const double ratio = g / (yay * yay);
            sweep.min_ratio = std::min(sweep.min_ratio, ratio);
        }
    }
    return sweep;
}

ConditionReport report_from_sweep(const AgemiSweep& sweep, const SweepOptions& opt, bool strict_op) {
    ConditionReport rep;
    rep.method = "grid";
    rep.n_theta = opt.n_theta;
    rep.n_y = opt.n_y;
    rep.scale = sweep.scale;
    rep.margin = sweep.min_g;
    Witness w;
    w.theta = sweep.theta_min;
    w.y = sweep.y_min;
    w.value = sweep.min_g;
    rep.witness = std::move(w);

    const double normalized = sweep.min_g / sweep.scale;
    if (!std::isfinite(normalized)) {
        rep.verdict = Verdict::inconclusive;
    } else if (strict_op) {
        rep.verdict = normalized >= opt.strict_margin ? Verdict::holds : Verdict::fails;
    } else if (normalized >= opt.strict_margin) {
        rep.verdict = Verdict::holds_strictly;
    } else if (normalized >= -opt.agemi_tol) {
        rep.verdict = Verdict::holds;
    } else {
        rep.verdict = Verdict::fails;
    }
    return rep;
}

} // namespace

ConditionReport check_agemi(const CubicTensor& c, const WeightMatrix& a, const SweepOptions& opt) {
    return report_from_sweep(agemi_sweep(c, a, opt, "check_agemi"), opt, /*strict_op=*/false);
}

ConditionReport check_strict(const CubicTensor& c, const WeightMatrix& a, const SweepOptions& opt) {
    return report_from_sweep(agemi_sweep(c, a, opt, "check_strict"), opt, /*strict_op=*/true);
}

double estimate_c0(const CubicTensor& c, const WeightMatrix& a, const SweepOptions& opt) {
    const auto sweep = agemi_sweep(c, a, opt, "estimate_c0");
    require(sweep.min_g / sweep.scale >= opt.strict_margin,
            "estimate_c0: strict Agemi condition does not hold on the sweep grid");
    return sweep.min_ratio;
}

} // namespace wavelab
