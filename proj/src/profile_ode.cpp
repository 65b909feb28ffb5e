#include "wavelab/profile_ode.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wavelab/numerics.hpp"

namespace wavelab {

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

// RK4 on the combined state (V, optional W), autonomous right-hand side.
struct ProfileField {
    const CubicTensor& c;
    const std::array<double, 3>& hat;
    int n;
    bool with_w;
    mutable std::vector<double> jac; // scratch, n*n

    void operator()(const double* state, double* ds) const {
        eval_reduced_cubic_into(c, hat, state, ds);
        for (int j = 0; j < n; ++j) ds[j] *= -0.5;
        if (!with_w) return;
        grad_reduced_cubic_into(c, hat, state, jac.data());
        const double* w = state + n;
        double* dw = ds + n;
        for (int r = 0; r < n; ++r)
            for (int s = 0; s < n; ++s) {
                double acc = 0.0;
                for (int k = 0; k < n; ++k) acc += jac[r * n + k] * w[k * n + s];
                dw[r * n + s] = -0.5 * acc;
            }
    }
};

RayTrajectory integrate_impl(const CubicTensor& c, const Direction& omega,
                             std::span<const double> v0, std::span<const double> w0, double t0,
                             double t1, int n_steps, double overflow_limit) {
    require(t0 >= 2.0, "integrate_profile: t0 must be >= 2");
    require(t1 > t0, "integrate_profile: t1 must exceed t0");
    require(n_steps >= 1, "integrate_profile: n_steps must be >= 1");
    const int n = static_cast<int>(v0.size());
    require(n >= 1, "integrate_profile: empty initial profile");
    require(c.empty() || c.n_components() == n, "integrate_profile: tensor dimension mismatch");
    const bool with_w = !w0.empty();
    if (with_w)
        require(static_cast<int>(w0.size()) == n * n,
                "integrate_variational: w0 must be n x n");

    RayTrajectory traj;
    traj.theta = omega.theta();
    const int dim = with_w ? n + n * n : n;
    ProfileField field{c, omega.omega_hat(), n, with_w, std::vector<double>(n * n)};

    std::vector<double> state(v0.begin(), v0.end());
    state.insert(state.end(), w0.begin(), w0.end());
    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);

    const double s0 = std::log(t0);
    const double hs = (std::log(t1) - s0) / n_steps;

    auto record = [&](int i) {
        traj.times.push_back(i == 0 ? t0 : t0 * std::exp(i * hs));
        traj.log_times.push_back(s0 + i * hs);
        traj.values.emplace_back(state.begin(), state.begin() + n);
        if (with_w) traj.variational.emplace_back(state.begin() + n, state.end());
    };
    record(0);

    for (int i = 0; i < n_steps; ++i) {
        field(state.data(), k1.data());
        for (int d = 0; d < dim; ++d) tmp[d] = state[d] + 0.5 * hs * k1[d];
        field(tmp.data(), k2.data());
        for (int d = 0; d < dim; ++d) tmp[d] = state[d] + 0.5 * hs * k2[d];
        field(tmp.data(), k3.data());
        for (int d = 0; d < dim; ++d) tmp[d] = state[d] + hs * k3[d];
        field(tmp.data(), k4.data());
        for (int d = 0; d < dim; ++d)
            state[d] += hs / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);

        bool bad = false;
        for (int d = 0; d < dim; ++d)
            if (!std::isfinite(state[d]) || std::abs(state[d]) > overflow_limit) bad = true;
        if (bad) {
            traj.truncated_at = t0 * std::exp((i + 1) * hs);
            return traj;
        }
        record(i + 1);
    }
    return traj;
}

} // namespace

int default_profile_steps(double t0, double t1) {
    return std::max(1, static_cast<int>(std::ceil(256.0 * std::log10(t1 / t0))));
}

RayTrajectory integrate_profile(const CubicTensor& c, const Direction& omega,
                                std::span<const double> v0, double t0, double t1, int n_steps,
                                double overflow_limit) {
    return integrate_impl(c, omega, v0, {}, t0, t1, n_steps, overflow_limit);
}

RayTrajectory integrate_variational(const CubicTensor& c, const Direction& omega,
                                    std::span<const double> v0, std::span<const double> w0,
                                    double t0, double t1, int n_steps, double overflow_limit) {
    require(!w0.empty(), "integrate_variational: w0 required");
    return integrate_impl(c, omega, v0, w0, t0, t1, n_steps, overflow_limit);
}

std::vector<double> lyapunov_track(const WeightMatrix& a, const RayTrajectory& traj) {
    const int n = a.size();
    Eigen::MatrixXd am = a.eval(traj.theta);
    std::vector<double> phi;
    phi.reserve(traj.values.size());
    for (const auto& v : traj.values) {
        require(static_cast<int>(v.size()) == n, "lyapunov_track: dimension mismatch");
        double acc = 0.0;
        for (int r = 0; r < n; ++r)
            for (int s = 0; s < n; ++s) acc += v[r] * am(r, s) * v[s];
        phi.push_back(acc);
    }
    return phi;
}

MatsBound::MatsBound(double c0_, double c1_, double p_, double q_, double t0_, double phi0_)
    : c0(c0_), c1(c1_), p(p_), q(q_), t0(t0_), phi0(phi0_) {
    require(c0 > 0.0, "MatsBound: c0 must be positive");
    require(c1 >= 0.0, "MatsBound: c1 must be nonnegative");
    require(p > 1.0, "MatsBound: p must exceed 1");
    require(q > 1.0, "MatsBound: q must exceed 1");
    require(t0 >= 2.0, "MatsBound: t0 must be >= 2");
    require(std::isfinite(phi0), "MatsBound: phi0 must be finite");
    p_star_ = p / (p - 1.0);

    const double log2 = std::numbers::ln2;
    double integral = 0.0;
    if (c1 > 0.0) {
        // Int_2^inf (log tau)^{p*} tau^{-q} dtau via tau = e^x, integrated on
        // doubling segments until the contribution is negligible.
        const auto f = [&](double x) { return std::pow(x, p_star_) * std::exp((1.0 - q) * x); };
        double lo = log2;
        double width = std::max(1.0, 2.0 * p_star_ / (q - 1.0));
        while (true) {
            const double part = adaptive_simpson(f, lo, lo + width, 1e-14 * std::max(integral, 1e-300));
            integral += part;
            lo += width;
            width *= 2.0;
            if (std::abs(part) <= 1e-16 * integral && lo > 2.0 * p_star_ / (q - 1.0) + log2) break;
        }
    }
    c2_ = ((std::pow(std::log(t0), p_star_) * phi0) + c1 * integral) / log2 +
          std::pow(p_star_ / (c0 * p), p_star_ - 1.0);
}

double MatsBound::bound(double t) const { return c2_ / std::pow(std::log(t), p_star_ - 1.0); }

MatsReport verify_mats(const RayTrajectory& traj, const WeightMatrix& a, double c0, double tol) {
    require(traj.n_samples() > 0, "verify_mats: empty trajectory");
    require(c0 > 0.0, "verify_mats: c0 must be positive");
    const auto phi = lyapunov_track(a, traj);
    const MatsBound bound(c0, 0.0, 2.0, 2.0, traj.times.front(), phi.front());

    MatsReport rep;
    rep.c2 = bound.c2();
    rep.tol = tol;
    for (int i = 0; i < traj.n_samples(); ++i) {
        const double ratio = phi[i] * std::log(traj.times[i]) / bound.c2();
        if (ratio > rep.max_ratio) {
            rep.max_ratio = ratio;
            rep.t_at_max = traj.times[i];
        }
    }
    rep.pass = rep.max_ratio <= 1.0 + tol;
    return rep;
}

} // namespace wavelab
