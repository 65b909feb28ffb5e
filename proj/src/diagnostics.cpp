#include "wavelab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "wavelab/numerics.hpp"

namespace wavelab {

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

double sech_pow(double w, double rho) { return std::pow(std::cosh(w), 1.0 - rho); }

// |w| beyond which cosh(w)^(1-rho) is below ~1e-18 of its peak.
double sech_cut(double rho) {
    return std::max(1.0, (42.0 + (rho - 1.0) * std::numbers::ln2 - std::log(rho - 1.0)) /
                             (rho - 1.0));
}

// Int_{-inf}^{w_hi} cosh(w)^(1-rho) dw; the substitution z = sinh(w) turns
// <z>^-rho dz into this exponentially decaying integrand, truncated where it
// is negligible.
double eta_via_sinh(double rho, double w_hi) {
    const double cut = sech_cut(rho);
    const double lo = -cut;
    const double hi = std::min(w_hi, cut);
    if (hi <= lo) return 0.0;
    return adaptive_simpson([rho](double w) { return sech_pow(w, rho); }, lo, hi, 1e-14);
}

// Full nonlinearity at one gradient sample, a-major layout p[a*n + c].
void eval_f_at(const SystemSpec& spec, const double* p, int n, double* f) {
    for (int j = 0; j < n; ++j) f[j] = 0.0;
    for (const auto& e : spec.quadratic.entries())
        f[e.j] += e.value * p[e.a * n + e.k] * p[e.b * n + e.l];
    for (const auto& e : spec.cubic.entries())
        f[e.j] += e.value * p[e.a * n + e.k] * p[e.b * n + e.l] * p[e.c * n + e.m];
}

} // namespace

GhostWeight::GhostWeight(double rho, double z_min, double z_max) : rho_(rho) {
    require(rho > 1.0, "GhostWeight: rho must exceed 1");
    if (rho == 2.0) {
        closed_form_ = true;
        total_ = std::numbers::pi;
        return;
    }
    require(z_max > z_min, "GhostWeight: empty z range");
    total_ = eta_via_sinh(rho_, std::numeric_limits<double>::infinity());

    // Cumulative table on a uniform z lattice, composite Simpson per cell,
    // linear interpolation between lattice points.
    dz_ = 1.0 / 1024.0;
    z_lo_ = std::floor((z_min - 1.0) / dz_) * dz_;
    const double z_hi = z_max + 1.0;
    const std::size_t cells = static_cast<std::size_t>(std::ceil((z_hi - z_lo_) / dz_));
    table_.resize(cells + 1);
    table_[0] = eta_via_sinh(rho_, std::asinh(z_lo_));
    auto f = [this](double z) { return std::pow(1.0 + z * z, -0.5 * rho_); };
    for (std::size_t k = 0; k < cells; ++k) {
        const double za = z_lo_ + k * dz_;
        const double zb = za + dz_;
        table_[k + 1] = table_[k] + dz_ / 6.0 * (f(za) + 4.0 * f(0.5 * (za + zb)) + f(zb));
    }
}

double GhostWeight::eta(double z) const {
    if (closed_form_) return 0.5 * std::numbers::pi + std::atan(z);
    const double pos = (z - z_lo_) / dz_;
    if (pos <= 0.0) return table_.front();
    if (pos >= static_cast<double>(table_.size() - 1)) return table_.back();
    const std::size_t k = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(k);
    return table_[k] * (1.0 - frac) + table_[k + 1] * frac;
}

namespace {

struct GhostPassMode {
    bool with_flux = false;
    const SystemSpec* spec = nullptr; // non-null enables the source integral
};

GhostIntegrals ghost_pass(const FieldWindow& w, const GhostWeight& weight,
                          const GhostPassMode& mode) {
    const Grid& g = *w.grid;
    const int n = g.n;
    const double inv_2h = 0.5 / g.h;
    const int lo = std::max(1, g.m - w.active_m - 1), hi = std::min(n - 2, g.m + w.active_m + 1);
    const double rho = weight.rho();

    const std::vector<std::vector<double>>* ta = nullptr;
    const std::vector<std::vector<double>>* tb = nullptr;
    double tfac = 0.0;
    if (w.before && w.after) {
        ta = w.after;
        tb = w.before;
        tfac = 0.5 / w.dt;
    } else if (w.before) {
        ta = w.center;
        tb = w.before;
        tfac = 1.0 / w.dt;
    } else {
        throw std::invalid_argument("ghost diagnostics need two time levels");
    }

    GhostIntegrals out;
    std::vector<double> p(3 * w.n_comp), f(w.n_comp);
    for (int iy = lo; iy <= hi; ++iy) {
        const double y = g.coord(iy);
        for (int ix = lo; ix <= hi; ++ix) {
            const double x = g.coord(ix);
            double du2 = 0.0;
            for (int c = 0; c < w.n_comp; ++c) {
                const std::size_t id = g.idx(ix, iy);
                const double* uc = (*w.center)[c].data();
                const double ut = ((*ta)[c][id] - (*tb)[c][id]) * tfac;
                const double ux = (uc[id + 1] - uc[id - 1]) * inv_2h;
                const double uy = (uc[id + n] - uc[id - n]) * inv_2h;
                p[c] = ut;
                p[w.n_comp + c] = ux;
                p[2 * w.n_comp + c] = uy;
                du2 += ut * ut + ux * ux + uy * uy;
            }
            if (du2 == 0.0) continue;
            const double r = std::hypot(x, y);
            const double eta = weight.eta(r - w.t);
            const double wgt = std::exp(eta);
            out.ghost += wgt * du2;

            if (mode.with_flux && r > 0.0) {
                double zu2 = 0.0;
                const double w1 = x / r, w2 = y / r;
                for (int c = 0; c < w.n_comp; ++c) {
                    const double ut = p[c];
                    const double z1 = w1 * ut + p[w.n_comp + c];
                    const double z2 = w2 * ut + p[2 * w.n_comp + c];
                    zu2 += z1 * z1 + z2 * z2;
                }
                const double tz = w.t - r;
                out.flux += wgt * zu2 * std::pow(1.0 + tz * tz, -0.5 * rho);
            }
            if (mode.spec) {
                eval_f_at(*mode.spec, p.data(), w.n_comp, f.data());
                double s = 0.0;
                for (int c = 0; c < w.n_comp; ++c) s += f[c] * p[c];
                out.source += wgt * 2.0 * s;
            }
        }
    }
    const double cell = g.h * g.h;
    out.ghost *= cell;
    out.flux *= cell;
    out.source *= cell;

    // eta is nondecreasing in |x| - t, so its range over the box is attained
    // at the origin and at the farthest corner.
    const double r_corner = std::numbers::sqrt2 * std::max(std::abs(g.coord(lo)), std::abs(g.coord(hi)));
    out.eta_min = weight.eta(-w.t);
    out.eta_max = weight.eta(r_corner - w.t);
    return out;
}

} // namespace

double ghost_energy(const FieldWindow& w, const GhostWeight& weight) {
    return ghost_pass(w, weight, GhostPassMode{}).ghost;
}

double z_flux(const FieldWindow& w, const GhostWeight& weight) {
    GhostPassMode mode;
    mode.with_flux = true;
    return ghost_pass(w, weight, mode).flux;
}

GhostIntegrals ghost_integrals(const FieldWindow& w, const SystemSpec& spec,
                               const GhostWeight& weight) {
    GhostPassMode mode;
    mode.with_flux = true;
    mode.spec = &spec;
    return ghost_pass(w, weight, mode);
}

GhostResidual verify_ghost_identity(const GhostSeries& series) {
    const std::size_t m = series.t.size();
    require(m >= 3, "verify_ghost_identity: needs at least 3 aligned samples");
    require(series.ghost.size() == m && series.flux.size() == m && series.source.size() == m,
            "verify_ghost_identity: series lengths differ");
    const double dt = series.t[1] - series.t[0];
    require(dt > 0.0, "verify_ghost_identity: time samples must increase");
    for (std::size_t i = 1; i < m; ++i)
        require(std::abs(series.t[i] - series.t[i - 1] - dt) <= 1e-9 * std::max(1.0, std::abs(dt)),
                "verify_ghost_identity: time grid is not uniform");

    GhostResidual out;
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const double ddt = (series.ghost[i + 1] - series.ghost[i - 1]) / (2.0 * dt);
        const double res = ddt + series.flux[i] - series.source[i];
        out.t.push_back(series.t[i]);
        out.residual.push_back(res);
        out.max_abs = std::max(out.max_abs, std::abs(res));
    }
    return out;
}

DecayReport decay_report(const RunSeries& run, double delta, double mu, double headroom,
                         double monotone_tol) {
    require(delta > 0.0, "decay_report: delta must be positive");
    DecayReport rep;
    rep.delta = delta;
    rep.mu = mu;
    rep.eps = run.eps;
    rep.headroom = headroom;
    rep.monotone_tol = monotone_tol;

    if (run.blew_up) {
        rep.verdict = "blow-up";
        rep.blow_up_time = run.blow_up_time;
    } else {
        rep.verdict = "completed";
    }

    const std::size_t m = run.t.size();
    require(m >= 1, "decay_report: empty run series");
    require(run.energy.size() == m && run.max_du.size() == m,
            "decay_report: series lengths differ");

    const double nan = std::numeric_limits<double>::quiet_NaN();
    rep.t = run.t;
    rep.r.resize(m);
    rep.q.resize(m);
    const double expo = 0.25 - delta;
    const double e2 = run.eps * run.eps;
    for (std::size_t i = 0; i < m; ++i) {
        const double t = run.t[i];
        const double wgt = std::pow(1.0 + e2 * std::log(t + 2.0), expo);
        rep.r[i] = run.eps > 0.0 ? run.energy[i] * wgt / run.eps : 0.0;
        rep.q[i] = t >= 2.0 ? run.max_du[i] * std::sqrt(t) * std::sqrt(std::log(t)) : nan;
    }

    rep.energy_initial = run.energy.front();
    rep.energy_final = run.energy.back();

    rep.energy_monotone = true;
    for (std::size_t i = 1; i < m; ++i)
        if (run.energy[i] > run.energy[i - 1] + monotone_tol) {
            rep.energy_monotone = false;
            rep.monotone_violations += 1;
        }

    std::size_t ref = m; // first sample with t >= 2
    for (std::size_t i = 0; i < m; ++i)
        if (run.t[i] >= 2.0) {
            ref = i;
            break;
        }
    if (ref < m) {
        rep.reference_time = run.t[ref];
        rep.r_ref = rep.r[ref];
        rep.q_ref = rep.q[ref];
        for (std::size_t i = ref; i < m; ++i) {
            if (rep.r[i] > rep.r_sup) {
                rep.r_sup = rep.r[i];
                rep.r_sup_time = run.t[i];
            }
            if (!std::isnan(rep.q[i])) rep.q_sup = std::max(rep.q_sup, rep.q[i]);
        }
        rep.r_bounded = rep.r_sup <= headroom * rep.r_ref;
        rep.q_bounded = rep.q_ref > 0.0 ? rep.q_sup <= headroom * rep.q_ref : rep.q_sup == 0.0;
    }

    if (run.ghost && run.ghost->t.size() >= 3)
        rep.ghost_residual = verify_ghost_identity(*run.ghost);
    return rep;
}

} // namespace wavelab
