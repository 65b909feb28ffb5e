#include "wavelab/wave_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

namespace wavelab {

namespace {

// Derivative rows at one grid row: lap, d/dx, d/dy (centered), d/dt.
// Buffers are indexed 0..W-1 for grid columns lo..hi.
struct RowBuffers {
    std::vector<std::vector<double>> lap, gx, gy, bt, f;
    void resize(int n_comp, int w) {
        lap.assign(n_comp, std::vector<double>(w));
        gx.assign(n_comp, std::vector<double>(w));
        gy.assign(n_comp, std::vector<double>(w));
        bt.assign(n_comp, std::vector<double>(w));
        f.assign(n_comp, std::vector<double>(w));
    }
};

// F rows from derivative rows; the per-entry loops vectorize.
void accumulate_f_rows(const SystemSpec& spec, int w, const std::vector<std::vector<double>>& bt,
                       const std::vector<std::vector<double>>& gx,
                       const std::vector<std::vector<double>>& gy,
                       std::vector<std::vector<double>>& fr) {
    for (auto& f : fr) std::fill(f.begin(), f.begin() + w, 0.0);
    auto sel = [&](int a, int k) -> const double* {
        return a == 0 ? bt[k].data() : (a == 1 ? gx[k].data() : gy[k].data());
    };
    for (const auto& e : spec.quadratic.entries()) {
        const double v = e.value;
        const double* pa = sel(e.a, e.k);
        const double* pb = sel(e.b, e.l);
        double* f = fr[e.j].data();
        for (int i = 0; i < w; ++i) f[i] += v * pa[i] * pb[i];
    }
    for (const auto& e : spec.cubic.entries()) {
        const double v = e.value;
        const double* pa = sel(e.a, e.k);
        const double* pb = sel(e.b, e.l);
        const double* pc = sel(e.c, e.m);
        double* f = fr[e.j].data();
        for (int i = 0; i < w; ++i) f[i] += v * pa[i] * pb[i] * pc[i];
    }
}

} // namespace

double GridConfig::cfl() const { return effective_dt() * std::numbers::sqrt2 / h; }

void GridConfig::validate() const {
    if (!(h > 0.0)) throw ConfigError("grid: h must be positive");
    if (!(half_width > 0.0)) throw ConfigError("grid: half_width must be positive");
    if (!(t_end >= 0.0)) throw ConfigError("grid: t_end must be nonnegative");
    if (!(cfl_max > 0.0 && cfl_max <= 1.0)) throw ConfigError("grid: cfl_max must lie in (0, 1]");
    if (!(effective_dt() > 0.0)) throw ConfigError("grid: dt must be positive");
    if (cfl() > cfl_max * (1.0 + 1e-12))
        throw ConfigError("grid: CFL number " + std::to_string(cfl()) + " exceeds cfl_max " +
                          std::to_string(cfl_max));
    if (!(blowup_threshold > 0.0)) throw ConfigError("grid: blowup_threshold must be positive");
}

Grid GridConfig::make_grid() const {
    Grid g;
    g.h = h;
    g.m = static_cast<int>(std::ceil(half_width / h - 1e-9));
    g.n = 2 * g.m + 1;
    return g;
}

double bump_profile(double s) {
    const double s2 = s * s;
    if (s2 >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - s2));
}

FieldWindow window_of(const FieldState& state) {
    return FieldWindow{&state.grid, state.n_comp, state.t,      state.dt,
                       state.active_m, &state.u_prev, &state.u, nullptr};
}

FieldState initialize(const GridConfig& config, const InitialData& data, const SystemSpec& spec) {
    config.validate();
    const int n_comp = spec.n_components;
    FieldState st;
    st.grid = config.make_grid();
    st.n_comp = n_comp;
    st.dt = config.effective_dt();
    st.t = 0.0;

    const Grid& g = st.grid;
    const int n = g.n;
    const std::size_t plane = static_cast<std::size_t>(n) * n;

    auto scales = [&](const std::vector<double>& s, const char* which) {
        if (s.empty()) return std::vector<double>(n_comp, 1.0);
        if (static_cast<int>(s.size()) != n_comp)
            throw ConfigError(std::string("initial data: ") + which + " must have " +
                              std::to_string(n_comp) + " entries");
        return s;
    };
    const auto fs = scales(data.f_scale, "f_scale");
    const auto gs = scales(data.g_scale, "g_scale");

    st.u.assign(n_comp, std::vector<double>(plane, 0.0));
    std::vector<std::vector<double>> gplane(n_comp, std::vector<double>(plane, 0.0));

    if (data.kind == DataKind::custom) {
        if (static_cast<int>(data.f_samples.size()) != n_comp ||
            static_cast<int>(data.g_samples.size()) != n_comp)
            throw ConfigError("initial data: custom samples must provide one plane per component");
        for (int c = 0; c < n_comp; ++c) {
            if (data.f_samples[c].size() != plane || data.g_samples[c].size() != plane)
                throw ConfigError("initial data: custom sample plane size does not match the grid");
            for (std::size_t i = 0; i < plane; ++i) {
                st.u[c][i] = data.eps * fs[c] * data.f_samples[c][i];
                gplane[c][i] = data.eps * gs[c] * data.g_samples[c][i];
            }
        }
        st.active_m = g.m - 1;
    } else {
        if (!(data.radius > 0.0)) throw ConfigError("initial data: radius must be positive");
        if (g.length() + 1e-9 < config.t_end + data.radius + 2.0 * g.h)
            throw ConfigError("domain too small for support radius: need half_width >= t_end + R + 2h = " +
                              std::to_string(config.t_end + data.radius + 2.0 * g.h));
        auto shape = [&](double x, double y) -> double {
            if (data.kind == DataKind::radial_bump) return bump_profile(std::hypot(x, y) / data.radius);
            const double c = 0.5 * data.radius, rr = 0.5 * data.radius;
            return bump_profile(std::hypot(x - c, y) / rr) + bump_profile(std::hypot(x + c, y) / rr);
        };
        for (int iy = 0; iy < n; ++iy) {
            const double y = g.coord(iy);
            for (int ix = 0; ix < n; ++ix) {
                const double s = shape(g.coord(ix), y);
                if (s == 0.0) continue;
                const std::size_t id = g.idx(ix, iy);
                for (int c = 0; c < n_comp; ++c) {
                    st.u[c][id] = data.eps * fs[c] * s;
                    gplane[c][id] = data.eps * gs[c] * s;
                }
            }
        }
        st.active_m = std::min(g.m - 1, static_cast<int>(std::ceil(data.radius / g.h)) + 3);
        st.mask_radius0 = data.radius;
    }

    // Second-order Taylor start: u_prev = u - dt*g + dt^2/2*(lap u + F(p0)),
    // where p0 carries g in the time slot.
    st.u_prev = st.u;
    const double dt = st.dt;
    const double inv_h2 = 1.0 / (g.h * g.h), inv_2h = 0.5 / g.h;
    const int lo = 1, hi = n - 2, w = hi - lo + 1;
    RowBuffers rb;
    rb.resize(n_comp, w);
    for (int iy = lo; iy <= hi; ++iy) {
        for (int c = 0; c < n_comp; ++c) {
            const double* uc = st.u[c].data() + g.idx(0, iy);
            const double* un = uc + n;
            const double* us = uc - n;
            const double* gc = gplane[c].data() + g.idx(0, iy);
            double* lap = rb.lap[c].data();
            double* gx = rb.gx[c].data();
            double* gy = rb.gy[c].data();
            double* bt = rb.bt[c].data();
            for (int i = 0; i < w; ++i) {
                const int ix = lo + i;
                lap[i] = (uc[ix - 1] + uc[ix + 1] + un[ix] + us[ix] - 4.0 * uc[ix]) * inv_h2;
                gx[i] = (uc[ix + 1] - uc[ix - 1]) * inv_2h;
                gy[i] = (un[ix] - us[ix]) * inv_2h;
                bt[i] = gc[ix];
            }
        }
        accumulate_f_rows(spec, w, rb.bt, rb.gx, rb.gy, rb.f);
        for (int c = 0; c < n_comp; ++c) {
            const double* uc = st.u[c].data() + g.idx(0, iy);
            const double* gc = gplane[c].data() + g.idx(0, iy);
            double* pc = st.u_prev[c].data() + g.idx(0, iy);
            const double* lap = rb.lap[c].data();
            const double* f = rb.f[c].data();
            for (int i = 0; i < w; ++i) {
                const int ix = lo + i;
                pc[ix] = uc[ix] - dt * gc[ix] + 0.5 * dt * dt * (lap[i] + f[i]);
            }
        }
    }
    return st;
}

StepResult advance(FieldState& st, const SystemSpec& spec, const GridConfig& config,
                   std::vector<std::vector<double>>& spare) {
    const Grid& g = st.grid;
    const int n = g.n;
    const int n_comp = st.n_comp;
    const std::size_t plane = static_cast<std::size_t>(n) * n;
    if (static_cast<int>(spare.size()) != n_comp)
        spare.assign(n_comp, std::vector<double>(plane, 0.0));
    for (auto& p : spare)
        if (p.size() != plane) p.assign(plane, 0.0);

    const double dt = st.dt, h = g.h;
    const double dt2 = dt * dt;
    const double inv_h2 = 1.0 / (h * h), inv_2h = 0.5 / h;
    const double inv_dt = 1.0 / dt, inv_2dt = 0.5 / dt;

    st.active_m = std::min(g.m - 1, st.active_m + 1);
    const int lo = g.m - st.active_m, hi = g.m + st.active_m;
    const int w = hi - lo + 1;

    // Causal mask radius for the new level (see FieldState::mask_radius0).
    const bool masked = st.mask_radius0 >= 0.0;
    const double mask_rad = st.mask_radius0 + (st.t + dt) + h;
    const double mask_rad2 = mask_rad * mask_rad;

    RowBuffers rb;
    rb.resize(n_comp, w);
    StepResult result;

    // Pass 1: base update with the backward-difference time derivative.
    for (int iy = lo; iy <= hi; ++iy) {
        for (int c = 0; c < n_comp; ++c) {
            const double* uc = st.u[c].data() + g.idx(0, iy);
            const double* un = uc + n;
            const double* us = uc - n;
            const double* pc = st.u_prev[c].data() + g.idx(0, iy);
            double* lap = rb.lap[c].data();
            double* gx = rb.gx[c].data();
            double* gy = rb.gy[c].data();
            double* bt = rb.bt[c].data();
            for (int i = 0; i < w; ++i) {
                const int ix = lo + i;
                lap[i] = (uc[ix - 1] + uc[ix + 1] + un[ix] + us[ix] - 4.0 * uc[ix]) * inv_h2;
                gx[i] = (uc[ix + 1] - uc[ix - 1]) * inv_2h;
                gy[i] = (un[ix] - us[ix]) * inv_2h;
                bt[i] = (uc[ix] - pc[ix]) * inv_dt;
            }
        }
        accumulate_f_rows(spec, w, rb.bt, rb.gx, rb.gy, rb.f);
        const double yy = g.coord(iy) * g.coord(iy);
        for (int c = 0; c < n_comp; ++c) {
            const double* uc = st.u[c].data() + g.idx(0, iy);
            const double* pc = st.u_prev[c].data() + g.idx(0, iy);
            double* out = spare[c].data() + g.idx(0, iy);
            const double* lap = rb.lap[c].data();
            const double* f = rb.f[c].data();
            for (int i = 0; i < w; ++i) {
                const int ix = lo + i;
                double v = 2.0 * uc[ix] - pc[ix] + dt2 * (lap[i] + f[i]);
                if (masked) {
                    const double x = g.coord(ix);
                    if (x * x + yy > mask_rad2) v = 0.0;
                }
                out[ix] = v;
            }
        }
    }

    // Pass 2 (optional): re-evaluate F with the centered time derivative
    // through the predicted level; restores second order in the
    // nonlinearity argument.
    double max_abs = 0.0;
    if (config.correction_sweep) {
        for (int iy = lo; iy <= hi; ++iy) {
            for (int c = 0; c < n_comp; ++c) {
                const double* uc = st.u[c].data() + g.idx(0, iy);
                const double* un = uc + n;
                const double* us = uc - n;
                const double* pc = st.u_prev[c].data() + g.idx(0, iy);
                const double* nx = spare[c].data() + g.idx(0, iy);
                double* lap = rb.lap[c].data();
                double* gx = rb.gx[c].data();
                double* gy = rb.gy[c].data();
                double* bt = rb.bt[c].data();
                for (int i = 0; i < w; ++i) {
                    const int ix = lo + i;
                    lap[i] = (uc[ix - 1] + uc[ix + 1] + un[ix] + us[ix] - 4.0 * uc[ix]) * inv_h2;
                    gx[i] = (uc[ix + 1] - uc[ix - 1]) * inv_2h;
                    gy[i] = (un[ix] - us[ix]) * inv_2h;
                    bt[i] = (nx[ix] - pc[ix]) * inv_2dt;
                }
            }
            accumulate_f_rows(spec, w, rb.bt, rb.gx, rb.gy, rb.f);
            const double yy = g.coord(iy) * g.coord(iy);
            for (int c = 0; c < n_comp; ++c) {
                const double* uc = st.u[c].data() + g.idx(0, iy);
                const double* pc = st.u_prev[c].data() + g.idx(0, iy);
                double* out = spare[c].data() + g.idx(0, iy);
                const double* lap = rb.lap[c].data();
                const double* f = rb.f[c].data();
                double row_max = 0.0;
                for (int i = 0; i < w; ++i) {
                    const int ix = lo + i;
                    double v = 2.0 * uc[ix] - pc[ix] + dt2 * (lap[i] + f[i]);
                    if (masked) {
                        const double x = g.coord(ix);
                        if (x * x + yy > mask_rad2) v = 0.0;
                    }
                    out[ix] = v;
                    row_max = std::max(row_max, std::abs(v));
                }
                max_abs = std::max(max_abs, row_max);
            }
        }
    } else {
        for (int iy = lo; iy <= hi; ++iy)
            for (int c = 0; c < n_comp; ++c) {
                const double* out = spare[c].data() + g.idx(0, iy);
                for (int ix = lo; ix <= hi; ++ix) max_abs = std::max(max_abs, std::abs(out[ix]));
            }
    }

    auto oldest = std::move(st.u_prev);
    st.u_prev = std::move(st.u);
    st.u = std::move(spare);
    spare = std::move(oldest);
    st.step_index += 1;
    st.t += dt;

    result.max_abs_u = max_abs;
    return result;
}

FieldState step(const FieldState& state, const SystemSpec& spec, const GridConfig& config) {
    FieldState copy = state;
    std::vector<std::vector<double>> spare;
    advance(copy, spec, config, spare);
    return copy;
}

namespace {

// Time-derivative rule shared by the observers: centered when the window has
// both neighbor levels, one-sided otherwise.
struct TimeDiff {
    const std::vector<std::vector<double>>* a = nullptr;
    const std::vector<std::vector<double>>* b = nullptr;
    double factor = 0.0;
};

TimeDiff time_diff(const FieldWindow& w) {
    if (w.before && w.after) return {w.after, w.before, 0.5 / w.dt};
    if (w.before) return {w.center, w.before, 1.0 / w.dt};
    if (w.after) return {w.after, w.center, 1.0 / w.dt};
    throw std::invalid_argument("field window needs at least two time levels");
}

struct ObsBox {
    int lo, hi;
};

ObsBox obs_box(const FieldWindow& w, int pad) {
    const int m = w.grid->m, n = w.grid->n;
    return {std::max(1, m - w.active_m - pad), std::min(n - 2, m + w.active_m + pad)};
}

} // namespace

namespace {

// One staggered half-level: sum_x |(ub - ua)/dt|^2 + D+ ua . D+ ub with the
// forward differences the 5-point Laplacian pairs with under summation by
// parts. This is the exact pairing that makes the leapfrog increments
// telescope to dt * sum F . d_t u; centered gradients would leave an O(h^2)
// oscillating remainder.
double half_level_energy_sq(const FieldWindow& w, const std::vector<std::vector<double>>& ua,
                            const std::vector<std::vector<double>>& ub) {
    const Grid& g = *w.grid;
    const int n = g.n;
    const double inv_h = 1.0 / g.h;
    const double inv_dt = 1.0 / w.dt;
    const auto box = obs_box(w, 2);
    double acc = 0.0;
    for (int iy = box.lo; iy <= box.hi; ++iy) {
        for (int c = 0; c < w.n_comp; ++c) {
            const double* ac = ua[c].data() + g.idx(0, iy);
            const double* an = ac + n;
            const double* bc = ub[c].data() + g.idx(0, iy);
            const double* bn = bc + n;
            double row = 0.0;
            for (int ix = box.lo; ix <= box.hi; ++ix) {
                const double ut = (bc[ix] - ac[ix]) * inv_dt;
                const double ax = (ac[ix + 1] - ac[ix]) * inv_h;
                const double ay = (an[ix] - ac[ix]) * inv_h;
                const double bx = (bc[ix + 1] - bc[ix]) * inv_h;
                const double by = (bn[ix] - bc[ix]) * inv_h;
                row += ut * ut + ax * bx + ay * by;
            }
            acc += row;
        }
    }
    return 0.5 * acc * g.h * g.h;
}

} // namespace

double energy(const FieldWindow& w) {
    double e2 = 0.0;
    if (w.before && w.after) {
        e2 = 0.5 * (half_level_energy_sq(w, *w.before, *w.center) +
                    half_level_energy_sq(w, *w.center, *w.after));
    } else if (w.before) {
        e2 = half_level_energy_sq(w, *w.before, *w.center);
    } else if (w.after) {
        e2 = half_level_energy_sq(w, *w.center, *w.after);
    } else {
        throw std::invalid_argument("field window needs at least two time levels");
    }
    return std::sqrt(std::max(0.0, e2));
}

SupNorms sup_norms(const FieldWindow& w, double mu) {
    if (!(mu > 0.0 && mu < 0.1))
        throw std::invalid_argument("sup_norms: mu must lie in (0, 1/10)");
    const Grid& g = *w.grid;
    const int n = g.n;
    const double inv_2h = 0.5 / g.h;
    const TimeDiff td = time_diff(w);
    const auto box = obs_box(w, 1);
    SupNorms out;
    for (int iy = box.lo; iy <= box.hi; ++iy) {
        const double y = g.coord(iy);
        for (int ix = box.lo; ix <= box.hi; ++ix) {
            double du2 = 0.0;
            for (int c = 0; c < w.n_comp; ++c) {
                const double* uc = (*w.center)[c].data() + g.idx(0, iy);
                const double* un = uc + n;
                const double* us = uc - n;
                const double ut = ((*td.a)[c][g.idx(ix, iy)] - (*td.b)[c][g.idx(ix, iy)]) * td.factor;
                const double ux = (uc[ix + 1] - uc[ix - 1]) * inv_2h;
                const double uy = (un[ix] - us[ix]) * inv_2h;
                du2 += ut * ut + ux * ux + uy * uy;
            }
            if (du2 == 0.0) continue;
            const double du = std::sqrt(du2);
            const double r = std::hypot(g.coord(ix), y);
            const double wp = std::sqrt(std::sqrt(1.0 + (w.t + r) * (w.t + r)));
            const double wm = std::pow(1.0 + (w.t - r) * (w.t - r), 0.5 * (1.0 - mu));
            out.max_du = std::max(out.max_du, du);
            out.weighted = std::max(out.weighted, wp * wm * du);
        }
    }
    return out;
}

double support_radius(const FieldWindow& w, double tol) {
    const Grid& g = *w.grid;
    const auto box = obs_box(w, 1);
    double best = 0.0;
    for (int iy = box.lo; iy <= box.hi; ++iy) {
        const double y = g.coord(iy);
        for (int ix = box.lo; ix <= box.hi; ++ix) {
            for (int c = 0; c < w.n_comp; ++c) {
                if (std::abs((*w.center)[c][g.idx(ix, iy)]) > tol) {
                    best = std::max(best, std::hypot(g.coord(ix), y));
                    break;
                }
            }
        }
    }
    return best;
}

std::optional<std::vector<double>> extract_profile_point(const FieldWindow& w, double sigma,
                                                         const Direction& omega) {
    const Grid& g = *w.grid;
    const double r = w.t + sigma;
    if (!(r > 2.0 * g.h))
        throw std::invalid_argument("extract_profile: ray point too close to the origin");
    const double px = r * omega.omega(1);
    const double py = r * omega.omega(2);
    const double fx = px / g.h + g.m;
    const double fy = py / g.h + g.m;
    const int ix0 = static_cast<int>(std::floor(fx));
    const int iy0 = static_cast<int>(std::floor(fy));
    if (ix0 < 1 || iy0 < 1 || ix0 + 1 > g.n - 2 || iy0 + 1 > g.n - 2) return std::nullopt;
    const double ax = fx - ix0, ay = fy - iy0;
    const double wts[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
    const int cx[4] = {ix0, ix0 + 1, ix0, ix0 + 1};
    const int cy[4] = {iy0, iy0, iy0 + 1, iy0 + 1};

    const TimeDiff td = time_diff(w);
    const double inv_2h = 0.5 / g.h;
    const double sqrt_r = std::sqrt(r);
    std::vector<double> out(w.n_comp);
    for (int c = 0; c < w.n_comp; ++c) {
        double uv = 0.0, gxv = 0.0, gyv = 0.0, utv = 0.0;
        const auto& uc = (*w.center)[c];
        for (int q = 0; q < 4; ++q) {
            const std::size_t id = g.idx(cx[q], cy[q]);
            uv += wts[q] * uc[id];
            gxv += wts[q] * (uc[id + 1] - uc[id - 1]) * inv_2h;
            gyv += wts[q] * (uc[id + g.n] - uc[id - g.n]) * inv_2h;
            utv += wts[q] * ((*td.a)[c][id] - (*td.b)[c][id]) * td.factor;
        }
        const double dr = omega.omega(1) * gxv + omega.omega(2) * gyv;
        out[c] = 0.5 * sqrt_r * (dr - utv) + 0.25 * uv / sqrt_r;
    }
    return out;
}

RunResult run_simulation(FieldState& state, const SystemSpec& spec, const GridConfig& config,
                         long observe_every, const std::function<void(const FieldWindow&)>& observer) {
    const double dt = state.dt;
    const long n_total = static_cast<long>(std::ceil(config.t_end / dt - 1e-9));
    std::vector<std::vector<double>> spare(
        state.n_comp, std::vector<double>(static_cast<std::size_t>(state.grid.n) * state.grid.n, 0.0));
    RunResult res;
    for (long k = 0; k < n_total; ++k) {
        const StepResult sr = advance(state, spec, config, spare);
        if (observer && observe_every > 0 && k % observe_every == 0) {
            FieldWindow w{&state.grid, state.n_comp, state.t - dt, dt, state.active_m,
                          &spare,      &state.u_prev, &state.u};
            observer(w);
            res.observations += 1;
        }
        res.steps = k + 1;
        res.final_time = state.t;
        if (!std::isfinite(sr.max_abs_u) || sr.max_abs_u > config.blowup_threshold) {
            res.blew_up = true;
            res.blow_up_time = state.t;
            break;
        }
    }
    return res;
}

} // namespace wavelab
