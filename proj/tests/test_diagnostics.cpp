#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "helpers.hpp"
#include "wavelab/diagnostics.hpp"

using namespace wavelab;
using namespace testutil;

namespace {

SystemSpec free_scalar() { return SystemSpec(1, QuadraticTensor(1, {}), CubicTensor(1, {})); }

SystemSpec dissipative_scalar() { return SystemSpec(1, QuadraticTensor(1, {}), dissipator_1d()); }

struct SyntheticWindow {
    Grid grid;
    double t, dt;
    std::vector<std::vector<double>> before, center, after;

    FieldWindow window() const {
        return FieldWindow{&grid,  static_cast<int>(center.size()),
                           t,      dt,
                           grid.m - 1, &before,
                           &center, &after};
    }
};

SyntheticWindow make_synthetic(double h, double half_width, double t, double dt,
                               const std::function<double(double, double, double)>& field) {
    SyntheticWindow s;
    s.grid.h = h;
    s.grid.m = static_cast<int>(std::ceil(half_width / h));
    s.grid.n = 2 * s.grid.m + 1;
    s.t = t;
    s.dt = dt;
    const std::size_t plane = static_cast<std::size_t>(s.grid.n) * s.grid.n;
    s.before.assign(1, std::vector<double>(plane, 0.0));
    s.center = s.before;
    s.after = s.before;
    for (int iy = 0; iy < s.grid.n; ++iy)
        for (int ix = 0; ix < s.grid.n; ++ix) {
            const double x = s.grid.coord(ix), y = s.grid.coord(iy);
            const std::size_t id = s.grid.idx(ix, iy);
            s.before[0][id] = field(t - dt, x, y);
            s.center[0][id] = field(t, x, y);
            s.after[0][id] = field(t + dt, x, y);
        }
    return s;
}

// Pointwise quadrature of |du|^2 with centered derivatives: the integrand of
// the ghost energy at eta = 0, used as an independent oracle.
double pointwise_du_sq(const FieldWindow& w) {
    const Grid& g = *w.grid;
    const double inv_2h = 0.5 / g.h, inv_2dt = 0.5 / w.dt;
    double acc = 0.0;
    for (int iy = 1; iy < g.n - 1; ++iy)
        for (int ix = 1; ix < g.n - 1; ++ix)
            for (int c = 0; c < w.n_comp; ++c) {
                const std::size_t id = g.idx(ix, iy);
                const double ut = ((*w.after)[c][id] - (*w.before)[c][id]) * inv_2dt;
                const double ux = ((*w.center)[c][id + 1] - (*w.center)[c][id - 1]) * inv_2h;
                const double uy = ((*w.center)[c][id + g.n] - (*w.center)[c][id - g.n]) * inv_2h;
                acc += ut * ut + ux * ux + uy * uy;
            }
    return acc * g.h * g.h;
}

GhostSeries record_ghost(double h, double t_end, const SystemSpec& sys, double eps, long every) {
    GridConfig cfg;
    cfg.h = h;
    cfg.half_width = t_end + 1.0 + 4.0 * h;
    cfg.t_end = t_end;
    InitialData d;
    d.kind = DataKind::radial_bump;
    d.radius = 1.0;
    d.eps = eps;
    d.g_scale = {1.0};
    auto st = initialize(cfg, d, sys);
    const GhostWeight weight(2.0);
    GhostSeries series;
    run_simulation(st, sys, cfg, every, [&](const FieldWindow& w) {
        const auto gi = ghost_integrals(w, sys, weight);
        series.t.push_back(w.t);
        series.ghost.push_back(gi.ghost);
        series.flux.push_back(gi.flux);
        series.source.push_back(gi.source);
    });
    return series;
}

} // namespace

// ---- ghost weight -----------------------------------------------------------

TEST_CASE("rho = 2 uses the arctangent closed form") {
    const GhostWeight w(2.0);
    CHECK(w.eta_total() == doctest::Approx(std::numbers::pi).epsilon(1e-15));
    for (double z : {-50.0, -3.0, 0.0, 1.5, 40.0}) {
        CHECK(w.eta(z) == doctest::Approx(0.5 * std::numbers::pi + std::atan(z)).epsilon(1e-15));
        CHECK(w.eta(z) > 0.0);
        CHECK(w.eta(z) < std::numbers::pi);
    }
}

TEST_CASE("tabulated weights match closed forms for rho = 3 and rho = 4") {
    // Int <z>^-3 = 1 + z/<z>;  Int <z>^-4 = pi/4 + (atan z + z/<z>^2)/2.
    const GhostWeight w3(3.0);
    CHECK(w3.eta_total() == doctest::Approx(2.0).epsilon(1e-9));
    const GhostWeight w4(4.0);
    CHECK(w4.eta_total() == doctest::Approx(0.5 * std::numbers::pi).epsilon(1e-9));
    for (double z = -30.0; z <= 30.0; z += 0.37) {
        const double e3 = 1.0 + z / std::sqrt(1.0 + z * z);
        const double e4 = 0.25 * std::numbers::pi + 0.5 * (std::atan(z) + z / (1.0 + z * z));
        CHECK(std::abs(w3.eta(z) - e3) <= 5e-7);
        CHECK(std::abs(w4.eta(z) - e4) <= 5e-7);
    }
}

TEST_CASE("eta is nondecreasing and exp(eta) obeys the two-sided bound") {
    for (double rho : {1.5, 2.0, 8.0, 64.0}) {
        const GhostWeight w(rho);
        double prev = -1.0;
        for (double z = -40.0; z <= 40.0; z += 0.11) {
            const double e = w.eta(z);
            CHECK(e >= prev - 1e-14);
            CHECK(std::exp(e) >= 1.0);
            CHECK(std::exp(e) <= std::exp(w.eta_total()) * (1.0 + 1e-12));
            prev = e;
        }
    }
    CHECK_THROWS_AS(GhostWeight(1.0), std::invalid_argument);
}

// ---- ghost energy and flux ----------------------------------------------------

TEST_CASE("ghost integrals of the zero field vanish") {
    auto s = make_synthetic(1.0 / 16, 2.0, 1.0, 0.01, [](double, double, double) { return 0.0; });
    const GhostWeight w(2.0);
    CHECK(ghost_energy(s.window(), w) == 0.0);
    CHECK(z_flux(s.window(), w) == 0.0);
    const auto gi = ghost_integrals(s.window(), free_scalar(), w);
    CHECK(gi.ghost == 0.0);
    CHECK(gi.flux == 0.0);
    CHECK(gi.source == 0.0);
}

TEST_CASE("ghost energy is squeezed between the plain integral and its exp(pi) multiple") {
    auto s = make_synthetic(1.0 / 32, 3.0, 1.0, 0.01, [](double t, double x, double y) {
        return bump_profile(std::hypot(x, y) / 1.8) * std::cos(0.7 * t + x - 0.3 * y);
    });
    const GhostWeight w(2.0);
    const double ghost = ghost_energy(s.window(), w);
    const double plain = pointwise_du_sq(s.window());
    CHECK(ghost >= plain);
    CHECK(ghost <= std::exp(std::numbers::pi) * plain);
}

TEST_CASE("large rho reduces the ghost energy to the plain integral deep inside the cone") {
    // Field supported at r <= 1.8 while t = 9: eta(z <= -7) is negligible.
    auto s = make_synthetic(1.0 / 32, 3.0, 9.0, 0.01, [](double t, double x, double y) {
        return bump_profile(std::hypot(x, y) / 1.8) * std::sin(x + 0.2 * t * y);
    });
    const GhostWeight w(64.0, -16.0, 16.0);
    const double ghost = ghost_energy(s.window(), w);
    const double plain = pointwise_du_sq(s.window());
    CHECK(ghost == doctest::Approx(plain).epsilon(1e-10));
    CHECK(std::abs(ghost / plain - 1.0) < 0.01);
}

TEST_CASE("z flux agrees with an independent reimplementation") {
    auto s = make_synthetic(1.0 / 24, 2.5, 1.7, 0.008, [](double t, double x, double y) {
        return bump_profile(std::hypot(x - 0.3, y + 0.2) / 1.6) * std::cos(2.0 * x - y + 0.5 * t);
    });
    const GhostWeight weight(2.0);
    const double flux = z_flux(s.window(), weight);

    const Grid& g = s.grid;
    const double inv_2h = 0.5 / g.h, inv_2dt = 0.5 / s.dt;
    double expect = 0.0;
    for (int iy = 1; iy < g.n - 1; ++iy)
        for (int ix = 1; ix < g.n - 1; ++ix) {
            const double x = g.coord(ix), y = g.coord(iy);
            const double r = std::hypot(x, y);
            if (r == 0.0) continue;
            const std::size_t id = g.idx(ix, iy);
            const double ut = (s.after[0][id] - s.before[0][id]) * inv_2dt;
            const double ux = (s.center[0][id + 1] - s.center[0][id - 1]) * inv_2h;
            const double uy = (s.center[0][id + g.n] - s.center[0][id - g.n]) * inv_2h;
            const double z1 = x / r * ut + ux;
            const double z2 = y / r * ut + uy;
            const double tz = s.t - r;
            expect += std::exp(weight.eta(r - s.t)) * (z1 * z1 + z2 * z2) / (1.0 + tz * tz);
        }
    expect *= g.h * g.h;
    CHECK(flux == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("for a radial field the flux reduces to the outgoing-derivative form") {
    auto s = make_synthetic(1.0 / 64, 2.5, 1.3, 0.005, [](double t, double x, double y) {
        return (1.0 + 0.3 * t) * bump_profile(std::hypot(x, y) / 1.7);
    });
    const GhostWeight weight(2.0);
    const double flux = z_flux(s.window(), weight);

    // Z_k u = omega_k (d_t + d_r) u for radial u, so |Zu|^2 = (d_t u + d_r u)^2.
    const Grid& g = s.grid;
    const double inv_2h = 0.5 / g.h, inv_2dt = 0.5 / s.dt;
    double expect = 0.0;
    for (int iy = 1; iy < g.n - 1; ++iy)
        for (int ix = 1; ix < g.n - 1; ++ix) {
            const double x = g.coord(ix), y = g.coord(iy);
            const double r = std::hypot(x, y);
            if (r == 0.0) continue;
            const std::size_t id = g.idx(ix, iy);
            const double ut = (s.after[0][id] - s.before[0][id]) * inv_2dt;
            const double ux = (s.center[0][id + 1] - s.center[0][id - 1]) * inv_2h;
            const double uy = (s.center[0][id + g.n] - s.center[0][id - g.n]) * inv_2h;
            const double dr = (x * ux + y * uy) / r;
            const double tz = s.t - r;
            expect += std::exp(weight.eta(r - s.t)) * (ut + dr) * (ut + dr) / (1.0 + tz * tz);
        }
    expect *= g.h * g.h;
    CHECK(flux == doctest::Approx(expect).epsilon(2e-4)); // discrete gradients are O(h^2) off radial
}

TEST_CASE("outgoing ansatz has small flux relative to its ghost energy") {
    auto s = make_synthetic(1.0 / 64, 9.0, 6.0, 0.005, [](double t, double x, double y) {
        const double r = std::hypot(x, y);
        if (r < 1e-9) return 0.0;
        return bump_profile((r - t - 1.0) / 0.5) / std::sqrt(r);
    });
    const GhostWeight weight(2.0);
    const auto gi = ghost_integrals(s.window(), free_scalar(), weight);
    CHECK(gi.ghost > 0.0);
    CHECK(gi.flux < 0.02 * gi.ghost);
}

// ---- ghost identity ------------------------------------------------------------

TEST_CASE("zero run: identically zero residual") {
    const auto series = record_ghost(1.0 / 16, 1.5, free_scalar(), 0.0, 2);
    const auto res = verify_ghost_identity(series);
    CHECK(res.max_abs == 0.0);
}

TEST_CASE("free-wave residual shrinks by 2.8x or better when h is halved") {
    const auto coarse = record_ghost(1.0 / 32, 2.5, free_scalar(), 0.5, 2);
    const auto fine = record_ghost(1.0 / 64, 2.5, free_scalar(), 0.5, 2);
    const auto rc = verify_ghost_identity(coarse);
    const auto rf = verify_ghost_identity(fine);
    CHECK(rc.max_abs > 0.0);
    CHECK(rc.max_abs / rf.max_abs >= 2.8);
}

TEST_CASE("dissipative run: source integral is nonpositive throughout") {
    const auto series = record_ghost(1.0 / 16, 3.0, dissipative_scalar(), 0.3, 1);
    REQUIRE(series.t.size() > 10);
    for (double s : series.source) CHECK(s <= 0.0);
}

TEST_CASE("dissipative residual also shrinks by 2.8x under refinement") {
    const auto coarse = record_ghost(1.0 / 32, 2.5, dissipative_scalar(), 0.3, 2);
    const auto fine = record_ghost(1.0 / 64, 2.5, dissipative_scalar(), 0.3, 2);
    const auto rc = verify_ghost_identity(coarse);
    const auto rf = verify_ghost_identity(fine);
    CHECK(rc.max_abs > 0.0);
    CHECK(rc.max_abs / rf.max_abs >= 2.8);
}

TEST_CASE("discrete bound form of the ghost estimate holds for the dissipative run") {
    // ghost(t) + int_0^t flux <= exp(pi) * (ghost(0) + 2 int_0^t |source|).
    const auto series = record_ghost(1.0 / 16, 3.0, dissipative_scalar(), 0.3, 1);
    const double dt = series.t[1] - series.t[0];
    double flux_acc = 0.0, src_acc = 0.0;
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        flux_acc += dt * series.flux[i];
        src_acc += dt * std::abs(series.source[i]);
        CHECK(series.ghost[i] + flux_acc <=
              std::exp(std::numbers::pi) * (series.ghost[0] + 2.0 * src_acc) + 1e-12);
    }
}

TEST_CASE("identity checker validates its input") {
    GhostSeries bad;
    bad.t = {0.0, 0.5};
    bad.ghost = {1.0, 1.0};
    bad.flux = {0.0, 0.0};
    bad.source = {0.0, 0.0};
    CHECK_THROWS_AS(verify_ghost_identity(bad), std::invalid_argument);

    GhostSeries skew;
    skew.t = {0.0, 0.5, 1.2};
    skew.ghost = {1.0, 1.0, 1.0};
    skew.flux = {0.0, 0.0, 0.0};
    skew.source = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(verify_ghost_identity(skew), std::invalid_argument);
}

// ---- decay report ----------------------------------------------------------------

namespace {

RunSeries synthetic_run(double eps, double t_end, double dt_out,
                        const std::function<double(double)>& energy_of) {
    RunSeries run;
    run.eps = eps;
    for (double t = 0.0; t <= t_end + 1e-9; t += dt_out) {
        run.t.push_back(t);
        run.energy.push_back(energy_of(t));
        run.max_du.push_back(energy_of(t) / std::sqrt(1.0 + t));
        run.weighted.push_back(1.0);
        run.support.push_back(t + 1.0);
    }
    return run;
}

} // namespace

TEST_CASE("ratio series follows the definition") {
    const auto run = synthetic_run(0.5, 10.0, 0.5, [](double) { return 0.25; });
    const auto rep = decay_report(run, 0.01, 0.05);
    REQUIRE(rep.t.size() == run.t.size());
    for (std::size_t i = 0; i < run.t.size(); ++i) {
        const double expect =
            0.25 * std::pow(1.0 + 0.25 * std::log(run.t[i] + 2.0), 0.25 - 0.01) / 0.5;
        CHECK(rep.r[i] == doctest::Approx(expect).epsilon(1e-14));
        if (run.t[i] >= 2.0) {
            CHECK(rep.q[i] == doctest::Approx(run.max_du[i] * std::sqrt(run.t[i]) *
                                              std::sqrt(std::log(run.t[i])))
                                  .epsilon(1e-14));
        } else {
            CHECK(std::isnan(rep.q[i]));
        }
    }
}

TEST_CASE("constant energy is flagged as unbounded ratio growth") {
    const auto flat = synthetic_run(1.0, 50.0, 0.5, [](double) { return 0.3; });
    const auto rep = decay_report(flat, 0.01, 0.05);
    CHECK(rep.verdict == "completed");
    CHECK(!rep.r_bounded); // the weight alone grows past the 1.05 headroom
    CHECK(rep.energy_monotone);
    CHECK(rep.r_sup_time == doctest::Approx(50.0));
}

TEST_CASE("decaying energy keeps the ratio bounded") {
    const auto decaying = synthetic_run(1.0, 50.0, 0.5, [](double t) {
        return 0.3 / std::pow(1.0 + std::log(1.0 + t), 0.3);
    });
    const auto rep = decay_report(decaying, 0.01, 0.05);
    CHECK(rep.r_bounded);
    CHECK(rep.energy_monotone);
    CHECK(rep.monotone_violations == 0);
}

TEST_CASE("an energy bump is counted as a monotonicity violation") {
    auto run = synthetic_run(1.0, 10.0, 0.5, [](double) { return 0.2; });
    run.energy[4] = 0.25;
    const auto rep = decay_report(run, 0.01, 0.05);
    CHECK(!rep.energy_monotone);
    CHECK(rep.monotone_violations >= 1);
}

TEST_CASE("blow-up verdict is propagated") {
    auto run = synthetic_run(0.5, 5.0, 0.5, [](double) { return 0.1; });
    run.blew_up = true;
    run.blow_up_time = 4.5;
    const auto rep = decay_report(run, 0.01, 0.05);
    CHECK(rep.verdict == "blow-up");
    CHECK(rep.blow_up_time == doctest::Approx(4.5));
}

TEST_CASE("report validates delta and attaches ghost residuals") {
    auto run = synthetic_run(0.5, 5.0, 0.5, [](double) { return 0.1; });
    CHECK_THROWS_AS(decay_report(run, 0.0, 0.05), std::invalid_argument);

    GhostSeries gh;
    for (int i = 0; i < 5; ++i) {
        gh.t.push_back(0.5 * i);
        gh.ghost.push_back(1.0);
        gh.flux.push_back(0.0);
        gh.source.push_back(0.0);
    }
    run.ghost = gh;
    const auto rep = decay_report(run, 0.01, 0.05);
    REQUIRE(rep.ghost_residual.has_value());
    CHECK(rep.ghost_residual->max_abs == 0.0);
}
