#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "wavelab/wave_solver.hpp"

using namespace wavelab;
using namespace testutil;

namespace {

SystemSpec free_scalar() { return SystemSpec(1, QuadraticTensor(1, {}), CubicTensor(1, {})); }

SystemSpec dissipative_scalar() {
    return SystemSpec(1, QuadraticTensor(1, {}), dissipator_1d());
}

GridConfig make_config(double h, double half_width, double t_end) {
    GridConfig cfg;
    cfg.h = h;
    cfg.half_width = half_width;
    cfg.t_end = t_end;
    return cfg;
}

InitialData bump_data(double eps, double radius = 1.0) {
    InitialData d;
    d.kind = DataKind::radial_bump;
    d.radius = radius;
    d.eps = eps;
    return d;
}

// Compactly supported profile phi(s) = bump((s - center)/width) and its
// derivative, used to inject traveling-wave ansatz fields.
double phi(double s, double center, double width) { return bump_profile((s - center) / width); }

double phi_prime(double s, double center, double width) {
    const double x = (s - center) / width;
    if (x * x >= 1.0) return 0.0;
    const double d = 1.0 - x * x;
    return bump_profile(x) * (-2.0 * x / (d * d)) / width;
}

} // namespace

TEST_CASE("grid config validation") {
    auto cfg = make_config(1.0 / 16, 2.0, 1.0);
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.cfl() == doctest::Approx(0.45 * std::numbers::sqrt2));

    auto bad = cfg;
    bad.dt = cfg.h; // cfl = sqrt(2) > 0.95
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    auto tiny = make_config(1.0 / 16, 1.5, 1.0);
    CHECK_THROWS_AS(initialize(tiny, bump_data(0.1), free_scalar()), ConfigError);
}

TEST_CASE("zero amplitude gives the zero state and stays zero") {
    auto cfg = make_config(1.0 / 8, 2.5, 1.0);
    auto st = initialize(cfg, bump_data(0.0), dissipative_scalar());
    for (double v : st.u[0]) CHECK(v == 0.0);
    for (double v : st.u_prev[0]) CHECK(v == 0.0);

    auto next = step(st, dissipative_scalar(), cfg);
    for (double v : next.u[0]) CHECK(v == 0.0);
    CHECK(energy(window_of(next)) == 0.0);
    CHECK(support_radius(window_of(next)) == 0.0);
}

TEST_CASE("initial support is inside the data radius") {
    auto cfg = make_config(1.0 / 16, 3.0, 1.0);
    auto st = initialize(cfg, bump_data(0.5, 1.25), free_scalar());
    CHECK(support_radius(window_of(st)) <= 1.25);
    CHECK(support_radius(window_of(st)) > 1.0);

    InitialData pair = bump_data(0.5, 1.25);
    pair.kind = DataKind::bump_pair;
    auto st2 = initialize(cfg, pair, free_scalar());
    CHECK(support_radius(window_of(st2)) <= 1.25);
}

TEST_CASE("Taylor start reconstructs the initial velocity to first order") {
    auto base = make_config(1.0 / 32, 3.0, 1.0);
    InitialData d = bump_data(0.4);
    d.g_scale = {1.0};

    auto deviation = [&](double dt) {
        auto cfg = base;
        cfg.dt = dt;
        auto st = initialize(cfg, d, dissipative_scalar());
        const Grid& g = st.grid;
        double worst = 0.0;
        for (int iy = 0; iy < g.n; ++iy)
            for (int ix = 0; ix < g.n; ++ix) {
                const std::size_t id = g.idx(ix, iy);
                const double rec = (st.u[0][id] - st.u_prev[0][id]) / dt;
                const double exact = 0.4 * bump_profile(std::hypot(g.coord(ix), g.coord(iy)));
                worst = std::max(worst, std::abs(rec - exact));
            }
        return worst;
    };
    const double e1 = deviation(0.01);
    const double e2 = deviation(0.005);
    CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.15)); // O(dt)
    CHECK(e1 < 0.03);
}

TEST_CASE("energy scales linearly in the amplitude for a linear system") {
    auto cfg = make_config(1.0 / 16, 3.0, 1.0);
    auto st1 = initialize(cfg, bump_data(1.0), free_scalar());
    auto st2 = initialize(cfg, bump_data(0.37), free_scalar());
    const double e1 = energy(window_of(st1));
    const double e2 = energy(window_of(st2));
    CHECK(e2 == doctest::Approx(0.37 * e1).epsilon(1e-13));
    // squared energy scales by eps^2
    CHECK(e2 * e2 == doctest::Approx(0.37 * 0.37 * e1 * e1).epsilon(1e-12));
}

TEST_CASE("free wave: plane-symmetric data transports like the 1D solution") {
    // u(0,x) = phi(x1), du/dt(0,x) = -phi'(x1) gives u(t,x) = phi(x1 - t).
    // The y-boundary ring is frozen, so compare inside the region its error
    // cone cannot reach.
    auto run_error = [&](double h) {
        auto cfg = make_config(h, 4.0, 1.5);
        cfg.dt = 0.5 * h; // dyadic: identical final times across resolutions
        Grid g = cfg.make_grid();
        InitialData d;
        d.kind = DataKind::custom;
        d.eps = 1.0;
        d.f_samples.assign(1, std::vector<double>(static_cast<std::size_t>(g.n) * g.n, 0.0));
        d.g_samples = d.f_samples;
        for (int iy = 0; iy < g.n; ++iy)
            for (int ix = 0; ix < g.n; ++ix) {
                const double x1 = g.coord(ix);
                d.f_samples[0][g.idx(ix, iy)] = phi(x1, 0.0, 1.0);
                d.g_samples[0][g.idx(ix, iy)] = -phi_prime(x1, 0.0, 1.0);
            }
        auto st = initialize(cfg, d, free_scalar());
        run_simulation(st, free_scalar(), cfg, 0, nullptr);
        const double t = st.t;
        double worst = 0.0;
        const double safe = g.length() - t - 1.0;
        for (int iy = 0; iy < g.n; ++iy) {
            if (std::abs(g.coord(iy)) > safe) continue;
            for (int ix = 1; ix < g.n - 1; ++ix) {
                const double exact = phi(g.coord(ix) - t, 0.0, 1.0);
                worst = std::max(worst, std::abs(st.u[0][g.idx(ix, iy)] - exact));
            }
        }
        return worst;
    };
    const double e1 = run_error(1.0 / 32);
    const double e2 = run_error(1.0 / 64);
    CHECK(e1 < 6e-3);
    CHECK(e1 / e2 > 2.8); // second order
    CHECK(e1 / e2 < 5.5);
}

TEST_CASE("free wave conserves the energy to 1e-3 relative") {
    auto cfg = make_config(1.0 / 32, 6.5, 5.0);
    auto st = initialize(cfg, bump_data(0.5), free_scalar());
    double e0 = -1.0, worst = 0.0;
    run_simulation(st, free_scalar(), cfg, 8, [&](const FieldWindow& w) {
        const double e = energy(w);
        if (e0 < 0.0) e0 = e;
        worst = std::max(worst, std::abs(e - e0) / e0);
    });
    CHECK(e0 > 0.0);
    CHECK(worst <= 1e-3); // conserved form: drift is round-off level
}

TEST_CASE("measured convergence order of the free solver is at least 1.9") {
    // Three nested grids, dt/h fixed; compare at the common coarse nodes.
    const double t_end = 1.0;
    auto run = [&](double h) {
        auto cfg = make_config(h, 2.5, t_end);
        cfg.dt = 0.5 * h; // keeps the final times identical across levels
        auto st = initialize(cfg, bump_data(1.0), free_scalar());
        run_simulation(st, free_scalar(), cfg, 0, nullptr);
        return st;
    };
    const auto s1 = run(1.0 / 16);
    const auto s2 = run(1.0 / 32);
    const auto s3 = run(1.0 / 64);
    REQUIRE(s2.grid.m == 2 * s1.grid.m);
    REQUIRE(s3.grid.m == 2 * s2.grid.m);

    auto diff = [](const FieldState& coarse, const FieldState& fine) {
        double worst = 0.0;
        const Grid& gc = coarse.grid;
        for (int iy = 0; iy < gc.n; ++iy)
            for (int ix = 0; ix < gc.n; ++ix) {
                const double a = coarse.u[0][gc.idx(ix, iy)];
                const double b = fine.u[0][fine.grid.idx(2 * ix, 2 * iy)];
                worst = std::max(worst, std::abs(a - b));
            }
        return worst;
    };
    const double e1 = diff(s1, s2);
    const double e2 = diff(s2, s3);
    const double order = std::log2(e1 / e2);
    CHECK(order >= 1.9);
    CHECK(order <= 2.6);
}

TEST_CASE("dissipative run: energy is nonincreasing step by step") {
    auto cfg = make_config(1.0 / 16, 4.5, 3.0);
    InitialData d = bump_data(0.3);
    d.g_scale = {1.0};
    auto st = initialize(cfg, d, dissipative_scalar());
    double prev = -1.0;
    int violations = 0;
    run_simulation(st, dissipative_scalar(), cfg, 1, [&](const FieldWindow& w) {
        const double e = energy(w);
        if (prev >= 0.0 && e > prev + 1e-10) ++violations;
        prev = e;
    });
    CHECK(violations == 0);
}

TEST_CASE("discrete light cone: support radius grows at most by t + R + 2h") {
    auto cfg = make_config(1.0 / 16, 7.5, 5.0);
    auto st = initialize(cfg, bump_data(0.5), free_scalar());
    bool ok = true;
    run_simulation(st, free_scalar(), cfg, 4, [&](const FieldWindow& w) {
        const double sr = support_radius(w);
        if (sr > w.t + 1.0 + 2.0 * w.grid->h + 1e-9) ok = false;
    });
    CHECK(ok);
    CHECK(support_radius(window_of(st)) <= 5.0 + 1.0 + 2.0 * cfg.h);
}

TEST_CASE("sup norms: zero state, weight bound at t = 0") {
    auto cfg = make_config(1.0 / 32, 3.0, 1.0);
    auto zero = initialize(cfg, bump_data(0.0), free_scalar());
    const auto z = sup_norms(window_of(zero), 0.05);
    CHECK(z.max_du == 0.0);
    CHECK(z.weighted == 0.0);

    InitialData d = bump_data(0.4);
    d.g_scale = {1.0};
    auto st = initialize(cfg, d, free_scalar());
    const double mu = 0.05;
    const auto s = sup_norms(window_of(st), mu);
    CHECK(s.max_du > 0.0);
    // discrete gradients live within R + h of the origin
    const double r_max = 1.0 + cfg.h;
    const double cap = std::pow(1.0 + r_max * r_max, 0.5 * (1.5 - mu));
    CHECK(s.weighted <= cap * s.max_du * (1.0 + 1e-12));

    CHECK_THROWS_AS(sup_norms(window_of(st), 0.2), std::invalid_argument);
    CHECK_THROWS_AS(sup_norms(window_of(st), 0.0), std::invalid_argument);
}

TEST_CASE("outgoing ansatz: extracted profile matches the analytic derivative") {
    // u = phi(r - t)/sqrt(r) gives U = D_-(r^(1/2) u) = phi'(r - t) exactly.
    auto extract_error = [&](double h) {
        GridConfig cfg = make_config(h, 9.0, 8.0);
        Grid g = cfg.make_grid();
        const double t = 6.0, dt = cfg.effective_dt();
        const std::size_t plane = static_cast<std::size_t>(g.n) * g.n;
        std::vector<std::vector<double>> before(1, std::vector<double>(plane, 0.0));
        auto center = before, after = before;
        auto fill = [&](std::vector<double>& dst, double at) {
            for (int iy = 0; iy < g.n; ++iy)
                for (int ix = 0; ix < g.n; ++ix) {
                    const double r = std::hypot(g.coord(ix), g.coord(iy));
                    if (r < 1e-12) continue;
                    dst[g.idx(ix, iy)] = phi(r - at, 1.0, 0.5) / std::sqrt(r);
                }
        };
        fill(before[0], t - dt);
        fill(center[0], t);
        fill(after[0], t + dt);
        FieldWindow w{&g, 1, t, dt, g.m - 1, &before, &center, &after};

        double worst = 0.0;
        for (double sigma : {0.7, 1.0, 1.3})
            for (double theta : {0.0, 0.9, 2.4, 4.0}) {
                const auto u = extract_profile_point(w, sigma, Direction(theta));
                REQUIRE(u.has_value());
                worst = std::max(worst, std::abs((*u)[0] - phi_prime(sigma, 1.0, 0.5)));
            }
        return worst;
    };
    const double e1 = extract_error(1.0 / 32);
    const double e2 = extract_error(1.0 / 64);
    CHECK(e1 < 5e-3);
    CHECK(e1 / e2 > 3.0);
}

TEST_CASE("profile extraction leaves the grid gracefully") {
    auto cfg = make_config(1.0 / 8, 3.0, 1.0);
    auto st = initialize(cfg, bump_data(0.1), free_scalar());
    st.t = 2.0; // pretend we are late enough for the ray to exist
    const auto u = extract_profile_point(window_of(st), 1.5, Direction(0.0));
    CHECK(!u.has_value()); // (t + sigma) = 3.5 > L - 2h
    CHECK_THROWS_AS(extract_profile_point(window_of(st), -2.0 + 0.01, Direction(0.0)),
                    std::invalid_argument); // ray point at the origin
}

TEST_CASE("quadratic violator blows up and is reported, not thrown") {
    auto cfg = make_config(1.0 / 16, 9.5, 8.0);
    SystemSpec sys(1, violator_quadratic(), CubicTensor(1, {}));
    InitialData d = bump_data(2.0); // large amplitude at desk scale
    d.g_scale = {1.0};
    auto st = initialize(cfg, d, sys);
    const auto res = run_simulation(st, sys, cfg, 0, nullptr);
    CHECK(res.blew_up);
    CHECK(res.blow_up_time < 8.0);
    CHECK(res.blow_up_time > 0.0);
}

TEST_CASE("identical configs give bit-identical trajectories") {
    auto cfg = make_config(1.0 / 16, 4.5, 2.0);
    InitialData d = bump_data(0.3);
    d.g_scale = {1.0};
    std::vector<double> e1, e2;
    for (auto* dst : {&e1, &e2}) {
        auto st = initialize(cfg, d, dissipative_scalar());
        run_simulation(st, dissipative_scalar(), cfg, 4,
                       [&](const FieldWindow& w) { dst->push_back(energy(w)); });
    }
    REQUIRE(e1.size() == e2.size());
    for (std::size_t i = 0; i < e1.size(); ++i) CHECK(e1[i] == e2[i]);
}
