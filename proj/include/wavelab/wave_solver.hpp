// Explicit finite-difference solver for Box u = F(du) on a square 2D grid
// with compactly supported data. Three-level leapfrog with the 5-point
// Laplacian; the time derivative feeding the nonlinearity is the backward
// difference, optionally re-evaluated once with the centered difference
// (second order, default on). The domain is sized so the support never
// reaches the boundary, so no boundary condition is applied.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavelab/tensors.hpp"

namespace wavelab {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MissingInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Grid {
    double h = 0.0;
    int m = 0; // nodes per side n = 2m+1, coordinates (i-m)*h
    int n = 0;

    double length() const { return m * h; } // realized half-width L
    double coord(int i) const { return (i - m) * h; }
    std::size_t idx(int ix, int iy) const { return static_cast<std::size_t>(iy) * n + ix; }
};

struct GridConfig {
    double h = 1.0 / 32.0;
    double dt = 0.0; // <= 0 selects the default 0.45*h
    double half_width = 0.0;
    double t_end = 0.0;
    double cfl_max = 0.95;
    double blowup_threshold = 1e6;
    bool correction_sweep = true;

    double effective_dt() const { return dt > 0.0 ? dt : 0.45 * h; }
    double cfl() const; // dt*sqrt(2)/h
    void validate() const;
    Grid make_grid() const; // half-width rounded up to a multiple of h
};

enum class DataKind { radial_bump, bump_pair, custom };

struct InitialData {
    DataKind kind = DataKind::radial_bump;
    double radius = 1.0; // support radius R
    double eps = 0.0;
    std::vector<double> f_scale; // per component, empty = all ones
    std::vector<double> g_scale;
    // For DataKind::custom, filled by the caller (see io.hpp); each plane has
    // grid.n^2 samples.
    std::vector<std::vector<double>> f_samples, g_samples;
};

// Smooth compactly supported profile exp(-1/(1-s^2)) for s < 1, 0 otherwise.
double bump_profile(double s);

struct FieldState {
    Grid grid;
    int n_comp = 1;
    double t = 0.0;
    double dt = 0.0;
    long step_index = 0;
    int active_m = 0; // half-width in nodes of the box updates are confined to

    // Causal support mask: when >= 0, the update zeroes nodes with
    // |x| > mask_radius0 + t + h, where the exact solution vanishes by finite
    // propagation. Keeps the discrete support inside the light cone (the raw
    // stencil spreads one node per step, faster than the wave speed, and its
    // front smear would otherwise leak past |x| = t + R at any tolerance).
    double mask_radius0 = -1.0;

    std::vector<std::vector<double>> u, u_prev;
};

// Read-only view of up to three consecutive time levels centered at `t`.
// Observers use the centered time difference when both neighbors are
// available and the one-sided difference otherwise.
struct FieldWindow {
    const Grid* grid = nullptr;
    int n_comp = 1;
    double t = 0.0;
    double dt = 0.0;
    int active_m = 0;
    const std::vector<std::vector<double>>* before = nullptr;
    const std::vector<std::vector<double>>* center = nullptr;
    const std::vector<std::vector<double>>* after = nullptr;
};

FieldWindow window_of(const FieldState& state); // (u_prev, u), backward difference

FieldState initialize(const GridConfig& config, const InitialData& data, const SystemSpec& spec);

// One leapfrog step. `spare` must hold n_comp planes of grid.n^2 doubles;
// on return the buffers are rotated so that `spare` holds the dropped oldest
// level. Returns the max |u| of the new level for blow-up detection.
struct StepResult {
    double max_abs_u = 0.0;
};
StepResult advance(FieldState& state, const SystemSpec& spec, const GridConfig& config,
                   std::vector<std::vector<double>>& spare);

// Convenience single-step (copies the state; tests only).
FieldState step(const FieldState& state, const SystemSpec& spec, const GridConfig& config);

// Energy norm (1/2 Int sum_a |d_a u|^2)^(1/2) by midpoint quadrature with the
// solver's discrete derivatives, in the leapfrog-compatible staggered form
//   E^2(n+1/2) = 1/2 sum_x |(u^{n+1}-u^n)/dt|^2 + grad u^n . grad u^{n+1}
// averaged over the two half-levels around the window center. This is the
// quadratic form the scheme conserves exactly for F = 0, and its increments
// telescope to dt * sum F . d_t u under forcing, so dissipative runs are
// monotone step by step instead of oscillating at O(dt^2).
// With a two-level window the single available half-level form is used.
double energy(const FieldWindow& w);

struct SupNorms {
    double max_du = 0.0;      // max_x |du|
    double weighted = 0.0;    // max_x <t+|x|>^(1/2) <t-|x|>^(1-mu) |du|
};
SupNorms sup_norms(const FieldWindow& w, double mu);

// Largest |x| over nodes with any |u_c| > tol.
double support_radius(const FieldWindow& w, double tol = 1e-12);

// Outgoing-wave profile U = D_-(r^(1/2) u) sampled at x = (t+sigma)*omega by
// bilinear interpolation of u and its discrete derivatives:
//   U = (1/2) r^(1/2) (dr_u - dt_u) + (1/4) r^(-1/2) u.
// Returns nullopt when the ray point leaves the safe interior of the grid.
std::optional<std::vector<double>> extract_profile_point(const FieldWindow& w, double sigma,
                                                         const Direction& omega);

struct RunResult {
    bool blew_up = false;
    double blow_up_time = 0.0;
    long steps = 0;
    double final_time = 0.0;
    long observations = 0;
};

// Time loop: advances to t_end, invoking `observer` every `observe_every`
// steps on a centered three-level window (levels 0, k, 2k, ...). Blow-up
// (max |u| above the configured threshold) stops the run and is reported in
// the result, not thrown.
RunResult run_simulation(FieldState& state, const SystemSpec& spec, const GridConfig& config,
                         long observe_every, const std::function<void(const FieldWindow&)>& observer);

} // namespace wavelab
