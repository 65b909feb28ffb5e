// Ghost-weight energy bookkeeping and decay reporting. The multiplier is
// e^eta with eta(t,x) the primitive of <z>^-rho evaluated at z = |x| - t;
// it is bounded between 1 and exp of the full integral, and produces the
// sign-definite flux of the good derivatives Z_k = (x_k/|x|) d_t + d_k in
// the energy identity
//   d/dt Int e^eta |du|^2 + Int e^eta |Zu|^2 <t-|x|>^-rho
//     = 2 Int e^eta F(du) . d_t u.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wavelab/wave_solver.hpp"

namespace wavelab {

class GhostWeight {
public:
    // The table covers z in [z_min, z_max]; rho = 2 uses the arctan closed
    // form and ignores the table range.
    GhostWeight(double rho, double z_min = -64.0, double z_max = 64.0);

    double rho() const { return rho_; }
    double eta(double z) const;
    double eta_total() const { return total_; } // Int_R <z>^-rho dz

private:
    double rho_;
    double total_ = 0.0;
    bool closed_form_ = false;
    double z_lo_ = 0.0, dz_ = 0.0;
    std::vector<double> table_;
};

// Quadrature of e^eta |du|^2 over the grid, all components summed.
double ghost_energy(const FieldWindow& w, const GhostWeight& weight);

// Quadrature of e^eta |Zu|^2 <t-|x|>^-rho; the origin node is skipped (the
// radial direction is undefined there and its cell is O(h^2)).
double z_flux(const FieldWindow& w, const GhostWeight& weight);

struct GhostIntegrals {
    double ghost = 0.0;
    double flux = 0.0;
    double source = 0.0; // 2 Int e^eta F(du) . d_t u
    double eta_min = 0.0, eta_max = 0.0;
};

// Fused single-pass version used by the run observers; also reports the eta
// range seen so the weight bounds can be asserted.
GhostIntegrals ghost_integrals(const FieldWindow& w, const SystemSpec& spec,
                               const GhostWeight& weight);

struct GhostSeries {
    std::vector<double> t, ghost, flux, source;
};

struct GhostResidual {
    std::vector<double> t, residual;
    double max_abs = 0.0;
};

// Centered-difference residual of the ghost energy identity on a uniformly
// sampled series. Needs at least 3 aligned samples.
GhostResidual verify_ghost_identity(const GhostSeries& series);

struct RunSeries {
    std::vector<double> t, energy, max_du, weighted, support;
    std::optional<GhostSeries> ghost;
    bool blew_up = false;
    double blow_up_time = 0.0;
    double eps = 0.0;
};

struct DecayReport {
    std::string verdict; // "completed" or "blow-up"
    double blow_up_time = 0.0;
    double eps = 0.0, delta = 0.0, mu = 0.0;
    double headroom = 1.05;
    double monotone_tol = 1e-10;

    std::vector<double> t;
    std::vector<double> r; // energy * (1 + eps^2 log(t+2))^(1/4-delta) / eps
    std::vector<double> q; // max_du * t^(1/2) (log t)^(1/2), NaN below t = 2

    double reference_time = 0.0; // first sample with t >= 2
    double r_ref = 0.0, r_sup = 0.0, r_sup_time = 0.0;
    double q_ref = 0.0, q_sup = 0.0;
    bool r_bounded = false; // sup r <= headroom * r_ref
    bool q_bounded = false;
    bool energy_monotone = false;
    int monotone_violations = 0;
    double energy_initial = 0.0, energy_final = 0.0;

    std::optional<GhostResidual> ghost_residual;
};

// Assembles the weighted ratio series and boundedness/monotonicity verdicts
// from a recorded run. Asymptotic rates are deliberately not fitted; the raw
// series are kept for offline analysis.
DecayReport decay_report(const RunSeries& run, double delta, double mu, double headroom = 1.05,
                         double monotone_tol = 1e-10);

} // namespace wavelab
