// Characteristic profile dynamics along outgoing rays. In the log-time
// variable s = log t the profile system is autonomous,
//   dV/ds = -1/2 F^{c,red}(omega, V),
// and the linearization W (sensitivity to the initial profile) obeys
//   dW/ds = -1/2 dF^{c,red}/dY (omega, V) W.
// Both are integrated with classical fixed-step RK4, uniform in s, which
// gives geometric sampling in t.

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "wavelab/conditions.hpp"
#include "wavelab/tensors.hpp"

namespace wavelab {

// A ray is labeled by sigma = |x| - t and the direction angle. Integration
// starts no earlier than t = max(2, -2*sigma), where the ray enters the
// region in which the profile dynamics is meaningful.
struct RayCoordinate {
    double sigma = 0.0;
    double theta = 0.0;

    double t_start() const { return std::max(2.0, -2.0 * sigma); }
};

struct RayTrajectory {
    double sigma = 0.0;
    double theta = 0.0;
    std::vector<double> times;   // strictly increasing, times[0] = t0
    std::vector<double> log_times;
    std::vector<std::vector<double>> values;      // V per sample
    std::vector<std::vector<double>> variational; // W per sample (row-major N*N), may be empty

    // Set when the state exceeded the overflow limit; times/values end at the
    // last finite sample.
    std::optional<double> truncated_at;

    int n_samples() const { return static_cast<int>(times.size()); }
    bool complete() const { return !truncated_at.has_value(); }
};

// 256 RK4 steps per decade of t.
int default_profile_steps(double t0, double t1);

RayTrajectory integrate_profile(const CubicTensor& c, const Direction& omega,
                                std::span<const double> v0, double t0, double t1, int n_steps,
                                double overflow_limit = 1e12);

// Joint integration of V and the variational matrix W (w0 row-major N*N).
RayTrajectory integrate_variational(const CubicTensor& c, const Direction& omega,
                                    std::span<const double> v0, std::span<const double> w0,
                                    double t0, double t1, int n_steps,
                                    double overflow_limit = 1e12);

// Phi_i = V_i . A(omega) V_i along the trajectory.
std::vector<double> lyapunov_track(const WeightMatrix& a, const RayTrajectory& traj);

// Closed-form decay bound for scalar functions obeying
//   dPhi/dt <= -c0/t |Phi|^p + c1/t^q,  t >= t0 >= 2:
//   Phi(t) <= C2 / (log t)^{p*-1},  1/p + 1/p* = 1,
// with C2 = (log t0)^{p*} Phi(t0)/log 2
//         + c1/log 2 * Int_2^inf (log tau)^{p*} tau^{-q} dtau
//         + (p*/(c0 p))^{p*-1}.
class MatsBound {
public:
    MatsBound(double c0, double c1, double p, double q, double t0, double phi0);

    double p_star() const { return p_star_; }
    double c2() const { return c2_; }
    double bound(double t) const; // C2/(log t)^{p*-1}

    double c0, c1, p, q, t0, phi0;

private:
    double p_star_;
    double c2_;
};

struct MatsReport {
    double c2 = 0.0;
    double max_ratio = 0.0; // max over samples of Phi(t) (log t)^{p*-1} / C2
    double t_at_max = 0.0;
    bool pass = false;
    double tol = 0.0;
};

// Builds the bound with p = 2, c1 = 0, t0 = first trajectory time and
// Phi0 from lyapunov_track, then checks the trajectory against it.
// c0 must be positive (see estimate_c0).
MatsReport verify_mats(const RayTrajectory& traj, const WeightMatrix& a, double c0,
                       double tol = 1e-9);

} // namespace wavelab
