#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fbmctrl/fbm.hpp"
#include "fbmctrl/fcalc.hpp"
#include "fbmctrl/meanfield.hpp"

namespace fbmctrl::sdde {

// State equation data: drift b-hat, diffusion sigma-hat, delay, initial
// segment on [-delta, 0] and horizon. The delay must be grid-aligned when
// simulated (delta = k * dt for integer k >= 1).
struct DelayedDynamics {
    meanfield::DriftFn b_hat;
    meanfield::DiffusionFn sigma_hat;
    double delay = 0.0;
    std::function<double(double)> initial_segment;  // continuous, deterministic
    double horizon = 0.0;
};

// Admissible control: shared open-loop path, per-particle open-loop paths,
// or a feedback rule of (t, x, xbar, v1, v2). Values are clipped to the
// control set [lo, hi].
class ControlPolicy {
public:
    static ControlPolicy open_loop(fcalc::SampledFunction u);
    static ControlPolicy open_loop_paths(fbm::TimeGrid grid, std::vector<double> u,
                                         int n_particles);
    static ControlPolicy feedback(
        std::function<double(double, double, double, double, double)> rule);

    void clamp_to(double lo, double hi);
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    bool is_feedback() const { return kind_ == Kind::Feedback; }
    bool is_per_particle() const { return kind_ == Kind::PerParticle; }
    int n_particles() const { return n_particles_; }
    const std::vector<double>& flat_values() const { return values_; }

    double value(int node, int particle, double t, double x, double xbar, double v1,
                 double v2) const;

    // u + theta * v with the direction shared across particles; clipped to
    // the same control set. Defined for open-loop policies.
    ControlPolicy perturbed(const fcalc::SampledFunction& v, double theta) const;

private:
    enum class Kind { Shared, PerParticle, Feedback };
    Kind kind_ = Kind::Shared;
    int n_nodes_ = 0;
    int n_particles_ = 1;
    std::vector<double> values_;  // Shared: n_nodes; PerParticle: N x n_nodes
    std::function<double(double, double, double, double, double)> rule_;
    double lo_ = -1e308, hi_ = 1e308;

    double clip(double u) const { return u < lo_ ? lo_ : (u > hi_ ? hi_ : u); }
};

// Particle trajectories on the extended grid [-delta, T]. The segment
// [-delta, 0] holds the initial condition exactly; realized control values
// are recorded so that variation and adjoint passes can reuse them.
struct ParticlePaths {
    fbm::TimeGrid grid;  // the [0, T] part
    double delay = 0.0;
    int delay_steps = 0;
    int n_particles = 0;
    std::vector<double> states;    // N x (delay_steps + n_steps + 1)
    std::vector<double> controls;  // N x (n_steps + 1)
    std::shared_ptr<const fbm::FbmEnsemble> noise;

    int row_len() const { return delay_steps + grid.n_steps + 1; }
    // state at node k of [0, T]
    double x(int i, int k) const {
        return states[static_cast<std::size_t>(i) * row_len() + delay_steps + k];
    }
    double& x(int i, int k) {
        return states[static_cast<std::size_t>(i) * row_len() + delay_steps + k];
    }
    // state at t_k - delta (falls into the initial segment for small k)
    double x_lag(int i, int k) const {
        return states[static_cast<std::size_t>(i) * row_len() + k];
    }
    double u(int i, int k) const {
        return controls[static_cast<std::size_t>(i) * (grid.n_steps + 1) + k];
    }
    std::vector<double> states_at(int k) const;      // column over particles
    std::vector<double> states_lagged(int k) const;  // column at t_k - delta

    void dump_csv(std::ostream& os) const;          // particle_id,t,x
    void dump_moments_csv(std::ostream& os) const;  // t,mean,var
};

// Explicit Euler scheme with synchronous empirical moments (one shared law
// per step). Deterministic given the noise ensemble. Throws on the first
// non-finite state, naming particle and step.
ParticlePaths simulate(const DelayedDynamics& dyn, const ControlPolicy& u,
                       std::shared_ptr<const fbm::FbmEnsemble> noise);

// First-variation process along a control direction, driven by the same
// noise and the realized controls stored in `base`. Y = 0 on [-delta, 0].
ParticlePaths simulate_variation(const DelayedDynamics& dyn, const ParticlePaths& base,
                                 const ControlPolicy& direction);

}  // namespace fbmctrl::sdde
