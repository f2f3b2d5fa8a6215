#include "fbmctrl/sdde.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fbmctrl/numerics.hpp"

namespace fbmctrl::sdde {

ControlPolicy ControlPolicy::open_loop(fcalc::SampledFunction u) {
    ControlPolicy p;
    p.kind_ = Kind::Shared;
    p.n_nodes_ = u.grid.n_nodes();
    p.values_ = std::move(u.values);
    return p;
}

ControlPolicy ControlPolicy::open_loop_paths(fbm::TimeGrid grid, std::vector<double> u,
                                             int n_particles) {
    if (static_cast<int>(u.size()) != n_particles * grid.n_nodes())
        throw std::invalid_argument("ControlPolicy: need N x n_nodes control values");
    ControlPolicy p;
    p.kind_ = Kind::PerParticle;
    p.n_nodes_ = grid.n_nodes();
    p.n_particles_ = n_particles;
    p.values_ = std::move(u);
    return p;
}

ControlPolicy ControlPolicy::feedback(
    std::function<double(double, double, double, double, double)> rule) {
    ControlPolicy p;
    p.kind_ = Kind::Feedback;
    p.rule_ = std::move(rule);
    return p;
}

void ControlPolicy::clamp_to(double lo, double hi) {
    if (!(lo <= hi)) throw std::invalid_argument("ControlPolicy: empty control set");
    lo_ = lo;
    hi_ = hi;
}

double ControlPolicy::value(int node, int particle, double t, double x, double xbar,
                            double v1, double v2) const {
    switch (kind_) {
        case Kind::Shared:
            return clip(values_[node]);
        case Kind::PerParticle:
            return clip(values_[static_cast<std::size_t>(particle) * n_nodes_ + node]);
        case Kind::Feedback:
            return clip(rule_(t, x, xbar, v1, v2));
    }
    return 0.0;
}

ControlPolicy ControlPolicy::perturbed(const fcalc::SampledFunction& v, double theta) const {
    if (kind_ == Kind::Feedback)
        throw std::invalid_argument("ControlPolicy: cannot perturb a feedback rule");
    ControlPolicy p = *this;
    for (int i = 0; i < n_particles_; ++i)
        for (int k = 0; k < n_nodes_; ++k)
            p.values_[static_cast<std::size_t>(i) * n_nodes_ + k] += theta * v[k];
    return p;
}

std::vector<double> ParticlePaths::states_at(int k) const {
    std::vector<double> col(n_particles);
    for (int i = 0; i < n_particles; ++i) col[i] = x(i, k);
    return col;
}

std::vector<double> ParticlePaths::states_lagged(int k) const {
    std::vector<double> col(n_particles);
    for (int i = 0; i < n_particles; ++i) col[i] = x_lag(i, k);
    return col;
}

void ParticlePaths::dump_csv(std::ostream& os) const {
    os << "particle_id,t,x\n";
    std::ostringstream buf;
    buf.precision(17);
    const double dt = grid.dt();
    for (int i = 0; i < n_particles; ++i)
        for (int k = -delay_steps; k <= grid.n_steps; ++k)
            buf << i << ',' << k * dt << ','
                << states[static_cast<std::size_t>(i) * row_len() + delay_steps + k] << '\n';
    os << buf.str();
}

void ParticlePaths::dump_moments_csv(std::ostream& os) const {
    os << "t,mean,var\n";
    std::ostringstream buf;
    buf.precision(17);
    for (int k = 0; k <= grid.n_steps; ++k) {
        const std::vector<double> col = states_at(k);
        buf << grid.node(k) << ',' << mean(col) << ',' << sample_variance(col) << '\n';
    }
    os << buf.str();
}

namespace {

int delay_steps_for(const DelayedDynamics& dyn, const fbm::TimeGrid& grid) {
    const double dt = grid.dt();
    const int k = static_cast<int>(std::lround(dyn.delay / dt));
    if (k < 1 || std::abs(k * dt - dyn.delay) > 1e-9 * std::max(1.0, dyn.delay))
        throw std::invalid_argument("simulate: delay must equal k * dt for integer k >= 1");
    return k;
}

[[noreturn]] void blow_up(const char* what, int particle, int step) {
    throw std::runtime_error(std::string(what) + ": non-finite state at particle " +
                             std::to_string(particle) + ", step " + std::to_string(step));
}

}  // namespace

ParticlePaths simulate(const DelayedDynamics& dyn, const ControlPolicy& u,
                       std::shared_ptr<const fbm::FbmEnsemble> noise) {
    const fbm::TimeGrid& grid = noise->grid;
    if (std::abs(grid.t_end - dyn.horizon) > 1e-12 * std::max(1.0, dyn.horizon))
        throw std::invalid_argument("simulate: noise grid does not span the horizon");
    const int kd = delay_steps_for(dyn, grid);
    const int n = grid.n_steps;
    const int big_n = noise->n_paths;
    const double dt = grid.dt();

    if (u.is_per_particle() && u.n_particles() != big_n)
        throw std::invalid_argument("simulate: per-particle control count mismatch");

    ParticlePaths out;
    out.grid = grid;
    out.delay = dyn.delay;
    out.delay_steps = kd;
    out.n_particles = big_n;
    out.states.assign(static_cast<std::size_t>(big_n) * (kd + n + 1), 0.0);
    out.controls.assign(static_cast<std::size_t>(big_n) * (n + 1), 0.0);
    out.noise = noise;

    // initial segment, pinned exactly
    for (int i = 0; i < big_n; ++i)
        for (int k = 0; k <= kd; ++k)
            out.states[static_cast<std::size_t>(i) * out.row_len() + k] =
                dyn.initial_segment(dt * (k - kd));

    const auto& psi1 = dyn.b_hat.psi1;
    const auto& psi2 = dyn.b_hat.psi2;
    const auto& phi1 = dyn.sigma_hat.phi1;
    const auto& phi2 = dyn.sigma_hat.phi2;

    std::vector<double> tmp(big_n);
    auto column_moment = [&](const std::vector<double>& col, const meanfield::MomentMap& mm) {
        for (int i = 0; i < big_n; ++i) tmp[i] = mm.value(col[i]);
        return mean(tmp);
    };

    for (int k = 0; k < n; ++k) {
        const double t = grid.node(k);
        const std::vector<double> cur = out.states_at(k);
        const std::vector<double> lag = out.states_lagged(k);
        const double v1b = column_moment(cur, psi1);
        const double v2b = column_moment(lag, psi2);
        const double v1s = column_moment(cur, phi1);
        const double v2s = column_moment(lag, phi2);
        const double sig = dyn.sigma_hat.value(t, v1s, v2s);

        for (int i = 0; i < big_n; ++i) {
            const double ui = u.value(k, i, t, cur[i], lag[i], v1b, v2b);
            out.controls[static_cast<std::size_t>(i) * (n + 1) + k] = ui;
            const double drift = dyn.b_hat.value(t, cur[i], lag[i], v1b, v2b, ui);
            const double db = noise->value(i, k + 1) - noise->value(i, k);
            const double next = cur[i] + drift * dt + sig * db;
            if (!std::isfinite(next)) blow_up("simulate", i, k + 1);
            out.x(i, k + 1) = next;
        }
    }
    // record the control at the terminal node too (feedback rules evaluated there)
    {
        const std::vector<double> cur = out.states_at(n);
        const std::vector<double> lag = out.states_lagged(n);
        const double v1b = column_moment(cur, psi1);
        const double v2b = column_moment(lag, psi2);
        for (int i = 0; i < big_n; ++i)
            out.controls[static_cast<std::size_t>(i) * (n + 1) + n] =
                u.value(n, i, grid.node(n), cur[i], lag[i], v1b, v2b);
    }
    return out;
}

ParticlePaths simulate_variation(const DelayedDynamics& dyn, const ParticlePaths& base,
                                 const ControlPolicy& direction) {
    const fbm::TimeGrid& grid = base.grid;
    const int kd = base.delay_steps;
    const int n = grid.n_steps;
    const int big_n = base.n_particles;
    const double dt = grid.dt();
    const auto& noise = *base.noise;

    ParticlePaths out;
    out.grid = grid;
    out.delay = base.delay;
    out.delay_steps = kd;
    out.n_particles = big_n;
    out.states.assign(static_cast<std::size_t>(big_n) * (kd + n + 1), 0.0);  // Y = 0 on [-delta,0]
    out.controls.assign(static_cast<std::size_t>(big_n) * (n + 1), 0.0);
    out.noise = base.noise;

    std::vector<double> tmp(big_n);
    auto column_moment = [&](const std::vector<double>& col, const meanfield::MomentMap& mm) {
        for (int i = 0; i < big_n; ++i) tmp[i] = mm.value(col[i]);
        return mean(tmp);
    };
    // (1/N) sum_j mm'(X_j) Y_j  -- the tilde-expectation reduced over the ensemble
    auto weighted_moment = [&](const std::vector<double>& xs, const std::vector<double>& ys,
                               const meanfield::MomentMap& mm) {
        for (int i = 0; i < big_n; ++i) tmp[i] = mm.d(xs[i]) * ys[i];
        return mean(tmp);
    };

    for (int k = 0; k < n; ++k) {
        const double t = grid.node(k);
        const std::vector<double> xs = base.states_at(k);
        const std::vector<double> xl = base.states_lagged(k);
        const std::vector<double> ys = out.states_at(k);
        const std::vector<double> yl = out.states_lagged(k);

        const double v1b = column_moment(xs, dyn.b_hat.psi1);
        const double v2b = column_moment(xl, dyn.b_hat.psi2);
        const double v1s = column_moment(xs, dyn.sigma_hat.phi1);
        const double v2s = column_moment(xl, dyn.sigma_hat.phi2);

        const double mf_b1 = weighted_moment(xs, ys, dyn.b_hat.psi1);
        const double mf_b2 = weighted_moment(xl, yl, dyn.b_hat.psi2);
        const double mf_s1 = weighted_moment(xs, ys, dyn.sigma_hat.phi1);
        const double mf_s2 = weighted_moment(xl, yl, dyn.sigma_hat.phi2);

        // diffusion perturbation is a deterministic functional of the law
        const double psi_delta = dyn.sigma_hat.d_v1(t, v1s, v2s) * mf_s1 +
                                 dyn.sigma_hat.d_v2(t, v1s, v2s) * mf_s2;

        for (int i = 0; i < big_n; ++i) {
            const double ui = base.u(i, k);
            const double vi = direction.value(k, i, t, xs[i], xl[i], v1b, v2b);
            out.controls[static_cast<std::size_t>(i) * (n + 1) + k] = vi;
            const double drift = dyn.b_hat.d_x(t, xs[i], xl[i], v1b, v2b, ui) * ys[i] +
                                 dyn.b_hat.d_xbar(t, xs[i], xl[i], v1b, v2b, ui) * yl[i] +
                                 dyn.b_hat.d_v1(t, xs[i], xl[i], v1b, v2b, ui) * mf_b1 +
                                 dyn.b_hat.d_v2(t, xs[i], xl[i], v1b, v2b, ui) * mf_b2 +
                                 dyn.b_hat.d_u(t, xs[i], xl[i], v1b, v2b, ui) * vi;
            const double db = noise.value(i, k + 1) - noise.value(i, k);
            const double next = ys[i] + drift * dt + psi_delta * db;
            if (!std::isfinite(next)) blow_up("simulate_variation", i, k + 1);
            out.x(i, k + 1) = next;
        }
    }
    return out;
}

}  // namespace fbmctrl::sdde
