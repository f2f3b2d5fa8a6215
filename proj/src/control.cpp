#include "fbmctrl/control.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fbmctrl/numerics.hpp"

namespace fbmctrl::control {

double hamiltonian(const HamiltonianSpec& spec, double t, double x, double xbar,
                   const meanfield::EmpiricalMeasure& m,
                   const meanfield::EmpiricalMeasure& mbar, double u, double p) {
    const double v1f = moment(m, spec.f_hat.psi1.value);
    const double v2f = moment(mbar, spec.f_hat.psi2.value);
    const double v1b = moment(m, spec.b_hat.psi1.value);
    const double v2b = moment(mbar, spec.b_hat.psi2.value);
    const double v1s = moment(m, spec.sigma_hat.phi1.value);
    const double v2s = moment(mbar, spec.sigma_hat.phi2.value);
    double h = spec.f_hat.value(t, x, xbar, v1f, v2f, u) +
               p * spec.b_hat.value(t, x, xbar, v1b, v2b, u);
    if (spec.q_weight) h += spec.sigma_hat.value(t, v1s, v2s) * spec.q_weight(t);
    return h;
}

namespace {

struct CostColumns {
    std::vector<double> running;   // per particle
    std::vector<double> terminal;  // per particle
};

CostColumns cost_columns(const sdde::ParticlePaths& paths, const CostSpec& cost) {
    const int big_n = paths.n_particles;
    const int n = paths.grid.n_steps;
    const double dt = paths.grid.dt();

    CostColumns out;
    out.running.assign(big_n, 0.0);
    std::vector<double> tmp(big_n);
    auto column_moment = [&](const std::vector<double>& col, const meanfield::MomentMap& mm) {
        for (int i = 0; i < big_n; ++i) tmp[i] = mm.value(col[i]);
        return mean(tmp);
    };

    for (int k = 0; k < n; ++k) {
        const double t = paths.grid.node(k);
        const std::vector<double> xs = paths.states_at(k);
        const std::vector<double> xl = paths.states_lagged(k);
        const double v1 = column_moment(xs, cost.f_hat.psi1);
        const double v2 = column_moment(xl, cost.f_hat.psi2);
        for (int i = 0; i < big_n; ++i)
            out.running[i] += cost.f_hat.value(t, xs[i], xl[i], v1, v2, paths.u(i, k)) * dt;
    }

    const std::vector<double> x_t = paths.states_at(n);
    if (cost.terminal_per_particle) {
        out.terminal = cost.terminal_per_particle(x_t);
    } else {
        const double v = column_moment(x_t, cost.g_hat.gamma);
        out.terminal.resize(big_n);
        for (int i = 0; i < big_n; ++i) out.terminal[i] = cost.g_hat.value(x_t[i], v);
    }
    return out;
}

std::vector<double> totals(const CostColumns& c) {
    std::vector<double> t(c.running.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = c.running[i] + c.terminal[i];
    return t;
}

}  // namespace

std::vector<double> per_particle_cost(const sdde::DelayedDynamics& dyn,
                                      const sdde::ControlPolicy& u, const CostSpec& cost,
                                      std::shared_ptr<const fbm::FbmEnsemble> noise) {
    const sdde::ParticlePaths paths = simulate(dyn, u, std::move(noise));
    return totals(cost_columns(paths, cost));
}

PerformanceReport evaluate_J(const sdde::DelayedDynamics& dyn, const sdde::ControlPolicy& u,
                             const CostSpec& cost,
                             std::shared_ptr<const fbm::FbmEnsemble> noise) {
    const sdde::ParticlePaths paths = simulate(dyn, u, std::move(noise));
    const CostColumns cols = cost_columns(paths, cost);
    const std::vector<double> tot = totals(cols);

    PerformanceReport r;
    r.n_paths = paths.n_particles;
    r.running_cost = mean(cols.running);
    r.terminal_cost = mean(cols.terminal);
    r.j = mean(tot);
    r.std_error = standard_error(tot);
    return r;
}

nlohmann::ordered_json PerformanceReport::to_json() const {
    return nlohmann::ordered_json{{"j", j},
                                  {"std_error", std_error},
                                  {"n_paths", n_paths},
                                  {"running_cost", running_cost},
                                  {"terminal_cost", terminal_cost}};
}

// ---------------------------------------------------------------------------
// Applications
// ---------------------------------------------------------------------------

namespace {

std::function<double(double)> node_lookup(const fcalc::SampledFunction& f) {
    return [f](double t) {
        const int k = std::clamp(static_cast<int>(std::lround(t / f.grid.dt())), 0,
                                 f.grid.n_steps);
        return f[k];
    };
}

}  // namespace

sdde::DelayedDynamics consumption_dynamics(const ConsumptionProblem& pb) {
    sdde::DelayedDynamics dyn;
    dyn.delay = pb.delta;
    dyn.horizon = pb.grid.t_end;
    const double x0 = pb.x0;
    dyn.initial_segment = [x0](double) { return x0; };

    dyn.b_hat.value = [](double, double, double xbar, double, double, double u) {
        return xbar - u;
    };
    dyn.b_hat.dx = [](double, double, double, double, double, double) { return 0.0; };
    dyn.b_hat.dxbar = [](double, double, double, double, double, double) { return 1.0; };
    dyn.b_hat.dv1 = [](double, double, double, double, double, double) { return 0.0; };
    dyn.b_hat.dv2 = [](double, double, double, double, double, double) { return 0.0; };
    dyn.b_hat.du = [](double, double, double, double, double, double) { return -1.0; };

    auto beta_of = node_lookup(pb.beta);
    dyn.sigma_hat.value = [beta_of](double t, double, double) { return beta_of(t); };
    dyn.sigma_hat.dv1 = [](double, double, double) { return 0.0; };
    dyn.sigma_hat.dv2 = [](double, double, double) { return 0.0; };
    return dyn;
}

CostSpec consumption_cost(const ConsumptionProblem& pb) {
    CostSpec cost;
    cost.f_hat.value = [](double, double, double, double, double, double u) {
        if (!(u > 0.0))
            throw std::domain_error(
                "evaluate_J: consumption rate outside the admissible set (log utility needs "
                "rho > 0)");
        return std::log(u);
    };
    cost.f_hat.dx = [](double, double, double, double, double, double) { return 0.0; };
    cost.f_hat.dxbar = [](double, double, double, double, double, double) { return 0.0; };
    cost.f_hat.dv1 = [](double, double, double, double, double, double) { return 0.0; };
    cost.f_hat.dv2 = [](double, double, double, double, double, double) { return 0.0; };
    cost.f_hat.du = [](double, double, double, double, double, double u) { return 1.0 / u; };

    const double xi1 = pb.xi1;
    cost.g_hat.value = [xi1](double, double v) { return xi1 * v; };
    cost.g_hat.dx = [](double, double) { return 0.0; };
    cost.g_hat.dv = [xi1](double, double) { return xi1; };
    return cost;
}

ConsumptionSolution solve_consumption(const ConsumptionProblem& pb,
                                      std::shared_ptr<const fbm::FbmEnsemble> noise) {
    if (!(pb.xi1 > 0.0))
        throw std::invalid_argument("solve_consumption: xi1 must be a positive constant");

    const adjoint::BsdeSolution p = adjoint::solve_deterministic(
        pb.grid, pb.delta, adjoint::TerminalCondition::constant(pb.xi1),
        fcalc::SampledFunction::constant(pb.grid, 1.0));

    std::vector<double> rho(pb.grid.n_nodes());
    for (int k = 0; k < pb.grid.n_nodes(); ++k) {
        if (!(p.p[k] > 0.0))
            throw std::runtime_error(
                "solve_consumption: optimality condition violated, p(t) <= 0 at node " +
                std::to_string(k));
        rho[k] = 1.0 / p.p[k];
    }

    ConsumptionSolution sol{
        sdde::ControlPolicy::open_loop(fcalc::SampledFunction(pb.grid, std::move(rho))),
        p,
        {},
        consumption_dynamics(pb),
        consumption_cost(pb)};
    sol.rho_star.clamp_to(1e-12, 1e308);
    sol.j = evaluate_J(sol.dynamics, sol.rho_star, sol.cost, std::move(noise));
    return sol;
}

sdde::DelayedDynamics lq_dynamics(const LqProblem& pb) {
    sdde::DelayedDynamics dyn;
    dyn.delay = pb.delta;
    dyn.horizon = pb.grid.t_end;
    const double x0 = pb.x0;
    dyn.initial_segment = [x0](double) { return x0; };

    auto beta1_of = node_lookup(pb.beta1);
    dyn.b_hat.value = [beta1_of](double t, double, double xbar, double, double, double u) {
        return beta1_of(t) * xbar + u;
    };
    dyn.b_hat.dx = [](double, double, double, double, double, double) { return 0.0; };
    dyn.b_hat.dxbar = [beta1_of](double t, double, double, double, double, double) {
        return beta1_of(t);
    };
    dyn.b_hat.dv1 = [](double, double, double, double, double, double) { return 0.0; };
    dyn.b_hat.dv2 = [](double, double, double, double, double, double) { return 0.0; };
    dyn.b_hat.du = [](double, double, double, double, double, double) { return 1.0; };

    auto beta2_of = node_lookup(pb.beta2);
    dyn.sigma_hat.value = [beta2_of](double t, double, double) { return beta2_of(t); };
    dyn.sigma_hat.dv1 = [](double, double, double) { return 0.0; };
    dyn.sigma_hat.dv2 = [](double, double, double) { return 0.0; };
    return dyn;
}

CostSpec lq_cost(const LqProblem&) {
    CostSpec cost;
    cost.f_hat.value = [](double, double, double, double, double, double u) {
        return -0.5 * u * u;
    };
    cost.f_hat.dx = [](double, double, double, double, double, double) { return 0.0; };
    cost.f_hat.dxbar = [](double, double, double, double, double, double) { return 0.0; };
    cost.f_hat.dv1 = [](double, double, double, double, double, double) { return 0.0; };
    cost.f_hat.dv2 = [](double, double, double, double, double, double) { return 0.0; };
    cost.f_hat.du = [](double, double, double, double, double, double u) { return -u; };

    cost.g_hat.value = [](double x, double v) { return -0.5 * (x - v) * (x - v); };
    cost.g_hat.dx = [](double x, double v) { return -(x - v); };
    cost.g_hat.dv = [](double x, double v) { return x - v; };

    // unbiased ensemble variance in the terminal cost; exactly zero for a
    // deterministic terminal state
    cost.terminal_per_particle = [](const std::vector<double>& x_t) {
        const int n = static_cast<int>(x_t.size());
        if (sample_variance(x_t) == 0.0) return std::vector<double>(n, 0.0);
        const double m = mean(x_t);
        const double bessel = n > 1 ? static_cast<double>(n) / (n - 1) : 1.0;
        std::vector<double> out(n);
        for (int i = 0; i < n; ++i) out[i] = -0.5 * bessel * (x_t[i] - m) * (x_t[i] - m);
        return out;
    };
    return cost;
}

LqSolution solve_lq_picard(const LqProblem& pb, std::shared_ptr<const fbm::FbmEnsemble> noise,
                           const PicardConfig& cfg) {
    if (!(cfg.damping > 0.0) || cfg.damping > 1.0)
        throw std::invalid_argument("solve_lq_picard: damping must lie in (0, 1]");
    if (cfg.max_iter < 1) throw std::invalid_argument("solve_lq_picard: max_iter must be >= 1");

    const fbm::TimeGrid& grid = pb.grid;
    const int big_n = noise->n_paths;
    const int nodes = grid.n_nodes();
    const sdde::DelayedDynamics dyn = lq_dynamics(pb);
    const CostSpec cost = lq_cost(pb);
    const auto centered = adjoint::TerminalCondition::centered_state();

    std::vector<double> alpha(static_cast<std::size_t>(big_n) * nodes, 0.0);
    auto policy = [&](const std::vector<double>& a) {
        return sdde::ControlPolicy::open_loop_paths(grid, a, big_n);
    };

    sdde::ParticlePaths paths = simulate(dyn, policy(alpha), noise);
    double j_prev = mean(totals(cost_columns(paths, cost)));

    LqSolution sol{policy(alpha), {}, {}, 0, 0.0, 0.0, {}, dyn, cost};
    bool converged = false;

    for (int it = 1; it <= cfg.max_iter; ++it) {
        const adjoint::BsdeSolution p =
            solve_lsmc(grid, pb.delta, centered, pb.beta1, paths, *noise, cfg.basis);

        std::vector<double> next(alpha.size());
        for (std::size_t i = 0; i < alpha.size(); ++i)
            next[i] = (1.0 - cfg.damping) * alpha[i] + cfg.damping * p.p_particles[i];

        double change = 0.0;
        for (int k = 0; k < nodes; ++k) {
            double ms = 0.0;
            for (int i = 0; i < big_n; ++i) {
                const double d = next[static_cast<std::size_t>(i) * nodes + k] -
                                 alpha[static_cast<std::size_t>(i) * nodes + k];
                ms += d * d;
            }
            change = std::max(change, std::sqrt(ms / big_n));
        }
        alpha.swap(next);
        sol.residual_history.push_back(change);
        sol.iterations = it;

        paths = simulate(dyn, policy(alpha), noise);
        const double j_cur = mean(totals(cost_columns(paths, cost)));
        const double dj = std::abs(j_cur - j_prev);
        j_prev = j_cur;

        if (change <= cfg.tol || dj <= cfg.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "solve_lq_picard: no convergence in " << cfg.max_iter
            << " iterations; residual history:";
        for (double r : sol.residual_history) msg << ' ' << r;
        throw std::runtime_error(msg.str());
    }

    sol.p = solve_lsmc(grid, pb.delta, centered, pb.beta1, paths, *noise, cfg.basis);
    std::vector<double> absdiff(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i)
        absdiff[i] = std::abs(alpha[i] - sol.p.p_particles[i]);
    sol.first_order_residual = mean(absdiff);
    sol.regression_noise_floor = sol.p.fit_noise_floor();
    sol.alpha_star = policy(alpha);

    const CostColumns cols = cost_columns(paths, cost);
    const std::vector<double> tot = totals(cols);
    sol.j.n_paths = big_n;
    sol.j.running_cost = mean(cols.running);
    sol.j.terminal_cost = mean(cols.terminal);
    sol.j.j = mean(tot);
    sol.j.std_error = standard_error(tot);
    return sol;
}

// ---------------------------------------------------------------------------
// Verification harnesses
// ---------------------------------------------------------------------------

PerturbationFamily default_family(const fbm::TimeGrid& grid) {
    const double t_end = grid.t_end;
    PerturbationFamily fam;
    fam.directions.emplace_back("+const", fcalc::SampledFunction::constant(grid, 1.0));
    fam.directions.emplace_back("-const", fcalc::SampledFunction::constant(grid, -1.0));
    fam.directions.emplace_back(
        "+ramp", fcalc::SampledFunction::from(grid, [t_end](double t) { return t / t_end; }));
    fam.directions.emplace_back(
        "-ramp", fcalc::SampledFunction::from(grid, [t_end](double t) { return -t / t_end; }));
    fam.directions.emplace_back("+sin", fcalc::SampledFunction::from(grid, [t_end](double t) {
        return std::sin(2.0 * M_PI * t / t_end);
    }));
    fam.directions.emplace_back("-sin", fcalc::SampledFunction::from(grid, [t_end](double t) {
        return -std::sin(2.0 * M_PI * t / t_end);
    }));
    fam.thetas = {0.05, 0.1, 0.2};
    return fam;
}

MpReport verify_necessary(
    const sdde::DelayedDynamics& dyn, const CostSpec& cost, const sdde::ControlPolicy& u_star,
    const adjoint::BsdeSolution& p_solution,
    const std::vector<std::pair<std::string, sdde::ControlPolicy>>& candidates,
    std::shared_ptr<const fbm::FbmEnsemble> noise) {
    const sdde::ParticlePaths base = simulate(dyn, u_star, std::move(noise));
    const int big_n = base.n_particles;
    const int n = base.grid.n_steps;
    const double dt = base.grid.dt();

    // dH/du per particle and node along the optimal trajectory
    std::vector<double> du_h(static_cast<std::size_t>(big_n) * n);
    std::vector<double> tmp(big_n);
    auto column_moment = [&](const std::vector<double>& col, const meanfield::MomentMap& mm) {
        for (int i = 0; i < big_n; ++i) tmp[i] = mm.value(col[i]);
        return mean(tmp);
    };
    for (int k = 0; k < n; ++k) {
        const double t = base.grid.node(k);
        const std::vector<double> xs = base.states_at(k);
        const std::vector<double> xl = base.states_lagged(k);
        const double v1f = column_moment(xs, cost.f_hat.psi1);
        const double v2f = column_moment(xl, cost.f_hat.psi2);
        const double v1b = column_moment(xs, dyn.b_hat.psi1);
        const double v2b = column_moment(xl, dyn.b_hat.psi2);
        for (int i = 0; i < big_n; ++i) {
            const double ui = base.u(i, k);
            du_h[static_cast<std::size_t>(i) * n + k] =
                cost.f_hat.d_u(t, xs[i], xl[i], v1f, v2f, ui) +
                p_solution.p_at(i, k) * dyn.b_hat.d_u(t, xs[i], xl[i], v1b, v2b, ui);
        }
    }

    MpReport rep;
    for (const auto& [name, cand] : candidates) {
        std::vector<double> g_i(big_n, 0.0);
        for (int k = 0; k < n; ++k) {
            const double t = base.grid.node(k);
            const std::vector<double> xs = base.states_at(k);
            const std::vector<double> xl = base.states_lagged(k);
            const double v1b = column_moment(xs, dyn.b_hat.psi1);
            const double v2b = column_moment(xl, dyn.b_hat.psi2);
            for (int i = 0; i < big_n; ++i) {
                const double diff =
                    cand.value(k, i, t, xs[i], xl[i], v1b, v2b) - base.u(i, k);
                g_i[i] += du_h[static_cast<std::size_t>(i) * n + k] * diff * dt;
            }
        }
        GradientRow row;
        row.direction = name;
        row.g = mean(g_i);
        row.std_error = standard_error(g_i);
        row.pass = row.g <= 2.0 * row.std_error + 1e-10;
        rep.pass = rep.pass && row.pass;
        rep.gradients.push_back(std::move(row));
    }
    return rep;
}

MpReport verify_dominance(const sdde::DelayedDynamics& dyn, const CostSpec& cost,
                          const sdde::ControlPolicy& u_star, const PerturbationFamily& family,
                          std::shared_ptr<const fbm::FbmEnsemble> noise) {
    const std::vector<double> base_cost = per_particle_cost(dyn, u_star, cost, noise);
    const double j_star = mean(base_cost);

    MpReport rep;
    for (const auto& [name, v] : family.directions) {
        for (double theta : family.thetas) {
            const std::vector<double> c =
                per_particle_cost(dyn, u_star.perturbed(v, theta), cost, noise);
            std::vector<double> d(c.size());
            for (std::size_t i = 0; i < c.size(); ++i) d[i] = c[i] - base_cost[i];
            DominanceRow row;
            row.direction = name;
            row.theta = theta;
            row.dj = mean(d);
            row.j = row.dj + j_star;
            row.std_error = standard_error(d);
            row.pass = row.dj <= 2.0 * row.std_error + 1e-12 * (1.0 + std::abs(j_star));
            rep.pass = rep.pass && row.pass;
            rep.dominance.push_back(std::move(row));
        }
    }
    return rep;
}

MpReport gateaux_check(const sdde::DelayedDynamics& dyn, const CostSpec& cost,
                       const sdde::ControlPolicy& u_star, const fcalc::SampledFunction& v,
                       std::shared_ptr<const fbm::FbmEnsemble> noise,
                       std::span<const double> thetas) {
    const sdde::ParticlePaths base = simulate(dyn, u_star, noise);
    const sdde::ParticlePaths var =
        simulate_variation(dyn, base, sdde::ControlPolicy::open_loop(v));
    const int big_n = base.n_particles;
    const int n = base.grid.n_steps;
    const double dt = base.grid.dt();

    std::vector<double> tmp(big_n);
    auto column_moment = [&](const std::vector<double>& col, const meanfield::MomentMap& mm) {
        for (int i = 0; i < big_n; ++i) tmp[i] = mm.value(col[i]);
        return mean(tmp);
    };
    auto weighted_moment = [&](const std::vector<double>& xs, const std::vector<double>& ys,
                               const meanfield::MomentMap& mm) {
        for (int i = 0; i < big_n; ++i) tmp[i] = mm.d(xs[i]) * ys[i];
        return mean(tmp);
    };

    // first-variation functional, kept per particle for pairing
    std::vector<double> formula_i(big_n, 0.0);
    for (int k = 0; k < n; ++k) {
        const double t = base.grid.node(k);
        const std::vector<double> xs = base.states_at(k);
        const std::vector<double> xl = base.states_lagged(k);
        const std::vector<double> ys = var.states_at(k);
        const std::vector<double> yl = var.states_lagged(k);
        const double v1 = column_moment(xs, cost.f_hat.psi1);
        const double v2 = column_moment(xl, cost.f_hat.psi2);
        const double s1 = weighted_moment(xs, ys, cost.f_hat.psi1);
        const double s2 = weighted_moment(xl, yl, cost.f_hat.psi2);
        for (int i = 0; i < big_n; ++i) {
            const double ui = base.u(i, k);
            formula_i[i] += dt * (cost.f_hat.d_x(t, xs[i], xl[i], v1, v2, ui) * ys[i] +
                                  cost.f_hat.d_xbar(t, xs[i], xl[i], v1, v2, ui) * yl[i] +
                                  cost.f_hat.d_v1(t, xs[i], xl[i], v1, v2, ui) * s1 +
                                  cost.f_hat.d_v2(t, xs[i], xl[i], v1, v2, ui) * s2 +
                                  cost.f_hat.d_u(t, xs[i], xl[i], v1, v2, ui) * v[k]);
        }
    }
    {
        const std::vector<double> x_t = base.states_at(n);
        const std::vector<double> y_t = var.states_at(n);
        const double vg = column_moment(x_t, cost.g_hat.gamma);
        const double sg = weighted_moment(x_t, y_t, cost.g_hat.gamma);
        for (int i = 0; i < big_n; ++i)
            formula_i[i] +=
                cost.g_hat.d_x(x_t[i], vg) * y_t[i] + cost.g_hat.d_v(x_t[i], vg) * sg;
    }
    const double formula = mean(formula_i);

    const std::vector<double> base_cost = per_particle_cost(dyn, u_star, cost, noise);
    MpReport rep;
    for (double theta : thetas) {
        const std::vector<double> c =
            per_particle_cost(dyn, u_star.perturbed(v, theta), cost, noise);
        std::vector<double> fd_i(c.size()), diff_i(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) {
            fd_i[i] = (c[i] - base_cost[i]) / theta;
            diff_i[i] = fd_i[i] - formula_i[i];
        }
        GateauxRow row;
        row.theta = theta;
        row.fd = mean(fd_i);
        row.formula = formula;
        row.abs_err = std::abs(row.fd - formula);
        row.rel_err = row.abs_err / std::max(std::abs(formula), 1e-300);
        row.std_error = standard_error(diff_i);
        rep.gateaux.push_back(row);
    }
    // gate on the smallest theta: 5% relative, or absolute within MC noise
    // when the limit is ~0
    const auto smallest = std::min_element(
        rep.gateaux.begin(), rep.gateaux.end(),
        [](const GateauxRow& a, const GateauxRow& b) { return a.theta < b.theta; });
    if (smallest != rep.gateaux.end())
        rep.pass = smallest->rel_err <= 0.05 ||
                   smallest->abs_err <= 2.0 * smallest->std_error + 1e-10;
    return rep;
}

nlohmann::ordered_json MpReport::to_json() const {
    nlohmann::ordered_json g = nlohmann::ordered_json::array();
    for (const auto& r : gradients)
        g.push_back(nlohmann::ordered_json{{"direction", r.direction},
                                           {"g", r.g},
                                           {"std_error", r.std_error},
                                           {"pass", r.pass}});
    nlohmann::ordered_json d = nlohmann::ordered_json::array();
    for (const auto& r : dominance)
        d.push_back(nlohmann::ordered_json{{"direction", r.direction},
                                           {"theta", r.theta},
                                           {"j", r.j},
                                           {"dj", r.dj},
                                           {"std_error", r.std_error},
                                           {"pass", r.pass}});
    nlohmann::ordered_json gx = nlohmann::ordered_json::array();
    for (const auto& r : gateaux)
        gx.push_back(nlohmann::ordered_json{{"theta", r.theta},
                                            {"fd", r.fd},
                                            {"formula", r.formula},
                                            {"abs_err", r.abs_err},
                                            {"rel_err", r.rel_err},
                                            {"std_error", r.std_error}});
    return nlohmann::ordered_json{
        {"gradients", g}, {"dominance", d}, {"gateaux", gx}, {"pass", pass}};
}

void MpReport::dump_dominance_csv(std::ostream& os) const {
    os << "direction,theta,J,dJ,stderr,pass\n";
    std::ostringstream buf;
    buf.precision(17);
    for (const auto& r : dominance)
        buf << r.direction << ',' << r.theta << ',' << r.j << ',' << r.dj << ','
            << r.std_error << ',' << (r.pass ? 1 : 0) << '\n';
    os << buf.str();
}

}  // namespace fbmctrl::control
