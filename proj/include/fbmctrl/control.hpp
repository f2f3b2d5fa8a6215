#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fbmctrl/adjoint.hpp"
#include "fbmctrl/fbm.hpp"
#include "fbmctrl/fcalc.hpp"
#include "fbmctrl/meanfield.hpp"
#include "fbmctrl/sdde.hpp"

namespace fbmctrl::control {

// H = f + p b + sigma(t,m,mbar) * integral of q(s) phi_H(s,t) ds.
// The q-weight is supplied as a precomputed function of t (zero when q is
// unavailable); it is additive in u and cannot move the argmax.
struct HamiltonianSpec {
    meanfield::DriftFn f_hat;
    meanfield::DriftFn b_hat;
    meanfield::DiffusionFn sigma_hat;
    std::function<double(double)> q_weight;  // empty means zero
};

double hamiltonian(const HamiltonianSpec& spec, double t, double x, double xbar,
                   const meanfield::EmpiricalMeasure& m,
                   const meanfield::EmpiricalMeasure& mbar, double u, double p);

// Running cost f-hat plus terminal cost g-hat. When terminal_per_particle is
// set it overrides the g-hat evaluation (used for the unbiased-variance
// terminal of the LQ problem); the mean over particles is the terminal cost.
struct CostSpec {
    meanfield::DriftFn f_hat;
    meanfield::TerminalFn g_hat;
    std::function<std::vector<double>(const std::vector<double>&)> terminal_per_particle;
};

struct PerformanceReport {
    double j = 0.0;
    double std_error = 0.0;
    int n_paths = 0;
    double running_cost = 0.0;
    double terminal_cost = 0.0;
    nlohmann::ordered_json to_json() const;
};

// Per-particle total costs (running + terminal); mean equals J. Kept
// separate so dominance tables can pair particles under common random
// numbers.
std::vector<double> per_particle_cost(const sdde::DelayedDynamics& dyn,
                                      const sdde::ControlPolicy& u, const CostSpec& cost,
                                      std::shared_ptr<const fbm::FbmEnsemble> noise);

PerformanceReport evaluate_J(const sdde::DelayedDynamics& dyn, const sdde::ControlPolicy& u,
                             const CostSpec& cost,
                             std::shared_ptr<const fbm::FbmEnsemble> noise);

// ---------------------------------------------------------------------------
// Applications
// ---------------------------------------------------------------------------

// Cash flow with delay, log-utility consumption:
//   dX = [X(t-delta) - rho(t)] dt + beta(t) dB^H,  J = E[int log rho dt] + xi1 E[X_T].
struct ConsumptionProblem {
    fbm::TimeGrid grid;
    double delta = 0.0;
    double xi1 = 1.0;  // must be > 0
    fcalc::SampledFunction beta;
    double x0 = 1.0;
};

sdde::DelayedDynamics consumption_dynamics(const ConsumptionProblem& pb);
CostSpec consumption_cost(const ConsumptionProblem& pb);

struct ConsumptionSolution {
    sdde::ControlPolicy rho_star;
    adjoint::BsdeSolution p;
    PerformanceReport j;
    sdde::DelayedDynamics dynamics;
    CostSpec cost;
};

// Solves the adjoint equation in closed form, checks p > 0 on [0, T], and
// returns rho* = 1/p with its simulated performance.
ConsumptionSolution solve_consumption(const ConsumptionProblem& pb,
                                      std::shared_ptr<const fbm::FbmEnsemble> noise);

// Linear-quadratic problem with delay:
//   dX = [beta1(t) X(t-delta) + alpha(t)] dt + beta2(t) dB^H,
//   J = -(Var(X_T) + E[int alpha^2 dt]) / 2.
struct LqProblem {
    fbm::TimeGrid grid;
    double delta = 0.0;
    fcalc::SampledFunction beta1;
    fcalc::SampledFunction beta2;
    double x0 = 0.0;
};

sdde::DelayedDynamics lq_dynamics(const LqProblem& pb);
CostSpec lq_cost(const LqProblem& pb);

struct PicardConfig {
    double damping = 0.5;  // in (0, 1]
    double tol = 1e-3;
    int max_iter = 25;
    adjoint::BasisConfig basis;
};

struct LqSolution {
    sdde::ControlPolicy alpha_star;
    adjoint::BsdeSolution p;
    PerformanceReport j;
    int iterations = 0;
    double first_order_residual = 0.0;  // mean |alpha* - p*| over particles and nodes
    double regression_noise_floor = 0.0;
    std::vector<double> residual_history;
    sdde::DelayedDynamics dynamics;
    CostSpec cost;
};

// Damped fixed-point iteration alpha <- (1-d) alpha + d p(alpha) under common
// random numbers. Throws a non-convergence error carrying the residual
// history if max_iter is reached.
LqSolution solve_lq_picard(const LqProblem& pb, std::shared_ptr<const fbm::FbmEnsemble> noise,
                           const PicardConfig& cfg = {});

// ---------------------------------------------------------------------------
// Maximum-principle verification harnesses
// ---------------------------------------------------------------------------

struct GradientRow {
    std::string direction;
    double g = 0.0;
    double std_error = 0.0;
    bool pass = false;
};

struct DominanceRow {
    std::string direction;
    double theta = 0.0;
    double j = 0.0;
    double dj = 0.0;
    double std_error = 0.0;
    bool pass = false;
};

struct GateauxRow {
    double theta = 0.0;
    double fd = 0.0;
    double formula = 0.0;
    double abs_err = 0.0;
    double rel_err = 0.0;
    double std_error = 0.0;  // paired std error of (fd - formula)
};

struct MpReport {
    std::vector<GradientRow> gradients;
    std::vector<DominanceRow> dominance;
    std::vector<GateauxRow> gateaux;
    bool pass = true;

    nlohmann::ordered_json to_json() const;
    void dump_dominance_csv(std::ostream& os) const;  // direction,theta,J,dJ,stderr,pass
};

struct PerturbationFamily {
    std::vector<std::pair<std::string, fcalc::SampledFunction>> directions;
    std::vector<double> thetas;
};

// constants, ramps and one oscillatory direction, each with both signs
PerturbationFamily default_family(const fbm::TimeGrid& grid);

// Monte Carlo estimate of G(u) = E[int dH/du (u - u*) dt] for each candidate
// control; a row passes when G <= 2 stderr (+ a rounding floor).
MpReport verify_necessary(
    const sdde::DelayedDynamics& dyn, const CostSpec& cost, const sdde::ControlPolicy& u_star,
    const adjoint::BsdeSolution& p_solution,
    const std::vector<std::pair<std::string, sdde::ControlPolicy>>& candidates,
    std::shared_ptr<const fbm::FbmEnsemble> noise);

// Paired-difference dominance table of J(u* + theta v) - J(u*) under common
// random numbers; a row passes when dJ <= 2 paired stderr (+ rounding floor).
MpReport verify_dominance(const sdde::DelayedDynamics& dyn, const CostSpec& cost,
                          const sdde::ControlPolicy& u_star, const PerturbationFamily& family,
                          std::shared_ptr<const fbm::FbmEnsemble> noise);

// Compares the finite-difference derivative of J along v with the
// first-variation functional evaluated on the same noise.
MpReport gateaux_check(const sdde::DelayedDynamics& dyn, const CostSpec& cost,
                       const sdde::ControlPolicy& u_star, const fcalc::SampledFunction& v,
                       std::shared_ptr<const fbm::FbmEnsemble> noise,
                       std::span<const double> thetas);

}  // namespace fbmctrl::control
