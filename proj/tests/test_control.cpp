#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "fbmctrl/control.hpp"
#include "fbmctrl/numerics.hpp"

using namespace fbmctrl;
using fbm::HurstParam;
using fbm::TimeGrid;
using fcalc::SampledFunction;
using sdde::ControlPolicy;

namespace {

std::shared_ptr<const fbm::FbmEnsemble> make_noise(const TimeGrid& g, int n_paths,
                                                   std::uint64_t seed, double h = 0.75) {
    return std::make_shared<const fbm::FbmEnsemble>(
        fbm::sample_cholesky(g, HurstParam(h), n_paths, seed));
}

control::HamiltonianSpec consumption_hspec(const control::ConsumptionProblem& pb) {
    control::HamiltonianSpec spec;
    const auto dyn = control::consumption_dynamics(pb);
    const auto cost = control::consumption_cost(pb);
    spec.b_hat = dyn.b_hat;
    spec.sigma_hat = dyn.sigma_hat;
    spec.f_hat = cost.f_hat;
    return spec;
}

}  // namespace

TEST_CASE("hamiltonian direct evaluation") {
    const TimeGrid g(1.0, 10);
    control::ConsumptionProblem pb{g, 0.4, 1.0, SampledFunction::constant(g, 0.0), 1.0};
    auto spec = consumption_hspec(pb);
    const meanfield::EmpiricalMeasure m({2.0}), mbar({2.0});
    // f = log rho, b = xbar - rho: at rho=1, xbar=2, p=3 -> 0 + (2-1)*3 = 3
    CHECK(control::hamiltonian(spec, 0.0, 0.0, 2.0, m, mbar, 1.0, 3.0) ==
          doctest::Approx(3.0).epsilon(1e-14));
    // zero cost, zero adjoint
    control::HamiltonianSpec trivial = spec;
    trivial.f_hat.value = [](double, double, double, double, double, double) { return 0.0; };
    CHECK(control::hamiltonian(trivial, 0.0, 0.5, 2.0, m, mbar, 1.0, 0.0) == 0.0);
}

TEST_CASE("LQ hamiltonian is maximal at alpha = p") {
    const TimeGrid g(1.0, 10);
    control::LqProblem pb{g, 0.4, SampledFunction::constant(g, 0.5),
                          SampledFunction::constant(g, 1.0), 0.0};
    const auto dyn = control::lq_dynamics(pb);
    const auto cost = control::lq_cost(pb);
    control::HamiltonianSpec spec{cost.f_hat, dyn.b_hat, dyn.sigma_hat, {}};
    const meanfield::EmpiricalMeasure m({0.3, -0.2}), mbar({0.1, 0.4});
    const double p = 0.8, xbar = 0.25;
    const double at_p = control::hamiltonian(spec, 0.2, 0.0, xbar, m, mbar, p, p);
    for (double u : {-1.0, 0.0, 0.5, 0.79, 0.81, 2.0}) {
        if (u == p) continue;
        CHECK(control::hamiltonian(spec, 0.2, 0.0, xbar, m, mbar, u, p) < at_p);
    }
}

TEST_CASE("argmax is invariant to the u-independent q-weight term") {
    std::mt19937_64 eng(51);
    std::uniform_real_distribution<double> ur(-1.0, 1.0);
    const TimeGrid g(1.0, 10);
    control::LqProblem pb{g, 0.4, SampledFunction::constant(g, 0.5),
                          SampledFunction::constant(g, 1.0), 0.0};
    const auto dyn = control::lq_dynamics(pb);
    const auto cost = control::lq_cost(pb);
    const auto q = SampledFunction::from(g, [](double t) { return std::sin(5.0 * t); });
    const auto w = fcalc::q_weight(q, HurstParam(0.75));

    for (int trial = 0; trial < 10; ++trial) {
        const double p = ur(eng), xbar = ur(eng), t = 0.5 + 0.4 * ur(eng);
        control::HamiltonianSpec plain{cost.f_hat, dyn.b_hat, dyn.sigma_hat, {}};
        control::HamiltonianSpec weighted = plain;
        const double dt = g.dt();
        weighted.q_weight = [w, dt](double tt) {
            return w[static_cast<int>(std::lround(tt / dt))];
        };
        const meanfield::EmpiricalMeasure m({ur(eng), ur(eng)}), mbar({ur(eng), ur(eng)});
        double best_plain = -1e300, arg_plain = 0.0, best_w = -1e300, arg_w = 0.0;
        for (int i = -20; i <= 20; ++i) {
            const double u = 0.1 * i;
            const double hp = control::hamiltonian(plain, t, 0.0, xbar, m, mbar, u, p);
            const double hw = control::hamiltonian(weighted, t, 0.0, xbar, m, mbar, u, p);
            if (hp > best_plain) { best_plain = hp; arg_plain = u; }
            if (hw > best_w) { best_w = hw; arg_w = u; }
        }
        CHECK(arg_plain == arg_w);
    }
}

TEST_CASE("evaluate_J: LQ zero control prices the terminal variance") {
    const TimeGrid g(1.0, 20);
    control::LqProblem pb{g, 0.4, SampledFunction::constant(g, 0.0),
                          SampledFunction::constant(g, 1.0), 0.0};
    auto noise = make_noise(g, 20000, 53);
    const auto rep = control::evaluate_J(control::lq_dynamics(pb),
                                         ControlPolicy::open_loop(SampledFunction::constant(g, 0.0)),
                                         control::lq_cost(pb), noise);
    // X = B^H exactly on the grid, so Var(X_1) = 1
    CHECK(std::abs(rep.j + 0.5) <= 0.03);
    CHECK(rep.running_cost == 0.0);
    CHECK(rep.n_paths == 20000);
}

TEST_CASE("evaluate_J: LQ with no noise and no control is exactly zero") {
    const TimeGrid g(1.0, 20);
    control::LqProblem pb{g, 0.4, SampledFunction::constant(g, 0.5),
                          SampledFunction::constant(g, 0.0), 1.0};
    auto noise = make_noise(g, 100, 55);
    const auto rep = control::evaluate_J(control::lq_dynamics(pb),
                                         ControlPolicy::open_loop(SampledFunction::constant(g, 0.0)),
                                         control::lq_cost(pb), noise);
    CHECK(rep.j == 0.0);
    CHECK(rep.std_error == 0.0);
}

TEST_CASE("evaluate_J: consumption at the constant solution") {
    // rho = 1, xi1 = 1, x0 = 1, beta = 0: X stays at 1, J = 0 + 1
    const TimeGrid g(1.0, 100);
    control::ConsumptionProblem pb{g, 0.4, 1.0, SampledFunction::constant(g, 0.0), 1.0};
    auto noise = make_noise(g, 50, 57);
    const auto rep = control::evaluate_J(control::consumption_dynamics(pb),
                                         ControlPolicy::open_loop(SampledFunction::constant(g, 1.0)),
                                         control::consumption_cost(pb), noise);
    CHECK(rep.j == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("evaluate_J: nonpositive consumption is rejected") {
    const TimeGrid g(1.0, 10);
    control::ConsumptionProblem pb{g, 0.4, 1.0, SampledFunction::constant(g, 0.0), 1.0};
    auto noise = make_noise(g, 10, 59);
    CHECK_THROWS_AS(
        control::evaluate_J(control::consumption_dynamics(pb),
                            ControlPolicy::open_loop(SampledFunction::constant(g, -0.5)),
                            control::consumption_cost(pb), noise),
        std::domain_error);
}

TEST_CASE("solve_consumption: frozen optimal rate and first-order identity") {
    const TimeGrid g(1.0, 100);
    control::ConsumptionProblem pb{g, 0.4, 1.0, SampledFunction::constant(g, 0.0), 1.0};
    auto noise = make_noise(g, 200, 61);
    const auto sol = control::solve_consumption(pb, noise);

    CHECK(sol.rho_star.flat_values().front() == doctest::Approx(1.0 / 1.62).epsilon(1e-12));
    CHECK(sol.rho_star.flat_values().back() == doctest::Approx(1.0).epsilon(1e-12));
    for (int k = 0; k <= g.n_steps; ++k) {
        const double foc = 1.0 / sol.rho_star.flat_values()[k] - sol.p.p[k];
        CHECK(std::abs(foc) <= 1e-12);
    }
    CHECK(sol.j.j > 0.0);
}

TEST_CASE("solve_consumption: delay beyond horizon gives a constant rate") {
    const TimeGrid g(1.0, 10);
    control::ConsumptionProblem pb{g, 2.0, 2.0, SampledFunction::constant(g, 0.0), 1.0};
    auto noise = make_noise(g, 100, 63);
    const auto sol = control::solve_consumption(pb, noise);
    for (double r : sol.rho_star.flat_values()) CHECK(r == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(
        control::solve_consumption(
            control::ConsumptionProblem{g, 0.5, -1.0, SampledFunction::constant(g, 0.0), 1.0},
            noise),
        std::invalid_argument);
}

TEST_CASE("verify_necessary: zero gradient at the optimum, detector at a wrong control") {
    const TimeGrid g(1.0, 50);
    control::ConsumptionProblem pb{g, 0.4, 1.0, SampledFunction::constant(g, 0.1), 1.0};
    auto noise = make_noise(g, 2000, 65);
    const auto sol = control::solve_consumption(pb, noise);

    const auto fam = control::default_family(g);
    std::vector<std::pair<std::string, ControlPolicy>> candidates;
    for (const auto& [name, v] : fam.directions)
        candidates.emplace_back(name, sol.rho_star.perturbed(v, 0.1));

    candidates.emplace_back("self", sol.rho_star);  // u = u* has G = 0 identically
    const auto rep = control::verify_necessary(sol.dynamics, sol.cost, sol.rho_star, sol.p,
                                               candidates, noise);
    CHECK(rep.pass);
    for (const auto& row : rep.gradients) CHECK(std::abs(row.g) <= 1e-12);
    CHECK(rep.gradients.back().g == 0.0);

    // the same machinery must flag a deliberately wrong control
    std::vector<double> wrong = sol.rho_star.flat_values();
    for (double& r : wrong) r *= 2.0;
    const auto wrong_policy = ControlPolicy::open_loop(SampledFunction(g, wrong));
    const auto paths = sdde::simulate(sol.dynamics, wrong_policy, noise);
    // dH/du at the doubled rate: 1/(2 rho*) - p = -p/2 pointwise
    const auto bad = control::verify_necessary(sol.dynamics, sol.cost, wrong_policy, sol.p,
                                               candidates, noise);
    bool some_large = false;
    for (const auto& row : bad.gradients)
        if (std::abs(row.g) > 4.0 * row.std_error && std::abs(row.g) > 1e-6) some_large = true;
    CHECK(some_large);
}

TEST_CASE("verify_dominance: consumption optimum dominates, with quadratic decay") {
    const TimeGrid g(1.0, 100);
    control::ConsumptionProblem pb{g, 0.4, 1.0, SampledFunction::constant(g, 0.0), 1.0};
    auto noise = make_noise(g, 500, 67);
    const auto sol = control::solve_consumption(pb, noise);
    const auto fam = control::default_family(g);
    const auto rep = control::verify_dominance(sol.dynamics, sol.cost, sol.rho_star, fam, noise);
    CHECK(rep.pass);
    CHECK(rep.dominance.size() == 18);
    for (const auto& row : rep.dominance) CHECK(row.dj <= 2.0 * row.std_error + 1e-12);

    // log-log decay of |dJ| in theta for the +const direction
    std::vector<double> lx, ly;
    for (const auto& row : rep.dominance) {
        if (row.direction == "+const" && row.dj < 0.0) {
            lx.push_back(std::log(row.theta));
            ly.push_back(std::log(-row.dj));
        }
    }
    REQUIRE(lx.size() == 3);
    CHECK(ls_slope(lx, ly) >= 1.8);
}

TEST_CASE("verify_dominance: theta = 0 row is exactly zero") {
    const TimeGrid g(1.0, 20);
    control::ConsumptionProblem pb{g, 0.4, 1.0, SampledFunction::constant(g, 0.0), 1.0};
    auto noise = make_noise(g, 50, 69);
    const auto sol = control::solve_consumption(pb, noise);
    control::PerturbationFamily fam;
    fam.directions.emplace_back("+const", SampledFunction::constant(g, 1.0));
    fam.thetas = {0.0};
    const auto rep = control::verify_dominance(sol.dynamics, sol.cost, sol.rho_star, fam, noise);
    CHECK(rep.dominance[0].dj == 0.0);
    CHECK(rep.dominance[0].std_error == 0.0);
    CHECK(rep.pass);
}

TEST_CASE("gateaux_check: zero direction, and agreement at a non-optimal control") {
    const TimeGrid g(1.0, 100);
    control::ConsumptionProblem pb{g, 0.4, 1.0, SampledFunction::constant(g, 0.0), 1.0};
    auto noise = make_noise(g, 100, 71);
    const auto dyn = control::consumption_dynamics(pb);
    const auto cost = control::consumption_cost(pb);
    const auto rho1 = ControlPolicy::open_loop(SampledFunction::constant(g, 1.0));

    const double thetas[] = {1e-1, 1e-2, 1e-3};
    const auto zrep = control::gateaux_check(dyn, cost, rho1,
                                             SampledFunction::constant(g, 0.0), noise, thetas);
    for (const auto& row : zrep.gateaux) {
        CHECK(row.fd == 0.0);
        CHECK(row.formula == 0.0);
    }
    CHECK(zrep.pass);

    const auto rep = control::gateaux_check(dyn, cost, rho1,
                                            SampledFunction::constant(g, 1.0), noise, thetas);
    CHECK(rep.pass);
    const auto& last = rep.gateaux.back();
    CHECK(last.theta == doctest::Approx(1e-3));
    CHECK(last.rel_err <= 0.05);
    // both sides near the hand-computed limit J'(rho=1; v=1) ~ -0.1813
    CHECK(std::abs(last.formula + 0.1813) <= 5e-3);
}

TEST_CASE("gateaux_check: first-order term vanishes at the optimum as dt -> 0") {
    // the optimal rate comes from the exact, continuous-time adjoint, so the
    // discrete derivative at it is O(dt); check magnitude and decay order
    auto formula_at = [](int n_steps, std::uint64_t seed) {
        const TimeGrid g(1.0, n_steps);
        control::ConsumptionProblem pb{g, 0.4, 1.0, SampledFunction::constant(g, 0.0), 1.0};
        auto noise = make_noise(g, 50, seed);
        const auto sol = control::solve_consumption(pb, noise);
        const double thetas[] = {1e-3};
        const auto rep = control::gateaux_check(sol.dynamics, sol.cost, sol.rho_star,
                                                SampledFunction::constant(g, 1.0), noise, thetas);
        return rep.gateaux.back().formula;
    };
    const double coarse = formula_at(100, 73);
    const double fine = formula_at(400, 73);
    CHECK(std::abs(coarse) <= 2e-2);
    CHECK(std::abs(fine) <= std::abs(coarse) / 2.5);
}

TEST_CASE("solve_lq_picard: no noise means zero control, one iteration") {
    const TimeGrid g(1.0, 10);
    control::LqProblem pb{g, 0.4, SampledFunction::constant(g, 0.5),
                          SampledFunction::constant(g, 0.0), 1.0};
    auto noise = make_noise(g, 200, 75);
    const auto sol = control::solve_lq_picard(pb, noise);
    CHECK(sol.iterations == 1);
    for (double a : sol.alpha_star.flat_values()) CHECK(a == 0.0);
    CHECK(sol.first_order_residual == 0.0);
    CHECK(sol.j.j == 0.0);
}

TEST_CASE("solve_lq_picard: converged control beats the zero control") {
    const TimeGrid g(1.0, 20);
    control::LqProblem pb{g, 0.4, SampledFunction::constant(g, 0.0),
                          SampledFunction::constant(g, 1.0), 0.0};
    auto noise = make_noise(g, 4000, 77);
    const auto sol = control::solve_lq_picard(pb, noise);
    CHECK(sol.iterations <= 25);
    CHECK(sol.first_order_residual <= 2.0 * sol.regression_noise_floor);

    const auto j0 = control::evaluate_J(sol.dynamics,
                                        ControlPolicy::open_loop(SampledFunction::constant(g, 0.0)),
                                        sol.cost, noise);
    CHECK(sol.j.j >= j0.j - 2.0 * (sol.j.std_error + j0.std_error));
    CHECK(sol.j.j > j0.j);  // strict gain at this scale
}

TEST_CASE("solve_lq_picard: fixed point independent of damping") {
    // short horizon and weak feedback keep the undamped map contractive
    const TimeGrid g(0.5, 10);
    control::LqProblem pb{g, 0.2, SampledFunction::constant(g, 0.3),
                          SampledFunction::constant(g, 1.0), 0.0};
    auto noise = make_noise(g, 2000, 79);
    // tight tol so the flat-J early stop cannot leave either run far away
    control::PicardConfig full, damped;
    full.damping = 1.0;
    full.tol = 1e-6;
    full.max_iter = 80;
    damped.damping = 0.5;
    damped.tol = 1e-6;
    damped.max_iter = 80;
    const auto a = control::solve_lq_picard(pb, noise, full);
    const auto b = control::solve_lq_picard(pb, noise, damped);
    // same fixed point within tolerance, in mean square over particles/nodes
    const auto& va = a.alpha_star.flat_values();
    const auto& vb = b.alpha_star.flat_values();
    double ms = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) ms += (va[i] - vb[i]) * (va[i] - vb[i]);
    ms = std::sqrt(ms / va.size());
    CHECK(ms <= 5e-3);
}

TEST_CASE("solve_lq_picard: non-convergence carries the residual history") {
    const TimeGrid g(1.0, 10);
    control::LqProblem pb{g, 0.4, SampledFunction::constant(g, 0.5),
                          SampledFunction::constant(g, 1.0), 0.0};
    auto noise = make_noise(g, 500, 81);
    control::PicardConfig pc;
    pc.max_iter = 1;
    pc.tol = 1e-15;
    CHECK_THROWS_WITH_AS(control::solve_lq_picard(pb, noise, pc),
                         doctest::Contains("residual history"), std::runtime_error);
}

TEST_CASE("reports serialize") {
    const TimeGrid g(1.0, 20);
    control::ConsumptionProblem pb{g, 0.4, 1.0, SampledFunction::constant(g, 0.0), 1.0};
    auto noise = make_noise(g, 100, 83);
    const auto sol = control::solve_consumption(pb, noise);
    const auto fam = control::default_family(g);
    const auto rep = control::verify_dominance(sol.dynamics, sol.cost, sol.rho_star, fam, noise);
    const auto j = rep.to_json();
    CHECK(j.contains("dominance"));
    CHECK(j.contains("pass"));
    std::ostringstream os;
    rep.dump_dominance_csv(os);
    CHECK(os.str().rfind("direction,theta,J,dJ,stderr,pass\n", 0) == 0);
    CHECK(sol.j.to_json().contains("j"));
}

TEST_CASE("hamiltonians are midpoint concave in the controlled arguments") {
    std::mt19937_64 eng(87);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_real_distribution<double> upos(0.05, 3.0);
    const TimeGrid g(1.0, 10);

    // consumption: H = log(rho) + (xbar - rho) p
    control::ConsumptionProblem cpb{g, 0.4, 1.0, SampledFunction::constant(g, 0.1), 1.0};
    const auto cdyn = control::consumption_dynamics(cpb);
    const auto ccost = control::consumption_cost(cpb);
    for (int trial = 0; trial < 200; ++trial) {
        const double p = u(eng);
        auto h_at = [&](double xbar, double rho) {
            return ccost.f_hat.value(0.1, 0.0, xbar, 0.0, 0.0, rho) +
                   p * cdyn.b_hat.value(0.1, 0.0, xbar, 0.0, 0.0, rho);
        };
        const double x1 = u(eng), x2 = u(eng), r1 = upos(eng), r2 = upos(eng);
        const double mid = h_at(0.5 * (x1 + x2), 0.5 * (r1 + r2));
        CHECK(mid >= 0.5 * (h_at(x1, r1) + h_at(x2, r2)) - 1e-12);
    }

    // LQ: H = -alpha^2/2 + (beta1 xbar + alpha) p
    control::LqProblem lpb{g, 0.4, SampledFunction::constant(g, 0.5),
                           SampledFunction::constant(g, 1.0), 0.0};
    const auto ldyn = control::lq_dynamics(lpb);
    const auto lcost = control::lq_cost(lpb);
    for (int trial = 0; trial < 200; ++trial) {
        const double p = u(eng);
        auto h_at = [&](double xbar, double a) {
            return lcost.f_hat.value(0.1, 0.0, xbar, 0.0, 0.0, a) +
                   p * ldyn.b_hat.value(0.1, 0.0, xbar, 0.0, 0.0, a);
        };
        const double x1 = u(eng), x2 = u(eng), a1 = u(eng), a2 = u(eng);
        const double mid = h_at(0.5 * (x1 + x2), 0.5 * (a1 + a2));
        CHECK(mid >= 0.5 * (h_at(x1, a1) + h_at(x2, a2)) - 1e-12);
    }
}

TEST_CASE("dominance at the constant-rate optimum when the delay exceeds the horizon") {
    // xi1 = 2, delta >= T: p = 2 everywhere, rho* = 1/2
    const TimeGrid g(1.0, 20);
    control::ConsumptionProblem pb{g, 2.0, 2.0, SampledFunction::constant(g, 0.1), 1.0};
    auto noise = make_noise(g, 2000, 91);
    const auto sol = control::solve_consumption(pb, noise);
    for (double r : sol.rho_star.flat_values()) CHECK(r == doctest::Approx(0.5).epsilon(1e-14));
    const auto rep = control::verify_dominance(sol.dynamics, sol.cost, sol.rho_star,
                                               control::default_family(g), noise);
    for (const auto& row : rep.dominance) CHECK(row.dj <= 2.0 * row.std_error + 1e-12);
    CHECK(rep.pass);
}
