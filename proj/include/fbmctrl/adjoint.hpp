#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbmctrl/fbm.hpp"
#include "fbmctrl/fcalc.hpp"
#include "fbmctrl/sdde.hpp"

namespace fbmctrl::adjoint {

struct Segment {
    double lo, hi;
};

// Partition of [0, T] into delay-length segments counted backward from T;
// only the earliest may be shorter than delta.
struct SegmentGrid {
    std::vector<Segment> segments;  // ascending in time
    int n() const { return static_cast<int>(segments.size()); }
};

SegmentGrid segment_grid(double t_end, double delta);

// Terminal data for the adjoint pair.
struct TerminalCondition {
    enum class Kind { Constant, DeterministicFn, CenteredState };
    Kind kind = Kind::Constant;
    double c = 0.0;
    std::function<double(double)> fn;  // evaluated at T for DeterministicFn

    static TerminalCondition constant(double value);
    static TerminalCondition deterministic_fn(std::function<double(double)> f);
    // p(T) = -(X_T - ensemble mean of X_T), one value per particle
    static TerminalCondition centered_state();
};

// Polynomial on one grid cell in the local variable tau = t - t0.
struct CellPoly {
    double t0 = 0.0;
    std::vector<double> coef;  // coef[j] * tau^j
    double eval(double t) const;
};

struct NodeDiagnostics {
    int node = 0;
    double r2 = 0.0;
    double cond = 0.0;
    double fit_std_error = 0.0;  // regression noise floor of the fitted values
};

struct BsdeSolution {
    fbm::TimeGrid grid;
    bool is_deterministic = true;
    std::string method;

    // deterministic variant
    std::vector<double> p;        // per node
    std::vector<double> q;        // per node (identically zero here)
    bool q_computed = false;      // false means "not computed", per the lsmc route
    std::vector<CellPoly> cells;  // exact evaluator between nodes

    // particle variant
    int n_particles = 0;
    std::vector<double> p_particles;  // N x (n_steps + 1)
    std::vector<NodeDiagnostics> diagnostics;

    double eval(double t) const;  // deterministic variant only
    double p_at(int particle, int node) const;
    double p_mean(int node) const;
    double fit_noise_floor() const;  // mean regression std error over nodes

    void dump_csv(std::ostream& os) const;  // "t,p" or "particle_id,t,p"
    nlohmann::ordered_json diagnostics_json() const;
};

// Anticipated linear BSDE with deterministic terminal value and
// deterministic piecewise-constant drift multiplier:
//   dp(t) = -coeff(t + delta) p(t + delta) 1_{[0, T-delta]}(t) dt + q dB^H.
// Solved backward segment by segment with exact per-cell polynomial
// integration; q vanishes identically.
BsdeSolution solve_deterministic(const fbm::TimeGrid& grid, double delta,
                                 const TerminalCondition& terminal,
                                 const fcalc::SampledFunction& coeff);

struct BasisConfig {
    int degree = 2;      // total degree in (X(t), X(t - delta), B^H(t))
    double ridge = 1e-8;
};

int basis_dimension(int degree);

// Regression-based solver for the random terminal condition. Conditional
// expectations are least-squares projections onto a polynomial basis of the
// time-t states; within each backward sweep the running target is
// accumulated raw (Longstaff-Schwartz style) and projected at each node, so
// fitted values are not re-projected into later regressions except through
// the time-advanced drift term. q is not computed (no consumer needs it).
BsdeSolution solve_lsmc(const fbm::TimeGrid& grid, double delta,
                        const TerminalCondition& terminal,
                        const fcalc::SampledFunction& coeff,
                        const sdde::ParticlePaths& features,
                        const fbm::FbmEnsemble& noise, const BasisConfig& cfg = {});

}  // namespace fbmctrl::adjoint
