#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbmctrl/fbm.hpp"

namespace fbmctrl::fcalc {

// Deterministic integrand as grid values, read as piecewise-constant on
// [t_k, t_{k+1}) with value values[k]. The trailing node value is kept for
// completeness but never enters an integral.
struct SampledFunction {
    fbm::TimeGrid grid;
    std::vector<double> values;

    SampledFunction(fbm::TimeGrid g, std::vector<double> v);
    static SampledFunction constant(const fbm::TimeGrid& g, double c);
    static SampledFunction from(const fbm::TimeGrid& g, const std::function<double(double)>& f);

    double operator[](int k) const { return values[k]; }
    int n_nodes() const { return grid.n_nodes(); }
};

// Exact single integral of the kernel across one cell:
// integral over s in [a,b] of phi_H(s,t) ds, valid with t inside [a,b]
// (the singularity is integrable since 2H-1 > 0).
double kernel_cell_integral(double t, double a, double b, fbm::HurstParam h);

// Exact double integrals of phi_H over grid cell rectangles
// [t_i,t_{i+1}] x [t_j,t_{j+1}]; equals the covariance matrix of the fBm
// increments, row-major n x n.
std::vector<double> increment_gram(const fbm::TimeGrid& grid, fbm::HurstParam h);

// ||f||_H^2 with cell-exact kernel integration. Nonnegative.
double h_norm_sq(const SampledFunction& f, fbm::HurstParam h);

// <f,g>_H, bilinear and symmetric; throws on grid mismatch.
double h_inner(const SampledFunction& f, const SampledFunction& g, fbm::HurstParam h);

// Wiener sum  sum_k f_k (B_{t_{k+1}} - B_{t_k})  for one path on the same grid.
double wiener_integral(const SampledFunction& f, std::span<const double> path);

// t_k -> integral over [0,T] of q(s) phi_H(s, t_k) ds, cell-exact.
SampledFunction q_weight(const SampledFunction& q, fbm::HurstParam h);

struct CheckReport {
    std::string quantity;
    double mc_estimate = 0.0;
    double analytic = 0.0;
    double std_error = 0.0;
    double z = 0.0;
    bool pass = false;

    nlohmann::ordered_json to_json() const;
};

// Monte Carlo check that Var(int f dB^H) equals ||f||_H^2, gated at
// |z| <= tol_sigmas with the chi-square variance of the Gaussian estimator.
CheckReport check_isometry(const SampledFunction& f, const fbm::FbmEnsemble& ensemble,
                           double tol_sigmas);

// Monte Carlo check of E[X_T Y_T] = <g1,g2>_H for the pure-noise processes
// dX = g1 dB^H, dY = g2 dB^H started at zero.
CheckReport check_ibp_deterministic(const SampledFunction& g1, const SampledFunction& g2,
                                    const fbm::FbmEnsemble& ensemble, double tol_sigmas);

}  // namespace fbmctrl::fcalc
