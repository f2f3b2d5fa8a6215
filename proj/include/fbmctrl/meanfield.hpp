#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace fbmctrl::meanfield {

// Uniformly weighted particle approximation of a law on R.
struct EmpiricalMeasure {
    std::vector<double> samples;
    explicit EmpiricalMeasure(std::vector<double> s);
    int size() const { return static_cast<int>(samples.size()); }
};

// (psi, m): integral of psi against the measure.
double moment(const EmpiricalMeasure& m, const std::function<double(double)>& psi);

// step for central finite differences on scalar arguments
inline double fd_step(double x) { return 1e-6 * (1.0 + std::abs(x)); }

// Scalar moment map psi with its derivative; derivative falls back to a
// central finite difference when not supplied analytically.
struct MomentMap {
    std::function<double(double)> value;
    std::function<double(double)> deriv;  // optional

    double operator()(double x) const { return value(x); }
    double d(double x) const;
    static MomentMap identity();
};

// One-moment functional of a measure, F(m) = hat((psi, m)). Extra fixed
// arguments (a state x, a time t) are closed over in hat.
struct MeasureFn {
    std::function<double(double)> hat;
    std::function<double(double)> hat_deriv;  // optional
    MomentMap psi = MomentMap::identity();

    double operator()(const EmpiricalMeasure& m) const;
    double outer_derivative(const EmpiricalMeasure& m) const;
};

// Lions derivative of a scalar-moment functional, realized through the chain
// rule: x' -> outer * psi'(x').
struct MeasureDerivative {
    double outer = 0.0;
    MomentMap psi;
    double operator()(double xprime) const { return outer * psi.d(xprime); }
};

MeasureDerivative measure_derivative(const MeasureFn& f, const EmpiricalMeasure& m);

// First-order Taylor check of the lifting definition along a perturbation
// direction; residuals must vanish at order >= 1.9 on a log-log fit.
struct LiftingReport {
    std::vector<double> eps;
    std::vector<double> residuals;
    double slope = 0.0;
    bool exact = false;  // all residuals at rounding level
    bool pass = false;
};

LiftingReport lifting_check(const MeasureFn& f, const EmpiricalMeasure& m0,
                            std::span<const double> direction,
                            std::span<const double> eps_grid);

// W_2 between equal-size uniform empirical measures: quadratic cost of the
// sorted (monotone) coupling. Throws on size mismatch.
double wasserstein2(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

// ---------------------------------------------------------------------------
// Hat-function families for the dynamics and costs. Partial derivatives may
// be supplied analytically; missing ones use central finite differences.
// ---------------------------------------------------------------------------

// b-hat / f-hat shape: value(t, x, xbar, v1, v2, u) with moments
// v1 = (psi1, m), v2 = (psi2, mbar).
struct DriftFn {
    using Fn = std::function<double(double, double, double, double, double, double)>;
    Fn value;
    Fn dx, dxbar, dv1, dv2, du;  // optional
    MomentMap psi1 = MomentMap::identity();
    MomentMap psi2 = MomentMap::identity();

    double d_x(double t, double x, double xb, double v1, double v2, double u) const;
    double d_xbar(double t, double x, double xb, double v1, double v2, double u) const;
    double d_v1(double t, double x, double xb, double v1, double v2, double u) const;
    double d_v2(double t, double x, double xb, double v1, double v2, double u) const;
    double d_u(double t, double x, double xb, double v1, double v2, double u) const;
};

// sigma-hat shape: value(t, v1, v2) with moments v1 = (phi1, m),
// v2 = (phi2, mbar); deterministic in the state by construction.
struct DiffusionFn {
    using Fn = std::function<double(double, double, double)>;
    Fn value;
    Fn dv1, dv2;  // optional
    MomentMap phi1 = MomentMap::identity();
    MomentMap phi2 = MomentMap::identity();

    double d_v1(double t, double v1, double v2) const;
    double d_v2(double t, double v1, double v2) const;
};

// g-hat shape: value(x, v) with moment v = (gamma, m).
struct TerminalFn {
    using Fn = std::function<double(double, double)>;
    Fn value;
    Fn dx, dv;  // optional
    MomentMap gamma = MomentMap::identity();

    double d_x(double x, double v) const;
    double d_v(double x, double v) const;
};

}  // namespace fbmctrl::meanfield
