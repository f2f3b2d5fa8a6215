#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace fbmctrl::fbm {

// Hurst index, restricted to (1/2, 1) where the kernel
// phi_H(t,s) = H(2H-1)|t-s|^(2H-2) is positive and integrable.
struct HurstParam {
    double value;
    explicit HurstParam(double h);
};

// Uniform grid t_k = k * dt on [0, t_end].
struct TimeGrid {
    double t_end = 1.0;
    int n_steps = 1;

    TimeGrid() = default;
    TimeGrid(double t_end_, int n_steps_);
    double dt() const { return t_end / n_steps; }
    double node(int k) const { return t_end * k / n_steps; }
    int n_nodes() const { return n_steps + 1; }
    bool operator==(const TimeGrid& o) const {
        return t_end == o.t_end && n_steps == o.n_steps;
    }
};

// phi_H(t,s); diverges on the diagonal, so t == s is rejected and callers
// integrate across the diagonal in closed form instead.
double kernel_phi(double t, double s, HurstParam h);

// E[B^H_t B^H_s] = (t^2H + s^2H - |t-s|^2H) / 2.
double covariance(double t, double s, HurstParam h);

class FbmEnsemble {
public:
    FbmEnsemble(TimeGrid grid, HurstParam h, int n_paths, std::uint64_t seed);

    TimeGrid grid;
    HurstParam h;
    int n_paths;
    std::uint64_t seed;
    std::vector<double> values;  // row-major, n_paths x (n_steps + 1); column 0 is 0

    std::span<const double> path(int i) const {
        return {values.data() + static_cast<std::size_t>(i) * grid.n_nodes(),
                static_cast<std::size_t>(grid.n_nodes())};
    }
    double value(int i, int k) const {
        return values[static_cast<std::size_t>(i) * grid.n_nodes() + k];
    }

    // CSV dump: header "path_id,t,value", path-major row order.
    void dump_csv(std::ostream& os) const;
};

// Covariance matrix over the interior nodes t_1..t_n (node 0 is a degenerate
// zero row and is pinned instead of factored). Row-major n x n.
std::vector<double> covariance_matrix(const TimeGrid& grid, HurstParam h);

// In-place lower Cholesky of a symmetric positive definite row-major matrix.
// Throws std::runtime_error naming the offending pivot index on failure.
std::vector<double> cholesky_lower(std::vector<double> a, int n);

// Dense exact-covariance sampler. Trusted reference path for small grids.
FbmEnsemble sample_cholesky(const TimeGrid& grid, HurstParam h, int n_paths,
                            std::uint64_t seed);

// Circulant embedding of the stationary increment process; same
// distributional contract as sample_cholesky, meant for large grids.
// Throws std::runtime_error reporting the minimum eigenvalue if the
// embedding is not nonnegative definite.
FbmEnsemble sample_circulant(const TimeGrid& grid, HurstParam h, int n_paths,
                             std::uint64_t seed);

}  // namespace fbmctrl::fbm
