#pragma once

// Polar tensor grid on the unit disk and its differentiation operators.
//
// Nodes: index 0 is the disk center; ring i = 1..Nr at r_i = i/Nr carries
// Nθ equally spaced nodes θ_j = 2πj/Nθ. All operators act on node-valued
// fields and return Cartesian partial derivatives ∂/∂x¹, ∂/∂x².
//
// Radial derivatives are taken along full diameters (ray j joined to ray
// j + Nθ/2 through the center) with 7-point stencils (sixth order in the
// interior), angular derivatives with periodic 9-point stencils (eighth
// order). Center derivatives are least-squares fits of the directional
// derivatives over all diameters.

#include <Eigen/Sparse>

#include <array>
#include <vector>

namespace rdeform {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct GridSpec {
    int n_r = 16;
    int n_theta = 64;

    // Throws ConfigError unless n_r >= 8, n_theta >= 16 and even.
    void validate() const;
    int num_nodes() const { return 1 + n_r * n_theta; }
};

// Finite-difference weights (Fornberg) for derivatives 0..max_deriv at x0 on
// the stencil points xs. Returns w[d][k].
std::vector<std::vector<double>> fd_weights(double x0, const std::vector<double>& xs, int max_deriv);

class PolarGrid {
public:
    static constexpr int kRadialStencil = 7;
    static constexpr int kAngularStencil = 9;

    explicit PolarGrid(GridSpec spec);

    const GridSpec& spec() const { return spec_; }
    int num_nodes() const { return spec_.num_nodes(); }
    int node(int ring, int j) const; // ring >= 1, j taken modulo Nθ
    int ring_of(int node) const { return node == 0 ? 0 : 1 + (node - 1) / spec_.n_theta; }
    int ray_of(int node) const { return node == 0 ? 0 : (node - 1) % spec_.n_theta; }

    double h() const { return 1.0 / spec_.n_r; }
    double dtheta() const;
    double r(int node) const { return r_[node]; }
    double theta(int node) const { return theta_[node]; }
    double x1(int node) const { return x_[node][0]; }
    double x2(int node) const { return x_[node][1]; }

    bool is_boundary(int node) const { return ring_of(node) == spec_.n_r; }
    std::vector<int> boundary_nodes() const;

    // Cartesian derivative operators (rows = cols = nodes).
    const SparseMatrix& d1() const { return d1_; }
    const SparseMatrix& d2() const { return d2_; }
    const SparseMatrix& d11() const { return d11_; }
    const SparseMatrix& d12() const { return d12_; }
    const SparseMatrix& d22() const { return d22_; }
    // Angular derivative ∂/∂θ (zero at the center).
    const SparseMatrix& dtheta_op() const { return dth_; }

    // Jet operators in the order value, ∂1, ∂2, ∂11, ∂12, ∂22 (index 0 is
    // the identity).
    const SparseMatrix& jet_op(int k) const;

    // Area quadrature weights (sum w_i f_i ≈ ∫_D f dx¹dx²); composite
    // Simpson in r when Nr is even, otherwise Simpson with a 3/8 panel.
    const std::vector<double>& area_weights() const { return area_w_; }

private:
    void build();

    GridSpec spec_;
    std::vector<double> r_, theta_;
    std::vector<std::array<double, 2>> x_;
    SparseMatrix id_, d1_, d2_, d11_, d12_, d22_, dth_;
    std::vector<double> area_w_;
};

// y = A x for node fields.
std::vector<double> apply_op(const SparseMatrix& op, const std::vector<double>& f);

} // namespace rdeform
