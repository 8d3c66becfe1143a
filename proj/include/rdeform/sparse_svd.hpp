#pragma once

// Trailing singular triplets and least-squares solves of sparse, possibly
// rank-deficient matrices, built on a sparse QR factorization M P = Q R.

#include "rdeform/polar_grid.hpp"

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace rdeform {

struct TrailingSVD {
    std::vector<double> sigma; // ascending, absolute
    Eigen::MatrixXd vectors;   // right singular vectors (columns), same order
    int iterations = 0;
};

struct TrailingOptions {
    int block = 12;
    int iterations = 24;    // upper bound
    unsigned seed = 0;
    double tolerance = 1e-6; // stop when the lower half of the Ritz values change less (0: run all)
    int min_iterations = 4;
};

// Estimates the `block` smallest singular values of M (rows >= cols is not
// required) and their right singular vectors by block inverse subspace
// iteration on RᵀR followed by a Rayleigh-Ritz step on M itself.
TrailingSVD trailing_singular(const SparseMatrix& M, const TrailingOptions& opts);

struct QRFactor;

// One sparse QR factorization of M (and Qᵀb) reused for the trailing
// singular triplets and the full-rank least-squares solution.
class SparseQR {
public:
    SparseQR(const SparseMatrix& M, const std::vector<double>& b = {});
    ~SparseQR();
    SparseQR(const SparseQR&) = delete;
    SparseQR& operator=(const SparseQR&) = delete;

    TrailingSVD trailing(const TrailingOptions& opts) const;
    // argmin ‖M x − b‖ assuming M has full column rank.
    std::vector<double> solve() const;

private:
    const SparseMatrix& M_;
    std::unique_ptr<QRFactor> f_;
};

// Largest singular value by power iteration on MᵀM.
double largest_singular(const SparseMatrix& M, int iterations = 200, unsigned seed = 0);

// Least-squares solution of M x ≈ b orthogonal to span(kernel) (orthonormal
// columns, near-null right singular vectors of M). With an empty kernel this
// is the ordinary least-squares solution; otherwise the kernel columns are
// deflated (k well-conditioned pivot columns removed) before solving.
std::vector<double> least_squares(const SparseMatrix& M, const std::vector<double>& b,
                                  const Eigen::MatrixXd& kernel);

// Dense reference: full singular value decomposition.
struct DenseSVD {
    Eigen::VectorXd sigma; // ascending
    Eigen::MatrixXd V;     // matching right singular vectors
};
DenseSVD dense_svd(const SparseMatrix& M);

} // namespace rdeform
