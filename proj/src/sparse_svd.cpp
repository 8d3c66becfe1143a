#include "rdeform/sparse_svd.hpp"

#include "rdeform/errors.hpp"

#include <SuiteSparseQR.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>

namespace rdeform {

using Long = SuiteSparse_long;
using LongSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, Long>;

// M P = Q R with R square upper triangular (n × n), c = Qᵀ b (first n rows),
// and pivots guarded away from exact zero so triangular solves stay finite.
struct QRFactor {
    LongSparse R;
    std::vector<Long> perm; // column j of R corresponds to unknown perm[j]
    Eigen::VectorXd c;
};

namespace {

struct Cholmod {
    cholmod_common cc;
    Cholmod() { cholmod_l_start(&cc); }
    ~Cholmod() { cholmod_l_finish(&cc); }
    Cholmod(const Cholmod&) = delete;
    Cholmod& operator=(const Cholmod&) = delete;
};

cholmod_sparse view(LongSparse& A)
{
    cholmod_sparse s{};
    s.nrow = static_cast<std::size_t>(A.rows());
    s.ncol = static_cast<std::size_t>(A.cols());
    s.nzmax = static_cast<std::size_t>(A.nonZeros());
    s.p = A.outerIndexPtr();
    s.i = A.innerIndexPtr();
    s.x = A.valuePtr();
    s.stype = 0;
    s.itype = CHOLMOD_LONG;
    s.xtype = CHOLMOD_REAL;
    s.dtype = CHOLMOD_DOUBLE;
    s.sorted = 1;
    s.packed = 1;
    return s;
}

cholmod_dense view(Eigen::VectorXd& b)
{
    cholmod_dense d{};
    d.nrow = static_cast<std::size_t>(b.size());
    d.ncol = 1;
    d.nzmax = d.nrow;
    d.d = d.nrow;
    d.x = b.data();
    d.xtype = CHOLMOD_REAL;
    d.dtype = CHOLMOD_DOUBLE;
    return d;
}


QRFactor factor(const SparseMatrix& M, const Eigen::VectorXd& b)
{
    const Long n = M.cols();
    const Long m = std::max<Long>(M.rows(), n);
    LongSparse A = M.cast<double>();
    if (A.rows() < m) A.conservativeResize(m, n); // zero rows keep R square
    A.makeCompressed();
    Eigen::VectorXd bb = Eigen::VectorXd::Zero(m);
    bb.head(b.size()) = b;

    Cholmod ch;
    cholmod_sparse As = view(A);
    cholmod_dense Bd = view(bb);
    cholmod_dense* C = nullptr;
    cholmod_sparse* R = nullptr;
    Long* E = nullptr;
    SuiteSparseQR<double>(SPQR_ORDERING_DEFAULT, SPQR_NO_TOL, n, &As, &Bd, &C, &R, &E, &ch.cc);
    if (!R || !C || ch.cc.status < CHOLMOD_OK) {
        if (R) cholmod_l_free_sparse(&R, &ch.cc);
        if (C) cholmod_l_free_dense(&C, &ch.cc);
        throw NumericalError("sparse QR factorization failed (status " + std::to_string(ch.cc.status) + ")");
    }

    QRFactor f;
    const Long* Rp = static_cast<const Long*>(R->p);
    const Long* Ri = static_cast<const Long*>(R->i);
    const double* Rx = static_cast<const double*>(R->x);
    double dmax = 0.0;
    for (Long j = 0; j < n; ++j)
        for (Long q = Rp[j]; q < Rp[j + 1]; ++q)
            if (Ri[q] == j) dmax = std::max(dmax, std::abs(Rx[q]));
    const double floor = std::max(dmax, 1.0) * 1e-14;
    std::vector<Eigen::Triplet<double, Long>> tr;
    tr.reserve(static_cast<std::size_t>(Rp[n]) + n);
    for (Long j = 0; j < n; ++j) {
        bool has_diag = false;
        for (Long q = Rp[j]; q < Rp[j + 1]; ++q) {
            if (Ri[q] > j || Rx[q] == 0.0) continue;
            double v = Rx[q];
            if (Ri[q] == j) {
                has_diag = true;
                if (std::abs(v) < floor) v = v < 0 ? -floor : floor;
            }
            tr.emplace_back(Ri[q], j, v);
        }
        if (!has_diag) tr.emplace_back(j, j, floor);
    }
    f.R.resize(n, n);
    f.R.setFromTriplets(tr.begin(), tr.end());
    f.R.makeCompressed();
    f.perm.resize(n);
    for (Long j = 0; j < n; ++j) f.perm[j] = E ? E[j] : j;
    const double* Cx = static_cast<const double*>(C->x);
    f.c = Eigen::Map<const Eigen::VectorXd>(Cx, n);

    cholmod_l_free_sparse(&R, &ch.cc);
    cholmod_l_free_dense(&C, &ch.cc);
    if (E) cholmod_l_free(n, sizeof(Long), E, &ch.cc);
    return f;
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& Y)
{
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
    return qr.householderQ() * Eigen::MatrixXd::Identity(Y.rows(), Y.cols());
}

Eigen::MatrixXd gaussian(Long rows, Long cols, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd X(rows, cols);
    for (Long j = 0; j < cols; ++j)
        for (Long i = 0; i < rows; ++i) X(i, j) = nd(rng);
    return X;
}

} // namespace

namespace {

// Rayleigh-Ritz on M in original unknown order: ascending σ and vectors.
void ritz(const SparseMatrix& M, const QRFactor& f, const Eigen::MatrixXd& X, TrailingSVD& out)
{
    const Long n = X.rows(), b = X.cols();
    Eigen::MatrixXd Xs(n, b);
    for (Long j = 0; j < n; ++j) Xs.row(f.perm[j]) = X.row(j);
    const Eigen::MatrixXd B = M * Xs;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinV);
    const Eigen::VectorXd s = svd.singularValues(); // descending
    const Eigen::MatrixXd W = svd.matrixV();
    const Long r = s.size();
    out.sigma.resize(r);
    out.vectors.resize(n, r);
    for (Long k = 0; k < r; ++k) {
        out.sigma[k] = s(r - 1 - k);
        out.vectors.col(k) = Xs * W.col(r - 1 - k);
    }
}

TrailingSVD trailing_from(const SparseMatrix& M, const QRFactor& f, const TrailingOptions& opts)
{
    const Long n = M.cols();
    const Long b = std::min<Long>(opts.block, n);
    Eigen::MatrixXd X = orthonormalize(gaussian(n, b, opts.seed));
    TrailingSVD out;
    std::vector<double> previous;
    for (int it = 0; it < opts.iterations; ++it) {
        Eigen::MatrixXd Y = f.R.transpose().triangularView<Eigen::Lower>().solve(X);
        Y = f.R.triangularView<Eigen::Upper>().solve(Y);
        X = orthonormalize(Y);
        ++out.iterations;
        if (opts.tolerance <= 0.0 || it + 1 < opts.min_iterations) continue;
        ritz(M, f, X, out);
        // the lower half of the block decides kernel splits; the upper half
        // only buffers it. Values far below the block top are null directions
        // whose relative jitter is roundoff.
        bool converged = !previous.empty();
        const std::size_t checked = (previous.size() + 1) / 2;
        for (std::size_t k = 0; converged && k < checked; ++k) {
            const double big = std::max(out.sigma[k], previous[k]);
            converged = std::abs(out.sigma[k] - previous[k]) <= opts.tolerance * big || big <= 1e-8 * out.sigma.back();
        }
        if (converged) return out;
        previous = out.sigma;
    }
    ritz(M, f, X, out);
    return out;
}

} // namespace

TrailingSVD trailing_singular(const SparseMatrix& M, const TrailingOptions& opts)
{
    return trailing_from(M, factor(M, Eigen::VectorXd::Zero(M.rows())), opts);
}

SparseQR::SparseQR(const SparseMatrix& M, const std::vector<double>& b) : M_(M)
{
    Eigen::VectorXd bv = b.empty() ? Eigen::VectorXd::Zero(M.rows())
                                   : Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Long>(b.size())).eval();
    f_ = std::make_unique<QRFactor>(factor(M, bv));
}

SparseQR::~SparseQR() = default;

TrailingSVD SparseQR::trailing(const TrailingOptions& opts) const { return trailing_from(M_, *f_, opts); }

std::vector<double> SparseQR::solve() const
{
    const Eigen::VectorXd y = f_->R.triangularView<Eigen::Upper>().solve(f_->c);
    std::vector<double> x(y.size());
    for (Long j = 0; j < y.size(); ++j) x[f_->perm[j]] = y(j);
    return x;
}

double largest_singular(const SparseMatrix& M, int iterations, unsigned seed)
{
    Eigen::VectorXd x = gaussian(M.cols(), 1, seed + 7919).col(0);
    x.normalize();
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
        const Eigen::VectorXd y = M.transpose() * (M * x);
        lambda = x.dot(y);
        const double ny = y.norm();
        if (ny == 0.0) return 0.0;
        x = y / ny;
    }
    return std::sqrt(std::max(lambda, 0.0));
}

std::vector<double> least_squares(const SparseMatrix& M, const std::vector<double>& b,
                                  const Eigen::MatrixXd& kernel)
{
    const Long n = M.cols();
    const Eigen::VectorXd bv = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Long>(b.size()));
    const Long k = kernel.cols();

    // drop k columns in which the kernel is best conditioned
    std::vector<char> dropped(n, 0);
    if (k > 0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(kernel.transpose());
        const auto& P = qr.colsPermutation().indices();
        for (Long j = 0; j < k; ++j) dropped[P(j)] = 1;
    }
    std::vector<Long> keep;
    std::vector<Long> col_of(n, -1);
    for (Long j = 0; j < n; ++j)
        if (!dropped[j]) {
            col_of[j] = static_cast<Long>(keep.size());
            keep.push_back(j);
        }

    SparseMatrix Ms;
    if (k > 0) {
        std::vector<Eigen::Triplet<double>> tr;
        tr.reserve(M.nonZeros());
        for (Long i = 0; i < M.outerSize(); ++i)
            for (SparseMatrix::InnerIterator it(M, i); it; ++it)
                if (col_of[it.col()] >= 0)
                    tr.emplace_back(static_cast<int>(it.row()), static_cast<int>(col_of[it.col()]), it.value());
        Ms.resize(M.rows(), static_cast<int>(keep.size()));
        Ms.setFromTriplets(tr.begin(), tr.end());
    }
    const QRFactor f = factor(k > 0 ? Ms : M, bv);
    const Eigen::VectorXd y = f.R.triangularView<Eigen::Upper>().solve(f.c);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (Long j = 0; j < static_cast<Long>(keep.size()); ++j) x(keep[f.perm[j]]) = y(j);
    if (k > 0) x -= kernel * (kernel.transpose() * x);
    return std::vector<double>(x.data(), x.data() + n);
}

DenseSVD dense_svd(const SparseMatrix& M)
{
    const Eigen::MatrixXd D(M);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeFullV);
    const Eigen::VectorXd s = svd.singularValues();
    const Eigen::MatrixXd& V = svd.matrixV();
    const Long n = D.cols(), r = s.size();
    DenseSVD out;
    out.sigma = Eigen::VectorXd::Zero(n);
    out.V.resize(n, n);
    // columns beyond min(m, n) are exact null directions
    Long pos = 0;
    for (Long j = r; j < n; ++j, ++pos) out.V.col(pos) = V.col(j);
    for (Long j = r - 1; j >= 0; --j, ++pos) {
        out.sigma(pos) = s(j);
        out.V.col(pos) = V.col(j);
    }
    return out;
}

} // namespace rdeform
