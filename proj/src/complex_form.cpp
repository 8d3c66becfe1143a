#include "rdeform/complex_form.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace rdeform {

namespace {

// Extended jet: per field, derivatives up to third order indexed by the
// exponent pair (n1, n2); the first six entries coincide with the jet order
// value, ∂1, ∂2, ∂11, ∂12, ∂22.
constexpr int kExt = 10;
constexpr int kCols = 3 * kExt;
using ExtRow = Eigen::Matrix<double, 1, kCols>;

int ext_index(int n1, int n2)
{
    static constexpr int base[] = {0, 1, 3, 6};
    const int o = n1 + n2;
    return base[o] + (o - n1);
}

constexpr int kOrder[kExt] = {0, 1, 1, 2, 2, 2, 3, 3, 3, 3};
constexpr int kN1[kExt] = {0, 1, 0, 2, 1, 0, 3, 2, 1, 0};

ExtRow from_jet(const std::array<double, 18>& row, double scale)
{
    ExtRow out = ExtRow::Zero();
    for (int f = 0; f < 3; ++f)
        for (int k = 0; k < 6; ++k) out(kExt * f + k) = scale * row[6 * f + k];
    return out;
}

} // namespace

ComplexFormReport to_complex_form(const LinearSystem& sys, const ComplexFormOptions& opts)
{
    const PolarGrid& grid = *sys.grid;
    const int nn = grid.num_nodes();
    ComplexFormReport rep;
    if (sys.bc) {
        rep.lambda = sys.bc->lambda;
        rep.phi_rate = sys.bc->phi_rate;
    }
    if (static_cast<int>(sys.jacobians.size()) != nn) {
        rep.reason = "system carries no node Jacobians";
        return rep;
    }

    // Normalized G rows: unit coefficient on ∂_i ċ.
    std::vector<std::array<double, 36>> ghat(nn);
    std::vector<std::array<double, 2>> ghat_rhs(nn);
    double min_pivot = 1.0;
    for (int p = 0; p < nn; ++p) {
        for (int i = 0; i < 2; ++i) {
            const auto& row = sys.jacobians[p][i];
            double mx = 0.0;
            for (double v : row) mx = std::max(mx, std::abs(v));
            const double kappa = row[6 * 2 + 1 + i];
            const double rel = mx > 0.0 ? std::abs(kappa) / mx : 0.0;
            min_pivot = std::min(min_pivot, rel);
            if (rel < opts.pivot_threshold) {
                std::ostringstream os;
                os << "coefficient of the normal-rate gradient in G row " << i + 1 << " vanishes at node " << p
                   << " (relative " << rel << ")";
                rep.reason = os.str();
                rep.min_pivot = min_pivot;
                return rep;
            }
            for (int col = 0; col < 18; ++col) ghat[p][18 * i + col] = row[col] / kappa;
            ghat_rhs[p][i] = sys.interior_rhs[3 * p + i] / kappa;
        }
    }

    // Derivatives of the normalized coefficient fields.
    std::array<std::array<std::vector<double>, 36>, 2> dcoef;
    std::array<std::array<std::vector<double>, 2>, 2> drhs;
    {
        std::vector<double> field(nn);
        for (int c = 0; c < 36; ++c) {
            for (int p = 0; p < nn; ++p) field[p] = ghat[p][c];
            dcoef[0][c] = apply_op(grid.d1(), field);
            dcoef[1][c] = apply_op(grid.d2(), field);
        }
        for (int i = 0; i < 2; ++i) {
            for (int p = 0; p < nn; ++p) field[p] = ghat_rhs[p][i];
            drhs[0][i] = apply_op(grid.d1(), field);
            drhs[1][i] = apply_op(grid.d2(), field);
        }
    }

    rep.A.assign(nn, {});
    rep.B.assign(nn, {});
    rep.E.assign(nn, {});
    rep.Psi.assign(nn, {});
    rep.p.assign(nn, {});
    rep.q.assign(nn, {});
    rep.q0.assign(nn, 0.0);
    rep.fit_residual.assign(nn, 0.0);

    Eigen::Matrix<double, 2, 4> T;
    T << 0.5, 0.0, 0.0, 0.5, 0.0, 0.5, -0.5, 0.0;

    std::vector<std::string> failure(nn);
    std::vector<double> pivots(nn, 1.0);
#pragma omp parallel for schedule(static)
    for (int p = 0; p < nn; ++p) {
        // rows: G1, G2, ∂1G1, ∂2G1, ∂1G2, ∂2G2
        Eigen::Matrix<double, 6, kCols> E = Eigen::Matrix<double, 6, kCols>::Zero();
        Eigen::Matrix<double, 6, 1> rhs;
        for (int i = 0; i < 2; ++i) {
            std::array<double, 18> row{};
            for (int col = 0; col < 18; ++col) row[col] = ghat[p][18 * i + col];
            E.row(i) = from_jet(row, 1.0);
            rhs(i) = ghat_rhs[p][i];
            for (int j = 0; j < 2; ++j) {
                const int m = 2 + 2 * i + j;
                for (int f = 0; f < 3; ++f)
                    for (int k = 0; k < 6; ++k) {
                        const double coef = ghat[p][18 * i + 6 * f + k];
                        E(m, kExt * f + k) += dcoef[j][18 * i + 6 * f + k][p];
                        const int n1 = kN1[k] + (j == 0 ? 1 : 0);
                        const int n2 = kOrder[k] - kN1[k] + (j == 1 ? 1 : 0);
                        E(m, kExt * f + ext_index(n1, n2)) += coef;
                    }
                rhs(m) = drhs[j][i][p];
            }
        }

        // ċ derivatives up to second order
        Eigen::Matrix<double, 6, 5> P;
        for (int d = 0; d < 5; ++d) P.col(d) = E.col(kExt * 2 + 1 + d);
        const Eigen::JacobiSVD<Eigen::Matrix<double, 6, 5>> svd(P, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto& s = svd.singularValues();
        pivots[p] = s(0) > 0.0 ? s(4) / s(0) : 0.0;
        if (pivots[p] < opts.pivot_threshold) {
            std::ostringstream os;
            os << "normal-rate derivatives are not determined by the G rows at node " << p << " (relative pivot "
               << pivots[p] << ")";
            failure[p] = os.str();
            continue;
        }
        const Eigen::Matrix<double, 6, 1> u = svd.matrixU().col(5); // left null vector: compatibility row
        const ExtRow curl = u.transpose() * E;
        const double curl_rhs = u.dot(rhs);

        const ExtRow inv = from_jet(sys.jacobians[p][2], 1.0);
        Eigen::Matrix<double, 5, 1> icd;
        for (int d = 0; d < 5; ++d) icd(d) = inv(kExt * 2 + 1 + d);
        // yy solves Pᵀ yy = i_c (minimum norm): yy = U Σ⁻¹ Vᵀ i_c
        Eigen::Matrix<double, 6, 1> yy = Eigen::Matrix<double, 6, 1>::Zero();
        {
            const Eigen::Matrix<double, 5, 1> w = svd.matrixV().transpose() * icd;
            for (int d = 0; d < 5; ++d) yy += svd.matrixU().col(d) * (w(d) / s(d));
        }
        const ExtRow div = inv - yy.transpose() * E;
        const double div_rhs = sys.interior_rhs[3 * p + 2] - yy.dot(rhs);

        Eigen::Matrix<double, 2, kCols> R0;
        R0.row(0) = div;
        R0.row(1) = curl;
        Eigen::Matrix<double, 2, 4> D;
        for (int r = 0; r < 2; ++r) {
            D(r, 0) = R0(r, 1);
            D(r, 1) = R0(r, 2);
            D(r, 2) = R0(r, kExt + 1);
            D(r, 3) = R0(r, kExt + 2);
        }
        const Eigen::Matrix2d DDt = D * D.transpose();
        if (std::abs(DDt.determinant()) <= 1e-14 * DDt.squaredNorm()) {
            std::ostringstream os;
            os << "first-order part is degenerate at node " << p;
            failure[p] = os.str();
            continue;
        }
        const Eigen::Matrix2d N = T * D.transpose() * DDt.inverse();
        const Eigen::Matrix<double, 2, kCols> R = N * R0;
        const Eigen::Vector2d Rrhs = N * Eigen::Vector2d(div_rhs, curl_rhs);

        double res = (N * D - T).norm();
        for (int r = 0; r < 2; ++r) {
            for (int f = 0; f < 2; ++f)
                for (int k = 3; k < kExt; ++k) res += std::abs(R(r, kExt * f + k));
            for (int k = 1; k < kExt; ++k) res += std::abs(R(r, kExt * 2 + k));
        }
        rep.fit_residual[p] = res;

        const double a1 = R(0, 0), a2 = R(0, kExt), b1 = R(1, 0), b2 = R(1, kExt);
        rep.A[p] = {(a1 - b2) / 2, (a2 + b1) / 2};
        rep.B[p] = {(a1 + b2) / 2, (b1 - a2) / 2};
        rep.E[p] = {R(0, 2 * kExt), R(1, 2 * kExt)};
        rep.Psi[p] = {Rrhs(0), Rrhs(1)};
        rep.q[p] = {2 * a1, 2 * a2};
        rep.p[p] = {2 * b1, 2 * b2};
        rep.q0[p] = -2 * R(0, 2 * kExt);
    }

    for (int p = 0; p < nn; ++p) min_pivot = std::min(min_pivot, pivots[p]);
    rep.min_pivot = min_pivot;
    for (int p = 0; p < nn; ++p)
        if (!failure[p].empty()) {
            rep.reason = failure[p];
            return rep;
        }
    for (double r : rep.fit_residual) rep.max_fit_residual = std::max(rep.max_fit_residual, r);
    rep.available = true;
    return rep;
}

} // namespace rdeform
