#include "fbmc/estimation.hpp"

#include <cmath>

namespace fbmc {

std::vector<std::vector<int>> sylvester_signs(int K)
{
    if (K < 1 || (K & (K - 1)) != 0) {
        throw InvalidParameter("sylvester_signs: K must be a power of two, got " + std::to_string(K));
    }
    std::vector<std::vector<int>> A{{1}};
    while (static_cast<int>(A.size()) < K) {
        const int n = static_cast<int>(A.size());
        std::vector<std::vector<int>> next(2 * n, std::vector<int>(2 * n));
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                next[r][c] = A[r][c];
                next[r][c + n] = A[r][c];
                next[r + n][c] = A[r][c];
                next[r + n][c + n] = -A[r][c];
            }
        A = std::move(next);
    }
    return A;
}

OqamGrid PilotFrame::user_grid(int u, const OqamGrid& data) const
{
    if (u < 0 || u >= U) throw InvalidParameter("user_grid: user index out of range");
    if (data.K > 0 && data.M != M) throw InvalidParameter("user_grid: data grid has the wrong subcarrier count");
    OqamGrid g(M, training_length() + data.K);
    for (int i = 0; i < K; ++i) {
        const int k = pilot_position(i);
        for (int m = 0; m < M; ++m) g(m, k) = signs[i][u] * base[m];
    }
    for (int k = 0; k < data.K; ++k)
        for (int m = 0; m < M; ++m) g(m, training_length() + k) = data(m, k);
    return g;
}

CMat VirtualTrainingMatrix::B(int m) const
{
    CMat b(K, U);
    for (int i = 0; i < K; ++i)
        for (int u = 0; u < U; ++u) b(i, u) = static_cast<double>(signs[i][u]) * bbar[i][m];
    return b;
}

PilotSet build_pilots(int K, int U, int M, double Pd, RngStream& stream, const XiTable& xi, PilotBase base,
                      int guards)
{
    if (U < 1 || K < U) {
        throw InvalidParameter("build_pilots: need K >= U >= 1, got K=" + std::to_string(K) +
                               " U=" + std::to_string(U));
    }
    if ((K & (K - 1)) != 0) throw InvalidParameter("build_pilots: K must be a power of two");
    if (guards != 0 && guards != 1) throw InvalidParameter("build_pilots: guards must be 0 or 1");
    if (xi.M != M) throw InvalidParameter("build_pilots: transmultiplexer table built for a different M");
    if (!(Pd > 0.0)) throw InvalidParameter("build_pilots: P_d must be positive");

    PilotSet ps;
    auto& f = ps.frame;
    f.M = M;
    f.K = K;
    f.U = U;
    f.guards = guards;
    f.signs = sylvester_signs(K);
    f.base.resize(M);
    if (base == PilotBase::kAlternating) {
        const double amp = std::sqrt(2.0 * Pd);
        const double a = stream.sign() * amp;
        const double b = stream.sign() * amp;
        for (int m = 0; m < M; ++m) f.base[m] = (m % 2 == 0) ? a : b;
    } else {
        const double amp = std::sqrt(Pd);
        for (int m = 0; m < M; ++m) f.base[m] = stream.sign() * amp;
    }

    auto& v = ps.vtm;
    v.M = M;
    v.K = K;
    v.U = U;
    v.Pp = 2.0 * Pd * K;
    v.signs = f.signs;
    v.bbar.assign(K, std::vector<cplx>(M));
    for (int i = 0; i < K; ++i) {
        const int k = f.pilot_position(i);
        for (int mb = 0; mb < M; ++mb) {
            double I = 0.0;
            for (int dm = -xi.radius; dm <= xi.radius; ++dm) {
                if (dm == 0) continue;
                const int m = ((mb + dm) % M + M) % M;
                I += f.base[m] * xi.coupling(m, k, mb, k).imag();
            }
            v.bbar[i][mb] = {f.base[mb], I};
        }
    }
    return ps;
}

double pilot_interference_check(const PilotSet& pilots, const PrototypeFilter& filter, const XiTable& xi)
{
    const auto& f = pilots.frame;
    if (filter.M != f.M) throw InvalidParameter("pilot_interference_check: filter/frame M mismatch");
    double worst = 0.0;
    for (int u = 0; u < f.U; ++u) {
        const OqamGrid grid = f.user_grid(u);
        const Samples s = synthesize(grid, filter);
        const DemodGrid y = analyze(s, filter, grid.K);
        for (int i = 0; i < f.K; ++i) {
            const int k = f.pilot_position(i);
            for (int m = xi.radius; m < f.M - xi.radius; ++m) {
                const cplx expected = static_cast<double>(f.signs[i][u]) * pilots.vtm.bbar[i][m];
                worst = std::max(worst, std::abs(y(m, k) - expected));
            }
        }
    }
    return worst;
}

CMat receive_training(const std::vector<CMat>& G_cells, const CMat& B, double noise_var, RngStream& stream)
{
    if (G_cells.empty()) throw InvalidParameter("receive_training: no channels");
    const Eigen::Index N = G_cells[0].rows();
    CMat Y = CMat::Zero(N, B.rows());
    for (const auto& G : G_cells) {
        if (G.rows() != N || G.cols() != B.cols()) {
            throw InvalidParameter("receive_training: channel/training dimension mismatch");
        }
        Y += G * B.transpose();
    }
    if (noise_var > 0.0) Y += rand_cn_mat(stream, static_cast<int>(N), static_cast<int>(B.rows()), noise_var);
    return Y;
}

namespace {

/** Per-user pilot energies (B^H B)_{uu}; rejects a non-orthogonal training matrix. */
std::vector<double> pilot_energies(const CMat& Y, const CMat& B, int U, const char* who)
{
    if (B.cols() != U) {
        throw InvalidParameter(std::string(who) + ": training matrix has " + std::to_string(B.cols()) +
                               " columns, expected " + std::to_string(U));
    }
    if (Y.cols() != B.rows()) throw InvalidParameter(std::string(who) + ": Y and B disagree on K");
    const CMat BB = B.adjoint() * B;
    const double scale = BB.diagonal().cwiseAbs().maxCoeff();
    std::vector<double> Pp(U);
    for (int r = 0; r < U; ++r) {
        for (int c = 0; c < U; ++c) {
            if (r != c && std::abs(BB(r, c)) > 1e-9 * scale) {
                throw InvalidParameter(std::string(who) + ": training matrix is not orthogonal");
            }
        }
        Pp[r] = BB(r, r).real();
        if (!(Pp[r] > 0.0)) throw InvalidParameter(std::string(who) + ": zero pilot energy");
    }
    return Pp;
}

}  // namespace

EstimateBundle lmmse_single(const CMat& Y, const CMat& B, const std::vector<double>& beta, double noise_var)
{
    const int U = static_cast<int>(beta.size());
    const auto Pp = pilot_energies(Y, B, U, "lmmse_single");
    EstimateBundle e;
    e.G_hat.resize(Y.rows(), U);
    e.est_var.resize(U);
    e.err_var.resize(U);
    e.gamma.assign(U, 1.0);
    const CMat corr = Y * B.conjugate();  // column u = Y conj(b^u)
    for (int u = 0; u < U; ++u) {
        if (!(beta[u] >= 0.0)) throw InvalidParameter("lmmse_single: negative large-scale gain");
        const double den = Pp[u] * beta[u] + noise_var;
        e.G_hat.col(u) = (beta[u] / den) * corr.col(u);
        e.est_var[u] = Pp[u] * beta[u] * beta[u] / den;
        e.err_var[u] = beta[u] * noise_var / den;
    }
    e.cross = {e.G_hat};
    e.cross_est_var = {e.est_var};
    e.cross_err_var = {e.err_var};
    return e;
}

EstimateBundle lmmse_multicell(const CMat& Y, const CMat& B, const MultiCellScene& scene, int n, double noise_var)
{
    const int U = scene.U;
    const int Nc = scene.num_cells();
    if (n < 0 || n >= Nc) throw InvalidParameter("lmmse_multicell: BS index out of range");
    const auto Pp = pilot_energies(Y, B, U, "lmmse_multicell");
    EstimateBundle e;
    e.gamma = scene.gamma(n);
    e.G_hat.resize(Y.rows(), U);
    e.est_var.resize(U);
    e.err_var.resize(U);
    const CMat corr = Y * B.conjugate();
    for (int u = 0; u < U; ++u) {
        const double den = Pp[u] * e.gamma[u] + noise_var;
        e.G_hat.col(u) = corr.col(u) / den;
        e.est_var[u] = Pp[u] / den;
        e.err_var[u] = (Pp[u] * (e.gamma[u] - 1.0) + noise_var) / den;
    }
    e.cross.resize(Nc);
    e.cross_est_var.assign(Nc, std::vector<double>(U));
    e.cross_err_var.assign(Nc, std::vector<double>(U));
    for (int j = 0; j < Nc; ++j) {
        e.cross[j].resize(Y.rows(), U);
        for (int u = 0; u < U; ++u) {
            const double b = scene.beta(n, j, u);
            const double den = Pp[u] * e.gamma[u] + noise_var;
            e.cross[j].col(u) = b * e.G_hat.col(u);
            e.cross_est_var[j][u] = Pp[u] * b * b / den;
            e.cross_err_var[j][u] = b * (Pp[u] * e.gamma[u] - Pp[u] * b + noise_var) / den;
        }
    }
    return e;
}

}  // namespace fbmc
