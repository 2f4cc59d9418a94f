#include "doctest.h"

#include "fbmc/estimation.hpp"

#include <cmath>

using namespace fbmc;

namespace {

struct Setup {
    PrototypeFilter filter;
    XiTable xi;
    explicit Setup(int M) : filter(build_iota(M, 4)), xi(xi_table(filter, 4)) {}
};

}  // namespace

TEST_CASE("Sylvester signs: K=2 pattern and column orthogonality")
{
    const auto s2 = sylvester_signs(2);
    CHECK(s2 == std::vector<std::vector<int>>{{1, 1}, {1, -1}});
    const auto s8 = sylvester_signs(8);
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b) {
            int dot = 0;
            for (int i = 0; i < 8; ++i) dot += s8[i][a] * s8[i][b];
            CHECK(dot == (a == b ? 8 : 0));
        }
    CHECK_THROWS_AS(sylvester_signs(6), InvalidParameter);
}

TEST_CASE("virtual training matrix is orthogonal with energy P_p")
{
    const Setup st(64);
    RngStream rs(1, 0);
    const double Pd = 0.5;
    const int K = 8, U = 6;
    for (PilotBase base : {PilotBase::kAlternating, PilotBase::kRandom}) {
        const PilotSet ps = build_pilots(K, U, 64, Pd, rs, st.xi, base);
        for (int m : {3, 16, 40}) {
            const CMat BB = ps.vtm.B(m).adjoint() * ps.vtm.B(m);
            for (int a = 0; a < U; ++a)
                for (int b = 0; b < U; ++b)
                    if (a != b) CHECK(std::abs(BB(a, b)) < 1e-12);
            if (base == PilotBase::kAlternating) {
                CHECK(BB(0, 0).real() == doctest::Approx(2.0 * Pd * K).epsilon(0.02));
            }
        }
    }
}

TEST_CASE("pilot construction validates its arguments")
{
    const Setup st(64);
    RngStream rs(2, 0);
    CHECK_THROWS_AS(build_pilots(4, 8, 64, 0.5, rs, st.xi), InvalidParameter);
    CHECK_THROWS_AS(build_pilots(6, 4, 64, 0.5, rs, st.xi), InvalidParameter);
    CHECK_THROWS_AS(build_pilots(8, 4, 128, 0.5, rs, st.xi), InvalidParameter);
    CHECK_THROWS_AS(build_pilots(8, 4, 64, 0.5, rs, st.xi, PilotBase::kAlternating, 2), InvalidParameter);
}

TEST_CASE("frame layout places pilots behind guard half-symbols")
{
    const Setup st(64);
    RngStream rs(3, 0);
    const PilotSet ps = build_pilots(4, 4, 64, 0.5, rs, st.xi);
    CHECK(ps.frame.pilot_position(3) == 6);
    CHECK(ps.frame.training_length() == 8);
    const OqamGrid g = ps.frame.user_grid(1, OqamGrid(64, 2));
    REQUIRE(g.K == 10);
    CHECK(g(5, 1) == 0.0);  // guard
    CHECK(g(5, 2) == doctest::Approx(ps.frame.signs[1][1] * ps.frame.base[5]));
}

TEST_CASE("demodulated noiseless pilots equal the virtual training symbols")
{
    const Setup st(64);
    RngStream rs(4, 0);
    const PilotSet ps = build_pilots(8, 8, 64, 0.5, rs, st.xi);
    CHECK(pilot_interference_check(ps, st.filter, st.xi) < 2e-2);
}

TEST_CASE("single-cell LMMSE: noiseless limit and covariance bookkeeping")
{
    const Setup st(64);
    RngStream rs(5, 0);
    const int N = 16, U = 4, K = 4;
    const PilotSet ps = build_pilots(K, U, 64, 0.5, rs, st.xi);
    const CMat B = ps.vtm.B(20);
    const std::vector<double> beta{1.0, 0.5, 0.2, 0.1};
    CMat G = rand_cn_mat(rs, N, U, 1.0);
    for (int u = 0; u < U; ++u) G.col(u) *= std::sqrt(beta[u]);

    // As the noise vanishes the estimate approaches the channel.
    const EstimateBundle clean = lmmse_single(receive_training({G}, B, 0.0, rs), B, beta, 1e-12);
    CHECK((clean.G_hat - G).norm() < 1e-9 * G.norm());

    const double s2 = 0.7;
    const EstimateBundle e = lmmse_single(receive_training({G}, B, s2, rs), B, beta, s2);
    const double Pp = (B.adjoint() * B)(0, 0).real();
    for (int u = 0; u < U; ++u) {
        CHECK(e.est_var[u] == doctest::Approx(Pp * beta[u] * beta[u] / (Pp * beta[u] + s2)));
        CHECK(e.err_var[u] == doctest::Approx(beta[u] * s2 / (Pp * beta[u] + s2)));
        CHECK(e.est_var[u] + e.err_var[u] == doctest::Approx(beta[u]));
    }
    CMat notorth = B;
    notorth(0, 1) += 0.3;
    CHECK_THROWS_AS(lmmse_single(receive_training({G}, B, s2, rs), notorth, beta, s2), InvalidParameter);
}

TEST_CASE("multi-cell LMMSE: contaminated estimates are beta-scaled copies")
{
    const Setup st(64);
    RngStream rs(6, 0);
    const int N = 8, U = 4;
    const PilotSet ps = build_pilots(4, U, 64, 0.5, rs, st.xi);
    const CMat B = ps.vtm.B(10);
    const MultiCellScene scene = gen_multicell(rs, U);
    std::vector<CMat> cells;
    for (int i = 0; i < scene.num_cells(); ++i) {
        CMat Gi = rand_cn_mat(rs, N, U, 1.0);
        for (int u = 0; u < U; ++u) Gi.col(u) *= std::sqrt(scene.beta(0, i, u));
        cells.push_back(Gi);
    }
    const double s2 = 1.0;
    const CMat Y = receive_training(cells, B, s2, rs);
    const EstimateBundle e = lmmse_multicell(Y, B, scene, 0, s2);
    const double Pp = (B.adjoint() * B)(0, 0).real();
    const auto gam = scene.gamma(0);
    for (int u = 0; u < U; ++u) {
        CHECK(e.est_var[u] == doctest::Approx(Pp / (Pp * gam[u] + s2)));
        CHECK(e.est_var[u] + e.err_var[u] == doctest::Approx(1.0));
        for (int j = 0; j < scene.num_cells(); ++j) {
            CHECK((e.cross[j].col(u) - scene.beta(0, j, u) * e.G_hat.col(u)).norm() < 1e-12);
            CHECK(e.cross_est_var[j][u] + e.cross_err_var[j][u] == doctest::Approx(scene.beta(0, j, u)));
        }
    }
    CHECK_THROWS_AS(lmmse_multicell(Y, B, scene, 9, s2), InvalidParameter);
}

TEST_CASE("multi-cell LMMSE with a single cell equals single-cell LMMSE with unit gains")
{
    const Setup st(64);
    RngStream rs(7, 0);
    const PilotSet ps = build_pilots(4, 4, 64, 0.5, rs, st.xi);
    const CMat B = ps.vtm.B(30);
    const CMat G = rand_cn_mat(rs, 6, 4, 1.0);
    const CMat Y = receive_training({G}, B, 0.5, rs);
    const EstimateBundle a = lmmse_multicell(Y, B, uniform_multicell(1, 4, 0.0), 0, 0.5);
    const EstimateBundle b = lmmse_single(Y, B, std::vector<double>(4, 1.0), 0.5);
    CHECK((a.G_hat - b.G_hat).norm() < 1e-12);
}
