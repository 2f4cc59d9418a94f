#include "doctest.h"

#include "fbmc/detection.hpp"

#include <cmath>

using namespace fbmc;

namespace {

double qfunc(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

CMat scaled_channel(RngStream& rs, int N, const std::vector<double>& beta)
{
    CMat G = rand_cn_mat(rs, N, static_cast<int>(beta.size()), 1.0);
    for (std::size_t u = 0; u < beta.size(); ++u) G.col(u) *= std::sqrt(beta[u]);
    return G;
}

}  // namespace

TEST_CASE("receiver names round-trip")
{
    for (Receiver r : {Receiver::kMrc, Receiver::kZf, Receiver::kMmse}) CHECK(parse_receiver(to_string(r)) == r);
    for (Csi c : {Csi::kPerfect, Csi::kImperfect}) CHECK(parse_csi(to_string(c)) == c);
    CHECK_THROWS_AS(parse_receiver("lmmse"), InvalidParameter);
    CHECK_THROWS_AS(parse_csi("partial"), InvalidParameter);
}

TEST_CASE("combiners: MRC copies, ZF inverts, MMSE matches the textbook form")
{
    RngStream rs(1, 0);
    const CMat G = scaled_channel(rs, 10, {1.0, 0.3, 0.7});
    CHECK((build_combiner(Receiver::kMrc, G, 1.0, 0.5).A - G).norm() == 0.0);

    const CMat Az = build_combiner(Receiver::kZf, G, 1.0, 0.5).A;
    CHECK((Az.adjoint() * G - CMat::Identity(3, 3)).norm() < 1e-12);

    const double s2 = 0.8, Pd = 0.6, extra = 0.25;
    const double lambda = s2 / (2.0 * Pd) + extra;
    const CMat R = G * G.adjoint() + lambda * CMat::Identity(10, 10);
    const CMat ref = R.fullPivLu().solve(G);
    CHECK((build_combiner(Receiver::kMmse, G, s2, Pd, extra).A - ref).norm() < 1e-10 * ref.norm());

    CHECK_THROWS_AS(build_combiner(Receiver::kZf, scaled_channel(rs, 2, {1, 1, 1}), 1.0, 0.5), InvalidParameter);
    CMat rank1(4, 2);
    rank1.col(0) = G.col(0).head(4);
    rank1.col(1) = 2.0 * G.col(0).head(4);
    CHECK_THROWS_AS(build_combiner(Receiver::kZf, rank1, 1.0, 0.5), NumericError);
}

TEST_CASE("real-part detection and QAM reconstruction")
{
    Combiner c;
    c.A = CMat::Identity(2, 2);
    CVec y(2);
    y << cplx{0.5, 3.0}, cplx{-1.0, 2.0};
    const RVec d = combine(c, y);
    CHECK(d(0) == 0.5);
    CHECK(d(1) == -1.0);
    CHECK_THROWS_AS(combine(c, CVec(3)), InvalidParameter);

    OqamGrid g(2, 2);
    g(0, 0) = 1;
    g(0, 1) = 2;
    g(1, 0) = 3;
    g(1, 1) = 4;
    const QamGrid q = reconstruct_qam(g);
    CHECK(q(0, 0) == cplx{1, 2});
    CHECK(q(1, 0) == cplx{4, 3});
}

TEST_CASE("single-user MRC: empirical SINR equals 2 P_d ||g||^2 / sigma^2")
{
    RngStream rs(2, 0);
    const CMat g = scaled_channel(rs, 16, {0.5});
    const double Pd = 0.5, s2 = 2.0;
    SinrModel model{{{g, {0.0}}}, Pd, s2};
    const Combiner c = build_combiner(Receiver::kMrc, g, s2, Pd);
    const DetectionStats st = measure_sinr(c, model, 40000, rs);
    CHECK(st.sinr[0] == doctest::Approx(2.0 * Pd * g.squaredNorm() / s2).epsilon(0.03));
    CHECK(st.coef[0] == doctest::Approx(g.squaredNorm()));
}

TEST_CASE("fast and explicit SINR estimators agree, including estimation errors")
{
    RngStream rs(3, 0);
    const CMat Gh = scaled_channel(rs, 12, {0.8, 0.4, 0.2});
    const CMat Gx = scaled_channel(rs, 12, {0.1, 0.1, 0.1});
    SinrModel model{{{Gh, {0.05, 0.1, 0.02}}, {Gx, {0.03, 0.0, 0.01}}}, 0.5, 1.0};
    const Combiner c = build_combiner(Receiver::kZf, Gh, 1.0, 0.5);
    RngStream r1(4, 0), r2(4, 1);
    const auto a = measure_sinr(c, model, 30000, r1);
    const auto b = measure_sinr_explicit(c, model, 30000, r2);
    for (int u = 0; u < 3; ++u) CHECK(a.sinr[u] == doctest::Approx(b.sinr[u]).epsilon(0.04));
}

TEST_CASE("noise-free interference-free ZF is flagged as unbounded")
{
    RngStream rs(5, 0);
    const CMat G = scaled_channel(rs, 6, {1.0, 1.0});
    SinrModel model{{{G, {0.0, 0.0}}}, 0.5, 0.0};
    const auto st = measure_sinr(build_combiner(Receiver::kZf, G, 1.0, 0.5), model, 100, rs);
    CHECK(st.unbounded[0]);
    CHECK(st.sinr[0] == 0.0);
}

TEST_CASE("Wilson interval on hand-computed cases")
{
    const SerResult r = wilson(10, 100);
    CHECK(r.ser == doctest::Approx(0.1));
    CHECK(r.lo == doctest::Approx(0.0552).epsilon(0.002));
    CHECK(r.hi == doctest::Approx(0.1744).epsilon(0.002));
    const SerResult z = wilson(0, 100);
    CHECK(z.lo == 0.0);
    CHECK(z.hi == doctest::Approx(0.0370).epsilon(0.005));
}

TEST_CASE("AWGN symbol error rates match the Q-function")
{
    const double Pd = 1.0, s2 = 1.0;
    SerChainConfig cfg;
    cfg.kind = ChainKind::kAwgn;
    cfg.N = cfg.U = 1;
    cfg.Pd = Pd;
    cfg.noise_var = s2;
    cfg.modulation = Modulation::kBpsk;
    const SerResult b = measure_ser(cfg, 100, RngStream(6, 0));
    const double pb = qfunc(std::sqrt(4.0 * Pd / s2));
    CHECK(std::abs(b.ser - pb) < 3.0 * b.half_width());

    cfg.modulation = Modulation::kQam4;
    const SerResult q = measure_ser(cfg, 100, RngStream(6, 1));
    const double qq = qfunc(std::sqrt(2.0 * Pd / s2));
    CHECK(std::abs(q.ser - (2.0 * qq - qq * qq)) < 3.0 * q.half_width());
}

TEST_CASE("waveform SER chains: error-free at high SNR, deterministic across threads")
{
    SerChainConfig cfg;
    cfg.N = 16;
    cfg.U = 2;
    cfg.L = 2;
    cfg.M = 32;
    cfg.num_symbols = 8;
    cfg.Pd = 50.0;
    cfg.noise_var = 1.0;
    for (ChainKind k : {ChainKind::kFbmc, ChainKind::kOfdm}) {
        cfg.kind = k;
        const SerResult r1 = measure_ser(cfg, 4, RngStream(7, 0), 1);
        const SerResult r3 = measure_ser(cfg, 4, RngStream(7, 0), 3);
        CHECK(r1.errors == 0);
        CHECK(r1.symbols == 4u * 2u * 32u * 8u);
        CHECK(r1.errors == r3.errors);
    }
    cfg.N = 1;
    CHECK_THROWS_AS(measure_ser(cfg, 1, RngStream(7, 0)), InvalidParameter);
}

TEST_CASE("CFO degrades CP-OFDM more than FBMC")
{
    SerChainConfig cfg;
    cfg.N = 32;
    cfg.U = 4;
    cfg.L = 2;
    cfg.M = 64;
    cfg.num_symbols = 16;
    cfg.Pd = 1.0;
    cfg.noise_var = 1.0;
    cfg.cfo = 0.3;
    cfg.kind = ChainKind::kFbmc;
    const SerResult f = measure_ser(cfg, 6, RngStream(8, 0));
    cfg.kind = ChainKind::kOfdm;
    const SerResult o = measure_ser(cfg, 6, RngStream(8, 0));
    CHECK(f.hi < o.lo);
}
