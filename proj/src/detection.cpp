#include "fbmc/detection.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace fbmc {

std::string to_string(Receiver r)
{
    switch (r) {
    case Receiver::kMrc: return "mrc";
    case Receiver::kZf: return "zf";
    case Receiver::kMmse: return "mmse";
    }
    return "unknown";
}

std::string to_string(Csi c) { return c == Csi::kPerfect ? "perfect" : "imperfect"; }

Receiver parse_receiver(const std::string& s)
{
    if (s == "mrc") return Receiver::kMrc;
    if (s == "zf") return Receiver::kZf;
    if (s == "mmse") return Receiver::kMmse;
    throw InvalidParameter("unknown receiver '" + s + "' (expected mrc, zf or mmse)");
}

Csi parse_csi(const std::string& s)
{
    if (s == "perfect") return Csi::kPerfect;
    if (s == "imperfect") return Csi::kImperfect;
    throw InvalidParameter("unknown CSI mode '" + s + "' (expected perfect or imperfect)");
}

Combiner build_combiner(Receiver kind, const CMat& G, double noise_var, double Pd, double extra_loading)
{
    Combiner c;
    c.kind = kind;
    switch (kind) {
    case Receiver::kMrc:
        c.A = G;
        break;
    case Receiver::kZf: {
        if (G.rows() < G.cols()) {
            throw InvalidParameter("build_combiner: ZF needs N >= U, got N=" + std::to_string(G.rows()) +
                                   " U=" + std::to_string(G.cols()));
        }
        try {
            c.A = hermitian_solve(gram(G), G.adjoint()).adjoint();
        } catch (const NumericError& e) {
            throw NumericError(std::string("build_combiner: rank-deficient channel for ZF: ") + e.what());
        }
        break;
    }
    case Receiver::kMmse: {
        if (!(Pd > 0.0)) throw InvalidParameter("build_combiner: MMSE needs P_d > 0");
        const double lambda = noise_var / (2.0 * Pd) + extra_loading;
        CMat R = gram(G);
        R.diagonal().array() += lambda;
        c.A = hermitian_solve(R, G.adjoint()).adjoint();
        break;
    }
    }
    return c;
}

RVec combine(const Combiner& combiner, const CVec& y)
{
    if (combiner.A.rows() != y.size()) throw InvalidParameter("combine: dimension mismatch");
    return (combiner.A.adjoint() * y).real();
}

QamGrid reconstruct_qam(const OqamGrid& d_hat) { return oqam_to_qam(d_hat); }

namespace {

void check_model(const Combiner& combiner, const SinrModel& model)
{
    if (model.blocks.empty()) throw InvalidParameter("measure_sinr: model has no transmitter blocks");
    const Eigen::Index N = combiner.A.rows();
    const Eigen::Index U = combiner.A.cols();
    if (model.blocks[0].mean.cols() != U) {
        throw InvalidParameter("measure_sinr: combiner and served block disagree on U");
    }
    for (const auto& b : model.blocks) {
        if (b.mean.rows() != N) throw InvalidParameter("measure_sinr: block has the wrong antenna count");
        if (static_cast<Eigen::Index>(b.err_var.size()) != b.mean.cols()) {
            throw InvalidParameter("measure_sinr: error-variance vector does not match block width");
        }
    }
}

cplx virtual_symbol(RngStream& stream, double Pd, double& d)
{
    d = stream.sign() * std::sqrt(Pd);
    return {d, std::sqrt(Pd) * stream.normal()};
}

DetectionStats finish(const std::vector<double>& coef, const std::vector<double>& sumsq, double Pd,
                      std::size_t samples)
{
    DetectionStats st;
    const std::size_t U = coef.size();
    st.samples = samples;
    st.coef = coef;
    st.signal.resize(U);
    st.interference_noise.resize(U);
    st.sinr.resize(U);
    st.unbounded.resize(U);
    for (std::size_t u = 0; u < U; ++u) {
        st.signal[u] = Pd * coef[u] * coef[u];
        st.interference_noise[u] = samples ? sumsq[u] / static_cast<double>(samples) : 0.0;
        st.unbounded[u] = st.interference_noise[u] <= 1e-20 * st.signal[u];
        st.sinr[u] = st.unbounded[u] ? 0.0 : st.signal[u] / st.interference_noise[u];
    }
    return st;
}

}  // namespace

DetectionStats measure_sinr(const Combiner& combiner, const SinrModel& model, std::size_t samples,
                            RngStream& stream)
{
    check_model(combiner, model);
    const CMat& A = combiner.A;
    const int U = static_cast<int>(A.cols());
    std::vector<double> coef(U);
    for (int u = 0; u < U; ++u) coef[u] = A.col(u).dot(model.blocks[0].mean.col(u)).real();

    std::vector<CMat> proj;
    for (const auto& b : model.blocks) proj.push_back(A.adjoint() * b.mean);

    // Factor F with F F^H = A^H A (eigen-decomposition tolerates rank deficiency).
    Eigen::SelfAdjointEigenSolver<CMat> es(A.adjoint() * A);
    const RVec lam = es.eigenvalues().cwiseMax(0.0);
    const CMat F = es.eigenvectors() * lam.cwiseSqrt().asDiagonal();

    std::vector<double> sumsq(U, 0.0);
    std::vector<double> d0(U);
    CVec t(U), out(U);
    const double noise_sd = std::sqrt(model.noise_var);
    for (std::size_t s = 0; s < samples; ++s) {
        out.setZero();
        t.setZero();
        for (std::size_t bi = 0; bi < model.blocks.size(); ++bi) {
            const auto& blk = model.blocks[bi];
            const int W = static_cast<int>(blk.mean.cols());
            CVec x(W);
            for (int j = 0; j < W; ++j) {
                double d = 0.0;
                x(j) = virtual_symbol(stream, model.Pd, d);
                if (bi == 0) d0[j] = d;
            }
            out.noalias() += proj[bi] * x;
            for (int j = 0; j < W; ++j) {
                if (blk.err_var[j] <= 0.0) continue;
                const cplx scale = std::sqrt(blk.err_var[j]) * x(j);
                for (int r = 0; r < U; ++r) t(r) += scale * stream.cn(1.0);
            }
        }
        if (noise_sd > 0.0) {
            for (int r = 0; r < U; ++r) t(r) += noise_sd * stream.cn(1.0);
        }
        out.noalias() += F * t;
        for (int u = 0; u < U; ++u) {
            const double v = out(u).real() - coef[u] * d0[u];
            sumsq[u] += v * v;
        }
    }
    return finish(coef, sumsq, model.Pd, samples);
}

DetectionStats measure_sinr_explicit(const Combiner& combiner, const SinrModel& model, std::size_t samples,
                                     RngStream& stream)
{
    check_model(combiner, model);
    const CMat& A = combiner.A;
    const int U = static_cast<int>(A.cols());
    const Eigen::Index N = A.rows();
    std::vector<double> coef(U);
    for (int u = 0; u < U; ++u) coef[u] = A.col(u).dot(model.blocks[0].mean.col(u)).real();
    std::vector<double> sumsq(U, 0.0);
    std::vector<double> d0(U);
    for (std::size_t s = 0; s < samples; ++s) {
        CVec y = CVec::Zero(N);
        for (std::size_t bi = 0; bi < model.blocks.size(); ++bi) {
            const auto& blk = model.blocks[bi];
            for (Eigen::Index j = 0; j < blk.mean.cols(); ++j) {
                double d = 0.0;
                const cplx x = virtual_symbol(stream, model.Pd, d);
                if (bi == 0) d0[j] = d;
                CVec g = blk.mean.col(j);
                if (blk.err_var[j] > 0.0) {
                    for (Eigen::Index n = 0; n < N; ++n) g(n) += stream.cn(blk.err_var[j]);
                }
                y += g * x;
            }
        }
        if (model.noise_var > 0.0) {
            for (Eigen::Index n = 0; n < N; ++n) y(n) += stream.cn(model.noise_var);
        }
        const RVec dh = combine(combiner, y);
        for (int u = 0; u < U; ++u) {
            const double v = dh(u) - coef[u] * d0[u];
            sumsq[u] += v * v;
        }
    }
    return finish(coef, sumsq, model.Pd, samples);
}

SerResult wilson(std::uint64_t errors, std::uint64_t symbols)
{
    SerResult r;
    r.errors = errors;
    r.symbols = symbols;
    if (symbols == 0) {
        r.hi = 1.0;
        return r;
    }
    const double z = 1.959963984540054;
    const double n = static_cast<double>(symbols);
    const double p = static_cast<double>(errors) / n;
    const double den = 1.0 + z * z / n;
    const double centre = (p + z * z / (2.0 * n)) / den;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / den;
    r.ser = p;
    r.lo = errors == 0 ? 0.0 : std::max(0.0, centre - half);
    r.hi = errors == symbols ? 1.0 : std::min(1.0, centre + half);
    return r;
}

namespace {

struct ChainTrialResult {
    std::uint64_t errors = 0;
    std::uint64_t symbols = 0;
};

std::uint64_t count_errors(const QamGrid& truth, const QamGrid& est, Modulation mod, double Pd)
{
    std::uint64_t e = 0;
    for (std::size_t i = 0; i < truth.data.size(); ++i) {
        if (qam_decide(est.data[i], mod, Pd) != truth.data[i]) ++e;
    }
    return e;
}

ChainTrialResult awgn_trial(const SerChainConfig& cfg, RngStream& rs)
{
    const QamGrid c = random_qam(cfg.M, cfg.num_symbols, cfg.modulation, cfg.Pd, rs);
    QamGrid y = c;
    for (auto& v : y.data) v += rs.cn(cfg.noise_var);
    return {count_errors(c, y, cfg.modulation, cfg.Pd), c.data.size()};
}

ChainTrialResult waveform_trial(const SerChainConfig& cfg, const PrototypeFilter* filter, RngStream& rs)
{
    const int M = cfg.M;
    const int S = cfg.num_symbols;
    const int U = cfg.U;
    std::vector<std::vector<double>> cells = cfg.cell_beta;
    if (cells.empty()) cells.push_back(std::vector<double>(U, 1.0));
    const int T = static_cast<int>(cells.size()) * U;
    std::vector<double> beta;
    for (const auto& row : cells) {
        if (static_cast<int>(row.size()) != U) throw InvalidParameter("measure_ser: cell_beta rows must have U entries");
        beta.insert(beta.end(), row.begin(), row.end());
    }

    RngStream data_rs = rs.substream(1);
    RngStream chan_rs = rs.substream(2);
    RngStream noise_rs = rs.substream(3);
    const TapChannel taps = scale_users(draw_taps(chan_rs, cfg.N, T, cfg.L), beta);

    std::vector<QamGrid> qam(T);
    std::vector<Samples> tx(T);
    const int cp = cfg.cp_len < 0 ? cfg.L : cfg.cp_len;
    for (int t = 0; t < T; ++t) {
        qam[t] = random_qam(M, S, cfg.modulation, cfg.Pd, data_rs);
        Samples s = cfg.kind == ChainKind::kFbmc ? synthesize(qam_to_oqam(qam[t]), *filter) : ofdm_modulate(qam[t], cp);
        tx[t] = cfg.cfo != 0.0 ? apply_cfo(s, cfg.cfo, M) : std::move(s);
    }
    const std::vector<Samples> rx = propagate(tx, taps, cfg.noise_var, noise_rs);

    // Demodulate every antenna, then remove the known per-symbol CFO phase.
    const int cols = cfg.kind == ChainKind::kFbmc ? 2 * S : S;
    std::vector<DemodGrid> per_ant(cfg.N);
    for (int n = 0; n < cfg.N; ++n) {
        per_ant[n] = cfg.kind == ChainKind::kFbmc ? analyze(rx[n], *filter, cols) : ofdm_demodulate(rx[n], M, S, cp);
    }
    std::vector<cplx> derot(cols, cplx{1.0, 0.0});
    if (cfg.cfo != 0.0) {
        for (int k = 0; k < cols; ++k) {
            const double centre = cfg.kind == ChainKind::kFbmc
                                      ? k * (M / 2.0) + filter->delay()
                                      : static_cast<double>(k) * (M + cp) + cp + 0.5 * (M - 1);
            derot[k] = std::polar(1.0, -2.0 * kPi * cfg.cfo * centre / M);
        }
    }

    ChainTrialResult res;
    std::vector<Grid<double>> dhat_oqam;
    std::vector<QamGrid> chat;
    if (cfg.kind == ChainKind::kFbmc) dhat_oqam.assign(U, OqamGrid(M, cols));
    else chat.assign(U, QamGrid(M, cols));
    const std::vector<double> ones(T, 1.0);
    for (int m = 0; m < M; ++m) {
        const CMat G = cfr_at(taps, m, M, ones).leftCols(U);
        const Combiner comb = build_combiner(cfg.receiver, G, cfg.noise_var, cfg.Pd);
        CMat Y(cfg.N, cols);
        for (int n = 0; n < cfg.N; ++n)
            for (int k = 0; k < cols; ++k) Y(n, k) = per_ant[n](m, k) * derot[k];
        const CMat Z = comb.A.adjoint() * Y;  // U x cols
        for (int u = 0; u < U; ++u)
            for (int k = 0; k < cols; ++k) {
                if (cfg.kind == ChainKind::kFbmc) dhat_oqam[u](m, k) = Z(u, k).real();
                else chat[u](m, k) = Z(u, k);
            }
    }
    for (int u = 0; u < U; ++u) {
        const QamGrid est = cfg.kind == ChainKind::kFbmc ? reconstruct_qam(dhat_oqam[u]) : chat[u];
        res.errors += count_errors(qam[u], est, cfg.modulation, cfg.Pd);
        res.symbols += qam[u].data.size();
    }
    return res;
}

}  // namespace

SerResult measure_ser(const SerChainConfig& cfg, int trials, const RngStream& stream, int threads)
{
    if (trials < 1) throw InvalidParameter("measure_ser: trials must be >= 1");
    if (cfg.kind == ChainKind::kAwgn && (cfg.N != 1 || cfg.U != 1)) {
        throw InvalidParameter("measure_ser: the AWGN chain requires N = U = 1");
    }
    if (cfg.kind != ChainKind::kAwgn && cfg.receiver == Receiver::kZf && cfg.N < cfg.U) {
        throw InvalidParameter("measure_ser: ZF requires N >= U");
    }
    PrototypeFilter filter;
    if (cfg.kind == ChainKind::kFbmc) filter = build_iota(cfg.M, cfg.overlap);
    std::vector<ChainTrialResult> out(trials);
    parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
        RngStream rs = stream.substream(t);
        out[t] = cfg.kind == ChainKind::kAwgn ? awgn_trial(cfg, rs) : waveform_trial(cfg, &filter, rs);
    });
    std::uint64_t e = 0, n = 0;
    for (const auto& r : out) {
        e += r.errors;
        n += r.symbols;
    }
    return wilson(e, n);
}

}  // namespace fbmc
