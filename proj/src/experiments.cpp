#include "fbmc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace fbmc {

namespace {

// Stream identifiers outside the per-trial range [0, trials).
constexpr std::uint64_t kPilotStream = 0x70110700ULL;
constexpr std::uint64_t kSerStreamBase = 0x5e700000ULL;

// Sub-stream tags inside one trial.
constexpr std::uint64_t kTagScene = 1;
constexpr std::uint64_t kTagChannel = 2;
constexpr std::uint64_t kTagEstimation = 3;
constexpr std::uint64_t kTagNoise = 4;
constexpr std::uint64_t kTagPilots = 5;
constexpr std::uint64_t kTagData = 6;

int next_pow2(int x)
{
    int k = 1;
    while (k < x) k *= 2;
    return k;
}

/** @brief Copy of the scenario with the sweep variable set to `value`. */
Scenario at_point(const Scenario& s, double value)
{
    Scenario p = s;
    const std::string& v = s.sweep_var;
    if (v == "N") {
        p.N = static_cast<int>(std::lround(value));
    } else if (v == "power_db") {
        p.power_db = value;
    } else if (v == "U") {
        p.U = static_cast<int>(std::lround(value));
        p.beta.resize(p.U);
        for (int u = 0; u < p.U; ++u) p.beta[u] = s.beta[u % s.beta.size()];
        p.K = next_pow2(p.U);
    } else if (v == "L") {
        p.L = static_cast<int>(std::lround(value));
    } else if (v == "cfo") {
        p.cfo = value;
    } else {
        throw InvalidParameter("scenario field 'sweep.var': '" + v + "' is not supported");
    }
    if (p.N < 1 || p.U < 1 || p.L < 1) throw InvalidParameter("sweep value " + std::to_string(value) + " is out of range");
    return p;
}

LinkParams link_params(const Scenario& s)
{
    LinkParams p;
    p.N = s.N;
    p.U = s.U;
    p.K = s.K;
    p.M = s.M;
    p.Pd = s.Pd();
    p.noise_var = s.noise_var();
    p.T0 = s.T0;
    p.beta = s.cells == CellScenario::kSingle ? s.beta : std::vector<double>(s.U, 1.0);
    return p;
}

MultiCellScene draw_scene(const Scenario& s, RngStream& rs)
{
    if (s.cross_beta >= 0.0) return uniform_multicell(s.geometry.num_cells, s.U, s.cross_beta);
    return gen_multicell(rs, s.U, s.geometry);
}

/** @brief Interfering-cell gains at BS 0, [i - 1][u] for cells i = 1 .. Nc - 1. */
std::vector<std::vector<double>> cross_rows(const MultiCellScene& scene)
{
    std::vector<std::vector<double>> rows;
    for (int i = 1; i < scene.num_cells(); ++i) rows.push_back(scene.beta_row(0, i));
    return rows;
}

void check_dof(const Scenario& s)
{
    for (Receiver r : s.receivers) {
        if (r == Receiver::kZf && s.N <= s.U) {
            throw InvalidParameter("ZF needs N > U (N=" + std::to_string(s.N) + ", U=" + std::to_string(s.U) + ")");
        }
        if (r == Receiver::kMrc && s.N < 2) throw InvalidParameter("MRC needs N >= 2");
    }
}

std::size_t slot(std::size_t r, std::size_t c, std::size_t nc) { return r * nc + c; }

struct PrototypeCache {
    std::map<std::pair<int, int>, std::pair<PrototypeFilter, XiTable>> entries;
    const std::pair<PrototypeFilter, XiTable>& get(int M, int overlap)
    {
        auto it = entries.find({M, overlap});
        if (it == entries.end()) {
            PrototypeFilter f = build_iota(M, overlap);
            XiTable xi = xi_table(f);
            it = entries.emplace(std::make_pair(M, overlap), std::make_pair(std::move(f), std::move(xi))).first;
        }
        return it->second;
    }
};

std::optional<double> lb_sum(const BoundSpec& spec, const LinkParams& p, Csi csi)
{
    if (spec.receiver == Receiver::kMmse) return std::nullopt;
    std::vector<double> r(p.U);
    for (int u = 0; u < p.U; ++u) r[u] = lb_rate(spec, p, u);
    return sum_rate(r, csi, p);
}

std::optional<double> asymptote_sum(const BoundSpec& spec, const LinkParams& p)
{
    if (spec.scaling == Scaling::kNone) return std::nullopt;
    double s = 0.0;
    try {
        for (int u = 0; u < p.U; ++u) s += asymptote(spec, p, u);
    } catch (const InvalidParameter&) {
        return std::nullopt;  // no stated limit for this combination
    }
    return overhead_factor(spec.csi, p) * s;
}

std::vector<ResultRow> run_analytic_point(const Scenario& s, double x, PrototypeCache& cache)
{
    check_dof(s);
    const LinkParams base = link_params(s);
    const double E = db_to_linear(s.E_db);
    const LinkParams p0 = apply_scaling(base, s.scaling, E);
    const auto& proto = cache.get(s.M, s.overlap);
    RngStream pilot_rs(s.seed, kPilotStream);
    const PilotSet pilots = build_pilots(s.K, s.U, s.M, p0.Pd, pilot_rs, proto.second);
    const CMat B = pilots.vtm.B(s.subcarrier < 0 ? s.M / 4 : s.subcarrier);
    const bool multi = s.cells == CellScenario::kMulti;

    const std::size_t nr = s.receivers.size(), nc = s.csi.size();
    std::vector<std::vector<double>> rates(static_cast<std::size_t>(s.trials), std::vector<double>(nr * nc));
    std::vector<std::vector<double>> lbs(static_cast<std::size_t>(s.trials), std::vector<double>(nr * nc, 0.0));
    parallel_for(static_cast<std::size_t>(s.trials), s.threads, [&](std::size_t t) {
        const RngStream trial(s.seed, t);
        RngStream rs_scene = trial.substream(kTagScene);
        RngStream rs_ch = trial.substream(kTagChannel);
        RngStream rs_est = trial.substream(kTagEstimation);
        LinkParams p = p0;
        ChannelDraw draw;
        if (!multi) {
            draw.G = rand_cn_mat(rs_ch, s.N, s.U, 1.0);
            for (int u = 0; u < s.U; ++u) draw.G.col(u) *= std::sqrt(p.beta[u]);
            const CMat Y = receive_training({draw.G}, B, p.noise_var, rs_est);
            draw.G_hat = lmmse_single(Y, B, p.beta, p.noise_var).G_hat;
        } else {
            const MultiCellScene scene = draw_scene(s, rs_scene);
            p.cross_beta = cross_rows(scene);
            std::vector<CMat> cells;
            for (int i = 0; i < scene.num_cells(); ++i) {
                CMat Gi = rand_cn_mat(rs_ch, s.N, s.U, 1.0);
                for (int u = 0; u < s.U; ++u) Gi.col(u) *= std::sqrt(scene.beta(0, i, u));
                cells.push_back(std::move(Gi));
            }
            const CMat Y = receive_training(cells, B, p.noise_var, rs_est);
            draw.G_hat = lmmse_multicell(Y, B, scene, 0, p.noise_var).G_hat;
            draw.G = cells[0];
            draw.cross.assign(cells.begin() + 1, cells.end());
        }
        for (std::size_t r = 0; r < nr; ++r) {
            for (std::size_t c = 0; c < nc; ++c) {
                const BoundSpec spec{s.receivers[r], s.csi[c], Scaling::kNone, 1.0};
                const auto sinr = sinr_exact(spec, p, draw);
                std::vector<double> ur(sinr.size());
                for (std::size_t u = 0; u < sinr.size(); ++u) ur[u] = std::log2(1.0 + sinr[u]);
                rates[t][slot(r, c, nc)] = sum_rate(ur, s.csi[c], p);
                if (multi && s.receivers[r] != Receiver::kMmse) lbs[t][slot(r, c, nc)] = *lb_sum(spec, p, s.csi[c]);
            }
        }
    });

    std::vector<ResultRow> rows;
    for (std::size_t r = 0; r < nr; ++r) {
        for (std::size_t c = 0; c < nc; ++c) {
            std::vector<double> v(rates.size());
            for (std::size_t t = 0; t < rates.size(); ++t) v[t] = rates[t][slot(r, c, nc)];
            const MeanCi mc = mean_ci(v);
            ResultRow row;
            row.sweep_var = s.sweep_var;
            row.sweep_value = x;
            row.receiver = to_string(s.receivers[r]);
            row.csi = to_string(s.csi[c]);
            row.rate_sim = mc.mean;
            row.rate_ci95 = mc.ci95;
            const BoundSpec spec{s.receivers[r], s.csi[c], Scaling::kNone, 1.0};
            if (s.receivers[r] != Receiver::kMmse) {
                if (multi) {
                    double acc = 0.0;
                    for (const auto& l : lbs) acc += l[slot(r, c, nc)];
                    row.rate_lb = acc / static_cast<double>(lbs.size());
                } else {
                    row.rate_lb = lb_sum(spec, p0, s.csi[c]);
                }
            }
            LinkParams pa = base;
            if (multi) pa.cross_beta.assign(static_cast<std::size_t>(s.geometry.num_cells - 1), std::vector<double>(s.U, 0.0));
            row.asymptote = asymptote_sum({s.receivers[r], s.csi[c], s.scaling, E}, pa);
            row.mode = to_string(Mode::kAnalytic);
            row.seed = s.seed;
            rows.push_back(row);
        }
    }
    return rows;
}

/** @brief Sample variance with the (n - 1) denominator. */
double residual_stats(const std::vector<double>& est, const std::vector<double>& truth, double Pd, double& coef)
{
    const std::size_t n = est.size();
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) c += est[i] * truth[i];
    coef = c / (static_cast<double>(n) * Pd);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = est[i] - coef * truth[i];
        v += e * e;
    }
    return v / static_cast<double>(n - 1);
}

std::vector<ResultRow> run_waveform_point(const Scenario& s, double x, PrototypeCache& cache)
{
    check_dof(s);
    const auto& proto = cache.get(s.M, s.overlap);
    const std::size_t nr = s.receivers.size(), nc = s.csi.size();
    std::vector<WaveformTrialRates> per(static_cast<std::size_t>(s.trials));
    parallel_for(per.size(), s.threads, [&](std::size_t t) {
        per[t] = waveform_rate_trial(s, proto.first, proto.second, RngStream(s.seed, t));
    });
    const LinkParams p = link_params(s);
    std::vector<ResultRow> rows;
    for (std::size_t r = 0; r < nr; ++r) {
        for (std::size_t c = 0; c < nc; ++c) {
            std::vector<double> v(per.size());
            for (std::size_t t = 0; t < per.size(); ++t) v[t] = per[t].sum_rate[r][c];
            const MeanCi mc = mean_ci(v);
            ResultRow row;
            row.sweep_var = s.sweep_var;
            row.sweep_value = x;
            row.receiver = to_string(s.receivers[r]);
            row.csi = to_string(s.csi[c]);
            row.rate_sim = mc.mean;
            row.rate_ci95 = mc.ci95;
            if (s.cells == CellScenario::kSingle && s.receivers[r] != Receiver::kMmse) {
                row.rate_lb = lb_sum({s.receivers[r], s.csi[c], Scaling::kNone, 1.0}, p, s.csi[c]);
            }
            row.mode = to_string(Mode::kWaveform);
            row.seed = s.seed;
            rows.push_back(row);
        }
    }
    return rows;
}

std::string chain_label(ChainKind k)
{
    switch (k) {
    case ChainKind::kAwgn: return "ser-awgn";
    case ChainKind::kFbmc: return "ser-fbmc";
    case ChainKind::kOfdm: return "ser-ofdm";
    }
    return "ser";
}

std::vector<ResultRow> run_ser_point(const Scenario& s, double x)
{
    std::vector<ResultRow> rows;
    for (ChainKind kind : s.chains) {
        SerChainConfig cfg;
        cfg.kind = kind;
        cfg.modulation = s.modulation;
        cfg.N = kind == ChainKind::kAwgn ? 1 : s.N;
        cfg.U = kind == ChainKind::kAwgn ? 1 : s.U;
        cfg.L = s.L;
        cfg.M = s.M;
        cfg.overlap = s.overlap;
        cfg.num_symbols = s.ser_symbols;
        cfg.Pd = s.Pd();
        cfg.noise_var = s.noise_var();
        cfg.cfo = s.cfo;
        cfg.receiver = s.receivers.front();
        if (kind == ChainKind::kAwgn) {
            cfg.cell_beta = {{1.0}};
        } else {
            cfg.cell_beta = {s.beta};
            if (s.cells == CellScenario::kMulti) {
                for (int i = 1; i < s.geometry.num_cells; ++i) cfg.cell_beta.emplace_back(s.U, s.cross_beta);
            }
        }
        const RngStream stream(s.seed, kSerStreamBase + static_cast<std::uint64_t>(kind));
        const SerResult res = measure_ser(cfg, s.trials, stream, s.threads);
        ResultRow row;
        row.sweep_var = s.sweep_var;
        row.sweep_value = x;
        row.receiver = to_string(cfg.receiver);
        row.csi = to_string(Csi::kPerfect);
        row.rate_sim = res.ser;
        row.rate_ci95 = res.half_width();
        row.mode = chain_label(kind);
        row.seed = s.seed;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

WaveformTrialRates waveform_rate_trial(const Scenario& s, const PrototypeFilter& filter, const XiTable& xi,
                                       RngStream stream)
{
    if (filter.M != s.M || xi.M != s.M) throw InvalidParameter("waveform_rate_trial: filter built for a different M");
    RngStream rs_scene = stream.substream(kTagScene);
    RngStream rs_data = stream.substream(kTagData);
    RngStream rs_ch = stream.substream(kTagChannel);
    RngStream rs_noise = stream.substream(kTagNoise);
    RngStream rs_pilot = stream.substream(kTagPilots);

    const int M = s.M, U = s.U, N = s.N, L = s.L;
    const double Pd = s.Pd();
    const double s2 = s.noise_var();
    const bool multi = s.cells == CellScenario::kMulti;
    const MultiCellScene scene = multi ? draw_scene(s, rs_scene) : MultiCellScene{};
    const int Nc = multi ? scene.num_cells() : 1;
    std::vector<std::vector<double>> beta(Nc);
    for (int i = 0; i < Nc; ++i) beta[i] = multi ? scene.beta_row(0, i) : s.beta;

    const PilotSet pilots = build_pilots(s.K, U, M, Pd, rs_pilot, xi);
    const int Kt = pilots.frame.training_length();
    const int Kd = s.data_half_symbols;
    const int Ktot = Kt + Kd;

    // Transmit: every cell sends the same training section, then independent data.
    std::vector<Samples> tx;
    std::vector<OqamGrid> data0(U);
    for (int i = 0; i < Nc; ++i) {
        for (int u = 0; u < U; ++u) {
            OqamGrid d = random_oqam(M, Kd, Pd, rs_data);
            if (i == 0) data0[u] = d;
            tx.push_back(synthesize(pilots.frame.user_grid(u, d), filter));
        }
    }
    // One tap set covering all cells' users, scaled by the gains seen at BS 0.
    TapChannel taps = draw_taps(rs_ch, N, U * Nc, L);
    std::vector<double> all_beta;
    for (const auto& b : beta) all_beta.insert(all_beta.end(), b.begin(), b.end());
    taps = scale_users(taps, all_beta);
    const std::vector<Samples> rx = propagate(tx, taps, s2, rs_noise);

    std::vector<DemodGrid> demod(N);
    for (int n = 0; n < N; ++n) demod[n] = analyze(rx[n], filter, Ktot);

    // Served-cell taps for the perfect-CSI reference.
    TapChannel served;
    served.N = N;
    served.U = U;
    served.L = L;
    served.taps.resize(static_cast<std::size_t>(N) * U * L);
    for (int n = 0; n < N; ++n)
        for (int u = 0; u < U; ++u)
            for (int l = 0; l < L; ++l) served(n, u, l) = taps(n, u, l);

    const std::size_t nr = s.receivers.size(), nc = s.csi.size();
    // rate_acc[r][c][u] accumulates log2(1 + SINR) over subcarriers.
    std::vector<std::vector<std::vector<double>>> rate_acc(nr, std::vector<std::vector<double>>(nc, std::vector<double>(U, 0.0)));
    std::vector<double> unit(U, 1.0);
    for (int m = 0; m < M; ++m) {
        const CMat B = pilots.vtm.B(m);
        CMat Y(N, s.K);
        for (int n = 0; n < N; ++n)
            for (int i = 0; i < s.K; ++i) Y(n, i) = demod[n](m, pilots.frame.pilot_position(i));
        const EstimateBundle est = multi ? lmmse_multicell(Y, B, scene, 0, s2) : lmmse_single(Y, B, s.beta, s2);
        double err_sum = 0.0;
        for (double e : est.err_var) err_sum += e;
        CMat G_true = cfr_at(served, m, M, unit);

        CMat Yd(N, Kd);
        for (int n = 0; n < N; ++n)
            for (int k = 0; k < Kd; ++k) Yd(n, k) = demod[n](m, Kt + k);

        for (std::size_t c = 0; c < nc; ++c) {
            const bool perfect = s.csi[c] == Csi::kPerfect;
            const CMat& Gc = perfect ? G_true : est.G_hat;
            for (std::size_t r = 0; r < nr; ++r) {
                const Combiner comb = build_combiner(s.receivers[r], Gc, s2, Pd, perfect ? 0.0 : err_sum);
                const RMat D = (comb.A.adjoint() * Yd).real();
                for (int u = 0; u < U; ++u) {
                    std::vector<double> e(Kd), d(Kd);
                    for (int k = 0; k < Kd; ++k) {
                        e[k] = D(u, k);
                        d[k] = data0[u](m, k);
                    }
                    double coef = 0.0;
                    const double var = residual_stats(e, d, Pd, coef);
                    const double sinr = var > 0.0 ? Pd * coef * coef / var : 0.0;
                    rate_acc[r][c][u] += std::log2(1.0 + sinr);
                }
            }
        }
    }
    LinkParams p = link_params(s);
    WaveformTrialRates out;
    out.sum_rate.assign(nr, std::vector<double>(nc, 0.0));
    for (std::size_t r = 0; r < nr; ++r) {
        for (std::size_t c = 0; c < nc; ++c) {
            std::vector<double> ur(U);
            for (int u = 0; u < U; ++u) ur[u] = rate_acc[r][c][u] / M;
            out.sum_rate[r][c] = sum_rate(ur, s.csi[c], p);
        }
    }
    return out;
}

std::vector<ResultRow> run_scenario(const Scenario& s)
{
    s.validate();
    if (!s.series_var.empty()) {
        throw InvalidParameter("run_scenario: expand the series first (expand_series)");
    }
    PrototypeCache cache;
    std::vector<ResultRow> rows;
    for (double x : s.sweep_values) {
        const Scenario p = at_point(s, x);
        std::vector<ResultRow> part;
        switch (s.mode) {
        case Mode::kAnalytic: part = run_analytic_point(p, x, cache); break;
        case Mode::kWaveform: part = run_waveform_point(p, x, cache); break;
        case Mode::kSer: part = run_ser_point(p, x); break;
        }
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

}  // namespace fbmc
