#ifndef FBMC_TESTS_ORACLE_HPP
#define FBMC_TESTS_ORACLE_HPP

/**
 * @file oracle.hpp
 * @brief Test-side construction of channel draws and of the matching
 *        sample-level receive model, used to measure SINRs empirically and
 *        compare them with the closed forms on the identical draw.
 */

#include "fbmc/analysis.hpp"
#include "fbmc/detection.hpp"
#include "fbmc/estimation.hpp"

#include <cmath>
#include <vector>

namespace fbmc::oracle {

/** @brief Channel draw plus the estimator output it came from. */
struct Case {
    ChannelDraw draw;
    EstimateBundle est;
};

/** @brief Orthogonal training matrix with B^H B = 2 P_d K I. */
inline CMat training(const LinkParams& p)
{
    const auto signs = sylvester_signs(p.K);
    CMat B(p.K, p.U);
    for (int i = 0; i < p.K; ++i)
        for (int u = 0; u < p.U; ++u) B(i, u) = std::sqrt(2.0 * p.Pd) * static_cast<double>(signs[i][u]);
    return B;
}

/** @brief Scene whose gains at BS 0 are p.cross_beta (cell 0 served with unit gains). */
inline MultiCellScene scene_of(const LinkParams& p)
{
    const int Nc = static_cast<int>(p.cross_beta.size()) + 1;
    MultiCellScene s = uniform_multicell(Nc, p.U, 0.0);
    for (int i = 1; i < Nc; ++i)
        for (int u = 0; u < p.U; ++u) s.beta(0, i, u) = p.cross_beta[i - 1][u];
    return s;
}

/** @brief Draw true channels, run the LMMSE estimator and package the result. */
inline Case draw(const LinkParams& p, RngStream& rs)
{
    Case c;
    const CMat B = training(p);
    if (p.scenario() == CellScenario::kSingle) {
        c.draw.G = rand_cn_mat(rs, p.N, p.U, 1.0);
        for (int u = 0; u < p.U; ++u) c.draw.G.col(u) *= std::sqrt(p.beta[u]);
        c.est = lmmse_single(receive_training({c.draw.G}, B, p.noise_var, rs), B, p.beta, p.noise_var);
    } else {
        const MultiCellScene scene = scene_of(p);
        std::vector<CMat> cells;
        for (int i = 0; i < scene.num_cells(); ++i) {
            CMat Gi = rand_cn_mat(rs, p.N, p.U, 1.0);
            for (int u = 0; u < p.U; ++u) Gi.col(u) *= std::sqrt(scene.beta(0, i, u));
            cells.push_back(Gi);
        }
        c.est = lmmse_multicell(receive_training(cells, B, p.noise_var, rs), B, scene, 0, p.noise_var);
        c.draw.G = cells[0];
        c.draw.cross.assign(cells.begin() + 1, cells.end());
    }
    c.draw.G_hat = c.est.G_hat;
    return c;
}

/**
 * @brief Sample-level model whose empirical SINR is the quantity the closed
 *        form describes: with perfect CSI the channels are known (multi-cell ZF
 *        treats the interfering cells as unknown, averaging over them); with
 *        imperfect CSI the true channels are the estimates plus independent
 *        LMMSE errors, and interfering-cell channels are the contaminated
 *        estimates plus their errors. With `realized` set, multi-cell perfect-CSI
 *        ZF also sees the realized interfering channels.
 */
inline SinrModel model(const BoundSpec& spec, const LinkParams& p, const Case& c, bool realized = false)
{
    SinrModel m;
    m.Pd = p.Pd;
    m.noise_var = p.noise_var;
    const bool perfect = spec.csi == Csi::kPerfect;
    const std::vector<double> zeros(p.U, 0.0);
    m.blocks.push_back({perfect ? c.draw.G : c.draw.G_hat, perfect ? zeros : c.est.err_var});
    for (std::size_t i = 0; i < p.cross_beta.size(); ++i) {
        if (perfect && spec.receiver == Receiver::kZf && !realized) {
            m.blocks.push_back({CMat::Zero(p.N, p.U), p.cross_beta[i]});
        } else if (perfect) {
            m.blocks.push_back({c.draw.cross[i], zeros});
        } else {
            m.blocks.push_back({c.est.cross[i + 1], c.est.cross_err_var[i + 1]});
        }
    }
    return m;
}

/** @brief Combiner the receiver builds from its channel knowledge. */
inline Combiner combiner(const BoundSpec& spec, const LinkParams& p, const Case& c)
{
    const bool perfect = spec.csi == Csi::kPerfect;
    double loading = 0.0;
    if (!perfect)
        for (double e : c.est.err_var) loading += e;
    return build_combiner(spec.receiver, perfect ? c.draw.G : c.draw.G_hat, p.noise_var, p.Pd, loading);
}

/** @brief Empirical per-user SINR over `samples` symbol/noise/error draws with the channel draw fixed. */
inline std::vector<double> empirical_sinr(const BoundSpec& spec, const LinkParams& p, const Case& c,
                                          std::size_t samples, RngStream& rs, bool realized = false)
{
    return measure_sinr(combiner(spec, p, c), model(spec, p, c, realized), samples, rs).sinr;
}

}  // namespace fbmc::oracle

#endif  // FBMC_TESTS_ORACLE_HPP
