#ifndef FBMC_ANALYSIS_HPP
#define FBMC_ANALYSIS_HPP

/**
 * @file analysis.hpp
 * @brief Closed-form SINR expressions, achievable-rate lower bounds, power-
 *        scaling limits, multi-cell contamination aggregates and sum-rate
 *        bookkeeping for the FBMC massive MIMO uplink.
 *
 * All powers are linear. P_d is the OQAM (half-symbol) power, so a QAM symbol
 * carries 2 P_d, and P_p = 2 P_d K is the pilot energy per user.
 *
 * Multi-cell quantities are always seen from the serving base station n: the
 * served users have unit large-scale gain and cross_beta[i][u] holds the gain
 * of user u of the i-th interfering cell (the serving cell is not listed).
 */

#include "fbmc/core.hpp"
#include "fbmc/detection.hpp"
#include "fbmc/estimation.hpp"

#include <string>
#include <vector>

namespace fbmc {

enum class CellScenario { kSingle, kMulti };
enum class Scaling { kNone, kInvSqrtN, kInvN };

std::string to_string(CellScenario s);
std::string to_string(Scaling s);
CellScenario parse_cell_scenario(const std::string& s);
Scaling parse_scaling(const std::string& s);

/** @brief Link-level parameters shared by every closed form. */
struct LinkParams {
    int N = 128;                ///< base-station antennas
    int U = 8;                  ///< users per cell
    int K = 8;                  ///< training half-symbols (K >= U)
    int M = 128;                ///< subcarriers
    double Pd = 0.5;            ///< OQAM symbol power P_d
    double noise_var = 1.0;     ///< sigma^2
    int T0 = 196;               ///< coherence interval in symbols
    std::vector<double> beta;   ///< single-cell large-scale gains (size U)
    std::vector<std::vector<double>> cross_beta;  ///< multi-cell: [interfering cell][user]

    CellScenario scenario() const { return cross_beta.empty() ? CellScenario::kSingle : CellScenario::kMulti; }
    double Pp() const { return 2.0 * Pd * K; }

    /** @throws InvalidParameter on inconsistent sizes, non-positive powers, K < U or T0 <= K. */
    void validate() const;
};

/** @brief Selects one closed form. E is the reference power E^u used by a scaling schedule. */
struct BoundSpec {
    Receiver receiver = Receiver::kMrc;
    Csi csi = Csi::kPerfect;
    Scaling scaling = Scaling::kNone;
    double E = 1.0;
};

/**
 * @brief Copy of p with 2 P_d = E / sqrt(N) (kInvSqrtN) or E / N (kInvN);
 *        unchanged for kNone.
 */
LinkParams apply_scaling(const LinkParams& p, Scaling scaling, double E);

/** @brief gamma^u = 1 + sum_i cross_beta[i][u] (all ones for a single cell). */
std::vector<double> gamma(const LinkParams& p);

/**
 * @brief Summed estimation-error variance at the serving BS:
 *        mu = sum_{i,j} beta(P_p gamma - P_p beta + s2)/(P_p gamma + s2)
 *           + sum_j (P_p (gamma - 1) + s2)/(P_p gamma + s2).
 */
double mu_n(const LinkParams& p);

/** @brief Per-user error variances of the served users' estimates (single or multi cell). */
std::vector<double> served_error_variance(const LinkParams& p);

/**
 * @brief Achievable-rate lower bound (bits/s/Hz) of user u for the selected
 *        receiver, CSI and cell scenario; a scaling schedule in `spec` is
 *        applied first.
 * @throws InvalidParameter for MMSE (no closed-form bound), N < 2 (MRC),
 *         N <= U (ZF) or an invalid user index.
 */
double lb_rate(const BoundSpec& spec, const LinkParams& p, int u);

/** @brief One channel realization: true served channel, interfering-cell channels, estimate. */
struct ChannelDraw {
    CMat G;                  ///< true N x U channel of the served users
    std::vector<CMat> cross; ///< multi-cell: true channels of the interfering cells' users
    CMat G_hat;              ///< channel estimate of the served users (imperfect CSI)
};

/**
 * @brief Per-user SINR of the displayed closed forms evaluated on one draw.
 *
 * Single cell: MRC/ZF/MMSE with perfect (uses G) or imperfect (uses G_hat and
 * the LMMSE error variances) CSI. Multi-cell perfect CSI: MRC uses the
 * realized interfering channels; ZF uses the form averaged over them
 * (2 P_d sum beta + s2) [(G^H G)^{-1}]_uu. Multi-cell imperfect CSI: MRC is
 * the complete noise-plus-interference variance (see
 * mrc_multicell_variance), ZF the displayed covariance diagonal.
 * @throws InvalidParameter for multi-cell MMSE or inconsistent sizes; NumericError for a singular Gram.
 */
std::vector<double> sinr_closed_form(const BoundSpec& spec, const LinkParams& p, const ChannelDraw& draw);

/**
 * @brief Exact per-draw SINR of the linear receiver with every channel of the
 *        draw held fixed (errors, symbols and noise averaged). Coincides with
 *        sinr_closed_form except for multi-cell ZF: with perfect CSI the
 *        realized interfering channels are used, with imperfect CSI the
 *        contaminated estimates g_hat_{n,i} = beta g_hat_{n,n} give the term
 *        2 P_d sum_i beta_i^2 outside the Gram inverse.
 */
std::vector<double> sinr_exact(const BoundSpec& spec, const LinkParams& p, const ChannelDraw& draw);

/**
 * @brief Variance of the multi-cell imperfect-CSI MRC noise-plus-interference
 *        term of user u given the served estimate G_hat (contaminated
 *        estimates are beta-scaled copies of G_hat).
 */
double mrc_multicell_variance(const LinkParams& p, const CMat& G_hat, int u);

/**
 * @brief SINR of a complex-symbol (CP-OFDM) receiver with combiner A on
 *        estimate G_hat: P |a^H g_u|^2 / (P sum_{j != u} |a^H g_j|^2 +
 *        (P sum_j err_j + s2) ||a||^2), P = 2 P_d the QAM symbol power.
 */
std::vector<double> ofdm_sinr(const CMat& A, const CMat& G_hat, const std::vector<double>& err_var, double P,
                              double noise_var);

/** @brief Per-user Monte Carlo mean with 95% half-width. */
struct UserRates {
    std::vector<MeanCi> users;
};

/**
 * @brief Ergodic MMSE rate E[log2(1 / [(I + c G^H G)^{-1}]_uu)] with c = 2 P_d / s2
 *        (perfect CSI) or c_0 = 1 / (sum_j err_j + s2 / (2 P_d)) on LMMSE
 *        estimates (imperfect CSI). Draw t uses stream.substream(t).
 * @throws InvalidParameter if draws < 100 or for multi-cell parameters.
 */
UserRates mmse_ergodic_rate(Csi csi, const LinkParams& p, int draws, const RngStream& stream, int threads = 1);

/** @brief log2(1 / [(I + c X^H X)^{-1}]_uu) for every user. */
std::vector<double> mmse_log_det_rates(const CMat& X, double c);

/**
 * @brief Large-N limit of user u's rate under the scaling schedule in `spec`.
 * @throws InvalidParameter for kNone or for a combination without a stated
 *         finite limit (e.g. perfect CSI with 2 P_d = E / sqrt(N)).
 */
double asymptote(const BoundSpec& spec, const LinkParams& p, int u);

/** @brief (T0 - K) / T0 for imperfect CSI, 1 for perfect CSI. */
double overhead_factor(Csi csi, const LinkParams& p);

/** @brief overhead_factor * sum of rates. @throws InvalidParameter on a non-finite rate. */
double sum_rate(const std::vector<double>& rates, Csi csi, const LinkParams& p);

}  // namespace fbmc

#endif  // FBMC_ANALYSIS_HPP
