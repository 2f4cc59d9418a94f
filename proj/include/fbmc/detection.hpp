#ifndef FBMC_DETECTION_HPP
#define FBMC_DETECTION_HPP

/**
 * @file detection.hpp
 * @brief Linear combiners (MRC / ZF / MMSE), real-part OQAM detection,
 *        empirical SINR measurement with the channel held fixed, and
 *        symbol-error-rate measurement over complete FBMC / CP-OFDM chains.
 */

#include "fbmc/channel.hpp"
#include "fbmc/core.hpp"
#include "fbmc/waveform.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fbmc {

enum class Receiver { kMrc, kZf, kMmse };
enum class Csi { kPerfect, kImperfect };

std::string to_string(Receiver r);
std::string to_string(Csi c);
Receiver parse_receiver(const std::string& s);
Csi parse_csi(const std::string& s);

/** @brief Combining matrix A (N x U) built from a channel or channel estimate. */
struct Combiner {
    Receiver kind = Receiver::kMrc;
    CMat A;
};

/**
 * @brief MRC: A = G; ZF: A = G (G^H G)^{-1}; MMSE: A = (G G^H + lambda I)^{-1} G with
 *        lambda = sigma^2 / (2 P_d) + extra_loading (extra_loading carries the
 *        summed estimation-error variance for imperfect CSI). MMSE is evaluated
 *        as G (G^H G + lambda I)^{-1}, which is the same matrix.
 * @throws InvalidParameter if N < U for ZF; NumericError for a rank-deficient Gram matrix.
 */
Combiner build_combiner(Receiver kind, const CMat& G, double noise_var, double Pd, double extra_loading = 0.0);

/** @brief Real-part detection d_hat = Re{A^H y}. */
RVec combine(const Combiner& combiner, const CVec& y);

/** @brief Apply the OQAM -> QAM staggering to a grid of real estimates. */
QamGrid reconstruct_qam(const OqamGrid& d_hat);

/**
 * @brief One group of transmitters seen by the receiver: true channel
 *        = mean + E with independent columns E_{:,j} ~ CN(0, err_var[j] I).
 */
struct ChannelBlock {
    CMat mean;
    std::vector<double> err_var;
};

/**
 * @brief Per-sample receive model y = sum_b (mean_b + E_b) x_b + eta. Block 0
 *        holds the users being detected; every transmitted virtual symbol is
 *        x = d + jI with d = ±sqrt(P_d) and I ~ N(0, P_d).
 */
struct SinrModel {
    std::vector<ChannelBlock> blocks;
    double Pd = 0.0;
    double noise_var = 0.0;
};

/** @brief Per-user empirical decomposition of the combiner output. */
struct DetectionStats {
    std::vector<double> signal;               ///< P_d * coef^2
    std::vector<double> interference_noise;   ///< empirical Var[v]
    std::vector<double> sinr;                 ///< signal / interference_noise (0 when unbounded)
    std::vector<bool> unbounded;              ///< interference_noise is zero to working precision
    std::vector<double> coef;                 ///< Re{a_u^H mean_{0,u}}
    std::size_t samples = 0;
};

/**
 * @brief Empirical SINR with the channel estimate fixed: draws symbols, noise
 *        and channel-estimation errors, forms d_hat = Re{A^H y} and splits it
 *        into coef * d plus a residual v. Error and noise terms are drawn in
 *        the U-dimensional combiner output space (A^H E_j ~ CN(0, err A^H A)),
 *        which has exactly the distribution of the N-dimensional draw.
 */
DetectionStats measure_sinr(const Combiner& combiner, const SinrModel& model, std::size_t samples,
                            RngStream& stream);

/** @brief Same estimator with explicit N-dimensional error/noise draws (reference path, slower). */
DetectionStats measure_sinr_explicit(const Combiner& combiner, const SinrModel& model, std::size_t samples,
                                     RngStream& stream);

enum class ChainKind { kAwgn, kFbmc, kOfdm };

/** @brief Configuration of an SER chain. */
struct SerChainConfig {
    ChainKind kind = ChainKind::kFbmc;
    Modulation modulation = Modulation::kBpsk;
    int N = 64;
    int U = 8;
    int L = 2;
    int M = 128;
    int overlap = 4;
    int num_symbols = 16;        ///< QAM symbols per frame and subcarrier
    int cp_len = -1;             ///< OFDM prefix; -1 selects L
    double Pd = 0.5;
    double noise_var = 1.0;
    double cfo = 0.0;            ///< normalized to the subcarrier spacing
    Receiver receiver = Receiver::kZf;
    /// cell_beta[i][u]: large-scale gain at the serving BS of user u in cell i (cell 0 is served).
    std::vector<std::vector<double>> cell_beta;
};

/** @brief Error count with a 95% Wilson score interval. */
struct SerResult {
    std::uint64_t errors = 0;
    std::uint64_t symbols = 0;
    double ser = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double half_width() const { return 0.5 * (hi - lo); }
};

/** @brief 95% Wilson score interval for errors / symbols. */
SerResult wilson(std::uint64_t errors, std::uint64_t symbols);

/**
 * @brief Hard-decision QAM symbol error rate of the served users.
 *
 * kAwgn: y = c + eta per symbol (N = U = 1, unit channel).
 * kFbmc / kOfdm: full time-domain chain with L-tap channels, CFO applied to
 * every received sample, perfect knowledge of G_m and of the per-symbol CFO
 * common phase, and the configured linear combiner. Trials use independent
 * sub-streams of `stream`, so results do not depend on `threads`.
 */
SerResult measure_ser(const SerChainConfig& config, int trials, const RngStream& stream, int threads = 1);

}  // namespace fbmc

#endif  // FBMC_DETECTION_HPP
