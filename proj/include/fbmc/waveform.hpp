#ifndef FBMC_WAVEFORM_HPP
#define FBMC_WAVEFORM_HPP

/**
 * @file waveform.hpp
 * @brief FBMC-OQAM synthesis/analysis filter banks, the IOTA prototype filter,
 *        OQAM <-> QAM staggering, transmultiplexer response tables, intrinsic
 *        interference, CFO injection and a CP-OFDM baseline.
 *
 * Basis convention. The (m,k) basis function is
 *   chi_{m,k}[l] = p[l - kM/2] * exp(j2pi m (l - D/2) / M) * exp(j phi_{m,k}),
 *   phi_{m,k}    = pi/2 (m + k) - pi m k,
 * with D = L_p - 1 the filter delay. Referencing the modulation to the pulse
 * centre (l - D/2) keeps the transmultiplexer response purely imaginary off
 * the origin; for m = 0 it coincides with the uncentred form.
 */

#include "fbmc/core.hpp"

#include <string>
#include <vector>

namespace fbmc {

/**
 * @brief Time-frequency grid of symbols, column-major in time: entry (m, k)
 *        lives at data[k * M + m].
 */
template <typename T>
struct Grid {
    int M = 0;  ///< number of subcarriers
    int K = 0;  ///< number of (half-)symbols
    std::vector<T> data;

    Grid() = default;
    Grid(int m, int k) : M(m), K(k), data(static_cast<std::size_t>(m) * static_cast<std::size_t>(k), T{}) {}

    T& operator()(int m, int k) { return data[static_cast<std::size_t>(k) * M + m]; }
    const T& operator()(int m, int k) const { return data[static_cast<std::size_t>(k) * M + m]; }
};

using OqamGrid = Grid<double>;  ///< real OQAM symbols d_{m,k}, k = half-symbol index
using QamGrid = Grid<cplx>;     ///< complex QAM symbols c_{m,kbar}, kbar = symbol index
using DemodGrid = Grid<cplx>;   ///< complex matched-filter outputs

/** @brief Sampled symmetric real prototype pulse of length overlap*M. */
struct PrototypeFilter {
    int M = 0;
    int overlap = 0;
    std::vector<double> taps;

    int length() const { return static_cast<int>(taps.size()); }
    double delay() const { return 0.5 * (length() - 1); }  ///< D/2
};

/**
 * @brief Discretized IOTA pulse: the Gaussian 2^{1/4} exp(-pi t^2) orthogonalized
 *        at time spacing T/2 and then at frequency spacing 1/T, sampled at M/T,
 *        truncated to overlap*T and normalized to unit energy.
 * @throws InvalidParameter if M is not a power of two >= 8 or overlap is not 3, 4, 6 or 8.
 */
PrototypeFilter build_iota(int M, int overlap = 4);

/** @brief Write the taps as a single-column text file (one real per line). */
void export_taps(const PrototypeFilter& filter, const std::string& path);

/** @brief Phase term exp(j(phi_{m,k} - pi m D / M)) of the (m,k) basis function. */
cplx basis_phase(const PrototypeFilter& filter, int m, int k);

/** @brief Value chi_{m,k}[l] of a basis function (m may be any integer). */
cplx basis_sample(const PrototypeFilter& filter, int m, int k, long l);

/** @brief Staggering: even m -> (Re at 2kbar, Im at 2kbar+1); odd m -> (Im at 2kbar, Re at 2kbar+1). */
OqamGrid qam_to_oqam(const QamGrid& c);

/** @brief Exact inverse of qam_to_oqam. @throws InvalidParameter on odd half-symbol count. */
QamGrid oqam_to_qam(const OqamGrid& d);

/** @brief Same staggering rule applied to real estimates stored in a complex grid's real part. */
QamGrid oqam_to_qam(const DemodGrid& d_hat);

/**
 * @brief FBMC transmit signal s[l] = sum_{m,k} d_{m,k} chi_{m,k}[l].
 *
 * One inverse FFT per half-symbol followed by pulse weighting; length is
 * (K - 1) M/2 + L_p.
 */
Samples synthesize(const OqamGrid& d, const PrototypeFilter& filter);

/**
 * @brief Matched-filter bank: y_{m,k} = sum_l x[offset + l] conj(chi_{m,k}[l]).
 * @throws InvalidParameter when the sample sequence is too short.
 */
DemodGrid analyze(const Samples& x, const PrototypeFilter& filter, int num_half_symbols,
                  std::size_t offset = 0);

/** @brief Length of synthesize() output for a grid of K half-symbols. */
std::size_t fbmc_signal_length(const PrototypeFilter& filter, int num_half_symbols);

/**
 * @brief Transmultiplexer response xi(dm, dk) = <chi_{mb+dm, kb+dk}, chi_{mb,kb}>
 *        tabulated over |dm|, |dk| <= radius for each parity class of (mb, kb).
 *
 * Indices are "unwrapped": a subcarrier that wraps around the band edge picks
 * up a factor -1 (see coupling()).
 */
struct XiTable {
    int M = 0;
    int radius = 0;
    std::vector<cplx> values;  ///< [parity][(dm+R)*(2R+1) + (dk+R)], parity = 2*(mb&1) + (kb&1)

    /** @brief Tabulated xi for offsets (dm, dk) around a reference of the given parities. */
    cplx at(int dm, int dk, int mb_parity = 0, int kb_parity = 0) const;

    /**
     * @brief Coupling <chi_{m,k}, chi_{mb,kb}> between actual grid positions
     *        (m, mb in [0, M)), including the band-edge wrap sign; zero outside
     *        the tabulated window.
     */
    cplx coupling(int m, int k, int mb, int kb) const;
};

/** @brief Build the xi table by direct summation over the basis functions. @throws InvalidParameter if radius < 1. */
XiTable xi_table(const PrototypeFilter& filter, int radius = 4);

/** @brief Sum of |xi|^2 over the window for one parity class. */
double xi_energy(const XiTable& xi, int parity = 0);

/** @brief Largest |Re xi| over the window excluding the origin (all parity classes). */
double xi_real_residual(const XiTable& xi);

/**
 * @brief Intrinsic interference I = sum_{(m,k) != (mb,kb)} d_{m,k} Im{xi} at (mb, kb);
 *        the frequency axis is cyclic and half-symbols outside the grid are zero.
 */
double intrinsic_interference(const OqamGrid& d, const XiTable& xi, int mb, int kb);

/** @brief Multiply sample l by exp(j 2 pi epsilon l / M). @throws InvalidParameter if |epsilon| > 0.5. */
Samples apply_cfo(const Samples& s, double epsilon, int M);

/** @brief Modulation alphabets; both carry mean symbol energy 2 P_d per QAM symbol. */
enum class Modulation { kBpsk, kQam4 };

/** @brief Random QAM grid, BPSK = ±sqrt(2P_d), 4-QAM = sqrt(P_d)(±1 ±j). */
QamGrid random_qam(int M, int num_symbols, Modulation mod, double Pd, RngStream& stream);

/** @brief Minimum-distance hard decision onto the alphabet. */
cplx qam_decide(cplx c, Modulation mod, double Pd);

/** @brief i.i.d. ±sqrt(P_d) OQAM grid. */
OqamGrid random_oqam(int M, int num_half_symbols, double Pd, RngStream& stream);

/** @brief CP-OFDM modulator: unitary IDFT per symbol, cyclic prefix of cp_len samples. */
Samples ofdm_modulate(const QamGrid& c, int cp_len);

/** @brief CP-OFDM demodulator: strip the prefix, unitary DFT. @throws InvalidParameter on bad sizes. */
QamGrid ofdm_demodulate(const Samples& x, int M, int num_symbols, int cp_len, std::size_t offset = 0);

}  // namespace fbmc

#endif  // FBMC_WAVEFORM_HPP
