#ifndef FBMC_CHANNEL_HPP
#define FBMC_CHANNEL_HPP

/**
 * @file channel.hpp
 * @brief Random multipath channels, per-subcarrier frequency responses,
 *        single- and multi-cell large-scale fading, time-domain propagation
 *        and the per-subcarrier analytic receive model.
 */

#include "fbmc/core.hpp"

#include <array>
#include <string>
#include <vector>

namespace fbmc {

/** @brief Tap gains g[n][u][l] for N antennas, U users and L taps. */
struct TapChannel {
    int N = 0;
    int U = 0;
    int L = 0;
    std::vector<cplx> taps;  ///< index ((n * U) + u) * L + l

    cplx& operator()(int n, int u, int l) { return taps[(static_cast<std::size_t>(n) * U + u) * L + l]; }
    const cplx& operator()(int n, int u, int l) const
    {
        return taps[(static_cast<std::size_t>(n) * U + u) * L + l];
    }
};

/** @brief i.i.d. CN(0, 1/L) taps so every frequency-response entry is CN(0, 1). @throws InvalidParameter if L < 1. */
TapChannel draw_taps(RngStream& stream, int N, int U, int L);

/** @brief Copy of the taps with user u's taps scaled by sqrt(beta[u]). */
TapChannel scale_users(const TapChannel& taps, const std::vector<double>& beta);

/**
 * @brief Frequency response at subcarrier m: G = H_m D^{1/2},
 *        H_m(n,u) = sum_l g[n][u][l] exp(-j 2 pi m l / M).
 * @throws InvalidParameter for negative beta or a size mismatch.
 */
CMat cfr_at(const TapChannel& taps, int m, int M, const std::vector<double>& beta);

/** @brief Frequency responses for all M subcarriers. */
std::vector<CMat> cfr(const TapChannel& taps, int M, const std::vector<double>& beta);

/** @brief Cell layout and propagation constants of the multi-cell scene. */
struct MultiCellGeometry {
    int num_cells = 7;            ///< central cell plus a hexagonal ring
    double radius = 1000.0;       ///< cell radius r (m)
    double inner_radius = 100.0;  ///< exclusion radius r_h (m)
    double pathloss_exp = 3.8;    ///< nu
    double shadow_db = 8.0;       ///< log-normal shadowing standard deviation sigma_z (dB)

    /** @brief Distance between neighbouring base stations (hexagonal tessellation). */
    double bs_spacing() const;
};

/**
 * @brief Multi-cell realization: base-station and user positions and the
 *        large-scale tensor beta^u_{n,i} (BS n, user u of cell i), with
 *        beta^u_{n,n} = 1.
 */
struct MultiCellScene {
    MultiCellGeometry geometry;
    int U = 0;
    std::vector<std::array<double, 2>> bs;                  ///< base-station positions
    std::vector<std::vector<std::array<double, 2>>> users;  ///< users[i][u] position
    std::vector<double> beta_values;                        ///< index ((n * Nc) + i) * U + u

    int num_cells() const { return geometry.num_cells; }
    double beta(int n, int i, int u) const
    {
        return beta_values[(static_cast<std::size_t>(n) * geometry.num_cells + i) * U + u];
    }
    double& beta(int n, int i, int u)
    {
        return beta_values[(static_cast<std::size_t>(n) * geometry.num_cells + i) * U + u];
    }

    /** @brief Column of large-scale gains seen at BS n from the users of cell i. */
    std::vector<double> beta_row(int n, int i) const;

    /** @brief gamma^u = sum_{i != n} beta^u_{n,i} + 1 at BS n. */
    std::vector<double> gamma(int n) const;
};

/** @brief Large-scale gain z / (d / r_h)^nu for a given shadowing value in dB. */
double path_gain(double distance, double shadow_db_value, const MultiCellGeometry& geometry);

/** @brief Base-station positions: the centre plus a ring at bs_spacing(). */
std::vector<std::array<double, 2>> hex_bs_positions(const MultiCellGeometry& geometry);

/**
 * @brief Draw a multi-cell scene: users uniform in the annulus [r_h, r] around
 *        their home BS, independent log-normal shadowing per (BS, cell, user).
 * @throws InvalidParameter for r <= r_h or r_h <= 0 or a non-positive cell count.
 */
MultiCellScene gen_multicell(RngStream& stream, int U, const MultiCellGeometry& geometry = {});

/** @brief Deterministic scene with beta^u_{n,i} = cross for every i != n (positions left empty). */
MultiCellScene uniform_multicell(int num_cells, int U, double cross);

/** @brief Serialize positions and the beta tensor to a JSON text file. @throws IoError. */
void write_scene(const MultiCellScene& scene, const std::string& path);

/**
 * @brief Time-domain propagation y^n = sum_u s^u * g^{n,u} + eta^n with
 *        eta i.i.d. CN(0, noise_variance); output length = input length + L - 1.
 *        A zero noise variance produces a noiseless output.
 * @throws InvalidParameter if user sequences differ in length or count.
 */
std::vector<Samples> propagate(const std::vector<Samples>& user_signals, const TapChannel& taps,
                               double noise_variance, RngStream& stream);

/**
 * @brief Analytic per-subcarrier receive model y = G b + eta, eta ~ CN(0, noise_variance I).
 * @throws InvalidParameter on a dimension mismatch.
 */
CVec fd_receive(const CMat& G, const CVec& b, double noise_variance, RngStream& stream);

}  // namespace fbmc

#endif  // FBMC_CHANNEL_HPP
