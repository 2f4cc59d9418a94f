#ifndef FBMC_ESTIMATION_HPP
#define FBMC_ESTIMATION_HPP

/**
 * @file estimation.hpp
 * @brief Training-frame construction with guard half-symbols, orthogonal
 *        virtual training matrices and LMMSE channel estimation for single-
 *        and multi-cell (pilot-contaminated) uplinks.
 */

#include "fbmc/channel.hpp"
#include "fbmc/core.hpp"
#include "fbmc/waveform.hpp"

#include <vector>

namespace fbmc {

/**
 * @brief Base pilot sequence d_m shared by all users before sign precoding.
 *
 * kAlternating: d_m = a for even m and b for odd m (a, b = ±sqrt(2 P_d), random
 * per frame). Mirror-symmetric neighbours cancel in the intrinsic interference,
 * so the virtual pilot equals d_m on every interior subcarrier and carries
 * power exactly 2 P_d, and leakage from neighbouring training half-symbols
 * also cancels.
 *
 * kRandom: i.i.d. ±sqrt(P_d) OQAM values per subcarrier; the virtual pilot
 * d + jI then fluctuates in power from subcarrier to subcarrier.
 */
enum class PilotBase { kAlternating, kRandom };

/** @brief Sylvester-Hadamard ±1 matrix of order K (K a power of two). */
std::vector<std::vector<int>> sylvester_signs(int K);

/**
 * @brief Training section of the uplink frame: pilot half-symbols at k = i(1+z),
 *        i in [0, K), with z zero guard half-symbols after each pilot.
 */
struct PilotFrame {
    int M = 0;
    int K = 0;
    int U = 0;
    int guards = 1;                           ///< z
    std::vector<std::vector<int>> signs;      ///< K x K sign matrix A[i][u]
    std::vector<double> base;                 ///< base pilot d_m, m in [0, M)

    int pilot_position(int i) const { return i * (1 + guards); }
    int training_length() const { return K * (1 + guards); }

    /**
     * @brief OQAM grid of user u: training section followed by `data`
     *        (which may be empty, i.e. K = 0). @throws InvalidParameter on size mismatch.
     */
    OqamGrid user_grid(int u, const OqamGrid& data = {}) const;
};

/** @brief Virtual training symbols b_m = d_m + j I_m at every pilot position. */
struct VirtualTrainingMatrix {
    int M = 0;
    int K = 0;
    int U = 0;
    double Pp = 0.0;                          ///< nominal pilot power 2 P_d K
    std::vector<std::vector<int>> signs;      ///< A[i][u]
    std::vector<std::vector<cplx>> bbar;      ///< bbar[i][m]: virtual base symbol at pilot i

    /** @brief K x U training matrix B_m with B(i, u) = A[i][u] * bbar[i][m]. */
    CMat B(int m) const;
};

struct PilotSet {
    PilotFrame frame;
    VirtualTrainingMatrix vtm;
};

/**
 * @brief Build pilots for K training half-symbols shared by U users.
 *
 * Virtual symbols follow the frequency-only interference rule
 * b_{m,i} = d_m + j sum_{m' != m} d_{m'} Im{xi(m', m)} evaluated with the
 * band-edge wrap sign.
 * @throws InvalidParameter if K < U, K is not a power of two, guards is not 0 or 1,
 *         or the table does not match M.
 */
PilotSet build_pilots(int K, int U, int M, double Pd, RngStream& stream, const XiTable& xi,
                      PilotBase base = PilotBase::kAlternating, int guards = 1);

/**
 * @brief Noiseless ideal-channel check of the virtual-symbol rule: synthesize
 *        each user's training section, demodulate it and return the largest
 *        |y(m, k_i) - B_m(i, u)| over users, pilots and the subcarriers that
 *        are at least xi.radius away from the band edges.
 */
double pilot_interference_check(const PilotSet& pilots, const PrototypeFilter& filter, const XiTable& xi);

/** @brief Channel estimate, its per-user covariance scalars and multi-cell extras. */
struct EstimateBundle {
    CMat G_hat;                      ///< N x U estimate (home cell)
    std::vector<double> est_var;     ///< Cov[g_hat^u] = est_var[u] * I
    std::vector<double> err_var;     ///< Cov[e^u] = err_var[u] * I
    std::vector<double> gamma;       ///< multi-cell: gamma^u (1 for single-cell)
    std::vector<CMat> cross;         ///< multi-cell: cross[j] = g_hat_{n,j} (cross[n] = G_hat)
    std::vector<std::vector<double>> cross_est_var;  ///< [j][u]
    std::vector<std::vector<double>> cross_err_var;  ///< [j][u]
};

/**
 * @brief Received training block Y = sum_i G_i B^T + W (N x K), all cells
 *        sending the same training matrix.
 */
CMat receive_training(const std::vector<CMat>& G_cells, const CMat& B, double noise_var, RngStream& stream);

/**
 * @brief Single-cell LMMSE: g_hat^u = beta^u / (P_p beta^u + sigma^2) * Y conj(b^u),
 *        with P_p = (B^H B)_{uu}.
 * @throws InvalidParameter if B^H B is not diagonal or sizes mismatch.
 */
EstimateBundle lmmse_single(const CMat& Y, const CMat& B, const std::vector<double>& beta, double noise_var);

/**
 * @brief Pilot-contaminated LMMSE at BS n: g_hat_{n,n} = Y conj(b^u) / (P_p gamma^u + sigma^2),
 *        g_hat_{n,j} = beta^u_{n,j} g_hat_{n,n}.
 * @throws InvalidParameter if B^H B is not diagonal or sizes mismatch.
 */
EstimateBundle lmmse_multicell(const CMat& Y, const CMat& B, const MultiCellScene& scene, int n,
                               double noise_var);

}  // namespace fbmc

#endif  // FBMC_ESTIMATION_HPP
