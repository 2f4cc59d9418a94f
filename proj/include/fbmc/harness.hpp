#ifndef FBMC_HARNESS_HPP
#define FBMC_HARNESS_HPP

/**
 * @file harness.hpp
 * @brief Scenario configuration, preset experiments, deterministic Monte
 *        Carlo execution and CSV / plot-data output.
 */

#include "fbmc/analysis.hpp"
#include "fbmc/channel.hpp"
#include "fbmc/core.hpp"
#include "fbmc/detection.hpp"
#include "fbmc/waveform.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fbmc {

/** @brief analytic: y = G b + eta per subcarrier; waveform: full time-domain chain; ser: symbol error rates. */
enum class Mode { kAnalytic, kWaveform, kSer };

std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

/**
 * @brief Complete description of one experiment.
 *
 * Powers are stored in dB: power_db is 2 P_d relative to the noise, E_db the
 * reference power of a scaling schedule, noise_db the noise power (0 dB means
 * sigma^2 = 1). An optional series variable multiplies the experiment into
 * one output file per series value.
 */
struct Scenario {
    std::string name = "custom";
    Mode mode = Mode::kAnalytic;
    CellScenario cells = CellScenario::kSingle;
    std::vector<Receiver> receivers{Receiver::kMrc, Receiver::kZf, Receiver::kMmse};
    std::vector<Csi> csi{Csi::kPerfect, Csi::kImperfect};

    std::string sweep_var = "N";       ///< N, power_db, U, L or cfo
    std::vector<double> sweep_values{16, 32, 64, 128, 256, 512};
    std::string series_var;            ///< empty, N, power_db, scaling or cells
    std::vector<std::string> series_values;

    int N = 128;
    int U = 8;
    int K = 8;
    int M = 128;
    int L = 6;
    int overlap = 4;
    int T0 = 196;
    double power_db = 10.0;
    double noise_db = 0.0;
    std::vector<double> beta{0.749, 0.045, 0.246, 0.121, 0.125, 0.142, 0.635, 0.256};
    Scaling scaling = Scaling::kNone;
    double E_db = 5.0;
    int subcarrier = -1;               ///< reference subcarrier of analytic mode; -1 selects M/4

    MultiCellGeometry geometry;
    double cross_beta = -1.0;          ///< >= 0: fixed beta^u_{n,i} for i != n; < 0: random geometry per trial

    int data_half_symbols = 64;        ///< waveform mode: OQAM data half-symbols per frame
    Modulation modulation = Modulation::kQam4;
    std::vector<ChainKind> chains{ChainKind::kFbmc, ChainKind::kOfdm};  ///< ser mode
    double cfo = 0.0;
    int ser_symbols = 16;              ///< ser mode: QAM symbols per frame and subcarrier

    int trials = 2000;
    std::uint64_t seed = 1;
    int threads = 1;                   ///< execution only; never part of the output
    std::string series_label;          ///< set by expand_series

    double noise_var() const { return db_to_linear(noise_db); }
    double Pd() const { return 0.5 * db_to_linear(power_db); }

    /** @brief @throws InvalidParameter naming the offending field. */
    void validate() const;
};

/** @brief Scenario as a JSON document (powers in dB, no thread count). */
std::string scenario_to_json(const Scenario& s, int indent = 2);

/** @brief Parse a JSON scenario; unspecified fields keep their defaults. @throws InvalidParameter. */
Scenario scenario_from_json(const std::string& text);

/** @brief Read a JSON scenario file. @throws IoError or InvalidParameter. */
Scenario load_scenario(const std::string& path);

/** @brief Names of all presets. */
std::vector<std::string> preset_names();

/** @brief Named preset experiment with its sweep and settings. @throws InvalidParameter for an unknown name. */
Scenario preset(const std::string& name);

/** @brief One scenario per series value (the scenario itself when no series is set). */
std::vector<Scenario> expand_series(const Scenario& s);

/** @brief One output line. Missing values (no bound, no stated limit) are empty optionals. */
struct ResultRow {
    std::string sweep_var;
    double sweep_value = 0.0;
    std::string receiver;
    std::string csi;
    std::optional<double> rate_sim;
    std::optional<double> rate_ci95;
    std::optional<double> rate_lb;
    std::optional<double> asymptote;
    std::string mode;
    std::uint64_t seed = 0;

    bool operator==(const ResultRow& o) const;
};

/**
 * @brief Run one (series-expanded) scenario. Trial t uses the random stream
 *        (seed, t), so results do not depend on s.threads.
 * @throws InvalidParameter for an invalid scenario, NumericError on numerical failure.
 */
std::vector<ResultRow> run_scenario(const Scenario& s);

enum class OutputFormat { kCsv, kPlotData };
OutputFormat parse_format(const std::string& s);

/** @brief CSV text: JSON scenario in '#' comment lines, header row, one line per row. */
std::string to_csv(const std::vector<ResultRow>& rows, const Scenario& s);

/** @brief Parse CSV text produced by to_csv. @throws InvalidParameter on malformed input. */
std::vector<ResultRow> parse_csv(const std::string& text);

/**
 * @brief Write the rows below `dir`: `<name>[_<series>].csv`, or for plot data
 *        one `<name>[_<series>]_<receiver>.dat` per receiver. Returns the paths.
 * @throws InvalidParameter for empty rows, IoError on write failure.
 */
std::vector<std::string> emit(const std::vector<ResultRow>& rows, const Scenario& s, OutputFormat format,
                              const std::string& dir);

/** @brief Per-trial sum-rates of the waveform-mode study, indexed [receiver][csi]. */
struct WaveformTrialRates {
    std::vector<std::vector<double>> sum_rate;
};

/**
 * @brief One waveform-mode trial: training + data frame through L-tap channels,
 *        per-subcarrier LMMSE estimation from demodulated pilots, linear
 *        combining and empirical per-subcarrier SINR (least-squares signal gain,
 *        residual variance over the data half-symbols).
 */
WaveformTrialRates waveform_rate_trial(const Scenario& s, const PrototypeFilter& filter, const XiTable& xi,
                                       RngStream stream);

}  // namespace fbmc

#endif  // FBMC_HARNESS_HPP
