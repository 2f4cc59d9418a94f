#ifndef FBMC_CORE_HPP
#define FBMC_CORE_HPP

/**
 * @file core.hpp
 * @brief Complex linear-algebra aliases, Hermitian solvers, error types and
 *        reproducible random streams shared by every module of the lab.
 */

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbmc {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Samples = std::vector<cplx>;

inline constexpr double kPi = 3.14159265358979323846;

/** @brief Base class of every error raised by the lab. */
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/** @brief A caller supplied an out-of-contract parameter. */
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/** @brief A numerical procedure failed (singular / indefinite matrix, overflow). */
class NumericError : public Error {
public:
    using Error::Error;
};

/** @brief Reading or writing a file failed. */
class IoError : public Error {
public:
    using Error::Error;
};

/**
 * @brief Reproducible random stream keyed by (root_seed, stream_id).
 *
 * The pair is expanded through std::seed_seq into a 64-bit Mersenne Twister,
 * so a stream is a pure function of its key: draws never depend on which
 * thread runs the trial or on how many streams were opened before it.
 * Streams are cheap to construct and must not be shared between threads.
 */
class RngStream {
public:
    RngStream(std::uint64_t root_seed, std::uint64_t stream_id);

    std::uint64_t root_seed() const { return root_seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    /** @brief Derive an independent sub-stream (purpose tag) from this key. */
    RngStream substream(std::uint64_t tag) const;

    double uniform();                  ///< U[0, 1)
    double normal();                   ///< N(0, 1)
    cplx cn(double variance);          ///< CN(0, variance)
    int sign();                        ///< ±1 with equal probability
    std::uint64_t bits();              ///< raw 64-bit draw

private:
    std::uint64_t root_seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/** @brief n i.i.d. CN(0, variance) samples (real and imaginary parts variance/2 each). */
CVec rand_cn(RngStream& stream, std::size_t n, double variance);

/** @brief rows×cols matrix of i.i.d. CN(0, variance) entries, filled column by column. */
CMat rand_cn_mat(RngStream& stream, int rows, int cols, double variance);

/**
 * @brief Solve A X = B for Hermitian positive-definite A via Cholesky.
 * @throws NumericError naming the first non-positive pivot when A is not PD.
 */
CMat hermitian_solve(const CMat& A, const CMat& B);

/** @brief Inverse of a Hermitian positive-definite matrix (Hermitian-symmetrized). */
CMat hermitian_inverse(const CMat& A);

/** @brief Gram matrix G^H G, conjugate-symmetrized so it is exactly Hermitian. */
CMat gram(const CMat& G);

/** @brief The (u,u) entry of A^{-1} for Hermitian positive-definite A. */
double inv_uu(const CMat& A, int u);

/** @brief max |A - A^H| over all entries. */
double hermitian_defect(const CMat& A);

/** @brief Convert decibels to a linear power ratio. */
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/** @brief Convert a linear power ratio to decibels. */
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

/** @brief Sample mean and 95% normal-approximation half-width. */
struct MeanCi {
    double mean = 0.0;
    double ci95 = 0.0;
    std::size_t count = 0;
};

/** @brief Mean and 95% half-width of a sample (half-width 0 for fewer than 2 values). */
MeanCi mean_ci(const std::vector<double>& values);

/**
 * @brief Run fn(i) for i in [0, n) on up to `threads` worker threads.
 *
 * Work is split into contiguous blocks; callers write results into slot i so
 * the outcome never depends on the thread count. The first exception thrown
 * by any worker is rethrown on the calling thread.
 */
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace fbmc

#endif  // FBMC_CORE_HPP
