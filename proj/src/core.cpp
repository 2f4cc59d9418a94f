#include "fbmc/core.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

namespace fbmc {

namespace {

std::seed_seq make_seed(std::uint64_t root_seed, std::uint64_t stream_id)
{
    return std::seed_seq{static_cast<std::uint32_t>(root_seed),
                         static_cast<std::uint32_t>(root_seed >> 32),
                         static_cast<std::uint32_t>(stream_id),
                         static_cast<std::uint32_t>(stream_id >> 32),
                         0x9e3779b9u};
}

// SplitMix64 finalizer: used only to derive well-separated sub-stream keys.
std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t root_seed, std::uint64_t stream_id)
    : root_seed_(root_seed), stream_id_(stream_id)
{
    auto seq = make_seed(root_seed, stream_id);
    engine_.seed(seq);
}

RngStream RngStream::substream(std::uint64_t tag) const
{
    return RngStream(root_seed_, mix64(stream_id_ ^ mix64(tag + 0x5bd1e995ULL)));
}

double RngStream::uniform() { return uniform_(engine_); }

double RngStream::normal() { return normal_(engine_); }

cplx RngStream::cn(double variance)
{
    const double s = std::sqrt(variance / 2.0);
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {s * re, s * im};
}

int RngStream::sign() { return (engine_() >> 63) ? 1 : -1; }

std::uint64_t RngStream::bits() { return engine_(); }

CVec rand_cn(RngStream& stream, std::size_t n, double variance)
{
    if (!(variance > 0.0)) {
        throw InvalidParameter("rand_cn: variance must be positive, got " + std::to_string(variance));
    }
    CVec v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = stream.cn(variance);
    return v;
}

CMat rand_cn_mat(RngStream& stream, int rows, int cols, double variance)
{
    if (!(variance > 0.0)) {
        throw InvalidParameter("rand_cn_mat: variance must be positive, got " + std::to_string(variance));
    }
    CMat m(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) m(r, c) = stream.cn(variance);
    return m;
}

double hermitian_defect(const CMat& A)
{
    if (A.rows() != A.cols()) return INFINITY;
    return (A - A.adjoint()).cwiseAbs().maxCoeff();
}

namespace {

Eigen::LLT<CMat> checked_cholesky(const CMat& A, const char* who)
{
    if (A.rows() != A.cols()) {
        throw InvalidParameter(std::string(who) + ": matrix must be square");
    }
#ifndef NDEBUG
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if (hermitian_defect(A) > 1e-10 * scale) {
        throw InvalidParameter(std::string(who) + ": matrix is not Hermitian");
    }
#endif
    Eigen::LLT<CMat> llt(A);
    bool ok = llt.info() == Eigen::Success;
    if (ok) {
        // LLT only inspects the lower triangle; reject non-positive pivots explicitly, and treat
        // pivots at round-off level relative to the diagonal as numerically singular.
        const auto& L = llt.matrixLLT();
        const double tiny = 64.0 * std::numeric_limits<double>::epsilon() * A.diagonal().cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < L.rows(); ++i) {
            const double piv = std::real(L(i, i));
            if (!(piv * piv > tiny) || !std::isfinite(piv)) ok = false;
        }
    }
    if (!ok) {
        // Locate the first leading principal block that is not positive definite.
        Eigen::Index pivot = A.rows() - 1;
        for (Eigen::Index k = 1; k <= A.rows(); ++k) {
            Eigen::LLT<CMat> part(A.topLeftCorner(k, k));
            if (part.info() != Eigen::Success || !(std::real(part.matrixLLT()(k - 1, k - 1)) > 0.0)) {
                pivot = k - 1;
                break;
            }
        }
        throw NumericError(std::string(who) + ": matrix is not positive definite (pivot " +
                           std::to_string(pivot) + ")");
    }
    return llt;
}

}  // namespace

CMat hermitian_solve(const CMat& A, const CMat& B)
{
    if (B.rows() != A.rows()) {
        throw InvalidParameter("hermitian_solve: right-hand side has " + std::to_string(B.rows()) +
                               " rows, expected " + std::to_string(A.rows()));
    }
    return checked_cholesky(A, "hermitian_solve").solve(B);
}

CMat hermitian_inverse(const CMat& A)
{
    CMat inv = checked_cholesky(A, "hermitian_inverse").solve(CMat::Identity(A.rows(), A.cols()));
    return 0.5 * (inv + inv.adjoint());
}

CMat gram(const CMat& G)
{
    CMat g = G.adjoint() * G;
    return 0.5 * (g + g.adjoint());
}

double inv_uu(const CMat& A, int u)
{
    if (u < 0 || u >= A.rows()) {
        throw InvalidParameter("inv_uu: index " + std::to_string(u) + " out of range");
    }
    CMat e = CMat::Zero(A.rows(), 1);
    e(u, 0) = 1.0;
    CMat x;
    try {
        x = checked_cholesky(A, "inv_uu").solve(e);
    } catch (const NumericError& err) {
        throw NumericError(std::string("inv_uu: singular or indefinite matrix: ") + err.what());
    }
    const double v = std::real(x(u, 0));
    if (!std::isfinite(v)) throw NumericError("inv_uu: non-finite result");
    return v;
}

MeanCi mean_ci(const std::vector<double>& values)
{
    MeanCi r;
    r.count = values.size();
    if (values.empty()) return r;
    double s = 0.0;
    for (double v : values) s += v;
    r.mean = s / static_cast<double>(values.size());
    if (values.size() < 2) return r;
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    const double var = ss / static_cast<double>(values.size() - 1);
    r.ci95 = 1.959963984540054 * std::sqrt(var / static_cast<double>(values.size()));
    return r;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn)
{
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = n * w / workers;
        const std::size_t hi = n * (w + 1) / workers;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace fbmc
