#include "fbmc/waveform.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <fstream>
#include <iomanip>

namespace fbmc {

namespace {

bool is_power_of_two(int x) { return x > 0 && (x & (x - 1)) == 0; }

int mod_int(long a, long n)
{
    long r = a % n;
    return static_cast<int>(r < 0 ? r + n : r);
}

/**
 * Frequency-domain IOTA spectrum on the grid f_i = i * nu0 / P, i in [0, F],
 * in normalized units where the lattice spacings are tau0 = nu0 = 1/sqrt(2).
 * The spectrum is even, so only f >= 0 is stored.
 */
struct IotaSpectrum {
    double df = 0.0;
    std::vector<double> Y;  // Y[i] = spectrum at f = i * df
};

IotaSpectrum compute_iota_spectrum()
{
    const double tau0 = 1.0 / std::sqrt(2.0);
    const double nu0 = tau0;
    auto gauss = [](double t) { return std::pow(2.0, 0.25) * std::exp(-kPi * t * t); };

    // Orthogonalize in time: y1 = g / sqrt(tau0 * sum_k g(t - k tau0)^2).
    const double h = 1.0 / 256.0;
    const int half = 8 * 256;  // t in [-8, 8]
    std::vector<double> y1(half + 1);
    for (int i = 0; i <= half; ++i) {
        const double t = i * h;
        double s = 0.0;
        for (int k = -20; k <= 20; ++k) {
            const double g = gauss(t - k * tau0);
            s += g * g;
        }
        y1[i] = gauss(t) / std::sqrt(tau0 * s);
    }

    // Fourier transform of the even function y1 (cosine sum).
    const int P = 128;
    const double df = nu0 / P;
    const int F = static_cast<int>(8.0 / df);
    std::vector<double> Y1(F + 1);
    for (int i = 0; i <= F; ++i) {
        const double f = i * df;
        double acc = y1[0];
        for (int n = 1; n <= half; ++n) acc += 2.0 * y1[n] * std::cos(2.0 * kPi * f * n * h);
        Y1[i] = acc * h;
    }

    // Orthogonalize in frequency: shifts by nu0 are exactly P grid points.
    IotaSpectrum out;
    out.df = df;
    out.Y.resize(F + 1);
    for (int i = 0; i <= F; ++i) {
        double s = 0.0;
        for (int k = -40; k <= 40; ++k) {
            const int j = std::abs(i - k * P);
            if (j <= F) s += Y1[j] * Y1[j];
        }
        out.Y[i] = Y1[i] / std::sqrt(nu0 * s);
    }
    return out;
}

const IotaSpectrum& iota_spectrum()
{
    static const IotaSpectrum spectrum = compute_iota_spectrum();
    return spectrum;
}

double iota_time(double t)
{
    const auto& sp = iota_spectrum();
    double acc = sp.Y[0];
    for (std::size_t i = 1; i < sp.Y.size(); ++i) acc += 2.0 * sp.Y[i] * std::cos(2.0 * kPi * (i * sp.df) * t);
    return acc * sp.df;
}

}  // namespace

PrototypeFilter build_iota(int M, int overlap)
{
    if (M < 8 || !is_power_of_two(M)) {
        throw InvalidParameter("build_iota: M must be a power of two >= 8, got " + std::to_string(M));
    }
    if (overlap != 3 && overlap != 4 && overlap != 6 && overlap != 8) {
        throw InvalidParameter("build_iota: unsupported overlap " + std::to_string(overlap) +
                               " (expected 3, 4, 6 or 8)");
    }
    PrototypeFilter f;
    f.M = M;
    f.overlap = overlap;
    const int Lp = overlap * M;
    f.taps.resize(Lp);
    const double centre = 0.5 * (Lp - 1);
    // Sample rate M/T; T equals sqrt(2) in the normalized units of the spectrum.
    for (int l = 0; l < Lp / 2; ++l) {
        const double t = (l - centre) / M * std::sqrt(2.0);
        f.taps[l] = iota_time(t);
        f.taps[Lp - 1 - l] = f.taps[l];
    }
    double e = 0.0;
    for (double v : f.taps) e += v * v;
    const double s = 1.0 / std::sqrt(e);
    for (double& v : f.taps) v *= s;
    return f;
}

void export_taps(const PrototypeFilter& filter, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw IoError("export_taps: cannot open " + path);
    out << std::setprecision(17);
    for (double v : filter.taps) out << v << '\n';
    if (!out) throw IoError("export_taps: write failed for " + path);
}

cplx basis_phase(const PrototypeFilter& filter, int m, int k)
{
    static const cplx quarter[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    cplx ph = quarter[mod_int(static_cast<long>(m) + k, 4)];
    if (mod_int(static_cast<long>(m) * k, 2) == 1) ph = -ph;
    // exp(-j pi m D / M), reduced modulo 2 pi in integer arithmetic.
    const long D = filter.length() - 1;
    const int r = mod_int(static_cast<long>(m) * D, 2L * filter.M);
    return ph * std::polar(1.0, -kPi * r / filter.M);
}

namespace {

/** @brief exp(-j pi m D / M) for every subcarrier m, so basis_phase = quarter-turn factor * entry m. */
std::vector<cplx> centre_phases(const PrototypeFilter& filter)
{
    std::vector<cplx> out(filter.M);
    const long D = filter.length() - 1;
    for (int m = 0; m < filter.M; ++m) {
        const int r = mod_int(static_cast<long>(m) * D, 2L * filter.M);
        out[m] = std::polar(1.0, -kPi * r / filter.M);
    }
    return out;
}

/** @brief exp(j phi_{m,k}) = j^{m+k} (-1)^{mk}. */
cplx phi_factor(int m, int k)
{
    static const cplx quarter[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const cplx ph = quarter[mod_int(static_cast<long>(m) + k, 4)];
    return mod_int(static_cast<long>(m) * k, 2) == 1 ? -ph : ph;
}

}  // namespace

cplx basis_sample(const PrototypeFilter& filter, int m, int k, long l)
{
    const long idx = l - static_cast<long>(k) * filter.M / 2;
    if (idx < 0 || idx >= filter.length()) return {0.0, 0.0};
    const int r = mod_int(static_cast<long>(m) * l, filter.M);
    return filter.taps[idx] * std::polar(1.0, 2.0 * kPi * r / filter.M) * basis_phase(filter, m, k);
}

OqamGrid qam_to_oqam(const QamGrid& c)
{
    OqamGrid d(c.M, 2 * c.K);
    for (int kb = 0; kb < c.K; ++kb) {
        for (int m = 0; m < c.M; ++m) {
            const cplx v = c(m, kb);
            if (m % 2 == 0) {
                d(m, 2 * kb) = v.real();
                d(m, 2 * kb + 1) = v.imag();
            } else {
                d(m, 2 * kb + 1) = v.real();
                d(m, 2 * kb) = v.imag();
            }
        }
    }
    return d;
}

namespace {

template <typename Get>
QamGrid destagger(int M, int K, Get get)
{
    if (K % 2 != 0) {
        throw InvalidParameter("oqam_to_qam: half-symbol count must be even, got " + std::to_string(K));
    }
    QamGrid c(M, K / 2);
    for (int kb = 0; kb < K / 2; ++kb) {
        for (int m = 0; m < M; ++m) {
            if (m % 2 == 0) {
                c(m, kb) = {get(m, 2 * kb), get(m, 2 * kb + 1)};
            } else {
                c(m, kb) = {get(m, 2 * kb + 1), get(m, 2 * kb)};
            }
        }
    }
    return c;
}

}  // namespace

QamGrid oqam_to_qam(const OqamGrid& d)
{
    return destagger(d.M, d.K, [&](int m, int k) { return d(m, k); });
}

QamGrid oqam_to_qam(const DemodGrid& d_hat)
{
    return destagger(d_hat.M, d_hat.K, [&](int m, int k) { return d_hat(m, k).real(); });
}

std::size_t fbmc_signal_length(const PrototypeFilter& filter, int num_half_symbols)
{
    if (num_half_symbols <= 0) return 0;
    return static_cast<std::size_t>(num_half_symbols - 1) * (filter.M / 2) + filter.length();
}

Samples synthesize(const OqamGrid& d, const PrototypeFilter& filter)
{
    if (d.M != filter.M) {
        throw InvalidParameter("synthesize: grid has " + std::to_string(d.M) + " subcarriers, filter " +
                               std::to_string(filter.M));
    }
    const int M = filter.M;
    const int Lp = filter.length();
    Samples s(fbmc_signal_length(filter, d.K), cplx{0.0, 0.0});
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    std::vector<cplx> X(M), x(M);
    const std::vector<cplx> centre = centre_phases(filter);
    for (int k = 0; k < d.K; ++k) {
        bool any = false;
        for (int m = 0; m < M; ++m) {
            const double v = d(m, k);
            X[m] = v == 0.0 ? cplx{0.0, 0.0} : v * phi_factor(m, k) * centre[m];
            any = any || v != 0.0;
        }
        if (!any) continue;
        fft.inv(x, X);  // x[n] = sum_m X[m] exp(j 2 pi m n / M)
        const std::size_t start = static_cast<std::size_t>(k) * (M / 2);
        for (int idx = 0; idx < Lp; ++idx) {
            const std::size_t l = start + idx;
            s[l] += filter.taps[idx] * x[l % M];
        }
    }
    return s;
}

DemodGrid analyze(const Samples& x, const PrototypeFilter& filter, int num_half_symbols, std::size_t offset)
{
    const int M = filter.M;
    const int Lp = filter.length();
    const std::size_t need = offset + fbmc_signal_length(filter, num_half_symbols);
    if (x.size() < need) {
        throw InvalidParameter("analyze: need " + std::to_string(need) + " samples, got " +
                               std::to_string(x.size()));
    }
    DemodGrid y(M, num_half_symbols);
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    std::vector<cplx> z(M), Z(M);
    const std::vector<cplx> centre = centre_phases(filter);
    for (int k = 0; k < num_half_symbols; ++k) {
        std::fill(z.begin(), z.end(), cplx{0.0, 0.0});
        const std::size_t start = static_cast<std::size_t>(k) * (M / 2);
        for (int idx = 0; idx < Lp; ++idx) {
            const std::size_t l = start + idx;
            z[l % M] += x[offset + l] * filter.taps[idx];
        }
        fft.fwd(Z, z);  // Z[m] = sum_n z[n] exp(-j 2 pi m n / M)
        for (int m = 0; m < M; ++m) y(m, k) = Z[m] * std::conj(phi_factor(m, k) * centre[m]);
    }
    return y;
}

cplx XiTable::at(int dm, int dk, int mb_parity, int kb_parity) const
{
    if (std::abs(dm) > radius || std::abs(dk) > radius) return {0.0, 0.0};
    const int w = 2 * radius + 1;
    const int parity = 2 * (mb_parity & 1) + (kb_parity & 1);
    return values[static_cast<std::size_t>(parity) * w * w + (dm + radius) * w + (dk + radius)];
}

cplx XiTable::coupling(int m, int k, int mb, int kb) const
{
    const int dk = k - kb;
    if (std::abs(dk) > radius) return {0.0, 0.0};
    int dm = m - mb;
    int wraps = 0;
    while (dm > M / 2) {
        dm -= M;
        ++wraps;
    }
    while (dm <= -M / 2) {
        dm += M;
        --wraps;
    }
    if (std::abs(dm) > radius) return {0.0, 0.0};
    const cplx v = at(dm, dk, mb & 1, kb & 1);
    return (wraps % 2 != 0) ? -v : v;
}

XiTable xi_table(const PrototypeFilter& filter, int radius)
{
    if (radius < 1) throw InvalidParameter("xi_table: radius must be >= 1");
    XiTable t;
    t.M = filter.M;
    t.radius = radius;
    const int w = 2 * radius + 1;
    t.values.assign(static_cast<std::size_t>(4) * w * w, cplx{0.0, 0.0});
    const long half = filter.M / 2;
    const long Lp = filter.length();
    for (int parity = 0; parity < 4; ++parity) {
        const int mb = parity / 2;
        const int kb = 2 * radius + (parity % 2);
        for (int dm = -radius; dm <= radius; ++dm) {
            for (int dk = -radius; dk <= radius; ++dk) {
                const int k = kb + dk;
                const long lo = std::max(k * half, kb * half);
                const long hi = std::min(k * half, kb * half) + Lp;
                cplx acc{0.0, 0.0};
                for (long l = lo; l < hi; ++l) {
                    acc += basis_sample(filter, mb + dm, k, l) * std::conj(basis_sample(filter, mb, kb, l));
                }
                t.values[static_cast<std::size_t>(parity) * w * w + (dm + radius) * w + (dk + radius)] = acc;
            }
        }
    }
    return t;
}

double xi_energy(const XiTable& xi, int parity)
{
    double s = 0.0;
    for (int dm = -xi.radius; dm <= xi.radius; ++dm)
        for (int dk = -xi.radius; dk <= xi.radius; ++dk) s += std::norm(xi.at(dm, dk, parity / 2, parity % 2));
    return s;
}

double xi_real_residual(const XiTable& xi)
{
    double worst = 0.0;
    for (int parity = 0; parity < 4; ++parity)
        for (int dm = -xi.radius; dm <= xi.radius; ++dm)
            for (int dk = -xi.radius; dk <= xi.radius; ++dk) {
                if (dm == 0 && dk == 0) continue;
                worst = std::max(worst, std::abs(xi.at(dm, dk, parity / 2, parity % 2).real()));
            }
    return worst;
}

double intrinsic_interference(const OqamGrid& d, const XiTable& xi, int mb, int kb)
{
    double I = 0.0;
    for (int dk = -xi.radius; dk <= xi.radius; ++dk) {
        const int k = kb + dk;
        if (k < 0 || k >= d.K) continue;
        for (int dm = -xi.radius; dm <= xi.radius; ++dm) {
            if (dm == 0 && dk == 0) continue;
            const int m = mod_int(static_cast<long>(mb) + dm, d.M);
            const double v = d(m, k);
            if (v != 0.0) I += v * xi.coupling(m, k, mb, kb).imag();
        }
    }
    return I;
}

Samples apply_cfo(const Samples& s, double epsilon, int M)
{
    if (std::abs(epsilon) > 0.5) {
        throw InvalidParameter("apply_cfo: |epsilon| must be <= 0.5, got " + std::to_string(epsilon));
    }
    Samples out(s.size());
    for (std::size_t l = 0; l < s.size(); ++l) {
        out[l] = s[l] * std::polar(1.0, 2.0 * kPi * epsilon * static_cast<double>(l) / M);
    }
    return out;
}

QamGrid random_qam(int M, int num_symbols, Modulation mod, double Pd, RngStream& stream)
{
    QamGrid c(M, num_symbols);
    for (auto& v : c.data) {
        if (mod == Modulation::kBpsk) {
            v = {stream.sign() * std::sqrt(2.0 * Pd), 0.0};
        } else {
            const double a = std::sqrt(Pd);
            const double re = stream.sign() * a;
            const double im = stream.sign() * a;
            v = {re, im};
        }
    }
    return c;
}

cplx qam_decide(cplx c, Modulation mod, double Pd)
{
    if (mod == Modulation::kBpsk) return {c.real() >= 0.0 ? std::sqrt(2.0 * Pd) : -std::sqrt(2.0 * Pd), 0.0};
    const double a = std::sqrt(Pd);
    return {c.real() >= 0.0 ? a : -a, c.imag() >= 0.0 ? a : -a};
}

OqamGrid random_oqam(int M, int num_half_symbols, double Pd, RngStream& stream)
{
    OqamGrid d(M, num_half_symbols);
    const double a = std::sqrt(Pd);
    for (auto& v : d.data) v = stream.sign() * a;
    return d;
}

Samples ofdm_modulate(const QamGrid& c, int cp_len)
{
    if (cp_len < 0) throw InvalidParameter("ofdm_modulate: cp_len must be >= 0");
    const int M = c.M;
    const std::size_t sym_len = static_cast<std::size_t>(M + cp_len);
    Samples out(sym_len * c.K);
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    std::vector<cplx> X(M), x(M);
    const double scale = 1.0 / std::sqrt(static_cast<double>(M));
    for (int s = 0; s < c.K; ++s) {
        for (int m = 0; m < M; ++m) X[m] = c(m, s);
        fft.inv(x, X);
        const std::size_t base = s * sym_len;
        for (int i = 0; i < cp_len; ++i) out[base + i] = scale * x[M - cp_len + i];
        for (int n = 0; n < M; ++n) out[base + cp_len + n] = scale * x[n];
    }
    return out;
}

QamGrid ofdm_demodulate(const Samples& x, int M, int num_symbols, int cp_len, std::size_t offset)
{
    if (cp_len < 0) throw InvalidParameter("ofdm_demodulate: cp_len must be >= 0");
    if (M <= 0) throw InvalidParameter("ofdm_demodulate: M must be positive");
    const std::size_t sym_len = static_cast<std::size_t>(M + cp_len);
    if (x.size() < offset + sym_len * num_symbols) {
        throw InvalidParameter("ofdm_demodulate: need " + std::to_string(offset + sym_len * num_symbols) +
                               " samples, got " + std::to_string(x.size()));
    }
    QamGrid c(M, num_symbols);
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    std::vector<cplx> z(M), Z(M);
    const double scale = 1.0 / std::sqrt(static_cast<double>(M));
    for (int s = 0; s < num_symbols; ++s) {
        const std::size_t base = offset + s * sym_len + cp_len;
        for (int n = 0; n < M; ++n) z[n] = x[base + n];
        fft.fwd(Z, z);
        for (int m = 0; m < M; ++m) c(m, s) = scale * Z[m];
    }
    return c;
}

}  // namespace fbmc
