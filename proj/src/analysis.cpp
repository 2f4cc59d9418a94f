#include "fbmc/analysis.hpp"

#include <cmath>

namespace fbmc {

std::string to_string(CellScenario s) { return s == CellScenario::kSingle ? "single" : "multi"; }

std::string to_string(Scaling s)
{
    switch (s) {
    case Scaling::kNone: return "none";
    case Scaling::kInvSqrtN: return "inv_sqrt_N";
    case Scaling::kInvN: return "inv_N";
    }
    return "unknown";
}

CellScenario parse_cell_scenario(const std::string& s)
{
    if (s == "single") return CellScenario::kSingle;
    if (s == "multi") return CellScenario::kMulti;
    throw InvalidParameter("unknown cell scenario '" + s + "' (expected single or multi)");
}

Scaling parse_scaling(const std::string& s)
{
    if (s == "none") return Scaling::kNone;
    if (s == "inv_sqrt_N") return Scaling::kInvSqrtN;
    if (s == "inv_N") return Scaling::kInvN;
    throw InvalidParameter("unknown scaling '" + s + "' (expected none, inv_sqrt_N or inv_N)");
}

void LinkParams::validate() const
{
    if (N < 1) throw InvalidParameter("N must be >= 1, got " + std::to_string(N));
    if (U < 1) throw InvalidParameter("U must be >= 1, got " + std::to_string(U));
    if (K < U) throw InvalidParameter("K must be >= U (K=" + std::to_string(K) + ", U=" + std::to_string(U) + ")");
    if (!(Pd > 0.0) || !std::isfinite(Pd)) throw InvalidParameter("P_d must be positive and finite");
    if (!(noise_var >= 0.0) || !std::isfinite(noise_var)) throw InvalidParameter("noise variance must be >= 0");
    if (T0 <= K) throw InvalidParameter("T0 must exceed K (T0=" + std::to_string(T0) + ")");
    if (cross_beta.empty()) {
        if (static_cast<int>(beta.size()) != U) {
            throw InvalidParameter("beta has " + std::to_string(beta.size()) + " entries, expected U=" +
                                   std::to_string(U));
        }
        for (double b : beta)
            if (!(b > 0.0)) throw InvalidParameter("large-scale gains must be positive");
    } else {
        for (const auto& row : cross_beta) {
            if (static_cast<int>(row.size()) != U) throw InvalidParameter("cross_beta rows must have U entries");
            for (double b : row)
                if (!(b >= 0.0)) throw InvalidParameter("cross-cell gains must be non-negative");
        }
    }
}

LinkParams apply_scaling(const LinkParams& p, Scaling scaling, double E)
{
    LinkParams q = p;
    if (scaling == Scaling::kNone) return q;
    if (!(E > 0.0)) throw InvalidParameter("apply_scaling: reference power E must be positive");
    const double two_pd = scaling == Scaling::kInvSqrtN ? E / std::sqrt(static_cast<double>(p.N))
                                                        : E / static_cast<double>(p.N);
    q.Pd = 0.5 * two_pd;
    return q;
}

std::vector<double> gamma(const LinkParams& p)
{
    std::vector<double> g(p.U, 1.0);
    for (const auto& row : p.cross_beta)
        for (int u = 0; u < p.U; ++u) g[u] += row[u];
    return g;
}

double mu_n(const LinkParams& p)
{
    const double Pp = p.Pp();
    const double s2 = p.noise_var;
    const auto g = gamma(p);
    double mu = 0.0;
    for (const auto& row : p.cross_beta)
        for (int j = 0; j < p.U; ++j) mu += row[j] * (Pp * g[j] - Pp * row[j] + s2) / (Pp * g[j] + s2);
    for (int j = 0; j < p.U; ++j) mu += (Pp * (g[j] - 1.0) + s2) / (Pp * g[j] + s2);
    return mu;
}

std::vector<double> served_error_variance(const LinkParams& p)
{
    const double Pp = p.Pp();
    const double s2 = p.noise_var;
    std::vector<double> e(p.U);
    if (p.scenario() == CellScenario::kSingle) {
        for (int u = 0; u < p.U; ++u) e[u] = p.beta[u] * s2 / (Pp * p.beta[u] + s2);
    } else {
        const auto g = gamma(p);
        for (int u = 0; u < p.U; ++u) e[u] = (Pp * (g[u] - 1.0) + s2) / (Pp * g[u] + s2);
    }
    return e;
}

namespace {

void check_user(const LinkParams& p, int u, const char* who)
{
    if (u < 0 || u >= p.U) {
        throw InvalidParameter(std::string(who) + ": user index " + std::to_string(u) + " out of range");
    }
}

void require_dof(Receiver r, const LinkParams& p, const char* who)
{
    if (r == Receiver::kMrc && p.N < 2) {
        throw InvalidParameter(std::string(who) + ": the MRC bound needs N >= 2 (N - 1 degrees of freedom), got N=" +
                               std::to_string(p.N));
    }
    if (r == Receiver::kZf && p.N <= p.U) {
        throw InvalidParameter(std::string(who) + ": the ZF bound needs N > U (N - U degrees of freedom), got N=" +
                               std::to_string(p.N) + " U=" + std::to_string(p.U));
    }
}

double sum_cross(const LinkParams& p)
{
    double s = 0.0;
    for (const auto& row : p.cross_beta)
        for (double b : row) s += b;
    return s;
}

double sum_cross_sq(const LinkParams& p, int u)
{
    double s = 0.0;
    for (const auto& row : p.cross_beta) s += row[u] * row[u];
    return s;
}

double log2p1(double x) { return std::log2(1.0 + x); }

}  // namespace

double lb_rate(const BoundSpec& spec, const LinkParams& p_in, int u)
{
    const LinkParams p = apply_scaling(p_in, spec.scaling, spec.E);
    p.validate();
    check_user(p, u, "lb_rate");
    if (spec.receiver == Receiver::kMmse) {
        throw InvalidParameter("lb_rate: no closed-form MMSE bound; use mmse_ergodic_rate");
    }
    require_dof(spec.receiver, p, "lb_rate");
    const double N = p.N;
    const double U = p.U;
    const double two_pd = 2.0 * p.Pd;
    const double Pp = p.Pp();
    const double s2 = p.noise_var;
    const bool mrc = spec.receiver == Receiver::kMrc;

    if (p.scenario() == CellScenario::kSingle) {
        const double bu = p.beta[u];
        double others = 0.0;
        double err_sum = 0.0;
        for (int j = 0; j < p.U; ++j) {
            if (j != u) others += p.beta[j];
            err_sum += p.beta[j] * s2 / (Pp * p.beta[j] + s2);
        }
        if (spec.csi == Csi::kPerfect) {
            if (mrc) return log2p1(two_pd * (N - 1.0) * bu / (two_pd * others + s2));
            return log2p1(two_pd * bu * (N - U) / s2);
        }
        if (mrc) {
            return log2p1(Pp * (N - 1.0) * bu * bu / ((Pp * bu + s2) * (others + s2 / two_pd) + bu * s2));
        }
        return log2p1(Pp * (N - U) * bu * bu / ((Pp * bu + s2) * (err_sum + s2 / two_pd)));
    }

    // Multi-cell (served users have unit large-scale gain).
    const double cross = sum_cross(p);
    if (spec.csi == Csi::kPerfect) {
        if (mrc) return log2p1(two_pd * (N - 1.0) / (two_pd * (cross + (U - 1.0)) + s2));
        return log2p1(two_pd * (N - U) / (two_pd * cross + s2));
    }
    const auto g = gamma(p);
    if (mrc) {
        const double den = (Pp * g[u] + s2) * (two_pd * U + two_pd * cross + s2) +
                           two_pd * Pp * ((N - 2.0) * sum_cross_sq(p, u) - 1.0);
        return log2p1(two_pd * Pp * (N - 1.0) / den);
    }
    double contamination = 0.0;
    for (int j = 0; j < p.U; ++j)
        if (j != u) contamination += two_pd * Pp / (Pp * g[j] + s2);
    const double den = (Pp * g[u] + s2) * (two_pd * U + two_pd * cross - contamination + s2) - two_pd * Pp;
    return log2p1(two_pd * Pp * (N - U) / den);
}

double mrc_multicell_variance(const LinkParams& p, const CMat& G_hat, int u)
{
    check_user(p, u, "mrc_multicell_variance");
    if (G_hat.cols() != p.U) throw InvalidParameter("mrc_multicell_variance: estimate must have U columns");
    const CVec gu = G_hat.col(u);
    const double n2 = gu.squaredNorm();
    double intra = 0.0;
    double inter = 0.0;
    for (int j = 0; j < p.U; ++j) {
        if (j == u) continue;
        const double c = std::norm(gu.dot(G_hat.col(j)));
        intra += c;
        for (const auto& row : p.cross_beta) inter += row[j] * row[j] * c;
    }
    const double contamination = sum_cross_sq(p, u) * n2;
    return p.Pd * inter + p.Pd * intra + p.Pd * (mu_n(p) + p.noise_var / (2.0 * p.Pd) + contamination) * n2;
}

namespace {

void check_draw(const LinkParams& p, const CMat& G, const char* what)
{
    if (G.cols() != p.U || G.rows() != p.N) {
        throw InvalidParameter(std::string("sinr: ") + what + " must be N x U (" + std::to_string(p.N) + " x " +
                               std::to_string(p.U) + ")");
    }
}

std::vector<double> mrc_sinr(const CMat& G, double two_pd, double loading, double s2)
{
    const int U = static_cast<int>(G.cols());
    const CMat Gr = G.adjoint() * G;
    std::vector<double> out(U);
    for (int u = 0; u < U; ++u) {
        const double n2 = Gr(u, u).real();
        double iu = 0.0;
        for (int j = 0; j < U; ++j)
            if (j != u) iu += std::norm(Gr(u, j));
        out[u] = two_pd * n2 * n2 / (two_pd * iu + (two_pd * loading + s2) * n2);
    }
    return out;
}

std::vector<double> zf_sinr(const CMat& G, double two_pd, double scalar_den, double extra = 0.0,
                            const std::vector<double>* floor = nullptr)
{
    const int U = static_cast<int>(G.cols());
    const CMat Ginv = hermitian_inverse(gram(G));
    std::vector<double> out(U);
    for (int u = 0; u < U; ++u) {
        const double f = floor ? (*floor)[u] : 0.0;
        out[u] = two_pd / (f + (scalar_den + extra) * Ginv(u, u).real());
    }
    return out;
}

std::vector<double> mmse_sinr(const CMat& X, double c)
{
    const auto r = mmse_log_det_rates(X, c);
    std::vector<double> out(r.size());
    for (std::size_t u = 0; u < r.size(); ++u) out[u] = std::exp2(r[u]) - 1.0;
    return out;
}

double err_sum(const LinkParams& p)
{
    double s = 0.0;
    for (double e : served_error_variance(p)) s += e;
    return s;
}

std::vector<double> mc_mrc_perfect(const LinkParams& p, const ChannelDraw& d)
{
    if (d.cross.size() != p.cross_beta.size()) {
        throw InvalidParameter("sinr: the draw must carry one channel per interfering cell");
    }
    std::vector<double> out(p.U);
    for (int u = 0; u < p.U; ++u) {
        const CVec g = d.G.col(u);
        const double n2 = g.squaredNorm();
        double inter = 0.0;
        for (const auto& Gi : d.cross) inter += (Gi.adjoint() * g).squaredNorm();
        double intra = 0.0;
        for (int j = 0; j < p.U; ++j)
            if (j != u) intra += std::norm(g.dot(d.G.col(j)));
        const double var = p.Pd * inter + p.Pd * intra + 0.5 * p.noise_var * n2;
        out[u] = 2.0 * p.Pd * n2 * n2 / (2.0 * var);
    }
    return out;
}

}  // namespace

std::vector<double> mmse_log_det_rates(const CMat& X, double c)
{
    const int U = static_cast<int>(X.cols());
    CMat T = c * gram(X);
    T.diagonal().array() += 1.0;
    const CMat inv = hermitian_inverse(T);
    std::vector<double> r(U);
    for (int u = 0; u < U; ++u) r[u] = -std::log2(inv(u, u).real());
    return r;
}

std::vector<double> sinr_closed_form(const BoundSpec& spec, const LinkParams& p_in, const ChannelDraw& draw)
{
    const LinkParams p = apply_scaling(p_in, spec.scaling, spec.E);
    p.validate();
    const double two_pd = 2.0 * p.Pd;
    const double s2 = p.noise_var;
    const bool perfect = spec.csi == Csi::kPerfect;
    const CMat& X = perfect ? draw.G : draw.G_hat;
    check_draw(p, X, perfect ? "G" : "G_hat");

    if (p.scenario() == CellScenario::kSingle) {
        const double loading = perfect ? 0.0 : err_sum(p);
        switch (spec.receiver) {
        case Receiver::kMrc: return mrc_sinr(X, two_pd, loading, s2);
        case Receiver::kZf: return zf_sinr(X, two_pd, two_pd * loading + s2);
        case Receiver::kMmse: return mmse_sinr(X, 1.0 / (loading + s2 / two_pd));
        }
    }
    if (spec.receiver == Receiver::kMmse) {
        throw InvalidParameter("sinr_closed_form: no multi-cell MMSE expression");
    }
    if (perfect) {
        if (spec.receiver == Receiver::kMrc) return mc_mrc_perfect(p, draw);
        return zf_sinr(X, two_pd, two_pd * sum_cross(p) + s2);
    }
    if (spec.receiver == Receiver::kMrc) {
        std::vector<double> out(p.U);
        for (int u = 0; u < p.U; ++u) {
            const double n2 = X.col(u).squaredNorm();
            out[u] = two_pd * n2 * n2 / (2.0 * mrc_multicell_variance(p, X, u));
        }
        return out;
    }
    // Displayed covariance diagonal: contaminated estimates treated as independent of G_hat.
    const auto g = gamma(p);
    const double Pp = p.Pp();
    const double mu = mu_n(p);
    std::vector<double> out(p.U);
    const CMat Ginv = hermitian_inverse(gram(X));
    for (int u = 0; u < p.U; ++u) {
        double t = mu + s2 / two_pd;
        for (const auto& row : p.cross_beta) {
            for (int j = 0; j < p.U; ++j)
                if (j != u) t += Pp * row[j] * row[j] / (Pp * g[j] + s2);
            t += Pp * row[u] * row[u] / (Pp * g[u] + s2);
        }
        const double cov_uu = p.Pd * t * Ginv(u, u).real();
        out[u] = two_pd / (2.0 * cov_uu);
    }
    return out;
}

std::vector<double> sinr_exact(const BoundSpec& spec, const LinkParams& p_in, const ChannelDraw& draw)
{
    const LinkParams p = apply_scaling(p_in, spec.scaling, spec.E);
    if (p.scenario() == CellScenario::kSingle || spec.receiver != Receiver::kZf) {
        return sinr_closed_form(spec, p, draw);
    }
    p.validate();
    const double two_pd = 2.0 * p.Pd;
    if (spec.csi == Csi::kPerfect) {
        check_draw(p, draw.G, "G");
        if (draw.cross.size() != p.cross_beta.size()) {
            throw InvalidParameter("sinr_exact: the draw must carry one channel per interfering cell");
        }
        const CMat Ginv = hermitian_inverse(gram(draw.G));
        const CMat A = draw.G * Ginv;  // ZF combiner columns
        std::vector<double> out(p.U);
        for (int u = 0; u < p.U; ++u) {
            double inter = 0.0;
            for (const auto& Gi : draw.cross) inter += (Gi.adjoint() * A.col(u)).squaredNorm();
            out[u] = two_pd / (two_pd * inter + p.noise_var * Ginv(u, u).real());
        }
        return out;
    }
    check_draw(p, draw.G_hat, "G_hat");
    std::vector<double> floor(p.U);
    for (int u = 0; u < p.U; ++u) floor[u] = two_pd * sum_cross_sq(p, u);
    return zf_sinr(draw.G_hat, two_pd, two_pd * mu_n(p) + p.noise_var, 0.0, &floor);
}

std::vector<double> ofdm_sinr(const CMat& A, const CMat& G_hat, const std::vector<double>& err_var, double P,
                              double noise_var)
{
    if (A.rows() != G_hat.rows() || A.cols() != G_hat.cols()) {
        throw InvalidParameter("ofdm_sinr: combiner and channel dimensions differ");
    }
    if (static_cast<Eigen::Index>(err_var.size()) != G_hat.cols()) {
        throw InvalidParameter("ofdm_sinr: one error variance per user is required");
    }
    double es = 0.0;
    for (double e : err_var) es += e;
    const CMat C = A.adjoint() * G_hat;
    const int U = static_cast<int>(G_hat.cols());
    std::vector<double> out(U);
    for (int u = 0; u < U; ++u) {
        double interf = 0.0;
        for (int j = 0; j < U; ++j)
            if (j != u) interf += std::norm(C(u, j));
        const double a2 = A.col(u).squaredNorm();
        out[u] = P * std::norm(C(u, u)) / (P * interf + (P * es + noise_var) * a2);
    }
    return out;
}

UserRates mmse_ergodic_rate(Csi csi, const LinkParams& p, int draws, const RngStream& stream, int threads)
{
    p.validate();
    if (draws < 100) throw InvalidParameter("mmse_ergodic_rate: at least 100 draws are required");
    if (p.scenario() != CellScenario::kSingle) {
        throw InvalidParameter("mmse_ergodic_rate: single-cell parameters required");
    }
    const double two_pd = 2.0 * p.Pd;
    const double c = csi == Csi::kPerfect ? two_pd / p.noise_var : 1.0 / (err_sum(p) + p.noise_var / two_pd);
    // Orthogonal training: Sylvester signs scaled so that B^H B = P_p I.
    const auto signs = sylvester_signs(p.K);
    CMat B(p.K, p.U);
    for (int i = 0; i < p.K; ++i)
        for (int u = 0; u < p.U; ++u) B(i, u) = std::sqrt(two_pd) * static_cast<double>(signs[i][u]);

    std::vector<std::vector<double>> per(draws);
    parallel_for(static_cast<std::size_t>(draws), threads, [&](std::size_t t) {
        RngStream rs = stream.substream(t);
        CMat G = rand_cn_mat(rs, p.N, p.U, 1.0);
        for (int u = 0; u < p.U; ++u) G.col(u) *= std::sqrt(p.beta[u]);
        if (csi == Csi::kPerfect) {
            per[t] = mmse_log_det_rates(G, c);
        } else {
            const CMat Y = receive_training({G}, B, p.noise_var, rs);
            per[t] = mmse_log_det_rates(lmmse_single(Y, B, p.beta, p.noise_var).G_hat, c);
        }
    });
    UserRates out;
    for (int u = 0; u < p.U; ++u) {
        std::vector<double> v(draws);
        for (int t = 0; t < draws; ++t) v[t] = per[t][u];
        out.users.push_back(mean_ci(v));
    }
    return out;
}

double asymptote(const BoundSpec& spec, const LinkParams& p, int u)
{
    check_user(p, u, "asymptote");
    if (spec.scaling == Scaling::kNone) throw InvalidParameter("asymptote: a power-scaling schedule is required");
    const double s2 = p.noise_var;
    const double bu = p.scenario() == CellScenario::kSingle ? p.beta[u] : 1.0;
    const std::string combo = to_string(spec.receiver) + "/" + to_string(spec.csi) + "/" + to_string(spec.scaling) +
                              "/" + to_string(p.scenario());
    if (spec.csi == Csi::kImperfect && spec.scaling == Scaling::kInvN) return 0.0;
    if (spec.receiver == Receiver::kMmse) {
        throw InvalidParameter("asymptote: no stated limit for " + combo);
    }
    if (spec.csi == Csi::kPerfect && spec.scaling == Scaling::kInvN) return log2p1(spec.E * bu / s2);
    if (spec.csi == Csi::kImperfect && spec.scaling == Scaling::kInvSqrtN && p.scenario() == CellScenario::kSingle) {
        const double eb = spec.E * bu;
        return log2p1(static_cast<double>(p.K) * eb * eb / (s2 * s2));
    }
    throw InvalidParameter("asymptote: no stated limit for " + combo);
}

double overhead_factor(Csi csi, const LinkParams& p)
{
    if (csi == Csi::kPerfect) return 1.0;
    if (p.T0 <= p.K) throw InvalidParameter("overhead_factor: T0 must exceed K");
    return static_cast<double>(p.T0 - p.K) / static_cast<double>(p.T0);
}

double sum_rate(const std::vector<double>& rates, Csi csi, const LinkParams& p)
{
    double s = 0.0;
    for (double r : rates) {
        if (!std::isfinite(r)) throw InvalidParameter("sum_rate: non-finite per-user rate");
        s += r;
    }
    return overhead_factor(csi, p) * s;
}

}  // namespace fbmc
