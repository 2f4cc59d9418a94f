#include "fbmc/channel.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>

namespace fbmc {

TapChannel draw_taps(RngStream& stream, int N, int U, int L)
{
    if (L < 1) throw InvalidParameter("draw_taps: L must be >= 1, got " + std::to_string(L));
    if (N < 1 || U < 1) throw InvalidParameter("draw_taps: N and U must be positive");
    TapChannel t;
    t.N = N;
    t.U = U;
    t.L = L;
    t.taps.resize(static_cast<std::size_t>(N) * U * L);
    const double var = 1.0 / L;
    for (auto& g : t.taps) g = stream.cn(var);
    return t;
}

namespace {

void check_beta(const std::vector<double>& beta, int U, const char* who)
{
    if (static_cast<int>(beta.size()) != U) {
        throw InvalidParameter(std::string(who) + ": expected " + std::to_string(U) + " large-scale gains, got " +
                               std::to_string(beta.size()));
    }
    for (double b : beta) {
        if (!(b >= 0.0)) throw InvalidParameter(std::string(who) + ": large-scale gains must be non-negative");
    }
}

}  // namespace

TapChannel scale_users(const TapChannel& taps, const std::vector<double>& beta)
{
    check_beta(beta, taps.U, "scale_users");
    TapChannel out = taps;
    for (int n = 0; n < taps.N; ++n)
        for (int u = 0; u < taps.U; ++u) {
            const double s = std::sqrt(beta[u]);
            for (int l = 0; l < taps.L; ++l) out(n, u, l) *= s;
        }
    return out;
}

CMat cfr_at(const TapChannel& taps, int m, int M, const std::vector<double>& beta)
{
    check_beta(beta, taps.U, "cfr");
    if (M <= 0) throw InvalidParameter("cfr: M must be positive");
    std::vector<cplx> w(taps.L);
    for (int l = 0; l < taps.L; ++l) {
        const long r = (static_cast<long>(m) * l) % M;
        w[l] = std::polar(1.0, -2.0 * kPi * static_cast<double>(r) / M);
    }
    CMat G(taps.N, taps.U);
    for (int n = 0; n < taps.N; ++n)
        for (int u = 0; u < taps.U; ++u) {
            cplx acc{0.0, 0.0};
            for (int l = 0; l < taps.L; ++l) acc += taps(n, u, l) * w[l];
            G(n, u) = acc * std::sqrt(beta[u]);
        }
    return G;
}

std::vector<CMat> cfr(const TapChannel& taps, int M, const std::vector<double>& beta)
{
    std::vector<CMat> out;
    out.reserve(M);
    for (int m = 0; m < M; ++m) out.push_back(cfr_at(taps, m, M, beta));
    return out;
}

double MultiCellGeometry::bs_spacing() const { return std::sqrt(3.0) * radius; }

std::vector<double> MultiCellScene::beta_row(int n, int i) const
{
    std::vector<double> row(U);
    for (int u = 0; u < U; ++u) row[u] = beta(n, i, u);
    return row;
}

std::vector<double> MultiCellScene::gamma(int n) const
{
    std::vector<double> g(U, 1.0);
    for (int i = 0; i < num_cells(); ++i) {
        if (i == n) continue;
        for (int u = 0; u < U; ++u) g[u] += beta(n, i, u);
    }
    return g;
}

double path_gain(double distance, double shadow_db_value, const MultiCellGeometry& geometry)
{
    const double z = std::pow(10.0, shadow_db_value / 10.0);
    return z / std::pow(distance / geometry.inner_radius, geometry.pathloss_exp);
}

std::vector<std::array<double, 2>> hex_bs_positions(const MultiCellGeometry& geometry)
{
    std::vector<std::array<double, 2>> bs;
    bs.push_back({0.0, 0.0});
    const double d = geometry.bs_spacing();
    for (int i = 1; i < geometry.num_cells; ++i) {
        // Ring positions at 30 + 60 k degrees (six neighbours of a flat-topped hexagon).
        const double a = kPi / 6.0 + (i - 1) * kPi / 3.0;
        bs.push_back({d * std::cos(a), d * std::sin(a)});
    }
    return bs;
}

MultiCellScene gen_multicell(RngStream& stream, int U, const MultiCellGeometry& geometry)
{
    if (!(geometry.inner_radius > 0.0) || !(geometry.radius > geometry.inner_radius)) {
        throw InvalidParameter("gen_multicell: need r > r_h > 0");
    }
    if (geometry.num_cells < 1 || geometry.num_cells > 7) {
        throw InvalidParameter("gen_multicell: num_cells must be in [1, 7]");
    }
    if (U < 1) throw InvalidParameter("gen_multicell: U must be positive");
    MultiCellScene s;
    s.geometry = geometry;
    s.U = U;
    s.bs = hex_bs_positions(geometry);
    const int Nc = geometry.num_cells;
    s.users.assign(Nc, std::vector<std::array<double, 2>>(U));
    const double r2lo = geometry.inner_radius * geometry.inner_radius;
    const double r2hi = geometry.radius * geometry.radius;
    for (int i = 0; i < Nc; ++i)
        for (int u = 0; u < U; ++u) {
            const double rad = std::sqrt(r2lo + (r2hi - r2lo) * stream.uniform());
            const double ang = 2.0 * kPi * stream.uniform();
            s.users[i][u] = {s.bs[i][0] + rad * std::cos(ang), s.bs[i][1] + rad * std::sin(ang)};
        }
    s.beta_values.assign(static_cast<std::size_t>(Nc) * Nc * U, 0.0);
    for (int n = 0; n < Nc; ++n)
        for (int i = 0; i < Nc; ++i)
            for (int u = 0; u < U; ++u) {
                const double shadow = geometry.shadow_db * stream.normal();
                if (i == n) {
                    s.beta(n, i, u) = 1.0;
                    continue;
                }
                const double dx = s.users[i][u][0] - s.bs[n][0];
                const double dy = s.users[i][u][1] - s.bs[n][1];
                s.beta(n, i, u) = path_gain(std::hypot(dx, dy), shadow, geometry);
            }
    return s;
}

MultiCellScene uniform_multicell(int num_cells, int U, double cross)
{
    if (num_cells < 1 || U < 1) throw InvalidParameter("uniform_multicell: sizes must be positive");
    if (!(cross >= 0.0)) throw InvalidParameter("uniform_multicell: cross gain must be non-negative");
    MultiCellScene s;
    s.geometry.num_cells = num_cells;
    s.U = U;
    s.beta_values.assign(static_cast<std::size_t>(num_cells) * num_cells * U, cross);
    for (int n = 0; n < num_cells; ++n)
        for (int u = 0; u < U; ++u) s.beta(n, n, u) = 1.0;
    return s;
}

void write_scene(const MultiCellScene& scene, const std::string& path)
{
    nlohmann::json j;
    j["num_cells"] = scene.num_cells();
    j["users_per_cell"] = scene.U;
    j["cell_radius"] = scene.geometry.radius;
    j["inner_radius"] = scene.geometry.inner_radius;
    j["pathloss_exponent"] = scene.geometry.pathloss_exp;
    j["shadowing_db"] = scene.geometry.shadow_db;
    j["bs_spacing"] = scene.geometry.bs_spacing();
    j["bs"] = scene.bs;
    j["users"] = scene.users;
    nlohmann::json beta = nlohmann::json::array();
    for (int n = 0; n < scene.num_cells(); ++n) {
        nlohmann::json per_bs = nlohmann::json::array();
        for (int i = 0; i < scene.num_cells(); ++i) per_bs.push_back(scene.beta_row(n, i));
        beta.push_back(per_bs);
    }
    j["beta"] = beta;  // beta[n][i][u]
    std::ofstream out(path);
    if (!out) throw IoError("write_scene: cannot open " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write_scene: write failed for " + path);
}

std::vector<Samples> propagate(const std::vector<Samples>& user_signals, const TapChannel& taps,
                               double noise_variance, RngStream& stream)
{
    if (static_cast<int>(user_signals.size()) != taps.U) {
        throw InvalidParameter("propagate: " + std::to_string(user_signals.size()) + " user signals for " +
                               std::to_string(taps.U) + " channel users");
    }
    if (noise_variance < 0.0) throw InvalidParameter("propagate: noise variance must be >= 0");
    const std::size_t len = user_signals.empty() ? 0 : user_signals[0].size();
    for (const auto& s : user_signals) {
        if (s.size() != len) throw InvalidParameter("propagate: user signals differ in length");
    }
    const std::size_t out_len = len == 0 ? 0 : len + taps.L - 1;
    std::vector<Samples> y(taps.N, Samples(out_len, cplx{0.0, 0.0}));
    for (int n = 0; n < taps.N; ++n) {
        auto& yn = y[n];
        for (int u = 0; u < taps.U; ++u) {
            const auto& s = user_signals[u];
            for (int l = 0; l < taps.L; ++l) {
                const cplx g = taps(n, u, l);
                if (g == cplx{0.0, 0.0}) continue;
                cplx* dst = yn.data() + l;
                for (std::size_t i = 0; i < len; ++i) dst[i] += g * s[i];
            }
        }
        if (noise_variance > 0.0) {
            for (auto& v : yn) v += stream.cn(noise_variance);
        }
    }
    return y;
}

CVec fd_receive(const CMat& G, const CVec& b, double noise_variance, RngStream& stream)
{
    if (G.cols() != b.size()) {
        throw InvalidParameter("fd_receive: G has " + std::to_string(G.cols()) + " columns, b has " +
                               std::to_string(b.size()) + " entries");
    }
    CVec y = G * b;
    if (noise_variance > 0.0) {
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += stream.cn(noise_variance);
    }
    return y;
}

}  // namespace fbmc
