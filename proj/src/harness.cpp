#include "fbmc/harness.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#ifndef FBMC_LAB_BUILD_ID
#define FBMC_LAB_BUILD_ID "unknown"
#endif

namespace fbmc {

using nlohmann::json;

std::string to_string(Mode m)
{
    switch (m) {
    case Mode::kAnalytic: return "analytic";
    case Mode::kWaveform: return "waveform";
    case Mode::kSer: return "ser";
    }
    return "unknown";
}

Mode parse_mode(const std::string& s)
{
    if (s == "analytic") return Mode::kAnalytic;
    if (s == "waveform") return Mode::kWaveform;
    if (s == "ser") return Mode::kSer;
    throw InvalidParameter("mode: unknown value '" + s + "' (expected analytic, waveform or ser)");
}

namespace {

std::string chain_name(ChainKind k)
{
    switch (k) {
    case ChainKind::kAwgn: return "awgn";
    case ChainKind::kFbmc: return "fbmc";
    case ChainKind::kOfdm: return "ofdm";
    }
    return "unknown";
}

ChainKind parse_chain(const std::string& s)
{
    if (s == "fbmc") return ChainKind::kFbmc;
    if (s == "ofdm") return ChainKind::kOfdm;
    if (s == "awgn") return ChainKind::kAwgn;
    throw InvalidParameter("chains: unknown value '" + s + "' (expected fbmc, ofdm or awgn)");
}

std::string modulation_name(Modulation m) { return m == Modulation::kBpsk ? "bpsk" : "qam4"; }

Modulation parse_modulation(const std::string& s)
{
    if (s == "bpsk") return Modulation::kBpsk;
    if (s == "qam4" || s == "4qam") return Modulation::kQam4;
    throw InvalidParameter("modulation: unknown value '" + s + "' (expected bpsk or qam4)");
}

bool is_pow2(int x) { return x > 0 && (x & (x - 1)) == 0; }

void fail(const std::string& field, const std::string& what)
{
    throw InvalidParameter("scenario field '" + field + "': " + what);
}

}  // namespace

void Scenario::validate() const
{
    static const std::map<Mode, std::set<std::string>> sweeps{
        {Mode::kAnalytic, {"N", "power_db", "U"}},
        {Mode::kWaveform, {"L", "power_db", "N"}},
        {Mode::kSer, {"cfo", "power_db"}},
    };
    static const std::set<std::string> series_vars{"", "N", "power_db", "scaling", "cells", "L"};
    if (name.empty() || name.find_first_of("/\\ ") != std::string::npos) {
        fail("name", "must be non-empty without spaces or path separators");
    }
    if (!sweeps.at(mode).count(sweep_var)) fail("sweep.var", "'" + sweep_var + "' is not sweepable in " + to_string(mode) + " mode");
    if (sweep_values.empty()) fail("sweep.values", "must be non-empty");
    for (std::size_t i = 1; i < sweep_values.size(); ++i)
        if (!(sweep_values[i] > sweep_values[i - 1])) fail("sweep.values", "must be strictly increasing");
    if (!series_vars.count(series_var)) fail("series.var", "'" + series_var + "' is not supported");
    if (!series_var.empty() && series_values.empty()) fail("series.values", "must be non-empty when series.var is set");
    if (receivers.empty()) fail("receivers", "must be non-empty");
    if (csi.empty()) fail("csi", "must be non-empty");
    if (N < 1) fail("N", "must be >= 1");
    if (U < 1) fail("U", "must be >= 1");
    if (K < U || !is_pow2(K)) fail("K", "must be a power of two >= U");
    if (M < 8 || !is_pow2(M)) fail("M", "must be a power of two >= 8");
    if (L < 1) fail("L", "must be >= 1");
    if (overlap != 3 && overlap != 4 && overlap != 6 && overlap != 8) fail("overlap", "must be 3, 4, 6 or 8");
    if (T0 <= K) fail("T0", "must exceed K");
    if (!std::isfinite(power_db)) fail("power_db", "must be finite");
    if (!std::isfinite(noise_db)) fail("noise_db", "must be finite");
    if (!std::isfinite(E_db)) fail("E_db", "must be finite");
    if (subcarrier >= M) fail("subcarrier", "must be < M");
    if (cells == CellScenario::kSingle) {
        if (beta.empty()) fail("beta", "must be non-empty for a single cell");
        for (double b : beta)
            if (!(b > 0.0)) fail("beta", "entries must be positive");
        if (static_cast<int>(beta.size()) != U && sweep_var != "U") fail("beta", "must have U entries");
    } else {
        if (std::count(receivers.begin(), receivers.end(), Receiver::kMmse)) {
            fail("receivers", "MMSE is only available for a single cell");
        }
        if (geometry.num_cells < 1 || geometry.num_cells > 7) fail("geometry.num_cells", "must be in [1, 7]");
        if (cross_beta < 0.0 && !(geometry.radius > geometry.inner_radius && geometry.inner_radius > 0.0)) {
            fail("geometry", "need radius > inner_radius > 0");
        }
    }
    if (scaling != Scaling::kNone && sweep_var != "N") fail("scaling", "a power-scaling schedule requires sweep.var = N");
    if (trials < 1) fail("trials", "must be >= 1");
    if (mode == Mode::kAnalytic) {
        if (trials < 100) fail("trials", "rate experiments need at least 100 trials");
    }
    if (mode == Mode::kWaveform) {
        if (trials < 10) fail("trials", "waveform-mode rate experiments need at least 10 trials");
        if (data_half_symbols < 4 || data_half_symbols % 2) fail("data_half_symbols", "must be even and >= 4");
    }
    if (mode == Mode::kSer) {
        if (receivers.size() != 1) fail("receivers", "ser mode takes exactly one receiver");
        if (csi.size() != 1 || csi[0] != Csi::kPerfect) fail("csi", "ser mode assumes perfect CSI");
        if (chains.empty()) fail("chains", "must be non-empty");
        if (ser_symbols < 1) fail("ser_symbols", "must be >= 1");
        if (cells == CellScenario::kMulti && cross_beta < 0.0) fail("cross_beta", "ser mode needs a fixed cross gain");
        if (std::abs(cfo) > 0.5) fail("cfo", "must satisfy |cfo| <= 0.5");
    }
    if (sweep_var == "cfo") {
        for (double v : sweep_values)
            if (std::abs(v) > 0.5) fail("sweep.values", "CFO values must satisfy |cfo| <= 0.5");
    }
}

namespace {

json scenario_json(const Scenario& s)
{
    json j;
    j["name"] = s.name;
    j["mode"] = to_string(s.mode);
    j["cells"] = to_string(s.cells);
    json r = json::array();
    for (auto x : s.receivers) r.push_back(to_string(x));
    j["receivers"] = r;
    json c = json::array();
    for (auto x : s.csi) c.push_back(to_string(x));
    j["csi"] = c;
    j["sweep"] = {{"var", s.sweep_var}, {"values", s.sweep_values}};
    if (!s.series_var.empty()) j["series"] = {{"var", s.series_var}, {"values", s.series_values}};
    j["N"] = s.N;
    j["U"] = s.U;
    j["K"] = s.K;
    j["M"] = s.M;
    j["L"] = s.L;
    j["overlap"] = s.overlap;
    j["T0"] = s.T0;
    j["power_db"] = s.power_db;
    j["noise_db"] = s.noise_db;
    j["beta"] = s.beta;
    j["scaling"] = to_string(s.scaling);
    j["E_db"] = s.E_db;
    j["subcarrier"] = s.subcarrier;
    j["geometry"] = {{"num_cells", s.geometry.num_cells},
                     {"radius", s.geometry.radius},
                     {"inner_radius", s.geometry.inner_radius},
                     {"pathloss_exp", s.geometry.pathloss_exp},
                     {"shadow_db", s.geometry.shadow_db}};
    j["cross_beta"] = s.cross_beta;
    j["data_half_symbols"] = s.data_half_symbols;
    j["modulation"] = modulation_name(s.modulation);
    json ch = json::array();
    for (auto x : s.chains) ch.push_back(chain_name(x));
    j["chains"] = ch;
    j["cfo"] = s.cfo;
    j["ser_symbols"] = s.ser_symbols;
    j["trials"] = s.trials;
    j["seed"] = s.seed;
    if (!s.series_label.empty()) j["series_label"] = s.series_label;
    return j;
}

template <typename T>
T get_field(const json& j, const std::string& key)
{
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(key, std::string("wrong type or value (") + e.what() + ")");
    }
    return T{};
}

}  // namespace

std::string scenario_to_json(const Scenario& s, int indent)
{
    json j = scenario_json(s);
    j["meta"] = {{"build", FBMC_LAB_BUILD_ID},
                 {"power_convention", "power_db is 2P_d in dB relative to 1; noise_db is sigma^2 in dB"},
                 {"random_streams", "trial t uses stream (seed, t)"}};
    return j.dump(indent);
}

Scenario scenario_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidParameter(std::string("scenario: malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw InvalidParameter("scenario: top level must be an object");
    Scenario s;
    static const std::set<std::string> known{
        "name", "mode", "cells", "receivers", "csi", "sweep", "series", "N", "U", "K", "M", "L", "overlap", "T0",
        "power_db", "noise_db", "beta", "scaling", "E_db", "subcarrier", "geometry", "cross_beta",
        "data_half_symbols", "modulation", "chains", "cfo", "ser_symbols", "trials", "seed", "series_label", "meta",
        "threads"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) fail(it.key(), "unknown field");

    if (j.contains("name")) s.name = get_field<std::string>(j, "name");
    if (j.contains("mode")) s.mode = parse_mode(get_field<std::string>(j, "mode"));
    if (j.contains("cells")) s.cells = parse_cell_scenario(get_field<std::string>(j, "cells"));
    if (j.contains("receivers")) {
        s.receivers.clear();
        for (const auto& x : get_field<std::vector<std::string>>(j, "receivers")) s.receivers.push_back(parse_receiver(x));
    }
    if (j.contains("csi")) {
        s.csi.clear();
        for (const auto& x : get_field<std::vector<std::string>>(j, "csi")) s.csi.push_back(parse_csi(x));
    }
    if (j.contains("sweep")) {
        const json& sw = j.at("sweep");
        if (!sw.is_object()) fail("sweep", "must be an object with var and values");
        if (sw.contains("var")) s.sweep_var = get_field<std::string>(sw, "var");
        if (sw.contains("values")) s.sweep_values = get_field<std::vector<double>>(sw, "values");
    }
    if (j.contains("series")) {
        const json& se = j.at("series");
        if (!se.is_object()) fail("series", "must be an object with var and values");
        s.series_var = get_field<std::string>(se, "var");
        s.series_values.clear();
        for (const auto& v : se.at("values")) s.series_values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    }
    if (j.contains("N")) s.N = get_field<int>(j, "N");
    if (j.contains("U")) s.U = get_field<int>(j, "U");
    if (j.contains("K")) s.K = get_field<int>(j, "K");
    if (j.contains("M")) s.M = get_field<int>(j, "M");
    if (j.contains("L")) s.L = get_field<int>(j, "L");
    if (j.contains("overlap")) s.overlap = get_field<int>(j, "overlap");
    if (j.contains("T0")) s.T0 = get_field<int>(j, "T0");
    if (j.contains("power_db")) s.power_db = get_field<double>(j, "power_db");
    if (j.contains("noise_db")) s.noise_db = get_field<double>(j, "noise_db");
    if (j.contains("beta")) s.beta = get_field<std::vector<double>>(j, "beta");
    if (j.contains("scaling")) s.scaling = parse_scaling(get_field<std::string>(j, "scaling"));
    if (j.contains("E_db")) s.E_db = get_field<double>(j, "E_db");
    if (j.contains("subcarrier")) s.subcarrier = get_field<int>(j, "subcarrier");
    if (j.contains("geometry")) {
        const json& g = j.at("geometry");
        if (!g.is_object()) fail("geometry", "must be an object");
        if (g.contains("num_cells")) s.geometry.num_cells = get_field<int>(g, "num_cells");
        if (g.contains("radius")) s.geometry.radius = get_field<double>(g, "radius");
        if (g.contains("inner_radius")) s.geometry.inner_radius = get_field<double>(g, "inner_radius");
        if (g.contains("pathloss_exp")) s.geometry.pathloss_exp = get_field<double>(g, "pathloss_exp");
        if (g.contains("shadow_db")) s.geometry.shadow_db = get_field<double>(g, "shadow_db");
    }
    if (j.contains("cross_beta")) s.cross_beta = get_field<double>(j, "cross_beta");
    if (j.contains("data_half_symbols")) s.data_half_symbols = get_field<int>(j, "data_half_symbols");
    if (j.contains("modulation")) s.modulation = parse_modulation(get_field<std::string>(j, "modulation"));
    if (j.contains("chains")) {
        s.chains.clear();
        for (const auto& x : get_field<std::vector<std::string>>(j, "chains")) s.chains.push_back(parse_chain(x));
    }
    if (j.contains("cfo")) s.cfo = get_field<double>(j, "cfo");
    if (j.contains("ser_symbols")) s.ser_symbols = get_field<int>(j, "ser_symbols");
    if (j.contains("trials")) s.trials = get_field<int>(j, "trials");
    if (j.contains("seed")) s.seed = get_field<std::uint64_t>(j, "seed");
    if (j.contains("threads")) s.threads = get_field<int>(j, "threads");
    if (j.contains("series_label")) s.series_label = get_field<std::string>(j, "series_label");
    s.validate();
    return s;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_json(ss.str());
}

std::vector<std::string> preset_names()
{
    return {"fig2a", "fig2b", "fig3a", "fig3b", "fig5a", "fig5b", "fig6a", "fig6b", "fig8a", "fig9b"};
}

Scenario preset(const std::string& name)
{
    Scenario s;  // defaults follow the simulation-parameter table
    s.name = name;
    const std::vector<double> antennas{16, 32, 64, 128, 256, 512};
    const std::vector<double> powers{-10, -5, 0, 5, 10, 15, 20};
    if (name == "fig2a") {
        s.sweep_var = "N";
        s.sweep_values = antennas;
        s.power_db = 10.0;
    } else if (name == "fig2b") {
        s.sweep_var = "power_db";
        s.sweep_values = powers;
        s.series_var = "N";
        s.series_values = {"64", "256"};
        s.csi = {Csi::kImperfect};
    } else if (name == "fig3a") {
        s.sweep_var = "N";
        s.sweep_values = {16, 32, 64, 128, 256, 512, 1024};
        s.series_var = "scaling";
        s.series_values = {"inv_sqrt_N", "inv_N"};
        s.scaling = Scaling::kInvSqrtN;
        s.E_db = 5.0;
    } else if (name == "fig3b" || name == "fig8a") {
        s.mode = Mode::kWaveform;
        s.cells = name == "fig3b" ? CellScenario::kSingle : CellScenario::kMulti;
        s.N = 128;
        s.M = 64;
        s.sweep_var = "L";
        s.sweep_values = {6, 12, 20, 30, 40};
        s.series_var = "power_db";
        s.series_values = {"10", "-10", "-15"};
        s.receivers = {Receiver::kMrc, Receiver::kZf};
        s.csi = {Csi::kImperfect};
        s.trials = name == "fig3b" ? 40 : 20;
    } else if (name == "fig5a") {
        s.cells = CellScenario::kMulti;
        s.sweep_var = "N";
        s.sweep_values = antennas;
        s.receivers = {Receiver::kMrc, Receiver::kZf};
    } else if (name == "fig5b") {
        s.cells = CellScenario::kMulti;
        s.sweep_var = "power_db";
        s.sweep_values = powers;
        s.series_var = "N";
        s.series_values = {"64", "256"};
        s.receivers = {Receiver::kMrc, Receiver::kZf};
        s.csi = {Csi::kImperfect};
    } else if (name == "fig6a") {
        s.cells = CellScenario::kMulti;
        s.sweep_var = "N";
        s.sweep_values = {16, 32, 64, 128, 256, 512, 1024};
        s.series_var = "scaling";
        s.series_values = {"inv_sqrt_N", "inv_N"};
        s.scaling = Scaling::kInvSqrtN;
        s.E_db = 5.0;
        s.receivers = {Receiver::kMrc, Receiver::kZf};
    } else if (name == "fig6b") {
        s.cells = CellScenario::kMulti;
        s.N = 128;
        s.sweep_var = "U";
        s.sweep_values = {2, 4, 6, 8, 10, 12, 14, 16};
        s.receivers = {Receiver::kMrc, Receiver::kZf};
        s.csi = {Csi::kImperfect};
    } else if (name == "fig9b") {
        s.mode = Mode::kSer;
        s.modulation = Modulation::kBpsk;
        s.power_db = -5.0;
        s.N = 64;
        s.U = 8;
        s.L = 2;
        s.beta.assign(8, 1.0);
        s.cross_beta = 0.1;
        s.receivers = {Receiver::kZf};
        s.csi = {Csi::kPerfect};
        s.sweep_var = "cfo";
        s.sweep_values = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
        s.series_var = "cells";
        s.series_values = {"single", "multi"};
        s.trials = 600;
    } else {
        std::string names;
        for (const auto& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
        throw InvalidParameter("unknown preset '" + name + "' (known: " + names + ")");
    }
    s.validate();
    return s;
}

std::vector<Scenario> expand_series(const Scenario& s)
{
    if (s.series_var.empty()) return {s};
    std::vector<Scenario> out;
    for (const auto& v : s.series_values) {
        Scenario e = s;
        e.series_var.clear();
        e.series_values.clear();
        try {
            if (s.series_var == "N") e.N = std::stoi(v);
            else if (s.series_var == "L") e.L = std::stoi(v);
            else if (s.series_var == "power_db") e.power_db = std::stod(v);
            else if (s.series_var == "scaling") e.scaling = parse_scaling(v);
            else if (s.series_var == "cells") e.cells = parse_cell_scenario(v);
        } catch (const std::logic_error&) {
            fail("series.values", "'" + v + "' is not a valid " + s.series_var);
        }
        std::string label = s.series_var + "_";
        for (char ch : v) label += ch == '-' ? 'm' : ch;
        e.series_label = label;
        e.validate();
        out.push_back(e);
    }
    return out;
}

bool ResultRow::operator==(const ResultRow& o) const
{
    return sweep_var == o.sweep_var && sweep_value == o.sweep_value && receiver == o.receiver && csi == o.csi &&
           rate_sim == o.rate_sim && rate_ci95 == o.rate_ci95 && rate_lb == o.rate_lb && asymptote == o.asymptote &&
           mode == o.mode && seed == o.seed;
}

OutputFormat parse_format(const std::string& s)
{
    if (s == "csv") return OutputFormat::kCsv;
    if (s == "plotdata") return OutputFormat::kPlotData;
    throw InvalidParameter("unknown output format '" + s + "' (expected csv or plotdata)");
}

namespace {

const char* kCsvHeader = "sweep_var,sweep_value,receiver,csi,rate_sim,rate_ci95,rate_lb,asymptote,mode,seed";

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : "na"; }

std::string comment_block(const Scenario& s)
{
    std::stringstream in(scenario_to_json(s));
    std::string out, line;
    while (std::getline(in, line)) out += "# " + line + "\n";
    return out;
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> parts;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

double parse_number(const std::string& t, int line_no)
{
    try {
        std::size_t pos = 0;
        const double v = std::stod(t, &pos);
        if (pos != t.size()) throw std::invalid_argument(t);
        return v;
    } catch (const std::logic_error&) {
        throw InvalidParameter("parse_csv: line " + std::to_string(line_no) + ": '" + t + "' is not a number");
    }
}

std::optional<double> parse_opt(const std::string& t, int line_no)
{
    if (t == "na") return std::nullopt;
    return parse_number(t, line_no);
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace

std::string to_csv(const std::vector<ResultRow>& rows, const Scenario& s)
{
    std::string out = comment_block(s);
    out += kCsvHeader;
    out += "\n";
    for (const auto& r : rows) {
        out += r.sweep_var + "," + num(r.sweep_value) + "," + r.receiver + "," + r.csi + "," + opt(r.rate_sim) + "," +
               opt(r.rate_ci95) + "," + opt(r.rate_lb) + "," + opt(r.asymptote) + "," + r.mode + "," +
               std::to_string(r.seed) + "\n";
    }
    return out;
}

std::vector<ResultRow> parse_csv(const std::string& text)
{
    std::vector<ResultRow> rows;
    std::stringstream in(text);
    std::string line;
    bool header = false;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != kCsvHeader) throw InvalidParameter("parse_csv: unexpected header '" + line + "'");
            header = true;
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 10) {
            throw InvalidParameter("parse_csv: line " + std::to_string(line_no) + " has " + std::to_string(f.size()) +
                                   " fields, expected 10");
        }
        ResultRow r;
        r.sweep_var = f[0];
        r.sweep_value = parse_number(f[1], line_no);
        r.receiver = f[2];
        r.csi = f[3];
        r.rate_sim = parse_opt(f[4], line_no);
        r.rate_ci95 = parse_opt(f[5], line_no);
        r.rate_lb = parse_opt(f[6], line_no);
        r.asymptote = parse_opt(f[7], line_no);
        r.mode = f[8];
        try {
            r.seed = std::stoull(f[9]);
        } catch (const std::logic_error&) {
            throw InvalidParameter("parse_csv: line " + std::to_string(line_no) + ": bad seed");
        }
        rows.push_back(r);
    }
    if (!header) throw InvalidParameter("parse_csv: missing header row");
    return rows;
}

std::vector<std::string> emit(const std::vector<ResultRow>& rows, const Scenario& s, OutputFormat format,
                              const std::string& dir)
{
    if (rows.empty()) throw InvalidParameter("emit: no rows to write");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    const std::string base = (std::filesystem::path(dir) / s.name).string() +
                             (s.series_label.empty() ? "" : "_" + s.series_label);
    std::vector<std::string> paths;
    if (format == OutputFormat::kCsv) {
        paths.push_back(base + ".csv");
        write_file(paths.back(), to_csv(rows, s));
        return paths;
    }
    // Plot data: one file per receiver; one 4-column block per (csi, mode) curve.
    std::vector<std::string> receivers;
    for (const auto& r : rows)
        if (std::find(receivers.begin(), receivers.end(), r.receiver) == receivers.end()) receivers.push_back(r.receiver);
    for (const auto& rx : receivers) {
        std::vector<std::string> curves;
        std::vector<double> xs;
        std::map<std::pair<std::string, double>, const ResultRow*> at;
        for (const auto& r : rows) {
            if (r.receiver != rx) continue;
            const std::string curve = r.csi + ":" + r.mode;
            if (std::find(curves.begin(), curves.end(), curve) == curves.end()) curves.push_back(curve);
            if (std::find(xs.begin(), xs.end(), r.sweep_value) == xs.end()) xs.push_back(r.sweep_value);
            at[{curve, r.sweep_value}] = &r;
        }
        std::string text = comment_block(s);
        text += "# columns: " + rows.front().sweep_var;
        for (const auto& c : curves) text += " " + c + ":sim " + c + ":ci95 " + c + ":lb " + c + ":asymptote";
        text += "\n# missing values are written as na\n";
        for (double x : xs) {
            text += num(x);
            for (const auto& c : curves) {
                auto it = at.find({c, x});
                if (it == at.end()) {
                    text += " na na na na";
                } else {
                    const ResultRow& r = *it->second;
                    text += " " + opt(r.rate_sim) + " " + opt(r.rate_ci95) + " " + opt(r.rate_lb) + " " + opt(r.asymptote);
                }
            }
            text += "\n";
        }
        paths.push_back(base + "_" + rx + ".dat");
        write_file(paths.back(), text);
    }
    return paths;
}

}  // namespace fbmc
