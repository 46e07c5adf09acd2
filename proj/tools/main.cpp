// fdemult: certify and explore takeoff solution families of a weakly
// singular, sublinear integral equation, with persistent run outputs.
#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fde/analysis.hpp"
#include "fde/errors.hpp"
#include "fde/hypothesis.hpp"
#include "fde/mesh.hpp"
#include "fde/nonlinearity.hpp"
#include "fde/quadrature.hpp"
#include "fde/solver.hpp"
#include "fde/specfun.hpp"

namespace fs = std::filesystem;
using namespace fde;

namespace {

constexpr const char* kToolVersion = "fdemult 1.0.0";
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNumerical = 3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmtg(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Config file: flat key = value lines under [section] headers.

struct Entry {
    std::string value;
    std::size_t line = 0;
};

struct Config {
    std::string path;
    std::vector<std::string> raw;  // verbatim lines for the manifest snapshot
    std::map<std::string, std::map<std::string, Entry>> sections;
    std::map<std::string, std::size_t> section_lines;
};

[[noreturn]] void fail_at(const Config& cfg, std::size_t line, const std::string& msg) {
    throw ConfigError(cfg.path + ":" + std::to_string(line) + ": " + msg);
}

[[noreturn]] void fail_file(const Config& cfg, const std::string& msg) {
    throw ConfigError(cfg.path + ": " + msg);
}

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> k = {
        {"problem", {"beta", "g", "coefficient", "exponent", "table", "absorbed", "convention"}},
        {"mesh", {"n", "grading"}},
        {"solver", {"t_start", "tol", "max_iter", "init"}},
        {"family", {"t_list", "jobs"}},
        {"hypothesis", {"y1", "y2", "t_start", "c1", "c2", "d1", "d2", "lip"}},
    };
    return k;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    Config cfg;
    cfg.path = path;
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        cfg.raw.push_back(line);
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail_at(cfg, lineno, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            if (!known_keys().count(section))
                fail_at(cfg, lineno, "unknown section [" + section + "]");
            cfg.section_lines.emplace(section, lineno);
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            fail_at(cfg, lineno, "expected 'key = value' or '[section]'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) fail_at(cfg, lineno, "empty key");
        if (section.empty())
            fail_at(cfg, lineno, "key '" + key + "' appears before any [section]");
        if (!known_keys().at(section).count(key))
            fail_at(cfg, lineno, "unknown key '" + key + "' in [" + section + "]");
        if (value.empty()) fail_at(cfg, lineno, "key '" + key + "' has an empty value");
        if (!cfg.sections[section].emplace(key, Entry{value, lineno}).second)
            fail_at(cfg, lineno, "duplicate key '" + key + "' in [" + section + "]");
    }
    return cfg;
}

const Entry* find_entry(const Config& cfg, const std::string& sec, const std::string& key) {
    auto s = cfg.sections.find(sec);
    if (s == cfg.sections.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

const Entry& need_entry(const Config& cfg, const std::string& sec, const std::string& key) {
    if (const Entry* e = find_entry(cfg, sec, key)) return *e;
    auto s = cfg.section_lines.find(sec);
    if (s != cfg.section_lines.end())
        fail_at(cfg, s->second, "[" + sec + "] is missing key '" + key + "'");
    fail_file(cfg, "missing section [" + sec + "] (required for key '" + key + "')");
}

double parse_double_entry(const Config& cfg, const Entry& e, const std::string& key) {
    char* end = nullptr;
    const double v = std::strtod(e.value.c_str(), &end);
    if (end != e.value.c_str() + e.value.size() || !std::isfinite(v))
        fail_at(cfg, e.line, "key '" + key + "' expects a finite number, got '" + e.value + "'");
    return v;
}

std::size_t parse_size_entry(const Config& cfg, const Entry& e, const std::string& key) {
    if (!e.value.empty() && e.value[0] == '-')
        fail_at(cfg, e.line, "key '" + key + "' expects a nonnegative integer");
    char* end = nullptr;
    const unsigned long long v = std::strtoull(e.value.c_str(), &end, 10);
    if (end != e.value.c_str() + e.value.size())
        fail_at(cfg, e.line, "key '" + key + "' expects an integer, got '" + e.value + "'");
    return static_cast<std::size_t>(v);
}

bool parse_bool_entry(const Config& cfg, const Entry& e, const std::string& key) {
    if (e.value == "true") return true;
    if (e.value == "false") return false;
    fail_at(cfg, e.line, "key '" + key + "' expects 'true' or 'false'");
}

double need_double(const Config& cfg, const std::string& sec, const std::string& key) {
    return parse_double_entry(cfg, need_entry(cfg, sec, key), key);
}

// ---------------------------------------------------------------------------
// Problem ingestion shared by the subcommands.

struct Problem {
    double beta = 0.5;
    double alpha = 0.5;  // 1 - beta
    std::optional<NonlinearitySpec> g_absorbed;
    std::optional<NonlinearitySpec> g_raw;
    std::optional<ReconstructionConvention> conv;
};

Problem load_problem(const Config& cfg, bool need_g, bool need_conv) {
    Problem p;
    const Entry& b = need_entry(cfg, "problem", "beta");
    p.beta = parse_double_entry(cfg, b, "beta");
    if (!(p.beta >= 0.0 && p.beta < 1.0)) fail_at(cfg, b.line, "beta must lie in [0, 1)");
    p.alpha = 1.0 - p.beta;

    const Entry* g = find_entry(cfg, "problem", "g");
    if (!g && need_g) need_entry(cfg, "problem", "g");  // fails with the anchored message
    if (g) {
        NonlinearitySpec spec;
        if (g->value == "power") {
            const Entry& c = need_entry(cfg, "problem", "coefficient");
            const Entry& d = need_entry(cfg, "problem", "exponent");
            const double cv = parse_double_entry(cfg, c, "coefficient");
            const double dv = parse_double_entry(cfg, d, "exponent");
            if (!(cv > 0.0)) fail_at(cfg, c.line, "coefficient must be positive");
            if (!(dv > 0.0 && dv < 1.0)) fail_at(cfg, d.line, "exponent must lie in (0, 1)");
            spec = make_power_law(cv, dv);
        } else if (g->value == "table") {
            const Entry& t = need_entry(cfg, "problem", "table");
            fs::path tp = t.value;
            if (tp.is_relative()) tp = fs::path(cfg.path).parent_path() / tp;
            try {
                spec = load_table_csv(tp.string());
            } catch (const std::exception& e) {
                fail_at(cfg, t.line, std::string("cannot load table: ") + e.what());
            }
        } else {
            fail_at(cfg, g->line, "key 'g' must be 'power' or 'table'");
        }
        bool absorbed = true;
        if (const Entry* a = find_entry(cfg, "problem", "absorbed"))
            absorbed = parse_bool_entry(cfg, *a, "absorbed");
        try {
            if (absorbed) {
                p.g_absorbed = spec;
                p.g_raw = unabsorb_gamma_constant(spec, p.alpha);
            } else {
                p.g_raw = spec;
                p.g_absorbed = absorb_gamma_constant(spec, p.alpha);
            }
        } catch (const std::exception& e) {
            fail_at(cfg, g->line, e.what());
        }
    }

    const Entry* conv = find_entry(cfg, "problem", "convention");
    if (!conv && need_conv) need_entry(cfg, "problem", "convention");
    if (conv) {
        try {
            p.conv = parse_convention(conv->value);
        } catch (const std::exception&) {
            fail_at(cfg, conv->line,
                    "convention must be 'raw-argument' or 'divided-by-gamma'");
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// Run directories and manifests.

struct CommonOpts {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    unsigned jobs = 0;  // 0 = not set on the command line
    bool quiet = false;
};

struct RunContext {
    fs::path dir;
    std::string run_id;
    std::string created_utc;
    std::string out_base;
    std::string out_source;  // flag | env | default
    std::string subcommand;
    std::uint64_t seed = 0;
    bool quiet = false;
    std::vector<std::string> files;
    std::vector<std::pair<std::string, std::string>> verdicts;
};

RunContext open_run_dir(const std::string& sub, const CommonOpts& opts) {
    RunContext ctx;
    ctx.subcommand = sub;
    ctx.seed = opts.seed;
    ctx.quiet = opts.quiet;
    const char* env = std::getenv("FDEMULT_OUT_DIR");
    if (!opts.out.empty()) {
        ctx.out_base = opts.out;
        ctx.out_source = "flag";
    } else if (env && *env) {
        ctx.out_base = env;
        ctx.out_source = "env";
    } else {
        ctx.out_base = "runs";
        ctx.out_source = "default";
    }
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
    ctx.created_utc = stamp;
    const std::string base_id =
        std::string(stamp) + "-" + sub + "-s" + std::to_string(opts.seed);
    std::string id = base_id;
    for (int k = 2; fs::exists(fs::path(ctx.out_base) / id); ++k) {
        if (k > 1000000) throw std::runtime_error("cannot allocate a fresh run id");
        id = base_id + "-" + std::to_string(k);
    }
    ctx.run_id = id;
    ctx.dir = fs::path(ctx.out_base) / id;
    fs::create_directories(ctx.dir);
    return ctx;
}

void note(RunContext& ctx, const std::string& key, const std::string& value) {
    ctx.verdicts.emplace_back(key, value);
}

void write_manifest(const RunContext& ctx, const Config& cfg, const CommonOpts& opts) {
    std::ofstream out(ctx.dir / "manifest", std::ios::binary);
    out << "run_id=" << ctx.run_id << "\n";
    out << "tool_version=" << kToolVersion << "\n";
    out << "subcommand=" << ctx.subcommand << "\n";
    out << "created_utc=" << ctx.created_utc << "\n";
    out << "seed=" << ctx.seed << "\n";
    out << "out_dir=" << fs::absolute(ctx.out_base).string() << "\n";
    out << "out_dir_source=" << ctx.out_source << "\n";
    out << "config_path=" << opts.config << "\n";
    out << "files=";
    for (std::size_t i = 0; i < ctx.files.size(); ++i)
        out << (i ? "," : "") << ctx.files[i];
    out << "\n";
    for (const auto& [k, v] : ctx.verdicts) out << k << "=" << v << "\n";
    out << "config_lines=" << cfg.raw.size() << "\n";
    for (std::size_t i = 0; i < cfg.raw.size(); ++i)
        out << "config." << i << "=" << cfg.raw[i] << "\n";
}

// ---------------------------------------------------------------------------
// CSV and SVG emission.

void write_solution_csv(const fs::path& path, const GridFunction& y,
                        const GridFunction& x) {
    std::ofstream out(path, std::ios::binary);
    out << "t,y,x\n";
    for (std::size_t i = 0; i < y.mesh.nodes.size(); ++i)
        out << fmt17(y.mesh.nodes[i]) << ',' << fmt17(y.values[i]) << ','
            << fmt17(x.values[i]) << '\n';
}

struct Series {
    std::string label;
    std::vector<double> t;
    std::vector<double> v;
};

void write_svg_plot(const fs::path& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<Series>& series) {
    constexpr double kW = 640.0, kH = 480.0;
    constexpr double kML = 72.0, kMR = 24.0, kMT = 32.0, kMB = 52.0;
    static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                     "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
    double tmin = std::numeric_limits<double>::infinity(), tmax = -tmin;
    double vmin = tmin, vmax = -tmin;
    for (const Series& s : series)
        for (std::size_t i = 0; i < s.t.size(); ++i) {
            tmin = std::min(tmin, s.t[i]);
            tmax = std::max(tmax, s.t[i]);
            vmin = std::min(vmin, s.v[i]);
            vmax = std::max(vmax, s.v[i]);
        }
    if (!(tmin < tmax)) {
        tmin = std::isfinite(tmin) ? tmin - 0.5 : 0.0;
        tmax = tmin + 1.0;
    }
    if (!std::isfinite(vmin) || !std::isfinite(vmax)) {
        vmin = 0.0;
        vmax = 1.0;
    }
    const double pad = (vmax - vmin) > 0.0 ? 0.05 * (vmax - vmin) : 0.5;
    vmin -= pad;
    vmax += pad;

    const double pw = kW - kML - kMR, ph = kH - kMT - kMB;
    auto px = [&](double t) { return kML + (t - tmin) / (tmax - tmin) * pw; };
    auto py = [&](double v) { return kH - kMB - (v - vmin) / (vmax - vmin) * ph; };
    auto num = [](double v) {
        char b[32];
        std::snprintf(b, sizeof b, "%.6g", v);
        return std::string(b);
    };
    auto tick = [](double v) {
        char b[32];
        std::snprintf(b, sizeof b, "%.4g", v);
        return std::string(b);
    };

    std::ofstream out(path, std::ios::binary);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
           "viewBox=\"0 0 640 480\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"#ffffff\"/>\n";
    out << "<text x=\"" << num(kW / 2) << "\" y=\"20\" text-anchor=\"middle\" "
           "font-family=\"monospace\" font-size=\"14\">"
        << xml_escape(title) << "</text>\n";
    for (int i = 0; i <= 4; ++i) {
        const double tv = tmin + i * (tmax - tmin) / 4.0;
        const double vv = vmin + i * (vmax - vmin) / 4.0;
        const double gx = px(tv), gy = py(vv);
        out << "<line x1=\"" << num(gx) << "\" y1=\"" << num(kMT) << "\" x2=\"" << num(gx)
            << "\" y2=\"" << num(kH - kMB) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out << "<line x1=\"" << num(kML) << "\" y1=\"" << num(gy) << "\" x2=\""
            << num(kW - kMR) << "\" y2=\"" << num(gy)
            << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << num(gx) << "\" y=\"" << num(kH - kMB + 18)
            << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">"
            << tick(tv) << "</text>\n";
        out << "<text x=\"" << num(kML - 8) << "\" y=\"" << num(gy + 4)
            << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">"
            << tick(vv) << "</text>\n";
    }
    out << "<rect x=\"" << num(kML) << "\" y=\"" << num(kMT) << "\" width=\"" << num(pw)
        << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#333333\"/>\n";
    out << "<text x=\"" << num(kML + pw / 2) << "\" y=\"" << num(kH - 12)
        << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">"
        << xml_escape(x_label) << "</text>\n";
    out << "<text x=\"18\" y=\"" << num(kMT + ph / 2)
        << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\" "
           "transform=\"rotate(-90 18 "
        << num(kMT + ph / 2) << ")\">" << xml_escape(y_label) << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        out << "<polyline fill=\"none\" stroke=\"" << kPalette[s % 8]
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < series[s].t.size(); ++i) {
            if (i) out << ' ';
            out << num(px(series[s].t[i])) << ',' << num(py(series[s].v[i]));
        }
        out << "\"/>\n";
    }
    if (series.size() > 1 && series.size() <= 12) {
        for (std::size_t s = 0; s < series.size(); ++s) {
            const double ly = kMT + 16.0 + 16.0 * static_cast<double>(s);
            out << "<line x1=\"" << num(kW - kMR - 130) << "\" y1=\"" << num(ly - 4)
                << "\" x2=\"" << num(kW - kMR - 110) << "\" y2=\"" << num(ly - 4)
                << "\" stroke=\"" << kPalette[s % 8] << "\" stroke-width=\"2\"/>\n";
            out << "<text x=\"" << num(kW - kMR - 104) << "\" y=\"" << num(ly)
                << "\" font-family=\"monospace\" font-size=\"11\">"
                << xml_escape(series[s].label) << "</text>\n";
        }
    }
    out << "</svg>\n";
}

// ---------------------------------------------------------------------------
// Subcommands.

int cmd_check(const CommonOpts& opts) {
    const Config cfg = load_config(opts.config);
    const Problem prob = load_problem(cfg, /*need_g=*/false, /*need_conv=*/false);

    const double y1 = need_double(cfg, "hypothesis", "y1");
    const double y2 = need_double(cfg, "hypothesis", "y2");
    const double t = need_double(cfg, "hypothesis", "t_start");
    NonlinearityEnvelope env;
    const Entry& c1 = need_entry(cfg, "hypothesis", "c1");
    const Entry& c2 = need_entry(cfg, "hypothesis", "c2");
    const Entry& d1 = need_entry(cfg, "hypothesis", "d1");
    const Entry& d2 = need_entry(cfg, "hypothesis", "d2");
    env.lower_coef = parse_double_entry(cfg, c1, "c1");
    env.upper_coef = parse_double_entry(cfg, c2, "c2");
    env.lower_exp = parse_double_entry(cfg, d1, "d1");
    env.upper_exp = parse_double_entry(cfg, d2, "d2");
    if (!(env.lower_exp > 0.0 && env.lower_exp < 1.0))
        fail_at(cfg, d1.line, "d1 must lie in (0, 1)");
    if (!(env.upper_exp > 0.0 && env.upper_exp < 1.0))
        fail_at(cfg, d2.line, "d2 must lie in (0, 1)");

    std::string lip_source;
    if (const Entry* lip = find_entry(cfg, "hypothesis", "lip")) {
        env.lip_coef = parse_double_entry(cfg, *lip, "lip");
        lip_source = "config";
    } else {
        if (!prob.g_absorbed)
            fail_file(cfg, "no 'lip' in [hypothesis] and no [problem] g to estimate it from");
        env.lip_coef = estimate_lipschitz_constant(*prob.g_absorbed, env.lower_exp);
        lip_source = "estimated";
    }

    HypothesisCertificate cert;
    try {
        cert = make_certificate(prob.beta, env, y1, y2, t);
    } catch (const std::exception& e) {
        fail_at(cfg, cfg.section_lines.at("hypothesis"), e.what());
    }
    const CertificateReport rep = check_certificate(cert);

    RunContext ctx = open_run_dir("check", opts);
    write_certificate(cert, (ctx.dir / "certificate.txt").string());
    ctx.files.push_back("certificate.txt");

    note(ctx, "pass", rep.pass ? "true" : "false");
    note(ctx, "binding_id", rep.binding_id);
    note(ctx, "binding_expr", rep.binding_expr);
    note(ctx, "min_margin", fmt17(rep.min_margin));
    note(ctx, "lip", fmt17(env.lip_coef));
    note(ctx, "lip_source", lip_source);
    note(ctx, "contraction_k", fmt17(cert.contraction_k));
    for (const ConditionReport& c : rep.conditions) {
        note(ctx, "condition." + c.id + ".pass", c.pass ? "true" : "false");
        note(ctx, "condition." + c.id + ".margin", fmt17(c.margin));
        note(ctx, "condition." + c.id + ".lhs", fmt17(c.lhs));
        note(ctx, "condition." + c.id + ".rhs", fmt17(c.rhs));
    }
    if (prob.g_absorbed) {
        const EnvelopeCheckReport er = check_envelope(*prob.g_absorbed, env);
        note(ctx, "envelope_consistent", er.pass ? "true" : "false");
        note(ctx, "envelope_lower_margin", fmt17(er.lower_margin));
        note(ctx, "envelope_upper_margin", fmt17(er.upper_margin));
        note(ctx, "envelope_samples", std::to_string(er.samples));
    }

    if (!opts.quiet) {
        std::cout << "certificate check: beta=" << fmtg(prob.beta) << " Y1=" << fmtg(y1)
                  << " Y2=" << fmtg(y2) << " T=" << fmtg(t) << " lip=" << fmtg(env.lip_coef)
                  << " (" << lip_source << ")\n";
        for (const ConditionReport& c : rep.conditions) {
            char row[256];
            std::snprintf(row, sizeof row, "  [%s] %-17s %-52s margin=%.6g",
                          c.pass ? "PASS" : "FAIL", c.id.c_str(), c.expr.c_str(), c.margin);
            std::cout << row << "\n";
        }
        std::cout << "verdict: " << (rep.pass ? "PASS" : "FAIL") << " (binding: "
                  << rep.binding_id << ", margin=" << fmtg(rep.min_margin) << ")\n";
        std::cout << "wrote " << (ctx.dir / "certificate.txt").string() << "\n";
    }
    write_manifest(ctx, cfg, opts);
    return rep.pass ? kExitOk : kExitInfeasible;
}

struct SolverParams {
    std::size_t n = 0;
    double grading = 2.0;
    double tol = 0.0;
    std::size_t max_iter = 0;
};

SolverParams load_solver_params(const Config& cfg) {
    SolverParams sp;
    const Entry& n = need_entry(cfg, "mesh", "n");
    sp.n = parse_size_entry(cfg, n, "n");
    if (sp.n < 2) fail_at(cfg, n.line, "mesh n must be at least 2");
    if (const Entry* gr = find_entry(cfg, "mesh", "grading")) {
        sp.grading = parse_double_entry(cfg, *gr, "grading");
        if (!(sp.grading >= 1.0)) fail_at(cfg, gr->line, "grading must be >= 1");
    }
    const Entry& tol = need_entry(cfg, "solver", "tol");
    sp.tol = parse_double_entry(cfg, tol, "tol");
    if (!(sp.tol > 0.0)) fail_at(cfg, tol.line, "tol must be positive");
    const Entry& mi = need_entry(cfg, "solver", "max_iter");
    sp.max_iter = parse_size_entry(cfg, mi, "max_iter");
    if (sp.max_iter == 0) fail_at(cfg, mi.line, "max_iter must be positive");
    return sp;
}

double load_t_start(const Config& cfg) {
    const Entry& t = need_entry(cfg, "solver", "t_start");
    const double v = parse_double_entry(cfg, t, "t_start");
    if (!(v > 0.0 && v < 1.0)) fail_at(cfg, t.line, "t_start must lie in (0, 1)");
    return v;
}

int cmd_solve(const CommonOpts& opts) {
    const Config cfg = load_config(opts.config);
    const Problem prob = load_problem(cfg, /*need_g=*/true, /*need_conv=*/true);
    const SolverParams sp = load_solver_params(cfg);
    const double t_start = load_t_start(cfg);

    InitialIterate init;
    if (const Entry* is = find_entry(cfg, "solver", "init")) {
        if (is->value == "zero") {
            init.kind = InitialIterate::Kind::Zero;
        } else if (is->value == "lower-envelope") {
            init.kind = InitialIterate::Kind::LowerEnvelope;
        } else {
            fail_at(cfg, is->line, "init must be 'zero' or 'lower-envelope'");
        }
    }
    if (init.kind == InitialIterate::Kind::LowerEnvelope &&
        !prob.g_absorbed->is_power_law()) {
        const Entry* is = find_entry(cfg, "solver", "init");
        fail_at(cfg, is ? is->line : cfg.section_lines.at("solver"),
                "init = lower-envelope needs a power-law g (tables admit only the "
                "trivial branch); use init = zero");
    }

    const Mesh mesh = build_graded_mesh(t_start, 1.0, sp.n, sp.grading);
    RunContext ctx = open_run_dir("solve", opts);

    PicardResult res;
    try {
        res = picard_solve(*prob.g_absorbed, prob.beta, t_start, mesh, init, sp.tol,
                           sp.max_iter);
    } catch (const std::exception& e) {
        note(ctx, "error", e.what());
        write_manifest(ctx, cfg, opts);
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    const GridFunction x = reconstruct_x(res.y, prob.alpha, *prob.conv);

    write_solution_csv(ctx.dir / "solution.csv", res.y, x);
    ctx.files.push_back("solution.csv");
    write_trace_csv(res.trace, (ctx.dir / "trace.csv").string());
    ctx.files.push_back("trace.csv");
    write_svg_plot(ctx.dir / "plot.svg",
                   "takeoff solution, T=" + fmtg(t_start) + ", beta=" + fmtg(prob.beta),
                   "t", "value",
                   {Series{"y", res.y.mesh.nodes, res.y.values},
                    Series{"x", x.mesh.nodes, x.values}});
    ctx.files.push_back("plot.svg");

    note(ctx, "converged", res.converged ? "true" : "false");
    note(ctx, "iterations", std::to_string(res.iterations));
    note(ctx, "residual", fmt17(res.residual));
    note(ctx, "beta", fmt17(prob.beta));
    note(ctx, "t_start", fmt17(t_start));
    note(ctx, "convention", convention_name(*prob.conv));
    note(ctx, "y_end", fmt17(res.y.values.back()));
    note(ctx, "x_end", fmt17(x.values.back()));

    if (!opts.quiet) {
        std::cout << "solve: beta=" << fmtg(prob.beta) << " T=" << fmtg(t_start)
                  << " n=" << sp.n << " grading=" << fmtg(sp.grading) << "\n";
        std::cout << (res.converged ? "converged" : "NOT converged") << " after "
                  << res.iterations << " iterations, residual " << fmtg(res.residual)
                  << "\n";
        std::cout << "y(1)=" << fmt17(res.y.values.back())
                  << "  x(1)=" << fmt17(x.values.back()) << "\n";
        std::cout << "wrote " << ctx.dir.string() << "\n";
    }
    write_manifest(ctx, cfg, opts);
    return res.converged ? kExitOk : kExitNumerical;
}

int cmd_family(const CommonOpts& opts) {
    const Config cfg = load_config(opts.config);
    const Problem prob = load_problem(cfg, /*need_g=*/true, /*need_conv=*/true);
    const SolverParams sp = load_solver_params(cfg);

    const Entry& tl = need_entry(cfg, "family", "t_list");
    std::vector<double> t_list;
    {
        std::stringstream ss(tl.value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) fail_at(cfg, tl.line, "t_list has an empty entry");
            char* end = nullptr;
            const double v = std::strtod(item.c_str(), &end);
            if (end != item.c_str() + item.size() || !std::isfinite(v))
                fail_at(cfg, tl.line, "t_list entry '" + item + "' is not a number");
            if (!(v > 0.0 && v < 1.0))
                fail_at(cfg, tl.line, "t_list entries must lie in (0, 1)");
            t_list.push_back(v);
        }
    }
    if (t_list.empty()) fail_at(cfg, tl.line, "t_list must be nonempty");
    for (std::size_t i = 1; i < t_list.size(); ++i)
        if (!(t_list[i] > t_list[i - 1]))
            fail_at(cfg, tl.line, "t_list must be strictly increasing");

    std::size_t jobs = 1;
    if (const Entry* j = find_entry(cfg, "family", "jobs")) {
        jobs = parse_size_entry(cfg, *j, "jobs");
        if (jobs == 0) fail_at(cfg, j->line, "jobs must be positive");
    }
    if (opts.jobs > 0) jobs = opts.jobs;

    RunContext ctx = open_run_dir("family", opts);
    SolutionFamily fam;
    try {
        fam = build_family(*prob.g_absorbed, prob.beta, t_list, sp.n, sp.grading, sp.tol,
                           sp.max_iter, *prob.conv, jobs);
    } catch (const NumericalFailureError& e) {
        note(ctx, "error", e.what());
        write_manifest(ctx, cfg, opts);
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::out_of_range& e) {
        note(ctx, "error", e.what());
        write_manifest(ctx, cfg, opts);
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }

    std::vector<Series> overlay;
    std::vector<std::size_t> failed;
    for (std::size_t i = 0; i < fam.members.size(); ++i) {
        const FamilyMember& m = fam.members[i];
        const std::string name = "member_" + std::to_string(i) + ".csv";
        write_solution_csv(ctx.dir / name, m.y, m.x);
        ctx.files.push_back(name);
        overlay.push_back(Series{"T=" + fmtg(m.t_start), m.x.mesh.nodes, m.x.values});
        if (!m.converged) failed.push_back(i);

        const std::string p = "member." + std::to_string(i);
        note(ctx, p + ".t_start", fmt17(m.t_start));
        note(ctx, p + ".file", name);
        note(ctx, p + ".converged", m.converged ? "true" : "false");
        note(ctx, p + ".iterations", std::to_string(m.iterations));
        note(ctx, p + ".solve_residual", fmt17(m.solve_residual));
        note(ctx, p + ".sup_residual", fmt17(m.residuals.sup_residual));
        note(ctx, p + ".l2_residual", fmt17(m.residuals.l2_residual));
        note(ctx, p + ".caputo_residual", fmt17(m.residuals.caputo_sup_residual));
    }
    write_svg_plot(ctx.dir / "overlay.svg",
                   "takeoff family, beta=" + fmtg(prob.beta) + " (" +
                       convention_name(*prob.conv) + ")",
                   "t", "x", overlay);
    ctx.files.push_back("overlay.svg");

    std::size_t k = 0;
    for (std::size_t i = 0; i < fam.members.size(); ++i)
        for (std::size_t j = i + 1; j < fam.members.size(); ++j, ++k)
            note(ctx,
                 "distance." + std::to_string(i) + "." + std::to_string(j),
                 fmt17(fam.pairwise_distances[k]));
    note(ctx, "all_converged", fam.all_converged ? "true" : "false");
    note(ctx, "distinct", fam.distinct ? "true" : "false");
    if (!failed.empty()) {
        std::string list;
        for (std::size_t i = 0; i < failed.size(); ++i)
            list += (i ? "," : "") + std::to_string(failed[i]);
        note(ctx, "failed_members", list);
    }

    if (!opts.quiet) {
        std::cout << "family: beta=" << fmtg(prob.beta) << " members=" << fam.members.size()
                  << " n=" << sp.n << " jobs=" << jobs << "\n";
        for (const FamilyMember& m : fam.members)
            std::cout << "  T=" << fmtg(m.t_start) << "  "
                      << (m.converged ? "converged" : "FAILED") << " in " << m.iterations
                      << " iterations, caputo residual " << fmtg(m.residuals.caputo_sup_residual)
                      << "\n";
        std::cout << "all_converged=" << (fam.all_converged ? "true" : "false")
                  << " distinct=" << (fam.distinct ? "true" : "false") << "\n";
        std::cout << "wrote " << ctx.dir.string() << "\n";
    }
    write_manifest(ctx, cfg, opts);
    return (fam.all_converged && fam.distinct) ? kExitOk : kExitNumerical;
}

int cmd_oracle(const CommonOpts& opts) {
    const Config cfg = load_config(opts.config);
    const Problem prob = load_problem(cfg, /*need_g=*/true, /*need_conv=*/false);
    if (!prob.g_absorbed->is_power_law()) {
        const Entry* g = find_entry(cfg, "problem", "g");
        fail_at(cfg, g->line, "oracle requires a power-law g");
    }
    const SolverParams sp = load_solver_params(cfg);
    const double t_start = load_t_start(cfg);

    const ClosedFormSolution sol =
        closed_form_power_solution(prob.g_absorbed->power(), prob.beta, t_start);

    RunContext ctx = open_run_dir("oracle", opts);
    struct Rung {
        std::size_t n;
        double err;
        bool converged;
    };
    std::vector<Rung> rungs;
    for (std::size_t m = sp.n; m <= 4 * sp.n; m *= 2) {
        const Mesh mesh = build_graded_mesh(t_start, 1.0, m, sp.grading);
        PicardResult res;
        try {
            res = picard_solve(*prob.g_absorbed, prob.beta, t_start, mesh, InitialIterate{},
                               sp.tol, sp.max_iter);
        } catch (const std::exception& e) {
            note(ctx, "error", e.what());
            write_manifest(ctx, cfg, opts);
            std::cerr << "numerical failure: " << e.what() << "\n";
            return kExitNumerical;
        }
        double err = 0.0;
        for (std::size_t i = 0; i < res.y.values.size(); ++i)
            err = std::max(err, std::fabs(res.y.values[i] - sol.value(mesh.nodes[i])));
        rungs.push_back(Rung{m, err, res.converged});
    }

    {
        std::ofstream out(ctx.dir / "ladder.csv", std::ios::binary);
        out << "n,sup_error,order\n";
        for (std::size_t i = 0; i < rungs.size(); ++i) {
            out << rungs[i].n << ',' << fmt17(rungs[i].err) << ',';
            if (i == 0)
                out << "na";
            else
                out << fmt17(std::log2(rungs[i - 1].err / rungs[i].err));
            out << '\n';
        }
    }
    ctx.files.push_back("ladder.csv");

    bool all_conv = true, decreasing = true;
    for (std::size_t i = 0; i < rungs.size(); ++i) {
        all_conv = all_conv && rungs[i].converged;
        if (i > 0) decreasing = decreasing && rungs[i].err < rungs[i - 1].err;
        const std::string p = "rung." + std::to_string(i);
        note(ctx, p + ".n", std::to_string(rungs[i].n));
        note(ctx, p + ".sup_error", fmt17(rungs[i].err));
        note(ctx, p + ".converged", rungs[i].converged ? "true" : "false");
    }
    note(ctx, "closed_amplitude", fmt17(sol.amplitude));
    note(ctx, "closed_exponent", fmt17(sol.exponent));
    note(ctx, "errors_decreasing", decreasing ? "true" : "false");
    note(ctx, "all_converged", all_conv ? "true" : "false");

    if (!opts.quiet) {
        std::cout << "oracle: y(t) = " << fmtg(sol.amplitude) << " (t - " << fmtg(t_start)
                  << ")^" << fmtg(sol.exponent) << "\n";
        for (std::size_t i = 0; i < rungs.size(); ++i) {
            std::cout << "  n=" << rungs[i].n << "  sup_error=" << fmtg(rungs[i].err);
            if (i > 0)
                std::cout << "  order=" << fmtg(std::log2(rungs[i - 1].err / rungs[i].err));
            std::cout << (rungs[i].converged ? "" : "  NOT converged") << "\n";
        }
        std::cout << "errors_decreasing=" << (decreasing ? "true" : "false") << "\n";
        std::cout << "wrote " << ctx.dir.string() << "\n";
    }
    write_manifest(ctx, cfg, opts);
    return all_conv ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fdemult: certify and explore takeoff solution families of a weakly "
                 "singular sublinear integral equation"};
    app.require_subcommand(1);
    CommonOpts opts;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config, "problem configuration file")->required();
        sub->add_option("--out", opts.out, "parent directory for run outputs");
        sub->add_option("--seed", opts.seed, "seed recorded in the manifest");
        sub->add_option("--jobs", opts.jobs, "concurrent member solves (family)");
        sub->add_flag("--quiet", opts.quiet, "suppress progress output");
    };
    CLI::App* c_check =
        app.add_subcommand("check", "evaluate a solvability certificate");
    CLI::App* c_solve =
        app.add_subcommand("solve", "run the fixed-point iteration for one takeoff time");
    CLI::App* c_family =
        app.add_subcommand("family", "solve a family of takeoff times and compare members");
    CLI::App* c_oracle =
        app.add_subcommand("oracle", "compare the solver against the closed-form solution");
    add_common(c_check);
    add_common(c_solve);
    add_common(c_family);
    add_common(c_oracle);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (c_check->parsed()) return cmd_check(opts);
        if (c_solve->parsed()) return cmd_solve(opts);
        if (c_family->parsed()) return cmd_family(opts);
        if (c_oracle->parsed()) return cmd_oracle(opts);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalFailureError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
