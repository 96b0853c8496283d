// ropf command-line driver: per-case relaxation solves, base-power-angle
// sweeps, gap tables, envelope reports, and program export.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ropf/conic_io.hpp"
#include "ropf/envelopes.hpp"
#include "ropf/matpower.hpp"
#include "ropf/relaxation.hpp"
#include "ropf/sweep.hpp"

using nlohmann::json;
using namespace ropf;

namespace {

constexpr double kPi = 3.14159265358979323846;

constexpr int kExitOk = 0;
constexpr int kExitSolveFailure = 1;
constexpr int kExitIoError = 2;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << text;
}

std::string case_stem(const std::string& path) {
    size_t slash = path.find_last_of("/\\");
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    size_t dot = base.find_last_of('.');
    return dot == std::string::npos ? base : base.substr(0, dot);
}

NetworkCase load_case(const std::string& path) {
    NetworkCase net = parse_case(slurp(path));
    if (net.name.empty()) net.name = case_stem(path);
    return net;
}

RelaxationKind parse_kind(const std::string& s) {
    if (s == "qc") return RelaxationKind::QC;
    if (s == "rqc") return RelaxationKind::RQC;
    if (s == "trqc") return RelaxationKind::TRQC;
    throw std::runtime_error("unknown relaxation kind: " + s);
}

BuiltRelaxation build_kind(const NetworkCase& net, RelaxationKind kind, double psi_deg) {
    double psi = psi_deg * kPi / 180.0;
    switch (kind) {
    case RelaxationKind::QC: return build_qc(net);
    case RelaxationKind::RQC: return build_rqc(net, psi);
    default: return build_trqc(net, psi);
    }
}

struct PsiRange {
    double lo = -90.0, hi = 90.0, step = 0.5;
};

PsiRange parse_range(const std::string& s) {
    PsiRange r;
    char c1 = 0, c2 = 0;
    if (std::sscanf(s.c_str(), "%lf%c%lf%c%lf", &r.lo, &c1, &r.hi, &c2, &r.step) != 5 ||
        c1 != ':' || c2 != ':' || r.step <= 0.0 || r.hi < r.lo)
        throw std::runtime_error("bad --psi-range, expected lo:hi:step with step > 0: " + s);
    return r;
}

std::string fmt(double v, const char* spec = "%.10g") {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty())
        std::cout << text;
    else
        spill(out_path, text);
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    json doc = json::parse(slurp(path));
    const json& cases = doc.is_array() ? doc : doc.at("cases");
    std::vector<ManifestEntry> out;
    for (const auto& e : cases) {
        ManifestEntry m;
        m.case_path = e.at("case").get<std::string>();
        m.case_name = e.value("name", case_stem(m.case_path));
        m.local_objective = e.at("local_objective").get<double>();
        m.local_source = e.value("source", "unspecified");
        if (e.contains("psi_star_deg")) m.psi_star_deg = e["psi_star_deg"].get<double>();
        out.push_back(std::move(m));
    }
    return out;
}

int cmd_solve(const std::string& case_path, const std::string& kind_str, double psi_deg,
              std::optional<double> local, const std::string& local_source, double tol,
              const std::string& out_path, const std::string& format) {
    NetworkCase net = load_case(case_path);
    RelaxationKind kind = parse_kind(kind_str);
    if (kind == RelaxationKind::QC && psi_deg != 0.0)
        std::cerr << "warning: --psi is ignored for --kind qc\n";
    SolverOptions sopts;
    sopts.feas_tol = sopts.gap_tol = tol;
    BuiltRelaxation rel = build_kind(net, kind, psi_deg);
    RelaxationResult res = solve_relaxation(rel, sopts);
    double gap = local && res.status == SolveStatus::Optimal
                     ? optimality_gap(*local, res.bound)
                     : std::nan("");

    if (format == "json") {
        json j{{"case", net.name},
               {"kind", kind_str},
               {"psi_deg", psi_deg},
               {"status", to_string(res.status)},
               {"bound", res.bound},
               {"iterations", res.iterations},
               {"max_kkt_residual", res.max_kkt_residual},
               {"time_s", res.solve_time_s},
               {"local_source", local ? local_source : ""}};
        if (local) {
            j["local_objective"] = *local;
            j["gap_pct"] = gap * 100.0;
        }
        emit(j.dump(2) + "\n", out_path);
    } else {
        std::ostringstream os;
        os << "case,kind,psi_deg,status,bound,local_objective,local_source,gap_pct,"
              "iterations,kkt,time_s\n";
        os << net.name << ',' << kind_str << ',' << fmt(psi_deg) << ','
           << to_string(res.status) << ',' << fmt(res.bound) << ','
           << (local ? fmt(*local) : "") << ',' << (local ? local_source : "") << ','
           << fmt(gap * 100.0, "%.4f") << ',' << res.iterations << ','
           << fmt(res.max_kkt_residual, "%.3e") << ',' << fmt(res.solve_time_s, "%.3f")
           << '\n';
        emit(os.str(), out_path);
    }
    return res.status == SolveStatus::Optimal ? kExitOk : kExitSolveFailure;
}

int cmd_sweep(const std::string& case_path, const std::string& kind_str,
              const std::string& range_str, double local, int jobs, double tol,
              const std::string& out_path) {
    NetworkCase net = load_case(case_path);
    SweepOptions opts;
    opts.kind = parse_kind(kind_str);
    if (opts.kind == RelaxationKind::QC)
        throw std::runtime_error("sweep requires a rotated kind (rqc or trqc)");
    PsiRange r = parse_range(range_str);
    opts.lo_deg = r.lo;
    opts.hi_deg = r.hi;
    opts.step_deg = r.step;
    opts.jobs = jobs;
    opts.solver.feas_tol = opts.solver.gap_tol = tol;
    SweepResult sw = run_sweep(net, local, opts);

    std::ostringstream os;
    os << "psi_deg,bound,gap,normalized_gap\n";
    for (size_t i = 0; i < sw.psi_deg.size(); ++i)
        os << fmt(sw.psi_deg[i], "%.4f") << ',' << fmt(sw.bound[i]) << ','
           << fmt(sw.gap[i]) << ',' << fmt(sw.normalized_gap[i]) << '\n';
    // empirical symmetry of the gap curve under psi -> -psi
    double sym = 0.0;
    for (size_t i = 0; i < sw.psi_deg.size(); ++i) {
        size_t j = sw.psi_deg.size() - 1 - i;
        if (std::abs(sw.psi_deg[i] + sw.psi_deg[j]) < 1e-9 && std::isfinite(sw.gap[i]) &&
            std::isfinite(sw.gap[j]))
            sym = std::max(sym, std::abs(sw.gap[i] - sw.gap[j]));
    }
    os << "# psi_star_deg=" << fmt(sw.psi_star_deg, "%.4f")
       << " min_gap_pct=" << fmt(sw.min_gap * 100.0, "%.4f")
       << " mirror_gap_max_abs_diff=" << fmt(sym, "%.3e") << '\n';
    emit(os.str(), out_path);
    return std::isfinite(sw.min_gap) ? kExitOk : kExitSolveFailure;
}

int cmd_table(const std::string& manifest_path, int jobs, double tol,
              const std::string& out_path, const std::string& format) {
    std::vector<ManifestEntry> manifest = load_manifest(manifest_path);
    TableOptions opts;
    opts.jobs = jobs;
    opts.solver.feas_tol = opts.solver.gap_tol = tol;

    std::vector<GapTableRow> rows;
    for (const auto& entry : manifest) {
        NetworkCase net = load_case(entry.case_path);
        rows.push_back(run_table_row(net, entry, opts));
    }

    auto pct = [](double g) { return std::isfinite(g) ? fmt(g * 100.0, "%.2f") : ""; };
    std::ostringstream os;
    bool md = format == "md";
    if (md) {
        os << "| case | local obj ($/hr) | source | QC | RQC(0) | RQC(80) | RQC(psi*) | "
              "TRQC(80) | TRQC(psi*) | psi* |\n";
        os << "|---|---|---|---|---|---|---|---|---|---|\n";
    } else {
        os << "case,local_objective,local_source,gap_qc_pct,gap_rqc0_pct,gap_rqc80_pct,"
              "gap_rqc_star_pct,gap_trqc80_pct,gap_trqc_star_pct,psi_star_deg,"
              "time_qc_s,time_rqc80_s,time_trqc80_s\n";
    }
    double sum_qc = 0, sum_rqc80 = 0, sum_trqc80 = 0;
    int complete = 0;
    for (const auto& r : rows) {
        std::string star = r.psi_star_deg ? fmt(*r.psi_star_deg, "%.1f") : "";
        if (md) {
            os << "| " << r.case_name << " | " << fmt(r.local_objective, "%.2f") << " | "
               << r.local_source << " | " << pct(r.gap_qc) << " | " << pct(r.gap_rqc0)
               << " | " << pct(r.gap_rqc80) << " | " << pct(r.gap_rqc_star) << " | "
               << pct(r.gap_trqc80) << " | " << pct(r.gap_trqc_star) << " | " << star
               << " |\n";
        } else {
            os << r.case_name << ',' << fmt(r.local_objective, "%.2f") << ','
               << r.local_source << ',' << pct(r.gap_qc) << ',' << pct(r.gap_rqc0) << ','
               << pct(r.gap_rqc80) << ',' << pct(r.gap_rqc_star) << ','
               << pct(r.gap_trqc80) << ',' << pct(r.gap_trqc_star) << ',' << star << ','
               << fmt(r.time_qc_s, "%.3f") << ',' << fmt(r.time_rqc80_s, "%.3f") << ','
               << fmt(r.time_trqc80_s, "%.3f") << '\n';
        }
        if (std::isfinite(r.gap_qc) && std::isfinite(r.gap_rqc80) &&
            std::isfinite(r.gap_trqc80)) {
            sum_qc += r.gap_qc;
            sum_rqc80 += r.gap_rqc80;
            sum_trqc80 += r.gap_trqc80;
            ++complete;
        }
    }
    if (complete > 0) {
        double imp_rqc = (sum_qc - sum_rqc80) / complete * 100.0;
        double imp_trqc = (sum_qc - sum_trqc80) / complete * 100.0;
        const char* lead = md ? "\n" : "# ";
        os << lead << "avg_improvement_rqc80_vs_qc_pp=" << fmt(imp_rqc, "%.3f") << '\n'
           << (md ? "" : "# ") << "avg_improvement_trqc80_vs_qc_pp=" << fmt(imp_trqc, "%.3f")
           << '\n';
    }
    emit(os.str(), out_path);
    bool all_ok = complete == static_cast<int>(rows.size()) && !rows.empty();
    return rows.empty() || all_ok ? kExitOk : kExitSolveFailure;
}

int cmd_envelope(double lo_deg, double hi_deg, double g, double b, double psi_deg,
                 const std::string& out_path) {
    double lo = lo_deg * kPi / 180.0, hi = hi_deg * kPi / 180.0;
    double psi = psi_deg * kPi / 180.0;
    double y = std::hypot(g, b);
    double delta = std::atan2(b, g);

    TrigEnvelope sine = sine_envelope(lo, hi);
    TrigEnvelope cosine = cosine_envelope(lo, hi);
    DominanceVerdict verdict = dominance_test(lo, hi, delta + psi);

    auto rows_json = [](const TrigEnvelope& env) {
        json rows = json::array();
        for (const auto& r : env.rows)
            rows.push_back({{"f_coef", r.f_coef},
                            {"x_coef", r.x_coef},
                            {"sense", r.sense == Sense::LessEq   ? "<="
                                      : r.sense == Sense::GreaterEq ? ">="
                                                                    : "="},
                            {"rhs", r.rhs}});
        json j{{"x_lo", env.x_lo}, {"x_hi", env.x_hi}, {"rows", rows}};
        if (env.quad)
            j["quad"] = {{"f_sign", env.quad->f_sign},
                         {"k", env.quad->k},
                         {"x0", env.quad->x0},
                         {"r", env.quad->r}};
        return j;
    };

    // sampled boundary curves of the two envelope families: the
    // rectangular-weighted combination g*cos + b*sin versus the polar form
    // Y*cos(theta - delta - psi)
    json samples = json::array();
    int n = 200;
    TrigEnvelope shifted_cos =
        cosine_envelope(lo - delta - psi, hi - delta - psi, EnvelopeFallback::BoxBounds);
    for (int i = 0; i <= n; ++i) {
        double th = lo + (hi - lo) * i / n;
        samples.push_back({{"theta", th},
                           {"rect_exact", g * std::cos(th) + b * std::sin(th)},
                           {"polar_exact", y * std::cos(th - delta - psi)}});
    }

    json j{{"g", g},
           {"b", b},
           {"Y", y},
           {"delta_deg", delta * 180.0 / kPi},
           {"psi_deg", psi_deg},
           {"theta_range_deg", {lo_deg, hi_deg}},
           {"sine_envelope", rows_json(sine)},
           {"cosine_envelope", rows_json(cosine)},
           {"shifted_cosine_envelope", rows_json(shifted_cos)},
           {"samples", samples},
           {"dominance",
            {{"verdict", verdict.verdict == Dominance::LowerBoundaryTighter
                             ? "LowerBoundaryTighter"
                             : verdict.verdict == Dominance::UpperBoundaryTighter
                                   ? "UpperBoundaryTighter"
                                   : "ConditionsNotMet"},
             {"critical_points", verdict.critical_points},
             {"f_mid", verdict.f_mid},
             {"reason", verdict.reason}}}};
    emit(j.dump(2) + "\n", out_path);
    return kExitOk;
}

int cmd_export(const std::string& case_path, const std::string& kind_str, double psi_deg,
               const std::string& format, const std::string& out_path) {
    NetworkCase net = load_case(case_path);
    BuiltRelaxation rel = build_kind(net, parse_kind(kind_str), psi_deg);
    std::string text = format == "json" ? export_conic_json(rel.program)
                                        : export_conic_text(rel.program);
    emit(text, out_path);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"convex relaxations of AC optimal power flow"};
    app.require_subcommand(1);

    std::string case_path, kind = "qc", out_path, format = "csv", range = "-90:90:0.5";
    std::string manifest_path, local_source = "manifest";
    double psi_deg = 0.0, tol = 1e-8;
    std::optional<double> local;
    double local_value = 0.0;
    int jobs = 1;

    auto* solve = app.add_subcommand("solve", "solve one relaxation of one case");
    solve->add_option("case", case_path, "MATPOWER case file")->required();
    solve->add_option("--kind", kind, "qc|rqc|trqc");
    solve->add_option("--psi", psi_deg, "base-power angle (deg)");
    auto* local_opt = solve->add_option("--local", local_value, "local AC objective ($/hr)");
    solve->add_option("--local-source", local_source, "provenance of --local");
    solve->add_option("--tol", tol, "solver tolerance");
    solve->add_option("--out", out_path, "output file (default stdout)");
    solve->add_option("--format", format, "csv|json");

    auto* sweep = app.add_subcommand("sweep", "sweep the base-power angle");
    sweep->add_option("case", case_path, "MATPOWER case file")->required();
    sweep->add_option("--kind", kind, "rqc|trqc")->default_val("rqc");
    sweep->add_option("--psi-range", range, "lo:hi:step in degrees");
    sweep->add_option("--local", local_value, "local AC objective ($/hr)")->required();
    sweep->add_option("--jobs", jobs, "parallel solves");
    sweep->add_option("--tol", tol, "solver tolerance");
    sweep->add_option("--out", out_path, "output CSV (default stdout)");

    auto* table = app.add_subcommand("table", "gap table over a case manifest");
    table->add_option("--manifest", manifest_path, "JSON manifest")->required();
    table->add_option("--jobs", jobs, "parallel solves");
    table->add_option("--tol", tol, "solver tolerance");
    table->add_option("--out", out_path, "output file (default stdout)");
    table->add_option("--format", format, "csv|md");

    double env_lo = -90.0, env_hi = 90.0, env_g = 0.6, env_b = -0.8;
    auto* envl = app.add_subcommand("envelope", "envelope + dominance report");
    envl->add_option("--theta-lo", env_lo, "interval start (deg)");
    envl->add_option("--theta-hi", env_hi, "interval end (deg)");
    envl->add_option("--g", env_g, "series conductance (p.u.)");
    envl->add_option("--b", env_b, "series susceptance (p.u.)");
    envl->add_option("--psi", psi_deg, "base-power angle (deg)");
    envl->add_option("--out", out_path, "output JSON (default stdout)");

    auto* expo = app.add_subcommand("export", "export a built program");
    expo->add_option("case", case_path, "MATPOWER case file")->required();
    expo->add_option("--kind", kind, "qc|rqc|trqc");
    expo->add_option("--psi", psi_deg, "base-power angle (deg)");
    expo->add_option("--format", format, "conic-text|json")->default_val("conic-text");
    expo->add_option("--out", out_path, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*local_opt) local = local_value;
        if (solve->parsed())
            return cmd_solve(case_path, kind, psi_deg, local, local_source, tol, out_path,
                             format);
        if (sweep->parsed())
            return cmd_sweep(case_path, kind, range, local_value, jobs, tol, out_path);
        if (table->parsed()) return cmd_table(manifest_path, jobs, tol, out_path, format);
        if (envl->parsed())
            return cmd_envelope(env_lo, env_hi, env_g, env_b, psi_deg, out_path);
        if (expo->parsed()) return cmd_export(case_path, kind, psi_deg, format, out_path);
    } catch (const CaseFormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIoError;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIoError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSolveFailure;
    }
    return kExitOk;
}
