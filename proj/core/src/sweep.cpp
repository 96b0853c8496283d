#include "ropf/sweep.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace ropf {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double solve_gap(const NetworkCase& net, RelaxationKind kind, double psi_deg,
                 double local_objective, const SolverOptions& sopts,
                 const BuildOptions& bopts, double* time_s = nullptr) {
    try {
        double psi = psi_deg * kPi / 180.0;
        BuiltRelaxation rel = kind == RelaxationKind::QC
                                  ? build_qc(net, bopts)
                                  : kind == RelaxationKind::RQC
                                        ? build_rqc(net, psi, bopts)
                                        : build_trqc(net, psi, bopts);
        RelaxationResult res = solve_relaxation(rel, sopts);
        if (time_s) *time_s = res.solve_time_s;
        if (res.status != SolveStatus::Optimal) return kNan;
        return optimality_gap(local_objective, res.bound);
    } catch (const std::exception&) {
        return kNan;
    }
}

} // namespace

SweepResult run_sweep(const NetworkCase& net, double local_objective,
                      const SweepOptions& opts) {
    if (opts.step_deg <= 0.0) throw std::invalid_argument("sweep step must be positive");
    SweepResult out;
    out.case_name = net.name;
    for (double p = opts.lo_deg; p <= opts.hi_deg + 1e-9; p += opts.step_deg)
        out.psi_deg.push_back(p);
    int n = static_cast<int>(out.psi_deg.size());
    out.bound.assign(n, kNan);
    out.gap.assign(n, kNan);

    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                double psi = out.psi_deg[i] * kPi / 180.0;
                BuiltRelaxation rel = opts.kind == RelaxationKind::TRQC
                                          ? build_trqc(net, psi, opts.build)
                                          : build_rqc(net, psi, opts.build);
                RelaxationResult res = solve_relaxation(rel, opts.solver);
                if (res.status == SolveStatus::Optimal) {
                    out.bound[i] = res.bound;
                    out.gap[i] = optimality_gap(local_objective, res.bound);
                }
            } catch (const std::exception&) {
                // leave the grid point as NaN and keep sweeping
            }
        }
    };
    int jobs = std::max(1, opts.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    double max_gap = -kInf, min_gap = kInf;
    int argmin = -1;
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(out.gap[i])) continue;
        if (out.gap[i] > max_gap) max_gap = out.gap[i];
        if (out.gap[i] < min_gap) {
            min_gap = out.gap[i];
            argmin = i;
        }
    }
    out.normalized_gap.assign(n, kNan);
    if (argmin >= 0 && max_gap != 0.0)
        for (int i = 0; i < n; ++i)
            if (std::isfinite(out.gap[i])) out.normalized_gap[i] = out.gap[i] / max_gap;
    out.psi_star_deg = argmin >= 0 ? out.psi_deg[argmin] : kNan;
    out.min_gap = argmin >= 0 ? min_gap : kNan;
    return out;
}

GapTableRow run_table_row(const NetworkCase& net, const ManifestEntry& entry,
                          const TableOptions& opts) {
    GapTableRow row;
    row.case_name = entry.case_name.empty() ? net.name : entry.case_name;
    row.local_objective = entry.local_objective;
    row.local_source = entry.local_source;
    row.psi_star_deg = entry.psi_star_deg;

    struct Job {
        RelaxationKind kind;
        double psi_deg;
        double* gap;
        double* time;
    };
    row.gap_rqc_star = kNan;
    row.gap_trqc_star = kNan;
    std::vector<Job> jobs = {
        {RelaxationKind::QC, 0.0, &row.gap_qc, &row.time_qc_s},
        {RelaxationKind::RQC, 0.0, &row.gap_rqc0, nullptr},
        {RelaxationKind::RQC, 80.0, &row.gap_rqc80, &row.time_rqc80_s},
        {RelaxationKind::TRQC, 80.0, &row.gap_trqc80, &row.time_trqc80_s},
    };
    if (entry.psi_star_deg) {
        jobs.push_back({RelaxationKind::RQC, *entry.psi_star_deg, &row.gap_rqc_star, nullptr});
        jobs.push_back(
            {RelaxationKind::TRQC, *entry.psi_star_deg, &row.gap_trqc_star, nullptr});
    }

    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1))
            *jobs[i].gap = solve_gap(net, jobs[i].kind, jobs[i].psi_deg,
                                     entry.local_objective, opts.solver, opts.build,
                                     jobs[i].time);
    };
    int nthreads = std::max(1, std::min<int>(opts.jobs, static_cast<int>(jobs.size())));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return row;
}

} // namespace ropf
