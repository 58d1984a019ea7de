#include "wg/cli.hpp"

#include "wg/observables.hpp"
#include "wg/spectra.hpp"

#include <CLI11.hpp>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <thread>

namespace wg {

namespace {

constexpr const char* kToolVersion = "1.0.0";

}  // namespace

const std::vector<std::string>& known_commands()
{
    static const std::vector<std::string> c = {"scan-ratio",  "scan-energy", "cir-locate",     "splitting",
                                               "spectrum",    "transitions", "check-unitarity"};
    return c;
}

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.8e", v);
    return buf;
}

RunConfig parse_config(const std::vector<std::string>& args)
{
    RunConfig c;
    CLI::App app{"waveguide scattering scans"};
    app.set_help_flag("--help");
    app.allow_config_extras(false);
    app.set_config("--config", "", "flat key = value file");
    std::string closure = to_string(c.trap.closure);

    app.add_option("command", c.command, "scan-ratio | scan-energy | cir-locate | splitting | spectrum | "
                                         "transitions | check-unitarity");
    app.add_option("--eta", c.trap.eta, "omega1/omega2");
    app.add_option("--r0", c.trap.r0, "Gaussian range");
    app.add_option("--n-cut,--n_cut", c.trap.n_cut, "max n1+n2");
    app.add_option("--z-max,--z_max", c.trap.z_max);
    app.add_option("--h", c.trap.h, "longitudinal step, 0 = default");
    app.add_option("--refinement", c.trap.refinement);
    app.add_option("--radial-steps,--radial_steps", c.trap.radial_steps_per_r0, "radial steps per r0");
    app.add_option("--closure", closure, "regularized | truncated");
    app.add_flag("--full-range,--full_range", c.trap.full_range, "propagate to z_max");
    app.add_option("--gate", c.trap.gate);
    app.add_option("--epar", c.epar, "E_par / E_perp(0)");
    app.add_option("--epar-min,--epar_min", c.epar_min);
    app.add_option("--epar-max,--epar_max", c.epar_max);
    app.add_option("--epar-points,--epar_points", c.epar_points);
    app.add_option("--ratio", c.ratio, "a_perp/a_s");
    app.add_option("--ratio-min,--ratio_min", c.ratio_min);
    app.add_option("--ratio-max,--ratio_max", c.ratio_max);
    app.add_option("--ratio-step,--ratio_step", c.ratio_step);
    app.add_option("--ratio-points,--ratio_points", c.ratio_points);
    app.add_option("--w2-over-w0,--w2_over_w0", c.w2_over_w0);
    app.add_option("--split-min,--split_min", c.split_min);
    app.add_option("--split-max,--split_max", c.split_max);
    app.add_option("--split-step,--split_step", c.split_step);
    app.add_option("--e-min,--e_min", c.e_min, "total energy");
    app.add_option("--e-max,--e_max", c.e_max);
    app.add_option("--e-points,--e_points", c.e_points);
    app.add_option("--n", c.n, "entrance manifold");
    app.add_option("--n-prime,--n_prime", c.n_prime, "final manifold");
    auto* preset = app.add_option("--preset", c.preset, "experiment: E_par = 2.5e-4 E_perp(0)");
    auto* epar = app.get_option("--epar");
    app.add_option("-o,--output", c.output);
    app.add_option("--workers", c.workers);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        throw UsageError(app.help());
    } catch (const CLI::ParseError& e) {
        throw UsageError(std::string(e.get_name()) + ": " + e.what());
    }
    try {
        c.trap.closure = parse_closure(closure);
    } catch (const std::exception& e) {
        throw UsageError(std::string("closure: ") + e.what());
    }
    if (preset->count() || !c.preset.empty()) {
        if (c.preset != "experiment")
            throw UsageError("preset: unknown preset '" + c.preset + "'");
        if (epar->count() == 0)
            c.epar = 2.5e-4;
    }
    validate(c);
    return c;
}

void validate(const RunConfig& c)
{
    auto need = [](bool ok, const std::string& key, const std::string& what) {
        if (!ok)
            throw UsageError(key + ": " + what);
    };
    need(std::find(known_commands().begin(), known_commands().end(), c.command) != known_commands().end(), "command",
         "unknown command '" + c.command + "'");
    need(c.trap.eta >= 1.0, "eta", "must be >= 1");
    need(c.trap.r0 > 0.0, "r0", "must be positive");
    need(c.trap.n_cut >= 0 && c.trap.n_cut % 2 == 0, "n_cut", "must be even and >= 0");
    need(c.trap.z_max > 0.0, "z_max", "must be positive");
    need(c.trap.h >= 0.0, "h", "must be >= 0");
    need(c.trap.refinement >= 2, "refinement", "must be >= 2");
    need(c.trap.radial_steps_per_r0 >= 10, "radial_steps", "must be >= 10");
    need(c.trap.gate > 0.0, "gate", "must be positive");
    need(c.epar > 0.0, "epar", "must be positive");
    need(c.epar_min > 0.0 && c.epar_max > c.epar_min, "epar_min", "need 0 < epar_min < epar_max");
    need(c.epar_points >= 1, "epar_points", "must be >= 1");
    need(c.ratio_max > c.ratio_min, "ratio_min", "must be below ratio_max");
    need(c.ratio_step > 0.0, "ratio_step", "must be positive");
    need(c.ratio_points >= 0, "ratio_points", "must be >= 0");
    need(c.w2_over_w0 >= 0.0 && c.w2_over_w0 <= 0.2, "w2_over_w0", "must lie in [0, 0.2]");
    need(c.split_max > c.split_min && c.split_step > 0.0, "split_step", "need split_min < split_max, step > 0");
    need(c.e_min >= 0.0 && c.e_max >= 0.0, "e_min", "must be >= 0");
    need(c.e_max == 0.0 || c.e_max > c.e_min, "e_max", "must exceed e_min");
    need(c.e_points >= 1, "e_points", "must be >= 1");
    need(c.n >= 0 && c.n % 2 == 0 && c.n_prime >= 0 && c.n_prime % 2 == 0, "n", "manifolds must be even");
    need(c.workers >= 1, "workers", "must be >= 1");
    need(!c.output.empty(), "output", "must not be empty");
}

nlohmann::json to_json(const RunConfig& c)
{
    return {{"command", c.command},
            {"eta", c.trap.eta},
            {"r0", c.trap.r0},
            {"n_cut", c.trap.n_cut},
            {"z_max", c.trap.z_max},
            {"h", c.trap.h},
            {"refinement", c.trap.refinement},
            {"radial_steps", c.trap.radial_steps_per_r0},
            {"closure", to_string(c.trap.closure)},
            {"full_range", c.trap.full_range},
            {"gate", c.trap.gate},
            {"epar", c.epar},
            {"epar_min", c.epar_min},
            {"epar_max", c.epar_max},
            {"epar_points", c.epar_points},
            {"ratio", c.ratio},
            {"ratio_min", c.ratio_min},
            {"ratio_max", c.ratio_max},
            {"ratio_step", c.ratio_step},
            {"ratio_points", c.ratio_points},
            {"w2_over_w0", c.w2_over_w0},
            {"split_min", c.split_min},
            {"split_max", c.split_max},
            {"split_step", c.split_step},
            {"e_min", c.e_min},
            {"e_max", c.e_max},
            {"e_points", c.e_points},
            {"n", c.n},
            {"n_prime", c.n_prime},
            {"preset", c.preset},
            {"output", c.output},
            {"workers", c.workers}};
}

namespace {

struct PointResult {
    std::vector<std::string> rows;
    double defect = 0.0;
    std::string status = "ok";
};

std::string status_of(const std::exception& e)
{
    if (dynamic_cast<const GridError*>(&e))
        return "grid_error";
    if (dynamic_cast<const DomainError*>(&e))
        return "domain_error";
    return "solve_error";
}

std::vector<PointResult> run_points(int n, int workers, const std::function<PointResult(int)>& fn)
{
    std::vector<PointResult> out(n);
    std::atomic<int> next{0};
    auto work = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                out[i] = fn(i);
            } catch (const std::exception& e) {
                out[i].status = status_of(e);
                out[i].defect = NAN;
                out[i].rows.clear();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < std::min(workers, n); ++w)
        pool.emplace_back(work);
    work();
    for (auto& t : pool)
        t.join();
    return out;
}

std::string join(const std::vector<std::string>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + v[i];
    return s;
}

std::vector<double> ratio_axis(const RunConfig& c)
{
    std::vector<double> r;
    if (c.ratio_points > 0) {
        for (int i = 0; i < c.ratio_points; ++i)
            r.push_back(c.ratio_points == 1 ? c.ratio_min
                                            : c.ratio_min + (c.ratio_max - c.ratio_min) * i / (c.ratio_points - 1));
        return r;
    }
    const int n = static_cast<int>(std::floor((c.ratio_max - c.ratio_min) / c.ratio_step + 1e-9)) + 1;
    for (int i = 0; i < n; ++i)
        r.push_back(c.ratio_min + c.ratio_step * i);
    return r;
}

std::vector<double> epar_axis(const RunConfig& c)
{
    std::vector<double> e;
    if (c.epar_points == 1)
        return {c.epar_min};
    for (int i = 0; i < c.epar_points; ++i)
        e.push_back(c.epar_min * std::pow(c.epar_max / c.epar_min, double(i) / (c.epar_points - 1)));
    return e;
}

// Entrance channels of the lowest two manifolds.
std::vector<Channel> entrances(double eta)
{
    std::vector<Channel> out;
    for (const auto& c : enumerate_channels(2, eta).channels)
        out.push_back(c);
    return out;
}

PointResult transmission_rows(const RunConfig& c, double ratio, double epar_rel)
{
    PointResult p;
    const double E_par = epar_rel * threshold_energy({0, 0}, c.trap.eta);
    for (const auto& ch : entrances(c.trap.eta)) {
        std::vector<std::string> row = {format_number(c.trap.eta), format_number(ratio), format_number(epar_rel),
                                        std::to_string(ch.n1), std::to_string(ch.n2)};
        try {
            const auto sol = solve(E_par, ratio, c.trap, ch);
            const double d = std::max(unitarity_defect(sol), sol.diagnostics.grid_defect);
            p.defect = std::max(p.defect, d);
            for (double v : {partial_transmission(sol, ch), reflection(sol, ch), sol.f(0, 0).real(),
                             sol.f(0, 0).imag(), d})
                row.push_back(format_number(v));
            row.push_back("ok");
        } catch (const std::exception& e) {
            for (int i = 0; i < 5; ++i)
                row.push_back("nan");
            row.push_back(status_of(e));
            p.status = status_of(e);
        }
        p.rows.push_back(join(row));
    }
    return p;
}

const char* kTransmissionHeader = "eta,ratio,epar_over_eperp,n1,n2,T,R,ReF00,ImF00,unitarity_defect,status";

}  // namespace

ScanOutput run_scan(const RunConfig& c)
{
    validate(c);
    const auto t0 = std::chrono::steady_clock::now();
    const double eta = c.trap.eta;
    const double E00 = threshold_energy({0, 0}, eta);
    std::string header;
    std::vector<PointResult> pts;
    nlohmann::json notes = nlohmann::json::array();
    notes.push_back("a_perp is defined with omega2 for every eta");
    notes.push_back("energies in units hbar omega2; epar columns are E_par / E_perp(0,0)");

    if (c.command == "scan-ratio") {
        header = kTransmissionHeader;
        const auto rs = ratio_axis(c);
        pts = run_points(static_cast<int>(rs.size()), c.workers,
                         [&](int i) { return transmission_rows(c, rs[i], c.epar); });
    } else if (c.command == "scan-energy") {
        header = kTransmissionHeader;
        const auto es = epar_axis(c);
        pts = run_points(static_cast<int>(es.size()), c.workers,
                         [&](int i) { return transmission_rows(c, c.ratio, es[i]); });
    } else if (c.command == "cir-locate") {
        header = "eta,epar_over_eperp,ratio_star,T_min,im_zero_ratio,g1d,status";
        const std::vector<double> es{c.epar};
        pts = run_points(static_cast<int>(es.size()), c.workers, [&](int i) {
            PointResult p;
            const auto m = locate_cir(es[i] * E00, c.trap, {0, 0}, c.ratio_min, c.ratio_max);
            p.rows.push_back(join({format_number(eta), format_number(es[i]), format_number(m.ratio),
                                   format_number(m.T), format_number(m.im_zero.value_or(NAN)),
                                   format_number(m.g1d.value_or(NAN)), "ok"}));
            return p;
        });
    } else if (c.command == "splitting") {
        header = "eta,w2_over_w0,min_index,ratio_min,T_min";
        notes.push_back("weights: W20 = W02 = (W2/W0)/2 W0, normalized; each entrance at the same E_par");
        pts = run_points(1, 1, [&](int) {
            PointResult p;
            const auto mins = detect_splitting(eta, c.w2_over_w0, c.epar * E00, c.trap, c.split_min,
                                               c.split_max, c.split_step);
            for (std::size_t k = 0; k < mins.size(); ++k)
                p.rows.push_back(join({format_number(eta), format_number(c.w2_over_w0), std::to_string(k),
                                       format_number(mins[k].ratio), format_number(mins[k].T)}));
            return p;
        });
    } else if (c.command == "spectrum") {
        header = "eta,ratio,kind,branch_n1,branch_n2,E,E_B_or_gap";
        const auto rs = ratio_axis(c);
        pts = run_points(static_cast<int>(rs.size()), c.workers, [&](int i) {
            PointResult p;
            for (const auto& s : spectrum_at(rs[i], c.trap))
                p.rows.push_back(join({format_number(eta), format_number(rs[i]),
                                       s.kind == PointKind::bound ? "bound" : "resonant", std::to_string(s.branch.n1),
                                       std::to_string(s.branch.n2), format_number(s.E), format_number(s.E_B_or_gap)}));
            return p;
        });
    } else if (c.command == "transitions") {
        header = "eta,ratio,E,n,n_prime,P,unitarity_defect,status";
        notes.push_back("P_nn' carries the factor 2 for every final manifold");
        const double lo = c.e_max > 0 ? c.e_min : threshold_energy({0, 2}, eta);
        const double hi = c.e_max > 0 ? c.e_max : threshold_energy({0, 4}, eta);
        pts = run_points(c.e_points, c.workers, [&](int i) {
            PointResult p;
            const double E = lo + (hi - lo) * (i + 1) / (c.e_points + 1);
            std::vector<std::string> row = {format_number(eta), format_number(c.ratio), format_number(E),
                                            std::to_string(c.n), std::to_string(c.n_prime)};
            try {
                const double V0 = calibrate_depth(c.ratio, c.trap.r0, {c.trap.radial_steps_per_r0, 15.0});
                const auto sol = solve_energy(E, V0, c.trap);
                p.defect = std::max(unitarity_defect(sol), sol.diagnostics.grid_defect);
                const bool final_open = std::any_of(sol.channels_open.begin(), sol.channels_open.end(),
                                                    [&](const Channel& ch) { return ch.manifold() == c.n_prime; });
                row.push_back(format_number(final_open ? transition_probability(sol, c.n, c.n_prime) : 0.0));
                row.push_back(format_number(p.defect));
                row.push_back("ok");
            } catch (const std::exception& e) {
                row.insert(row.end(), {"nan", "nan", status_of(e)});
                p.status = status_of(e);
            }
            p.rows.push_back(join(row));
            return p;
        });
    } else if (c.command == "check-unitarity") {
        header = "eta,ratio,epar_over_eperp,unitarity_defect,grid_defect,status";
        const int n = 5;
        RunConfig g = c;
        g.epar_points = n;
        const auto es = epar_axis(g);
        pts = run_points(n * n, c.workers, [&](int i) {
            PointResult p;
            const double ratio = c.ratio_min + (c.ratio_max - c.ratio_min) * (i / n) / (n - 1);
            const double e = es[i % n];
            std::vector<std::string> row = {format_number(eta), format_number(ratio), format_number(e)};
            try {
                const auto sol = solve(e * E00, ratio, c.trap);
                p.defect = std::max(unitarity_defect(sol), sol.diagnostics.grid_defect);
                row.push_back(format_number(unitarity_defect(sol)));
                row.push_back(format_number(sol.diagnostics.grid_defect));
                row.push_back(p.defect < c.trap.gate ? "ok" : "gate");
                if (!(p.defect < c.trap.gate))
                    p.status = "gate";
            } catch (const std::exception& ex) {
                row.insert(row.end(), {"nan", "nan", status_of(ex)});
                p.status = status_of(ex);
            }
            p.rows.push_back(join(row));
            return p;
        });
    }

    ScanOutput out;
    out.csv = header + "\n";
    nlohmann::json defects = nlohmann::json::array();
    nlohmann::json statuses = nlohmann::json::array();
    for (const auto& p : pts) {
        for (const auto& r : p.rows)
            out.csv += r + "\n";
        defects.push_back(std::isfinite(p.defect) ? nlohmann::json(p.defect) : nlohmann::json(nullptr));
        statuses.push_back(p.status);
        if (p.status != "ok")
            ++out.failed_points;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.metadata = {{"config", to_json(c)},
                    {"tool_version", kToolVersion},
                    {"point_defects", defects},
                    {"point_status", statuses},
                    {"failed_points", out.failed_points},
                    {"wall_time_s", wall},
                    {"notes", notes}};
    return out;
}

int write_scan(const RunConfig& c, const ScanOutput& out)
{
    std::ofstream csv(c.output, std::ios::binary);
    if (!csv)
        throw std::runtime_error("cannot write " + c.output);
    csv << out.csv;
    std::ofstream meta(c.output + ".json");
    if (!meta)
        throw std::runtime_error("cannot write " + c.output + ".json");
    meta << out.metadata.dump(2) << "\n";
    return out.failed_points ? 1 : 0;
}

}  // namespace wg
