#include "wg/interaction.hpp"

#include "wg/basis.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace wg {

double GaussianPotential::operator()(double r) const { return -V0 * std::exp(-r * r / (r0 * r0)); }

namespace {

struct RadialEnd {
    double u;
    double du;
    double R;
    int nodes;
};

// RK4 for u'' = 2 (V(r) - E) u from u(0) = 0, u'(0) = 1.
RadialEnd integrate_radial(const GaussianPotential& pot, double E, int steps_per_r0, double match_in_r0)
{
    const double R = match_in_r0 * pot.r0;
    const int n = static_cast<int>(std::lround(steps_per_r0 * match_in_r0));
    const double h = R / n;
    auto acc = [&](double r, double u) { return 2.0 * (pot(r) - E) * u; };
    double u = 0.0, du = 1.0;
    int nodes = 0;
    for (int i = 0; i < n; ++i) {
        const double r = i * h;
        const double k1u = du, k1v = acc(r, u);
        const double k2u = du + 0.5 * h * k1v, k2v = acc(r + 0.5 * h, u + 0.5 * h * k1u);
        const double k3u = du + 0.5 * h * k2v, k3v = acc(r + 0.5 * h, u + 0.5 * h * k2u);
        const double k4u = du + h * k3v, k4v = acc(r + h, u + h * k3u);
        const double un = u + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
        du += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
        if (i > 0 && ((u > 0 && un <= 0) || (u < 0 && un >= 0)))
            ++nodes;
        u = un;
    }
    return {u, du, R, nodes};
}

// 1/a(E) from the outer solution written as c1 cos(kr) + c2 sin(kr)/k.
double inverse_from_end(double u, double du, double R, double E)
{
    const double q = std::sqrt(2.0 * std::abs(E));
    double c1, c2;
    if (q * R < 1e-8) {
        c1 = u - du * R;
        c2 = du;
    } else if (E > 0) {
        const double c = std::cos(q * R), s = std::sin(q * R);
        c1 = u * c - du * s / q;
        c2 = q * u * s + du * c;
    } else {
        // u = A exp(qr) + B exp(-qr); cosh/sinh would cancel for large qR. Both scaled by exp(-qR).
        const double s = std::exp(-2.0 * q * R);
        const double A = 0.5 * (u + du / q) * s, B = 0.5 * (u - du / q);
        return -q * (A - B) / (A + B);
    }
    return -c2 / c1;
}

struct Extrapolated {
    double u, du, R, discrepancy;
    int nodes;
};

Extrapolated radial_pair(const GaussianPotential& pot, double E, const RadialOptions& opt)
{
    const auto a = integrate_radial(pot, E, opt.steps_per_r0, opt.match_radius_in_r0);
    const auto b = integrate_radial(pot, E, 2 * opt.steps_per_r0, opt.match_radius_in_r0);
    Extrapolated x;
    x.u = b.u + (b.u - a.u) / 15.0;
    x.du = b.du + (b.du - a.du) / 15.0;
    x.R = b.R;
    x.nodes = b.nodes;
    x.discrepancy = std::abs(inverse_from_end(b.u, b.du, b.R, E) - inverse_from_end(a.u, a.du, a.R, E));
    return x;
}

ScatteringLength make_length(double inv, double discrepancy)
{
    ScatteringLength s;
    s.inverse = inv;
    s.a = 1.0 / inv;
    s.divergent = std::abs(inv) < 1e-8;
    s.step_discrepancy = discrepancy;
    return s;
}

void check_radial_args(double V0, double r0)
{
    if (!(V0 >= 0.0) || !std::isfinite(V0))
        throw std::invalid_argument("potential depth must be finite and >= 0");
    if (!(r0 > 0.0))
        throw std::invalid_argument("potential range must be positive");
}

}  // namespace

ScatteringLength energy_scattering_length(const GaussianPotential& pot, double E, const RadialOptions& opt)
{
    check_radial_args(pot.V0, pot.r0);
    if (pot.V0 == 0.0) {
        ScatteringLength s;
        s.a = 0.0;
        s.inverse = INFINITY;
        return s;
    }
    const auto x = radial_pair(pot, E, opt);
    return make_length(inverse_from_end(x.u, x.du, x.R, E), x.discrepancy);
}

ScatteringLength free_radial_scattering_length(double V0, double r0, const RadialOptions& opt)
{
    return energy_scattering_length({V0, r0}, 0.0, opt);
}

int count_free_bound_states(double V0, double r0, const RadialOptions& opt)
{
    check_radial_args(V0, r0);
    if (V0 == 0.0)
        return 0;
    const auto e = integrate_radial({V0, r0}, 0.0, opt.steps_per_r0, opt.match_radius_in_r0);
    // the linear continuation u + u'(r - R) adds one more node when it crosses zero beyond R
    const bool outer_node = (e.u > 0 && e.du < 0) || (e.u < 0 && e.du > 0);
    return e.nodes + (outer_node ? 1 : 0);
}

namespace {

double edge_depth(double r0, int count_below, double lo, const RadialOptions& opt)
{
    double hi = std::max(lo, 1.0 / (r0 * r0));
    while (count_free_bound_states(hi, r0, opt) <= count_below) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6 / (r0 * r0))
            throw CalibrationError("could not bracket bound-state threshold");
    }
    for (int i = 0; i < 60 && hi - lo > 1e-3 * lo; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (count_free_bound_states(mid, r0, opt) > count_below)
            hi = mid;
        else
            lo = mid;
    }
    // u'(R) changes sign exactly where the count steps
    auto du = [&](double V) { return radial_pair({V, r0}, 0.0, opt).du; };
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(du, lo, hi, tol, it);
    return 0.5 * (r.first + r.second);
}

// Angle of (1/a) along the one-bound-state window, 0 at the lower edge, pi at the upper.
double window_angle(double V, double r0, const RadialOptions& opt)
{
    const auto x = radial_pair({V, r0}, 0.0, opt);
    return std::atan2(-x.du, -(x.R * x.du - x.u));
}

}  // namespace

DepthWindow one_bound_state_window(double r0, const RadialOptions& opt)
{
    static std::mutex mtx;
    static std::map<std::tuple<double, int, double>, DepthWindow> cache;
    const auto key = std::make_tuple(r0, opt.steps_per_r0, opt.match_radius_in_r0);
    {
        std::lock_guard<std::mutex> lock(mtx);
        if (auto it = cache.find(key); it != cache.end())
            return it->second;
    }
    DepthWindow w;
    w.lower = edge_depth(r0, 0, 0.0, opt);
    w.upper = edge_depth(r0, 1, w.lower * 1.01, opt);
    std::lock_guard<std::mutex> lock(mtx);
    cache[key] = w;
    return w;
}

double calibrate_depth(std::optional<double> target_ratio, double r0, const RadialOptions& opt)
{
    const auto w = one_bound_state_window(r0, opt);
    if (!target_ratio)
        return w.lower;
    const double t = *target_ratio;
    if (!std::isfinite(t) || t == 0.0)
        throw CalibrationError("target a_perp/a_s = " + std::to_string(t) +
                               " is unreachable; achievable ratios in the one-bound-state window are "
                               "(-inf, 0) and (0, +inf), use 'resonance' for 1/a_s = 0");
    const double target_angle = t > 0 ? std::atan(t) : std::numbers::pi + std::atan(t);
    auto f = [&](double V) { return window_angle(V, r0, opt) - target_angle; };
    const double span = w.upper - w.lower;
    double lo = w.lower + 1e-9 * span, hi = w.upper - 1e-9 * span;
    double flo = f(lo), fhi = f(hi);
    if (!(flo < 0 && fhi > 0))
        throw CalibrationError("target a_perp/a_s = " + std::to_string(t) +
                               " not bracketed inside depth window [" + std::to_string(w.lower) + ", " +
                               std::to_string(w.upper) + "]");
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, it);
    const double V0 = 0.5 * (r.first + r.second);
    const double got = free_radial_scattering_length(V0, r0, opt).inverse;
    if (std::abs(got - t) > 1e-6 * std::max(1.0, std::abs(t)))
        throw CalibrationError("calibration residual " + std::to_string(std::abs(got - t)) +
                               " exceeds tolerance for target " + std::to_string(t));
    return V0;
}

CalibrationRecord calibration_record(double target_ratio, double r0, const RadialOptions& opt)
{
    const double V0 = calibrate_depth(target_ratio, r0, opt);
    return {target_ratio, V0, free_radial_scattering_length(V0, r0, opt).a, count_free_bound_states(V0, r0, opt)};
}

std::string calibration_csv_header() { return "target_ratio,V0,a_s,bound_count"; }

std::string calibration_csv_row(const CalibrationRecord& r)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.8e,%.8e,%.8e,%d", r.target_ratio, r.V0, r.a_s, r.bound_count);
    return buf;
}

Eigen::MatrixXd transverse_overlap(const ChannelSet& cs, double r0, double eta)
{
    const int n_max = std::max(cs.n_cut, 0);
    const auto& G1 = overlap_table(n_max, r0, eta);
    const auto& G2 = overlap_table(n_max, r0, 1.0);
    const int n = static_cast<int>(cs.size());
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            M(i, j) = G1(cs[i].n1, cs[j].n1) * G2(cs[i].n2, cs[j].n2);
            M(j, i) = M(i, j);
        }
    return M;
}

double coupling_cutoff(const GaussianPotential& pot) { return 20.0 * pot.r0; }

CouplingMatrix coupling_matrix(double z, const ChannelSet& cs, const GaussianPotential& pot, double eta)
{
    CouplingMatrix W;
    W.z = z;
    if (std::abs(z) >= coupling_cutoff(pot) || pot.V0 == 0.0) {
        W.entries = Eigen::MatrixXd::Zero(cs.size(), cs.size());
        return W;
    }
    W.entries = (-pot.V0 * std::exp(-z * z / (pot.r0 * pot.r0))) * transverse_overlap(cs, pot.r0, eta);
    return W;
}

}  // namespace wg
