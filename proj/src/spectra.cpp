#include "wg/spectra.hpp"

#include "wg/greens.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>

namespace wg {

namespace {

RadialOptions radial_options(const TrapConfig& cfg) { return {cfg.radial_steps_per_r0, 15.0}; }

double calibrated(double ratio, const TrapConfig& cfg) { return calibrate_depth(ratio, cfg.r0, radial_options(cfg)); }

double ground_threshold(double eta) { return threshold_energy({0, 0}, eta); }

// Bound-state condition of the regularized closure: 1/(2 pi a(E)) = closed-channel sum.
double secular(double E, double V0, const TrapConfig& cfg, int steps)
{
    RadialOptions opt = radial_options(cfg);
    opt.steps_per_r0 = steps;
    const double inv = energy_scattering_length({V0, cfg.r0}, E, opt).inverse;
    return inv / (2.0 * std::numbers::pi) - closed_channel_sum(E, cfg.eta).value;
}

std::optional<double> regularized_bound(double V0, const TrapConfig& cfg, int steps)
{
    if (V0 == 0.0)
        return std::nullopt;
    const double E00 = ground_threshold(cfg.eta);
    auto f = [&](double E) { return secular(E, V0, cfg, steps); };
    double hi = E00 - 1e-12, fhi = f(hi);
    double lo = E00 - 1.0, flo = f(lo);
    while (flo > 0) {
        hi = lo;
        fhi = flo;
        lo = E00 - 2.0 * (E00 - lo);
        if (E00 - lo > 4.0 * V0 + 1e4)
            return std::nullopt;
        flo = f(lo);
    }
    if (!(fhi > 0))
        return std::nullopt;
    boost::math::tools::eps_tolerance<double> tol(48);
    std::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, it);
    return 0.5 * (r.first + r.second);
}

// Number of eigenvalues below sigma of the block-tridiagonal finite-difference Hamiltonian.
struct BandHamiltonian {
    Eigen::MatrixXd M;  // transverse overlap
    Eigen::VectorXd thr;
    double V0, r0, h;
    int points;  // unknown rows z_0 .. z_{points-1}, Dirichlet at z_points

    double mass(int i) const { return i == 0 ? 0.5 * h : h; }
    double kin_diag(int i) const { return (i == 0 ? 0.5 / h : 1.0 / h) / mass(i); }
    double coupling(int i) const { return -0.5 / h / std::sqrt(mass(i) * mass(i + 1)); }

    int count_below(double sigma) const
    {
        const int n = static_cast<int>(thr.size());
        Eigen::MatrixXd Dinv = Eigen::MatrixXd::Zero(n, n);
        int neg = 0;
        for (int i = 0; i < points; ++i) {
            const double z = i * h;
            Eigen::MatrixXd D = (-V0 * std::exp(-z * z / (r0 * r0))) * M;
            D.diagonal().array() += thr.array() + kin_diag(i) - sigma;
            if (i > 0) {
                const double c = coupling(i - 1);
                D -= c * c * Dinv;
            }
            Eigen::LDLT<Eigen::MatrixXd> ldlt(D);
            const auto d = ldlt.vectorD();
            for (int k = 0; k < n; ++k)
                if (d[k] < 0)
                    ++neg;
            Dinv = ldlt.solve(Eigen::MatrixXd::Identity(n, n));
        }
        return neg;
    }
};

std::optional<double> band_lowest(const ChannelSet& cs, double V0, const TrapConfig& cfg, double h, double z_max)
{
    BandHamiltonian H;
    H.M = transverse_overlap(cs, cfg.r0, cfg.eta);
    H.thr.resize(cs.size());
    for (std::size_t i = 0; i < cs.size(); ++i)
        H.thr[i] = threshold_energy(cs[i], cfg.eta);
    H.V0 = V0;
    H.r0 = cfg.r0;
    H.points = static_cast<int>(std::ceil(z_max / h - 1e-9));
    H.h = z_max / H.points;
    const double E00 = ground_threshold(cfg.eta);
    if (H.count_below(E00) == 0)
        return std::nullopt;
    double lo = E00 - V0 * H.M.cwiseAbs().rowwise().sum().maxCoeff() - 1.0, hi = E00;
    while (hi - lo > 1e-13 * std::max(1.0, std::abs(lo))) {
        const double mid = 0.5 * (lo + hi);
        if (H.count_below(mid) > 0)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

std::optional<double> truncated_bound(const ChannelSet& cs, double V0, const TrapConfig& cfg, double h, double z_max)
{
    // Richardson on the second-order discretization
    auto a = band_lowest(cs, V0, cfg, h, z_max);
    auto b = band_lowest(cs, V0, cfg, 0.5 * h, z_max);
    if (!a || !b)
        return b;
    return *b + (*b - *a) / 3.0;
}

}  // namespace

BoundState bound_state_energy_for_depth(double V0, const TrapConfig& cfg)
{
    BoundState out;
    const double E00 = ground_threshold(cfg.eta);
    std::optional<double> E, E_half, E_box;
    if (cfg.closure == Closure::regularized) {
        E = regularized_bound(V0, cfg, cfg.radial_steps_per_r0);
        if (E)
            E_half = regularized_bound(V0, cfg, 2 * cfg.radial_steps_per_r0);
        E_box = E;
    } else {
        const ChannelSet cs = enumerate_channels(cfg.n_cut, cfg.eta);
        const double h = cfg.h > 0 ? cfg.h : cfg.r0 / 20.0;
        E = truncated_bound(cs, V0, cfg, h, cfg.z_max);
        if (E) {
            E_half = truncated_bound(cs, V0, cfg, 0.5 * h, cfg.z_max);
            E_box = truncated_bound(cs, V0, cfg, h, cfg.z_max + 5.0);
        }
    }
    if (!E)
        return out;
    out.found = true;
    out.E0 = *E;
    out.E_B = E00 - *E;
    out.step_change = E_half ? std::abs(*E_half - *E) : INFINITY;
    out.box_change = E_box ? std::abs(*E_box - *E) : INFINITY;
    return out;
}

BoundState bound_state_energy(double ratio, const TrapConfig& cfg)
{
    return bound_state_energy_for_depth(calibrated(ratio, cfg), cfg);
}

namespace {

double T00_at(double E, double V0, const TrapConfig& cfg)
{
    return partial_transmission(solve_energy(E, V0, cfg), {0, 0});
}

double im_f00_at(double E, double V0, const TrapConfig& cfg) { return solve_energy(E, V0, cfg).f(0, 0).imag(); }

}  // namespace

ResonanceResult resonance_energy_for_depth(double V0, double E_lo, double E_hi, const TrapConfig& cfg)
{
    ResonanceResult out;
    if (!(E_hi > E_lo) || E_lo < ground_threshold(cfg.eta) - 1e-12)
        throw SpectraError("resonance window must lie above the ground threshold and be ordered");
    constexpr int n = 31;
    double lo = E_lo, hi = E_hi;
    std::vector<double> Es(n), Ts(n);
    int best = -1;
    // zoom towards an edge when the coarse minimum sits on it
    for (int level = 0; level < 6; ++level) {
        for (int i = 0; i < n; ++i) {
            Es[i] = lo + (hi - lo) * (i + 1) / (n + 1);
            Ts[i] = T00_at(Es[i], V0, cfg);
        }
        best = -1;
        for (int i = 1; i < n - 1; ++i)
            if (Ts[i] <= Ts[i - 1] && Ts[i] <= Ts[i + 1] && (best < 0 || Ts[i] < Ts[best]))
                best = i;
        if (best > 0)
            break;
        if (Ts[0] < Ts[n - 1])
            hi = Es[1];
        else
            lo = Es[n - 2];
    }
    if (best < 0) {
        out.note = "no resonance in window";
        return out;
    }
    auto r = boost::math::tools::brent_find_minima([&](double E) { return T00_at(E, V0, cfg); }, Es[best - 1],
                                                   Es[best + 1], 30);
    out.found = true;
    out.E_r = r.first;
    out.T_min = r.second;

    // with only the ground channel open the minimum coincides with a zero of Im f00
    if (E_hi <= std::min(threshold_energy({0, 2}, cfg.eta), threshold_energy({2, 0}, cfg.eta)) + 1e-12) {
        const double a = Es[best - 1], b = Es[best + 1];
        const double fa = im_f00_at(a, V0, cfg), fb = im_f00_at(b, V0, cfg);
        if (fa * fb < 0) {
            boost::math::tools::eps_tolerance<double> tol(40);
            std::uintmax_t it = 100;
            auto z = boost::math::tools::toms748_solve([&](double E) { return im_f00_at(E, V0, cfg); }, a, b, fa, fb,
                                                       tol, it);
            out.im_zero = 0.5 * (z.first + z.second);
        }
    }
    return out;
}

ResonanceResult resonance_energy(double ratio, double E_lo, double E_hi, const TrapConfig& cfg)
{
    return resonance_energy_for_depth(calibrated(ratio, cfg), E_lo, E_hi, cfg);
}

double g1d_indicator(const ScatteringSolution& sol)
{
    const int i = sol.open_index({0, 0});
    if (i < 0)
        throw DomainError("ground channel closed");
    const cplx f = sol.f(i, i);
    return sol.k[i] * f.real() / f.imag();
}

MinimumResult locate_cir(double E_par, const TrapConfig& cfg, Channel entrance, double lo, double hi, int points,
                         double tol)
{
    if (points < 3 || !(hi > lo))
        throw SpectraError("bad ratio scan window");
    auto T = [&](double ratio) { return partial_transmission(solve(E_par, ratio, cfg, entrance), entrance); };
    MinimumResult out;
    std::vector<double> rs(points), Ts(points);
    int best = 0;
    for (int attempt = 0;; ++attempt) {
        for (int i = 0; i < points; ++i) {
            rs[i] = lo + (hi - lo) * i / (points - 1);
            Ts[i] = T(rs[i]);
        }
        best = static_cast<int>(std::min_element(Ts.begin(), Ts.end()) - Ts.begin());
        if (best > 0 && best < points - 1)
            break;
        if (attempt == 1)
            throw SpectraError("transmission minimum stays on the scan boundary at ratio " + std::to_string(rs[best]));
        const double w = hi - lo;
        lo -= 0.5 * w;
        hi += 0.5 * w;
        if (lo <= 0.0)
            lo = 0.05;
        ++out.widenings;
    }
    const int bits = static_cast<int>(std::ceil(1.0 - std::log2(0.1 * tol / std::abs(rs[best]))));
    auto r = boost::math::tools::brent_find_minima(T, rs[best - 1], rs[best + 1], bits);
    out.ratio = r.first;
    out.T = r.second;

    if (entrance == Channel{0, 0}) {
        const auto sol = solve(E_par, out.ratio, cfg, entrance);
        if (sol.channels_open.size() == 1)
            out.g1d = g1d_indicator(sol);
        auto im = [&](double ratio) { return solve(E_par, ratio, cfg, entrance).f(0, 0).imag(); };
        // nearest sign change of Im f00 to the minimum
        std::optional<std::pair<double, double>> bracket;
        double dist = INFINITY;
        double prev = im(rs[0]);
        for (int i = 1; i < points; ++i) {
            const double cur = im(rs[i]);
            if (prev * cur < 0) {
                const double d = std::abs(0.5 * (rs[i - 1] + rs[i]) - out.ratio);
                if (d < dist) {
                    dist = d;
                    bracket = {rs[i - 1], rs[i]};
                }
            }
            prev = cur;
        }
        if (bracket) {
            boost::math::tools::eps_tolerance<double> t(40);
            std::uintmax_t it = 100;
            auto z = boost::math::tools::toms748_solve(im, bracket->first, bracket->second, t, it);
            out.im_zero = 0.5 * (z.first + z.second);
        }
    }
    return out;
}

double weighted_transmission(double ratio, const PopulationWeights& w, double E_par, const TrapConfig& cfg)
{
    const double V0 = calibrated(ratio, cfg);
    double T = 0.0, wsum = 0.0;
    for (const auto& [c, wc] : w.w) {
        if (wc == 0.0)
            continue;
        const auto sol = solve_energy(threshold_energy(c, cfg.eta) + E_par, V0, cfg);
        T += wc * partial_transmission(sol, c);
        wsum += wc;
    }
    if (!(wsum > 0))
        throw DomainError("population weights are all zero");
    return T / wsum;
}

std::vector<LocalMinimum> detect_splitting(double eta, double w2_over_w0, double E_par, const TrapConfig& base,
                                           double lo, double hi, double step)
{
    TrapConfig cfg = base;
    cfg.eta = eta;
    const auto w = PopulationWeights::from_excited_ratio(w2_over_w0);
    auto T = [&](double r) { return weighted_transmission(r, w, E_par, cfg); };
    const int n = static_cast<int>(std::lround((hi - lo) / step)) + 1;
    std::vector<double> rs(n), Ts(n);
    for (int i = 0; i < n; ++i) {
        rs[i] = lo + step * i;
        Ts[i] = T(rs[i]);
    }
    std::vector<LocalMinimum> out;
    for (int i = 1; i < n - 1; ++i) {
        if (Ts[i] < Ts[i - 1] && Ts[i] <= Ts[i + 1]) {
            auto r = boost::math::tools::brent_find_minima(T, rs[i - 1], rs[i + 1], 24);
            out.push_back({r.first, r.second});
        }
    }
    return out;
}

std::vector<EnergyWindow> resonance_windows(double eta)
{
    const ChannelSet cs = enumerate_channels(4, eta);
    const double top = threshold_energy({0, 4}, eta);
    std::vector<EnergyWindow> out;
    double lo = threshold_energy({0, 0}, eta);
    for (const auto& c : cs.channels) {
        const double t = threshold_energy(c, eta);
        if (t <= lo + 1e-12 || t > top + 1e-12)
            continue;
        out.push_back({lo, t, c});
        lo = t;
    }
    return out;
}

std::vector<SpectrumPoint> spectrum_at(double ratio, const TrapConfig& cfg)
{
    const double V0 = calibrated(ratio, cfg);
    std::vector<SpectrumPoint> out;
    const double E00 = ground_threshold(cfg.eta);
    const auto b = bound_state_energy_for_depth(V0, cfg);
    if (b.found)
        out.push_back({cfg.eta, ratio, PointKind::bound, {0, 0}, b.E0, b.E_B});
    for (const auto& w : resonance_windows(cfg.eta)) {
        const auto r = resonance_energy_for_depth(V0, w.lo, w.hi, cfg);
        if (r.found)
            out.push_back({cfg.eta, ratio, PointKind::resonant, w.branch, r.E_r, r.E_r - E00});
    }
    return out;
}

}  // namespace wg
