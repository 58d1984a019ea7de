#include "wg/solver.hpp"

#include "wg/greens.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace wg {

std::string to_string(Closure c) { return c == Closure::regularized ? "regularized" : "truncated"; }

Closure parse_closure(const std::string& s)
{
    if (s == "regularized")
        return Closure::regularized;
    if (s == "truncated")
        return Closure::truncated;
    throw std::invalid_argument("unknown closure '" + s + "'");
}

int ScatteringSolution::open_index(const Channel& c) const
{
    auto it = std::find(channels_open.begin(), channels_open.end(), c);
    return it == channels_open.end() ? -1 : static_cast<int>(it - channels_open.begin());
}

namespace {

double max_open_momentum(double E, const ChannelSet& cs)
{
    double k = 0.0;
    for (const auto& c : cs.channels) {
        auto m = channel_momentum(E, c, cs.eta);
        if (m.is_open)
            k = std::max(k, m.magnitude);
    }
    return k;
}

Eigen::MatrixXd johnson(double E, const Eigen::VectorXd& thr, const Eigen::MatrixXd& M, double V0, double r0,
                        double z, int steps)
{
    const int n = static_cast<int>(thr.size());
    const double h = z / steps;
    const Eigen::VectorXd d = 2.0 * (E - thr.array()).matrix();
    const Eigen::MatrixXd M2 = 2.0 * V0 * M;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    auto Q = [&](double x) {
        Eigen::MatrixXd q = M2 * std::exp(-x * x / (r0 * r0));
        q.diagonal() += d;
        return q;
    };
    Eigen::MatrixXd Y = -(h / 3.0) * Q(0.0);
    for (int i = 1; i <= steps; ++i) {
        const Eigen::MatrixXd q = Q(i * h);
        Eigen::MatrixXd U;
        double w;
        if (i == steps) {
            w = 1.0;
            U = q;
        } else if (i % 2) {
            w = 4.0;
            U = (I + (h * h / 6.0) * q).partialPivLu().solve(q);
        } else {
            w = 2.0;
            U = q;
        }
        Y = (I + h * Y).partialPivLu().solve(Y) - (h / 3.0) * w * U;
    }
    return 0.5 * (Y + Y.transpose());
}

int even_steps(double z, double h) { return 2 * std::max(1, static_cast<int>(std::ceil(z / (2.0 * h) - 1e-12))); }

}  // namespace

GridSpec default_grid(double E, const ChannelSet& cs, const GaussianPotential& pot, double z_max)
{
    GridSpec g;
    g.z_max = z_max;
    const double kmax = max_open_momentum(E, cs);
    g.h = pot.r0 / 10.0;
    if (kmax > 0)
        g.h = std::min(g.h, 2.0 * std::numbers::pi / (20.0 * kmax));
    return g;
}

void validate_grid(const GridSpec& g, double E, const ChannelSet& cs, const GaussianPotential& pot)
{
    if (!(g.h > 0) || !(g.z_max > 0) || g.refinement < 2)
        throw GridError("grid needs h > 0, z_max > 0 and refinement >= 2");
    const double kmax = max_open_momentum(E, cs);
    if (g.h > pot.r0 / 10.0 * (1 + 1e-12))
        throw GridError("step " + std::to_string(g.h) + " exceeds r0/10 = " + std::to_string(pot.r0 / 10));
    if (kmax > 0 && g.h > 2.0 * std::numbers::pi / (20.0 * kmax) * (1 + 1e-12))
        throw GridError("step does not resolve the fastest open-channel wavelength");
}

Propagation propagate_logderiv(double E, const ChannelSet& cs, const GaussianPotential& pot, const GridSpec& grid,
                               double eta, double gate)
{
    if (!(grid.h > 0) || !(grid.z_max > 0))
        throw GridError("grid needs h > 0 and z_max > 0");
    for (const auto& c : cs.channels)
        if (channel_momentum(E, c, eta).degenerate)
            throw GridError("energy sits on the threshold of channel " + to_string(c));
    Eigen::VectorXd thr(cs.size());
    for (std::size_t i = 0; i < cs.size(); ++i)
        thr[i] = threshold_energy(cs[i], eta);
    const Eigen::MatrixXd M = transverse_overlap(cs, pot.r0, eta);

    const int coarse = even_steps(grid.z_max, grid.h);
    const int fine = coarse * std::max(grid.refinement, 2);
    const Eigen::MatrixXd Yc = johnson(E, thr, M, pot.V0, pot.r0, grid.z_max, coarse);
    Propagation p;
    p.Y = johnson(E, thr, M, pot.V0, pot.r0, grid.z_max, fine);
    p.z = grid.z_max;
    p.step_discrepancy = (p.Y - Yc).cwiseAbs().maxCoeff() / (1.0 + p.Y.cwiseAbs().maxCoeff());
    if (p.step_discrepancy > gate) {
        std::ostringstream os;
        os << "log-derivative half-step disagreement " << p.step_discrepancy << " above " << gate
           << "; refine h below " << grid.h / 2;
        throw GridError(os.str());
    }
    return p;
}

KMatrix extract_K(const Eigen::MatrixXd& Y, double E, const ChannelSet& cs, double z, double eta)
{
    const int n = static_cast<int>(cs.size());
    KMatrix out;
    std::vector<MomentumValue> mv(n);
    for (int c = 0; c < n; ++c) {
        mv[c] = channel_momentum(E, cs[c], eta);
        if (mv[c].degenerate)
            throw MatchingError("energy sits on the threshold of channel " + to_string(cs[c]));
        if (mv[c].is_open)
            out.open.push_back(c);
    }
    const int no = static_cast<int>(out.open.size());
    if (no == 0)
        throw MatchingError("no open channels at E = " + std::to_string(E));

    // open: cos(kz)/sqrt(k), sin(kz)/sqrt(k); closed: exp(-kappa (z - z_m)) with unit value at z_m
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, no), Ap = A;
    Eigen::VectorXd b(n), bp(n);
    for (int j = 0; j < no; ++j) {
        const int c = out.open[j];
        const double k = mv[c].magnitude, s = std::sqrt(k);
        A(c, j) = std::cos(k * z) / s;
        Ap(c, j) = -k * std::sin(k * z) / s;
    }
    for (int c = 0; c < n; ++c) {
        const double k = mv[c].magnitude;
        if (mv[c].is_open) {
            b[c] = std::sin(k * z) / std::sqrt(k);
            bp[c] = k * std::cos(k * z) / std::sqrt(k);
        } else {
            b[c] = 1.0;
            bp[c] = -k;
        }
    }
    const Eigen::MatrixXd L = Y * b.asDiagonal() - Eigen::MatrixXd(bp.asDiagonal());
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(L);
    if (!(lu.rcond() > 1e-14))
        throw MatchingError("matching system singular at z = " + std::to_string(z));
    const Eigen::MatrixXd X = lu.solve(Ap - Y * A);
    Eigen::MatrixXd K(no, no);
    for (int i = 0; i < no; ++i)
        for (int j = 0; j < no; ++j)
            K(i, j) = X(out.open[i], j);
    const double scale = 1.0 + K.cwiseAbs().maxCoeff();
    out.symmetry_defect = (K - K.transpose()).cwiseAbs().maxCoeff() / scale;
    out.K = 0.5 * (K + K.transpose());
    return out;
}

Amplitudes amplitudes_from_K(const Eigen::MatrixXd& K, const std::vector<double>& k)
{
    const int n = static_cast<int>(K.rows());
    if (K.cols() != n || static_cast<int>(k.size()) != n)
        throw std::invalid_argument("K and momenta sizes disagree");
    for (double v : k)
        if (!(v > 0))
            throw std::invalid_argument("momenta must be positive");
    Amplitudes a;
    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
    const cplx i(0.0, 1.0);
    const Eigen::MatrixXcd Kc = K.cast<cplx>();
    a.pole = !K.allFinite() || (n > 0 && K.cwiseAbs().maxCoeff() > 1e12);
    if (!K.allFinite()) {
        a.S = -I;
    } else {
        // (iI + K) and (iI - K)^{-1} commute
        a.S = (i * I - Kc).partialPivLu().solve(i * I + Kc);
    }
    a.f_norm = 0.5 * (a.S - I);
    a.f = a.f_norm;
    for (int cp = 0; cp < n; ++cp)
        for (int c = 0; c < n; ++c)
            a.f(cp, c) *= std::sqrt(k[c] / k[cp]);
    return a;
}

namespace {

RadialOptions radial_options(const TrapConfig& cfg) { return {cfg.radial_steps_per_r0, 15.0}; }

// Truncated closure: product basis up to n_cut with log-derivative propagation.
void solve_truncated(ScatteringSolution& sol, const ChannelSet& cs, const GaussianPotential& pot,
                     const TrapConfig& cfg, bool enforce)
{
    const double E = sol.E;
    if (pot.V0 == 0.0) {
        // no potential: the even solution is free from the origin, match there
        const Eigen::MatrixXd Y0 = Eigen::MatrixXd::Zero(cs.size(), cs.size());
        const auto km = extract_K(Y0, E, cs, 0.0, cs.eta);
        sol.K = km.K;
        sol.diagnostics.symmetry_defect = km.symmetry_defect;
        sol.diagnostics.inverse_a = INFINITY;
        return;
    }
    double z_match = cfg.z_max;
    if (!cfg.full_range) {
        const double M00 = transverse_overlap(cs, pot.r0, cs.eta).cwiseAbs().maxCoeff();
        const double edge = pot.r0 * std::sqrt(std::max(std::log(2.0 * pot.V0 * M00 / 1e-17), 1.0));
        z_match = std::min(cfg.z_max, edge);
    }
    GridSpec grid = default_grid(E, cs, pot, z_match);
    if (cfg.h > 0)
        grid.h = cfg.h;
    grid.refinement = cfg.refinement;
    if (enforce)
        validate_grid(grid, E, cs, pot);

    KMatrix km;
    Propagation prop;
    for (int attempt = 0;; ++attempt) {
        prop = propagate_logderiv(E, cs, pot, grid, cs.eta, enforce ? cfg.gate : INFINITY);
        try {
            km = extract_K(prop.Y, E, cs, grid.z_max, cs.eta);
            break;
        } catch (const MatchingError&) {
            if (attempt == 3)
                throw;
            grid.z_max += 0.37 * grid.h;
        }
    }
    sol.K = km.K;
    sol.diagnostics.symmetry_defect = km.symmetry_defect;
    sol.diagnostics.grid_defect = prop.step_discrepancy;
    sol.diagnostics.z_match = grid.z_max;
    sol.diagnostics.h = grid.h;
    sol.diagnostics.inverse_a = energy_scattering_length(pot, E, radial_options(cfg)).inverse;
}

// Regularized closure: contact interaction of strength 1/a(E) and the exact closed-channel sum.
void solve_regularized(ScatteringSolution& sol, const GaussianPotential& pot, const TrapConfig& cfg)
{
    const int no = static_cast<int>(sol.channels_open.size());
    Eigen::VectorXd v(no);
    for (int j = 0; j < no; ++j)
        v[j] = std::sqrt(contact_density(sol.channels_open[j], cfg.eta) / sol.k[j]);
    if (pot.V0 == 0.0) {
        sol.K = Eigen::MatrixXd::Zero(no, no);
        sol.diagnostics.inverse_a = INFINITY;
        return;
    }
    const auto sl = energy_scattering_length(pot, sol.E, radial_options(cfg));
    const auto B = closed_channel_sum(sol.E, cfg.eta);
    const double X = sl.inverse / (2.0 * std::numbers::pi) - B.value;
    sol.K = v * v.transpose() / X;
    sol.diagnostics.inverse_a = sl.inverse;
    sol.diagnostics.grid_defect =
        (sl.step_discrepancy / (2.0 * std::numbers::pi) + B.error) / std::hypot(X, v.squaredNorm());
    sol.diagnostics.h = pot.r0 / cfg.radial_steps_per_r0;
}

}  // namespace

ScatteringSolution solve_energy(double E, double V0, const TrapConfig& cfg)
{
    if (!std::isfinite(E))
        throw SolveError("energy is not finite");
    const ChannelSet cs = enumerate_channels(cfg.n_cut, cfg.eta);
    ScatteringSolution sol;
    sol.diagnostics.n_cut = cfg.n_cut;
    sol.diagnostics.closure = cfg.closure;
    sol.diagnostics.V0 = V0;

    // threshold guard over every transverse state below E + 1
    for (int n1 = 0; cfg.eta * (n1 + 0.5) + 0.5 < E + 1.0; n1 += 2)
        for (int n2 = 0; threshold_energy({n1, n2}, cfg.eta) < E + 1.0; n2 += 2)
            if (std::abs(E - threshold_energy({n1, n2}, cfg.eta)) < 1e-9) {
                E = threshold_energy({n1, n2}, cfg.eta) + 1e-9;
                sol.diagnostics.threshold_shifted = true;
            }
    sol.E = E;

    const double beyond = threshold_energy({0, cfg.n_cut + 2}, cfg.eta);
    if (E > beyond)
        throw SolveError("energy " + std::to_string(E) + " opens channels beyond n_cut = " + std::to_string(cfg.n_cut));
    for (const auto& c : cs.channels) {
        auto m = channel_momentum(E, c, cfg.eta);
        if (m.is_open) {
            sol.channels_open.push_back(c);
            sol.k.push_back(m.magnitude);
        }
    }
    if (sol.channels_open.empty())
        throw SolveError("energy " + std::to_string(E) + " below the ground threshold");

    const GaussianPotential pot{V0, cfg.r0};
    if (cfg.closure == Closure::truncated)
        solve_truncated(sol, cs, pot, cfg, cfg.gate < INFINITY);
    else
        solve_regularized(sol, pot, cfg);

    const auto amp = amplitudes_from_K(sol.K, sol.k);
    sol.S = amp.S;
    sol.f = amp.f;
    sol.f_norm = amp.f_norm;
    sol.diagnostics.pole = amp.pole;
    const int no = static_cast<int>(sol.k.size());
    sol.diagnostics.unitarity_defect =
        (sol.S.adjoint() * sol.S - Eigen::MatrixXcd::Identity(no, no)).cwiseAbs().maxCoeff();
    if (sol.diagnostics.grid_defect > cfg.gate) {
        std::ostringstream os;
        os << "grid defect " << sol.diagnostics.grid_defect << " above gate " << cfg.gate
           << " at E = " << E << "; refine the grid";
        throw GridError(os.str());
    }
    return sol;
}

ScatteringSolution solve(double E_par, double ratio, const TrapConfig& cfg, Channel entrance)
{
    if (!(E_par > 0) || !std::isfinite(E_par))
        throw SolveError("collision energy must be positive");
    double V0;
    try {
        V0 = calibrate_depth(ratio, cfg.r0, radial_options(cfg));
    } catch (const std::exception& e) {
        throw SolveError(std::string("ratio ") + std::to_string(ratio) + ": " + e.what());
    }
    const double E = threshold_energy(entrance, cfg.eta) + E_par;
    ScatteringSolution sol;
    try {
        sol = solve_energy(E, V0, cfg);
    } catch (const GridError& e) {
        std::ostringstream os;
        os << "ratio " << ratio << ", E_par " << E_par << ": " << e.what();
        throw GridError(os.str());
    } catch (const std::exception& e) {
        std::ostringstream os;
        os << "ratio " << ratio << ", E_par " << E_par << ": " << e.what();
        throw SolveError(os.str());
    }
    sol.E_par = E_par;
    sol.entrance = entrance;
    if (sol.open_index(entrance) < 0)
        throw SolveError("entrance channel " + to_string(entrance) + " is closed");
    return sol;
}

}  // namespace wg
