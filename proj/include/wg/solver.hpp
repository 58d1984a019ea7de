#pragma once

#include "wg/channels.hpp"
#include "wg/config.hpp"
#include "wg/interaction.hpp"

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace wg {

using cplx = std::complex<double>;

struct GridSpec {
    double z_max = 15.0;
    double h = 0.0;
    int refinement = 2;
};

class GridError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};
class MatchingError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};
class SolveError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Default step: min(r0/10, lambda_min/20).
GridSpec default_grid(double E, const ChannelSet& cs, const GaussianPotential& pot, double z_max);
void validate_grid(const GridSpec& g, double E, const ChannelSet& cs, const GaussianPotential& pot);

struct Propagation {
    Eigen::MatrixXd Y;
    double z = 0.0;
    double step_discrepancy = 0.0;  // max |Y(h) - Y(h/refinement)| / (1 + max|Y|)
};

// Log-derivative matrix at grid.z_max of the even solutions (u'(0) = 0).
Propagation propagate_logderiv(double E, const ChannelSet& cs, const GaussianPotential& pot,
                               const GridSpec& grid, double eta, double gate = 1e-6);

struct KMatrix {
    Eigen::MatrixXd K;
    std::vector<int> open;  // indices into the channel set
    double symmetry_defect = 0.0;
};

KMatrix extract_K(const Eigen::MatrixXd& Y, double E, const ChannelSet& cs, double z, double eta);

struct Amplitudes {
    Eigen::MatrixXcd S;
    Eigen::MatrixXcd f_norm;  // (S - I)/2, momentum normalized
    Eigen::MatrixXcd f;       // f(c', c) = sqrt(k_c/k_c') f_norm(c', c)
    bool pole = false;
};

Amplitudes amplitudes_from_K(const Eigen::MatrixXd& K, const std::vector<double>& k);

struct Diagnostics {
    double unitarity_defect = 0.0;  // max |S^dag S - I|
    double symmetry_defect = 0.0;
    double grid_defect = 0.0;
    int n_cut = 0;
    Closure closure = Closure::regularized;
    double V0 = 0.0;
    double inverse_a = 0.0;  // 1/a at the energy the interaction sees
    double z_match = 0.0;
    double h = 0.0;
    bool threshold_shifted = false;
    bool pole = false;
};

struct ScatteringSolution {
    double E = 0.0;
    double E_par = 0.0;
    Channel entrance;
    std::vector<Channel> channels_open;
    std::vector<double> k;
    Eigen::MatrixXd K;
    Eigen::MatrixXcd S;
    Eigen::MatrixXcd f;       // physical amplitudes, f(c', c): c -> c'
    Eigen::MatrixXcd f_norm;  // momentum normalized
    Diagnostics diagnostics;

    int open_index(const Channel& c) const;  // -1 if closed
};

// Calibrates the depth for ratio = a_perp/a_s and solves at E = E_perp(entrance) + E_par.
ScatteringSolution solve(double E_par, double ratio, const TrapConfig& cfg, Channel entrance = {0, 0});

// Same with the depth already known and the total energy given.
ScatteringSolution solve_energy(double E, double V0, const TrapConfig& cfg);

}  // namespace wg
