#pragma once

#include "wg/channels.hpp"

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wg {

struct GaussianPotential {
    double V0 = 0.0;
    double r0 = 0.1;
    double operator()(double r) const;
};

struct RadialOptions {
    int steps_per_r0 = 200;
    double match_radius_in_r0 = 15.0;
};

struct ScatteringLength {
    double a = 0.0;
    double inverse = 0.0;     // 1/a, finite through the divergence
    bool divergent = false;   // |a| beyond 1e8 a_perp
    double step_discrepancy = 0.0;  // |1/a(h) - 1/a(h/2)|
};

class CalibrationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

ScatteringLength free_radial_scattering_length(double V0, double r0, const RadialOptions& opt = {});

// Energy-dependent scattering length, 1/a(E) = -k cot(delta) continued to E < 0.
ScatteringLength energy_scattering_length(const GaussianPotential& pot, double E,
                                          const RadialOptions& opt = {});

int count_free_bound_states(double V0, double r0, const RadialOptions& opt = {});

// Depths where the bound-state count steps 0->1 and 1->2.
struct DepthWindow {
    double lower = 0.0;
    double upper = 0.0;
};
DepthWindow one_bound_state_window(double r0, const RadialOptions& opt = {});

// target: a_perp/a_s; std::nullopt means unitarity (1/a_s = 0).
double calibrate_depth(std::optional<double> target_ratio, double r0, const RadialOptions& opt = {});

struct CalibrationRecord {
    double target_ratio;
    double V0;
    double a_s;
    int bound_count;
};
CalibrationRecord calibration_record(double target_ratio, double r0, const RadialOptions& opt = {});
std::string calibration_csv_header();
std::string calibration_csv_row(const CalibrationRecord& r);

struct CouplingMatrix {
    double z = 0.0;
    Eigen::MatrixXd entries;
};

// M_{cc'} = G^{eta}_{n1 n1'} G^{1}_{n2 n2'}; W(z) = -V0 exp(-z^2/r0^2) M.
Eigen::MatrixXd transverse_overlap(const ChannelSet& cs, double r0, double eta);

CouplingMatrix coupling_matrix(double z, const ChannelSet& cs, const GaussianPotential& pot, double eta);

// Beyond this z the coupling is exactly zero.
double coupling_cutoff(const GaussianPotential& pot);

}  // namespace wg
