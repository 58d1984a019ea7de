#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace wg {

constexpr int kMaxOscillatorOrder = 400;

struct QuadratureRule {
    int order = 0;
    std::vector<double> nodes;
    std::vector<double> weights;  // for weight function exp(-x^2)
};

class QuadratureError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Orthonormal oscillator eigenfunction phi_n(x) for frequency omega, unit mass.
double osc_eigenfunction(int n, double x, double omega, int n_max = kMaxOscillatorOrder);

// phi_0..phi_nmax at one point.
std::vector<double> osc_eigenfunctions(int n_max, double x, double omega);

QuadratureRule gauss_hermite_rule(int order);

// G_nm = int phi_n(x) exp(-x^2/r0^2) phi_m(x) dx.
double gaussian_overlap(int n, int m, double r0, double omega);

// Full symmetric table G_nm for n,m <= n_max. Cached per (n_max, r0, omega).
const Eigen::MatrixXd& overlap_table(int n_max, double r0, double omega);

int default_quadrature_order(int n_max);

}  // namespace wg
