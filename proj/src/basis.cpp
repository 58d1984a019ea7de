#include "wg/basis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>

namespace wg {

namespace {

constexpr double kRescale = 1e150;
constexpr int kMaxQuadratureOrder = 300;

// Normalized oscillator functions psi_k(xi) of unit frequency, k = 0..n.
std::vector<double> unit_oscillator(int n, double xi)
{
    std::vector<double> out(n + 1);
    const double psi0 = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * xi * xi);
    out[0] = psi0;
    if (n >= 1)
        out[1] = std::sqrt(2.0) * xi * psi0;
    for (int k = 2; k <= n; ++k)
        out[k] = std::sqrt(2.0 / k) * xi * out[k - 1] - std::sqrt((k - 1.0) / k) * out[k - 2];
    return out;
}

// Polynomial part of psi_k (Gaussian stripped), k = 0..n.
void polynomial_parts(int n, double xi, double* out)
{
    out[0] = std::pow(std::numbers::pi, -0.25);
    if (n >= 1)
        out[1] = std::sqrt(2.0) * xi * out[0];
    for (int k = 2; k <= n; ++k)
        out[k] = std::sqrt(2.0 / k) * xi * out[k - 1] - std::sqrt((k - 1.0) / k) * out[k - 2];
}

}  // namespace

double osc_eigenfunction(int n, double x, double omega, int n_max)
{
    if (n < 0 || n > n_max)
        throw std::out_of_range("oscillator order " + std::to_string(n) + " outside [0, " +
                                std::to_string(n_max) + "]");
    if (!std::isfinite(x))
        throw std::invalid_argument("oscillator argument is not finite");
    if (!(omega > 0.0))
        throw std::invalid_argument("oscillator frequency must be positive");

    const double xi = std::sqrt(omega) * x;
    // run the recurrence on the polynomial part with dynamic rescaling so that
    // large |xi| and large n neither overflow nor underflow prematurely
    double pm2 = 1.0, pm1 = std::sqrt(2.0) * xi, log_scale = 0.0;
    double p = n == 0 ? pm2 : pm1;
    for (int k = 2; k <= n; ++k) {
        p = std::sqrt(2.0 / k) * xi * pm1 - std::sqrt((k - 1.0) / k) * pm2;
        pm2 = pm1;
        pm1 = p;
        if (std::abs(p) > kRescale) {
            pm2 /= kRescale;
            pm1 /= kRescale;
            p /= kRescale;
            log_scale += std::log(kRescale);
        }
    }
    if (p == 0.0)
        return 0.0;
    const double log_mag = std::log(std::abs(p)) + log_scale - 0.5 * xi * xi + 0.25 * std::log(omega) -
                           0.25 * std::log(std::numbers::pi);
    return std::copysign(std::exp(log_mag), p);
}

std::vector<double> osc_eigenfunctions(int n_max, double x, double omega)
{
    if (n_max < 0 || n_max > kMaxOscillatorOrder)
        throw std::out_of_range("oscillator order outside supported range");
    if (!std::isfinite(x) || !(omega > 0.0))
        throw std::invalid_argument("bad oscillator argument");
    auto v = unit_oscillator(n_max, std::sqrt(omega) * x);
    const double s = std::pow(omega, 0.25);
    for (auto& e : v)
        e *= s;
    return v;
}

QuadratureRule gauss_hermite_rule(int order)
{
    if (order < 1)
        throw std::invalid_argument("quadrature order must be >= 1");
    if (order > kMaxQuadratureOrder)
        throw std::invalid_argument("quadrature order above " + std::to_string(kMaxQuadratureOrder));

    // Golub-Welsch: eigenvalues of the Jacobi matrix of the Hermite recurrence
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
    Eigen::VectorXd sub(std::max(order - 1, 0));
    for (int k = 1; k < order; ++k)
        sub[k - 1] = std::sqrt(0.5 * k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw QuadratureError("Jacobi eigen-decomposition did not converge");

    QuadratureRule rule;
    rule.order = order;
    rule.nodes.assign(es.eigenvalues().data(), es.eigenvalues().data() + order);

    for (auto& x : rule.nodes) {
        for (int it = 0; it < 3; ++it) {
            auto psi = unit_oscillator(order, x);
            const double d = std::sqrt(2.0 * order) * psi[order - 1];
            if (d == 0.0)
                break;
            x -= psi[order] / d;
        }
    }
    std::sort(rule.nodes.begin(), rule.nodes.end());
    for (int i = 0; i < order / 2; ++i) {
        const double a = 0.5 * (rule.nodes[order - 1 - i] - rule.nodes[i]);
        rule.nodes[i] = -a;
        rule.nodes[order - 1 - i] = a;
    }
    if (order % 2)
        rule.nodes[order / 2] = 0.0;

    rule.weights.resize(order);
    for (int i = 0; i < order; ++i) {
        const double x = rule.nodes[i];
        auto psi = unit_oscillator(order - 1, x);
        double s = 0.0;
        for (double v : psi)
            s += v * v;
        rule.weights[i] = std::exp(-x * x) / s;
    }
    return rule;
}

int default_quadrature_order(int n_max) { return 2 * (n_max + 1) + 16; }

namespace {

Eigen::MatrixXd build_overlap_table(int n_max, double r0, double omega)
{
    const QuadratureRule rule = gauss_hermite_rule(default_quadrature_order(n_max));
    const double a = omega + 1.0 / (r0 * r0);
    const double scale = std::sqrt(omega / a);
    Eigen::MatrixXd P(n_max + 1, rule.order);
    for (int i = 0; i < rule.order; ++i) {
        polynomial_parts(n_max, scale * rule.nodes[i], P.col(i).data());
        P.col(i) *= std::sqrt(rule.weights[i]);
    }
    Eigen::MatrixXd G = scale * (P * P.transpose());
    for (int n = 0; n <= n_max; ++n)
        for (int m = 0; m <= n_max; ++m)
            if ((n + m) % 2)
                G(n, m) = 0.0;
    return 0.5 * (G + G.transpose());
}

}  // namespace

double gaussian_overlap(int n, int m, double r0, double omega)
{
    if (n < 0 || m < 0 || n > kMaxOscillatorOrder || m > kMaxOscillatorOrder)
        throw std::out_of_range("overlap index outside truncation");
    if (!(r0 > 0.0) || !(omega > 0.0))
        throw std::invalid_argument("overlap needs r0 > 0 and omega > 0");
    if ((n + m) % 2)
        return 0.0;
    return overlap_table(std::max(n, m), r0, omega)(n, m);
}

const Eigen::MatrixXd& overlap_table(int n_max, double r0, double omega)
{
    static std::mutex mtx;
    static std::map<std::tuple<int, double, double>, Eigen::MatrixXd> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_tuple(n_max, r0, omega);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, build_overlap_table(n_max, r0, omega)).first;
    return it->second;
}

}  // namespace wg
