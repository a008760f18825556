#pragma once

// Independent references for the unit tests: dense Kronecker-product ladder
// matrices, complex adaptive Simpson quadrature, and a generic parameter set.

#include "infotrade/model.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace support {

using Complex = std::complex<double>;
using Dense = Eigen::MatrixXcd;

// Truncated annihilator on {0..cutoff}.
inline Dense dense_lower(int cutoff) {
    Dense a = Dense::Zero(cutoff + 1, cutoff + 1);
    for (int n = 1; n <= cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

// Single-mode matrix embedded at position `mode`, first mode most significant.
inline Dense embed(const std::vector<int>& cutoffs, std::size_t mode, const Dense& m) {
    Dense out = Dense::Identity(1, 1);
    for (std::size_t k = 0; k < cutoffs.size(); ++k) {
        const Dense f = k == mode ? m : Dense::Identity(cutoffs[k] + 1, cutoffs[k] + 1);
        out = Eigen::kroneckerProduct(out, f).eval();
    }
    return out;
}

inline Dense dense_lower(const std::vector<int>& cutoffs, std::size_t mode) {
    return embed(cutoffs, mode, dense_lower(cutoffs[mode]));
}

inline Complex simpson_rec(const std::function<Complex(double)>& f, double a, double b, Complex fa, Complex fm,
                           Complex fb, Complex whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const Complex flm = f(0.5 * (a + m));
    const Complex frm = f(0.5 * (m + b));
    const Complex left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const Complex right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Adaptive Simpson on [a, b], applied panel by panel so oscillatory
// integrands are resolved before the error estimate is trusted.
inline Complex simpson(const std::function<Complex(double)>& f, double a, double b, double tol = 1e-13,
                       int panels = 64) {
    Complex sum = 0.0;
    const double h = (b - a) / panels;
    for (int k = 0; k < panels; ++k) {
        const double x0 = a + k * h, x1 = x0 + h, xm = 0.5 * (x0 + x1);
        const Complex f0 = f(x0), fm = f(xm), f1 = f(x1);
        sum += simpson_rec(f, x0, x1, f0, fm, f1, h / 6.0 * (f0 + 4.0 * fm + f1), tol / panels, 40);
    }
    return sum;
}

// Asymmetric, non-degenerate parameters with omega_hat = 1.3 - 0.7 - 0.9 + 1.6 = 1.3.
inline infotrade::model::ModelParams generic_params(double lambda = 0.1) {
    infotrade::model::ModelParams p;
    p.omega_s = {1.3, 0.7};
    p.omega_c = {0.9, 1.6};
    p.Omega = {1.1, 1.2};
    p.lambda = lambda;
    p.lambda_inf = lambda;
    p.gamma = {0.3, 0.4};
    p.Omega_r = {1.0, 1.5};
    return p;
}

}  // namespace support
