#pragma once

// Closed-form perturbative solution in the trade coupling: interaction-picture
// kernels, second-order mean occupations, portfolio variations and their
// long-time limits, and the order-by-order operator expansion.

#include "infotrade/fock.hpp"
#include "infotrade/model.hpp"
#include "infotrade/propagate.hpp"

#include <array>
#include <functional>
#include <vector>

namespace infotrade::perturb {

using fock::Basis;
using fock::Complex;
using fock::SparseOperator;
using fock::StateVector;
using model::ModelParams;
using propagate::Occupations;

struct PerturbInputs {
    ModelParams params;
    Occupations occ{};  // n1, n2, k1, k2, I1, I2

    // lambda == lambda_inf, omega_hat != 0, Omega_r != 0, occupations >= 0.
    void validate() const;
};

struct Kernels {
    Complex eta1;
    Complex eta2;
    std::array<Complex, 2> eta_s;
    std::array<Complex, 2> eta_c;
    std::array<Complex, 2> ik_coeff;  // e^{-(i Omega_j + kappa_j) t}
};

// Throws PreconditionError if omega_hat == 0 or an Omega_r is 0.
Kernels eval_kernels(const ModelParams& p, double t);

// (e^{z t} - 1) / z, equal to t at z = 0.
Complex exp_kernel(Complex z, double t);

// |(e^{(i d - kappa) t} - 1)/(i d - kappa)|^2 written as
// (e^{-2 kappa t} - 2 e^{-kappa t} cos(d t) + 1) / (d^2 + kappa^2).
double eta_modulus_squared(double detuning, double kappa, double t);

// i_j(t) = c(t) i_j(0) + integral of f(q, t) r_j(q) dq before the reservoir
// term is dropped. Diagnostic only.
struct IkClosedForm {
    Complex coefficient;
    std::function<Complex(double q)> reservoir;
};

IkClosedForm ik_closed_form_full(const ModelParams& p, int trader, double t);

// Integer brackets multiplying 2 lambda^2 (1 - cos(omega_hat t)) / omega_hat^2
// in n1, n2, k1, k2.
std::array<long long, 4> trade_brackets(long long n1, long long n2, long long k1, long long k2);

struct MeanOccupations {
    std::array<double, 2> n{};
    std::array<double, 2> k{};
};

MeanOccupations mean_occupations(const PerturbInputs& in, double t);
std::array<double, 2> delta_pi(const PerturbInputs& in, double t);
// Throws PreconditionError when a decay rate pi gamma_j^2 / Omega_r_j is not > 0.
// Does not require omega_hat != 0: the trade terms drop out of Pi_j.
std::array<double, 2> delta_pi_infinity(const PerturbInputs& in);

// A(lambda) = order0 + lambda order1 + lambda^2 order2.
struct Expansion {
    SparseOperator order0, order1, order2;

    SparseOperator at(double lambda) const;
};

struct PerturbativeOperators {
    std::array<Expansion, 2> sigma;
    std::array<Expansion, 2> theta;
};

// The quadrature-evaluated integrals entering Q_1..Q_4, exposed for testing:
// integral over [0, t] of f(t1) e^{+-i omega_hat t1}.
Complex phase_integral(const std::function<Complex(double)>& f, double w, double t);

// Materializes the expansion on `basis`, which must contain the six trader
// modes with every cutoff at least one above the initial occupation.
PerturbativeOperators build_perturbative_operators(const Basis& basis, const PerturbInputs& in, double t);

// Coefficients of lambda^0, lambda^1, lambda^2 in <phi| A^dag A |phi>.
struct OrderedExpectation {
    std::array<double, 3> n1, n2, k1, k2;
};

OrderedExpectation expectation_by_order(const PerturbativeOperators& ops, const StateVector& phi);

// Time series of the closed-form occupations; M and leakage are NaN.
propagate::TimeSeries perturbative_series(const PerturbInputs& in, const std::vector<double>& times);

}  // namespace infotrade::perturb
