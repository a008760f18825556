#pragma once

// Hamiltonians and conserved observables of the two-trader market on a
// truncated Fock space, including the discretized information reservoirs.

#include "infotrade/fock.hpp"

#include <array>
#include <vector>

namespace infotrade::model {

using fock::Basis;
using fock::Complex;
using fock::ModeLayout;
using fock::Polynomial;
using fock::SparseOperator;

struct QuadratureNode {
    double q;  // reservoir momentum
    double w;  // quadrature weight
};

struct ModelParams {
    std::array<double, 2> omega_s{};  // share frequencies
    std::array<double, 2> omega_c{};  // cash frequencies
    std::array<double, 2> Omega{};    // lack-of-information frequencies
    double lambda_inf = 0.0;          // information coupling
    double lambda = 0.0;              // trade coupling
    std::array<double, 2> gamma{};    // reservoir coupling
    std::array<double, 2> Omega_r{1.0, 1.0};  // reservoir dispersion slope: Omega_r * q
    std::array<std::vector<QuadratureNode>, 2> reservoir_grid;

    // Finite parameters, positive weights, strictly increasing nodes.
    void validate() const;

    friend bool operator==(const ModelParams&, const ModelParams&);
};

inline bool operator==(const QuadratureNode& a, const QuadratureNode& b) { return a.q == b.q && a.w == b.w; }

// omega_s1 - omega_s2 - omega_c1 + omega_c2: the detuning carried by the
// trade term in the frame rotating with H0.
double omega_hat(const ModelParams& p);

// pi * gamma_j^2 / Omega_r_j, the amplitude damping rate of i_j. `trader` is 1 or 2.
double damping_rate(const ModelParams& p, int trader);

// Uniform midpoint rule on [-window, window].
std::vector<QuadratureNode> midpoint_grid(double window, int nodes);

// True when Omega_j / Omega_r_j lies inside the trader's grid span.
bool grid_covers_resonance(const ModelParams& p, int trader);

// Index of a trader mode in a layout (throws PreconditionError if absent).
std::size_t mode_index(const ModeLayout& layout, fock::Role role, int trader, int reservoir_index = 0);

// Reservoir mode indices of a trader, in grid order. Throws if the layout's
// reservoir modes do not match the parameter grid.
std::vector<std::size_t> reservoir_modes(const ModeLayout& layout, const ModelParams& p, int trader);

// Polynomial forms. The Hermitian pieces are returned as X only; the
// operator is X + X^dagger.
Polynomial h0_polynomial(const ModeLayout& layout, const ModelParams& p);
Polynomial hinf_half_polynomial(const ModeLayout& layout, const ModelParams& p);
Polynomial hint_half_polynomial(const ModeLayout& layout, const ModelParams& p);
// Full H as a polynomial (used for truncation-boundary detection).
Polynomial hamiltonian_polynomial(const ModeLayout& layout, const ModelParams& p);

SparseOperator build_H0(const Basis& basis, const ModelParams& p);
SparseOperator build_Hinf(const Basis& basis, const ModelParams& p);
SparseOperator build_Hint(const Basis& basis, const ModelParams& p);

SparseOperator build_H0(const ModeLayout& layout, const ModelParams& p);
SparseOperator build_Hinf(const ModeLayout& layout, const ModelParams& p);
SparseOperator build_Hint(const ModeLayout& layout, const ModelParams& p);

struct ModelOperators {
    SparseOperator H0, Hinf, Hint, H;
    std::array<SparseOperator, 2> M, Pi, S, K, I, R;
    // Basis states on the truncation boundary of H (see fock::truncation_boundary).
    std::vector<bool> boundary;
};

ModelOperators build_operators(const Basis& basis, const ModelParams& p);
ModelOperators build_conserved(const ModeLayout& layout, const ModelParams& p);

// Single ladder operator (lowering) of a trader mode on a basis.
SparseOperator lowering(const Basis& basis, fock::Role role, int trader);

// lambda_inf * (i_j^dag (s_j + c_j) - i_j (s_j^dag + c_j^dag)), the value of [H, Pi_j].
SparseOperator portfolio_commutator_formula(const Basis& basis, const ModelParams& p, int trader);

}  // namespace infotrade::model
