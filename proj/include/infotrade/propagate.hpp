#pragma once

// Time evolution: exact state-picture propagation (restricted to conserved
// sectors) and the operator-valued Heisenberg ODE oracle in the frame
// rotating with H0.

#include "infotrade/fock.hpp"
#include "infotrade/model.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace infotrade::propagate {

using fock::Basis;
using fock::Complex;
using fock::ModeLayout;
using fock::SparseOperator;
using fock::StateVector;
using model::ModelOperators;
using model::ModelParams;

// (n1, n2, k1, k2, I1, I2): initial shares, cash and lack of information.
using Occupations = std::array<int, 6>;

// ---------------------------------------------------------------- sectors

// Joint eigenspace of M1 and M2.
struct Sector {
    int m1 = 0;
    int m2 = 0;
    Basis basis;
};

// Enumerates the sector directly, without visiting the full space, so it
// works for layouts whose full dimension is never materialized.
Sector enumerate_sector(std::shared_ptr<const ModeLayout> layout, int m1, int m2);
// Sector containing the number state with the given trader occupations and
// reservoirs in vacuum.
Sector sector_of(std::shared_ptr<const ModeLayout> layout, const Occupations& occ);

// Projects full-space operators onto the sector basis.
ModelOperators restrict_to_sector(const ModelOperators& full, const Basis& full_basis, const Sector& sector);
// Builds the operator bundle on the sector basis directly.
ModelOperators build_sector_operators(const Sector& sector, const ModelParams& p);
// Restricts a full-space state; throws if more than 1e-12 of its norm lies
// outside the sector.
StateVector restrict_state(const StateVector& psi, const Basis& full_basis, const Sector& sector);

// ------------------------------------------------------------- time series

enum class Engine { Exact, HeisenbergODE, Perturbative };

std::string to_string(Engine e);

// Expectation values at one time. Entries an engine does not model are NaN.
struct Observables {
    std::array<double, 2> S{};
    std::array<double, 2> K{};
    std::array<double, 2> I{};
    std::array<double, 2> Pi{};
    std::array<double, 2> M{};
    double leakage = 0.0;
};

struct TimeSeries {
    Engine engine = Engine::Exact;
    std::vector<double> times;
    std::vector<Observables> values;
    std::vector<std::string> warnings;
};

// Throws PreconditionError unless times start at 0 and strictly increase.
void check_time_grid(const std::vector<double>& times);
std::vector<double> uniform_times(double t_max, int samples);

// ------------------------------------------------------------ exact engine

struct EvolveOptions {
    double tol = 1e-9;              // norm drift / propagator accuracy
    double leakage_error = 1e-6;    // abort above this
    double leakage_warning = 1e-9;  // warn above this
    std::size_t dense_limit = 5000; // full eigendecomposition up to this dimension
    int krylov_dim = 30;
};

// e^{-iHt} on a fixed Hermitian H: dense spectral propagation up to
// `dense_limit`, short-iterate Lanczos above it.
class ExactPropagator {
public:
    ExactPropagator(const SparseOperator& H, const EvolveOptions& options);

    bool is_dense() const { return dense_; }
    // Evolves psi by time dt (negative dt allowed).
    StateVector step(const StateVector& psi, double dt) const;

private:
    const SparseOperator* H_;
    EvolveOptions options_;
    bool dense_ = true;
    Eigen::VectorXd energies_;
    Eigen::MatrixXcd vectors_;

    StateVector lanczos_step(const StateVector& psi, double dt) const;
};

// Probability on truncation-boundary states.
double leakage(const ModelOperators& ops, const StateVector& psi);
Observables measure(const ModelOperators& ops, const StateVector& psi);

TimeSeries evolve_exact(const ModelOperators& ops, const StateVector& psi0, const std::vector<double>& times,
                        const EvolveOptions& options = {});

// --------------------------------------------------- Heisenberg ODE oracle

// Basis of the six trader modes (s1,s2,c1,c2,i1,i2) split by the charges
// Q_j = S_j + K_j + I_j, which every term of the rotating-frame equations
// respects.
class ChargeSectors {
public:
    explicit ChargeSectors(const std::array<int, 6>& trader_cutoffs);

    const ModeLayout& layout() const { return *layout_; }
    std::shared_ptr<const ModeLayout> layout_ptr() const { return layout_; }
    std::size_t count() const { return states_.size(); }
    std::size_t dimension(std::size_t sector) const { return states_[sector].size(); }
    std::array<int, 2> charge(std::size_t sector) const;
    std::optional<std::size_t> find(int q1, int q2) const;
    std::optional<std::size_t> shifted(std::size_t sector, std::array<int, 2> shift) const;
    // (sector, position) of a flat trader-layout index.
    std::pair<std::size_t, std::size_t> locate(std::uint64_t flat) const;

private:
    std::shared_ptr<const ModeLayout> layout_;
    std::array<int, 2> qmax_{};
    std::vector<std::vector<std::uint64_t>> states_;
    std::vector<std::pair<std::size_t, std::size_t>> where_;
};

// Operator with a definite charge shift, stored as one dense block per
// source sector (empty when the block is structurally zero).
class BlockOperator {
public:
    BlockOperator() = default;
    BlockOperator(const ChargeSectors& sectors, std::array<int, 2> shift);
    static BlockOperator from_sparse(const ChargeSectors& sectors, const SparseOperator& op,
                                     std::array<int, 2> shift);

    std::array<int, 2> shift() const { return shift_; }
    const Eigen::MatrixXcd& block(std::size_t source) const { return blocks_[source]; }
    Eigen::MatrixXcd& block(std::size_t source) { return blocks_[source]; }
    std::size_t block_count() const { return blocks_.size(); }

    BlockOperator& axpy(Complex a, const BlockOperator& x);  // this += a x
    BlockOperator& scale(Complex a);

    friend BlockOperator multiply(const ChargeSectors& sectors, const BlockOperator& a, const BlockOperator& b);
    friend BlockOperator adjoint(const ChargeSectors& sectors, const BlockOperator& a);

private:
    std::array<int, 2> shift_{};
    std::vector<Eigen::MatrixXcd> blocks_;
};

BlockOperator multiply(const ChargeSectors& sectors, const BlockOperator& a, const BlockOperator& b);
BlockOperator adjoint(const ChargeSectors& sectors, const BlockOperator& a);

// Lowering operators s_j, c_j, i_j of the trader layout in block form.
struct HeisenbergSystem {
    explicit HeisenbergSystem(const std::array<int, 6>& trader_cutoffs);

    ChargeSectors sectors;
    std::array<BlockOperator, 2> s, c, i;
};

// Right-hand side of the trade term.
// Reduced: the CCR-reduced cubic products, e.g. -i lambda e^{i w t} sigma2 theta1 theta2^dag
//   for sigma1. On a truncated space these no longer describe a unitary
//   evolution and can diverge, first in the top charge sectors.
// Commutator: i[H(t), A] with H(t) rebuilt from the evolved operators. Same
//   equations when the CCR hold; exact Heisenberg evolution of the truncated model.
enum class HeisenbergForm { Reduced, Commutator };

std::string to_string(HeisenbergForm f);

struct HeisenbergOptions {
    double step = 0.05;  // fixed RK4 step (upper bound; divides each sample interval)
    double tol = 1e-9;   // max observable drift between step and step/2
    HeisenbergForm form = HeisenbergForm::Reduced;
};

// Integrates the rotating-frame equations for sigma_j = s_j e^{i w_j^s t} and
// theta_j = c_j e^{i w_j^c t} with i_j(t) = e^{-(i Omega_j + pi gamma_j^2/Omega_r_j) t} i_j,
// operator products in the order s1, s2, c1, c2. Reports n_j, k_j from the
// step/2 run after checking it against the step run. Non-finite observables
// throw NumericalGuardError.
TimeSeries integrate_heisenberg(const HeisenbergSystem& system, const ModelParams& p, const Occupations& occ,
                                const std::vector<double>& times, const HeisenbergOptions& options = {});
// One fixed-step run without the step-halving check.
TimeSeries integrate_heisenberg_fixed(const HeisenbergSystem& system, const ModelParams& p, const Occupations& occ,
                                      const std::vector<double>& times, double step,
                                      HeisenbergForm form = HeisenbergForm::Reduced);

}  // namespace infotrade::propagate
