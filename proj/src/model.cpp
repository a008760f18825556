#include "infotrade/model.hpp"

#include "infotrade/errors.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <string>

namespace infotrade::model {

using fock::lower;
using fock::Monomial;
using fock::raise;
using fock::Role;

namespace {

bool finite(double x) { return std::isfinite(x); }

void require_finite(double x, const char* name) {
    if (!finite(x)) throw PreconditionError(std::string("ModelParams: ") + name + " is not finite");
}

}  // namespace

void ModelParams::validate() const {
    for (int j = 0; j < 2; ++j) {
        require_finite(omega_s[j], "omega_s");
        require_finite(omega_c[j], "omega_c");
        require_finite(Omega[j], "Omega");
        require_finite(gamma[j], "gamma");
        require_finite(Omega_r[j], "Omega_r");
        const auto& grid = reservoir_grid[j];
        for (std::size_t i = 0; i < grid.size(); ++i) {
            require_finite(grid[i].q, "reservoir node");
            require_finite(grid[i].w, "reservoir weight");
            if (grid[i].w <= 0.0) {
                throw PreconditionError("ModelParams: reservoir weight of trader " + std::to_string(j + 1) +
                                        " node " + std::to_string(i) + " must be > 0");
            }
            if (i > 0 && !(grid[i].q > grid[i - 1].q)) {
                throw PreconditionError("ModelParams: reservoir nodes must be strictly increasing");
            }
        }
    }
    require_finite(lambda_inf, "lambda_inf");
    require_finite(lambda, "lambda");
}

bool operator==(const ModelParams& a, const ModelParams& b) {
    return a.omega_s == b.omega_s && a.omega_c == b.omega_c && a.Omega == b.Omega &&
           a.lambda_inf == b.lambda_inf && a.lambda == b.lambda && a.gamma == b.gamma &&
           a.Omega_r == b.Omega_r && a.reservoir_grid == b.reservoir_grid;
}

double omega_hat(const ModelParams& p) {
    return p.omega_s[0] - p.omega_s[1] - p.omega_c[0] + p.omega_c[1];
}

double damping_rate(const ModelParams& p, int trader) {
    const int j = trader - 1;
    if (p.Omega_r[j] == 0.0) {
        throw PreconditionError("reservoir dispersion slope Omega_r of trader " + std::to_string(trader) +
                                " is zero; damping rate pi*gamma^2/Omega_r undefined");
    }
    return std::numbers::pi * p.gamma[j] * p.gamma[j] / p.Omega_r[j];
}

std::vector<QuadratureNode> midpoint_grid(double window, int nodes) {
    if (nodes < 0) throw PreconditionError("midpoint_grid: node count must be >= 0");
    if (nodes > 0 && !(window > 0.0)) throw PreconditionError("midpoint_grid: window must be > 0");
    std::vector<QuadratureNode> grid;
    grid.reserve(static_cast<std::size_t>(nodes));
    const double dq = nodes > 0 ? 2.0 * window / nodes : 0.0;
    for (int i = 0; i < nodes; ++i) grid.push_back({-window + (i + 0.5) * dq, dq});
    return grid;
}

bool grid_covers_resonance(const ModelParams& p, int trader) {
    const int j = trader - 1;
    const auto& grid = p.reservoir_grid[j];
    if (grid.empty() || p.Omega_r[j] == 0.0) return false;
    const double q_res = p.Omega[j] / p.Omega_r[j];
    const double lo = grid.front().q - 0.5 * grid.front().w;
    const double hi = grid.back().q + 0.5 * grid.back().w;
    return q_res >= lo && q_res <= hi;
}

std::size_t mode_index(const ModeLayout& layout, Role role, int trader, int reservoir_index) {
    return layout.index_of({role, trader, role == Role::Reservoir ? reservoir_index : 0});
}

std::vector<std::size_t> reservoir_modes(const ModeLayout& layout, const ModelParams& p, int trader) {
    std::size_t in_layout = 0;
    for (const auto& m : layout.modes()) {
        if (m.role == Role::Reservoir && m.trader == trader) ++in_layout;
    }
    const auto& grid = p.reservoir_grid[trader - 1];
    if (in_layout != grid.size()) {
        throw PreconditionError("trader " + std::to_string(trader) + ": layout has " +
                                std::to_string(in_layout) + " reservoir modes but the grid has " +
                                std::to_string(grid.size()) + " nodes");
    }
    std::vector<std::size_t> idx;
    idx.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        idx.push_back(mode_index(layout, Role::Reservoir, trader, static_cast<int>(i)));
    }
    return idx;
}

Polynomial h0_polynomial(const ModeLayout& layout, const ModelParams& p) {
    Polynomial poly;
    for (int t = 1; t <= 2; ++t) {
        const int j = t - 1;
        const auto s = mode_index(layout, Role::Share, t);
        const auto c = mode_index(layout, Role::Cash, t);
        const auto i = mode_index(layout, Role::Info, t);
        poly.push_back({p.omega_s[j], {raise(s), lower(s)}});
        poly.push_back({p.omega_c[j], {raise(c), lower(c)}});
        poly.push_back({p.Omega[j], {raise(i), lower(i)}});
        const auto res = reservoir_modes(layout, p, t);
        for (std::size_t k = 0; k < res.size(); ++k) {
            poly.push_back({p.Omega_r[j] * p.reservoir_grid[j][k].q, {raise(res[k]), lower(res[k])}});
        }
    }
    return poly;
}

Polynomial hinf_half_polynomial(const ModeLayout& layout, const ModelParams& p) {
    p.validate();
    Polynomial poly;
    for (int t = 1; t <= 2; ++t) {
        const int j = t - 1;
        const auto s = mode_index(layout, Role::Share, t);
        const auto c = mode_index(layout, Role::Cash, t);
        const auto i = mode_index(layout, Role::Info, t);
        // i_j (s_j^dag + c_j^dag)
        poly.push_back({p.lambda_inf, {lower(i), raise(s)}});
        poly.push_back({p.lambda_inf, {lower(i), raise(c)}});
        // gamma_j sqrt(w) i_j^dag b_{j,k}
        const auto res = reservoir_modes(layout, p, t);
        for (std::size_t k = 0; k < res.size(); ++k) {
            poly.push_back({p.gamma[j] * std::sqrt(p.reservoir_grid[j][k].w), {raise(i), lower(res[k])}});
        }
    }
    return poly;
}

Polynomial hint_half_polynomial(const ModeLayout& layout, const ModelParams& p) {
    const auto s1 = mode_index(layout, Role::Share, 1);
    const auto s2 = mode_index(layout, Role::Share, 2);
    const auto c1 = mode_index(layout, Role::Cash, 1);
    const auto c2 = mode_index(layout, Role::Cash, 2);
    // s1 c1^dag s2^dag c2: trader 1 sells one share to trader 2.
    return {Monomial{p.lambda, {lower(s1), raise(c1), raise(s2), lower(c2)}}};
}

Polynomial hamiltonian_polynomial(const ModeLayout& layout, const ModelParams& p) {
    Polynomial poly = h0_polynomial(layout, p);
    for (const auto& half : {hinf_half_polynomial(layout, p), hint_half_polynomial(layout, p)}) {
        const auto adj = fock::adjoint(half);
        poly.insert(poly.end(), half.begin(), half.end());
        poly.insert(poly.end(), adj.begin(), adj.end());
    }
    return poly;
}

namespace {

SparseOperator hermitian_from_half(const Basis& basis, const Polynomial& half) {
    const auto x = fock::materialize(basis, half);
    return fock::add(x, fock::adjoint(x));
}

std::shared_ptr<const ModeLayout> share(const ModeLayout& layout) {
    return std::make_shared<const ModeLayout>(layout);
}

SparseOperator number_sum(const Basis& basis, std::span<const std::size_t> modes) {
    Polynomial poly;
    for (auto m : modes) poly.push_back({1.0, {raise(m), lower(m)}});
    return fock::materialize(basis, poly);
}

}  // namespace

SparseOperator build_H0(const Basis& basis, const ModelParams& p) {
    p.validate();
    return fock::materialize(basis, h0_polynomial(basis.layout(), p));
}

SparseOperator build_Hinf(const Basis& basis, const ModelParams& p) {
    return hermitian_from_half(basis, hinf_half_polynomial(basis.layout(), p));
}

SparseOperator build_Hint(const Basis& basis, const ModelParams& p) {
    return hermitian_from_half(basis, hint_half_polynomial(basis.layout(), p));
}

SparseOperator build_H0(const ModeLayout& layout, const ModelParams& p) {
    return build_H0(Basis::full(share(layout)), p);
}

SparseOperator build_Hinf(const ModeLayout& layout, const ModelParams& p) {
    return build_Hinf(Basis::full(share(layout)), p);
}

SparseOperator build_Hint(const ModeLayout& layout, const ModelParams& p) {
    return build_Hint(Basis::full(share(layout)), p);
}

ModelOperators build_operators(const Basis& basis, const ModelParams& p) {
    const auto& layout = basis.layout();
    ModelOperators ops;
    ops.H0 = build_H0(basis, p);
    ops.Hinf = build_Hinf(basis, p);
    ops.Hint = build_Hint(basis, p);
    ops.H = fock::add(fock::add(ops.H0, ops.Hinf), ops.Hint);
    for (int t = 1; t <= 2; ++t) {
        const int j = t - 1;
        const std::size_t s = mode_index(layout, Role::Share, t);
        const std::size_t c = mode_index(layout, Role::Cash, t);
        const std::size_t i = mode_index(layout, Role::Info, t);
        const auto res = reservoir_modes(layout, p, t);
        ops.S[j] = number_sum(basis, std::span(&s, 1));
        ops.K[j] = number_sum(basis, std::span(&c, 1));
        ops.I[j] = number_sum(basis, std::span(&i, 1));
        ops.R[j] = number_sum(basis, res);
        ops.Pi[j] = fock::add(ops.S[j], ops.K[j]);
        ops.M[j] = fock::add(fock::add(ops.Pi[j], ops.I[j]), ops.R[j]);
    }
    ops.boundary = fock::truncation_boundary(basis, hamiltonian_polynomial(layout, p));
    return ops;
}

ModelOperators build_conserved(const ModeLayout& layout, const ModelParams& p) {
    return build_operators(Basis::full(share(layout)), p);
}

SparseOperator lowering(const Basis& basis, Role role, int trader) {
    const auto m = mode_index(basis.layout(), role, trader);
    return fock::materialize(basis, {Monomial{1.0, {lower(m)}}}, true);
}

SparseOperator portfolio_commutator_formula(const Basis& basis, const ModelParams& p, int trader) {
    const auto& layout = basis.layout();
    const auto s = mode_index(layout, Role::Share, trader);
    const auto c = mode_index(layout, Role::Cash, trader);
    const auto i = mode_index(layout, Role::Info, trader);
    const Polynomial x{{p.lambda_inf, {raise(i), lower(s)}}, {p.lambda_inf, {raise(i), lower(c)}}};
    const auto xm = fock::materialize(basis, x);
    return fock::subtract(xm, fock::adjoint(xm));
}

}  // namespace infotrade::model
