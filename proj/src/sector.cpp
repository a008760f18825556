#include "infotrade/propagate.hpp"

#include "infotrade/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace infotrade::propagate {

namespace {

// Flat-index contributions of every occupation of `modes` summing to `total`.
void compositions(const ModeLayout& layout, const std::vector<std::size_t>& modes, std::size_t k, int remaining,
                  std::uint64_t partial, std::vector<std::uint64_t>& out) {
    if (k == modes.size()) {
        if (remaining == 0) out.push_back(partial);
        return;
    }
    const std::size_t m = modes[k];
    const int top = std::min(remaining, layout.cutoff(m));
    for (int n = 0; n <= top; ++n) {
        compositions(layout, modes, k + 1, remaining - n, partial + static_cast<std::uint64_t>(n) * layout.stride(m),
                     out);
    }
}

std::vector<std::uint64_t> trader_part(const ModeLayout& layout, int trader, int total) {
    std::vector<std::size_t> modes;
    for (std::size_t m = 0; m < layout.mode_count(); ++m) {
        if (layout.modes()[m].trader == trader) modes.push_back(m);
    }
    std::vector<std::uint64_t> out;
    compositions(layout, modes, 0, total, 0, out);
    return out;
}

SparseOperator restrict_op(const SparseOperator& op, const Basis& full_basis, const Basis& sub) {
    std::vector<fock::Entry> entries;
    for (std::size_t r = 0; r < sub.size(); ++r) {
        const auto fr = full_basis.position(sub.flat(r));
        if (fr < 0) throw PreconditionError("restrict_to_sector: sector state missing from the full basis");
        for (const auto& e : op.row(static_cast<std::size_t>(fr))) {
            const auto c = sub.position(full_basis.flat(e.col));
            if (c >= 0) entries.push_back({r, static_cast<std::size_t>(c), e.value});
        }
    }
    return SparseOperator(sub.size(), std::move(entries));
}

}  // namespace

Sector enumerate_sector(std::shared_ptr<const ModeLayout> layout, int m1, int m2) {
    if (m1 < 0 || m2 < 0) throw PreconditionError("enumerate_sector: sector labels must be >= 0");
    const auto a = trader_part(*layout, 1, m1);
    const auto b = trader_part(*layout, 2, m2);
    if (a.empty() || b.empty()) {
        throw PreconditionError("enumerate_sector: sector (" + std::to_string(m1) + ", " + std::to_string(m2) +
                                ") is empty under the given cutoffs");
    }
    std::vector<std::uint64_t> flat;
    flat.reserve(a.size() * b.size());
    for (auto x : a) {
        for (auto y : b) flat.push_back(x + y);
    }
    std::sort(flat.begin(), flat.end());
    Sector s;
    s.m1 = m1;
    s.m2 = m2;
    s.basis = Basis::subset(std::move(layout), std::move(flat));
    return s;
}

Sector sector_of(std::shared_ptr<const ModeLayout> layout, const Occupations& occ) {
    for (int v : occ) {
        if (v < 0) throw PreconditionError("sector_of: occupations must be >= 0");
    }
    const auto trader = fock::trader_modes();
    for (std::size_t k = 0; k < 6; ++k) {
        const auto m = layout->index_of(trader[k]);
        if (occ[k] > layout->cutoff(m)) {
            throw PreconditionError("sector_of: occupation " + std::to_string(occ[k]) + " of " +
                                    fock::to_string(trader[k]) + " exceeds its cutoff " +
                                    std::to_string(layout->cutoff(m)));
        }
    }
    return enumerate_sector(std::move(layout), occ[0] + occ[2] + occ[4], occ[1] + occ[3] + occ[5]);
}

ModelOperators restrict_to_sector(const ModelOperators& full, const Basis& full_basis, const Sector& sector) {
    const auto& sub = sector.basis;
    ModelOperators out;
    out.H0 = restrict_op(full.H0, full_basis, sub);
    out.Hinf = restrict_op(full.Hinf, full_basis, sub);
    out.Hint = restrict_op(full.Hint, full_basis, sub);
    out.H = restrict_op(full.H, full_basis, sub);
    for (int j = 0; j < 2; ++j) {
        out.M[j] = restrict_op(full.M[j], full_basis, sub);
        out.Pi[j] = restrict_op(full.Pi[j], full_basis, sub);
        out.S[j] = restrict_op(full.S[j], full_basis, sub);
        out.K[j] = restrict_op(full.K[j], full_basis, sub);
        out.I[j] = restrict_op(full.I[j], full_basis, sub);
        out.R[j] = restrict_op(full.R[j], full_basis, sub);
    }
    out.boundary.resize(sub.size());
    for (std::size_t r = 0; r < sub.size(); ++r) {
        out.boundary[r] = full.boundary[static_cast<std::size_t>(full_basis.position(sub.flat(r)))];
    }
    return out;
}

ModelOperators build_sector_operators(const Sector& sector, const ModelParams& p) {
    // H commutes with M1 and M2, so materializing on the sector never leaves it.
    return model::build_operators(sector.basis, p);
}

StateVector restrict_state(const StateVector& psi, const Basis& full_basis, const Sector& sector) {
    if (static_cast<std::size_t>(psi.size()) != full_basis.size()) {
        throw PreconditionError("restrict_state: state size does not match the basis");
    }
    const auto& sub = sector.basis;
    StateVector out(static_cast<Eigen::Index>(sub.size()));
    double inside = 0.0;
    for (std::size_t r = 0; r < sub.size(); ++r) {
        const auto pos = full_basis.position(sub.flat(r));
        out[static_cast<Eigen::Index>(r)] = psi[pos];
        inside += std::norm(psi[pos]);
    }
    const double outside = psi.squaredNorm() - inside;
    if (outside > 1e-12) {
        throw PreconditionError("restrict_state: " + std::to_string(outside) +
                                " of the norm lies outside sector (" + std::to_string(sector.m1) + ", " +
                                std::to_string(sector.m2) + ")");
    }
    return out;
}

}  // namespace infotrade::propagate
