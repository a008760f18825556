#include "infotrade/fock.hpp"

#include "infotrade/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace infotrade::fock {

std::string to_string(Role role) {
    switch (role) {
        case Role::Share: return "share";
        case Role::Cash: return "cash";
        case Role::Info: return "info";
        case Role::Reservoir: return "reservoir";
    }
    return "?";
}

std::string to_string(const ModeId& mode) {
    std::ostringstream os;
    os << to_string(mode.role) << mode.trader;
    if (mode.role == Role::Reservoir) os << '[' << mode.reservoir_index << ']';
    return os.str();
}

// ------------------------------------------------------------------ layout

ModeLayout::ModeLayout(std::vector<ModeId> modes, std::vector<int> cutoffs,
                       std::uint64_t max_dimension)
    : modes_(std::move(modes)), cutoffs_(std::move(cutoffs)) {
    if (modes_.size() != cutoffs_.size()) {
        throw PreconditionError("ModeLayout: one cutoff per mode required");
    }
    for (std::size_t m = 0; m < modes_.size(); ++m) {
        if (cutoffs_[m] < 1) {
            throw PreconditionError("ModeLayout: cutoff of mode " + to_string(modes_[m]) +
                                    " must be >= 1, got " + std::to_string(cutoffs_[m]));
        }
        if (modes_[m].trader != 1 && modes_[m].trader != 2) {
            throw PreconditionError("ModeLayout: trader index must be 1 or 2");
        }
        for (std::size_t l = 0; l < m; ++l) {
            if (modes_[l] == modes_[m]) {
                throw PreconditionError("ModeLayout: duplicate mode " + to_string(modes_[m]));
            }
        }
    }
    strides_.assign(modes_.size(), 1);
    dimension_ = 1;
    for (std::size_t k = modes_.size(); k-- > 0;) {
        strides_[k] = dimension_;
        const auto radix = static_cast<std::uint64_t>(cutoffs_[k]) + 1;
        if (dimension_ > std::numeric_limits<std::uint64_t>::max() / radix ||
            dimension_ * radix > max_dimension) {
            std::ostringstream os;
            os << "ModeLayout: dimension overflow: " << modes_.size() << " modes, product of (N+1) exceeds "
               << max_dimension << " (cutoffs:";
            for (int c : cutoffs_) os << ' ' << c;
            os << ')';
            throw PreconditionError(os.str());
        }
        dimension_ *= radix;
    }
}

bool ModeLayout::contains(const ModeId& mode) const {
    return std::find(modes_.begin(), modes_.end(), mode) != modes_.end();
}

std::size_t ModeLayout::index_of(const ModeId& mode) const {
    auto it = std::find(modes_.begin(), modes_.end(), mode);
    if (it == modes_.end()) {
        throw PreconditionError("mode " + to_string(mode) + " is not part of the layout");
    }
    return static_cast<std::size_t>(it - modes_.begin());
}

std::uint64_t ModeLayout::encode(std::span<const int> occupations) const {
    if (occupations.size() != modes_.size()) {
        throw PreconditionError("encode: expected " + std::to_string(modes_.size()) + " occupations");
    }
    std::uint64_t flat = 0;
    for (std::size_t m = 0; m < modes_.size(); ++m) {
        if (occupations[m] < 0 || occupations[m] > cutoffs_[m]) {
            throw PreconditionError("occupation " + std::to_string(occupations[m]) + " of mode " +
                                    to_string(modes_[m]) + " outside [0, " +
                                    std::to_string(cutoffs_[m]) + "]");
        }
        flat += static_cast<std::uint64_t>(occupations[m]) * strides_[m];
    }
    return flat;
}

std::vector<int> ModeLayout::decode(std::uint64_t flat) const {
    std::vector<int> occ(modes_.size());
    for (std::size_t m = 0; m < modes_.size(); ++m) occ[m] = occupation(flat, m);
    return occ;
}

std::array<ModeId, 6> trader_modes() {
    return {ModeId{Role::Share, 1}, ModeId{Role::Share, 2}, ModeId{Role::Cash, 1},
            ModeId{Role::Cash, 2},  ModeId{Role::Info, 1},  ModeId{Role::Info, 2}};
}

ModeLayout build_layout(const std::array<int, 6>& trader_cutoffs, std::array<int, 2> reservoir_modes,
                        int reservoir_cutoff, std::uint64_t max_dimension) {
    if (reservoir_modes[0] < 0 || reservoir_modes[1] < 0) {
        throw PreconditionError("build_layout: reservoir mode count must be >= 0");
    }
    std::vector<ModeId> modes;
    std::vector<int> cutoffs;
    const auto tm = trader_modes();
    for (std::size_t k = 0; k < tm.size(); ++k) {
        modes.push_back(tm[k]);
        cutoffs.push_back(trader_cutoffs[k]);
    }
    for (int trader = 1; trader <= 2; ++trader) {
        for (int r = 0; r < reservoir_modes[trader - 1]; ++r) {
            modes.push_back({Role::Reservoir, trader, r});
            cutoffs.push_back(reservoir_cutoff);
        }
    }
    return ModeLayout(std::move(modes), std::move(cutoffs), max_dimension);
}

ModeLayout build_layout(const std::array<int, 6>& trader_cutoffs, int reservoir_modes_per_trader,
                        int reservoir_cutoff, std::uint64_t max_dimension) {
    return build_layout(trader_cutoffs, {reservoir_modes_per_trader, reservoir_modes_per_trader},
                        reservoir_cutoff, max_dimension);
}

// ------------------------------------------------------------------- basis

Basis Basis::full(std::shared_ptr<const ModeLayout> layout) {
    Basis b;
    b.size_ = static_cast<std::size_t>(layout->dimension());
    b.layout_ = std::move(layout);
    b.full_ = true;
    return b;
}

Basis Basis::subset(std::shared_ptr<const ModeLayout> layout, std::vector<std::uint64_t> flat) {
    std::sort(flat.begin(), flat.end());
    if (std::adjacent_find(flat.begin(), flat.end()) != flat.end()) {
        throw PreconditionError("Basis::subset: duplicate basis index");
    }
    if (!flat.empty() && flat.back() >= layout->dimension()) {
        throw PreconditionError("Basis::subset: index outside layout");
    }
    Basis b;
    b.layout_ = std::move(layout);
    b.size_ = flat.size();
    b.flat_ = std::move(flat);
    b.full_ = false;
    return b;
}

std::int64_t Basis::position(std::uint64_t flat) const {
    if (full_) return flat < size_ ? static_cast<std::int64_t>(flat) : -1;
    auto it = std::lower_bound(flat_.begin(), flat_.end(), flat);
    if (it == flat_.end() || *it != flat) return -1;
    return it - flat_.begin();
}

// --------------------------------------------------------- sparse operator

SparseOperator::SparseOperator(std::size_t dim, std::vector<Entry> entries, double drop_tolerance)
    : dim_(dim), entries_(std::move(entries)) {
    for (const auto& e : entries_) {
        if (e.row >= dim_ || e.col >= dim_) {
            throw std::out_of_range("SparseOperator: entry outside dimension");
        }
    }
    std::stable_sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<Entry> merged;
    merged.reserve(entries_.size());
    for (const auto& e : entries_) {
        if (!merged.empty() && merged.back().row == e.row && merged.back().col == e.col) {
            merged.back().value += e.value;
        } else {
            merged.push_back(e);
        }
    }
    std::erase_if(merged, [&](const Entry& e) { return std::abs(e.value) <= drop_tolerance; });
    entries_ = std::move(merged);
    index_rows();
}

void SparseOperator::index_rows() {
    row_start_.assign(dim_ + 1, 0);
    for (const auto& e : entries_) ++row_start_[e.row + 1];
    for (std::size_t r = 0; r < dim_; ++r) row_start_[r + 1] += row_start_[r];
}

SparseOperator SparseOperator::identity(std::size_t dim) {
    std::vector<Entry> e;
    e.reserve(dim);
    for (std::size_t k = 0; k < dim; ++k) e.push_back({k, k, 1.0});
    return SparseOperator(dim, std::move(e));
}

SparseOperator SparseOperator::diagonal(std::span<const double> diag) {
    std::vector<Entry> e;
    e.reserve(diag.size());
    for (std::size_t k = 0; k < diag.size(); ++k) e.push_back({k, k, diag[k]});
    return SparseOperator(diag.size(), std::move(e));
}

Complex SparseOperator::at(std::size_t r, std::size_t c) const {
    auto rw = row(r);
    auto it = std::lower_bound(rw.begin(), rw.end(), c,
                               [](const Entry& e, std::size_t col) { return e.col < col; });
    return (it != rw.end() && it->col == c) ? it->value : Complex{};
}

double SparseOperator::max_abs() const {
    double m = 0.0;
    for (const auto& e : entries_) m = std::max(m, std::abs(e.value));
    return m;
}

Eigen::MatrixXcd SparseOperator::to_dense() const {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim_),
                                                static_cast<Eigen::Index>(dim_));
    for (const auto& e : entries_) d(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) = e.value;
    return d;
}

namespace {

void require_same_dimension(const SparseOperator& a, const SparseOperator& b, const char* op) {
    if (a.dimension() != b.dimension()) {
        throw std::invalid_argument(std::string(op) + ": dimension mismatch (" +
                                    std::to_string(a.dimension()) + " vs " +
                                    std::to_string(b.dimension()) + ")");
    }
}

SparseOperator combine(const SparseOperator& a, const SparseOperator& b, Complex sb) {
    std::vector<Entry> out;
    out.reserve(a.nonzeros() + b.nonzeros());
    for (const auto& e : a.entries()) out.push_back(e);
    for (const auto& e : b.entries()) out.push_back({e.row, e.col, sb * e.value});
    return SparseOperator(a.dimension(), std::move(out));
}

}  // namespace

SparseOperator add(const SparseOperator& a, const SparseOperator& b) {
    require_same_dimension(a, b, "add");
    return combine(a, b, 1.0);
}

SparseOperator subtract(const SparseOperator& a, const SparseOperator& b) {
    require_same_dimension(a, b, "subtract");
    return combine(a, b, -1.0);
}

SparseOperator scale(Complex z, const SparseOperator& a) {
    std::vector<Entry> out(a.entries());
    for (auto& e : out) e.value *= z;
    return SparseOperator(a.dimension(), std::move(out));
}

SparseOperator multiply(const SparseOperator& a, const SparseOperator& b) {
    require_same_dimension(a, b, "multiply");
    const std::size_t n = a.dimension();
    std::vector<Complex> acc(n);
    std::vector<char> touched(n, 0);
    std::vector<std::size_t> cols;
    std::vector<Entry> out;
    for (std::size_t r = 0; r < n; ++r) {
        cols.clear();
        for (const auto& ea : a.row(r)) {
            for (const auto& eb : b.row(ea.col)) {
                if (!touched[eb.col]) {
                    touched[eb.col] = 1;
                    cols.push_back(eb.col);
                }
                acc[eb.col] += ea.value * eb.value;
            }
        }
        std::sort(cols.begin(), cols.end());
        for (std::size_t c : cols) {
            out.push_back({r, c, acc[c]});
            acc[c] = 0.0;
            touched[c] = 0;
        }
    }
    return SparseOperator(n, std::move(out));
}

SparseOperator adjoint(const SparseOperator& a) {
    std::vector<Entry> out;
    out.reserve(a.nonzeros());
    for (const auto& e : a.entries()) out.push_back({e.col, e.row, std::conj(e.value)});
    return SparseOperator(a.dimension(), std::move(out));
}

SparseOperator commutator(const SparseOperator& a, const SparseOperator& b) {
    return subtract(multiply(a, b), multiply(b, a));
}

double max_abs_difference(const SparseOperator& a, const SparseOperator& b) {
    return subtract(a, b).max_abs();
}

double hermiticity_defect(const SparseOperator& a) {
    return max_abs_difference(a, adjoint(a));
}

SparseOperator project(const SparseOperator& a, const std::vector<bool>& keep) {
    if (keep.size() != a.dimension()) throw std::invalid_argument("project: mask size mismatch");
    std::vector<Entry> out;
    for (const auto& e : a.entries()) {
        if (keep[e.row] && keep[e.col]) out.push_back(e);
    }
    return SparseOperator(a.dimension(), std::move(out));
}

std::vector<bool> interior_mask(const Basis& basis, std::span<const std::size_t> modes) {
    const auto& layout = basis.layout();
    std::vector<std::size_t> all;
    if (modes.empty()) {
        all.resize(layout.mode_count());
        for (std::size_t m = 0; m < all.size(); ++m) all[m] = m;
        modes = all;
    }
    std::vector<bool> keep(basis.size(), true);
    for (std::size_t p = 0; p < basis.size(); ++p) {
        const auto flat = basis.flat(p);
        for (std::size_t m : modes) {
            if (layout.occupation(flat, m) >= layout.cutoff(m)) {
                keep[p] = false;
                break;
            }
        }
    }
    return keep;
}

// -------------------------------------------------------------- polynomials

Polynomial adjoint(const Polynomial& p) {
    Polynomial out;
    out.reserve(p.size());
    for (const auto& mono : p) {
        Monomial m{std::conj(mono.coeff), {}};
        for (auto it = mono.ops.rbegin(); it != mono.ops.rend(); ++it) m.ops.push_back({it->mode, !it->raise});
        out.push_back(std::move(m));
    }
    return out;
}

namespace {

// Applies the ladder product to `occ` in place. Returns the accumulated
// amplitude factor (0 if annihilated). With `truncate` false, occupations
// may exceed the cutoff and `overflow` reports whether that happened.
double apply_ladders(const ModeLayout& layout, const std::vector<Ladder>& ops, std::vector<int>& occ,
                     bool truncate, bool* overflow) {
    // Integer product under a single square root: exact for number-conserving
    // monomials such as a a^dag (while the product stays below 2^53).
    double product = 1.0;
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
        int& n = occ[it->mode];
        if (it->raise) {
            if (n >= layout.cutoff(it->mode)) {
                if (truncate) return 0.0;
                if (overflow) *overflow = true;
            }
            product *= static_cast<double>(n + 1);
            ++n;
        } else {
            if (n == 0) return 0.0;
            product *= static_cast<double>(n);
            --n;
        }
    }
    return std::sqrt(product);
}

}  // namespace

SparseOperator materialize(const Basis& basis, const Polynomial& p, bool drop_outside) {
    const auto& layout = basis.layout();
    for (const auto& mono : p) {
        for (const auto& l : mono.ops) {
            if (l.mode >= layout.mode_count()) throw PreconditionError("materialize: mode index out of range");
        }
    }
    std::vector<Entry> entries;
    std::vector<int> occ0, occ;
    for (std::size_t col = 0; col < basis.size(); ++col) {
        occ0 = layout.decode(basis.flat(col));
        for (const auto& mono : p) {
            if (mono.coeff == Complex{}) continue;
            occ = occ0;
            const double f = apply_ladders(layout, mono.ops, occ, true, nullptr);
            if (f == 0.0) continue;
            const auto row = basis.position(layout.encode(occ));
            if (row < 0) {
                if (drop_outside) continue;
                throw PreconditionError("materialize: operator leaves the basis subset");
            }
            entries.push_back({static_cast<std::size_t>(row), col, mono.coeff * f});
        }
    }
    return SparseOperator(basis.size(), std::move(entries));
}

std::vector<bool> truncation_boundary(const Basis& basis, const Polynomial& p) {
    const auto& layout = basis.layout();
    std::vector<bool> boundary(basis.size(), false);
    std::vector<int> occ0, occ;
    for (std::size_t pos = 0; pos < basis.size(); ++pos) {
        occ0 = layout.decode(basis.flat(pos));
        for (const auto& mono : p) {
            if (mono.coeff == Complex{}) continue;
            occ = occ0;
            bool overflow = false;
            if (apply_ladders(layout, mono.ops, occ, false, &overflow) != 0.0 && overflow) {
                boundary[pos] = true;
                break;
            }
        }
    }
    return boundary;
}

SparseOperator annihilator(const ModeLayout& layout, const ModeId& mode) {
    const auto m = layout.index_of(mode);
    auto shared = std::make_shared<const ModeLayout>(layout);
    return materialize(Basis::full(shared), {Monomial{1.0, {lower(m)}}});
}

SparseOperator number_operator(const ModeLayout& layout, const ModeId& mode) {
    const auto m = layout.index_of(mode);
    auto shared = std::make_shared<const ModeLayout>(layout);
    return materialize(Basis::full(shared), {Monomial{1.0, {raise(m), lower(m)}}});
}

// ------------------------------------------------------------------ states

StateVector apply(const SparseOperator& a, const StateVector& psi) {
    if (static_cast<std::size_t>(psi.size()) != a.dimension()) {
        throw std::invalid_argument("apply: dimension mismatch");
    }
    StateVector out = StateVector::Zero(psi.size());
    for (const auto& e : a.entries()) {
        out[static_cast<Eigen::Index>(e.row)] += e.value * psi[static_cast<Eigen::Index>(e.col)];
    }
    return out;
}

Complex expectation(const SparseOperator& a, const StateVector& psi) {
    if (static_cast<std::size_t>(psi.size()) != a.dimension()) {
        throw std::invalid_argument("expectation: dimension mismatch");
    }
    Complex sum{};
    for (const auto& e : a.entries()) {
        sum += std::conj(psi[static_cast<Eigen::Index>(e.row)]) * e.value * psi[static_cast<Eigen::Index>(e.col)];
    }
    return sum;
}

StateVector number_state(const Basis& basis, std::span<const int> occupations) {
    const auto flat = basis.layout().encode(occupations);
    const auto pos = basis.position(flat);
    if (pos < 0) throw PreconditionError("number_state: state not in basis");
    StateVector psi = StateVector::Zero(static_cast<Eigen::Index>(basis.size()));
    psi[pos] = 1.0;
    return psi;
}

StateVector number_state(const Basis& basis, const std::array<int, 6>& trader_occupations) {
    const auto& layout = basis.layout();
    std::vector<int> occ(layout.mode_count(), 0);
    const auto tm = trader_modes();
    for (std::size_t k = 0; k < tm.size(); ++k) {
        if (layout.contains(tm[k])) {
            occ[layout.index_of(tm[k])] = trader_occupations[k];
        } else if (trader_occupations[k] != 0) {
            throw PreconditionError("number_state: layout lacks mode " + to_string(tm[k]));
        }
    }
    return number_state(basis, occ);
}

}  // namespace infotrade::fock
