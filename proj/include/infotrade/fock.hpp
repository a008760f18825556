#pragma once

// Truncated multi-mode bosonic Fock space: mode layouts, basis enumeration,
// ladder/number operators and a sparse complex operator algebra.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace infotrade::fock {

using Complex = std::complex<double>;
using StateVector = Eigen::VectorXcd;

enum class Role { Share, Cash, Info, Reservoir };

std::string to_string(Role role);

struct ModeId {
    Role role = Role::Share;
    int trader = 1;           // 1 or 2
    int reservoir_index = 0;  // only meaningful for Role::Reservoir

    friend bool operator==(const ModeId&, const ModeId&) = default;
};

std::string to_string(const ModeId& mode);

inline constexpr std::uint64_t kDefaultMaxDimension = std::uint64_t{1} << 24;

// Ordered list of modes with per-mode occupation cutoffs. The flat index of a
// basis state is the mixed-radix number whose most significant digit is the
// first mode, so operators are Kronecker products in layout order.
class ModeLayout {
public:
    ModeLayout(std::vector<ModeId> modes, std::vector<int> cutoffs,
               std::uint64_t max_dimension = kDefaultMaxDimension);

    std::size_t mode_count() const { return modes_.size(); }
    const std::vector<ModeId>& modes() const { return modes_; }
    const std::vector<int>& cutoffs() const { return cutoffs_; }
    int cutoff(std::size_t m) const { return cutoffs_[m]; }
    std::uint64_t dimension() const { return dimension_; }
    std::uint64_t stride(std::size_t m) const { return strides_[m]; }

    bool contains(const ModeId& mode) const;
    std::size_t index_of(const ModeId& mode) const;  // throws if absent

    std::uint64_t encode(std::span<const int> occupations) const;
    std::vector<int> decode(std::uint64_t flat) const;
    int occupation(std::uint64_t flat, std::size_t m) const {
        return static_cast<int>((flat / strides_[m]) % static_cast<std::uint64_t>(cutoffs_[m] + 1));
    }

private:
    std::vector<ModeId> modes_;
    std::vector<int> cutoffs_;
    std::vector<std::uint64_t> strides_;
    std::uint64_t dimension_ = 1;
};

// Canonical trader-mode order: s1, s2, c1, c2, i1, i2.
std::array<ModeId, 6> trader_modes();

// Layout in canonical order s1,s2,c1,c2,i1,i2 followed by reservoir modes of
// trader 1 then trader 2.
ModeLayout build_layout(const std::array<int, 6>& trader_cutoffs,
                        std::array<int, 2> reservoir_modes, int reservoir_cutoff,
                        std::uint64_t max_dimension = kDefaultMaxDimension);
ModeLayout build_layout(const std::array<int, 6>& trader_cutoffs, int reservoir_modes_per_trader,
                        int reservoir_cutoff,
                        std::uint64_t max_dimension = kDefaultMaxDimension);

// A set of basis states the operators act on: either the full truncated
// space, or a sorted subset (e.g. a conserved sector).
class Basis {
public:
    static Basis full(std::shared_ptr<const ModeLayout> layout);
    static Basis subset(std::shared_ptr<const ModeLayout> layout, std::vector<std::uint64_t> flat);

    const ModeLayout& layout() const { return *layout_; }
    std::shared_ptr<const ModeLayout> layout_ptr() const { return layout_; }
    std::size_t size() const { return size_; }
    bool is_full() const { return full_; }
    std::uint64_t flat(std::size_t pos) const { return full_ ? pos : flat_[pos]; }
    // Position of a flat index in this basis, or -1 if absent.
    std::int64_t position(std::uint64_t flat) const;

private:
    std::shared_ptr<const ModeLayout> layout_;
    std::vector<std::uint64_t> flat_;
    std::size_t size_ = 0;
    bool full_ = true;
};

struct Entry {
    std::size_t row;
    std::size_t col;
    Complex value;
};

// Sparse complex matrix kept as a row-major sorted coordinate list without
// duplicate coordinates. Exact zeros are never stored.
class SparseOperator {
public:
    SparseOperator() = default;
    explicit SparseOperator(std::size_t dim) : dim_(dim), row_start_(dim + 1, 0) {}
    // Entries may be unsorted and contain duplicates; duplicates are summed in
    // insertion order.
    SparseOperator(std::size_t dim, std::vector<Entry> entries, double drop_tolerance = 0.0);

    static SparseOperator identity(std::size_t dim);
    static SparseOperator diagonal(std::span<const double> diag);

    std::size_t dimension() const { return dim_; }
    std::size_t nonzeros() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }
    std::span<const Entry> row(std::size_t r) const {
        return {entries_.data() + row_start_[r], entries_.data() + row_start_[r + 1]};
    }
    Complex at(std::size_t r, std::size_t c) const;
    double max_abs() const;
    bool is_zero() const { return entries_.empty(); }

    Eigen::MatrixXcd to_dense() const;

private:
    std::size_t dim_ = 0;
    std::vector<Entry> entries_;
    std::vector<std::size_t> row_start_;

    void index_rows();
};

SparseOperator add(const SparseOperator& a, const SparseOperator& b);
SparseOperator subtract(const SparseOperator& a, const SparseOperator& b);
SparseOperator scale(Complex z, const SparseOperator& a);
SparseOperator multiply(const SparseOperator& a, const SparseOperator& b);
SparseOperator adjoint(const SparseOperator& a);
SparseOperator commutator(const SparseOperator& a, const SparseOperator& b);

inline SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) { return add(a, b); }
inline SparseOperator operator-(const SparseOperator& a, const SparseOperator& b) { return subtract(a, b); }
inline SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) { return multiply(a, b); }
inline SparseOperator operator*(Complex z, const SparseOperator& a) { return scale(z, a); }

// Largest |A_ij - B_ij|.
double max_abs_difference(const SparseOperator& a, const SparseOperator& b);
// Largest |A_ij - conj(A_ji)|.
double hermiticity_defect(const SparseOperator& a);

// Keep only rows and columns whose basis position satisfies `keep`.
// Dimension is unchanged; other entries are dropped.
SparseOperator project(const SparseOperator& a, const std::vector<bool>& keep);

// Basis states with occupation <= cutoff - 1 on every listed mode (all modes
// when `modes` is empty).
std::vector<bool> interior_mask(const Basis& basis, std::span<const std::size_t> modes = {});

// Product of ladder operators, written left to right as in the formula and
// applied to kets right to left.
struct Ladder {
    std::size_t mode;
    bool raise;
};

struct Monomial {
    Complex coeff;
    std::vector<Ladder> ops;
};

using Polynomial = std::vector<Monomial>;

inline Ladder lower(std::size_t mode) { return {mode, false}; }
inline Ladder raise(std::size_t mode) { return {mode, true}; }

Polynomial adjoint(const Polynomial& p);

// Matrix of a polynomial on the given basis. Raising a mode at its cutoff
// gives zero, which is exactly the product of truncated ladder matrices.
// Targets outside a subset basis are an error unless `drop_outside` is set.
SparseOperator materialize(const Basis& basis, const Polynomial& p, bool drop_outside = false);

// True for basis states from which some monomial of `p` with nonzero
// coefficient would raise a mode beyond its cutoff in the untruncated space.
std::vector<bool> truncation_boundary(const Basis& basis, const Polynomial& p);

SparseOperator annihilator(const ModeLayout& layout, const ModeId& mode);
SparseOperator number_operator(const ModeLayout& layout, const ModeId& mode);

StateVector apply(const SparseOperator& a, const StateVector& psi);
Complex expectation(const SparseOperator& a, const StateVector& psi);

// Unit vector on the basis state with the given trader occupations
// (n1, n2, k1, k2, I1, I2); reservoir modes in vacuum.
StateVector number_state(const Basis& basis, const std::array<int, 6>& trader_occupations);
StateVector number_state(const Basis& basis, std::span<const int> occupations);

}  // namespace infotrade::fock
