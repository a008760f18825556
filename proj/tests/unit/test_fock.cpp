#include "infotrade/errors.hpp"
#include "infotrade/fock.hpp"

#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace infotrade;
using namespace infotrade::fock;

namespace {

std::shared_ptr<const ModeLayout> small_layout() {
    return std::make_shared<const ModeLayout>(build_layout({2, 1, 2, 1, 2, 1}, 1, 1));
}

SparseOperator random_operator(std::size_t dim, std::mt19937& rng, double density) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::bernoulli_distribution keep(density);
    std::vector<Entry> entries;
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c)
            if (keep(rng)) entries.push_back({r, c, {u(rng), u(rng)}});
    return SparseOperator(dim, entries);
}

Eigen::MatrixXcd dense_of(const SparseOperator& a) { return a.to_dense(); }

}  // namespace

TEST_CASE("layout encodes and decodes mixed-radix indices", "[fock]") {
    const auto layout = build_layout({3, 2, 1, 1, 2, 3}, {2, 1}, 2);
    REQUIRE(layout.mode_count() == 9);
    REQUIRE(layout.dimension() == 4ull * 3 * 2 * 2 * 3 * 4 * 3 * 3 * 3);
    for (std::uint64_t flat = 0; flat < layout.dimension(); flat += 7) {
        const auto occ = layout.decode(flat);
        REQUIRE(layout.encode(occ) == flat);
        for (std::size_t m = 0; m < occ.size(); ++m) REQUIRE(layout.occupation(flat, m) == occ[m]);
    }
    REQUIRE(layout.modes()[6].role == Role::Reservoir);
    REQUIRE(layout.modes()[6].trader == 1);
    REQUIRE(layout.modes()[8].trader == 2);
}

TEST_CASE("layout rejects overflow and bad cutoffs", "[fock]") {
    REQUIRE_THROWS_AS(build_layout({3, 3, 3, 3, 3, 3}, 6, 3, 1u << 20), PreconditionError);
    REQUIRE_THROWS_AS(build_layout({0, 3, 3, 3, 3, 3}, 0, 1), PreconditionError);
    const auto layout = build_layout({1, 1, 1, 1, 1, 1}, 0, 1);
    REQUIRE_THROWS_AS(layout.encode(std::vector<int>{2, 0, 0, 0, 0, 0}), PreconditionError);
}

TEST_CASE("truncated commutation relations hold exactly", "[fock][ccr]") {
    const auto layout = build_layout({3, 2, 3, 1, 2, 1}, 1, 2);
    const std::size_t d = layout.dimension();
    const auto basis = Basis::full(std::make_shared<const ModeLayout>(layout));
    for (std::size_t m = 0; m < layout.mode_count(); ++m) {
        const auto a = annihilator(layout, layout.modes()[m]);
        // I - (N+1) P_top, diagonal
        std::vector<double> expect(d);
        const int top = layout.cutoff(m);
        for (std::size_t k = 0; k < d; ++k) expect[k] = layout.occupation(k, m) == top ? -static_cast<double>(top) : 1.0;
        const auto target = SparseOperator::diagonal(expect);
        // products formed as ladder monomials are exact
        const auto ccr = materialize(basis, {{1.0, {lower(m), raise(m)}}, {-1.0, {raise(m), lower(m)}}});
        REQUIRE(max_abs_difference(ccr, target) == 0.0);
        // products of the stored matrices round sqrt(n) sqrt(n)
        REQUIRE(max_abs_difference(commutator(a, adjoint(a)), target) <= 4.0 * top * 2.3e-16);
        for (std::size_t n = m + 1; n < layout.mode_count(); ++n) {
            const auto b = annihilator(layout, layout.modes()[n]);
            REQUIRE(commutator(a, b).is_zero());
            REQUIRE(commutator(a, adjoint(b)).is_zero());
        }
    }
}

TEST_CASE("annihilator matches the dense Kronecker reference", "[fock]") {
    const auto layout = small_layout();
    for (std::size_t m = 0; m < layout->mode_count(); ++m) {
        const auto a = annihilator(*layout, layout->modes()[m]);
        const auto ref = support::dense_lower(layout->cutoffs(), m);
        REQUIRE((dense_of(a) - ref).cwiseAbs().maxCoeff() < 1e-15);
        const auto n = number_operator(*layout, layout->modes()[m]);
        REQUIRE((dense_of(n) - ref.adjoint() * ref).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("sparse algebra agrees with dense arithmetic on random operators", "[fock][property]") {
    std::mt19937 rng(20240607);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t dim = 5 + trial % 7;
        const auto a = random_operator(dim, rng, 0.3);
        const auto b = random_operator(dim, rng, 0.3);
        const Complex z{0.7, -1.3};
        const auto A = dense_of(a), B = dense_of(b);
        CHECK((dense_of(a + b) - (A + B)).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((dense_of(a - b) - (A - B)).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((dense_of(z * a) - z * A).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((dense_of(a * b) - A * B).cwiseAbs().maxCoeff() < 1e-13);
        CHECK((dense_of(adjoint(a)) - A.adjoint()).cwiseAbs().maxCoeff() == 0.0);
        CHECK((dense_of(commutator(a, b)) - (A * B - B * A)).cwiseAbs().maxCoeff() < 1e-13);
        Eigen::VectorXcd psi = Eigen::VectorXcd::Random(dim);
        const Eigen::VectorXcd ref = A * psi;
        const double apply_err = (fock::apply(a, psi) - ref).norm();
        const double expect_err = std::abs(expectation(a, psi) - psi.dot(ref));
        CHECK(apply_err < 1e-13);
        CHECK(expect_err < 1e-12);
    }
}

TEST_CASE("duplicate entries are summed and exact zeros dropped", "[fock]") {
    const SparseOperator op(3, {{0, 1, 1.0}, {2, 2, 4.0}, {0, 1, 2.0}, {1, 0, 1.0}, {1, 0, -1.0}});
    REQUIRE(op.nonzeros() == 2);
    REQUIRE(op.at(0, 1) == Complex(3.0));
    REQUIRE(op.at(1, 0) == Complex(0.0));
    REQUIRE_THROWS(SparseOperator(2, {{2, 0, 1.0}}));
}

TEST_CASE("materialized polynomials equal products of truncated ladders", "[fock]") {
    const auto layout = small_layout();
    const auto basis = Basis::full(layout);
    // 0.5 a0 a2^dag a1^dag a3 + (1 - i) a4^dag a6
    const Polynomial poly{{0.5, {lower(0), raise(2), raise(1), lower(3)}}, {{1.0, -1.0}, {raise(4), lower(6)}}};
    const auto& cut = layout->cutoffs();
    const auto L = [&](std::size_t m) { return support::dense_lower(cut, m); };
    const Eigen::MatrixXcd ref = 0.5 * L(0) * L(2).adjoint() * L(1).adjoint() * L(3) +
                                 Complex(1.0, -1.0) * L(4).adjoint() * L(6);
    REQUIRE((dense_of(materialize(basis, poly)) - ref).cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE((dense_of(materialize(basis, adjoint(poly))) - ref.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("subset materialization is the projection of the full operator", "[fock]") {
    const auto layout = small_layout();
    const auto full = Basis::full(layout);
    // a number-conserving hop keeps the subset {total occupation == 2} closed
    const Polynomial hop{{1.0, {raise(0), lower(2)}}, {1.0, {raise(2), lower(0)}}, {2.0, {raise(1), lower(1)}}};
    std::vector<std::uint64_t> flat;
    for (std::uint64_t k = 0; k < layout->dimension(); ++k) {
        const auto occ = layout->decode(k);
        int total = 0;
        for (int v : occ) total += v;
        if (total == 2) flat.push_back(k);
    }
    const auto sub = Basis::subset(layout, flat);
    const auto big = materialize(full, hop).to_dense();
    const auto small = materialize(sub, hop).to_dense();
    for (std::size_t r = 0; r < sub.size(); ++r)
        for (std::size_t c = 0; c < sub.size(); ++c) REQUIRE(small(r, c) == big(sub.flat(r), sub.flat(c)));
    // leaving the subset is an error unless dropped explicitly
    const Polynomial leave{{1.0, {raise(0)}}};
    REQUIRE_THROWS_AS(materialize(sub, leave), PreconditionError);
    REQUIRE(materialize(sub, leave, true).is_zero());
}

TEST_CASE("truncation boundary flags only overflowing nonzero amplitudes", "[fock]") {
    const auto layout = std::make_shared<const ModeLayout>(build_layout({2, 2, 2, 2, 2, 2}, 0, 1));
    const auto basis = Basis::full(layout);
    const Polynomial hop{{1.0, {raise(0), lower(1)}}};
    const auto flags = truncation_boundary(basis, hop);
    for (std::uint64_t k = 0; k < layout->dimension(); ++k) {
        const bool expect = layout->occupation(k, 0) == 2 && layout->occupation(k, 1) > 0;
        REQUIRE(flags[k] == expect);
    }
    // zero coefficient never flags
    const auto none = truncation_boundary(basis, Polynomial{{0.0, {raise(0)}}});
    for (bool f : none) REQUIRE_FALSE(f);
}

TEST_CASE("interior mask and projection", "[fock]") {
    const auto layout = std::make_shared<const ModeLayout>(build_layout({1, 2, 1, 1, 1, 1}, 0, 1));
    const auto basis = Basis::full(layout);
    const std::vector<std::size_t> modes{1};
    const auto mask = interior_mask(basis, modes);
    for (std::uint64_t k = 0; k < layout->dimension(); ++k) REQUIRE(mask[k] == (layout->occupation(k, 1) <= 1));
    const auto id = SparseOperator::identity(basis.size());
    const auto p = project(id, mask);
    for (std::uint64_t k = 0; k < layout->dimension(); ++k) REQUIRE(p.at(k, k) == Complex(mask[k] ? 1.0 : 0.0));
}

TEST_CASE("number states land on the requested occupations", "[fock]") {
    const auto layout = small_layout();
    const auto basis = Basis::full(layout);
    const std::array<int, 6> occ{2, 1, 0, 1, 2, 0};
    const auto psi = number_state(basis, occ);
    REQUIRE(psi.norm() == 1.0);
    for (std::size_t m = 0; m < 6; ++m) {
        const auto n = number_operator(*layout, layout->modes()[m]);
        REQUIRE(expectation(n, psi).real() == occ[m]);
    }
    REQUIRE_THROWS_AS(number_state(basis, std::array<int, 6>{3, 0, 0, 0, 0, 0}), PreconditionError);
}
