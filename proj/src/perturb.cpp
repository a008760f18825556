#include "infotrade/perturb.hpp"

#include "infotrade/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace infotrade::perturb {

using fock::lower;
using fock::Monomial;
using fock::Polynomial;
using fock::raise;
using fock::Role;

namespace {

constexpr Complex kI{0.0, 1.0};

void require_kernel_preconditions(const ModelParams& p) {
    if (model::omega_hat(p) == 0.0) {
        throw PreconditionError("omega_hat = omega_s1 - omega_s2 - omega_c1 + omega_c2 must be nonzero");
    }
    for (int j = 0; j < 2; ++j) {
        if (p.Omega_r[j] == 0.0) {
            throw PreconditionError("Omega_r of trader " + std::to_string(j + 1) + " must be nonzero");
        }
    }
}

// Exponent i(w - Omega_j) - kappa_j of eta^s_j / eta^c_j.
Complex eta_exponent(const ModelParams& p, int j, double w) {
    return Complex(-model::damping_rate(p, j + 1), w - p.Omega[j]);
}

}  // namespace

namespace {

void require_common(const PerturbInputs& in) {
    in.params.validate();
    if (in.params.lambda != in.params.lambda_inf) {
        throw PreconditionError("the perturbative solution assumes lambda == lambda_inf (got lambda = " +
                                std::to_string(in.params.lambda) + ", lambda_inf = " +
                                std::to_string(in.params.lambda_inf) + ")");
    }
    for (int v : in.occ) {
        if (v < 0) throw PreconditionError("initial occupations must be >= 0");
    }
}

}  // namespace

void PerturbInputs::validate() const {
    require_common(*this);
    require_kernel_preconditions(params);
}

Complex exp_kernel(Complex z, double t) {
    if (z == Complex(0.0)) return t;
    const Complex zt = z * t;
    if (std::abs(zt) < 1e-8) return t * (1.0 + zt / 2.0 + zt * zt / 6.0);
    // e^{x+iy} - 1 = expm1(x) cos y - 2 sin^2(y/2) + i e^x sin y, no cancellation.
    const double x = zt.real(), y = zt.imag();
    const double h = std::sin(0.5 * y);
    const Complex em1(std::expm1(x) * std::cos(y) - 2.0 * h * h, std::exp(x) * std::sin(y));
    return em1 / z;
}

double eta_modulus_squared(double detuning, double kappa, double t) {
    const double den = detuning * detuning + kappa * kappa;
    if (den == 0.0) return t * t;
    return (std::exp(-2.0 * kappa * t) - 2.0 * std::exp(-kappa * t) * std::cos(detuning * t) + 1.0) / den;
}

Kernels eval_kernels(const ModelParams& p, double t) {
    require_kernel_preconditions(p);
    const double wh = model::omega_hat(p);
    Kernels k;
    k.eta1 = (std::exp(kI * (wh * t)) - 1.0) / wh;
    k.eta2 = (t - kI * std::conj(k.eta1)) / wh;
    for (int j = 0; j < 2; ++j) {
        k.eta_s[j] = exp_kernel(eta_exponent(p, j, p.omega_s[j]), t);
        k.eta_c[j] = exp_kernel(eta_exponent(p, j, p.omega_c[j]), t);
        k.ik_coeff[j] = std::exp(-Complex(model::damping_rate(p, j + 1), p.Omega[j]) * t);
    }
    return k;
}

IkClosedForm ik_closed_form_full(const ModelParams& p, int trader, double t) {
    if (trader != 1 && trader != 2) throw PreconditionError("trader must be 1 or 2");
    const int j = trader - 1;
    const double kappa = model::damping_rate(p, trader);
    const Complex z0(kappa, p.Omega[j]);
    const Complex decay = std::exp(-z0 * t);
    const double gamma = p.gamma[j];
    const double slope = p.Omega_r[j];
    IkClosedForm out;
    out.coefficient = decay;
    // e^{-z0 t} rho(q, t) = integral_0^t e^{-z0 (t - t1)} e^{-i Omega_r q t1} dt1, no growing factor.
    out.reservoir = [=](double q) -> Complex {
        if (gamma == 0.0 || t == 0.0) return 0.0;
        const Complex w = z0 - kI * (slope * q);
        if (std::abs(w) * t < 1e-8) return -kI * gamma * t * decay;
        return -kI * gamma * (std::exp(-kI * (slope * q * t)) - decay) / w;
    };
    return out;
}

std::array<long long, 4> trade_brackets(long long n1, long long n2, long long k1, long long k2) {
    return {n1 * (k1 * n2 - k1 * k2 - n2 * k2 - k2) + n2 * k1 * (1 + k2),
            n2 * (n1 * k2 - k1 * k2 - k1 * n1 - k1) + n1 * k2 * (1 + k1),
            k1 * (n1 * k2 - n1 * n2 - n2 * k2 - n2) + n1 * k2 * (1 + n2),
            k2 * (k1 * n2 - n1 * n2 - n1 * k1 - n1) + k1 * n2 * (1 + n1)};
}

MeanOccupations mean_occupations(const PerturbInputs& in, double t) {
    in.validate();
    const auto& p = in.params;
    const auto& o = in.occ;
    const auto k = eval_kernels(p, t);
    const double wh = model::omega_hat(p);
    const double l2 = p.lambda * p.lambda;
    const double half_sin = std::sin(0.5 * wh * t);
    // 2 lambda^2 (1 - cos(wh t)) / wh^2
    const double trade = 4.0 * l2 * half_sin * half_sin / (wh * wh);
    const auto b = trade_brackets(o[0], o[1], o[2], o[3]);
    MeanOccupations m;
    for (int j = 0; j < 2; ++j) {
        m.n[j] = o[j] + trade * static_cast<double>(b[j]) + l2 * o[4 + j] * std::norm(k.eta_s[j]);
        m.k[j] = o[2 + j] + trade * static_cast<double>(b[2 + j]) + l2 * o[4 + j] * std::norm(k.eta_c[j]);
    }
    return m;
}

std::array<double, 2> delta_pi(const PerturbInputs& in, double t) {
    in.validate();
    const auto k = eval_kernels(in.params, t);
    const double l2 = in.params.lambda * in.params.lambda;
    return {l2 * in.occ[4] * (std::norm(k.eta_s[0]) + std::norm(k.eta_c[0])),
            l2 * in.occ[5] * (std::norm(k.eta_s[1]) + std::norm(k.eta_c[1]))};
}

std::array<double, 2> delta_pi_infinity(const PerturbInputs& in) {
    // The limit involves only the information terms, so omega_hat may vanish.
    require_common(in);
    const auto& p = in.params;
    std::array<double, 2> out{};
    for (int j = 0; j < 2; ++j) {
        const double kappa = model::damping_rate(p, j + 1);
        if (!(kappa > 0.0)) {
            throw PreconditionError("asymptotic value undefined: decay rate pi gamma^2 / Omega_r of trader " +
                                    std::to_string(j + 1) + " is not positive");
        }
        const double ds = p.omega_s[j] - p.Omega[j];
        const double dc = p.omega_c[j] - p.Omega[j];
        const double k2 = kappa * kappa;
        out[j] = p.lambda * p.lambda * in.occ[4 + j] * (1.0 / (ds * ds + k2) + 1.0 / (dc * dc + k2));
    }
    return out;
}

SparseOperator Expansion::at(double lambda) const {
    return fock::add(order0, fock::add(fock::scale(lambda, order1), fock::scale(lambda * lambda, order2)));
}

Complex phase_integral(const std::function<Complex(double)>& f, double w, double t) {
    if (t == 0.0) return 0.0;
    using boost::math::quadrature::gauss_kronrod;
    const auto g = [&](double x) { return f(x) * std::exp(kI * (w * x)); };
    const double re = gauss_kronrod<double, 31>::integrate([&](double x) { return g(x).real(); }, 0.0, t, 20, 1e-14);
    const double im = gauss_kronrod<double, 31>::integrate([&](double x) { return g(x).imag(); }, 0.0, t, 20, 1e-14);
    return {re, im};
}

PerturbativeOperators build_perturbative_operators(const Basis& basis, const PerturbInputs& in, double t) {
    in.validate();
    if (!basis.is_full()) throw PreconditionError("perturbative operators require the full basis of a layout");
    const auto& layout = basis.layout();
    const auto& p = in.params;
    const auto trader = fock::trader_modes();
    std::array<std::size_t, 6> m{};
    for (std::size_t k = 0; k < 6; ++k) {
        m[k] = layout.index_of(trader[k]);
        if (in.occ[k] + 1 > layout.cutoff(m[k])) {
            throw PreconditionError("cutoff of " + fock::to_string(trader[k]) + " must be at least " +
                                    std::to_string(in.occ[k] + 1) +
                                    " so the quartic monomials act without truncation");
        }
    }
    const auto s1 = m[0], s2 = m[1], c1 = m[2], c2 = m[3], i1 = m[4], i2 = m[5];
    const auto op = [&](const Polynomial& poly) { return fock::materialize(basis, poly); };
    const auto mono = [](Complex z, std::vector<fock::Ladder> ops) { return Monomial{z, std::move(ops)}; };

    const auto k = eval_kernels(p, t);
    const double wh = model::omega_hat(p);

    const Polynomial X1{mono(1.0, {lower(s2), lower(c1), raise(c2)})};
    const Polynomial X2{mono(1.0, {lower(s1), raise(c1), lower(c2)})};
    const Polynomial X3{mono(1.0, {lower(s1), raise(s2), lower(c2)})};
    const Polynomial X4{mono(1.0, {raise(s1), lower(s2), lower(c1)})};

    const Polynomial Y1{mono(1.0, {lower(s1), raise(c1), lower(c1), lower(c2), raise(c2)}),
                        mono(1.0, {lower(s1), lower(s2), raise(s2), lower(c2), raise(c2)}),
                        mono(-1.0, {lower(s1), lower(c1), raise(c1), lower(s2), raise(s2)})};
    const Polynomial Y2{mono(-1.0, {lower(s2), lower(s1), raise(s1), raise(c1), lower(c1)}),
                        mono(1.0, {lower(s2), lower(s1), raise(s1), raise(c2), lower(c2)}),
                        mono(-1.0, {lower(s2), lower(c1), raise(c1), raise(c2), lower(c2)})};
    const Polynomial Y3{mono(1.0, {lower(c1), lower(s1), raise(s1), raise(c2), lower(c2)}),
                        mono(-1.0, {lower(c1), lower(s2), raise(s2), raise(c2), lower(c2)}),
                        mono(-1.0, {lower(c1), lower(s1), raise(s1), raise(s2), lower(s2)})};
    const Polynomial Y4{mono(1.0, {lower(c2), raise(s1), lower(s1), lower(s2), raise(s2)}),
                        mono(1.0, {lower(c2), raise(s1), lower(s1), raise(c1), lower(c1)}),
                        mono(-1.0, {lower(c2), raise(s2), lower(s2), raise(c1), lower(c1)})};

    // Kernels as functions of the inner time for the Q integrals.
    const std::array<Complex, 2> zs{eta_exponent(p, 0, p.omega_s[0]), eta_exponent(p, 1, p.omega_s[1])};
    const std::array<Complex, 2> zc{eta_exponent(p, 0, p.omega_c[0]), eta_exponent(p, 1, p.omega_c[1])};
    const auto eta_s = [&](int j) { return [z = zs[j]](double x) { return exp_kernel(z, x); }; };
    const auto eta_c = [&](int j) { return [z = zc[j]](double x) { return exp_kernel(z, x); }; };
    const auto conj_of = [](auto f) { return [f](double x) { return std::conj(f(x)); }; };
    const auto A = [&](auto f, double w) { return phase_integral(f, w, t); };

    const Polynomial Q1{mono(-kI * -A(conj_of(eta_c(1)), wh), {lower(s2), lower(c1), raise(i2)}),
                        mono(-kI * A(eta_c(0), wh), {lower(s2), raise(c2), lower(i1)}),
                        mono(-kI * A(eta_s(1), wh), {lower(c1), raise(c2), lower(i2)})};
    const Polynomial Q2{mono(-kI * A(eta_c(1), -wh), {lower(s1), raise(c1), lower(i2)}),
                        mono(-kI * -A(conj_of(eta_c(0)), -wh), {lower(s1), lower(c2), raise(i1)}),
                        mono(-kI * A(eta_s(0), -wh), {raise(c1), lower(c2), lower(i1)})};
    const Polynomial Q3{mono(-kI * A(eta_c(1), -wh), {lower(s1), raise(s2), lower(i2)}),
                        mono(-kI * A(eta_s(0), -wh), {raise(s2), lower(c2), lower(i1)}),
                        mono(-kI * -A(conj_of(eta_s(1)), -wh), {lower(s1), lower(c2), raise(i2)})};
    const Polynomial Q4{mono(-kI * A(eta_c(0), wh), {raise(s1), lower(s2), lower(i1)}),
                        mono(-kI * A(eta_s(1), wh), {raise(s1), lower(c1), lower(i2)}),
                        mono(-kI * -A(conj_of(eta_s(0)), wh), {lower(s2), lower(c1), raise(i1)})};

    const auto lin = [&](Complex x, const Polynomial& X, Complex e, std::size_t info) {
        Polynomial poly;
        for (const auto& term : X) poly.push_back({x * term.coeff, term.ops});
        poly.push_back(mono(-kI * e, {lower(info)}));
        return op(poly);
    };
    const auto quad = [&](const Polynomial& Q, Complex y, const Polynomial& Y) {
        Polynomial poly;
        for (const auto& term : Q) poly.push_back({-kI * term.coeff, term.ops});
        for (const auto& term : Y) poly.push_back({-kI * y * term.coeff, term.ops});
        return op(poly);
    };

    PerturbativeOperators out;
    out.sigma[0] = {op({mono(1.0, {lower(s1)})}), lin(-k.eta1, X1, k.eta_s[0], i1),
                    quad(Q1, std::conj(k.eta2), Y1)};
    out.sigma[1] = {op({mono(1.0, {lower(s2)})}), lin(std::conj(k.eta1), X2, k.eta_s[1], i2),
                    quad(Q2, k.eta2, Y2)};
    out.theta[0] = {op({mono(1.0, {lower(c1)})}), lin(std::conj(k.eta1), X3, k.eta_c[0], i1),
                    quad(Q3, k.eta2, Y3)};
    out.theta[1] = {op({mono(1.0, {lower(c2)})}), lin(-k.eta1, X4, k.eta_c[1], i2),
                    quad(Q4, std::conj(k.eta2), Y4)};
    return out;
}

namespace {

std::array<double, 3> orders(const Expansion& a, const StateVector& phi) {
    const StateVector a0 = fock::apply(a.order0, phi);
    const StateVector a1 = fock::apply(a.order1, phi);
    const StateVector a2 = fock::apply(a.order2, phi);
    return {a0.squaredNorm(), 2.0 * a0.dot(a1).real(), a1.squaredNorm() + 2.0 * a0.dot(a2).real()};
}

}  // namespace

OrderedExpectation expectation_by_order(const PerturbativeOperators& ops, const StateVector& phi) {
    return {orders(ops.sigma[0], phi), orders(ops.sigma[1], phi), orders(ops.theta[0], phi),
            orders(ops.theta[1], phi)};
}

propagate::TimeSeries perturbative_series(const PerturbInputs& in, const std::vector<double>& times) {
    propagate::check_time_grid(times);
    in.validate();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const std::array<double, 2> kappa{model::damping_rate(in.params, 1), model::damping_rate(in.params, 2)};
    propagate::TimeSeries ts;
    ts.engine = propagate::Engine::Perturbative;
    ts.times = times;
    for (double t : times) {
        const auto m = mean_occupations(in, t);
        propagate::Observables o;
        for (int j = 0; j < 2; ++j) {
            o.S[j] = m.n[j];
            o.K[j] = m.k[j];
            o.I[j] = in.occ[4 + j] * std::exp(-2.0 * kappa[j] * t);
            o.Pi[j] = m.n[j] + m.k[j];
            o.M[j] = nan;
        }
        o.leakage = nan;
        ts.values.push_back(o);
    }
    return ts;
}

}  // namespace infotrade::perturb
