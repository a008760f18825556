#include "infotrade/propagate.hpp"

#include "infotrade/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace infotrade::propagate {

using fock::Role;

ChargeSectors::ChargeSectors(const std::array<int, 6>& trader_cutoffs)
    : layout_(std::make_shared<const ModeLayout>(fock::build_layout(trader_cutoffs, {0, 0}, 1))) {
    qmax_ = {trader_cutoffs[0] + trader_cutoffs[2] + trader_cutoffs[4],
             trader_cutoffs[1] + trader_cutoffs[3] + trader_cutoffs[5]};
    states_.resize(static_cast<std::size_t>((qmax_[0] + 1) * (qmax_[1] + 1)));
    const auto dim = layout_->dimension();
    where_.resize(dim);
    for (std::uint64_t f = 0; f < dim; ++f) {
        const auto occ = layout_->decode(f);
        const int q1 = occ[0] + occ[2] + occ[4];
        const int q2 = occ[1] + occ[3] + occ[5];
        const auto s = static_cast<std::size_t>(q1 * (qmax_[1] + 1) + q2);
        where_[f] = {s, states_[s].size()};
        states_[s].push_back(f);
    }
}

std::array<int, 2> ChargeSectors::charge(std::size_t sector) const {
    const int s = static_cast<int>(sector);
    return {s / (qmax_[1] + 1), s % (qmax_[1] + 1)};
}

std::optional<std::size_t> ChargeSectors::find(int q1, int q2) const {
    if (q1 < 0 || q2 < 0 || q1 > qmax_[0] || q2 > qmax_[1]) return std::nullopt;
    return static_cast<std::size_t>(q1 * (qmax_[1] + 1) + q2);
}

std::optional<std::size_t> ChargeSectors::shifted(std::size_t sector, std::array<int, 2> shift) const {
    const auto q = charge(sector);
    return find(q[0] + shift[0], q[1] + shift[1]);
}

std::pair<std::size_t, std::size_t> ChargeSectors::locate(std::uint64_t flat) const {
    if (flat >= where_.size()) throw PreconditionError("ChargeSectors::locate: index out of range");
    return where_[flat];
}

BlockOperator::BlockOperator(const ChargeSectors& sectors, std::array<int, 2> shift)
    : shift_(shift), blocks_(sectors.count()) {
    for (std::size_t s = 0; s < sectors.count(); ++s) {
        if (const auto t = sectors.shifted(s, shift)) {
            blocks_[s] = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(sectors.dimension(*t)),
                                                static_cast<Eigen::Index>(sectors.dimension(s)));
        }
    }
}

BlockOperator BlockOperator::from_sparse(const ChargeSectors& sectors, const SparseOperator& op,
                                         std::array<int, 2> shift) {
    if (op.dimension() != sectors.layout().dimension()) {
        throw PreconditionError("BlockOperator::from_sparse: dimension mismatch");
    }
    BlockOperator out(sectors, shift);
    for (const auto& e : op.entries()) {
        const auto [sr, pr] = sectors.locate(e.row);
        const auto [sc, pc] = sectors.locate(e.col);
        const auto target = sectors.shifted(sc, shift);
        if (!target || *target != sr) {
            throw PreconditionError("BlockOperator::from_sparse: operator does not carry the declared charge shift");
        }
        out.blocks_[sc](static_cast<Eigen::Index>(pr), static_cast<Eigen::Index>(pc)) = e.value;
    }
    return out;
}

BlockOperator& BlockOperator::axpy(Complex a, const BlockOperator& x) {
    if (x.shift_ != shift_ || x.blocks_.size() != blocks_.size()) {
        throw PreconditionError("BlockOperator::axpy: mismatched charge shifts");
    }
    for (std::size_t s = 0; s < blocks_.size(); ++s) {
        if (x.blocks_[s].size() == 0) continue;
        if (blocks_[s].size() == 0) {
            blocks_[s] = a * x.blocks_[s];
        } else {
            blocks_[s] += a * x.blocks_[s];
        }
    }
    return *this;
}

BlockOperator& BlockOperator::scale(Complex a) {
    for (auto& b : blocks_) b *= a;
    return *this;
}

BlockOperator multiply(const ChargeSectors& sectors, const BlockOperator& a, const BlockOperator& b) {
    BlockOperator out(sectors, {a.shift_[0] + b.shift_[0], a.shift_[1] + b.shift_[1]});
    for (std::size_t s = 0; s < sectors.count(); ++s) {
        if (b.blocks_[s].size() == 0) continue;
        const auto mid = sectors.shifted(s, b.shift_);
        if (!mid || a.blocks_[*mid].size() == 0) continue;
        out.blocks_[s].noalias() = a.blocks_[*mid] * b.blocks_[s];
    }
    return out;
}

BlockOperator adjoint(const ChargeSectors& sectors, const BlockOperator& a) {
    BlockOperator out(sectors, {-a.shift_[0], -a.shift_[1]});
    for (std::size_t s = 0; s < sectors.count(); ++s) {
        if (a.blocks_[s].size() == 0) continue;
        const auto t = sectors.shifted(s, a.shift_);
        out.blocks_[*t] = a.blocks_[s].adjoint();
    }
    return out;
}

HeisenbergSystem::HeisenbergSystem(const std::array<int, 6>& trader_cutoffs) : sectors(trader_cutoffs) {
    const auto basis = Basis::full(sectors.layout_ptr());
    for (int j = 0; j < 2; ++j) {
        const std::array<int, 2> shift = j == 0 ? std::array{-1, 0} : std::array{0, -1};
        s[j] = BlockOperator::from_sparse(sectors, model::lowering(basis, Role::Share, j + 1), shift);
        c[j] = BlockOperator::from_sparse(sectors, model::lowering(basis, Role::Cash, j + 1), shift);
        i[j] = BlockOperator::from_sparse(sectors, model::lowering(basis, Role::Info, j + 1), shift);
    }
}

namespace {

struct Frame {
    BlockOperator sigma1, sigma2, theta1, theta2;

    void axpy(Complex a, const Frame& x) {
        sigma1.axpy(a, x.sigma1);
        sigma2.axpy(a, x.sigma2);
        theta1.axpy(a, x.theta1);
        theta2.axpy(a, x.theta2);
    }
};

class Integrator {
public:
    Integrator(const HeisenbergSystem& sys, const ModelParams& p, HeisenbergForm form)
        : sys_(sys), p_(p), form_(form), w_hat_(model::omega_hat(p)) {
        kappa_ = {model::damping_rate(p, 1), model::damping_rate(p, 2)};
    }

    Frame rhs(double t, const Frame& y) const {
        const Complex minus_i(0.0, -1.0);
        const Complex ph = std::exp(Complex(0.0, w_hat_ * t));
        Frame d = form_ == HeisenbergForm::Reduced ? reduced(y, ph) : commutator(y, ph);
        d.sigma1.axpy(minus_i * info_coefficient(t, 0, p_.omega_s[0]), sys_.i[0]);
        d.sigma2.axpy(minus_i * info_coefficient(t, 1, p_.omega_s[1]), sys_.i[1]);
        d.theta1.axpy(minus_i * info_coefficient(t, 0, p_.omega_c[0]), sys_.i[0]);
        d.theta2.axpy(minus_i * info_coefficient(t, 1, p_.omega_c[1]), sys_.i[1]);
        return d;
    }

    void rk4(double t, double h, Frame& y) const {
        const Frame k1 = rhs(t, y);
        Frame y2 = y;
        y2.axpy(0.5 * h, k1);
        const Frame k2 = rhs(t + 0.5 * h, y2);
        Frame y3 = y;
        y3.axpy(0.5 * h, k2);
        const Frame k3 = rhs(t + 0.5 * h, y3);
        Frame y4 = y;
        y4.axpy(h, k3);
        const Frame k4 = rhs(t + h, y4);
        y.axpy(h / 6.0, k1);
        y.axpy(h / 3.0, k2);
        y.axpy(h / 3.0, k3);
        y.axpy(h / 6.0, k4);
    }

    const std::array<double, 2>& kappa() const { return kappa_; }

private:
    const HeisenbergSystem& sys_;
    const ModelParams& p_;
    HeisenbergForm form_;
    double w_hat_;
    std::array<double, 2> kappa_{};

    Frame reduced(const Frame& y, Complex ph) const {
        const auto& sec = sys_.sectors;
        const Complex lam(0.0, -p_.lambda);
        Frame d{multiply(sec, y.sigma2, multiply(sec, y.theta1, adjoint(sec, y.theta2))),
                multiply(sec, y.sigma1, multiply(sec, adjoint(sec, y.theta1), y.theta2)),
                multiply(sec, y.sigma1, multiply(sec, adjoint(sec, y.sigma2), y.theta2)),
                multiply(sec, adjoint(sec, y.sigma1), multiply(sec, y.sigma2, y.theta1))};
        d.sigma1.scale(lam * ph);
        d.sigma2.scale(lam * std::conj(ph));
        d.theta1.scale(lam * std::conj(ph));
        d.theta2.scale(lam * ph);
        return d;
    }

    // Conjugation by the propagator is multiplicative, so H(t) built from the
    // evolved operators is the evolved Hamiltonian.
    Frame commutator(const Frame& y, Complex ph) const {
        const auto& sec = sys_.sectors;
        BlockOperator g = multiply(sec, adjoint(sec, y.sigma1),
                                   multiply(sec, y.sigma2, multiply(sec, y.theta1, adjoint(sec, y.theta2))));
        g.scale(p_.lambda * ph);
        BlockOperator h = adjoint(sec, g);
        h.axpy(1.0, g);
        const auto commute = [&](const BlockOperator& a) {
            BlockOperator out = multiply(sec, h, a);
            out.axpy(-1.0, multiply(sec, a, h));
            out.scale(Complex(0.0, 1.0));
            return out;
        };
        return {commute(y.sigma1), commute(y.sigma2), commute(y.theta1), commute(y.theta2)};
    }

    // lambda_inf e^{-(i Omega_j + kappa_j) t} e^{i w t}
    Complex info_coefficient(double t, int j, double w) const {
        return p_.lambda_inf * std::exp(Complex(-kappa_[j] * t, (w - p_.Omega[j]) * t));
    }
};

double occupation(const BlockOperator& a, std::size_t sector, std::size_t pos) {
    const auto& b = a.block(sector);
    if (b.size() == 0) return 0.0;
    return b.col(static_cast<Eigen::Index>(pos)).squaredNorm();
}

}  // namespace

std::string to_string(HeisenbergForm f) {
    return f == HeisenbergForm::Reduced ? "reduced" : "commutator";
}

TimeSeries integrate_heisenberg_fixed(const HeisenbergSystem& system, const ModelParams& p, const Occupations& occ,
                                      const std::vector<double>& times, double step, HeisenbergForm form) {
    check_time_grid(times);
    p.validate();
    if (!(step > 0.0) || !std::isfinite(step)) throw PreconditionError("ODE step must be finite and > 0");
    for (int v : occ) {
        if (v < 0) throw PreconditionError("occupations must be >= 0");
    }
    const auto flat = system.sectors.layout().encode(occ);
    const auto [s0, pos0] = system.sectors.locate(flat);

    const Integrator integ(system, p, form);
    Frame y{system.s[0], system.s[1], system.c[0], system.c[1]};

    TimeSeries ts;
    ts.engine = Engine::HeisenbergODE;
    ts.times = times;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (k > 0) {
            const double dt = times[k] - times[k - 1];
            const auto n = static_cast<long>(std::ceil(dt / step - 1e-9));
            const double h = dt / static_cast<double>(std::max(n, 1L));
            for (long r = 0; r < std::max(n, 1L); ++r) integ.rk4(times[k - 1] + r * h, h, y);
        }
        Observables o;
        o.S = {occupation(y.sigma1, s0, pos0), occupation(y.sigma2, s0, pos0)};
        o.K = {occupation(y.theta1, s0, pos0), occupation(y.theta2, s0, pos0)};
        if (!std::isfinite(o.S[0] + o.S[1] + o.K[0] + o.K[1])) {
            std::ostringstream msg;
            msg << "ODE observables are not finite at t = " << times[k] << " with step " << step;
            throw NumericalGuardError(msg.str());
        }
        for (int j = 0; j < 2; ++j) {
            o.I[j] = occ[4 + j] * std::exp(-2.0 * integ.kappa()[j] * times[k]);
            o.Pi[j] = o.S[j] + o.K[j];
            o.M[j] = nan;
        }
        o.leakage = nan;
        ts.values.push_back(o);
    }
    return ts;
}

TimeSeries integrate_heisenberg(const HeisenbergSystem& system, const ModelParams& p, const Occupations& occ,
                                const std::vector<double>& times, const HeisenbergOptions& options) {
    if (!(options.tol > 0.0)) throw PreconditionError("ODE tolerance must be > 0");
    const auto coarse = integrate_heisenberg_fixed(system, p, occ, times, options.step, options.form);
    auto fine = integrate_heisenberg_fixed(system, p, occ, times, 0.5 * options.step, options.form);
    double drift = 0.0;
    double at = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const auto& a = coarse.values[k];
        const auto& b = fine.values[k];
        for (int j = 0; j < 2; ++j) {
            for (double d : {std::abs(a.S[j] - b.S[j]), std::abs(a.K[j] - b.K[j])}) {
                if (d > drift) {
                    drift = d;
                    at = times[k];
                }
            }
        }
    }
    if (drift > options.tol) {
        std::ostringstream msg;
        msg << "ODE observables drift by " << drift << " at t = " << at << " between step " << options.step
            << " and step/2, above tolerance " << options.tol << "; reduce the step";
        throw NumericalGuardError(msg.str());
    }
    return fine;
}

}  // namespace infotrade::propagate
