#include "infotrade/propagate.hpp"

#include "infotrade/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace infotrade::propagate {

std::string to_string(Engine e) {
    switch (e) {
        case Engine::Exact: return "exact";
        case Engine::HeisenbergODE: return "ode";
        case Engine::Perturbative: return "perturb";
    }
    return "unknown";
}

void check_time_grid(const std::vector<double>& times) {
    if (times.empty()) throw PreconditionError("time grid is empty");
    if (times.front() != 0.0) throw PreconditionError("time grid must start at t = 0");
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (!std::isfinite(times[k]) || !(times[k] > times[k - 1])) {
            throw PreconditionError("time grid must be finite and strictly increasing (index " + std::to_string(k) +
                                    ")");
        }
    }
}

std::vector<double> uniform_times(double t_max, int samples) {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw PreconditionError("t_max must be finite and > 0");
    if (samples < 2) throw PreconditionError("at least 2 time samples are required");
    std::vector<double> t(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) t[static_cast<std::size_t>(k)] = t_max * k / (samples - 1);
    return t;
}

ExactPropagator::ExactPropagator(const SparseOperator& H, const EvolveOptions& options)
    : H_(&H), options_(options), dense_(H.dimension() <= options.dense_limit) {
    if (options_.krylov_dim < 2) throw PreconditionError("krylov_dim must be >= 2");
    if (dense_) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(H.to_dense());
        if (eig.info() != Eigen::Success) throw NumericalGuardError("eigendecomposition of H failed");
        energies_ = eig.eigenvalues();
        vectors_ = eig.eigenvectors();
    }
}

StateVector ExactPropagator::step(const StateVector& psi, double dt) const {
    if (dt == 0.0) return psi;
    if (!dense_) return lanczos_step(psi, dt);
    StateVector c = vectors_.adjoint() * psi;
    for (Eigen::Index k = 0; k < c.size(); ++k) c[k] *= std::exp(Complex(0.0, -energies_[k] * dt));
    return vectors_ * c;
}

StateVector ExactPropagator::lanczos_step(const StateVector& psi, double dt) const {
    const auto n = static_cast<Eigen::Index>(H_->dimension());
    const double sign = dt > 0 ? 1.0 : -1.0;
    double remaining = std::abs(dt);
    double tau = remaining;
    StateVector v = psi;
    while (remaining > 0.0) {
        const double beta0 = v.norm();
        if (beta0 == 0.0) return v;
        const int mmax = static_cast<int>(std::min<Eigen::Index>(options_.krylov_dim, n));
        Eigen::MatrixXcd V(n, mmax);
        Eigen::VectorXd alpha = Eigen::VectorXd::Zero(mmax);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(mmax);
        V.col(0) = v / beta0;
        int m = mmax;
        double next_beta = 0.0;
        for (int k = 0; k < mmax; ++k) {
            StateVector w = fock::apply(*H_, V.col(k));
            alpha[k] = V.col(k).dot(w).real();
            // Full reorthogonalization, twice.
            for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(k + 1) * (V.leftCols(k + 1).adjoint() * w);
            const double b = w.norm();
            if (k + 1 == mmax) {
                next_beta = b;
                break;
            }
            if (b < 1e-12 * std::max(1.0, std::abs(alpha[k]))) {
                m = k + 1;
                next_beta = 0.0;
                break;
            }
            beta[k] = b;
            V.col(k + 1) = w / b;
        }
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (int k = 0; k < m; ++k) {
            T(k, k) = alpha[k];
            if (k + 1 < m) T(k, k + 1) = T(k + 1, k) = beta[k];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T);
        const Eigen::VectorXd e1 = eig.eigenvectors().row(0).transpose();
        Eigen::VectorXcd c;
        for (;;) {
            tau = std::min(tau, remaining);
            Eigen::VectorXcd phase(m);
            for (int k = 0; k < m; ++k) phase[k] = std::exp(Complex(0.0, -sign * eig.eigenvalues()[k] * tau)) * e1[k];
            c = eig.eigenvectors().cast<Complex>() * phase;
            const double err = beta0 * next_beta * std::abs(c[m - 1]);
            if (err <= options_.tol * tau / std::abs(dt)) break;
            tau *= 0.5;
            if (tau < 1e-14 * std::abs(dt)) throw NumericalGuardError("Lanczos propagator failed to converge");
        }
        v = beta0 * (V.leftCols(m) * c);
        remaining -= tau;
        if (remaining < 1e-15 * std::abs(dt)) remaining = 0.0;
    }
    return v;
}

double leakage(const ModelOperators& ops, const StateVector& psi) {
    double p = 0.0;
    for (std::size_t k = 0; k < ops.boundary.size(); ++k) {
        if (ops.boundary[k]) p += std::norm(psi[static_cast<Eigen::Index>(k)]);
    }
    return p;
}

Observables measure(const ModelOperators& ops, const StateVector& psi) {
    Observables o;
    for (int j = 0; j < 2; ++j) {
        o.S[j] = fock::expectation(ops.S[j], psi).real();
        o.K[j] = fock::expectation(ops.K[j], psi).real();
        o.I[j] = fock::expectation(ops.I[j], psi).real();
        o.Pi[j] = fock::expectation(ops.Pi[j], psi).real();
        o.M[j] = fock::expectation(ops.M[j], psi).real();
    }
    o.leakage = leakage(ops, psi);
    return o;
}

TimeSeries evolve_exact(const ModelOperators& ops, const StateVector& psi0, const std::vector<double>& times,
                        const EvolveOptions& options) {
    check_time_grid(times);
    if (static_cast<std::size_t>(psi0.size()) != ops.H.dimension()) {
        throw PreconditionError("initial state size does not match the operator dimension");
    }
    if (std::abs(psi0.norm() - 1.0) > 1e-10) throw PreconditionError("initial state is not normalized");
    if (ops.boundary.size() != ops.H.dimension()) throw PreconditionError("operator bundle lacks a boundary mask");

    ExactPropagator prop(ops.H, options);
    TimeSeries ts;
    ts.engine = Engine::Exact;
    ts.times = times;
    StateVector psi = psi0;
    bool warned = false;
    for (std::size_t k = 0; k < times.size(); ++k) {
        // Dense propagation is taken from t = 0 to avoid accumulating round-off.
        if (k > 0) psi = prop.is_dense() ? prop.step(psi0, times[k]) : prop.step(psi, times[k] - times[k - 1]);
        const double drift = std::abs(psi.norm() - 1.0);
        if (drift > options.tol) {
            std::ostringstream msg;
            msg << "norm drift " << drift << " at t = " << times[k] << " exceeds tolerance " << options.tol;
            throw NumericalGuardError(msg.str());
        }
        Observables o = measure(ops, psi);
        if (o.leakage > options.leakage_error) {
            std::ostringstream msg;
            msg << "truncation leakage " << o.leakage << " at t = " << times[k] << " exceeds "
                << options.leakage_error << "; raise the cutoffs";
            throw NumericalGuardError(msg.str());
        }
        if (o.leakage > options.leakage_warning && !warned) {
            std::ostringstream msg;
            msg << "truncation leakage " << o.leakage << " at t = " << times[k] << " exceeds warning level "
                << options.leakage_warning;
            ts.warnings.push_back(msg.str());
            warned = true;
        }
        ts.values.push_back(o);
    }
    return ts;
}

}  // namespace infotrade::propagate
