#include "qthermo/generators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qthermo/errors.hpp"

namespace qthermo {

double OhmicRate::operator()(double omega, double beta, double gamma0) const {
    if (gamma0 == 0.0) return 0.0;
    const double damping = std::isfinite(cutoff) ? std::exp(-std::abs(omega) / cutoff) : 1.0;
    const double x = beta * omega;
    if (std::abs(x) < 1e-8) {
        // omega / (1 - e^{-x}) = (1/beta) (1 + x/2 + x^2/12 + ...)
        return gamma0 * damping * (1.0 + 0.5 * x) / beta;
    }
    const double denom = -std::expm1(-x);
    if (!std::isfinite(denom)) return 0.0;
    return gamma0 * damping * omega / denom;
}

void BathSpec::validate(Eigen::Index dim) const {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw InvalidArgument("bath '" + name + "': beta must be finite and positive");
    }
    if (!(strength >= 0.0) || !std::isfinite(strength)) {
        throw InvalidArgument("bath '" + name + "': strength must be finite and non-negative");
    }
    if (!(rate_model.cutoff > 0.0)) {
        throw InvalidArgument("bath '" + name + "': rate cutoff must be positive");
    }
    if (coupling_ops.empty()) {
        throw InvalidArgument("bath '" + name + "': at least one coupling operator is required");
    }
    for (const auto& a : coupling_ops) {
        if (a.dim() != dim) {
            throw DimensionMismatch("bath '" + name + "': coupling operator dimension " +
                                    std::to_string(a.dim()) + " != system dimension " +
                                    std::to_string(dim));
        }
    }
}

BathSpec qubit_bath(double beta, double gamma0, std::string name) {
    BathSpec b;
    b.beta = beta;
    b.strength = gamma0;
    b.coupling_ops.emplace_back(pauli_x());
    b.name = std::move(name);
    return b;
}

ComplexMatrix EigenoperatorSet::sum() const {
    if (terms.empty()) return {};
    ComplexMatrix out = ComplexMatrix::Zero(terms.front().op.rows(), terms.front().op.cols());
    for (const auto& t : terms) out += t.op;
    return out;
}

EigenoperatorSet eigenoperator_decomposition(const HermitianObservable& h, const HermitianObservable& a) {
    if (h.dim() != a.dim()) {
        throw DimensionMismatch("eigenoperator_decomposition: Hamiltonian and coupling dimensions differ");
    }
    const SpectralDecomposition spec = spectral_decomposition(h);

    struct Pair {
        double omega;
        std::size_t lower;  // e
        std::size_t upper;  // e'
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        for (std::size_t j = 0; j < spec.size(); ++j) {
            pairs.push_back({spec.eigenvalues[j] - spec.eigenvalues[i], i, j});
        }
    }
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const Pair& x, const Pair& y) { return x.omega < y.omega; });

    EigenoperatorSet out;
    std::size_t start = 0;
    while (start < pairs.size()) {
        std::size_t stop = start + 1;
        while (stop < pairs.size() && pairs[stop].omega - pairs[stop - 1].omega <= tolerance::degeneracy) {
            ++stop;
        }
        ComplexMatrix op = ComplexMatrix::Zero(h.dim(), h.dim());
        double omega_sum = 0.0;
        for (std::size_t k = start; k < stop; ++k) {
            op += spec.projectors[pairs[k].lower] * a.matrix() * spec.projectors[pairs[k].upper];
            omega_sum += pairs[k].omega;
        }
        double omega = omega_sum / static_cast<double>(stop - start);
        // Keep the zero frequency exact so that A(0) is assigned gamma(0).
        if (std::abs(omega) <= tolerance::degeneracy) omega = 0.0;
        out.terms.push_back({omega, std::move(op)});
        start = stop;
    }
    return out;
}

GKLSGenerator::GKLSGenerator(std::size_t bath_index, double beta, Eigen::Index dim)
    : bath_index_(bath_index), beta_(beta), dim_(dim) {}

void GKLSGenerator::add_term(ComplexMatrix op, double rate, double frequency) {
    if (!(rate >= 0.0) || !std::isfinite(rate)) {
        throw InvalidArgument("GKLSGenerator: Lindblad rates must be finite and non-negative");
    }
    if (op.rows() != dim_ || op.cols() != dim_) {
        throw DimensionMismatch("GKLSGenerator: Lindblad operator has the wrong dimension");
    }
    ComplexMatrix dag_op = op.adjoint() * op;
    terms_.push_back({std::move(op), std::move(dag_op), rate, frequency});
}

ComplexMatrix GKLSGenerator::apply(const ComplexMatrix& rho) const {
    if (rho.rows() != dim_ || rho.cols() != dim_) {
        throw DimensionMismatch("GKLSGenerator::apply: state dimension " + std::to_string(rho.rows()) +
                                " != generator dimension " + std::to_string(dim_));
    }
    ComplexMatrix out = ComplexMatrix::Zero(dim_, dim_);
    for (const auto& t : terms_) {
        if (t.rate == 0.0) continue;
        out.noalias() += t.rate * (t.op * rho * t.op.adjoint());
        out.noalias() -= (0.5 * t.rate) * (t.op_dag_op * rho + rho * t.op_dag_op);
    }
    return out;
}

GKLSGenerator build_davies_generator(const HermitianObservable& h, const BathSpec& bath,
                                     std::size_t bath_index) {
    bath.validate(h.dim());
    GKLSGenerator gen(bath_index, bath.beta, h.dim());
    for (const auto& a : bath.coupling_ops) {
        EigenoperatorSet eig = eigenoperator_decomposition(h, a);
        for (auto& term : eig.terms) {
            gen.add_term(std::move(term.op), bath.rate(term.frequency), term.frequency);
        }
    }
    return gen;
}

ComplexMatrix apply_generator(const GKLSGenerator& gen, const DensityOperator& rho) {
    return gen.apply(rho.matrix());
}

} // namespace qthermo
