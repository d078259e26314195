#pragma once

// Davies-type GKLS generators built from an instantaneous Hamiltonian and a
// bath description. Rates obey the KMS ratio gamma(-w) = e^{-beta w} gamma(w),
// which makes the Gibbs state of the Hamiltonian a fixed point.

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "qthermo/hilbert.hpp"

namespace qthermo {

/// Ohmic spectral rate with KMS completion:
///   gamma(w) = gamma0 * w * exp(-|w|/cutoff) / (1 - e^{-beta w}),  gamma(0) = gamma0 / beta.
struct OhmicRate {
    double cutoff = std::numeric_limits<double>::infinity();

    [[nodiscard]] double operator()(double omega, double beta, double gamma0) const;
};

struct BathSpec {
    double beta = 1.0;
    std::vector<HermitianObservable> coupling_ops;
    OhmicRate rate_model{};
    double strength = 1.0;  // gamma0
    std::string name;

    /// Throws InvalidArgument for non-positive beta, negative strength or no coupling.
    void validate(Eigen::Index dim) const;
    [[nodiscard]] double rate(double omega) const { return rate_model(omega, beta, strength); }
};

/// Qubit bath with the default sigma^x coupling.
BathSpec qubit_bath(double beta, double gamma0, std::string name = {});

struct Eigenoperator {
    double frequency;
    ComplexMatrix op;
};

/// Eigenoperators A(w) = sum_{e'-e=w} P_e A P_e', sorted by ascending Bohr frequency.
struct EigenoperatorSet {
    std::vector<Eigenoperator> terms;

    [[nodiscard]] ComplexMatrix sum() const;
};

EigenoperatorSet eigenoperator_decomposition(const HermitianObservable& h, const HermitianObservable& a);

struct LindbladTerm {
    ComplexMatrix op;
    ComplexMatrix op_dag_op;  // A^dagger A, cached
    double rate;
    double frequency;
};

class GKLSGenerator {
public:
    GKLSGenerator(std::size_t bath_index, double beta, Eigen::Index dim);

    void add_term(ComplexMatrix op, double rate, double frequency);

    [[nodiscard]] std::size_t bath_index() const noexcept { return bath_index_; }
    [[nodiscard]] double beta() const noexcept { return beta_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return dim_; }
    [[nodiscard]] const std::vector<LindbladTerm>& terms() const noexcept { return terms_; }

    /// sum rate * (A rho A^+ - 1/2 {A^+ A, rho}) for an arbitrary (not necessarily valid) matrix.
    [[nodiscard]] ComplexMatrix apply(const ComplexMatrix& rho) const;

private:
    std::size_t bath_index_;
    double beta_;
    Eigen::Index dim_;
    std::vector<LindbladTerm> terms_;
};

GKLSGenerator build_davies_generator(const HermitianObservable& h, const BathSpec& bath,
                                     std::size_t bath_index = 0);

ComplexMatrix apply_generator(const GKLSGenerator& gen, const DensityOperator& rho);

} // namespace qthermo
