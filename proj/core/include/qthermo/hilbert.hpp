#pragma once

// Dense linear algebra on small Hilbert spaces: validated density operators
// and observables, spectral projectors, entropies and Gibbs states.
//
// Conventions: hbar = k = 1. Temperatures only appear through beta.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qthermo {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

namespace tolerance {
inline constexpr double hermitian = 1e-10;
inline constexpr double trace = 1e-10;
inline constexpr double min_eigenvalue = -1e-9;
inline constexpr double degeneracy = 1e-9;
inline constexpr double entropy_floor = 1e-14;
} // namespace tolerance

/// Hermitian matrix, checked on construction (max entry deviation <= 1e-10).
class HermitianObservable {
public:
    explicit HermitianObservable(ComplexMatrix m);

    [[nodiscard]] const ComplexMatrix& matrix() const noexcept { return m_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return m_.rows(); }

private:
    ComplexMatrix m_;
};

/// Hermitian, unit-trace, positive semidefinite matrix.
///
/// Construction validates all three properties (hermiticity and trace to
/// 1e-10, smallest eigenvalue >= -1e-9) and throws InvalidState otherwise.
class DensityOperator {
public:
    explicit DensityOperator(ComplexMatrix m);

    [[nodiscard]] const ComplexMatrix& matrix() const noexcept { return m_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return m_.rows(); }

    static DensityOperator maximally_mixed(Eigen::Index dim);
    /// |i><i| in the computational basis.
    static DensityOperator basis_state(Eigen::Index dim, Eigen::Index i);
    static DensityOperator pure(const Eigen::VectorXcd& psi);

private:
    ComplexMatrix m_;
};

struct SpectralDecomposition {
    std::vector<double> eigenvalues;        // distinct, ascending
    std::vector<ComplexMatrix> projectors;  // one per eigenvalue

    [[nodiscard]] std::size_t size() const noexcept { return eigenvalues.size(); }
    [[nodiscard]] ComplexMatrix reconstruct() const;
};

/// Raw eigensystem of a Hermitian matrix (ascending eigenvalues, unitary eigenvectors).
struct Eigensystem {
    RealVector values;
    ComplexMatrix vectors;
};

Eigensystem eigensystem(const ComplexMatrix& hermitian);

ComplexMatrix identity(Eigen::Index dim);
ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();
ComplexMatrix swap_gate();

[[nodiscard]] bool is_hermitian(const ComplexMatrix& m, double tol = tolerance::hermitian);
[[nodiscard]] double max_abs(const ComplexMatrix& m);
ComplexMatrix hermitian_part(const ComplexMatrix& m);
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// Re Tr(rho A).
[[nodiscard]] double expectation(const ComplexMatrix& rho, const ComplexMatrix& a);

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);

/// Reduced state on factor `keep` of a tensor product with factor dimensions `dims`.
DensityOperator partial_trace(const DensityOperator& rho, std::span<const Eigen::Index> dims,
                              std::size_t keep);

/// Distinct eigenvalues (grouped within 1e-9) with their eigenprojectors.
SpectralDecomposition spectral_decomposition(const HermitianObservable& h);

/// f(H) through the eigendecomposition of H.
template <typename F>
ComplexMatrix apply_function(const ComplexMatrix& hermitian, F&& f) {
    const Eigensystem es = eigensystem(hermitian);
    Eigen::VectorXcd fv(es.values.size());
    for (Eigen::Index i = 0; i < es.values.size(); ++i) fv(i) = f(es.values(i));
    return es.vectors * fv.asDiagonal() * es.vectors.adjoint();
}

/// exp(-i t H).
ComplexMatrix unitary_propagator(const HermitianObservable& h, double t);

/// ln(rho) with eigenvalues floored at 1e-14.
ComplexMatrix floored_log(const DensityOperator& rho);

/// -Tr(rho ln rho) in units of k; eigenvalues below 1e-14 contribute 0.
[[nodiscard]] double von_neumann_entropy(const DensityOperator& rho);

[[nodiscard]] double purity(const DensityOperator& rho);

/// Trace norm ||rho - sigma||_1 (sum of absolute eigenvalues of the difference).
[[nodiscard]] double trace_norm_distance(const DensityOperator& rho, const DensityOperator& sigma);

/// Result of the entropy continuity bound
///   |S(rho) - S(sigma)| <= d ln D - d ln d,  d = ||rho - sigma||_1.
/// The bound is only guaranteed for d <= 1/e; outside that range it is
/// still evaluated but `valid` is false.
struct FannesBound {
    double distance = 0.0;
    double bound = 0.0;
    bool valid = true;
};

[[nodiscard]] FannesBound fannes_bound(double distance, Eigen::Index dim);
[[nodiscard]] FannesBound fannes_bound(const DensityOperator& rho, const DensityOperator& sigma);

/// e^{-beta H} / Tr e^{-beta H}, evaluated with a ground-energy shift.
DensityOperator gibbs_state(const HermitianObservable& h, double beta);

/// ln Tr e^{-beta H}, evaluated stably.
[[nodiscard]] double log_partition_function(const HermitianObservable& h, double beta);

} // namespace qthermo
