#include "qthermo/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "qthermo/errors.hpp"

namespace qthermo {

namespace {

void require_square(const ComplexMatrix& m, const char* what) {
    if (m.rows() < 1 || m.rows() != m.cols()) {
        throw DimensionMismatch(std::string(what) + ": expected a non-empty square matrix");
    }
}

void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatch(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.rows()) + " vs " + std::to_string(b.rows()) + ")");
    }
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

} // namespace

HermitianObservable::HermitianObservable(ComplexMatrix m) : m_(std::move(m)) {
    require_square(m_, "HermitianObservable");
    if (!is_hermitian(m_)) {
        throw NotHermitian("HermitianObservable: matrix deviates from its adjoint by " +
                           std::to_string(max_abs(m_ - m_.adjoint())));
    }
}

DensityOperator::DensityOperator(ComplexMatrix m) : m_(std::move(m)) {
    require_square(m_, "DensityOperator");
    if (!is_hermitian(m_, tolerance::hermitian)) {
        throw InvalidState("DensityOperator: not Hermitian");
    }
    const double tr = m_.trace().real();
    if (std::abs(tr - 1.0) > tolerance::trace) {
        throw InvalidState("DensityOperator: trace " + std::to_string(tr) + " != 1");
    }
    const double lo = eigensystem(m_).values.minCoeff();
    if (lo < tolerance::min_eigenvalue) {
        throw InvalidState("DensityOperator: negative eigenvalue " + std::to_string(lo));
    }
}

DensityOperator DensityOperator::maximally_mixed(Eigen::Index dim) {
    if (dim < 1) throw InvalidArgument("maximally_mixed: dim must be positive");
    return DensityOperator(identity(dim) / static_cast<double>(dim));
}

DensityOperator DensityOperator::basis_state(Eigen::Index dim, Eigen::Index i) {
    if (i < 0 || i >= dim) throw InvalidArgument("basis_state: index out of range");
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    m(i, i) = 1.0;
    return DensityOperator(std::move(m));
}

DensityOperator DensityOperator::pure(const Eigen::VectorXcd& psi) {
    const double n = psi.norm();
    if (n == 0.0) throw InvalidArgument("pure: zero vector");
    const Eigen::VectorXcd v = psi / n;
    return DensityOperator(v * v.adjoint());
}

ComplexMatrix SpectralDecomposition::reconstruct() const {
    if (projectors.empty()) return {};
    ComplexMatrix out = ComplexMatrix::Zero(projectors.front().rows(), projectors.front().cols());
    for (std::size_t k = 0; k < eigenvalues.size(); ++k) out += eigenvalues[k] * projectors[k];
    return out;
}

Eigensystem eigensystem(const ComplexMatrix& hermitian) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian);
    if (solver.info() != Eigen::Success) {
        throw Error("eigensystem: Hermitian eigensolver did not converge");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix identity(Eigen::Index dim) { return ComplexMatrix::Identity(dim, dim); }

ComplexMatrix pauli_x() {
    ComplexMatrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

ComplexMatrix pauli_y() {
    const Complex i{0.0, 1.0};
    ComplexMatrix m(2, 2);
    m << 0.0, -i, i, 0.0;
    return m;
}

ComplexMatrix pauli_z() {
    ComplexMatrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

ComplexMatrix swap_gate() {
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    m(0, 0) = 1.0;
    m(1, 2) = 1.0;
    m(2, 1) = 1.0;
    m(3, 3) = 1.0;
    return m;
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
    return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tol;
}

double max_abs(const ComplexMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

ComplexMatrix hermitian_part(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) { return a * b - b * a; }

double expectation(const ComplexMatrix& rho, const ComplexMatrix& a) {
    require_same_dim(rho, a, "expectation");
    // Tr(rho A) = sum_ij rho_ij A_ji
    return (rho.cwiseProduct(a.transpose())).sum().real();
}

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

DensityOperator partial_trace(const DensityOperator& rho, std::span<const Eigen::Index> dims,
                              std::size_t keep) {
    if (dims.empty() || keep >= dims.size()) {
        throw DimensionMismatch("partial_trace: keep index out of range");
    }
    Eigen::Index total = 1;
    for (const Eigen::Index d : dims) {
        if (d < 1) throw DimensionMismatch("partial_trace: factor dimensions must be positive");
        total *= d;
    }
    if (total != rho.dim()) {
        throw DimensionMismatch("partial_trace: product of factor dimensions " + std::to_string(total) +
                                " != state dimension " + std::to_string(rho.dim()));
    }

    // Composite index = outer * (dk * inner_dim) + k * inner_dim + inner, first factor most significant.
    Eigen::Index outer = 1;
    for (std::size_t i = 0; i < keep; ++i) outer *= dims[i];
    const Eigen::Index dk = dims[keep];
    const Eigen::Index inner = total / (outer * dk);

    const ComplexMatrix& m = rho.matrix();
    ComplexMatrix reduced = ComplexMatrix::Zero(dk, dk);
    for (Eigen::Index a = 0; a < dk; ++a) {
        for (Eigen::Index b = 0; b < dk; ++b) {
            Complex acc = 0.0;
            for (Eigen::Index o = 0; o < outer; ++o) {
                for (Eigen::Index in = 0; in < inner; ++in) {
                    const Eigen::Index row = (o * dk + a) * inner + in;
                    const Eigen::Index col = (o * dk + b) * inner + in;
                    acc += m(row, col);
                }
            }
            reduced(a, b) = acc;
        }
    }
    return DensityOperator(hermitian_part(reduced));
}

SpectralDecomposition spectral_decomposition(const HermitianObservable& h) {
    const Eigensystem es = eigensystem(h.matrix());
    SpectralDecomposition out;
    const Eigen::Index n = es.values.size();
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index stop = start + 1;
        while (stop < n && es.values(stop) - es.values(stop - 1) <= tolerance::degeneracy) ++stop;
        const auto block = es.vectors.middleCols(start, stop - start);
        out.eigenvalues.push_back(es.values.segment(start, stop - start).mean());
        out.projectors.push_back(block * block.adjoint());
        start = stop;
    }
    return out;
}

ComplexMatrix unitary_propagator(const HermitianObservable& h, double t) {
    const Complex minus_i_t{0.0, -t};
    return apply_function(h.matrix(), [&](double e) { return std::exp(minus_i_t * e); });
}

ComplexMatrix floored_log(const DensityOperator& rho) {
    return apply_function(rho.matrix(), [](double p) {
        return Complex{std::log(std::max(p, tolerance::entropy_floor)), 0.0};
    });
}

double von_neumann_entropy(const DensityOperator& rho) {
    const RealVector p = eigensystem(rho.matrix()).values;
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) >= tolerance::entropy_floor) s -= xlogx(p(i));
    }
    return s;
}

double purity(const DensityOperator& rho) { return expectation(rho.matrix(), rho.matrix()); }

double trace_norm_distance(const DensityOperator& rho, const DensityOperator& sigma) {
    require_same_dim(rho.matrix(), sigma.matrix(), "trace_norm_distance");
    const RealVector ev = eigensystem(rho.matrix() - sigma.matrix()).values;
    return ev.cwiseAbs().sum();
}

FannesBound fannes_bound(double distance, Eigen::Index dim) {
    if (dim < 1) throw InvalidArgument("fannes_bound: dimension must be positive");
    FannesBound out;
    out.distance = distance;
    out.bound = distance * std::log(static_cast<double>(dim)) - xlogx(distance);
    out.valid = distance <= std::exp(-1.0);
    return out;
}

FannesBound fannes_bound(const DensityOperator& rho, const DensityOperator& sigma) {
    return fannes_bound(trace_norm_distance(rho, sigma), rho.dim());
}

double log_partition_function(const HermitianObservable& h, double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw InvalidArgument("inverse temperature must be finite and positive");
    }
    const RealVector e = eigensystem(h.matrix()).values;
    const double e0 = e.minCoeff();
    double z = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) z += std::exp(-beta * (e(i) - e0));
    return -beta * e0 + std::log(z);
}

DensityOperator gibbs_state(const HermitianObservable& h, double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw InvalidArgument("gibbs_state: inverse temperature must be finite and positive");
    }
    const Eigensystem es = eigensystem(h.matrix());
    const double e0 = es.values.minCoeff();
    RealVector w = (-beta * (es.values.array() - e0)).exp();
    w /= w.sum();
    ComplexMatrix rho = es.vectors * w.cast<Complex>().asDiagonal() * es.vectors.adjoint();
    return DensityOperator(hermitian_part(rho));
}

} // namespace qthermo
