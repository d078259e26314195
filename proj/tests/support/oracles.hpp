#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's numerical kernels.

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXcd;

/// I_0(x) and I_1(x) by their power series, scaled by e^{-|x|}.
double scaled_bessel_i0(double x);
double scaled_bessel_i1(double x);
/// I_1(a) / I_0(a).
double bessel_ratio(double a);
/// ln I_0(a).
double log_bessel_i0(double a);

/// 4x4 SWAP written out entry by entry.
Matrix explicit_swap();

/// Qubit entropy from the Bloch vector length.
double qubit_entropy(const Matrix& rho);

/// Entropy from eigenvalues of a general (non-Hermitian) complex eigensolver.
double entropy_general(const Matrix& rho);

/// exp(-i t H) by scaling and squaring of a Taylor series.
Matrix expm_taylor(const Matrix& h, double t);

/// Ohmic KMS rate evaluated directly from the defining formula.
double ohmic_rate(double omega, double beta, double gamma0);

/// Quasi-static work extracted by ramping a qubit gap from e0 to 0: T ln 2 - T ln(1 + e^{-beta e0}).
double ramp_free_energy(double e0, double beta);

Matrix random_hermitian(int dim, std::mt19937_64& rng, double scale = 1.0);
/// Random full-rank state: G G^+ / Tr, G Ginibre.
Matrix random_density(int dim, std::mt19937_64& rng);
/// Haar-like random pure state.
Matrix random_pure(int dim, std::mt19937_64& rng);

double trace_distance(const Matrix& a, const Matrix& b);

} // namespace oracle
