#pragma once

// Classical compass needle H(phi, z) = -mu B(z) cos(phi) carried quasi-statically
// through a position-dependent field, as a model of a measurement apparatus.

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace qthermo {

struct FieldProfile {
    std::function<double(double)> field;
    std::function<double(double)> gradient;  // optional; five-point difference when empty
    double width = 1.0;                      // length scale, sets the difference step

    [[nodiscard]] double B(double z) const;
    [[nodiscard]] double dB(double z) const;

    /// B(z) = B_max exp(-z^2 / w^2).
    static FieldProfile gaussian(double b_max, double width);
};

struct NeedleConfig {
    double mu = 1.0;
    double beta = 1.0;
    double z0 = 5.0;   // far end, mu B beta << 1
    double z_m = 0.0;  // measuring position, mu B beta >> 1
    int n_phi = 512;
    int n_z = 201;     // points in the sampled force profile
    FieldProfile profile = FieldProfile::gaussian(10.0, 1.0);
    int sign = 1;      // polarization of the measured magnet

    /// Throws InvalidArgument for unusable parameters.
    void validate() const;
    /// Non-fatal departures from a(z0) <= 0.01 and a(z_m) >= 10.
    [[nodiscard]] std::vector<std::string> warnings() const;
    /// a(z) = mu B(z) beta, including the polarization sign.
    [[nodiscard]] double coupling(double z) const;
};

/// F(z) = <-mu B'(z) cos phi> over the equilibrium angle distribution (periodic trapezoid, n_phi nodes).
double thermodynamic_force(double z, const NeedleConfig& cfg);

/// Integral of F from z1 to z2, adaptive Gauss-Kronrod to absolute error 1e-9.
double quasi_static_work(double z1, double z2, const NeedleConfig& cfg);

/// Probability that the needle points along the magnet's polarization at z.
double alignment_probability(double z, const NeedleConfig& cfg);

/// Total-variation distance of the angle distribution at z from uniform.
double uniform_total_variation(double z, const NeedleConfig& cfg);

struct NeedleCycleReport {
    double forward_work = 0.0;  // z0 -> z_m
    double return_work = 0.0;   // z_m -> z0
    double net_work = 0.0;
    double alignment_probability = 0.0;  // at z_m
    double reset_total_variation = 0.0;  // at z0
    bool reset_ok = false;               // <= 1e-6
    std::vector<std::string> warnings;
};

NeedleCycleReport run_needle_cycle(const NeedleConfig& cfg);

/// (z, F(z)) at n_z evenly spaced points from z0 to z_m.
std::vector<std::pair<double, double>> force_profile(const NeedleConfig& cfg);

} // namespace qthermo
