#pragma once

// Projective measurement channels and Landauer accounting policies.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "qthermo/hilbert.hpp"

namespace qthermo {

class ProjectiveMeasurement {
public:
    explicit ProjectiveMeasurement(HermitianObservable observable);

    [[nodiscard]] const HermitianObservable& observable() const noexcept { return observable_; }
    [[nodiscard]] const SpectralDecomposition& decomposition() const noexcept { return decomposition_; }
    [[nodiscard]] std::size_t outcomes() const noexcept { return decomposition_.size(); }
    [[nodiscard]] Eigen::Index dim() const noexcept { return observable_.dim(); }

private:
    HermitianObservable observable_;
    SpectralDecomposition decomposition_;
};

/// Whether the states a measurement discriminates are equilibrium (metastable) ones.
///
/// `epsilon` is the residual dissipation rate left on such states; it is a
/// phenomenological knob, optionally gamma0 * e^{-c N}.
struct MetastabilityFlag {
    bool is_equilibrium = false;
    double epsilon = 0.0;

    static MetastabilityFlag relaxing() { return {false, 0.0}; }
    static MetastabilityFlag metastable(double epsilon = 0.0) { return {true, epsilon}; }
    static MetastabilityFlag exponential(double gamma0, double c, double n);
};

enum class LandauerPolicy {
    Standard,  // sLPM: every completed measurement costs kT ln d
    Modified,  // LPM: free when the discriminated states are equilibrium ones
};

struct MeasurementPolicy {
    LandauerPolicy variant = LandauerPolicy::Standard;

    /// Work charged for one completed measurement with `n_outcomes` outcomes at inverse temperature beta.
    [[nodiscard]] double charge(const MetastabilityFlag& flag, std::size_t n_outcomes, double beta) const;
    [[nodiscard]] std::string_view name() const noexcept;

    /// Accepts "sLPM" or "LPM"; throws InvalidArgument otherwise.
    static MeasurementPolicy parse(std::string_view text);
    static MeasurementPolicy standard() { return {LandauerPolicy::Standard}; }
    static MeasurementPolicy modified() { return {LandauerPolicy::Modified}; }
};

struct SelectiveOutcome {
    std::size_t outcome;  // index into the measurement's ascending eigenvalues
    double eigenvalue;
    double probability;
    DensityOperator state;
};

/// Uniform draw in [0, 1) fully determined by (seed, draw_index).
[[nodiscard]] double seeded_uniform(std::uint64_t seed, std::uint64_t draw_index);

/// Samples outcome k with probability Tr(P_k rho P_k) and collapses onto P_k rho P_k / p_k.
SelectiveOutcome measure_selective(const DensityOperator& rho, const ProjectiveMeasurement& m,
                                   std::uint64_t seed, std::uint64_t draw_index = 0);

/// Pinching sum_k P_k rho P_k.
DensityOperator measure_nonselective(const DensityOperator& rho, const ProjectiveMeasurement& m);

/// Ledger bookings for one measurement event.
struct MeasurementBooking {
    double work_charge = 0.0;  // booked as work performed on system + device
    double heat = 0.0;         // energy change, booked as heat absorbed from `heat_bath`
    std::size_t heat_bath = 0;
    std::string annotation;
};

MeasurementBooking account_measurement(const MeasurementPolicy& policy, const MetastabilityFlag& flag,
                                       double energy_change, std::size_t n_outcomes, double beta,
                                       std::size_t heat_bath);

} // namespace qthermo
