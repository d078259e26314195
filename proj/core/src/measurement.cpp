#include "qthermo/measurement.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <iomanip>

#include "qthermo/errors.hpp"

namespace qthermo {

ProjectiveMeasurement::ProjectiveMeasurement(HermitianObservable observable)
    : observable_(std::move(observable)), decomposition_(spectral_decomposition(observable_)) {}

MetastabilityFlag MetastabilityFlag::exponential(double gamma0, double c, double n) {
    if (gamma0 < 0.0 || c < 0.0 || n < 0.0) {
        throw InvalidArgument("MetastabilityFlag::exponential: parameters must be non-negative");
    }
    return {true, gamma0 * std::exp(-c * n)};
}

double MeasurementPolicy::charge(const MetastabilityFlag& flag, std::size_t n_outcomes, double beta) const {
    if (!(beta > 0.0)) throw InvalidArgument("measurement charge: beta must be positive");
    if (n_outcomes <= 1) return 0.0;
    const double full = std::log(static_cast<double>(n_outcomes)) / beta;
    switch (variant) {
    case LandauerPolicy::Standard:
        return full;
    case LandauerPolicy::Modified:
        return flag.is_equilibrium ? 0.0 : full;
    }
    return full;
}

std::string_view MeasurementPolicy::name() const noexcept {
    return variant == LandauerPolicy::Standard ? "sLPM" : "LPM";
}

MeasurementPolicy MeasurementPolicy::parse(std::string_view text) {
    if (text == "sLPM") return standard();
    if (text == "LPM") return modified();
    throw InvalidArgument("unknown landauer_policy '" + std::string(text) + "' (expected sLPM or LPM)");
}

double seeded_uniform(std::uint64_t seed, std::uint64_t draw_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(draw_index),
                      static_cast<std::uint32_t>(draw_index >> 32)};
    std::mt19937_64 engine(seq);
    // 53 random mantissa bits; avoids implementation-defined distributions.
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

namespace {

void require_dim(const DensityOperator& rho, const ProjectiveMeasurement& m) {
    if (rho.dim() != m.dim()) {
        throw DimensionMismatch("measurement: state dimension " + std::to_string(rho.dim()) +
                                " != observable dimension " + std::to_string(m.dim()));
    }
}

constexpr double kMinProbability = 1e-14;

} // namespace

SelectiveOutcome measure_selective(const DensityOperator& rho, const ProjectiveMeasurement& m,
                                   std::uint64_t seed, std::uint64_t draw_index) {
    require_dim(rho, m);
    const auto& dec = m.decomposition();
    std::vector<double> probs(dec.size());
    double total = 0.0;
    for (std::size_t k = 0; k < dec.size(); ++k) {
        const double p = expectation(rho.matrix(), dec.projectors[k]);
        probs[k] = p >= kMinProbability ? p : 0.0;
        total += probs[k];
    }
    if (total <= 0.0) {
        throw InvalidState("measure_selective: every outcome has probability below 1e-14");
    }

    const double u = seeded_uniform(seed, draw_index) * total;
    std::size_t chosen = dec.size();
    double acc = 0.0;
    for (std::size_t k = 0; k < dec.size(); ++k) {
        if (probs[k] == 0.0) continue;
        acc += probs[k];
        chosen = k;
        if (u < acc) break;
    }

    const ComplexMatrix& p = dec.projectors[chosen];
    ComplexMatrix post = p * rho.matrix() * p;
    const double norm = post.trace().real();
    post /= norm;
    return {chosen, dec.eigenvalues[chosen], probs[chosen], DensityOperator(hermitian_part(post))};
}

DensityOperator measure_nonselective(const DensityOperator& rho, const ProjectiveMeasurement& m) {
    require_dim(rho, m);
    ComplexMatrix out = ComplexMatrix::Zero(rho.dim(), rho.dim());
    for (const auto& p : m.decomposition().projectors) out += p * rho.matrix() * p;
    return DensityOperator(hermitian_part(out));
}

MeasurementBooking account_measurement(const MeasurementPolicy& policy, const MetastabilityFlag& flag,
                                       double energy_change, std::size_t n_outcomes, double beta,
                                       std::size_t heat_bath) {
    MeasurementBooking b;
    b.work_charge = policy.charge(flag, n_outcomes, beta);
    b.heat = energy_change;
    b.heat_bath = heat_bath;
    std::ostringstream note;
    note << std::setprecision(17) << policy.name() << (flag.is_equilibrium ? ":equilibrium" : ":relaxing")
         << ":charge=" << b.work_charge;
    b.annotation = note.str();
    return b;
}

} // namespace qthermo
