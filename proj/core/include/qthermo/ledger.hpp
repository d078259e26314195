#pragma once

// Thermodynamic bookkeeping along a trajectory: energy, work, per-bath heat,
// entropy and per-bath entropy production, with first/second law audits and
// the erasure energy/entropy balance.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qthermo/dynamics.hpp"
#include "qthermo/hilbert.hpp"

namespace qthermo {

struct LedgerRow {
    double t = 0.0;
    double energy = 0.0;                 // Tr(rho H)
    double work_cum = 0.0;               // work on the system plus measurement charges
    std::vector<double> heat_cum;        // heat absorbed from each bath
    double entropy = 0.0;                // von Neumann entropy, units of k
    std::vector<double> sigma;           // entropy production rate per bath
    std::string events;

    // Audit columns (not part of the CSV contract).
    double mechanical_work = 0.0;        // cumulative Tr(rho dH) only
    double charges = 0.0;                // cumulative measurement charges
    std::vector<double> heat_rate;       // dQ_j/dt
    std::vector<double> beta;            // inverse temperature of each bath
    double entropy_rate = 0.0;           // dS/dt = -Tr(drho/dt ln rho)
    bool floored = false;                // rho had eigenvalues below the 1e-14 log floor
};

/// Ledger rows for every trajectory sample. Throws DimensionMismatch when the
/// trajectory does not belong to the schedule (bath count or time span).
std::vector<LedgerRow> accumulate(const Trajectory& trajectory, const Schedule& schedule);

struct LawAudit {
    double min_sigma = 0.0;                  // over rows whose log was not floored
    double max_clausius_residual = 0.0;      // |dS/dt - sum beta_j dQ_j/dt - sum sigma_j|
    double max_step_first_law_residual = 0.0;
    double first_law_residual = 0.0;         // |dE - dW - sum dQ_j| over the whole ledger
    double total_entropy_production = 0.0;   // trapezoid of sum_j sigma_j over unfloored intervals
    std::size_t floored_rows = 0;

    bool sigma_nonnegative = true;
    bool clausius_ok = true;
    bool first_law_ok = true;

    [[nodiscard]] bool ok() const noexcept { return sigma_nonnegative && clausius_ok && first_law_ok; }
};

/// Second-law and first-law audit. Thresholds: sigma_j >= -1e-10 pointwise,
/// Clausius residual <= 50 tol pointwise, first law <= 10 tol per row step and
/// <= 50 tol over the whole ledger. Never throws on violations; see the flags.
LawAudit check_laws(const std::vector<LedgerRow>& rows, double tol);

struct ErasureBalanceReport {
    double delta_S = 0.0;        // S(rho_fin) - S(rho_in)
    double delta_E_bath = 0.0;   // energy gained by the bath
    double beta = 1.0;
    double margin = 0.0;         // delta_E_bath + T delta_S
    bool satisfies_enen = true;  // margin >= 0
    /// Only evaluated for a one-bit erasure (delta_S = -ln 2 within 1e-6):
    /// delta_E_bath >= T ln 2.
    std::optional<bool> satisfies_lbound;
};

ErasureBalanceReport erasure_balance(const DensityOperator& rho_in, const DensityOperator& rho_fin,
                                     double heat_to_bath, double beta, double slack = 1e-9);

} // namespace qthermo
