#include "qthermo/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "qthermo/errors.hpp"
#include "qthermo/generators.hpp"

namespace qthermo {

namespace {

constexpr double kSigmaFloor = -1e-10;

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

} // namespace

std::vector<LedgerRow> accumulate(const Trajectory& trajectory, const Schedule& schedule) {
    if (trajectory.samples.empty()) throw InvalidArgument("accumulate: empty trajectory");
    if (trajectory.bath_count != schedule.baths.size()) {
        throw DimensionMismatch("accumulate: trajectory has " + std::to_string(trajectory.bath_count) +
                                " baths but the schedule has " + std::to_string(schedule.baths.size()));
    }
    if (!schedule.segments.empty()) {
        const double t0 = schedule.t_start();
        const double t1 = schedule.t_end();
        const double eps = 1e-9 * std::max(1.0, std::abs(t1));
        if (std::abs(trajectory.samples.front().t - t0) > eps || std::abs(trajectory.samples.back().t - t1) > eps) {
            throw DimensionMismatch("accumulate: trajectory time span does not match the schedule");
        }
    }

    const std::size_t nb = schedule.baths.size();
    std::vector<LedgerRow> rows;
    rows.reserve(trajectory.samples.size());
    for (const Sample& s : trajectory.samples) {
        if (s.rho.dim() != schedule.initial_hamiltonian.dim()) {
            throw DimensionMismatch("accumulate: sample dimension does not match the schedule");
        }
        LedgerRow row;
        row.t = s.t;
        row.events = s.events;
        const ComplexMatrix& h = s.hamiltonian.matrix();
        const ComplexMatrix& rho = s.rho.matrix();
        row.energy = expectation(rho, h);
        row.mechanical_work = s.work;
        row.charges = s.charges;
        row.work_cum = s.work + s.charges;
        row.heat_cum = s.heat;
        row.entropy = von_neumann_entropy(s.rho);
        row.sigma.assign(nb, 0.0);
        row.heat_rate.assign(nb, 0.0);
        row.beta.resize(nb);
        for (std::size_t j = 0; j < nb; ++j) row.beta[j] = schedule.baths[j].beta;

        const Eigensystem es = eigensystem(rho);
        row.floored = es.values.minCoeff() < tolerance::entropy_floor;
        const ComplexMatrix log_rho = floored_log(s.rho);

        const Complex minus_i{0.0, -1.0};
        ComplexMatrix rho_dot = minus_i * commutator(h, rho);
        for (const std::size_t j : s.active_baths) {
            if (j >= nb) throw DimensionMismatch("accumulate: sample references an unknown bath");
            const BathSpec& bath = schedule.baths[j];
            if (bath.strength == 0.0) continue;
            const GKLSGenerator gen = build_davies_generator(s.hamiltonian, bath, j);
            const ComplexMatrix l_rho = gen.apply(rho);
            rho_dot += l_rho;
            row.heat_rate[j] = expectation(l_rho, h);
            // ln rho_eq = -beta H - ln Z, exact even where rho_eq has tiny populations.
            const double log_z = log_partition_function(s.hamiltonian, bath.beta);
            const ComplexMatrix log_eq = -bath.beta * h - log_z * identity(h.rows());
            row.sigma[j] = -expectation(l_rho, log_rho - log_eq);
        }
        row.entropy_rate = -expectation(rho_dot, log_rho);
        rows.push_back(std::move(row));
    }
    return rows;
}

LawAudit check_laws(const std::vector<LedgerRow>& rows, double tol) {
    LawAudit audit;
    if (rows.empty()) return audit;

    double min_sigma = std::numeric_limits<double>::infinity();
    for (const LedgerRow& r : rows) {
        if (r.floored) {
            ++audit.floored_rows;
        } else {
            for (const double s : r.sigma) min_sigma = std::min(min_sigma, s);
        }
        double rhs = sum(r.sigma);
        for (std::size_t j = 0; j < r.heat_rate.size(); ++j) rhs += r.beta[j] * r.heat_rate[j];
        audit.max_clausius_residual = std::max(audit.max_clausius_residual, std::abs(r.entropy_rate - rhs));
    }
    audit.min_sigma = std::isfinite(min_sigma) ? min_sigma : 0.0;

    for (std::size_t i = 1; i < rows.size(); ++i) {
        const LedgerRow& a = rows[i - 1];
        const LedgerRow& b = rows[i];
        const double d_e = b.energy - a.energy;
        const double d_w = b.mechanical_work - a.mechanical_work;
        const double d_q = sum(b.heat_cum) - sum(a.heat_cum);
        audit.max_step_first_law_residual = std::max(audit.max_step_first_law_residual, std::abs(d_e - d_w - d_q));
        if (!a.floored && !b.floored) {
            audit.total_entropy_production += 0.5 * (b.t - a.t) * (sum(a.sigma) + sum(b.sigma));
        }
    }
    const LedgerRow& first = rows.front();
    const LedgerRow& last = rows.back();
    audit.first_law_residual = std::abs((last.energy - first.energy) - (last.mechanical_work - first.mechanical_work) -
                                        (sum(last.heat_cum) - sum(first.heat_cum)));

    audit.sigma_nonnegative = audit.min_sigma >= kSigmaFloor;
    audit.clausius_ok = audit.max_clausius_residual <= 50.0 * tol;
    audit.first_law_ok = audit.max_step_first_law_residual <= 10.0 * tol && audit.first_law_residual <= 50.0 * tol;
    return audit;
}

ErasureBalanceReport erasure_balance(const DensityOperator& rho_in, const DensityOperator& rho_fin,
                                     double heat_to_bath, double beta, double slack) {
    if (rho_in.dim() != rho_fin.dim()) throw DimensionMismatch("erasure_balance: state dimensions differ");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("erasure_balance: beta must be positive");

    ErasureBalanceReport r;
    r.delta_S = von_neumann_entropy(rho_fin) - von_neumann_entropy(rho_in);
    r.delta_E_bath = heat_to_bath;
    r.beta = beta;
    const double temperature = 1.0 / beta;
    r.margin = r.delta_E_bath + temperature * r.delta_S;
    r.satisfies_enen = r.margin >= -slack;
    if (std::abs(r.delta_S + std::numbers::ln2) <= 1e-6) {
        r.satisfies_lbound = r.delta_E_bath >= temperature * std::numbers::ln2 - slack;
    }
    return r;
}

} // namespace qthermo
