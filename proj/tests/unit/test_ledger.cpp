#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qthermo/errors.hpp"
#include "qthermo/ledger.hpp"

using namespace qthermo;

namespace {

HermitianObservable qubit_h(double e) { return HermitianObservable(0.5 * e * pauli_z()); }

struct Simulated {
    Schedule schedule;
    Trajectory trajectory;
    std::vector<LedgerRow> rows;
};

Simulated simulate(const DensityOperator& rho0, Schedule s, IntegrationOptions o = {}) {
    Simulated r{std::move(s), {}, {}};
    r.trajectory = integrate_mme(rho0, r.schedule, o);
    r.rows = accumulate(r.trajectory, r.schedule);
    return r;
}

Schedule static_schedule(const HermitianObservable& h, std::vector<BathSpec> baths, double duration) {
    Schedule s;
    s.initial_hamiltonian = h;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < baths.size(); ++i) idx.push_back(i);
    s.baths = std::move(baths);
    s.segments.push_back(Segment::constant(0.0, duration, h, idx));
    return s;
}

// Qubit dissipator for H = (E/2) sigma_z with sigma_x coupling, written with explicit ladder operators.
oracle::Matrix qubit_dissipator(const oracle::Matrix& rho, double e, double beta, double g0) {
    oracle::Matrix lower = oracle::Matrix::Zero(2, 2);
    lower(1, 0) = 1.0;
    const oracle::Matrix raise = lower.adjoint();
    auto d = [&](const oracle::Matrix& a) {
        const oracle::Matrix ada = a.adjoint() * a;
        return oracle::Matrix(a * rho * a.adjoint() - 0.5 * (ada * rho + rho * ada));
    };
    return oracle::ohmic_rate(e, beta, g0) * d(lower) + oracle::ohmic_rate(-e, beta, g0) * d(raise);
}

oracle::Matrix reference_log(const oracle::Matrix& rho) {
    Eigen::SelfAdjointEigenSolver<oracle::Matrix> es(rho);
    const Eigen::VectorXd l = es.eigenvalues().array().max(1e-14).log();
    return es.eigenvectors() * l.cast<std::complex<double>>().asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace

TEST(Accumulate, EquilibriumIsStationary) {
    std::mt19937_64 rng(41);
    for (int dim : {2, 3, 4}) {
        const HermitianObservable h(oracle::random_hermitian(dim, rng));
        BathSpec bath;
        bath.beta = 0.7;
        bath.coupling_ops.emplace_back(oracle::random_hermitian(dim, rng));
        const Simulated r = simulate(gibbs_state(h, 0.7), static_schedule(h, {bath}, 5.0));
        const LedgerRow& first = r.rows.front();
        for (const LedgerRow& row : r.rows) {
            EXPECT_NEAR(row.work_cum, 0.0, 1e-9);
            EXPECT_NEAR(row.heat_cum[0], 0.0, 1e-9);
            EXPECT_NEAR(row.entropy, first.entropy, 1e-9);
            EXPECT_NEAR(row.energy, first.energy, 1e-9);
            EXPECT_NEAR(row.sigma[0], 0.0, 1e-9);
        }
        EXPECT_NEAR(check_laws(r.rows, 1e-8).total_entropy_production, 0.0, 1e-9);
    }
}

TEST(Accumulate, UndrivenEnergyChangeIsHeat) {
    std::mt19937_64 rng(42);
    for (int k = 0; k < 5; ++k) {
        const HermitianObservable h(oracle::random_hermitian(3, rng));
        BathSpec a, b;
        a.beta = 0.5;
        a.coupling_ops.emplace_back(oracle::random_hermitian(3, rng));
        b.beta = 2.0;
        b.coupling_ops.emplace_back(oracle::random_hermitian(3, rng));
        const Simulated r = simulate(DensityOperator(oracle::random_density(3, rng)), static_schedule(h, {a, b}, 4.0));
        for (const LedgerRow& row : r.rows) {
            EXPECT_EQ(row.work_cum, 0.0);
            EXPECT_NEAR(row.heat_cum[0] + row.heat_cum[1], row.energy - r.rows.front().energy, 50e-8);
        }
    }
}

TEST(Accumulate, RowsAgainstQubitOracle) {
    const double e = 1.4, beta = 0.9, g0 = 0.8;
    ComplexMatrix rho0(2, 2);
    rho0 << 0.8, Complex(0.1, 0.2), Complex(0.1, -0.2), 0.2;
    const Simulated r = simulate(DensityOperator(rho0), static_schedule(qubit_h(e), {qubit_bath(beta, g0)}, 3.0));
    const oracle::Matrix log_eq = reference_log(gibbs_state(qubit_h(e), beta).matrix());
    for (const LedgerRow& row : r.rows) {
        const auto& sample = r.trajectory.samples[static_cast<std::size_t>(&row - r.rows.data())];
        const oracle::Matrix& rho = sample.rho.matrix();
        const oracle::Matrix d = qubit_dissipator(rho, e, beta, g0);
        const double heat_rate = (qubit_h(e).matrix() * d).trace().real();
        const double sigma = -(d * (reference_log(rho) - log_eq)).trace().real();
        EXPECT_NEAR(row.heat_rate[0], heat_rate, 1e-12);
        EXPECT_NEAR(row.sigma[0], sigma, 1e-10);
        EXPECT_NEAR(row.energy, (rho * qubit_h(e).matrix()).trace().real(), 1e-14);
        EXPECT_NEAR(row.entropy, oracle::qubit_entropy(rho), 1e-12);
        EXPECT_EQ(row.beta[0], beta);
        EXPECT_FALSE(row.floored);
    }
}

TEST(Accumulate, RelaxationProducesEntropy) {
    std::mt19937_64 rng(43);
    const HermitianObservable h(oracle::random_hermitian(3, rng));
    BathSpec bath;
    bath.beta = 1.2;
    bath.coupling_ops.emplace_back(oracle::random_hermitian(3, rng));
    const Simulated r = simulate(DensityOperator(oracle::random_density(3, rng)), static_schedule(h, {bath}, 10.0));
    const LawAudit audit = check_laws(r.rows, 1e-8);
    EXPECT_TRUE(audit.ok());
    EXPECT_GE(audit.min_sigma, -1e-10);
    EXPECT_GT(audit.total_entropy_production, 0.0);
}

TEST(Audit, RandomDrivenTrajectories) {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> u(0.2, 3.0);
    for (int k = 0; k < 20; ++k) {
        const int dim = 2 + k % 3;
        const HermitianObservable h0(oracle::random_hermitian(dim, rng));
        const HermitianObservable h1(oracle::random_hermitian(dim, rng));
        Schedule s;
        s.initial_hamiltonian = h0;
        for (int j = 0; j < 2; ++j) {
            BathSpec b;
            b.beta = u(rng);
            b.strength = u(rng) / 3.0;
            b.coupling_ops.emplace_back(oracle::random_hermitian(dim, rng));
            s.baths.push_back(b);
        }
        s.segments.push_back(Segment::linear_ramp(0.0, 2.0, h0, h1, {0, 1}));
        s.segments.push_back(Segment::constant(2.0, 3.0, h1, {1}));
        const Simulated r = simulate(DensityOperator(oracle::random_density(dim, rng)), s);
        const LawAudit audit = check_laws(r.rows, 1e-8);
        EXPECT_GE(audit.min_sigma, -1e-10);
        EXPECT_LE(audit.max_clausius_residual, 50e-8);
        EXPECT_LE(audit.max_step_first_law_residual, 10e-8);
        EXPECT_LE(audit.first_law_residual, 50e-8);
        EXPECT_TRUE(audit.ok());
        EXPECT_EQ(audit.floored_rows, 0u);
    }
}

TEST(Audit, FlagsViolations) {
    std::vector<LedgerRow> rows(2);
    for (LedgerRow& row : rows) {
        row.sigma = {0.0};
        row.heat_cum = {0.0};
        row.heat_rate = {0.0};
        row.beta = {1.0};
    }
    rows[1].t = 1.0;
    rows[1].energy = 1.0;  // energy out of nowhere
    rows[1].sigma = {-1e-6};
    LawAudit a = check_laws(rows, 1e-8);
    EXPECT_FALSE(a.first_law_ok);
    EXPECT_FALSE(a.sigma_nonnegative);
    EXPECT_FALSE(a.clausius_ok);
    EXPECT_FALSE(a.ok());
    EXPECT_NEAR(a.first_law_residual, 1.0, 1e-15);

    rows[1].floored = true;  // floored rows do not enter the sigma minimum
    a = check_laws(rows, 1e-8);
    EXPECT_TRUE(a.sigma_nonnegative);
    EXPECT_EQ(a.floored_rows, 1u);
}

TEST(Accumulate, PureStatesAreFloored) {
    const Simulated r = simulate(DensityOperator::basis_state(2, 1), static_schedule(qubit_h(1.0), {}, 1.0));
    EXPECT_TRUE(r.rows.front().floored);
    EXPECT_EQ(r.rows.front().sigma.size(), 0u);
}

TEST(Accumulate, MismatchedSchedule) {
    const Simulated r = simulate(DensityOperator::maximally_mixed(2), static_schedule(qubit_h(1.0), {qubit_bath(1.0, 1.0)}, 1.0));
    EXPECT_THROW(accumulate(r.trajectory, static_schedule(qubit_h(1.0), {}, 1.0)), DimensionMismatch);
    EXPECT_THROW(accumulate(r.trajectory, static_schedule(qubit_h(1.0), {qubit_bath(1.0, 1.0)}, 2.0)), DimensionMismatch);
    EXPECT_THROW(accumulate(r.trajectory, static_schedule(HermitianObservable(identity(3)), {}, 1.0)), DimensionMismatch);
}

TEST(Accumulate, MeasurementChargesEnterWorkColumn) {
    const HermitianObservable zero(ComplexMatrix::Zero(2, 2));
    Schedule s = static_schedule(zero, {qubit_bath(1.0, 1.0)}, 1.0);
    s.segments[0].baths.clear();
    s.events.push_back({0.0, Measure{ProjectiveMeasurement(HermitianObservable(pauli_z())), false,
                                     MetastabilityFlag::relaxing(), 0, "measure"}});
    IntegrationOptions o;
    o.policy = MeasurementPolicy::modified();
    const Simulated r = simulate(DensityOperator::maximally_mixed(2), s, o);
    EXPECT_NEAR(r.rows.back().work_cum, std::numbers::ln2, 1e-15);
    EXPECT_EQ(r.rows.back().mechanical_work, 0.0);
    EXPECT_NEAR(r.rows.back().charges, std::numbers::ln2, 1e-15);
}

TEST(ErasureBalance, NullProcess) {
    std::mt19937_64 rng(45);
    const DensityOperator rho(oracle::random_density(2, rng));
    const ErasureBalanceReport b = erasure_balance(rho, rho, 0.0, 1.0);
    EXPECT_EQ(b.delta_S, 0.0);
    EXPECT_EQ(b.margin, 0.0);
    EXPECT_TRUE(b.satisfies_enen);
    EXPECT_FALSE(b.satisfies_lbound.has_value());
}

TEST(ErasureBalance, OneBitErasure) {
    const double beta = 2.0;
    const DensityOperator in = DensityOperator::maximally_mixed(2);
    const DensityOperator out = DensityOperator::basis_state(2, 0);
    const double kt_ln2 = std::numbers::ln2 / beta;

    const ErasureBalanceReport good = erasure_balance(in, out, 1.06 * kt_ln2, beta);
    EXPECT_NEAR(good.delta_S, -std::numbers::ln2, 1e-14);
    EXPECT_NEAR(good.margin, 0.06 * kt_ln2, 1e-14);
    EXPECT_TRUE(good.satisfies_enen);
    ASSERT_TRUE(good.satisfies_lbound.has_value());
    EXPECT_TRUE(*good.satisfies_lbound);

    const ErasureBalanceReport cheap = erasure_balance(in, out, 0.5 * kt_ln2, beta);
    EXPECT_FALSE(cheap.satisfies_enen);
    EXPECT_FALSE(*cheap.satisfies_lbound);
}

TEST(ErasureBalance, AntiErasureSignCheck) {
    // |0><0| -> I/2 at H = 0: no work, no heat, entropy up by ln 2.
    const ErasureBalanceReport b =
        erasure_balance(DensityOperator::basis_state(2, 0), DensityOperator::maximally_mixed(2), -0.0, 1.0);
    EXPECT_NEAR(b.delta_S, std::numbers::ln2, 1e-14);
    EXPECT_TRUE(b.satisfies_enen);
    EXPECT_FALSE(b.satisfies_lbound.has_value());
}

TEST(ErasureBalance, Errors) {
    EXPECT_THROW(erasure_balance(DensityOperator::maximally_mixed(2), DensityOperator::maximally_mixed(3), 0.0, 1.0),
                 DimensionMismatch);
    EXPECT_THROW(erasure_balance(DensityOperator::maximally_mixed(2), DensityOperator::maximally_mixed(2), 0.0, 0.0),
                 InvalidArgument);
}

TEST(ErasureBalance, RandomSimulatedProcessesSatisfyEnen) {
    // Relaxation in contact with one bath: heat to bath + T dS >= 0.
    std::mt19937_64 rng(46);
    for (int k = 0; k < 20; ++k) {
        const double beta = std::uniform_real_distribution<double>(0.3, 3.0)(rng);
        const HermitianObservable h(oracle::random_hermitian(2, rng, 2.0));
        BathSpec bath;
        bath.beta = beta;
        bath.coupling_ops.emplace_back(oracle::random_hermitian(2, rng));
        const DensityOperator rho0(oracle::random_density(2, rng));
        const Simulated r = simulate(rho0, static_schedule(h, {bath}, 2.0));
        const ErasureBalanceReport b =
            erasure_balance(rho0, r.trajectory.samples.back().rho, -r.rows.back().heat_cum[0], beta);
        EXPECT_TRUE(b.satisfies_enen) << b.margin;
    }
}
