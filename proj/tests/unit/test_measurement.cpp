#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qthermo/errors.hpp"
#include "qthermo/measurement.hpp"

using namespace qthermo;

namespace {

const ProjectiveMeasurement& sigma_z() {
    static const ProjectiveMeasurement m{HermitianObservable(pauli_z())};
    return m;
}

const ProjectiveMeasurement& sigma_x() {
    static const ProjectiveMeasurement m{HermitianObservable(pauli_x())};
    return m;
}

DensityOperator plus_state() {
    Eigen::VectorXcd psi(2);
    psi << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    return DensityOperator::pure(psi);
}

} // namespace

TEST(Selective, EigenstateIsCertain) {
    const DensityOperator up = DensityOperator::basis_state(2, 0);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const SelectiveOutcome o = measure_selective(up, sigma_z(), seed);
        EXPECT_EQ(o.eigenvalue, 1.0);
        EXPECT_NEAR(o.probability, 1.0, 1e-15);
        EXPECT_LE(max_abs(o.state.matrix() - up.matrix()), 1e-15);
    }
}

TEST(Selective, MaximallyMixedCollapses) {
    bool seen[2] = {false, false};
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
        const SelectiveOutcome o = measure_selective(DensityOperator::maximally_mixed(2), sigma_z(), seed);
        EXPECT_NEAR(o.probability, 0.5, 1e-15);
        const Eigen::Index idx = o.eigenvalue > 0 ? 0 : 1;
        EXPECT_LE(max_abs(o.state.matrix() - DensityOperator::basis_state(2, idx).matrix()), 1e-15);
        seen[o.outcome] = true;
    }
    EXPECT_TRUE(seen[0] && seen[1]);
}

TEST(Selective, BornStatistics) {
    const int n = 100000;
    int plus = 0;
    for (int i = 0; i < n; ++i) {
        if (measure_selective(plus_state(), sigma_z(), 2024, static_cast<std::uint64_t>(i)).eigenvalue > 0) ++plus;
    }
    const double freq = static_cast<double>(plus) / n;
    EXPECT_LE(std::abs(freq - 0.5), 3.0 * std::sqrt(0.25 / n));
}

TEST(Selective, QutritBornStatistics) {
    std::mt19937_64 rng(21);
    const DensityOperator rho(oracle::random_density(3, rng));
    const ProjectiveMeasurement m{HermitianObservable(oracle::random_hermitian(3, rng))};
    const int n = 40000;
    std::vector<int> counts(m.outcomes(), 0);
    for (int i = 0; i < n; ++i) ++counts[measure_selective(rho, m, 99, static_cast<std::uint64_t>(i)).outcome];
    for (std::size_t k = 0; k < m.outcomes(); ++k) {
        const double p = expectation(rho.matrix(), m.decomposition().projectors[k]);
        EXPECT_LE(std::abs(static_cast<double>(counts[k]) / n - p), 4.0 * std::sqrt(p * (1 - p) / n));
    }
}

TEST(Selective, DeterministicInSeedAndDraw) {
    std::vector<std::size_t> a, b;
    for (std::uint64_t i = 0; i < 200; ++i) {
        a.push_back(measure_selective(plus_state(), sigma_z(), 5, i).outcome);
        b.push_back(measure_selective(plus_state(), sigma_z(), 5, i).outcome);
    }
    EXPECT_EQ(a, b);
    EXPECT_EQ(seeded_uniform(1, 2), seeded_uniform(1, 2));
    EXPECT_NE(seeded_uniform(1, 2), seeded_uniform(1, 3));
    EXPECT_NE(seeded_uniform(1, 2), seeded_uniform(2, 2));
    for (std::uint64_t i = 0; i < 1000; ++i) {
        const double u = seeded_uniform(7, i);
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(Selective, ZeroProbabilityOutcomesNeverSampled) {
    ComplexMatrix d = ComplexMatrix::Zero(3, 3);
    d(0, 0) = 0.5;
    d(2, 2) = 0.5;
    const ProjectiveMeasurement m{HermitianObservable(ComplexMatrix(Eigen::Vector3cd(1.0, 2.0, 3.0).asDiagonal()))};
    for (std::uint64_t i = 0; i < 500; ++i) EXPECT_NE(measure_selective(DensityOperator(d), m, 3, i).outcome, 1u);
}

TEST(Selective, AverageEqualsNonSelective) {
    std::mt19937_64 rng(22);
    for (int k = 0; k < 20; ++k) {
        const DensityOperator rho(oracle::random_density(3, rng));
        const ProjectiveMeasurement m{HermitianObservable(oracle::random_hermitian(3, rng))};
        ComplexMatrix avg = ComplexMatrix::Zero(3, 3);
        for (std::size_t j = 0; j < m.outcomes(); ++j) {
            const ComplexMatrix& p = m.decomposition().projectors[j];
            const double pj = expectation(rho.matrix(), p);
            avg += pj * (p * rho.matrix() * p / pj);
        }
        EXPECT_LE(max_abs(avg - measure_nonselective(rho, m).matrix()), 1e-10);
    }
}

TEST(NonSelective, EigenstateOfSigmaZUnderSigmaX) {
    for (Eigen::Index s : {0, 1}) {
        const DensityOperator out = measure_nonselective(DensityOperator::basis_state(2, s), sigma_x());
        EXPECT_LE(max_abs(out.matrix() - 0.5 * identity(2)), 1e-15);
    }
}

TEST(NonSelective, DiagonalStatesAreFixed) {
    ComplexMatrix d = ComplexMatrix::Zero(2, 2);
    d(0, 0) = 0.3;
    d(1, 1) = 0.7;
    EXPECT_LE(max_abs(measure_nonselective(DensityOperator(d), sigma_z()).matrix() - d), 1e-15);
}

TEST(NonSelective, IdempotentUnitalEntropyIncreasing) {
    std::mt19937_64 rng(23);
    for (int k = 0; k < 100; ++k) {
        const int dim = 2 + k % 3;
        const DensityOperator rho(oracle::random_density(dim, rng));
        const ProjectiveMeasurement m{HermitianObservable(oracle::random_hermitian(dim, rng))};
        const DensityOperator once = measure_nonselective(rho, m);
        const DensityOperator twice = measure_nonselective(once, m);
        EXPECT_LE(max_abs(once.matrix() - twice.matrix()), 1e-12);
        EXPECT_NEAR(once.matrix().trace().real(), 1.0, 1e-12);
        EXPECT_GE(von_neumann_entropy(once), von_neumann_entropy(rho) - 1e-10);
    }
}

TEST(NonSelective, DimensionMismatch) {
    EXPECT_THROW(measure_nonselective(DensityOperator::maximally_mixed(3), sigma_z()), DimensionMismatch);
    EXPECT_THROW(measure_selective(DensityOperator::maximally_mixed(3), sigma_z(), 0), DimensionMismatch);
}

TEST(Policy, ChargeTable) {
    const double beta = 2.0;
    const double kt_ln2 = std::numbers::ln2 / beta;
    const auto relax = MetastabilityFlag::relaxing();
    const auto eq = MetastabilityFlag::metastable();
    EXPECT_DOUBLE_EQ(MeasurementPolicy::standard().charge(relax, 2, beta), kt_ln2);
    EXPECT_DOUBLE_EQ(MeasurementPolicy::standard().charge(eq, 2, beta), kt_ln2);
    EXPECT_DOUBLE_EQ(MeasurementPolicy::modified().charge(relax, 2, beta), kt_ln2);
    EXPECT_EQ(MeasurementPolicy::modified().charge(eq, 2, beta), 0.0);
    EXPECT_DOUBLE_EQ(MeasurementPolicy::standard().charge(relax, 3, beta), std::log(3.0) / beta);
    EXPECT_EQ(MeasurementPolicy::standard().charge(relax, 1, beta), 0.0);
    EXPECT_THROW((void)MeasurementPolicy::standard().charge(relax, 2, 0.0), InvalidArgument);
}

TEST(Policy, ParseAndName) {
    EXPECT_EQ(MeasurementPolicy::parse("sLPM").variant, LandauerPolicy::Standard);
    EXPECT_EQ(MeasurementPolicy::parse("LPM").variant, LandauerPolicy::Modified);
    EXPECT_EQ(MeasurementPolicy::modified().name(), "LPM");
    EXPECT_EQ(MeasurementPolicy::standard().name(), "sLPM");
    EXPECT_THROW(MeasurementPolicy::parse("lpm"), InvalidArgument);
}

TEST(Policy, ExponentialMetastability) {
    const MetastabilityFlag f = MetastabilityFlag::exponential(2.0, 0.5, 10.0);
    EXPECT_TRUE(f.is_equilibrium);
    EXPECT_NEAR(f.epsilon, 2.0 * std::exp(-5.0), 1e-15);
    EXPECT_THROW(MetastabilityFlag::exponential(1.0, -1.0, 1.0), InvalidArgument);
}

TEST(Accounting, BooksChargeAndHeat) {
    // Non-selective sigma_x on an eigenstate of (E/2)(I - sigma_z) with E = kT: +E/2 as heat.
    const double e = 1.0, beta = 1.0;
    const HermitianObservable h(0.5 * e * (identity(2) - pauli_z()));
    const DensityOperator before = DensityOperator::basis_state(2, 0);
    const DensityOperator after = measure_nonselective(before, sigma_x());
    const double de = expectation(after.matrix(), h.matrix()) - expectation(before.matrix(), h.matrix());
    const MeasurementBooking b =
        account_measurement(MeasurementPolicy::modified(), MetastabilityFlag::metastable(), de, 2, beta, 0);
    EXPECT_NEAR(b.heat, 0.5 * e, 1e-15);
    EXPECT_EQ(b.work_charge, 0.0);
    EXPECT_EQ(b.heat_bath, 0u);
    EXPECT_NE(b.annotation.find("LPM"), std::string::npos);

    const MeasurementBooking s =
        account_measurement(MeasurementPolicy::standard(), MetastabilityFlag::metastable(), de, 2, beta, 1);
    EXPECT_DOUBLE_EQ(s.work_charge, std::numbers::ln2);
    EXPECT_EQ(s.heat_bath, 1u);
    EXPECT_NE(s.annotation.find("sLPM"), std::string::npos);
}
