#pragma once

// Scripted work-extraction cycles on a bath-coupled qubit and on a
// metastable memory qubit, plus a simulated one-bit erasure.
//
// Sign conventions: work_cum is work performed ON the system (measurement
// charges included), heat_cum is heat absorbed FROM each bath. Extracted
// work is therefore -work_cum.

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qthermo/dynamics.hpp"
#include "qthermo/ledger.hpp"
#include "qthermo/measurement.hpp"

namespace qthermo {

struct ProtocolReport {
    std::string protocol;
    MeasurementPolicy policy{};
    Trajectory trajectory;
    Schedule schedule;  // segments and events as executed
    std::vector<LedgerRow> ledger;
    LawAudit audit;

    double net_work_extracted = 0.0;    // -(final work_cum), after measurement charges
    double gross_work_extracted = 0.0;  // before measurement charges
    std::vector<double> net_heat_per_bath;
    double measurement_charges = 0.0;
    /// Net extraction after charges <= 1e-9: no cyclic conversion of bath heat into work.
    bool second_law_consistent = true;

    std::map<std::string, double> metrics;  // protocol-specific figures
    std::vector<std::string> warnings;
};

/// H_s = (s E / 2)(s I - sigma^z): leaves |s> at zero energy and lifts |-s> by E.
HermitianObservable outcome_hamiltonian(int s, double energy);

/// Encoded memory qubit. epsilon = 0 means its sigma^z / sigma^x eigenstates never relax.
struct MemoryModel {
    double epsilon = 0.0;
    double gamma0 = 1.0;
    double dwell = 1.0;  // time the memory is held between control steps
};

struct Section3Params {
    double E0 = 10.0;
    double beta = 1.0;
    double gamma0 = 1.0;
    double tau_ramp = 100.0;
    double t_relax = 20.0;  // final thermalisation at H = 0
    MeasurementPolicy policy{};
    std::uint64_t seed = 0;
    double tol = 1e-8;
    std::size_t sample_stride = 1;
    std::size_t max_steps = 2'000'000;
};

/// Measure sigma^z on I/2, quench to H_s, ramp E0 -> 0 with the bath attached, re-thermalise.
/// tau_ramp = 0 replaces the ramp by a quench.
ProtocolReport run_section3_cycle(const Section3Params& p);

struct ProcessAParams {
    double E = 1.0;
    double beta = 1.0;
    int n_cycles = 1;
    MeasurementPolicy policy{};
    std::uint64_t seed = 0;
    MemoryModel memory{};
    double tol = 1e-8;
    std::size_t sample_stride = 1;
    std::size_t max_steps = 2'000'000;
};

/// Per cycle: selective sigma^z, quench to H_s, non-selective sigma^x, quench to 0.
ProtocolReport run_process_a(const ProcessAParams& p);

struct ProcessBParams {
    double E0 = 10.0;
    double beta = 1.0;
    double gamma0 = 1.0;
    double tau_ramp = 100.0;
    double t_relax = 20.0;
    MeasurementPolicy policy{};
    std::uint64_t seed = 0;
    MemoryModel memory{};
    double tol = 1e-8;
    std::size_t sample_stride = 1;
    std::size_t max_steps = 2'000'000;
};

struct ProcessBReport {
    ProtocolReport report;
    double swap_fidelity = 0.0;
    double transfer_distance = 0.0;  // ||rho_relax(after) - rho_memory(before)||_1
};

/// Memory (factor 0) measured in sigma^z, state swapped onto the bath-coupled
/// relaxing qubit (factor 1) by the isotropic Heisenberg coupling, then work is
/// extracted from the relaxing qubit as in run_section3_cycle.
/// Throws ProtocolAbort if the swap fidelity falls below 1 - 1e-9.
ProcessBReport run_process_b(const ProcessBParams& p);

/// Heisenberg coupling sigma^x X + sigma^y Y + sigma^z Z on two qubits.
HermitianObservable heisenberg_coupling();

/// exp(-i tau (sigma^x X + sigma^y Y + sigma^z Z)).
ComplexMatrix build_swap_unitary(double tau);

/// |Tr(SWAP^+ U)| / 4; equals 1 exactly when U is SWAP up to a global phase.
double swap_fidelity(const ComplexMatrix& u);

struct ErasureParams {
    double E_max = 20.0;
    double beta = 1.0;
    double gamma0 = 1.0;
    double tau = 1000.0;
    double tol = 1e-8;
    std::size_t sample_stride = 1;
    std::size_t max_steps = 2'000'000;
};

struct ErasureReport {
    ProtocolReport report;
    ErasureBalanceReport balance;
    double heat_to_bath = 0.0;
};

/// I/2 -> |0><0|: raise the |1> level to E_max over tau with the bath attached, then quench back.
ErasureReport run_erasure(const ErasureParams& p);

struct RelaxationParams {
    double E0 = 1.0;
    double beta = 1.0;
    double gamma0 = 1.0;
    double duration = 20.0;
    double tol = 1e-8;
    std::size_t sample_stride = 1;
    std::size_t max_steps = 2'000'000;
};

/// Excited qubit under H = (E0/2) sigma^z relaxing in contact with one bath.
ProtocolReport run_relaxation(const RelaxationParams& p);

} // namespace qthermo
