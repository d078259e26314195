#include "qthermo/protocols.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qthermo/errors.hpp"

namespace qthermo {

namespace {

constexpr double kSwapFidelityFloor = 1.0 - 1e-9;
constexpr double kVerdictSlack = 1e-9;

void require_positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) throw InvalidArgument(std::string(what) + " must be positive and finite");
}

void require_non_negative(double x, const char* what) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument(std::string(what) + " must be non-negative and finite");
}

IntegrationOptions options_for(double tol, std::uint64_t seed, const MeasurementPolicy& policy, std::size_t stride,
                              std::size_t max_steps) {
    IntegrationOptions o;
    o.tol = tol;
    o.seed = seed;
    o.policy = policy;
    o.sample_stride = stride;
    o.max_steps = max_steps;
    return o;
}

HermitianObservable zero(Eigen::Index dim) { return HermitianObservable(ComplexMatrix::Zero(dim, dim)); }

ProtocolReport finalize(std::string name, const MeasurementPolicy& policy, const Propagator& prop, double tol) {
    ProtocolReport r;
    r.protocol = std::move(name);
    r.policy = policy;
    r.trajectory = prop.trajectory();
    r.schedule = prop.executed_schedule();
    r.ledger = accumulate(r.trajectory, r.schedule);
    r.audit = check_laws(r.ledger, tol);

    const LedgerRow& last = r.ledger.back();
    r.net_work_extracted = -last.work_cum;
    r.gross_work_extracted = -last.mechanical_work;
    r.net_heat_per_bath = last.heat_cum;
    r.measurement_charges = last.charges;
    r.second_law_consistent = r.net_work_extracted <= kVerdictSlack;

    double heat = 0.0;
    for (const double q : last.heat_cum) heat += q;
    r.metrics["heat_absorbed"] = heat;
    r.metrics["final_energy"] = last.energy;
    r.metrics["entropy_production"] = r.audit.total_entropy_production;
    return r;
}

std::string format(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

void warn_preconditions(ProtocolReport& r, double e0, double beta, double gamma0, double tau) {
    if (e0 * beta < 5.0) r.warnings.push_back("E0*beta = " + format(e0 * beta) + " is below the recommended 5");
    if (tau * gamma0 < 10.0) r.warnings.push_back("tau_ramp*gamma0 = " + format(tau * gamma0) + " is below the recommended 10");
}

int outcome_sign(const MeasurementRecord& rec) { return rec.eigenvalue > 0.0 ? 1 : -1; }

} // namespace

HermitianObservable outcome_hamiltonian(int s, double energy) {
    if (s != 1 && s != -1) throw InvalidArgument("outcome_hamiltonian: s must be +1 or -1");
    const double sd = s;
    return HermitianObservable((0.5 * sd * energy) * (sd * identity(2) - pauli_z()));
}

ProtocolReport run_section3_cycle(const Section3Params& p) {
    require_positive(p.E0, "E0");
    require_positive(p.beta, "beta");
    require_positive(p.gamma0, "gamma0");
    require_non_negative(p.tau_ramp, "tau_ramp");
    require_non_negative(p.t_relax, "t_relax");

    const HermitianObservable h0 = zero(2);
    Propagator prop(DensityOperator::maximally_mixed(2), h0, {qubit_bath(p.beta, p.gamma0, "bath")},
                    options_for(p.tol, p.seed, p.policy, p.sample_stride, p.max_steps));

    const MeasurementRecord rec =
        prop.measure(Measure{ProjectiveMeasurement(HermitianObservable(pauli_z())), true, MetastabilityFlag::relaxing(), 0,
                             "measure_z"});
    const int s = outcome_sign(rec);
    const HermitianObservable hs = outcome_hamiltonian(s, p.E0);
    const double switch_work = prop.quench(hs, "switch_on");

    double t = 0.0;
    if (p.tau_ramp > 0.0) {
        prop.evolve(Segment::linear_ramp(t, t + p.tau_ramp, hs, h0, {0}, "ramp"));
        t += p.tau_ramp;
    } else {
        prop.quench(h0, "switch_off");
    }
    if (p.t_relax > 0.0) prop.evolve(Segment::constant(t, t + p.t_relax, h0, {0}, "relax"));

    ProtocolReport r = finalize("section3", p.policy, prop, p.tol);
    r.metrics["outcome"] = s;
    r.metrics["switch_on_work"] = switch_work;
    const double oracle = (std::numbers::ln2 - std::log1p(std::exp(-p.beta * p.E0))) / p.beta;
    r.metrics["free_energy_oracle"] = oracle;
    warn_preconditions(r, p.E0, p.beta, p.gamma0, p.tau_ramp);
    return r;
}

ProtocolReport run_process_a(const ProcessAParams& p) {
    require_positive(p.E, "E");
    require_positive(p.beta, "beta");
    require_non_negative(p.memory.epsilon, "epsilon");
    require_positive(p.memory.gamma0, "memory gamma0");
    require_positive(p.memory.dwell, "dwell");
    if (p.n_cycles < 1) throw InvalidArgument("n_cycles must be at least 1");

    const HermitianObservable h0 = zero(2);
    Propagator prop(DensityOperator::maximally_mixed(2), h0,
                    {qubit_bath(p.beta, p.memory.gamma0 * p.memory.epsilon, "memory")},
                    options_for(p.tol, p.seed, p.policy, p.sample_stride, p.max_steps));
    const MetastabilityFlag flag = MetastabilityFlag::metastable(p.memory.epsilon);
    const ProjectiveMeasurement mz{HermitianObservable(pauli_z())};
    const ProjectiveMeasurement mx{HermitianObservable(pauli_x())};
    const double d = p.memory.dwell;

    double switch_on_work = 0.0;
    for (int c = 0; c < p.n_cycles; ++c) {
        const double t = 3.0 * d * c;
        const MeasurementRecord rec = prop.measure(Measure{mz, true, flag, 0, "A1"});
        const HermitianObservable hs = outcome_hamiltonian(outcome_sign(rec), p.E);
        switch_on_work += prop.quench(hs, "A2");
        prop.evolve(Segment::constant(t, t + d, hs, {0}, "hold"));
        prop.measure(Measure{mx, false, flag, 0, "A3"});
        prop.evolve(Segment::constant(t + d, t + 2.0 * d, hs, {0}, "hold"));
        prop.quench(h0, "A4");
        prop.evolve(Segment::constant(t + 2.0 * d, t + 3.0 * d, h0, {0}, "idle"));
    }

    ProtocolReport r = finalize("process_a", p.policy, prop, p.tol);
    r.metrics["switch_on_work"] = switch_on_work;
    r.metrics["net_work_per_cycle"] = r.net_work_extracted / p.n_cycles;
    r.metrics["heat_per_cycle"] = r.metrics["heat_absorbed"] / p.n_cycles;
    if (std::abs(p.E * p.beta - 1.0) > 0.5) {
        r.warnings.push_back("E*beta = " + format(p.E * p.beta) + " is far from the intended E ~ kT");
    }
    return r;
}

HermitianObservable heisenberg_coupling() {
    const ComplexMatrix x = pauli_x();
    const ComplexMatrix y = pauli_y();
    const ComplexMatrix z = pauli_z();
    return HermitianObservable(tensor(x, x) + tensor(y, y) + tensor(z, z));
}

ComplexMatrix build_swap_unitary(double tau) {
    require_non_negative(tau, "tau");
    return unitary_propagator(heisenberg_coupling(), tau);
}

double swap_fidelity(const ComplexMatrix& u) {
    if (u.rows() != 4 || u.cols() != 4) throw DimensionMismatch("swap_fidelity: expected a 4x4 matrix");
    return std::abs((swap_gate().adjoint() * u).trace()) / 4.0;
}

ProcessBReport run_process_b(const ProcessBParams& p) {
    require_positive(p.E0, "E0");
    require_positive(p.beta, "beta");
    require_positive(p.gamma0, "gamma0");
    require_non_negative(p.tau_ramp, "tau_ramp");
    require_non_negative(p.t_relax, "t_relax");
    require_non_negative(p.memory.epsilon, "epsilon");
    require_positive(p.memory.gamma0, "memory gamma0");

    const double tau_swap = std::numbers::pi / 4.0;
    ProcessBReport out;
    out.swap_fidelity = swap_fidelity(build_swap_unitary(tau_swap));
    if (out.swap_fidelity < kSwapFidelityFloor) {
        throw ProtocolAbort("swap fidelity " + format(out.swap_fidelity) + " below 1 - 1e-9");
    }

    const ComplexMatrix i2 = identity(2);
    BathSpec memory_bath = qubit_bath(p.beta, p.memory.gamma0 * p.memory.epsilon, "memory");
    memory_bath.coupling_ops = {HermitianObservable(tensor(pauli_x(), i2))};
    BathSpec relax_bath = qubit_bath(p.beta, p.gamma0, "relaxing");
    relax_bath.coupling_ops = {HermitianObservable(tensor(i2, pauli_x()))};

    const HermitianObservable h0 = zero(4);
    Propagator prop(DensityOperator::maximally_mixed(4), h0, {memory_bath, relax_bath},
                    options_for(p.tol, p.seed, p.policy, p.sample_stride, p.max_steps));
    const std::array<Eigen::Index, 2> dims{2, 2};

    // B1
    const MeasurementRecord rec = prop.measure(Measure{ProjectiveMeasurement(HermitianObservable(tensor(pauli_z(), i2))),
                                                       true, MetastabilityFlag::metastable(p.memory.epsilon), 0, "B1"});
    const int s = outcome_sign(rec);
    const DensityOperator memory_before = partial_trace(prop.state(), dims, 0);

    // B2
    const HermitianObservable h_int = heisenberg_coupling();
    double t = 0.0;
    const double coupling_on_work = prop.quench(h_int, "couple");
    Segment swap = Segment::constant(t, t + tau_swap, h_int, {}, "swap");
    swap.exact_unitary = true;
    prop.evolve(swap);
    t += tau_swap;
    const double coupling_off_work = prop.quench(h0, "decouple");
    const DensityOperator relax_after = partial_trace(prop.state(), dims, 1);
    out.transfer_distance = trace_norm_distance(relax_after, memory_before);

    // B3
    const HermitianObservable hs(tensor(i2, outcome_hamiltonian(s, p.E0).matrix()));
    const double switch_work = prop.quench(hs, "switch_on");
    if (p.tau_ramp > 0.0) {
        prop.evolve(Segment::linear_ramp(t, t + p.tau_ramp, hs, h0, {0, 1}, "ramp"));
        t += p.tau_ramp;
    } else {
        prop.quench(h0, "switch_off");
    }
    if (p.t_relax > 0.0) prop.evolve(Segment::constant(t, t + p.t_relax, h0, {0, 1}, "relax"));

    out.report = finalize("process_b", p.policy, prop, p.tol);
    ProtocolReport& r = out.report;
    r.metrics["outcome"] = s;
    r.metrics["swap_fidelity"] = out.swap_fidelity;
    r.metrics["transfer_distance"] = out.transfer_distance;
    r.metrics["coupling_work"] = coupling_on_work + coupling_off_work;
    r.metrics["switch_on_work"] = switch_work;
    warn_preconditions(r, p.E0, p.beta, p.gamma0, p.tau_ramp);
    return out;
}

ErasureReport run_erasure(const ErasureParams& p) {
    require_positive(p.E_max, "E_max");
    require_positive(p.beta, "beta");
    require_positive(p.gamma0, "gamma0");
    require_positive(p.tau, "tau");

    const HermitianObservable h0 = zero(2);
    ComplexMatrix raised = ComplexMatrix::Zero(2, 2);
    raised(1, 1) = p.E_max;
    const HermitianObservable h1(raised);
    const DensityOperator rho_in = DensityOperator::maximally_mixed(2);

    Propagator prop(rho_in, h0, {qubit_bath(p.beta, p.gamma0, "bath")},
                    options_for(p.tol, 0, MeasurementPolicy::standard(), p.sample_stride, p.max_steps));
    prop.evolve(Segment::linear_ramp(0.0, p.tau, h0, h1, {0}, "raise"));
    prop.quench(h0, "lower");

    ErasureReport out;
    out.report = finalize("erasure", MeasurementPolicy::standard(), prop, p.tol);
    out.heat_to_bath = -out.report.net_heat_per_bath.front();
    out.balance = erasure_balance(rho_in, prop.state(), out.heat_to_bath, p.beta);
    ProtocolReport& r = out.report;
    r.metrics["heat_to_bath"] = out.heat_to_bath;
    r.metrics["delta_S"] = out.balance.delta_S;
    r.metrics["enen_margin"] = out.balance.margin;
    r.metrics["landauer_bound"] = std::numbers::ln2 / p.beta;
    return out;
}

ProtocolReport run_relaxation(const RelaxationParams& p) {
    require_positive(p.E0, "E0");
    require_positive(p.beta, "beta");
    require_positive(p.gamma0, "gamma0");
    require_positive(p.duration, "duration");

    const HermitianObservable h(0.5 * p.E0 * pauli_z());
    Propagator prop(DensityOperator::basis_state(2, 0), h, {qubit_bath(p.beta, p.gamma0, "bath")},
                    options_for(p.tol, 0, MeasurementPolicy::standard(), p.sample_stride, p.max_steps));
    prop.evolve(Segment::constant(0.0, p.duration, h, {0}, "relax"));

    ProtocolReport r = finalize("relax", MeasurementPolicy::standard(), prop, p.tol);
    r.metrics["final_trace_distance_to_gibbs"] = trace_norm_distance(prop.state(), gibbs_state(h, p.beta));
    return r;
}

} // namespace qthermo
