#pragma once

// Integration of the Markovian master equation
//
//   d rho / dt = -i [H(t), rho] + sum_j L_j(t) rho
//
// along a Schedule of Hamiltonian segments and discrete events. Work
// dW = Tr(rho dH) and per-bath heat dQ_j = Tr(H L_j rho) are integrated
// alongside the state with the same stepper, so the first law closes to
// integrator accuracy.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qthermo/generators.hpp"
#include "qthermo/hilbert.hpp"
#include "qthermo/measurement.hpp"

namespace qthermo {

using HamiltonianFn = std::function<ComplexMatrix(double)>;

/// A time interval over which H(t) is continuous and a fixed set of baths is attached.
struct Segment {
    double t_start = 0.0;
    double t_end = 0.0;
    HamiltonianFn hamiltonian;
    HamiltonianFn derivative;  // dH/dt; central differences when empty
    std::vector<std::size_t> baths;
    /// Static H with no baths: propagate with exp(-i H t) instead of the stepper.
    bool exact_unitary = false;
    std::string label;

    static Segment constant(double t0, double t1, const HermitianObservable& h,
                            std::vector<std::size_t> baths, std::string label = {});
    /// H(t) = h0 + (t - t0)/(t1 - t0) * (h1 - h0).
    static Segment linear_ramp(double t0, double t1, const HermitianObservable& h0,
                               const HermitianObservable& h1, std::vector<std::size_t> baths,
                               std::string label = {});
};

struct Quench {
    HermitianObservable hamiltonian;
    std::string label = "quench";
};

struct Measure {
    ProjectiveMeasurement measurement;
    bool selective = true;
    MetastabilityFlag flag{};
    std::size_t heat_bath = 0;
    std::string label = "measure";
};

using Event = std::variant<Quench, Measure>;

struct TimedEvent {
    double time;
    Event event;
};

struct Schedule {
    HermitianObservable initial_hamiltonian{ComplexMatrix::Zero(1, 1)};
    std::vector<BathSpec> baths;
    std::vector<Segment> segments;
    std::vector<TimedEvent> events;  // applied in time order; ties keep insertion order

    [[nodiscard]] double t_start() const;
    [[nodiscard]] double t_end() const;

    /// Contiguity, event placement, bath indices and Hamiltonian continuity (quenches only via events).
    void validate() const;
};

struct IntegrationOptions {
    double tol = 1e-8;  // local error per step, max norm
    std::uint64_t seed = 0;
    MeasurementPolicy policy{};
    std::size_t sample_stride = 1;  // keep every n-th accepted step
    double initial_step = 1e-2;
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 2'000'000;  // accepted + rejected, per propagator; IntegrationFailure beyond
};

struct Sample {
    double t;
    DensityOperator rho;
    HermitianObservable hamiltonian;
    std::vector<std::size_t> active_baths;  // baths driving the evolution from t onwards
    double work;                // cumulative Tr(rho dH), quenches included
    std::vector<double> heat;   // cumulative heat absorbed from each bath
    double charges;             // cumulative measurement work charges
    std::string events;         // ';'-separated annotations of events applied at t
};

struct MeasurementRecord {
    double t;
    std::string label;
    bool selective;
    std::size_t outcome;  // meaningless for non-selective measurements
    double eigenvalue;
    double probability;
    MeasurementBooking booking;
};

struct StepDiagnostics {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::vector<double> step_sizes;  // accepted steps, in order
    double max_trace_drift = 0.0;
    std::size_t positivity_clamps = 0;
};

struct Trajectory {
    std::vector<Sample> samples;
    std::vector<MeasurementRecord> measurements;
    StepDiagnostics diagnostics;
    std::size_t bath_count = 0;
};

/// Incremental integrator: segments, quenches and measurements are applied in
/// call order, which lets protocols feed measurement outcomes back into later
/// controls. integrate_mme drives one of these from a fixed Schedule.
class Propagator {
public:
    Propagator(DensityOperator rho0, HermitianObservable h0, std::vector<BathSpec> baths,
               IntegrationOptions options, double t0 = 0.0);

    /// Integrate from the current time to seg.t_end.
    void evolve(const Segment& seg);
    /// Integrate from the current time to t_stop <= seg.t_end.
    void evolve(const Segment& seg, double t_stop);

    /// Instantaneous change of Hamiltonian; returns the work Tr(rho (h_new - h_old)).
    double quench(const HermitianObservable& h_new, const std::string& label = "quench");

    MeasurementRecord measure(const Measure& spec);

    [[nodiscard]] double time() const noexcept { return t_; }
    [[nodiscard]] const DensityOperator& state() const noexcept { return rho_; }
    [[nodiscard]] const HermitianObservable& hamiltonian() const noexcept { return h_; }
    [[nodiscard]] const std::vector<BathSpec>& baths() const noexcept { return baths_; }
    [[nodiscard]] double work() const noexcept { return work_; }
    [[nodiscard]] const std::vector<double>& heat() const noexcept { return heat_; }
    [[nodiscard]] double charges() const noexcept { return charges_; }
    [[nodiscard]] const Trajectory& trajectory() const noexcept { return traj_; }

    /// The segments and events actually executed, as a Schedule.
    [[nodiscard]] Schedule executed_schedule() const;

private:
    struct GeneratorCache {
        ComplexMatrix hamiltonian;
        std::optional<GKLSGenerator> generator;
    };

    const GKLSGenerator& generator_for(std::size_t bath, const ComplexMatrix& h);
    Eigen::VectorXcd rhs(const Segment& seg, double t, const Eigen::VectorXcd& y);
    Eigen::VectorXcd rk4(const Segment& seg, double t, const Eigen::VectorXcd& y,
                         const Eigen::VectorXcd& k1, double h);
    /// Largest step inside the RK4 stability region, from a norm bound on the generator at t.
    double stability_step(const Segment& seg, double t);
    void accept_state(const Eigen::VectorXcd& y, double t);
    void record_sample(const std::vector<std::size_t>& baths);
    void annotate(const std::string& note);
    void evolve_unitary(const Segment& seg, double t_stop);

    DensityOperator rho_;
    HermitianObservable h_;
    std::vector<BathSpec> baths_;
    IntegrationOptions opts_;
    double t_;
    double work_ = 0.0;
    std::vector<double> heat_;
    double charges_ = 0.0;
    double step_;
    std::uint64_t draws_ = 0;
    std::vector<GeneratorCache> cache_;
    Trajectory traj_;
    HermitianObservable h_initial_;
    std::vector<Segment> executed_segments_;
    std::vector<TimedEvent> executed_events_;
};

/// Solve the master equation along `schedule` from rho0.
///
/// Throws IntegrationFailure on positivity or trace violations and
/// ScheduleError on malformed schedules.
Trajectory integrate_mme(const DensityOperator& rho0, const Schedule& schedule,
                         const IntegrationOptions& options = {});

struct QuenchResult {
    DensityOperator state;
    double work;
};

/// Instantaneous Hamiltonian switch: state unchanged, work Tr(rho (h_new - h_old)).
QuenchResult apply_quench(const DensityOperator& rho, const HermitianObservable& h_old,
                          const HermitianObservable& h_new);

} // namespace qthermo
