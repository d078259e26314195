#include "qthermo/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <iomanip>

#include "qthermo/errors.hpp"

namespace qthermo {

namespace {

constexpr double kRefreshThreshold = 1e-6;   // relative change of H that triggers a generator rebuild
constexpr double kContinuityTol = 1e-9;
constexpr double kTimeEps = 1e-12;

double time_eps(double t) { return kTimeEps * std::max(1.0, std::abs(t)); }

bool same_time(double a, double b) { return std::abs(a - b) <= time_eps(std::max(std::abs(a), std::abs(b))); }

bool hamiltonians_match(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows()) return false;
    const double scale = std::max({1.0, max_abs(a), max_abs(b)});
    return max_abs(a - b) <= kContinuityTol * scale;
}

ComplexMatrix derivative_at(const Segment& seg, double t) {
    if (seg.derivative) return seg.derivative(t);
    const double span = seg.t_end - seg.t_start;
    const double delta = 1e-5 * span;
    const double lo = std::max(seg.t_start, t - delta);
    const double hi = std::min(seg.t_end, t + delta);
    return (seg.hamiltonian(hi) - seg.hamiltonian(lo)) / (hi - lo);
}

std::string format_double(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

} // namespace

Segment Segment::constant(double t0, double t1, const HermitianObservable& h, std::vector<std::size_t> baths,
                          std::string label) {
    Segment s;
    s.t_start = t0;
    s.t_end = t1;
    ComplexMatrix m = h.matrix();
    const Eigen::Index n = m.rows();
    s.hamiltonian = [m](double) { return m; };
    s.derivative = [n](double) { return ComplexMatrix(ComplexMatrix::Zero(n, n)); };
    s.baths = std::move(baths);
    s.label = std::move(label);
    return s;
}

Segment Segment::linear_ramp(double t0, double t1, const HermitianObservable& h0, const HermitianObservable& h1,
                             std::vector<std::size_t> baths, std::string label) {
    if (h0.dim() != h1.dim()) throw DimensionMismatch("linear_ramp: endpoint Hamiltonians differ in dimension");
    if (!(t1 > t0)) throw ScheduleError("linear_ramp: t_end must exceed t_start");
    Segment s;
    s.t_start = t0;
    s.t_end = t1;
    ComplexMatrix a = h0.matrix();
    ComplexMatrix slope = (h1.matrix() - h0.matrix()) / (t1 - t0);
    s.hamiltonian = [a, slope, t0, t1](double t) -> ComplexMatrix {
        if (t >= t1) return a + slope * (t1 - t0);
        return a + slope * (t - t0);
    };
    s.derivative = [slope](double) { return slope; };
    s.baths = std::move(baths);
    s.label = std::move(label);
    return s;
}

double Schedule::t_start() const {
    if (segments.empty()) throw ScheduleError("schedule has no segments");
    return segments.front().t_start;
}

double Schedule::t_end() const {
    if (segments.empty()) throw ScheduleError("schedule has no segments");
    return segments.back().t_end;
}

void Schedule::validate() const {
    if (segments.empty()) throw ScheduleError("schedule has no segments");
    const Eigen::Index dim = initial_hamiltonian.dim();
    for (const auto& b : baths) b.validate(dim);

    for (std::size_t i = 0; i < segments.size(); ++i) {
        const Segment& s = segments[i];
        if (!s.hamiltonian) throw ScheduleError("segment " + std::to_string(i) + " has no Hamiltonian");
        if (!(s.t_end > s.t_start)) throw ScheduleError("segment " + std::to_string(i) + " has non-positive duration");
        if (i > 0 && !same_time(s.t_start, segments[i - 1].t_end)) {
            throw ScheduleError("non-contiguous schedule: segment " + std::to_string(i) + " starts at " +
                                format_double(s.t_start) + " but the previous one ends at " +
                                format_double(segments[i - 1].t_end));
        }
        for (const std::size_t b : s.baths) {
            if (b >= baths.size()) throw ScheduleError("segment " + std::to_string(i) + " references unknown bath");
        }
        if (s.exact_unitary && !s.baths.empty()) {
            throw ScheduleError("segment " + std::to_string(i) + ": exact unitary propagation requires no baths");
        }
    }

    const double t0 = t_start();
    const double t1 = t_end();
    for (const auto& ev : events) {
        if (ev.time < t0 - time_eps(t0) || ev.time > t1 + time_eps(t1)) {
            throw ScheduleError("event at " + format_double(ev.time) + " lies outside the schedule");
        }
        if (const auto* q = std::get_if<Quench>(&ev.event)) {
            if (q->hamiltonian.dim() != dim) throw DimensionMismatch("quench Hamiltonian has the wrong dimension");
            const bool at_boundary =
                same_time(ev.time, t1) || std::any_of(segments.begin(), segments.end(), [&](const Segment& s) {
                    return same_time(ev.time, s.t_start);
                });
            if (!at_boundary) throw ScheduleError("quench at " + format_double(ev.time) + " is not at a segment boundary");
        } else {
            const auto& m = std::get<Measure>(ev.event);
            if (m.measurement.dim() != dim) throw DimensionMismatch("measured observable has the wrong dimension");
            if (m.heat_bath >= baths.size()) throw ScheduleError("measurement books heat to an unknown bath");
        }
    }

    // Hamiltonian continuity: jumps are only allowed through quench events at boundaries.
    ComplexMatrix current = initial_hamiltonian.matrix();
    auto apply_quenches_at = [&](double t) {
        for (const auto& ev : events) {
            if (const auto* q = std::get_if<Quench>(&ev.event); q && same_time(ev.time, t)) {
                current = q->hamiltonian.matrix();
            }
        }
    };
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const Segment& s = segments[i];
        apply_quenches_at(s.t_start);
        const ComplexMatrix h_start = s.hamiltonian(s.t_start);
        if (h_start.rows() != dim || h_start.cols() != dim) {
            throw DimensionMismatch("segment " + std::to_string(i) + " Hamiltonian has the wrong dimension");
        }
        if (!hamiltonians_match(h_start, current)) {
            throw ScheduleError("discontinuous Hamiltonian at t = " + format_double(s.t_start) +
                                " without a quench event");
        }
        current = s.hamiltonian(s.t_end);
        if (s.exact_unitary && !hamiltonians_match(current, h_start)) {
            throw ScheduleError("segment " + std::to_string(i) + ": exact unitary propagation needs a static Hamiltonian");
        }
    }
}

Propagator::Propagator(DensityOperator rho0, HermitianObservable h0, std::vector<BathSpec> baths,
                       IntegrationOptions options, double t0)
    : rho_(std::move(rho0)),
      h_(std::move(h0)),
      baths_(std::move(baths)),
      opts_(options),
      t_(t0),
      heat_(baths_.size(), 0.0),
      step_(options.initial_step),
      cache_(baths_.size()),
      h_initial_(h_) {
    if (rho_.dim() != h_.dim()) throw DimensionMismatch("Propagator: state and Hamiltonian dimensions differ");
    if (!(opts_.tol >= 1e-12 && opts_.tol <= 1e-4)) {
        throw InvalidArgument("integration tolerance must lie in [1e-12, 1e-4]");
    }
    if (opts_.sample_stride == 0) throw InvalidArgument("sample_stride must be positive");
    if (!(opts_.initial_step > 0.0) || !(opts_.max_step > 0.0) || opts_.max_steps == 0) {
        throw InvalidArgument("step sizes and the step budget must be positive");
    }
    for (const auto& b : baths_) b.validate(h_.dim());
    traj_.bath_count = baths_.size();
    record_sample({});
}

const GKLSGenerator& Propagator::generator_for(std::size_t bath, const ComplexMatrix& h) {
    GeneratorCache& c = cache_[bath];
    bool rebuild = !c.generator.has_value();
    if (!rebuild) {
        const double scale = max_abs(h);
        const double change = max_abs(h - c.hamiltonian);
        rebuild = scale == 0.0 ? change > 0.0 : change > kRefreshThreshold * scale;
    }
    if (rebuild) {
        c.generator.emplace(build_davies_generator(HermitianObservable(hermitian_part(h)), baths_[bath], bath));
        c.hamiltonian = h;
    }
    return *c.generator;
}

Eigen::VectorXcd Propagator::rhs(const Segment& seg, double t, const Eigen::VectorXcd& y) {
    const Eigen::Index n = rho_.dim();
    const Eigen::Index n2 = n * n;
    const Eigen::Map<const ComplexMatrix> rho(y.data(), n, n);
    const ComplexMatrix h = seg.hamiltonian(t);
    const ComplexMatrix hdot = derivative_at(seg, t);

    Eigen::VectorXcd dy = Eigen::VectorXcd::Zero(y.size());
    Eigen::Map<ComplexMatrix> drho(dy.data(), n, n);
    const Complex minus_i{0.0, -1.0};
    drho = minus_i * (h * rho - rho * h);
    dy(n2) = expectation(rho, hdot);
    for (const std::size_t b : seg.baths) {
        if (baths_[b].strength == 0.0) continue;
        const ComplexMatrix l = generator_for(b, h).apply(rho);
        drho += l;
        dy(n2 + 1 + static_cast<Eigen::Index>(b)) = expectation(l, h);
    }
    return dy;
}

Eigen::VectorXcd Propagator::rk4(const Segment& seg, double t, const Eigen::VectorXcd& y,
                                 const Eigen::VectorXcd& k1, double h) {
    const Eigen::VectorXcd k2 = rhs(seg, t + 0.5 * h, y + (0.5 * h) * k1);
    const Eigen::VectorXcd k3 = rhs(seg, t + 0.5 * h, y + (0.5 * h) * k2);
    const Eigen::VectorXcd k4 = rhs(seg, t + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double Propagator::stability_step(const Segment& seg, double t) {
    const ComplexMatrix h = seg.hamiltonian(t);
    const Eigen::Index n = h.rows();
    const ComplexMatrix centered = h - (h.trace() / static_cast<double>(n)) * identity(n);
    // ||[H, .]|| <= 2 ||H - c||, ||D|| <= 2 sum_k rate_k ||A_k||^2; Frobenius norms bound both.
    double bound = 2.0 * centered.norm();
    for (const std::size_t b : seg.baths) {
        if (baths_[b].strength == 0.0) continue;
        for (const LindbladTerm& term : generator_for(b, h).terms()) bound += 2.0 * term.rate * term.op.squaredNorm();
    }
    // The RK4 stability region reaches 2.78 on the negative real axis and 2.83 on the imaginary one.
    return bound > 0.0 ? 2.5 / bound : std::numeric_limits<double>::infinity();
}

void Propagator::accept_state(const Eigen::VectorXcd& y, double t) {
    const Eigen::Index n = rho_.dim();
    const Eigen::Index n2 = n * n;
    ComplexMatrix rho = hermitian_part(Eigen::Map<const ComplexMatrix>(y.data(), n, n));

    const Eigensystem es = eigensystem(rho);
    const double lo = es.values.minCoeff();
    if (lo < tolerance::min_eigenvalue) {
        throw IntegrationFailure("positivity violation: eigenvalue " + format_double(lo), t);
    }
    if (lo < 0.0) {
        const RealVector clamped = es.values.cwiseMax(0.0);
        rho = es.vectors * clamped.cast<Complex>().asDiagonal() * es.vectors.adjoint();
        rho = hermitian_part(rho);
        ++traj_.diagnostics.positivity_clamps;
    }
    const double tr = rho.trace().real();
    const double drift = std::abs(tr - 1.0);
    if (lo >= 0.0) {
        if (drift >= tolerance::trace) throw IntegrationFailure("trace drift " + format_double(drift), t);
        traj_.diagnostics.max_trace_drift = std::max(traj_.diagnostics.max_trace_drift, drift);
    }
    rho /= tr;

    rho_ = DensityOperator(std::move(rho));
    work_ = y(n2).real();
    for (std::size_t b = 0; b < heat_.size(); ++b) heat_[b] = y(n2 + 1 + static_cast<Eigen::Index>(b)).real();
    t_ = t;
}

void Propagator::record_sample(const std::vector<std::size_t>& baths) {
    traj_.samples.push_back(Sample{t_, rho_, h_, baths, work_, heat_, charges_, {}});
}

void Propagator::annotate(const std::string& note) {
    if (traj_.samples.empty() || !same_time(traj_.samples.back().t, t_)) {
        const auto baths = traj_.samples.empty() ? std::vector<std::size_t>{} : traj_.samples.back().active_baths;
        record_sample(baths);
    }
    Sample& s = traj_.samples.back();
    s.rho = rho_;
    s.hamiltonian = h_;
    s.work = work_;
    s.heat = heat_;
    s.charges = charges_;
    if (!s.events.empty()) s.events += ';';
    s.events += note;
}

void Propagator::evolve(const Segment& seg) { evolve(seg, seg.t_end); }

void Propagator::evolve(const Segment& seg, double t_stop) {
    if (!seg.hamiltonian) throw ScheduleError("segment has no Hamiltonian");
    if (t_ < seg.t_start - time_eps(seg.t_start) || t_ > seg.t_end + time_eps(seg.t_end)) {
        throw ScheduleError("segment [" + format_double(seg.t_start) + ", " + format_double(seg.t_end) +
                            "] does not cover the current time " + format_double(t_));
    }
    if (t_stop > seg.t_end + time_eps(seg.t_end) || t_stop < t_ - time_eps(t_)) {
        throw ScheduleError("evolve: stop time outside the segment");
    }
    for (const std::size_t b : seg.baths) {
        if (b >= baths_.size()) throw ScheduleError("segment references unknown bath " + std::to_string(b));
    }
    const ComplexMatrix h_now = seg.hamiltonian(t_);
    if (!hamiltonians_match(h_now, h_.matrix())) {
        throw ScheduleError("discontinuous Hamiltonian at t = " + format_double(t_) + " without a quench event");
    }
    if (same_time(t_stop, t_)) return;

    Segment piece = seg;
    piece.t_start = t_;
    piece.t_end = t_stop;
    executed_segments_.push_back(piece);

    if (same_time(traj_.samples.back().t, t_)) traj_.samples.back().active_baths = seg.baths;

    if (seg.exact_unitary) {
        evolve_unitary(seg, t_stop);
        return;
    }

    const Eigen::Index n = rho_.dim();
    const Eigen::Index n2 = n * n;
    const auto nb = static_cast<Eigen::Index>(baths_.size());
    std::size_t since_sample = 0;

    while (!same_time(t_, t_stop)) {
        Eigen::VectorXcd y(n2 + 1 + nb);
        y.head(n2) = Eigen::Map<const Eigen::VectorXcd>(rho_.matrix().data(), n2);
        y(n2) = work_;
        for (Eigen::Index b = 0; b < nb; ++b) y(n2 + 1 + b) = heat_[static_cast<std::size_t>(b)];

        const double remaining = t_stop - t_;
        double h = std::min({step_, opts_.max_step, remaining, stability_step(seg, t_)});
        const bool last = h >= remaining - time_eps(t_stop);
        if (last) h = remaining;

        if (traj_.diagnostics.accepted + traj_.diagnostics.rejected >= opts_.max_steps) {
            throw IntegrationFailure("step budget of " + std::to_string(opts_.max_steps) + " exhausted (stiff generator?)", t_);
        }
        const Eigen::VectorXcd k1 = rhs(seg, t_, y);
        const Eigen::VectorXcd full = rk4(seg, t_, y, k1, h);
        const Eigen::VectorXcd mid = rk4(seg, t_, y, k1, 0.5 * h);
        const Eigen::VectorXcd half = rk4(seg, t_ + 0.5 * h, mid, rhs(seg, t_ + 0.5 * h, mid), 0.5 * h);
        const Eigen::VectorXcd diff = half - full;
        const double err = diff.cwiseAbs().maxCoeff() / 15.0;

        const double factor = err == 0.0 ? 4.0 : std::clamp(0.9 * std::pow(opts_.tol / err, 0.2), 0.2, 4.0);
        if (err <= opts_.tol) {
            accept_state(half + diff / 15.0, last ? t_stop : t_ + h);
            h_ = HermitianObservable(hermitian_part(seg.hamiltonian(t_)));
            traj_.diagnostics.accepted++;
            traj_.diagnostics.step_sizes.push_back(h);
            // A step shortened to land on t_stop says nothing about the natural step size.
            step_ = last ? std::max(step_, h * std::min(factor, 1.0)) : h * factor;
            if (!last && ++since_sample % opts_.sample_stride == 0) record_sample(seg.baths);
        } else {
            traj_.diagnostics.rejected++;
            step_ = h * factor;
            if (step_ < time_eps(t_) * 10.0) throw IntegrationFailure("step size underflow", t_);
        }
    }
    t_ = t_stop;
    h_ = HermitianObservable(hermitian_part(seg.hamiltonian(t_stop)));
    if (!same_time(traj_.samples.back().t, t_)) {
        record_sample(seg.baths);
    } else {
        traj_.samples.back().hamiltonian = h_;
    }
}

void Propagator::evolve_unitary(const Segment& seg, double t_stop) {
    if (!seg.baths.empty()) throw ScheduleError("exact unitary propagation requires no baths");
    if (!hamiltonians_match(seg.hamiltonian(t_stop), h_.matrix())) {
        throw ScheduleError("exact unitary propagation needs a static Hamiltonian");
    }
    const ComplexMatrix u = unitary_propagator(h_, t_stop - t_);
    rho_ = DensityOperator(hermitian_part(u * rho_.matrix() * u.adjoint()));
    t_ = t_stop;
    record_sample(seg.baths);
}

double Propagator::quench(const HermitianObservable& h_new, const std::string& label) {
    const QuenchResult q = apply_quench(rho_, h_, h_new);
    work_ += q.work;
    h_ = h_new;
    executed_events_.push_back({t_, Quench{h_new, label}});
    annotate(label + ":work=" + format_double(q.work));
    return q.work;
}

MeasurementRecord Propagator::measure(const Measure& spec) {
    if (spec.measurement.dim() != rho_.dim()) {
        throw DimensionMismatch("measure: observable dimension does not match the state");
    }
    if (spec.heat_bath >= baths_.size()) throw InvalidArgument("measure: heat bath index out of range");

    const double e_before = expectation(rho_.matrix(), h_.matrix());
    MeasurementRecord rec{t_, spec.label, spec.selective, 0, 0.0, 1.0, {}};
    if (spec.selective) {
        SelectiveOutcome out = measure_selective(rho_, spec.measurement, opts_.seed, draws_++);
        rec.outcome = out.outcome;
        rec.eigenvalue = out.eigenvalue;
        rec.probability = out.probability;
        rho_ = std::move(out.state);
    } else {
        rho_ = measure_nonselective(rho_, spec.measurement);
    }
    const double e_after = expectation(rho_.matrix(), h_.matrix());
    rec.booking = account_measurement(opts_.policy, spec.flag, e_after - e_before, spec.measurement.outcomes(),
                                      baths_[spec.heat_bath].beta, spec.heat_bath);
    heat_[spec.heat_bath] += rec.booking.heat;
    charges_ += rec.booking.work_charge;

    std::string note = spec.label;
    if (spec.selective) note += "[outcome=" + format_double(rec.eigenvalue) + "]";
    note += ":" + rec.booking.annotation;
    annotate(note);

    executed_events_.push_back({t_, spec});
    traj_.measurements.push_back(rec);
    return rec;
}

Schedule Propagator::executed_schedule() const {
    return Schedule{h_initial_, baths_, executed_segments_, executed_events_};
}

Trajectory integrate_mme(const DensityOperator& rho0, const Schedule& schedule, const IntegrationOptions& options) {
    schedule.validate();
    if (rho0.dim() != schedule.initial_hamiltonian.dim()) {
        throw DimensionMismatch("integrate_mme: initial state and Hamiltonian dimensions differ");
    }

    std::vector<const TimedEvent*> events;
    for (const auto& e : schedule.events) events.push_back(&e);
    std::stable_sort(events.begin(), events.end(),
                     [](const TimedEvent* a, const TimedEvent* b) { return a->time < b->time; });

    Propagator prop(rho0, schedule.initial_hamiltonian, schedule.baths, options, schedule.t_start());
    std::size_t next = 0;
    auto apply = [&](const TimedEvent& ev) {
        if (const auto* q = std::get_if<Quench>(&ev.event)) {
            prop.quench(q->hamiltonian, q->label);
        } else {
            prop.measure(std::get<Measure>(ev.event));
        }
    };

    for (const Segment& seg : schedule.segments) {
        while (next < events.size() && (events[next]->time <= seg.t_start || same_time(events[next]->time, seg.t_start))) {
            apply(*events[next++]);
        }
        while (next < events.size() && events[next]->time < seg.t_end && !same_time(events[next]->time, seg.t_end)) {
            prop.evolve(seg, events[next]->time);
            apply(*events[next++]);
        }
        prop.evolve(seg, seg.t_end);
    }
    while (next < events.size()) apply(*events[next++]);

    return prop.trajectory();
}

QuenchResult apply_quench(const DensityOperator& rho, const HermitianObservable& h_old,
                          const HermitianObservable& h_new) {
    if (h_old.dim() != h_new.dim() || rho.dim() != h_old.dim()) {
        throw DimensionMismatch("apply_quench: dimension mismatch");
    }
    return {rho, expectation(rho.matrix(), h_new.matrix() - h_old.matrix())};
}

} // namespace qthermo
