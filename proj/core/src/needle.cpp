#include "qthermo/needle.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qthermo/errors.hpp"

namespace qthermo {

namespace {

constexpr double kWorkTolerance = 1e-9;
constexpr double kResetTolerance = 1e-6;
constexpr unsigned kMaxDepth = 15;
// Finite-difference gradients carry ~1e-13 relative noise; a tighter target never converges.
constexpr double kRelTolerance = 1e-12;

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 61>;

double finite_or_throw(double x, const char* what, double z) {
    if (!std::isfinite(x)) {
        std::ostringstream os;
        os << what << " is not finite at z = " << z;
        throw InvalidArgument(os.str());
    }
    return x;
}

template <class F>
double integrate(F&& f, double a, double b, double abs_tol) {
    double error = 0.0;
    double l1 = 0.0;
    const double value = Kronrod::integrate(f, a, b, kMaxDepth, kRelTolerance, &error, &l1);
    if (!std::isfinite(value) || error > abs_tol) {
        std::ostringstream os;
        os << "Gauss-Kronrod error estimate " << error << " exceeds " << abs_tol;
        throw QuadratureFailure(os.str());
    }
    return value;
}

/// Unnormalised weight e^{a (cos phi - 1)}; bounded by 1 for a >= 0.
double weight(double a, double phi) {
    return std::exp(std::abs(a) * (std::cos(phi) - 1.0));
}

} // namespace

double FieldProfile::B(double z) const {
    if (!field) throw InvalidArgument("field profile has no B(z)");
    return finite_or_throw(field(z), "B(z)", z);
}

double FieldProfile::dB(double z) const {
    if (gradient) return finite_or_throw(gradient(z), "B'(z)", z);
    // Five-point stencil: O(h^4) truncation, roundoff ~ eps / h.
    const double h = 1e-3 * width;
    const double d = (8.0 * (B(z + h) - B(z - h)) - (B(z + 2.0 * h) - B(z - 2.0 * h))) / (12.0 * h);
    return finite_or_throw(d, "B'(z)", z);
}

FieldProfile FieldProfile::gaussian(double b_max, double width) {
    if (!(width > 0.0) || !std::isfinite(width) || !std::isfinite(b_max)) {
        throw InvalidArgument("gaussian profile needs a finite amplitude and a positive width");
    }
    FieldProfile p;
    p.width = width;
    p.field = [b_max, width](double z) { return b_max * std::exp(-(z * z) / (width * width)); };
    p.gradient = [b_max, width](double z) {
        return -2.0 * z / (width * width) * b_max * std::exp(-(z * z) / (width * width));
    };
    return p;
}

void NeedleConfig::validate() const {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidArgument("needle: mu must be positive");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("needle: beta must be positive");
    if (!std::isfinite(z0) || !std::isfinite(z_m)) throw InvalidArgument("needle: path end points must be finite");
    if (n_phi < 8) throw InvalidArgument("needle: n_phi must be at least 8");
    if (n_z < 2) throw InvalidArgument("needle: n_z must be at least 2");
    if (sign != 1 && sign != -1) throw InvalidArgument("needle: sign must be +1 or -1");
    if (!profile.field) throw InvalidArgument("needle: missing field profile");
    if (!(profile.width > 0.0)) throw InvalidArgument("needle: profile width must be positive");
}

double NeedleConfig::coupling(double z) const { return sign * mu * profile.B(z) * beta; }

std::vector<std::string> NeedleConfig::warnings() const {
    std::vector<std::string> w;
    const double a0 = std::abs(coupling(z0));
    const double am = std::abs(coupling(z_m));
    if (a0 > 0.01) {
        std::ostringstream os;
        os << "mu*B(z0)*beta = " << a0 << " exceeds 0.01; the needle is not released at z0";
        w.push_back(os.str());
    }
    if (am < 10.0) {
        std::ostringstream os;
        os << "mu*B(z_m)*beta = " << am << " is below 10; the reading is unreliable";
        w.push_back(os.str());
    }
    return w;
}

double thermodynamic_force(double z, const NeedleConfig& cfg) {
    const double a = cfg.coupling(z);
    const double grad = cfg.sign * cfg.profile.dB(z);
    const double dphi = 2.0 * std::numbers::pi / cfg.n_phi;
    double norm = 0.0;
    double mean_cos = 0.0;
    for (int k = 0; k < cfg.n_phi; ++k) {
        const double phi = k * dphi;
        // The weight is symmetric in a -> -a, phi -> phi + pi; evaluate for |a| and fix the sign of <cos>.
        const double w = weight(a, phi);
        norm += w;
        mean_cos += w * std::cos(phi);
    }
    mean_cos /= norm;
    if (a < 0.0) mean_cos = -mean_cos;
    return -cfg.mu * grad * mean_cos;
}

double quasi_static_work(double z1, double z2, const NeedleConfig& cfg) {
    cfg.validate();
    if (z1 == z2) return 0.0;
    return integrate([&cfg](double z) { return thermodynamic_force(z, cfg); }, z1, z2, kWorkTolerance);
}

double alignment_probability(double z, const NeedleConfig& cfg) {
    cfg.validate();
    // weight() depends on |a| only, so phi = 0 is the direction of the effective field sign * B.
    const double a = cfg.coupling(z);
    auto p = [a](double phi) { return weight(a, phi); };
    const double pi = std::numbers::pi;
    return integrate(p, -pi / 2.0, pi / 2.0, 1e-12) / integrate(p, -pi, pi, 1e-12);
}

double uniform_total_variation(double z, const NeedleConfig& cfg) {
    cfg.validate();
    const double a = cfg.coupling(z);
    const double dphi = 2.0 * std::numbers::pi / cfg.n_phi;
    double norm = 0.0;
    std::vector<double> w(static_cast<std::size_t>(cfg.n_phi));
    for (int k = 0; k < cfg.n_phi; ++k) {
        w[static_cast<std::size_t>(k)] = weight(a, k * dphi);
        norm += w[static_cast<std::size_t>(k)] * dphi;
    }
    const double uniform = 1.0 / (2.0 * std::numbers::pi);
    double tv = 0.0;
    for (const double wk : w) tv += std::abs(wk / norm - uniform) * dphi;
    return 0.5 * tv;
}

NeedleCycleReport run_needle_cycle(const NeedleConfig& cfg) {
    cfg.validate();
    NeedleCycleReport r;
    r.warnings = cfg.warnings();
    r.forward_work = quasi_static_work(cfg.z0, cfg.z_m, cfg);
    r.return_work = quasi_static_work(cfg.z_m, cfg.z0, cfg);
    r.net_work = r.forward_work + r.return_work;
    r.alignment_probability = alignment_probability(cfg.z_m, cfg);
    r.reset_total_variation = uniform_total_variation(cfg.z0, cfg);
    r.reset_ok = r.reset_total_variation <= kResetTolerance;
    return r;
}

std::vector<std::pair<double, double>> force_profile(const NeedleConfig& cfg) {
    cfg.validate();
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(cfg.n_z));
    for (int i = 0; i < cfg.n_z; ++i) {
        const double z = cfg.z0 + (cfg.z_m - cfg.z0) * i / (cfg.n_z - 1);
        out.emplace_back(z, thermodynamic_force(z, cfg));
    }
    return out;
}

} // namespace qthermo
