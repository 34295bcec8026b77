// SPDX-License-Identifier: Apache-2.0
#include "xtalk/analytic_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace xtalk {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kSqrt2 = std::numbers::sqrt2;

double log2_1p(double x) { return std::log1p(x) / kLn2; }

void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) throw Error(code, what);
}

void check_floor(double d, double r) {
    const double floor = main_bound_floor(r);
    if (d < floor) {
        std::ostringstream os;
        os << "d = " << d << " is below the admissible minimum 1/2 + log2(1 + " << r << ") = " << floor;
        throw BitDepthTooSmall(static_cast<int>(std::ceil(floor)), os.str());
    }
}

// -2 log2(1 - z), +inf at z = 1.
double edge_term(double z) {
    if (z >= 1.0) return std::numeric_limits<double>::infinity();
    return -2.0 * std::log1p(-z) / kLn2;
}

}  // namespace

void BoundInputs::validate() const {
    const bool finite = std::isfinite(r) && std::isfinite(d) && std::isfinite(snr) && std::isfinite(rho) &&
                        std::isfinite(m_ratio) && std::isfinite(t);
    require(finite, ErrorCode::InvalidParams, "bound inputs must be finite");
    require(p >= 2, ErrorCode::InvalidParams, "p must be >= 2");
    require(r >= 0.0, ErrorCode::InvalidParams, "r must be >= 0");
    require(snr >= 0.0, ErrorCode::InvalidParams, "SNR must be >= 0");
    require(rho >= 1.0, ErrorCode::InvalidParams, "rho must be >= 1");
    require(m_ratio >= 0.0, ErrorCode::InvalidParams, "M must be >= 0");
    require(t >= 0.0, ErrorCode::InvalidParams, "t must be >= 0");
}

double bound_general_per_tone(const BoundInputs& in) {
    in.validate();
    require(in.t < 1.0, ErrorCode::BoundInapplicable, "general bound needs max |Delta_ij| < 1");
    return log2_1p((in.p - 1) * in.m_ratio * in.t * in.t * in.snr) + edge_term(in.t);
}

double main_bound_floor(double r) { return 0.5 + std::log2(1.0 + r); }

double gamma_coefficient(int p, double r, double d, double rho) {
    return 2.0 * rho * (p - 1) * (1.0 + r) * (1.0 + r) * std::exp2(-2.0 * d);
}

double bound_main_per_tone(const BoundInputs& in) {
    in.validate();
    check_floor(in.d, in.r);
    const double gamma = gamma_coefficient(in.p, in.r, in.d, in.rho);
    const double v = kSqrt2 * (1.0 + in.r);
    return log2_1p(gamma * in.snr) + edge_term(v * std::exp2(-in.d));
}

double bound_main_band(const BandBoundInputs& in) {
    BoundInputs probe{in.p, in.r_max, in.d, 0.0, in.rho};
    probe.validate();
    require(in.spacing > 0.0 && std::isfinite(in.spacing), ErrorCode::InvalidParams, "spacing must be positive");
    check_floor(in.d, in.r_max);
    const double gamma = gamma_coefficient(in.p, in.r_max, in.d, in.rho);
    double sum = 0.0;
    for (double s : in.snr) {
        require(s >= 0.0 && std::isfinite(s), ErrorCode::InvalidParams, "SNR must be finite and >= 0");
        sum += log2_1p(gamma * s);
    }
    const double width = static_cast<double>(in.snr.size()) * in.spacing;
    return sum * in.spacing + width * edge_term((1.0 + in.r_max) * std::exp2(-in.d + 0.5));
}

double bound_simplified_per_tone(const BoundInputs& in) {
    in.validate();
    require(in.r <= 1.0, ErrorCode::BoundInapplicable, "simplified bound needs r <= 1");
    require(kSqrt2 * (1.0 + in.r) * std::exp2(-in.d) <= 0.5, ErrorCode::BoundInapplicable,
            "simplified bound needs sqrt2 (1 + r) 2^-d <= 1/2");
    return std::exp2(-in.d + 3.5) + log2_1p(8.0 * (in.p - 1) * in.snr * std::exp2(-2.0 * in.d));
}

double bound_asymptotic_coefficient(double r_max, double band) {
    require(r_max >= 0.0 && band >= 0.0, ErrorCode::InvalidParams, "r_max and band must be >= 0");
    return 2.0 * kSqrt2 * (1.0 + r_max) * band / kLn2;
}

double rho_ell(double gamma1, double gamma2, double decay) {
    const double g = gamma2 / (decay * decay);
    return (1.0 + gamma1) * (1.0 + gamma1) + 12.0 * (1.0 + gamma1) * g + 240.0 * g * g;
}

WernerBoundParams& WernerBoundParams::derive() {
    require(std::isfinite(alpha_ell) && alpha_ell > 0.0, ErrorCode::InvalidParams, "alpha_ell must be positive");
    require(std::isfinite(gamma1) && gamma1 >= 0.0, ErrorCode::InvalidParams, "gamma1 must be >= 0");
    require(std::isfinite(gamma2) && gamma2 >= 0.0, ErrorCode::InvalidParams, "gamma2 must be >= 0");
    require(p >= 2, ErrorCode::InvalidParams, "p must be >= 2");
    require(std::isfinite(snr0) && snr0 > 0.0, ErrorCode::InvalidParams, "snr0 must be positive");
    require(std::isfinite(band) && band > 0.0, ErrorCode::InvalidParams, "band must be positive");
    require(std::isfinite(gap) && gap >= 1.0, ErrorCode::InvalidParams, "gap must be >= 1");
    const double a = decay();
    rho_ell = xtalk::rho_ell(gamma1, gamma2, a);
    xi_ell = 4.0 / kLn2 * (p - 1) * snr0 / (a * a * band) * rho_ell;
    c = spectral_floor(snr0, gap, a, band);
    zeta_ell = c > 0.0 ? xi_ell / c : std::numeric_limits<double>::quiet_NaN();
    return *this;
}

WernerBoundParams make_werner_bound_params(double alpha_ell, const RowDominanceFit& fit, int p,
                                           const LinkBudget& budget, double band) {
    WernerBoundParams w;
    w.alpha_ell = alpha_ell;
    w.gamma1 = std::max(0.0, fit.gamma1);
    w.gamma2 = std::max(0.0, fit.gamma2);
    w.p = p;
    w.snr0 = budget.psd_linear(0, 0) / budget.noise_linear();
    w.band = band;
    w.gap = budget.gap();
    w.derive();
    return w;
}

double bound_werner_decay(const WernerBoundParams& w, double d) {
    require(w.alpha_ell > 0.0, ErrorCode::InvalidParams, "alpha_ell must be positive");
    return w.xi_ell * std::exp2(-2.0 * d) + std::exp2(-d + 3.5);
}

double spectral_floor_from_edges(double snr_low_over_gap, double snr_high_over_gap) {
    return std::log2(snr_low_over_gap) / 3.0 + 2.0 * std::log2(snr_high_over_gap) / 3.0;
}

double spectral_floor(double snr0, double gap, double decay, double band) {
    const double high = snr0 * std::exp(-decay * std::sqrt(band));
    return spectral_floor_from_edges(snr0 / gap, high / gap);
}

double spectral_floor_direct(double snr0, double gap, double decay, double band) {
    return std::log2(snr0 / gap) - 2.0 / 3.0 * decay * std::sqrt(band) * std::numbers::log2e;
}

double spectral_efficiency_floor(const LinkBudget& budget, double alpha_ell, int user) {
    require(alpha_ell >= 0.0, ErrorCode::InvalidParams, "alpha_ell must be >= 0");
    const double snr0 = budget.psd_linear(user, 0) / budget.noise_linear();
    const double c = spectral_floor(snr0, budget.gap(), 2.0 * alpha_ell, budget.grid.f_end);
    if (!(c > 0.0)) {
        std::ostringstream os;
        os << "spectral-efficiency floor c = " << c << " is not positive";
        throw Error(ErrorCode::FloorNonpositive, os.str());
    }
    return c;
}

double bound_relative(const WernerBoundParams& w, double d) {
    if (!(w.c > 0.0)) {
        std::ostringstream os;
        os << "spectral-efficiency floor c = " << w.c << " is not positive";
        throw Error(ErrorCode::FloorNonpositive, os.str());
    }
    return w.zeta_ell * std::exp2(-2.0 * d) + std::exp2(-d + 3.5) / w.c;
}

double j_integral_peak(double a, double b, double alpha, double band, double snr0) {
    // With s = sqrt x, h(s) = (a + b s^2)^2 exp(-alpha s); h'(s) = 0 reduces to
    // alpha b s^2 - 4 b s + alpha a = 0.
    const double s_max = std::sqrt(band);
    auto h = [&](double s) {
        const double u = a + b * s * s;
        return u * u * std::exp(-alpha * s);
    };
    double best = std::max(h(0.0), h(s_max));
    if (b > 0.0) {
        const double disc = 16.0 * b * b - 4.0 * alpha * alpha * a * b;
        if (disc >= 0.0) {
            const double root = std::sqrt(disc);
            for (double s : {(4.0 * b - root) / (2.0 * alpha * b), (4.0 * b + root) / (2.0 * alpha * b)})
                if (s > 0.0 && s < s_max) best = std::max(best, h(s));
        }
    } else {
        // Degenerate quadratic: golden-section search on [0, sqrt B].
        const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double lo = 0.0, hi = s_max;
        for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + s_max); ++it) {
            const double m1 = hi - phi * (hi - lo), m2 = lo + phi * (hi - lo);
            if (h(m1) < h(m2)) lo = m1;
            else hi = m2;
        }
        best = std::max(best, h(0.5 * (lo + hi)));
    }
    return snr0 * best;
}

double j_integral_bound(double a, double b, double alpha, double band, double snr0, double mu) {
    require(std::isfinite(alpha) && alpha > 0.0, ErrorCode::InvalidParams, "alpha must be positive");
    require(a >= 1.0 && b >= 0.0 && mu >= 0.0, ErrorCode::InvalidParams, "need a >= 1, b >= 0, mu >= 0");
    require(band > 0.0 && snr0 > 0.0, ErrorCode::InvalidParams, "band and snr0 must be positive");
    const double a2 = alpha * alpha;
    const double fb = snr0 * std::exp(-alpha * std::sqrt(band));
    const double poly = 2.0 * a * a + 24.0 * a * b / a2 + 240.0 * (b / a2) * (b / a2);
    const double integral_form = std::exp(alpha * std::sqrt(band)) / (a2 * band) * poly * log2_1p(mu * fb);
    const double peak_form = log2_1p(j_integral_peak(a, b, alpha, band, snr0) * mu);
    return std::min(integral_form, peak_form);
}

double main_bound_at_tone(const LinkBudget& budget, const ChannelSnapshot& snapshot, int user,
                          std::size_t tone, double d) {
    const int p = snapshot.users();
    BoundInputs in;
    in.p = p;
    in.r = snapshot.r;
    in.d = d;
    in.snr = budget.snr(snapshot, user, tone);
    in.rho = std::max(1.0, budget.max_psd_ratio(p, user, tone));
    return bound_main_per_tone(in);
}

double main_bound_band(const LinkBudget& budget, const ChannelEnsemble& ensemble, int user, double d) {
    BandBoundInputs in;
    in.p = ensemble.users();
    in.r_max = ensemble.r_max();
    in.d = d;
    in.spacing = ensemble.grid.spacing;
    for (std::size_t k = 0; k < ensemble.snapshots.size(); ++k) {
        in.snr.push_back(budget.snr(ensemble.snapshots[k], user, k));
        in.rho = std::max(in.rho, budget.max_psd_ratio(in.p, user, k));
    }
    return bound_main_band(in);
}

}  // namespace xtalk
