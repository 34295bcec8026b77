// SPDX-License-Identifier: Apache-2.0
#include "xtalk/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "xtalk/parallel.hpp"
#include "xtalk/rng.hpp"

namespace xtalk {

namespace {

void require_finite(double v, const char* name) {
    if (!std::isfinite(v))
        throw Error(ErrorCode::InvalidParams, std::string(name) + " must be finite");
}

double draw_phase(PhaseMode mode, std::uint64_t key) {
    if (mode == PhaseMode::Zero) return 0.0;
    CounterStream rng(key);
    return 2.0 * std::numbers::pi * rng.uniform01();
}

}  // namespace

void ToneGrid::validate() const {
    require_finite(f_start, "f_start");
    require_finite(f_end, "f_end");
    require_finite(spacing, "spacing");
    if (f_start < 0.0) throw Error(ErrorCode::InvalidParams, "f_start must be >= 0");
    if (!(f_end > f_start)) throw Error(ErrorCode::InvalidParams, "f_end must exceed f_start");
    if (!(spacing > 0.0)) throw Error(ErrorCode::InvalidParams, "spacing must be positive");
}

std::size_t ToneGrid::count() const {
    const double q = (f_end - f_start) / spacing;
    // Absorb the roundoff of spacings computed as (f_end - f_start) / (n - 1).
    return static_cast<std::size_t>(std::floor(q + 1e-9 * std::max(1.0, q))) + 1;
}

ToneGrid ToneGrid::decimated(std::size_t factor) const {
    if (factor == 0) throw Error(ErrorCode::InvalidParams, "decimation factor must be >= 1");
    ToneGrid g = *this;
    g.spacing = spacing * static_cast<double>(factor);
    return g;
}

ToneGrid ToneGrid::with_count(double f_start, double f_end, std::size_t n) {
    if (n == 0) throw Error(ErrorCode::InvalidParams, "tone count must be >= 1");
    if (n == 1) return single(f_start, f_end > f_start ? f_end - f_start : kDmtToneSpacing);
    ToneGrid g{f_start, f_end, (f_end - f_start) / static_cast<double>(n - 1)};
    g.validate();
    return g;
}

ToneGrid ToneGrid::single(double f, double bin_width) {
    // f_end sits inside the first bin so count() == 1.
    ToneGrid g{f, f + 0.5 * bin_width, bin_width};
    g.validate();
    return g;
}

WernerParams WernerParams::from_aggregate(double alpha_ell, double loop_length_m, int p) {
    WernerParams w;
    w.loop_length_m = loop_length_m;
    w.alpha = alpha_ell / loop_length_m;
    w.p = p;
    w.validate();
    return w;
}

void WernerParams::validate() const {
    require_finite(alpha, "alpha");
    require_finite(loop_length_m, "loop_length_m");
    require_finite(k_mean_slope, "k_mean_slope");
    require_finite(k_sigma_log, "k_sigma_log");
    if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidParams, "alpha must be positive");
    if (!(loop_length_m > 0.0))
        throw Error(ErrorCode::InvalidParams, "loop_length_m must be positive");
    if (k_mean_slope < 0.0) throw Error(ErrorCode::InvalidParams, "k_mean_slope must be >= 0");
    if (k_sigma_log < 0.0) throw Error(ErrorCode::InvalidParams, "k_sigma_log must be >= 0");
    if (p < 2) throw Error(ErrorCode::InvalidParams, "p must be >= 2");
}

double calibrate_k_mean_slope(int p, double k_sigma_log, double loop_length_m, double f_ref,
                              double target_r) {
    if (p < 2 || !(loop_length_m > 0.0) || !(f_ref > 0.0) || !(target_r > 0.0) ||
        k_sigma_log < 0.0)
        throw Error(ErrorCode::InvalidParams, "calibrate_k_mean_slope: invalid arguments");
    // For log-normal K with mean m and log-std s: E[sqrt K] = sqrt(m) exp(-s^2 / 8).
    const double sqrt_mean = target_r / ((p - 1) * f_ref * std::exp(-k_sigma_log * k_sigma_log / 8.0));
    return sqrt_mean * sqrt_mean / loop_length_m;
}

double row_dominance(const CMatrix& h) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        const double diag = std::abs(h(i, i));
        if (!(diag > 0.0)) throw Error(ErrorCode::SingularDiagonal, "zero diagonal entry");
        double off = 0.0;
        for (Eigen::Index j = 0; j < h.cols(); ++j)
            if (j != i) off += std::abs(h(i, j));
        worst = std::max(worst, off / diag);
    }
    return worst;
}

ChannelSnapshot ChannelSnapshot::from_matrix(double freq, CMatrix h, std::size_t tone) {
    if (h.rows() != h.cols() || h.rows() < 1)
        throw Error(ErrorCode::InvalidParams, "channel matrix must be square and nonempty");
    if (!h.allFinite()) throw Error(ErrorCode::InvalidParams, "non-finite channel entry");
    ChannelSnapshot s;
    s.freq = freq;
    s.d = h.diagonal();
    for (Eigen::Index i = 0; i < s.d.size(); ++i) {
        if (s.d(i) == cplx(0.0, 0.0)) {
            std::ostringstream os;
            os << "|H_" << i << i << "| = 0 at tone " << tone;
            throw Error(ErrorCode::SingularDiagonal, os.str());
        }
    }
    s.f = h;
    s.f.diagonal().setZero();
    s.h = std::move(h);
    s.r = row_dominance(s.h);
    return s;
}

CMatrix ChannelSnapshot::normalized() const {
    CMatrix q = d.cwiseInverse().asDiagonal() * f;
    q.diagonal().array() += 1.0;
    return q;
}

double ChannelEnsemble::r_max() const {
    double r = 0.0;
    for (const auto& s : snapshots) r = std::max(r, s.r);
    return r;
}

ChannelEnsemble synthesize_channel(const WernerParams& params, const ToneGrid& grid,
                                   std::uint64_t seed, const SynthesisOptions& options) {
    params.validate();
    grid.validate();
    require_finite(options.dominance_ceiling, "dominance_ceiling");

    const int p = params.p;
    const std::size_t n = grid.count();
    const double alpha_ell = params.alpha_ell();

    // Frequency-flat coupling: one log-normal K per ordered pair.
    const double k_mean = params.k_mean_slope * params.loop_length_m;
    const double s = params.k_sigma_log;
    Eigen::MatrixXd sqrt_k = Eigen::MatrixXd::Zero(p, p);
    if (k_mean > 0.0) {
        const double mu = std::log(k_mean) - 0.5 * s * s;
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j) {
                if (i == j) continue;
                CounterStream rng(derive_key(seed, Stream::FextCoupling,
                                             {static_cast<std::uint64_t>(i),
                                              static_cast<std::uint64_t>(j)}));
                std::normal_distribution<double> z(0.0, 1.0);
                sqrt_k(i, j) = std::sqrt(std::exp(mu + s * z(rng)));
            }
    }

    ChannelEnsemble ens;
    ens.grid = grid;
    ens.source = SynthesizedSource{params, seed, options};
    ens.snapshots.resize(n);

    parallel_for(n, [&](std::size_t k) {
        const double f = grid.freq(k);
        const double il = std::exp(-alpha_ell * std::sqrt(f));
        CMatrix h(p, p);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j) {
                const auto key = [&](Stream st) {
                    return derive_key(seed, st,
                                      {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(i),
                                       static_cast<std::uint64_t>(j)});
                };
                if (i == j) {
                    h(i, j) = std::polar(il, draw_phase(options.diagonal_phase,
                                                        key(Stream::DiagonalPhase)));
                } else {
                    h(i, j) = std::polar(sqrt_k(i, j) * f * il,
                                         draw_phase(options.offdiagonal_phase,
                                                    key(Stream::OffDiagonalPhase)));
                }
            }
        ens.snapshots[k] = ChannelSnapshot::from_matrix(f, std::move(h), k);
    });

    for (std::size_t k = 0; k < n; ++k) {
        const double r = ens.snapshots[k].r;
        if (r > options.dominance_ceiling) {
            std::ostringstream os;
            os << "r(H) = " << r << " exceeds ceiling " << options.dominance_ceiling
               << " from tone " << k << " (f = " << grid.freq(k) << " Hz)";
            if (options.dominance_policy == DominancePolicy::Fail)
                throw Error(ErrorCode::DominanceViolation, os.str());
            ens.warnings.push_back("DominanceViolation: " + os.str());
            break;
        }
    }
    return ens;
}

RowDominanceFit fit_row_dominance(const ChannelEnsemble& ensemble) {
    const std::size_t n = ensemble.snapshots.size();
    if (n < 2) throw Error(ErrorCode::InsufficientData, "row-dominance fit needs >= 2 tones");

    double fm = 0.0, rm = 0.0;
    for (const auto& s : ensemble.snapshots) {
        fm += s.freq;
        rm += s.r;
    }
    fm /= static_cast<double>(n);
    rm /= static_cast<double>(n);
    double sff = 0.0, sfr = 0.0;
    for (const auto& s : ensemble.snapshots) {
        sff += (s.freq - fm) * (s.freq - fm);
        sfr += (s.freq - fm) * (s.r - rm);
    }
    if (!(sff > 0.0))
        throw Error(ErrorCode::InsufficientData, "row-dominance fit needs distinct frequencies");

    RowDominanceFit fit;
    fit.gamma2 = sfr / sff;
    fit.gamma1 = rm - fit.gamma2 * fm;
    // An exact line through the origin leaves a rounding-level intercept; its
    // sign would otherwise decide nonnegativity.
    const double r_scale = std::max(1.0, ensemble.r_max());
    if (std::abs(fit.gamma1) <= 1e-12 * r_scale) fit.gamma1 = 0.0;
    for (const auto& s : ensemble.snapshots) {
        const double line = fit.gamma1 + fit.gamma2 * s.freq;
        fit.max_residual = std::max(fit.max_residual, std::abs(s.r - line));
        if (line < -1e-12 * r_scale) fit.nonnegative = false;
    }
    return fit;
}

double fit_alpha(const ChannelEnsemble& ensemble) {
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < ensemble.snapshots.size(); ++k) {
        const auto& s = ensemble.snapshots[k];
        const double x = std::sqrt(s.freq);
        for (Eigen::Index i = 0; i < s.d.size(); ++i) {
            const double mag = std::abs(s.d(i));
            if (!(mag > 0.0)) {
                std::ostringstream os;
                os << "|H_" << i << i << "| = 0 at tone " << k;
                throw Error(ErrorCode::SingularDiagonal, os.str());
            }
            sxy += x * -std::log(mag);
            sxx += x * x;
        }
    }
    if (!(sxx > 0.0)) throw Error(ErrorCode::InsufficientData, "alpha fit needs a tone with f > 0");
    return sxy / sxx;
}

}  // namespace xtalk
