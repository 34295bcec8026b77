// SPDX-License-Identifier: Apache-2.0
#include "xtalk/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "xtalk/parallel.hpp"
#include "xtalk/rng.hpp"

namespace xtalk {

void TrialConfig::validate() const {
    if (n_trials < 1) throw Error(ErrorCode::InvalidParams, "n_trials must be >= 1");
    if (statistic == Statistic::Quantile && !(quantile > 0.0 && quantile < 1.0))
        throw Error(ErrorCode::InvalidParams, "quantile must lie in (0, 1)");
    spec.validate();
}

void CsiErrorModel::validate() const {
    if (n_samples < 1) throw Error(ErrorCode::InvalidParams, "n_samples must be positive");
}

const CurvePoint& TrialResult::at(int d_bits) const {
    for (const auto& pt : points)
        if (pt.d_bits == d_bits) return pt;
    throw Error(ErrorCode::InvalidParams, "no curve point at d = " + std::to_string(d_bits));
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Everything about a tone that does not depend on the trial.
struct ToneSetup {
    CMatrix q;                                // I + D^{-1} F
    std::vector<double> snr;                  // per selected user
    std::vector<std::vector<double>> weight;  // [u][j]: P_j / P_i, or 0 for an idle user
    std::vector<CMatrix> rounding_delta;      // [di], DeterministicRounding only
};

// One trial's random perturbation at one tone.
struct Draw {
    CMatrix delta0;  // Q U, or the rounding Delta is used instead
    CMatrix x;       // E1 (Q + E1)^{-1}; empty without CSI error
};

struct Cell {
    double max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    std::uint32_t arg = 0;
    std::uint32_t count = 0;
};

class Runner {
public:
    Runner(const ChannelEnsemble& e, const LinkBudget& b, const TrialConfig& c,
           const std::vector<int>& ds, const std::optional<CsiErrorModel>& csi)
        : ens_(e), budget_(b), cfg_(c), ds_(ds), csi_(csi) {
        cfg_.validate();
        if (csi_) csi_->validate();
        if (ds_.empty()) throw Error(ErrorCode::InvalidParams, "no word lengths requested");
        for (int d : ds_)
            if (d < 1 || d > 52) throw Error(ErrorCode::InvalidParams, "d_bits must lie in [1, 52]");
        p_ = ens_.users();
        budget_.validate(p_);
        if (ens_.snapshots.size() != ens_.grid.count())
            throw Error(ErrorCode::InvalidParams, "ensemble has the wrong number of tones");
        users_ = cfg_.users;
        if (users_.empty())
            for (int i = 0; i < p_; ++i) users_.push_back(i);
        for (int u : users_)
            if (u < 0 || u >= p_) throw Error(ErrorCode::InvalidParams, "user index out of range");
        setup_tones();
    }

    TrialResult run();

private:
    void setup_tones();
    Draw draw(std::size_t tone, std::uint32_t trial) const;
    ToneLoss evaluate(std::size_t tone, const Draw& dr, std::size_t u, std::size_t di) const;
    double rate(std::size_t tone, std::size_t u) const {
        return rate_from_snr(tones_[tone].snr[u], gap_);
    }

    const ChannelEnsemble& ens_;
    const LinkBudget& budget_;
    TrialConfig cfg_;
    std::vector<int> ds_;
    std::optional<CsiErrorModel> csi_;
    int p_ = 0;
    double gap_ = 1.0;
    std::vector<int> users_;
    std::vector<ToneSetup> tones_;
};

void Runner::setup_tones() {
    gap_ = budget_.gap();
    const bool rounding = cfg_.spec.e2_model == E2Model::DeterministicRounding && !cfg_.zero_errors;
    tones_.resize(ens_.snapshots.size());
    parallel_for(tones_.size(), [&](std::size_t k) {
        const auto& snap = ens_.snapshots[k];
        ToneSetup& t = tones_[k];
        t.q = snap.normalized();
        for (int i : users_) {
            t.snr.push_back(budget_.snr(snap, i, k));
            const double pi = budget_.psd_linear(i, k);
            std::vector<double> w(static_cast<std::size_t>(p_), 0.0);
            if (pi > 0.0)
                for (int j = 0; j < p_; ++j)
                    if (j != i) w[static_cast<std::size_t>(j)] = budget_.psd_linear(j, k) / pi;
            t.weight.push_back(std::move(w));
        }
        if (rounding) {
            const CMatrix pz = ideal_precoder(snap, k);
            for (int d : ds_) {
                PerturbationSpec s = cfg_.spec;
                s.d_bits = d;
                // A precoder scaled into [-1, 1] is undone by the receiver's
                // per-user gain, so the effective error is E2 / scale.
                const QuantizedPrecoder qz = quantize_precoder(pz, s, k, 0, true);
                t.rounding_delta.push_back(t.q * (qz.e2 / qz.scale));
            }
        }
    });
}

Draw Runner::draw(std::size_t tone, std::uint32_t trial) const {
    Draw dr;
    if (cfg_.zero_errors) {
        dr.delta0 = CMatrix::Zero(p_, p_);
        return dr;
    }
    const ToneSetup& t = tones_[tone];
    if (cfg_.spec.e2_model == E2Model::UniformRandom)
        dr.delta0 = t.q * draw_uniform_box(p_, 1.0, derive_key(cfg_.spec.seed, Stream::QuantizerDither,
                                                               {tone, trial}));
    if (csi_) {
        const Eigen::VectorXd snr = budget_.snr_vector(ens_.snapshots[tone], tone);
        for (std::uint64_t attempt = 0;; ++attempt) {
            const CMatrix e1 = draw_csi_error(
                snr, csi_->n_samples,
                derive_key(cfg_.spec.seed, Stream::EstimationError, {tone, trial, attempt}));
            try {
                dr.x = e1 * inverse_refined(t.q + e1, tone);
                break;
            } catch (const SingularChannel&) {
                if (attempt + 1 >= kCsiRetryCap) {
                    throw SingularChannel(tone, "perturbed channel singular after " +
                                                    std::to_string(kCsiRetryCap) + " redraws");
                }
            }
        }
    }
    return dr;
}

ToneLoss Runner::evaluate(std::size_t tone, const Draw& dr, std::size_t u, std::size_t di) const {
    const ToneSetup& t = tones_[tone];
    const int i = users_[u];
    const std::vector<double>& w = t.weight[u];
    // Row i of Delta = Q E2 - E1 (Q + E1)^{-1} with E2 = 2^{-d} U (exact scaling).
    auto entry = [&](int j) {
        cplx v = t.rounding_delta.empty() ? std::ldexp(1.0, -ds_[di]) * dr.delta0(i, j)
                                          : t.rounding_delta[di](i, j);
        if (dr.x.size() != 0) v -= dr.x(i, j);
        return v;
    };
    double s = 0.0;
    for (int j = 0; j < p_; ++j)
        if (j != i) s += w[static_cast<std::size_t>(j)] * std::norm(entry(j));
    return loss_from_terms(t.snr[u], gap_, s, entry(i));
}

std::string strip_code(const Error& e) {
    const std::string what = e.what();
    const std::size_t skip = to_string(e.code()).size() + 2;
    return what.size() >= skip ? what.substr(skip) : what;
}

// Nearest-rank position of quantile q among n sorted values.
std::size_t quantile_rank(double q, std::size_t n) {
    const auto r = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    return std::clamp<std::size_t>(r, 1, n) - 1;
}

TrialResult Runner::run() {
    const std::size_t nt = tones_.size(), nu = users_.size(), nd = ds_.size();
    const std::size_t cells = nt * nu * nd;
    auto cell_index = [&](std::size_t k, std::size_t u, std::size_t di) { return (k * nu + u) * nd + di; };
    const auto n = static_cast<std::size_t>(cfg_.n_trials);
    // Chunking depends on n_trials only, so the reduction order is fixed.
    const std::size_t chunk = std::max<std::size_t>(64, (n + 15) / 16);
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    const bool quantile = cfg_.statistic == Statistic::Quantile;

    std::vector<std::vector<Cell>> acc(n_chunks);
    std::vector<double> values(quantile ? cells * n : 0);  // [cell][trial]
    std::vector<double> band(n * nu * nd, 0.0);           // [trial][u][di]
    std::vector<std::string> failure(n);

    parallel_for(n_chunks, [&](std::size_t c) {
        std::vector<Cell>& mine = acc[c];
        mine.assign(cells, Cell{});
        std::vector<double> buf(cells);
        const std::size_t begin = c * chunk, end = std::min(n, begin + chunk);
        for (std::size_t trial = begin; trial < end; ++trial) {
            std::size_t k = 0;
            try {
                for (; k < nt; ++k) {
                    const Draw dr = draw(k, static_cast<std::uint32_t>(trial));
                    for (std::size_t u = 0; u < nu; ++u)
                        for (std::size_t di = 0; di < nd; ++di)
                            buf[cell_index(k, u, di)] = evaluate(k, dr, u, di).loss;
                }
            } catch (const Error& e) {
                std::ostringstream os;
                os << "trial " << trial << ", tone " << k << ": " << strip_code(e);
                if (!cfg_.skip_failures) throw Error(e.code(), os.str());
                failure[trial] = os.str();
                continue;
            }
            for (std::size_t k2 = 0; k2 < nt; ++k2)
                for (std::size_t u = 0; u < nu; ++u)
                    for (std::size_t di = 0; di < nd; ++di) {
                        const std::size_t ci = cell_index(k2, u, di);
                        const double v = buf[ci];
                        Cell& cell = mine[ci];
                        if (v > cell.max) {
                            cell.max = v;
                            cell.arg = static_cast<std::uint32_t>(trial);
                        }
                        cell.sum += v;
                        ++cell.count;
                        if (quantile) values[ci * n + trial] = v;
                        band[(trial * nu + u) * nd + di] += v * ens_.grid.spacing;
                    }
        }
    });

    TrialResult res;
    res.users = users_;
    std::vector<std::size_t> good;
    for (std::size_t t = 0; t < n; ++t) {
        if (failure[t].empty()) good.push_back(t);
        else res.skipped.push_back(failure[t]);
    }
    res.trials_used = good.size();
    if (good.empty()) throw Error(ErrorCode::NumericalError, "every trial failed: " + res.skipped.front());

    // Representative trial of every cell, then its full ToneLoss.
    std::vector<std::uint32_t> pick(cells, 0);
    std::vector<double> mean(cells, 0.0);
    for (std::size_t ci = 0; ci < cells; ++ci) {
        Cell total;
        for (const auto& a : acc) {
            const Cell& cc = a[ci];
            if (cc.count == 0) continue;
            if (cc.max > total.max) {
                total.max = cc.max;
                total.arg = cc.arg;
            }
            total.sum += cc.sum;
            total.count += cc.count;
        }
        mean[ci] = total.sum / total.count;
        pick[ci] = total.arg;
        if (quantile) {
            std::vector<std::pair<double, std::size_t>> v;
            v.reserve(good.size());
            for (std::size_t t : good) v.emplace_back(values[ci * n + t], t);
            const auto nth = v.begin() + static_cast<std::ptrdiff_t>(quantile_rank(cfg_.quantile, v.size()));
            std::nth_element(v.begin(), nth, v.end());
            pick[ci] = static_cast<std::uint32_t>(nth->second);
        }
    }

    res.points.resize(nd);
    for (std::size_t di = 0; di < nd; ++di) {
        res.points[di].d_bits = ds_[di];
        res.points[di].report.per_tone.assign(nu, std::vector<ToneLoss>(nt));
    }
    parallel_for(nt, [&](std::size_t k) {
        for (std::size_t u = 0; u < nu; ++u)
            for (std::size_t di = 0; di < nd; ++di) {
                const std::size_t ci = cell_index(k, u, di);
                ToneLoss tl;
                if (cfg_.statistic == Statistic::Mean) {
                    tl.rate = rate(k, u);
                    tl.loss = mean[ci];
                    tl.rate_perturbed = tl.rate - tl.loss;
                    tl.a = tl.q = tl.k = tl.delta_norm = kNaN;
                } else {
                    tl = evaluate(k, draw(k, pick[ci]), u, di);
                }
                res.points[di].report.per_tone[u][k] = tl;
            }
    });

    for (std::size_t di = 0; di < nd; ++di) {
        CurvePoint& pt = res.points[di];
        for (std::size_t u = 0; u < nu; ++u) {
            pt.report.band.push_back(integrate(pt.report.per_tone[u], ens_.grid.spacing));
            std::vector<double> v;
            v.reserve(good.size());
            for (std::size_t t : good) v.push_back(band[(t * nu + u) * nd + di]);
            BandLoss b;
            b.rate = pt.report.band.back().rate;
            switch (cfg_.statistic) {
                case Statistic::WorstCase:
                    b.loss = *std::max_element(v.begin(), v.end());
                    break;
                case Statistic::Mean: {
                    double s = 0.0;
                    for (double x : v) s += x;
                    b.loss = s / static_cast<double>(v.size());
                    break;
                }
                case Statistic::Quantile: {
                    const auto nth = v.begin() + static_cast<std::ptrdiff_t>(quantile_rank(cfg_.quantile, v.size()));
                    std::nth_element(v.begin(), nth, v.end());
                    b.loss = *nth;
                    break;
                }
            }
            if (b.rate > 0.0) b.eta = b.loss / b.rate;
            pt.band_trials.push_back(b);
        }
    }
    return res;
}

}  // namespace

TrialResult run_trial_curve(const ChannelEnsemble& ensemble, const LinkBudget& budget,
                            const TrialConfig& config, const std::vector<int>& d_values,
                            const std::optional<CsiErrorModel>& csi) {
    return Runner(ensemble, budget, config, d_values, csi).run();
}

TrialResult run_trials(const ChannelEnsemble& ensemble, const LinkBudget& budget,
                       const TrialConfig& config) {
    return run_trial_curve(ensemble, budget, config, {config.spec.d_bits});
}

TrialResult run_trials_with_csi_error(const ChannelEnsemble& ensemble, const LinkBudget& budget,
                                      const TrialConfig& config, const CsiErrorModel& csi) {
    return run_trial_curve(ensemble, budget, config, {config.spec.d_bits}, csi);
}

double worst_relative_loss(const CurvePoint& point) {
    std::optional<double> worst;
    for (const auto& b : point.report.band)
        if (b.eta) worst = std::max(worst.value_or(-std::numeric_limits<double>::infinity()), *b.eta);
    if (!worst) throw Error(ErrorCode::RelativeLossUndefined, "every selected user has zero rate");
    return *worst;
}

int min_bits_empirical(const ChannelEnsemble& ensemble, const LinkBudget& budget,
                       const TrialConfig& config, double target_eta) {
    if (!(target_eta > 0.0 && target_eta <= 1.0))
        throw Error(ErrorCode::InvalidParams, "target_eta must lie in (0, 1]");
    std::vector<int> ds;
    for (int d = 1; d <= kMaxEmpiricalBits; ++d) ds.push_back(d);
    const TrialResult res = run_trial_curve(ensemble, budget, config, ds);
    int best = 0;
    for (int d = kMaxEmpiricalBits; d >= 1; --d) {
        if (!(worst_relative_loss(res.at(d)) <= target_eta)) break;
        best = d;
    }
    if (best == 0) {
        std::ostringstream os;
        os << "relative loss " << worst_relative_loss(res.at(kMaxEmpiricalBits)) << " > target "
           << target_eta << " at d = " << kMaxEmpiricalBits;
        throw Error(ErrorCode::TargetUnreachable, os.str());
    }
    return best;
}

}  // namespace xtalk
