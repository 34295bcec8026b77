// SPDX-License-Identifier: Apache-2.0
#include "xtalk/rate_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace xtalk {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

void LinkBudget::validate(int users) const {
    if (!std::isfinite(gamma_gap_db) || gamma_gap_db < 0.0)
        throw Error(ErrorCode::InvalidBudget, "gamma_gap_db must be finite and >= 0");
    if (!std::isfinite(noise_psd_dbm_hz) || !(noise_linear() > 0.0))
        throw Error(ErrorCode::InvalidBudget, "noise PSD must be positive");
    auto check_row = [&](const std::vector<double>& row, const char* what) {
        if (row.size() != 1 && row.size() != static_cast<std::size_t>(users))
            throw Error(ErrorCode::InvalidBudget,
                        std::string(what) + " needs 1 or " + std::to_string(users) + " entries");
        for (double v : row)
            if (!std::isfinite(v)) throw Error(ErrorCode::InvalidBudget, std::string(what) + " must be finite");
    };
    check_row(psd_dbm_hz, "psd_dbm_hz");
    if (!psd_table_dbm_hz.empty()) {
        if (psd_table_dbm_hz.size() != grid.count())
            throw Error(ErrorCode::InvalidBudget, "psd table needs one row per tone");
        for (const auto& row : psd_table_dbm_hz) check_row(row, "psd table row");
    }
}

double LinkBudget::psd_linear(int user, std::size_t tone) const {
    const auto& row = psd_table_dbm_hz.empty() ? psd_dbm_hz : psd_table_dbm_hz.at(tone);
    return db_to_linear(row.size() == 1 ? row[0] : row.at(static_cast<std::size_t>(user)));
}

double LinkBudget::snr(const ChannelSnapshot& snapshot, int user, std::size_t tone) const {
    return psd_linear(user, tone) * std::norm(snapshot.d(user)) / noise_linear();
}

Eigen::VectorXd LinkBudget::snr_vector(const ChannelSnapshot& snapshot, std::size_t tone) const {
    Eigen::VectorXd s(snapshot.users());
    for (int i = 0; i < snapshot.users(); ++i) s(i) = snr(snapshot, i, tone);
    return s;
}

Eigen::VectorXd LinkBudget::psd_weights(int users, int user, std::size_t tone) const {
    Eigen::VectorXd w(users);
    const double pi = psd_linear(user, tone);
    for (int j = 0; j < users; ++j) w(j) = j == user ? 1.0 : (pi > 0.0 ? psd_linear(j, tone) / pi : 0.0);
    return w;
}

double LinkBudget::max_psd_ratio(int users, int user, std::size_t tone) const {
    double m = 0.0;
    const double pi = psd_linear(user, tone);
    for (int j = 0; j < users; ++j)
        if (j != user) m = std::max(m, psd_linear(j, tone) / pi);
    return m;
}

double LinkBudget::psd_dynamic_range(int users, std::size_t tone) const {
    double lo = psd_linear(0, tone), hi = lo;
    for (int j = 1; j < users; ++j) {
        lo = std::min(lo, psd_linear(j, tone));
        hi = std::max(hi, psd_linear(j, tone));
    }
    return hi / lo;
}

bool LinkBudget::equal_psd() const {
    auto flat = [](const std::vector<double>& row) {
        return std::all_of(row.begin(), row.end(), [&](double v) { return v == row.front(); });
    };
    if (!flat(psd_dbm_hz)) return false;
    for (const auto& row : psd_table_dbm_hz)
        if (!flat(row) || row.front() != psd_table_dbm_hz.front().front()) return false;
    return true;
}

double rate_from_snr(double snr, double gap) { return std::log1p(snr / gap) / std::numbers::ln2; }

double rate_ideal(const LinkBudget& budget, const ChannelSnapshot& snapshot, int user,
                  std::size_t tone) {
    if (!(budget.noise_linear() > 0.0)) throw Error(ErrorCode::InvalidBudget, "noise PSD must be positive");
    const double snr = budget.snr(snapshot, user, tone);
    if (!std::isfinite(snr) || snr < 0.0) throw Error(ErrorCode::InvalidBudget, "SNR must be finite and >= 0");
    return rate_from_snr(snr, budget.gap());
}

ToneLoss loss_from_terms(double snr, double gap, double weighted_offdiag, cplx delta_ii) {
    ToneLoss t;
    const double e = snr / gap;
    t.rate = std::log1p(e) / std::numbers::ln2;
    t.delta_norm = gap * weighted_offdiag;
    t.a = weighted_offdiag * snr;
    t.q = std::norm(1.0 + delta_ii) / (t.a + 1.0);
    t.k = e / (e + 1.0);
    // 1 - q without cancellation: (a - 2 Re Delta_ii - |Delta_ii|^2) / (a + 1).
    const double one_minus_q = (t.a - 2.0 * delta_ii.real() - std::norm(delta_ii)) / (t.a + 1.0);
    const double x = t.k * one_minus_q;
    if (!(x < 1.0) || !std::isfinite(x)) {
        std::ostringstream os;
        os << "1 - k(1 - q) = " << 1.0 - x << " is not positive";
        throw Error(ErrorCode::NumericalError, os.str());
    }
    // For large losses 1 - x = (1 + e q) / (1 + e) is tiny and forming it by
    // subtraction loses digits; take the ratio directly instead.
    t.loss = x <= 0.5 ? -std::log1p(-x) / std::numbers::ln2
                      : (std::log1p(e) - std::log1p(e * t.q)) / std::numbers::ln2;
    t.rate_perturbed = t.rate - t.loss;
    return t;
}

ToneLoss loss_exact(const LinkBudget& budget, const ChannelSnapshot& snapshot, const CMatrix& delta,
                    int user, std::size_t tone) {
    const int p = snapshot.users();
    if (delta.rows() != p || delta.cols() != p)
        throw Error(ErrorCode::InvalidParams, "Delta dimensions do not match the channel");
    if (!delta.allFinite()) throw Error(ErrorCode::InvalidParams, "Delta must be finite");
    const double snr = budget.snr(snapshot, user, tone);
    if (!std::isfinite(snr) || snr < 0.0) throw Error(ErrorCode::InvalidBudget, "SNR must be finite and >= 0");
    const double pi = budget.psd_linear(user, tone);
    double s = 0.0;
    // An idle user (P_i = 0) has no rate to lose; its interference weights are moot.
    if (pi > 0.0)
        for (int j = 0; j < p; ++j)
            if (j != user) s += budget.psd_linear(j, tone) / pi * std::norm(delta(user, j));
    return loss_from_terms(snr, budget.gap(), s, delta(user, user));
}

BandLoss integrate(const std::vector<ToneLoss>& tones, double spacing) {
    BandLoss b;
    for (const auto& t : tones) {
        b.rate += t.rate;
        b.loss += t.loss;
    }
    b.rate *= spacing;
    b.loss *= spacing;
    if (b.rate > 0.0) b.eta = b.loss / b.rate;
    return b;
}

namespace {

std::vector<ToneLoss> user_tones(const LinkBudget& budget, const ChannelEnsemble& ensemble,
                                 const std::vector<CMatrix>& deltas, int user) {
    if (deltas.size() != ensemble.snapshots.size())
        throw Error(ErrorCode::InvalidParams, "need one Delta per tone");
    std::vector<ToneLoss> out;
    out.reserve(deltas.size());
    for (std::size_t k = 0; k < deltas.size(); ++k)
        out.push_back(loss_exact(budget, ensemble.snapshots[k], deltas[k], user, k));
    return out;
}

}  // namespace

BandLoss loss_band(const LinkBudget& budget, const ChannelEnsemble& ensemble,
                   const std::vector<CMatrix>& deltas, int user) {
    return integrate(user_tones(budget, ensemble, deltas, user), ensemble.grid.spacing);
}

LossReport analyze_losses(const LinkBudget& budget, const ChannelEnsemble& ensemble,
                          const std::vector<CMatrix>& deltas) {
    budget.validate(ensemble.users());
    LossReport r;
    for (int i = 0; i < ensemble.users(); ++i) {
        r.per_tone.push_back(user_tones(budget, ensemble, deltas, i));
        r.band.push_back(integrate(r.per_tone.back(), ensemble.grid.spacing));
    }
    return r;
}

}  // namespace xtalk
