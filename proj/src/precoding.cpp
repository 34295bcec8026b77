// SPDX-License-Identifier: Apache-2.0
#include "xtalk/precoding.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "xtalk/rng.hpp"

namespace xtalk {

void PerturbationSpec::validate() const {
    if (d_bits < 1 || d_bits > 52)
        throw Error(ErrorCode::InvalidParams, "d_bits must lie in [1, 52]");
    if (csi_samples && *csi_samples < 1)
        throw Error(ErrorCode::InvalidParams, "csi_samples must be positive");
}

CMatrix ideal_precoder(const ChannelSnapshot& snapshot, std::size_t tone) {
    return inverse_refined(snapshot.normalized(), tone);
}

CMatrix draw_uniform_box(Eigen::Index p, double half_width, std::uint64_t key) {
    CounterStream rng(key);
    CMatrix m(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j) {
            const double re = rng.uniform_symmetric();
            const double im = rng.uniform_symmetric();
            m(i, j) = cplx(half_width * re, half_width * im);
        }
    return m;
}

CMatrix draw_csi_error(const Eigen::VectorXd& snr, int n_samples, std::uint64_t key) {
    if (n_samples < 1) throw Error(ErrorCode::InvalidParams, "n_samples must be positive");
    const Eigen::Index p = snr.size();
    CounterStream rng(key);
    std::normal_distribution<double> z(0.0, 1.0);
    CMatrix m = CMatrix::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        if (!(snr(i) > 0.0)) continue;
        const double s = std::sqrt(0.5 / (n_samples * snr(i)));
        for (Eigen::Index j = 0; j < p; ++j) {
            const double re = z(rng);
            const double im = z(rng);
            m(i, j) = cplx(s * re, s * im);
        }
    }
    return m;
}

QuantizedPrecoder quantize_precoder(const CMatrix& p, const PerturbationSpec& spec,
                                    std::uint64_t tone, std::uint64_t draw, bool normalize) {
    spec.validate();
    if (!p.allFinite()) throw Error(ErrorCode::RangeError, "non-finite precoder entry");
    double peak = 0.0;
    for (Eigen::Index k = 0; k < p.size(); ++k)
        peak = std::max({peak, std::abs(p(k).real()), std::abs(p(k).imag())});

    QuantizedPrecoder out;
    if (peak > 1.0) {
        if (!normalize) {
            std::ostringstream os;
            os << "precoder component magnitude " << peak << " exceeds 1";
            throw Error(ErrorCode::RangeError, os.str());
        }
        out.scale = 1.0 / peak;
    }
    const CMatrix scaled = p * out.scale;
    const double step = std::ldexp(1.0, -spec.d_bits);

    if (spec.e2_model == E2Model::DeterministicRounding) {
        out.p_q = scaled.unaryExpr([&](const cplx& z) {
            return cplx(std::nearbyint(z.real() / step) * step, std::nearbyint(z.imag() / step) * step);
        });
        out.e2 = out.p_q - scaled;
    } else {
        out.e2 = draw_uniform_box(p.rows(), step,
                                  derive_key(spec.seed, Stream::QuantizerDither, {tone, draw}));
        out.p_q = scaled + out.e2;
    }
    return out;
}

CMatrix build_delta(const ChannelSnapshot& snapshot, const CMatrix& e1, const CMatrix& e2,
                    std::size_t tone) {
    return build_bundle(snapshot, e1, e2, tone).delta;
}

PrecoderBundle build_bundle(const ChannelSnapshot& snapshot, const CMatrix& e1, const CMatrix& e2,
                            std::size_t tone) {
    const Eigen::Index p = snapshot.h.rows();
    if (e1.rows() != p || e1.cols() != p || e2.rows() != p || e2.cols() != p)
        throw Error(ErrorCode::InvalidParams, "perturbation dimensions do not match the channel");
    if (!e1.allFinite() || !e2.allFinite())
        throw Error(ErrorCode::InvalidParams, "non-finite perturbation");

    const CMatrix q = snapshot.normalized();
    PrecoderBundle b;
    b.e1 = e1;
    b.e2 = e2;
    b.p_ideal = inverse_refined(q, tone);
    const CMatrix inner = e1.isZero(0.0) ? b.p_ideal : inverse_refined(q + e1, tone);
    b.p_perturbed = inner + e2;
    b.delta = q * e2 - e1 * inner;

    const CMatrix lhs = snapshot.h * b.p_perturbed;
    CMatrix rhs = snapshot.d.asDiagonal() * b.delta;
    rhs.diagonal() += snapshot.d;
    const double scale = snapshot.d.cwiseAbs().maxCoeff() *
                         (1.0 + snapshot.r) * (1.0 + max_abs(b.p_perturbed));
    const double residual = max_abs(lhs - rhs);
    if (!(residual <= kResidualTolerance * scale)) {
        std::ostringstream os;
        os << "H P != D (I + Delta): residual " << residual << " vs scale " << scale;
        if (tone != SingularChannel::kNoTone) os << " at tone " << tone;
        throw Error(ErrorCode::NumericalError, os.str());
    }
    return b;
}

double delta_entry_bound(double r, double d) { return std::exp2(-d + 0.5) * (1.0 + r); }

double delta_entry_bound(const ChannelSnapshot& snapshot, double d) {
    return delta_entry_bound(snapshot.r, d);
}

}  // namespace xtalk
