// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>

#include "xtalk/channel_model.hpp"
#include "xtalk/linalg.hpp"

namespace xtalk {

enum class E2Model { DeterministicRounding, UniformRandom };

struct PerturbationSpec {
    int d_bits = 14;                 ///< bits per real/imag component, sign excluded
    std::optional<int> csi_samples;  ///< Gaussian estimation error from N samples; none if empty
    E2Model e2_model = E2Model::DeterministicRounding;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const PerturbationSpec&) const = default;
};

struct PrecoderBundle {
    CMatrix p_ideal;
    CMatrix p_perturbed;
    CMatrix e1;
    CMatrix e2;
    CMatrix delta;
};

/// Zero-forcing precoder (I + D^{-1} F)^{-1} = H^{-1} D, so H P = diag(D).
CMatrix ideal_precoder(const ChannelSnapshot& snapshot, std::size_t tone = SingularChannel::kNoTone);

struct QuantizedPrecoder {
    CMatrix p_q;
    CMatrix e2;     ///< p_q - scale * P
    double scale = 1.0;  ///< factor applied to P before quantizing (1 unless normalizing)
};

/// Word-length-d representation of P. Deterministic rounding snaps each real
/// and imaginary component to the nearest multiple of 2^{-d}; uniform_random
/// adds independent U[-2^{-d}, 2^{-d}] components drawn from (seed, tone,
/// draw). Components outside [-1, 1] throw RangeError unless `normalize`, in
/// which case P is first scaled by 1 / max component and the scale reported.
QuantizedPrecoder quantize_precoder(const CMatrix& p, const PerturbationSpec& spec,
                                    std::uint64_t tone = 0, std::uint64_t draw = 0,
                                    bool normalize = false);

/// p x p matrix with real and imaginary parts i.i.d. uniform on
/// [-half_width, half_width], fully determined by `key`.
CMatrix draw_uniform_box(Eigen::Index p, double half_width, std::uint64_t key);

/// Channel-estimation error on I + D^{-1} F: row i is i.i.d. circular complex
/// Gaussian with variance 1 / (n_samples * snr[i]). Rows with snr == 0 stay 0.
CMatrix draw_csi_error(const Eigen::VectorXd& snr, int n_samples, std::uint64_t key);

/// Equivalent perturbation (I + D^{-1}F) E2 - E1 (I + D^{-1}F + E1)^{-1}. The
/// result is checked against H P = diag(D)(I + Delta) and NumericalError is
/// thrown if the identity fails at kResidualTolerance.
CMatrix build_delta(const ChannelSnapshot& snapshot, const CMatrix& e1, const CMatrix& e2,
                    std::size_t tone = SingularChannel::kNoTone);

/// Full bundle for one tone: ideal and perturbed precoders plus Delta.
PrecoderBundle build_bundle(const ChannelSnapshot& snapshot, const CMatrix& e1, const CMatrix& e2,
                            std::size_t tone = SingularChannel::kNoTone);

/// 2^{-d + 1/2} (1 + r(H)): bound on every |Delta_ij| when E1 = 0 and E2
/// satisfies the 2^{-d} component bound.
double delta_entry_bound(const ChannelSnapshot& snapshot, double d);
double delta_entry_bound(double r, double d);

}  // namespace xtalk
