// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "thbt/beam_gain.hpp"
#include "thbt/channel_model.hpp"
#include "thbt/random.hpp"

#include <cstddef>
#include <vector>

namespace thbt {

/// One probe of the downlink training: codeword parameters and the received
/// sample y = h^H gamma(Theta, k) + eta.
struct MeasurementRecord {
    CodewordParams codeword;
    cplx sample{0.0, 0.0};
    std::size_t index = 0; ///< position in the trial's probe sequence
};

/// Sends codewords over a fixed channel with unit pilot symbol and additive
/// CN(0, noise_var) noise. Every call to probe() is one unit of training
/// overhead. Trial-local; not thread-safe.
class BeamTrainer {
public:
    /// `rng` may be null when noise_var == 0.
    BeamTrainer(const ArrayConfig& cfg, const Channel& channel, double noise_var, Rng* rng);

    cplx probe(CodewordParams codeword);

    std::size_t probes() const noexcept { return log_.size(); }
    const std::vector<MeasurementRecord>& log() const noexcept { return log_; }
    double noise_var() const noexcept { return noise_var_; }
    const ArrayConfig& array() const noexcept { return cfg_; }

private:
    ArrayConfig cfg_;
    Channel channel_;
    double noise_var_;
    Rng* rng_;
    std::vector<MeasurementRecord> log_;
};

/// Noise-free h^H gamma(Theta, k).
cplx project(const ArrayConfig& cfg, const Channel& channel, CodewordParams codeword);

} // namespace thbt
