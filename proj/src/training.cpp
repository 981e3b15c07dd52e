// SPDX-License-Identifier: Apache-2.0
#include "thbt/training.hpp"

#include "thbt/error.hpp"

#include <cmath>
#include <numbers>

namespace thbt {

cplx project(const ArrayConfig& cfg, const Channel& channel, CodewordParams codeword)
{
    const int big_n = cfg.n_half();
    const auto h = channel.entries();
    cplx acc{0.0, 0.0};
    for (int n = -big_n; n <= big_n; ++n) {
        const double nn = n;
        const cplx v = std::polar(1.0, std::numbers::pi * (codeword.theta * nn - codeword.k * nn * nn));
        acc += std::conj(h[static_cast<std::size_t>(n + big_n)]) * v;
    }
    return acc / std::sqrt(static_cast<double>(cfg.n_t()));
}

BeamTrainer::BeamTrainer(const ArrayConfig& cfg, const Channel& channel, double noise_var, Rng* rng)
    : cfg_(cfg), channel_(channel), noise_var_(noise_var), rng_(rng)
{
    if (!(noise_var >= 0.0))
        throw Error(Errc::invalid_config, "noise variance must be >= 0");
    if (noise_var > 0.0 && rng == nullptr)
        throw Error(Errc::invalid_config, "a random source is required for noisy training");
}

cplx BeamTrainer::probe(CodewordParams codeword)
{
    cplx y = project(cfg_, channel_, codeword);
    if (noise_var_ > 0.0)
        y += rng_->complex_normal(noise_var_);
    log_.push_back({codeword, y, log_.size()});
    return y;
}

} // namespace thbt
