// SPDX-License-Identifier: Apache-2.0
//
// Uniform linear array geometry, near-field steering vectors and the
// surrogate-distance parameterization b = lambda (1 - Omega^2) / (4 r).
//
// Antennas are indexed symmetrically, n in {-N, ..., N}, and every array-sized
// vector in this library is stored in ascending n.
#pragma once

#include "thbt/random.hpp"

#include <complex>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace thbt {

using cplx = std::complex<double>;

class ArrayConfig {
public:
    /// Throws Error(invalid_config) unless n_half >= 1 and wavelength > 0.
    ArrayConfig(int n_half, double wavelength);

    int n_half() const noexcept { return n_half_; }
    int n_t() const noexcept { return 2 * n_half_ + 1; }
    double wavelength() const noexcept { return wavelength_; }

    /// Smallest distance for which the second-order distance expansion holds,
    /// 0.5 * sqrt(N^3 lambda^2).
    double fresnel_bound() const noexcept;

private:
    int n_half_;
    double wavelength_;
};

struct PathParams {
    cplx gain{1.0, 0.0};
    double omega = 0.0; ///< sine of the angle, in [-1, 1]
    double range = 0.0; ///< meters
};

/// (Omega, b) pair. b may be negative for codewords; physical paths have b >= 0.
struct SurrogateCoords {
    double omega = 0.0;
    double b = 0.0;
};

/// Length-N_t complex vector indexed by the signed antenna index.
class ArrayVector {
public:
    ArrayVector() = default;
    ArrayVector(int n_half, std::vector<cplx> entries);

    int n_half() const noexcept { return n_half_; }
    std::size_t size() const noexcept { return entries_.size(); }

    const cplx& at(int n) const { return entries_[static_cast<std::size_t>(n + n_half_)]; }
    cplx& at(int n) { return entries_[static_cast<std::size_t>(n + n_half_)]; }

    std::span<const cplx> entries() const noexcept { return entries_; }
    std::span<cplx> entries() noexcept { return entries_; }

    double norm() const;

private:
    int n_half_ = 0;
    std::vector<cplx> entries_;
};

/// Unit-norm beamformer or channel steering vector; every entry has modulus
/// 1/sqrt(N_t).
class SteeringVector : public ArrayVector {
public:
    using ArrayVector::ArrayVector;
};

/// Multipath channel h = sum_l g_l alpha(Omega_l, r_l).
class Channel : public ArrayVector {
public:
    using ArrayVector::ArrayVector;
};

/// a^H b.
cplx inner(const ArrayVector& a, const ArrayVector& b);

double exact_distance(const ArrayConfig& cfg, const PathParams& path, int n);

/// Second-order expansion r - n Omega lambda/2 + n^2 lambda^2 (1 - Omega^2)/(8 r).
/// Throws Error(fresnel_bound_violation) below the validity bound.
double approx_distance(const ArrayConfig& cfg, const PathParams& path, int n);

SurrogateCoords to_surrogate(const PathParams& path, double wavelength);

/// Inverse of to_surrogate for b > 0; +infinity for b <= 0 (far field).
double surrogate_to_range(double omega, double b, double wavelength);

SteeringVector steering_exact(const ArrayConfig& cfg, double omega, double range);
SteeringVector steering_exact(const ArrayConfig& cfg, const PathParams& path);

/// gamma(Omega, b): entry n is exp(j pi (Omega n - b n^2)) / sqrt(N_t).
SteeringVector steering_surrogate(const ArrayConfig& cfg, SurrogateCoords coords);

/// Throws Error(empty_path_list) for an empty list.
Channel assemble_channel(const ArrayConfig& cfg, std::span<const PathParams> paths);

struct Scenario {
    /// Standard deviations delta_l of the complex Gaussian path gains; the
    /// number of entries is the number of paths L. delta_1 = 1 is the SNR
    /// reference.
    std::vector<double> gain_std{1.0, 0.1, 0.1};
    std::pair<double, double> angle_range{-0.8660254037844386, 0.8660254037844386};
    std::pair<double, double> distance_range{10.0, 200.0};
};

/// Throws Error(invalid_scenario) for an unusable scenario.
void validate_scenario(const ArrayConfig& cfg, const Scenario& scenario);

struct ChannelDraw {
    Channel channel;
    std::vector<PathParams> paths;
};

/// Draws angles and distances uniformly and gains from CN(0, delta_l^2).
/// Distance draws below the Fresnel validity bound are rejected and redrawn.
ChannelDraw sample_channel(const ArrayConfig& cfg, Rng& rng, const Scenario& scenario);
ChannelDraw sample_channel(const ArrayConfig& cfg, std::uint64_t seed, const Scenario& scenario);

} // namespace thbt
