#pragma once

#include "levydom/classifier.hpp"
#include "levydom/triplet.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace levydom {

/// One realization of the driving process on [0, T]: finite-activity jumps,
/// optional Gaussian grid increments, and the deterministic drift rate chosen
/// so the simulated law matches the triplet (mean-preserving under truncation).
struct PathRealization {
    double horizon = 0.0;
    std::vector<double> jump_times; // strictly increasing
    std::vector<Vec> jump_sizes;
    Vec drift_rate;
    double gauss_step = 0.0;        // 0 => no gaussian part
    std::vector<Vec> gauss_increments;
    std::vector<double> chol;       // lower-triangular factor of A (row major)
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
    double truncated_mass = 0.0;    // analytic bound on the dropped jump mass
    Vec truncated_mean;             // mean restored through the drift
};

PathRealization sample_path(const Triplet& mu, double T, std::uint64_t seed,
                            std::uint64_t path_index = 0, double gauss_step = 0.0);

struct NamedMask {
    std::string name;
    MaskSet mask;
};

/// pathwise integral at the checkpoint grid, optionally decomposed across a
/// partition of masks (decomposition sums to the full path exactly)
struct IntegralSample {
    std::vector<double> times;
    std::vector<Vec> y;                      // full integral
    std::vector<std::string> mask_names;
    std::vector<std::vector<Vec>> y_masked;  // [mask][checkpoint]
};

IntegralSample integrate_path(const IntegrandFn& f, const PathRealization& path,
                              const std::vector<double>& checkpoints,
                              const std::vector<NamedMask>& masks = {});

struct MaskStats {
    std::string name;
    std::vector<double> mean, stddev, ci_lo, ci_hi, gamma_t;
};

struct MonteCarloStats {
    std::vector<double> times;
    std::vector<MaskStats> per_mask; // entry 0 is the full integral
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    double truncated_mass = 0.0;
    Vec truncated_mean;
    std::vector<double> terminal; // first coordinate of Y at the last checkpoint, per path
};

struct MonteCarloOptions {
    bool parallel = true;
    bool collect_terminal = false;
    /// simulate jumps exactly up to this time; beyond it, per-checkpoint
    /// increments are drawn with matched mean and variance (0 => always exact)
    double exact_horizon = 0.0;
    double gauss_step = 0.0;
};

/// path-parallel study of Y_t = int f dX: per checkpoint and mask component,
/// sample mean / deviation / 99% band plus the deterministic drift center.
/// Results are bit-identical for any worker count (fixed path chunking).
MonteCarloStats monte_carlo(const Triplet& mu, const IntegrandFn& f,
                            const std::vector<NamedMask>& masks,
                            const std::vector<double>& checkpoints, std::size_t n_paths,
                            std::uint64_t seed, const MonteCarloOptions& opt = {});

/// single-threaded reference implementation (identical output)
MonteCarloStats monte_carlo_serial(const Triplet& mu, const IntegrandFn& f,
                                   const std::vector<NamedMask>& masks,
                                   const std::vector<double>& checkpoints, std::size_t n_paths,
                                   std::uint64_t seed, MonteCarloOptions opt = {});

/// deterministic centering gamma_t^p = int_0^t 1_D h ds at the checkpoints
std::vector<double> drift_centering(const Triplet& mu, const IntegrandFn& f, const MaskSet& mask,
                                    const std::vector<double>& checkpoints, int coord = 0);

} // namespace levydom
