#pragma once

#include "levydom/integrand.hpp"
#include "levydom/numerics.hpp"

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

namespace levydom {

enum class Finiteness { Finite, Infinite, Undetermined };

struct Atom {
    Vec x;
    double w = 0.0;
};

struct Direction {
    Vec xi;        // unit vector
    double weight; // lambda mass
};

struct ParetoRadial {
    double c = 1.0;     // density c r^{-1-beta}
    double beta = 1.5;
    double r_min = 1.0; // > 0
    double r_max = std::numeric_limits<double>::infinity();
};

struct LogLatticeRadial {
    double w0 = 1.0; // atom at radius e^n carries mass w0 n^{-beta}
    double beta = 2.0;
    std::uint64_t n_min = 1;
    std::uint64_t n_max = 0; // 0 => unbounded (requires beta > 1)
};

using RadialProfile = std::variant<ParetoRadial, LogLatticeRadial>;

/// Levy measure handle. Three constructible families (finite atomic, the
/// telescoping block measure, analytic radial tails) plus a derived
/// time-scaled variant representing the jump measure of an integral process.
/// All tail functionals are exact sums or closed forms with controlled error.
class LevyMeasure {
public:
    enum class Kind { FiniteAtomic, BlockE2, AnalyticTail, TimeScaled };

    static LevyMeasure zero(int dim);
    static LevyMeasure finite_atomic(int dim, std::vector<Atom> atoms);
    static LevyMeasure block_e2(int dim, std::vector<Direction> dirs, bool tilde,
                                std::uint64_t n_max_sim = 1ull << 16);
    static LevyMeasure analytic_tail(int dim, std::vector<Direction> dirs, RadialProfile radial);
    static LevyMeasure time_scaled(const LevyMeasure& base, const IntegrandFn& f, double t);

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    bool is_zero() const;
    bool symmetric() const { return symmetric_; }
    double scale() const { return scale_; }

    const std::vector<Atom>& atoms() const { return atoms_; }             // FiniteAtomic
    const std::vector<Direction>& directions() const { return dirs_; }    // BlockE2 / AnalyticTail
    bool tilde() const { return tilde_; }
    std::uint64_t e2_truncation() const { return n_max_sim_; }
    const RadialProfile& radial() const { return radial_; }
    const LevyMeasure& base() const { return *base_; }                    // TimeScaled
    const IntegrandFn& time_integrand() const { return *f_; }
    double time_horizon() const { return t_; }

    /// total mass; nullopt when infinite
    std::optional<double> total_mass() const;
    double second_truncated_moment() const; // int (|x|^2 ^ 1) nu(dx)
    bool abs_tail_finite() const;           // int_{|x|>1} |x| nu < inf ?
    double abs_tail_moment() const;
    double abs_tail_above(double r) const;  // int_{|x|>r} |x| nu(dx)
    Vec signed_tail(double s) const;        // int_{|x|>s} x nu(dx)
    double clipped_sq(double u) const;      // int (|ux|^2 ^ 1) nu(dx)
    /// int v x (1/(1+|vx|^2) - 1/(1+|wx|^2)) nu(dx)
    Vec drift_correction2(double v, double w) const;
    Vec drift_correction(double u) const { return drift_correction2(u, 1.0); }
    /// int u x |ux|^2 / (1+|ux|^2) nu(dx)
    Vec scaled_mean_correction(double u) const;
    Vec mean_correction() const { return scaled_mean_correction(1.0); }
    /// int x / (1+|x|^2) nu(dx), finite for every supported family
    Vec compensator_drift() const;
    std::complex<double> jump_cumulant(const Vec& z, double tol = 1e-8) const;
    Finiteness log_moment_finite(double q) const;
    double log_moment(double q) const; // only when finite

    LevyMeasure scaled(double u) const; // pushforward under x -> u x

    // descriptors
    /// finite support radius when the measure lives on finitely many atoms
    std::optional<double> support_radius() const;
    /// for the block measure: signed_tail(s) = xi_bar * scale * tail_sum(...)
    struct E2TailLaw {
        Vec xi_bar;
        double dir_mass;
        double scale;
        bool tilde;
    };
    std::optional<E2TailLaw> e2_tail_law() const;
    Vec dir_mean() const; // sum_i lambda_i xi_i (block/analytic families)

    // simulation support (finite activity only)
    struct JumpSampler {
        std::vector<Atom> atoms;            // discrete part (already cumulative-ready)
        std::vector<double> cum;            // cumulative masses over atoms
        double atom_mass = 0.0;
        // pareto radial part, sampled by inverse CDF
        bool has_pareto = false;
        ParetoRadial pareto;
        std::vector<Direction> pareto_dirs;
        std::vector<double> pareto_cum;
        double pareto_mass = 0.0;
        double total = 0.0;
        double truncated_mass = 0.0; // analytic bound on dropped mass
        Vec truncated_mean;          // exact mean of the dropped part
        Vec sample(struct CounterRng& rng, int dim) const;
    };
    JumpSampler jump_sampler() const;
    /// exact first moment int x nu(dx) of the full (untruncated) measure
    Vec jump_mean() const;

private:
    LevyMeasure() = default;
    void compute_symmetry();

    Kind kind_ = Kind::FiniteAtomic;
    int dim_ = 1;
    double scale_ = 1.0;
    bool symmetric_ = false;

    std::vector<Atom> atoms_;
    std::vector<Direction> dirs_;
    bool tilde_ = false;
    std::uint64_t n_max_sim_ = 1ull << 16;
    RadialProfile radial_;
    std::shared_ptr<const LevyMeasure> base_;
    std::shared_ptr<const IntegrandFn> f_;
    double t_ = 0.0;
};

/// zeta-style tail sum_{n>=N} n^{-beta}, beta > 1
double power_zeta_tail(double beta, std::uint64_t N);

} // namespace levydom
