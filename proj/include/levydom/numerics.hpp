#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace levydom {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
Vec scale_vec(const Vec& a, double c);
Vec add_vec(const Vec& a, const Vec& b);

/// Dense symmetric d x d matrix, row-major full storage.
struct SymMat {
    int dim = 0;
    std::vector<double> a; // dim*dim entries

    SymMat() = default;
    explicit SymMat(int d) : dim(d), a(static_cast<std::size_t>(d) * d, 0.0) {}
    static SymMat identity(int d);
    static SymMat zero(int d) { return SymMat(d); }

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * dim + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * dim + j]; }

    double trace() const;
    double quad_form(const Vec& z) const; // z' A z
    SymMat scaled(double c) const;
    bool is_symmetric(double tol) const;
    double min_eigenvalue() const; // Jacobi iteration, small dims
};

/// Compensated (Kahan) accumulator.
struct KahanSum {
    double s = 0.0;
    double c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    double value() const { return s; }
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t evals = 0;
};

/// Adaptive Gauss-Kronrod (G7,K15) panel integration on [a,b].
/// Throws QuadratureFailure if the tolerance cannot be met.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol = 1e-10, double rel_tol = 1e-8,
                     std::size_t max_panels = 20000);

/// Same, panels split first at the given interior breakpoints.
QuadResult integrate_with_breaks(const std::function<double(double)>& f, double a, double b,
                                 const std::vector<double>& breaks,
                                 double abs_tol = 1e-10, double rel_tol = 1e-8,
                                 std::size_t max_panels = 20000);

/// Integrate f over [a, inf): geometric panels [a*2^k, a*2^{k+1}] until the
/// caller-supplied tail bound at the current edge drops under tolerance.
QuadResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                 const std::function<double(double)>& tail_bound,
                                 double abs_tol = 1e-10, double rel_tol = 1e-8);

/// Maximize a continuous function on [lo, hi]: coarse scan, then golden-section
/// refinement around the best bracket, endpoints checked.
double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          int scan_points = 64, int refine_steps = 64);

/// Deterministic counter-based RNG: SplitMix64 as a PRF over (key, counter).
/// Substreams for (seed, index) are independent of worker count.
struct CounterRng {
    std::uint64_t key = 0;
    std::uint64_t ctr = 0;

    static std::uint64_t mix(std::uint64_t z);
    static CounterRng substream(std::uint64_t seed, std::uint64_t index);

    std::uint64_t next_u64() { return mix(key + 0x9E3779B97F4A7C15ULL * (++ctr)); }
    /// uniform in (0,1)
    double next_double() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }
    double next_exp(double rate) { return -std::log(next_double()) / rate; }
    double next_normal(); // inverse-CDF (Acklam), deterministic across platforms
};

/// Sum of 1/k^2 for k >= m, Euler-Maclaurin tail, abs error < 1e-18 for m >= 2.
double trigamma_tail(std::uint64_t m);

inline bool close_rel(double a, double b, double tol) {
    double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= tol * std::max(scale, 1e-300);
}

} // namespace levydom
