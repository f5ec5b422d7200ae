#pragma once

#include "levydom/numerics.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace levydom {

struct Interval {
    double lo = 0.0, hi = 0.0; // half-open [lo, hi)
    double length() const { return hi - lo; }
};

/// Ordered disjoint half-open intervals. Either a finite explicit list or a
/// lazily materialized set backed by a generator; the cache is shared across
/// copies and guarded for concurrent window queries.
class MaskSet {
public:
    /// generator returns the intervals of the set inside [lo, hi)
    using Generator = std::function<std::vector<Interval>(double lo, double hi)>;

    MaskSet(); // empty set
    explicit MaskSet(std::vector<Interval> iv);
    MaskSet(Generator gen, double start);

    static MaskSet parse(const std::string& spec); // "mask:l1,r1;l2,r2;..."

    std::vector<Interval> within(double lo, double hi) const;
    bool contains(double s) const;
    bool known_empty() const;
    bool lazy() const;
    double start() const;
    /// intersection; at least one side must be finite/explicit
    MaskSet intersect(const MaskSet& other) const;
    std::string to_string(double hi_cap) const;

    /// free-form provenance tag (e.g. "sign:+:0" for a drift sign set)
    MaskSet tagged(std::string tag) const;
    const std::string& tag() const;

private:
    struct State;
    std::shared_ptr<State> st_;
};

enum class IntegrandFamily { PowerDecay, ExpDecay, InvS, AltInvS, Table };

struct PolyPiece {
    double lo = 0.0, hi = 0.0;
    std::vector<double> coef; // value = sum coef[k] * s^k
};

/// Deterministic integrand with structural metadata. Built-in families carry
/// exact primitives (for squares, absolute values, signed integrals and
/// super-level occupation); piecewise-polynomial tables are exact per piece.
class IntegrandFn {
public:
    static IntegrandFn power_decay(double alpha);      // s^{-1/alpha} on [1,inf), alpha in (0,2)
    static IntegrandFn exp_decay(double c, double alpha); // e^{-c s^alpha} on [0,inf)
    static IntegrandFn inv_s();                        // s^{-1} on [1,inf)
    static IntegrandFn alternating_inv_s();            // +-s^{-1} on unit blocks, + on odd
    static IntegrandFn table(std::vector<PolyPiece> pieces);
    static IntegrandFn parse(const std::string& spec);

    IntegrandFamily family() const { return family_; }
    double param_alpha() const { return alpha_; }
    double param_c() const { return c_; }
    const std::vector<PolyPiece>& pieces() const { return pieces_; }
    const std::optional<MaskSet>& mask() const { return mask_; }

    double eval(double s) const;
    double eval_unmasked(double s) const;
    double support_start() const;
    std::optional<double> support_end() const; // tables (and masked tables) only
    bool locally_square_integrable() const { return true; }
    bool single_signed() const; // f >= 0 everywhere

    double sq_integral(double t) const;
    double sq_total() const;
    double abs_integral(double t) const;
    std::optional<double> abs_total() const; // nullopt => infinite
    double signed_integral(double t) const;
    std::optional<double> signed_total() const; // known limits only
    /// integral of |f| over {s <= t : |f(s)| > theta}
    double abs_integral_above(double theta, double t) const;
    /// integral of f^2 over {s <= t : |f(s)| > theta}
    double sq_integral_above(double theta, double t) const;
    /// Lebesgue measure of {s <= t : |f(s)| > theta}
    double time_above(double theta, double t) const;

    /// family breakpoints and mask endpoints inside [lo, hi], sorted
    std::vector<double> breakpoints(double lo, double hi) const;

    IntegrandFn with_mask(const MaskSet& D) const;
    std::string to_string() const;

private:
    IntegrandFn() = default;

    double unmasked_primitive_sq(double t) const;
    double unmasked_primitive_abs(double t) const;
    double unmasked_primitive_signed(double t) const;
    double unmasked_abs_above(double theta, double t) const;
    double unmasked_sq_above(double theta, double t) const;
    double unmasked_time_above(double theta, double t) const;
    double masked_sum(double t, const std::function<double(double, double)>& seg) const;

    IntegrandFamily family_ = IntegrandFamily::InvS;
    double alpha_ = 1.0;
    double c_ = 1.0;
    std::vector<PolyPiece> pieces_;
    std::optional<MaskSet> mask_;
};

/// |f2| <= |f1| on the window; exact for comparable built-in pairs, otherwise
/// checked on a log-spaced grid plus all breakpoints.
bool dominates(const IntegrandFn& f1, const IntegrandFn& f2, double lo, double hi,
               int grid_per_unit_log = 4096);

IntegrandFn apply_mask(const IntegrandFn& f, const MaskSet& D);

// exact polynomial helpers (shared with tests)
double poly_eval(const std::vector<double>& coef, double s);
std::vector<double> poly_antiderivative(const std::vector<double>& coef);
std::vector<double> poly_roots_in(const std::vector<double>& coef, double lo, double hi);

/// upper bound on the tail integral of e^{-kappa s^alpha} beyond T
double exp_power_tail_bound(double kappa, double alpha, double T);
/// integral of e^{-kappa s^alpha} over [a, b] (b may be huge), high accuracy
double exp_power_integral(double kappa, double alpha, double a, double b);

} // namespace levydom
