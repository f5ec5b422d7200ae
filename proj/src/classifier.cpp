#include "levydom/classifier.hpp"
#include "levydom/block_coeffs.hpp"
#include "levydom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace levydom {

const char* to_string(Verdict3 v) {
    switch (v) {
        case Verdict3::Member: return "member";
        case Verdict3::NonMember: return "non_member";
        default: return "undetermined";
    }
}
const char* to_string(Finiteness v) {
    switch (v) {
        case Finiteness::Finite: return "finite";
        case Finiteness::Infinite: return "infinite";
        default: return "undetermined";
    }
}
const char* to_string(ConvVerdict v) {
    switch (v) {
        case ConvVerdict::Convergent: return "convergent";
        case ConvVerdict::Divergent: return "divergent";
        default: return "undetermined";
    }
}

std::vector<double> Checkpoints::times() const {
    std::vector<double> out;
    double t = start;
    for (int k = 0; k < count; ++k) {
        t *= ratio;
        out.push_back(t);
    }
    return out;
}

// ---------------------------------------------------------------------------
// chain-checked verdict

static int member_rank(Verdict3 v) {
    return v == Verdict3::Member ? 2 : (v == Verdict3::Undetermined ? 1 : 0);
}

DomainVerdict DomainVerdict::make(Verdict3 d0, Verdict3 d, Verdict3 dc, Verdict3 de,
                                  std::vector<Evidence> ev) {
    const Verdict3 chain[4] = {d0, d, dc, de};
    for (int i = 0; i + 1 < 4; ++i) {
        if (chain[i] == Verdict3::Member && member_rank(chain[i + 1]) < 2)
            throw ConfigError("verdict violates the inclusion chain");
        if (chain[i + 1] == Verdict3::NonMember && chain[i] != Verdict3::NonMember)
            throw ConfigError("verdict violates the inclusion chain");
    }
    DomainVerdict v;
    v.d0 = d0;
    v.d = d;
    v.dc = dc;
    v.de = de;
    v.evidence = std::move(ev);
    return v;
}

bool DomainVerdict::any_undetermined() const {
    return d0 == Verdict3::Undetermined || d == Verdict3::Undetermined ||
           dc == Verdict3::Undetermined || de == Verdict3::Undetermined;
}

// ---------------------------------------------------------------------------
// drift integrand

DriftIntegrand::DriftIntegrand(Triplet mu, IntegrandFn f) : mu_(std::move(mu)), f_(std::move(f)) {}

Vec DriftIntegrand::eval(double s) const {
    double v = f_.eval(s);
    if (v == 0.0) return Vec(mu_.dim, 0.0);
    Vec out = scale_vec(mu_.gamma, v);
    if (!mu_.nu.is_zero()) out = add_vec(out, mu_.nu.drift_correction(v));
    return out;
}

double DriftIntegrand::eval_j(double s, int j) const { return eval(s)[j]; }

bool DriftIntegrand::identically_zero() const {
    bool no_corr = mu_.nu.is_zero() || mu_.nu.symmetric();
    if (!no_corr && (mu_.nu.kind() == LevyMeasure::Kind::BlockE2 ||
                     mu_.nu.kind() == LevyMeasure::Kind::AnalyticTail))
        no_corr = norm2(mu_.nu.dir_mean()) < 1e-15;
    return no_corr && norm2(mu_.gamma) == 0.0;
}

DriftIntegrand drift_h(const Triplet& mu, const IntegrandFn& f) { return {mu, f}; }

// ---------------------------------------------------------------------------
// family and measure helpers

namespace {

constexpr double kLn2 = 0.6931471805599453;

IntegrandFn strip_mask(const IntegrandFn& f) {
    switch (f.family()) {
        case IntegrandFamily::InvS: return IntegrandFn::inv_s();
        case IntegrandFamily::AltInvS: return IntegrandFn::alternating_inv_s();
        case IntegrandFamily::PowerDecay: return IntegrandFn::power_decay(f.param_alpha());
        case IntegrandFamily::ExpDecay: return IntegrandFn::exp_decay(f.param_c(), f.param_alpha());
        case IntegrandFamily::Table: return IntegrandFn::table(f.pieces());
    }
    return f;
}

bool is_compact(const IntegrandFn& f) { return f.support_end().has_value(); }

bool power_like(const IntegrandFn& f) {
    return f.family() == IntegrandFamily::InvS || f.family() == IntegrandFamily::AltInvS ||
           f.family() == IntegrandFamily::PowerDecay;
}

// |f| ~ s^{-q}: q = 1/alpha for the power family, 1 for the inverse families
double power_exponent(const IntegrandFn& f) {
    return f.family() == IntegrandFamily::PowerDecay ? 1.0 / f.param_alpha() : 1.0;
}

// int |f(s)|^q ds over the support: finite?
Finiteness abs_power_total(const IntegrandFn& f, double q) {
    if (f.family() == IntegrandFamily::ExpDecay || f.family() == IntegrandFamily::Table)
        return Finiteness::Finite;
    return power_exponent(f) * q > 1.0 ? Finiteness::Finite : Finiteness::Infinite;
}

// third absolute moment, when finite by structure
std::optional<double> third_abs_moment(const LevyMeasure& nu) {
    switch (nu.kind()) {
        case LevyMeasure::Kind::FiniteAtomic: {
            double s = 0.0;
            for (const auto& a : nu.atoms()) {
                double r = norm2(a.x);
                s += a.w * r * r * r;
            }
            return s;
        }
        case LevyMeasure::Kind::AnalyticTail: {
            if (auto* p = std::get_if<ParetoRadial>(&nu.radial())) {
                if (std::isinf(p->r_max)) return std::nullopt; // radial exponent rule instead
                double e = 3.0 - p->beta;
                double wl = 0.0;
                for (const auto& d : nu.directions()) wl += d.weight;
                if (std::abs(e) < 1e-12) return wl * p->c * std::log(p->r_max / p->r_min);
                return wl * p->c * (std::pow(p->r_max, e) - std::pow(p->r_min, e)) / e;
            }
            const auto& l = std::get<LogLatticeRadial>(nu.radial());
            if (l.n_max == 0) return std::nullopt;
            double wl = 0.0;
            for (const auto& d : nu.directions()) wl += d.weight;
            double as = std::abs(nu.scale());
            double s = 0.0;
            for (std::uint64_t n = l.n_min; n <= l.n_max; ++n) {
                double r = as * std::exp(static_cast<double>(n));
                s += l.w0 * std::pow(static_cast<double>(n), -l.beta) * r * r * r;
            }
            return wl * s;
        }
        default: return std::nullopt;
    }
}

bool e2_like(const LevyMeasure& nu) { return nu.kind() == LevyMeasure::Kind::BlockE2; }

struct MaskSignInfo {
    bool present = false;
    int sign = 0;
    int coord = 0;
};

MaskSignInfo mask_sign_tag(const IntegrandFn& f) {
    MaskSignInfo out;
    if (!f.mask()) return out;
    const std::string& tag = f.mask()->tag();
    if (tag.rfind("sign:", 0) != 0 || tag.size() < 8) return out;
    out.present = true;
    out.sign = tag[5] == '+' ? +1 : -1;
    out.coord = std::atoi(tag.c_str() + 7);
    return out;
}

bool mask_sign_consistent(const DriftIntegrand& h_base, const MaskSet& mask,
                          const MaskSignInfo& info, double window_hi) {
    auto segs = mask.within(0.0, window_hi);
    int checked = 0;
    for (const auto& seg : segs) {
        for (double frac : {0.21, 0.52, 0.83}) {
            double s = seg.lo + frac * (seg.hi - seg.lo);
            double v = h_base.eval_j(s, info.coord);
            if (v * info.sign < 0.0 && std::abs(v) > 1e-13) return false;
            if (++checked > 240) return true;
        }
    }
    return checked > 0;
}

Vec quad_drift_integral(const DriftIntegrand& h, double a, double b) {
    int dim = h.mu().dim;
    Vec out(dim, 0.0);
    if (!(b > a)) return out;
    auto breaks = h.f().breakpoints(a, b);
    for (int i = 0; i < dim; ++i) {
        auto g = [&](double s) { return h.eval_j(s, i); };
        out[i] = integrate_with_breaks(g, a, b, breaks, 1e-11, 1e-9, 400000).value;
    }
    return out;
}

// exact drift primitive for the block measure against s^{-1} on [a, b]
double e2_invs_drift_primitive(const Triplet& mu, int j, double a, double b) {
    const auto& nu = mu.nu;
    double sg = nu.scale() >= 0 ? 1.0 : -1.0;
    double as = std::abs(nu.scale());
    Vec xb = nu.dir_mean();
    auto bracket = [&](double r) {
        return 0.5 * r * std::log((b * b + r * r) / (a * a + r * r)) -
               (r / (1.0 + r * r)) * std::log(b / a);
    };
    auto g = [&](double p) { return bracket(as * p); };
    double cut = std::max(1e8, 256.0 * b * b / std::max(as * as, 1e-12));
    double series = e2::sum_range(g, 2, cut, true);
    if (nu.tilde()) series += bracket(2.0 * as) / (2.0 * kLn2);
    return mu.gamma[j] * std::log(b / a) + xb[j] * sg * series;
}

} // namespace

// ---------------------------------------------------------------------------
// gaussian and levy conditions

CondReport cond_gaussian(const Triplet& mu, const IntegrandFn& f, double T) {
    CondReport r;
    r.value = f.sq_integral(T) * mu.A.trace();
    r.verdict = Finiteness::Finite;
    r.rule = "square-total";
    std::ostringstream os;
    os << "total " << f.sq_total() * mu.A.trace();
    r.note = os.str();
    return r;
}

namespace {

double clipped_time_integral(const IntegrandFn& f, double r, double t) {
    double theta = 1.0 / r;
    return r * r * (f.sq_integral(t) - f.sq_integral_above(theta, t)) + f.time_above(theta, t);
}

} // namespace

CondReport cond_levy(const Triplet& mu, const IntegrandFn& f, double T) {
    CondReport r;
    const auto& nu = mu.nu;
    if (nu.is_zero()) {
        r.verdict = Finiteness::Finite;
        r.rule = "empty-measure";
        return r;
    }
    if (nu.kind() == LevyMeasure::Kind::FiniteAtomic) {
        double v = 0.0, tot = 0.0;
        for (const auto& a : nu.atoms()) {
            double rad = norm2(a.x);
            v += a.w * clipped_time_integral(f, rad, T);
            tot += a.w * clipped_time_integral(f, rad, 1e15);
        }
        r.value = v;
        r.verdict = Finiteness::Finite;
        r.rule = "atom-exact";
        std::ostringstream os;
        os << "total " << tot;
        r.note = os.str();
        return r;
    }
    if (nu.kind() == LevyMeasure::Kind::TimeScaled)
        throw UnsupportedMeasure("derived time-scaled measures are not classified");

    double t_val = std::min(T, 1e6);
    auto g = [&](double s) {
        double v = f.eval(s);
        return v == 0.0 ? 0.0 : nu.clipped_sq(v);
    };
    r.value = integrate_with_breaks(g, 0.0, t_val, f.breakpoints(0.0, t_val), 1e-9, 1e-7, 400000).value;

    if (is_compact(f)) {
        r.verdict = Finiteness::Finite;
        r.rule = "compact-support";
        return r;
    }
    if (nu.kind() == LevyMeasure::Kind::BlockE2) {
        if (f.family() == IntegrandFamily::ExpDecay) {
            r.verdict = Finiteness::Finite;
            r.rule = "log-weight-series";
        } else {
            r.verdict = power_exponent(f) >= 1.0 ? Finiteness::Finite : Finiteness::Infinite;
            r.rule = "block-tail-exponent";
        }
        return r;
    }
    // analytic radial tails
    if (auto* p = std::get_if<ParetoRadial>(&nu.radial())) {
        if (!std::isinf(p->r_max)) {
            r.verdict = Finiteness::Finite;
            r.rule = "bounded-support";
        } else if (f.family() == IntegrandFamily::ExpDecay) {
            r.verdict = Finiteness::Finite;
            r.rule = "radial-exponent";
        } else {
            r.verdict = (power_exponent(f) * p->beta > 1.0) ? Finiteness::Finite : Finiteness::Infinite;
            r.rule = "radial-exponent";
        }
        return r;
    }
    const auto& l = std::get<LogLatticeRadial>(nu.radial());
    if (l.n_max != 0) {
        r.verdict = Finiteness::Finite;
        r.rule = "bounded-support";
    } else if (f.family() == IntegrandFamily::ExpDecay) {
        r.verdict = (l.beta > 1.0 + 1.0 / f.param_alpha()) ? Finiteness::Finite : Finiteness::Infinite;
        r.rule = "log-lattice-exponent";
    } else {
        r.verdict = Finiteness::Infinite;
        r.rule = "log-lattice-exponent";
    }
    return r;
}

// ---------------------------------------------------------------------------
// drift rules shared by the convergence and absolute conditions

namespace {

struct RuleOutcome {
    bool fired = false;
    ConvVerdict conv = ConvVerdict::Undetermined;
    Finiteness abs = Finiteness::Undetermined;
    std::string rule;
};

RuleOutcome drift_rules(const Triplet& mu, const IntegrandFn& f) {
    RuleOutcome out;
    const auto& nu = mu.nu;
    DriftIntegrand h(mu, f);

    if (h.identically_zero()) return {true, ConvVerdict::Convergent, Finiteness::Finite, "zero-drift"};
    if (is_compact(f))
        return {true, ConvVerdict::Convergent, Finiteness::Finite, "compact-support"};

    bool radial_mean_zero =
        (nu.kind() == LevyMeasure::Kind::BlockE2 || nu.kind() == LevyMeasure::Kind::AnalyticTail) &&
        norm2(nu.dir_mean()) < 1e-15;
    if (nu.is_zero() || nu.symmetric() || radial_mean_zero) {
        // the correction integral vanishes: h = f gamma exactly
        if (norm2(mu.gamma) == 0.0)
            return {true, ConvVerdict::Convergent, Finiteness::Finite, "zero-drift"};
        out.fired = true;
        out.rule = "symmetric-levy";
        bool lazy = f.mask() && f.mask()->lazy();
        if (f.signed_total())
            out.conv = ConvVerdict::Convergent;
        else
            out.conv = lazy ? ConvVerdict::Undetermined : ConvVerdict::Divergent;
        if (f.abs_total())
            out.abs = Finiteness::Finite;
        else
            out.abs = lazy ? Finiteness::Undetermined : Finiteness::Infinite;
        return out;
    }

    if (f.family() == IntegrandFamily::ExpDecay && !f.mask()) {
        if (nu.kind() == LevyMeasure::Kind::AnalyticTail) {
            if (auto* l = std::get_if<LogLatticeRadial>(&nu.radial()); l && l->n_max == 0) {
                bool fin = l->beta * f.param_alpha() > 1.0;
                return {true, fin ? ConvVerdict::Convergent : ConvVerdict::Divergent,
                        fin ? Finiteness::Finite : Finiteness::Infinite, "exp-decay-drift"};
            }
        }
        return {true, ConvVerdict::Convergent, Finiteness::Finite, "exp-decay-drift"};
    }

    auto tag = mask_sign_tag(f);
    if (tag.present && power_like(f)) {
        auto base = strip_mask(f);
        auto base_rules = drift_rules(mu, base);
        if (base_rules.fired && base_rules.abs == Finiteness::Infinite) {
            DriftIntegrand hb(mu, base);
            if (mask_sign_consistent(hb, *f.mask(), tag, 1e7))
                return {true, ConvVerdict::Divergent, Finiteness::Infinite, "masked-sign-divergence"};
        }
    }
    if (f.mask()) return out; // remaining masked cases go numeric

    if (e2_like(nu) && power_like(f)) {
        double q = power_exponent(f);
        auto mn = mean(mu);
        double mnorm = mn ? norm2(*mn) : 0.0;
        if (f.family() == IntegrandFamily::AltInvS)
            return {true, ConvVerdict::Convergent, Finiteness::Infinite, "alternating-modulation"};
        if (std::abs(q - 1.0) < 1e-12) {
            if (mnorm < 1e-9)
                return {true, ConvVerdict::Convergent, Finiteness::Infinite, "tail-alternation"};
            return {true, ConvVerdict::Divergent, Finiteness::Infinite, "drift-rate"};
        }
        if (q > 1.0)
            return {true, ConvVerdict::Convergent, Finiteness::Finite, "power-integrable"};
        if (mnorm >= 1e-9)
            return {true, ConvVerdict::Divergent, Finiteness::Infinite, "drift-rate"};
        return out;
    }

    if (auto m3 = third_abs_moment(nu)) {
        (void)m3;
        auto mn = mean(mu);
        if (mn) {
            double mnorm = norm2(*mn);
            out.fired = true;
            out.rule = "atomic-drift-expansion";
            if (mnorm < 1e-12) {
                out.conv = ConvVerdict::Convergent;
                out.abs = Finiteness::Finite;
            } else {
                out.conv = f.signed_total() ? ConvVerdict::Convergent : ConvVerdict::Divergent;
                out.abs = f.abs_total() ? Finiteness::Finite : Finiteness::Infinite;
            }
            return out;
        }
    }

    if (nu.kind() == LevyMeasure::Kind::AnalyticTail) {
        bool alternating = f.family() == IntegrandFamily::AltInvS;
        if (auto* p = std::get_if<ParetoRadial>(&nu.radial()); p && std::isinf(p->r_max)) {
            out.fired = true;
            out.rule = "radial-exponent";
            if (p->beta > 1.0) {
                auto mn = mean(mu);
                double mnorm = mn ? norm2(*mn) : 0.0;
                double qexp = std::min(2.999, p->beta); // correction decays like |f|^qexp
                Finiteness corr = abs_power_total(f, qexp);
                if (mnorm >= 1e-12) {
                    out.conv = f.signed_total() ? ConvVerdict::Convergent : ConvVerdict::Divergent;
                    out.abs = (f.abs_total() && corr == Finiteness::Finite) ? Finiteness::Finite
                                                                            : Finiteness::Infinite;
                } else if (corr == Finiteness::Finite) {
                    out.conv = ConvVerdict::Convergent;
                    out.abs = Finiteness::Finite;
                } else if (alternating) {
                    out.conv = ConvVerdict::Convergent;
                    out.abs = Finiteness::Infinite;
                } else {
                    out.conv = ConvVerdict::Divergent;
                    out.abs = Finiteness::Infinite;
                }
            } else {
                // no first moment: correction ~ |f|^{beta} dominates
                double bexp = std::min(p->beta, 0.999);
                Finiteness fin = abs_power_total(f, bexp);
                if (fin == Finiteness::Finite) {
                    out.conv = ConvVerdict::Convergent;
                    out.abs = Finiteness::Finite;
                } else if (alternating) {
                    out.conv = ConvVerdict::Convergent;
                    out.abs = Finiteness::Infinite;
                } else {
                    out.conv = ConvVerdict::Divergent;
                    out.abs = Finiteness::Infinite;
                }
            }
            return out;
        }
        if (auto* l = std::get_if<LogLatticeRadial>(&nu.radial()); l && l->n_max == 0) {
            out.fired = true;
            out.rule = "log-lattice-exponent";
            out.abs = Finiteness::Infinite;
            out.conv = alternating ? ConvVerdict::Convergent : ConvVerdict::Divergent;
            return out;
        }
    }
    return out;
}

} // namespace

DriftConvReport cond_drift_convergence(const Triplet& mu, const IntegrandFn& f,
                                       const Checkpoints& cps) {
    DriftConvReport rep;
    rep.limit = Vec(mu.dim, 0.0);
    DriftIntegrand h(mu, f);

    auto rules = drift_rules(mu, f);
    if (rules.fired && rules.conv != ConvVerdict::Undetermined) {
        rep.verdict = rules.conv;
        rep.rule = rules.rule;
        if (rules.rule == "zero-drift") return rep;
        if (rules.rule == "compact-support") {
            rep.limit = quad_drift_integral(h, 0.0, *f.support_end());
            return rep;
        }
        if (rules.rule == "symmetric-levy" && rep.verdict == ConvVerdict::Convergent)
            rep.limit = scale_vec(mu.gamma, *f.signed_total());
        double a = std::max(f.support_start(), 1e-9);
        Vec acc(mu.dim, 0.0);
        double prev = a;
        for (double t : Checkpoints{a, 4.0, 8}.times()) {
            acc = add_vec(acc, quad_drift_integral(h, prev, t));
            prev = t;
            rep.partials.emplace_back(t, norm2(acc));
        }
        return rep;
    }

    double a = std::max(f.support_start(), cps.start);
    Vec acc(mu.dim, 0.0);
    double prev = a;
    std::vector<Vec> values;
    for (double t : Checkpoints{a, cps.ratio, cps.count}.times()) {
        acc = add_vec(acc, quad_drift_integral(h, prev, t));
        prev = t;
        values.push_back(acc);
        rep.partials.emplace_back(t, norm2(acc));
    }
    const double eps_conv = 1e-8;
    int n = static_cast<int>(values.size());
    bool cauchy = n >= 6;
    for (int k = std::max(1, n - 5); k < n && cauchy; ++k)
        if (norm2(add_vec(values[k], scale_vec(values[k - 1], -1.0))) > eps_conv) cauchy = false;
    if (cauchy) {
        rep.verdict = ConvVerdict::Convergent;
        rep.rule = "checkpoint-cauchy";
        rep.limit = values.back();
        return rep;
    }
    double scale0 = std::max(norm2(values.front()), eps_conv);
    int mono = 0, mono_best = 0;
    for (int k = 1; k < n; ++k) {
        mono = (norm2(values[k]) > norm2(values[k - 1]) * (1.0 + 1e-12)) ? mono + 1 : 0;
        mono_best = std::max(mono_best, mono);
    }
    if (mono >= 4 && norm2(values.back()) > 1e3 * scale0) {
        rep.verdict = ConvVerdict::Divergent;
        rep.rule = "checkpoint-monotone";
        return rep;
    }
    rep.verdict = ConvVerdict::Undetermined;
    rep.rule = "checkpoint-inconclusive";
    return rep;
}

CondReport cond_drift_absolute(const Triplet& mu, const IntegrandFn& f, double T) {
    CondReport r;
    DriftIntegrand h(mu, f);
    auto rules = drift_rules(mu, f);
    if (rules.fired) {
        r.verdict = rules.abs;
        r.rule = rules.rule;
    } else {
        r.verdict = Finiteness::Undetermined;
        r.rule = "no-rule";
    }
    double cap = std::min(T, 1e5);
    auto breaks = f.breakpoints(0.0, cap);
    auto g = [&](double s) { return norm2(h.eval(s)); };
    r.value = integrate_with_breaks(g, 0.0, cap, breaks, 1e-9, 1e-7, 400000).value;
    return r;
}

// ---------------------------------------------------------------------------
// classify

DomainVerdict classify(const Triplet& mu, const IntegrandFn& f) {
    std::vector<Evidence> ev;
    auto push = [&](std::string cond, std::string rule, std::string note, double value) {
        Evidence e;
        e.condition = std::move(cond);
        e.rule = std::move(rule);
        e.note = std::move(note);
        e.value = value;
        ev.push_back(std::move(e));
    };

    if (f.family() == IntegrandFamily::ExpDecay && !f.mask()) {
        double q = 1.0 / f.param_alpha();
        auto fin = mu.nu.log_moment_finite(q);
        if (fin != Finiteness::Undetermined) {
            bool member = fin == Finiteness::Finite;
            double v = member ? mu.nu.log_moment(q) : std::numeric_limits<double>::infinity();
            push("analytic-rule", "log-moment",
                 member ? "log-moment series converges" : "log-moment series diverges", v);
            Verdict3 all = member ? Verdict3::Member : Verdict3::NonMember;
            return DomainVerdict::make(all, all, all, all, std::move(ev));
        }
    }

    const double T_probe = 1024.0;
    auto c1 = cond_gaussian(mu, f, T_probe);
    push("gauss", c1.rule, c1.note, c1.value);
    auto c2 = cond_levy(mu, f, T_probe);
    push("levy", c2.rule, c2.note, c2.value);

    Verdict3 de;
    if (c1.verdict == Finiteness::Finite && c2.verdict == Finiteness::Finite)
        de = Verdict3::Member;
    else if (c1.verdict == Finiteness::Infinite || c2.verdict == Finiteness::Infinite)
        de = Verdict3::NonMember;
    else
        de = Verdict3::Undetermined;

    if (de != Verdict3::Member) {
        Verdict3 rest = de == Verdict3::NonMember ? Verdict3::NonMember : Verdict3::Undetermined;
        return DomainVerdict::make(rest, rest, rest, de, std::move(ev));
    }

    auto conv = cond_drift_convergence(mu, f);
    {
        Evidence e;
        e.condition = "drift-conv";
        e.rule = conv.rule;
        e.note = to_string(conv.verdict);
        e.checkpoints = conv.partials;
        ev.push_back(std::move(e));
    }
    Verdict3 d = conv.verdict == ConvVerdict::Convergent
                     ? Verdict3::Member
                     : (conv.verdict == ConvVerdict::Divergent ? Verdict3::NonMember
                                                               : Verdict3::Undetermined);

    auto cabs = cond_drift_absolute(mu, f, T_probe);
    push("drift-abs", cabs.rule, to_string(cabs.verdict), cabs.value);
    Verdict3 d0;
    if (d == Verdict3::Member && cabs.verdict == Finiteness::Finite)
        d0 = Verdict3::Member;
    else if (d == Verdict3::NonMember || cabs.verdict == Finiteness::Infinite)
        d0 = Verdict3::NonMember;
    else
        d0 = Verdict3::Undetermined;

    Verdict3 dc;
    if (d == Verdict3::Member) {
        dc = Verdict3::Member;
        push("compensator-q", "chain", "definable without shift", 0.0);
    } else {
        dc = Verdict3::Undetermined;
        bool radial_mean_zero = (mu.nu.kind() == LevyMeasure::Kind::BlockE2 ||
                                 mu.nu.kind() == LevyMeasure::Kind::AnalyticTail) &&
                                norm2(mu.nu.dir_mean()) < 1e-15;
        auto tag = mask_sign_tag(f);
        if (tag.present && e2_like(mu.nu) && power_like(f)) {
            // the measure tail obeys |int_{|x|>s} x_j nu| ~ c/log s; a
            // single-signed masked drift defeats every constant shift
            dc = Verdict3::NonMember;
            push("compensator-q", "shift-defeat", "no shift rescues the masked drift", 0.0);
        } else if (mu.nu.is_zero() || mu.nu.symmetric() || radial_mean_zero) {
            Triplet shifted = Triplet::make(mu.A, mu.nu, Vec(mu.dim, 0.0));
            auto sc = cond_drift_convergence(shifted, f);
            if (sc.verdict == ConvVerdict::Convergent) {
                dc = Verdict3::Member;
                std::ostringstream os;
                os << "q = gamma = (";
                for (int i = 0; i < mu.dim; ++i) os << (i ? "," : "") << mu.gamma[i];
                os << ")";
                push("compensator-q", "location-shift", os.str(), norm2(mu.gamma));
            }
        } else if (auto mn = mean(mu)) {
            Triplet shifted = Triplet::make(mu.A, mu.nu, add_vec(mu.gamma, scale_vec(*mn, -1.0)));
            auto sc = cond_drift_convergence(shifted, f);
            if (sc.verdict == ConvVerdict::Convergent) {
                dc = Verdict3::Member;
                std::ostringstream os;
                os << "q = mean = (";
                for (int i = 0; i < mu.dim; ++i) os << (i ? "," : "") << (*mn)[i];
                os << ")";
                push("compensator-q", "mean-shift", os.str(), norm2(*mn));
            } else {
                push("compensator-q", "mean-shift", "shift by the mean does not settle it",
                     norm2(*mn));
            }
        }
        if (dc == Verdict3::Undetermined && d != Verdict3::Undetermined) {
            DriftIntegrand h(mu, f);
            double a = std::max(f.support_start(), 1.0);
            auto ts = Checkpoints{a, 2.0, 24}.times();
            std::vector<Vec> g_vals;
            Vec acc(mu.dim, 0.0);
            double prev = a;
            std::vector<double> f_int;
            for (double t : ts) {
                acc = add_vec(acc, quad_drift_integral(h, prev, t));
                prev = t;
                g_vals.push_back(acc);
                f_int.push_back(f.signed_integral(t));
            }
            double sxx = 0.0, sx = 0.0;
            int n = static_cast<int>(ts.size());
            for (double x : f_int) {
                sx += x;
                sxx += x * x;
            }
            double det = n * sxx - sx * sx;
            if (std::abs(det) > 1e-12) {
                Vec q(mu.dim, 0.0);
                for (int i = 0; i < mu.dim; ++i) {
                    double sy = 0.0, sxy = 0.0;
                    for (int k = 0; k < n; ++k) {
                        sy += g_vals[k][i];
                        sxy += f_int[k] * g_vals[k][i];
                    }
                    q[i] = (n * sxy - sx * sy) / det;
                }
                Triplet shifted = Triplet::make(mu.A, mu.nu, add_vec(mu.gamma, scale_vec(q, -1.0)));
                auto sc = cond_drift_convergence(shifted, f);
                if (sc.verdict == ConvVerdict::Convergent) {
                    dc = Verdict3::Member;
                    push("compensator-q", "least-squares-shift", "fit from checkpoint drift",
                         norm2(q));
                }
            }
        }
    }

    if (dc == Verdict3::NonMember) {
        d = Verdict3::NonMember;
        d0 = Verdict3::NonMember;
    }
    if (d == Verdict3::NonMember) d0 = Verdict3::NonMember;
    return DomainVerdict::make(d0, d, dc, de, std::move(ev));
}

// ---------------------------------------------------------------------------
// sign sets

namespace {

std::vector<double> isolate_roots(const std::function<double(double)>& g, double lo, double hi,
                                  const std::vector<double>& extra_probes, std::size_t budget) {
    std::vector<double> grid;
    double glo = std::max(lo, 1e-9);
    const int per_octave = 64;
    double span_oct = std::log2(std::max(hi / glo, 2.0));
    auto n = static_cast<std::size_t>(std::ceil(per_octave * span_oct));
    if (n > budget) throw RootIsolationFailure("sign grid exceeds the evaluation budget");
    grid.push_back(lo);
    for (std::size_t i = 0; i <= n; ++i)
        grid.push_back(glo * std::pow(2.0, static_cast<double>(i) / per_octave));
    for (double p : extra_probes)
        if (p > lo && p < hi) grid.push_back(p);
    grid.push_back(hi);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<double> roots;
    double prev_x = grid.front();
    double prev_v = g(prev_x);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        double x = grid[i];
        if (x > hi) break;
        double v = g(x);
        if ((prev_v < 0.0) != (v < 0.0) && (prev_v != 0.0 || v != 0.0)) {
            double a = prev_x, b = x, fa = prev_v;
            for (int it = 0; it < 90; ++it) {
                double m = 0.5 * (a + b);
                double fm = g(m);
                if ((fa < 0.0) != (fm < 0.0))
                    b = m;
                else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push_back(0.5 * (a + b));
            if (roots.size() > budget) throw RootIsolationFailure("too many sign changes");
        }
        prev_x = x;
        prev_v = v;
    }
    return roots;
}

} // namespace

SignSets sign_sets(const DriftIntegrand& h, int j, double lo, double hi) {
    SignSets out;
    out.coord = j;
    double a = std::max(lo, h.f().support_start());

    if (h.identically_zero()) {
        out.zero = MaskSet({{a, hi}});
        out.plus = MaskSet(std::vector<Interval>{});
        out.minus = MaskSet(std::vector<Interval>{});
        return out;
    }

    std::vector<double> probes;
    if (auto law = h.mu().nu.e2_tail_law()) {
        double as = std::abs(law->scale);
        for (int m = 0; m <= 40; ++m) {
            double mm = static_cast<double>(m) * m * std::log(2.0);
            if (mm > 690.0) break;
            double nb = as * std::exp(mm);
            for (double mult = 0.9; mult < 8.0; mult *= 1.02)
                if (nb * mult > a && nb * mult < hi * 8.0) probes.push_back(nb * mult);
        }
    }

    DriftIntegrand captured = h;
    auto make_gen = [captured, j, probes](int want_sign) {
        return [captured, j, probes, want_sign](double glo, double ghi) {
            auto g = [&](double s) { return captured.eval_j(s, j); };
            double a2 = std::max(glo, captured.f().support_start());
            std::vector<Interval> segs;
            if (!(ghi > a2)) return segs;
            auto roots = isolate_roots(g, a2, ghi, probes, 1u << 20);
            std::vector<double> pts = {a2};
            pts.insert(pts.end(), roots.begin(), roots.end());
            pts.push_back(ghi);
            for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
                double mid = 0.5 * (pts[i] + pts[i + 1]);
                double v = g(mid);
                int sgn = v > 0.0 ? +1 : (v < 0.0 ? -1 : 0);
                if (sgn == want_sign && pts[i + 1] > pts[i]) segs.push_back({pts[i], pts[i + 1]});
            }
            return segs;
        };
    };
    out.plus = MaskSet(make_gen(+1), a);
    out.minus = MaskSet(make_gen(-1), a);
    out.zero = MaskSet(make_gen(0), a);
    out.plus.within(a, hi);
    out.minus.within(a, hi);
    return out;
}

// ---------------------------------------------------------------------------
// defeating mask

DefeatingMask build_defeating_mask(const Triplet& mu, const IntegrandFn& f1, double horizon) {
    auto cls = classify(mu, f1);
    if (cls.d != Verdict3::Member || cls.d0 != Verdict3::NonMember)
        throw HypothesisViolated("needs a law that is definable but not absolutely definable");

    DriftIntegrand h(mu, f1);
    int j = 0;
    if (auto law = mu.nu.e2_tail_law()) {
        double best = 0.0;
        for (int i = 0; i < mu.dim; ++i)
            if (std::abs(law->xi_bar[i]) > best) {
                best = std::abs(law->xi_bar[i]);
                j = i;
            }
    }
    auto ss = sign_sets(h, j, f1.support_start(), horizon);

    DefeatingMask out;
    out.coord = j;
    out.side = +1;
    double probe_hi = std::min(horizon, 1e5);
    double plus_len = 0.0, minus_len = 0.0;
    for (auto& s : ss.plus.within(f1.support_start(), probe_hi)) plus_len += s.length();
    for (auto& s : ss.minus.within(f1.support_start(), probe_hi)) minus_len += s.length();
    if (minus_len > 4.0 * plus_len) out.side = -1;
    MaskSet chosen = out.side > 0 ? ss.plus : ss.minus;
    std::ostringstream tag;
    tag << "sign:" << (out.side > 0 ? '+' : '-') << ":" << j;
    out.mask = chosen.tagged(tag.str());

    double a = f1.support_start();
    double prev = a;
    KahanSum acc;
    int steps = static_cast<int>(std::log2(std::max(horizon / a, 2.0)));
    bool exact = mu.nu.e2_tail_law() && f1.family() == IntegrandFamily::InvS && !f1.mask();
    for (double t : Checkpoints{a, 2.0, steps}.times()) {
        if (t > horizon * 1.0001) break;
        for (const auto& seg : out.mask.within(prev, t)) {
            double l = std::max(seg.lo, prev), r = std::min(seg.hi, t);
            if (r <= l) continue;
            if (exact)
                acc.add(e2_invs_drift_primitive(mu, j, l, r));
            else {
                auto g = [&](double s) { return h.eval_j(s, j); };
                acc.add(integrate_with_breaks(g, l, r, f1.breakpoints(l, r), 1e-10, 1e-8, 400000)
                            .value);
            }
        }
        prev = t;
        out.growth.emplace_back(t, acc.value());
    }
    return out;
}

// ---------------------------------------------------------------------------
// tail-defeat report

TailDefeatReport verify_tail_defeat(const Triplet& mu, const Checkpoints& cps) {
    TailDefeatReport rep;
    auto f1 = IntegrandFn::inv_s();
    auto cls = classify(mu, f1);
    if (cls.d != Verdict3::Member)
        throw HypothesisViolated("law is not definable for the reference integrand");

    int j = -1;
    double c0 = 0.0;
    if (auto law = mu.nu.e2_tail_law()) {
        for (int i = 0; i < mu.dim; ++i)
            if (std::abs(law->xi_bar[i] * law->scale) > c0) {
                c0 = std::abs(law->xi_bar[i] * law->scale);
                j = i;
            }
        if (j < 0 || c0 < 1e-15)
            throw HypothesisViolated("measure tail has no slow log component");
    } else {
        double lo = 0.0, hi = 0.0;
        int jj = 0;
        for (int i = 0; i < mu.dim; ++i) {
            double mn = 1e300, mx = 0.0;
            for (int k = 4; k <= 24; ++k) {
                double s = std::pow(2.0, k);
                double v = std::abs(mu.nu.signed_tail(s)[i]) * std::log(s);
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
            if (mx > hi) {
                hi = mx;
                lo = mn;
                jj = i;
            }
        }
        if (hi < 1e-15 || (hi - lo) > 0.2 * (hi + lo))
            throw HypothesisViolated("measure tail does not follow c / log s");
        j = jj;
        c0 = 0.5 * (hi + lo);
    }
    rep.coord = j;

    DriftIntegrand h(mu, f1);
    double horizon = cps.times().back();
    auto ss = sign_sets(h, j, 1.0, horizon);
    bool exact = static_cast<bool>(mu.nu.e2_tail_law());
    auto abs_drift_to = [&](double t) {
        double acc = 0.0;
        for (int side = 0; side < 2; ++side) {
            const MaskSet& m = side == 0 ? ss.plus : ss.minus;
            for (const auto& seg : m.within(1.0, t)) {
                double l = std::max(seg.lo, 1.0), r = std::min(seg.hi, t);
                if (r <= l) continue;
                double v = exact ? e2_invs_drift_primitive(mu, j, l, r)
                                 : integrate([&](double s) { return h.eval_j(s, j); }, l, r, 1e-10,
                                             1e-8, 400000)
                                       .value;
                acc += std::abs(v);
            }
        }
        return acc;
    };
    std::vector<double> lls, vals;
    for (double t : cps.times()) {
        if (t < 8.0) continue;
        double v = abs_drift_to(t);
        double ll = std::log(std::log(t));
        rep.ratio_table.emplace_back(t, v / ll);
        lls.push_back(ll);
        vals.push_back(v);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = static_cast<int>(lls.size());
    for (int k = 0; k < n; ++k) {
        sx += lls[k];
        sy += vals[k];
        sxx += lls[k] * lls[k];
        sxy += lls[k] * vals[k];
    }
    rep.fitted_c = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double last_ratio = rep.ratio_table.back().second;
    rep.ratio_within_tol = std::abs(last_ratio - rep.fitted_c) <= 0.15 * std::abs(rep.fitted_c);

    auto dm = build_defeating_mask(mu, f1, horizon);
    rep.mask = dm.mask;
    rep.side = dm.side;
    rep.coord = dm.coord;
    j = dm.coord;

    rep.q_grid = {0.0, c0, -c0, 2.0 * c0};
    {
        double qx = 0, qy = 0, qxx = 0, qxy = 0;
        int m = 0;
        double prev = 1.0, gacc = 0.0, lacc = 0.0;
        for (double t : cps.times()) {
            for (const auto& seg : rep.mask.within(prev, t)) {
                double l = std::max(seg.lo, prev), r = std::min(seg.hi, t);
                if (r <= l) continue;
                gacc += exact ? e2_invs_drift_primitive(mu, j, l, r)
                              : integrate([&](double s) { return h.eval_j(s, j); }, l, r).value;
                lacc += std::log(r / l);
            }
            prev = t;
            qx += lacc;
            qy += gacc;
            qxx += lacc * lacc;
            qxy += lacc * gacc;
            ++m;
        }
        double det = m * qxx - qx * qx;
        if (std::abs(det) > 1e-12) rep.q_grid.push_back((m * qxy - qx * qy) / det);
    }

    rep.all_q_divergent = true;
    for (double q : rep.q_grid) {
        std::vector<std::pair<double, double>> table;
        double prev = 1.0, gacc = 0.0;
        for (double t : cps.times()) {
            for (const auto& seg : rep.mask.within(prev, t)) {
                double l = std::max(seg.lo, prev), r = std::min(seg.hi, t);
                if (r <= l) continue;
                double dv = exact ? e2_invs_drift_primitive(mu, j, l, r)
                                  : integrate([&](double s) { return h.eval_j(s, j); }, l, r).value;
                gacc += dv - q * std::log(r / l);
            }
            prev = t;
            table.emplace_back(t, gacc);
        }
        int grow = 0;
        int nt = static_cast<int>(table.size());
        for (int k = std::max(1, nt - 8); k < nt; ++k)
            if (std::abs(table[k].second) > std::abs(table[k - 1].second) + 1e-9) ++grow;
        double net = std::abs(table.back().second) - std::abs(table[std::max(0, nt - 9)].second);
        if (!(grow >= 6 && net > 1e-6)) rep.all_q_divergent = false;
        rep.shifted_partials.push_back(std::move(table));
    }
    return rep;
}

} // namespace levydom
