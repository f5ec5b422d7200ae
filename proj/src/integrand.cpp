#include "levydom/integrand.hpp"
#include "levydom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>

namespace levydom {

// ---------------------------------------------------------------------------
// MaskSet

struct MaskSet::State {
    std::mutex m;
    std::vector<Interval> iv;
    double covered_to = 0.0;
    double start = 0.0;
    Generator gen; // null => explicit
    std::string tag;
};

MaskSet::MaskSet() : st_(std::make_shared<State>()) {
    st_->covered_to = std::numeric_limits<double>::infinity();
}

MaskSet::MaskSet(std::vector<Interval> iv) : st_(std::make_shared<State>()) {
    std::sort(iv.begin(), iv.end(), [](auto& a, auto& b) { return a.lo < b.lo; });
    for (std::size_t i = 0; i + 1 < iv.size(); ++i)
        if (iv[i].hi > iv[i + 1].lo + 1e-15)
            throw ConfigError("mask intervals overlap");
    st_->iv = std::move(iv);
    st_->covered_to = std::numeric_limits<double>::infinity();
    st_->start = st_->iv.empty() ? 0.0 : st_->iv.front().lo;
}

MaskSet::MaskSet(Generator gen, double start) : st_(std::make_shared<State>()) {
    st_->gen = std::move(gen);
    st_->start = start;
    st_->covered_to = start;
}

MaskSet MaskSet::parse(const std::string& spec) {
    std::string body = spec;
    if (body.rfind("mask:", 0) == 0) body = body.substr(5);
    std::vector<Interval> iv;
    std::stringstream ss(body);
    std::string part;
    while (std::getline(ss, part, ';')) {
        if (part.empty()) continue;
        auto comma = part.find(',');
        if (comma == std::string::npos) throw ConfigError("mask interval needs 'l,r': " + part);
        double l = std::stod(part.substr(0, comma));
        double r = std::stod(part.substr(comma + 1));
        if (!(r > l)) throw ConfigError("mask interval empty or reversed: " + part);
        iv.push_back({l, r});
    }
    return MaskSet(std::move(iv));
}

std::vector<Interval> MaskSet::within(double lo, double hi) const {
    if (!(hi > lo)) return {};
    {
        std::lock_guard<std::mutex> lk(st_->m);
        if (st_->gen && hi > st_->covered_to) {
            auto fresh = st_->gen(st_->covered_to, hi);
            for (auto& seg : fresh) {
                if (!(seg.hi > seg.lo)) continue;
                if (!st_->iv.empty() && std::abs(st_->iv.back().hi - seg.lo) < 1e-12 * (1.0 + std::abs(seg.lo)))
                    st_->iv.back().hi = seg.hi; // fuse across the materialization seam
                else
                    st_->iv.push_back(seg);
            }
            st_->covered_to = hi;
        }
    }
    std::vector<Interval> out;
    for (const auto& seg : st_->iv) {
        double l = std::max(seg.lo, lo), r = std::min(seg.hi, hi);
        if (r > l) out.push_back({l, r});
    }
    return out;
}

bool MaskSet::contains(double s) const {
    auto segs = within(s - 1e-12, s + 1e-9);
    for (auto& seg : segs)
        if (s >= seg.lo && s < seg.hi) return true;
    return false;
}

bool MaskSet::known_empty() const {
    std::lock_guard<std::mutex> lk(st_->m);
    return !st_->gen && st_->iv.empty();
}

bool MaskSet::lazy() const { return static_cast<bool>(st_->gen); }

double MaskSet::start() const { return st_->start; }

MaskSet MaskSet::intersect(const MaskSet& other) const {
    auto a = *this;
    auto b = other;
    if (!a.lazy() && !b.lazy()) {
        auto ia = a.within(-1e308, 1e308);
        auto ib = b.within(-1e308, 1e308);
        std::vector<Interval> out;
        std::size_t j = 0;
        for (const auto& s : ia) {
            while (j < ib.size() && ib[j].hi <= s.lo) ++j;
            for (std::size_t k = j; k < ib.size() && ib[k].lo < s.hi; ++k) {
                double l = std::max(s.lo, ib[k].lo), r = std::min(s.hi, ib[k].hi);
                if (r > l) out.push_back({l, r});
            }
        }
        return MaskSet(std::move(out));
    }
    double start = std::max(a.start(), b.start());
    return MaskSet(
        [a, b](double lo, double hi) {
            auto ia = a.within(lo, hi);
            auto ib = b.within(lo, hi);
            std::vector<Interval> out;
            for (const auto& s : ia)
                for (const auto& t : ib) {
                    double l = std::max(s.lo, t.lo), r = std::min(s.hi, t.hi);
                    if (r > l) out.push_back({l, r});
                }
            std::sort(out.begin(), out.end(), [](auto& x, auto& y) { return x.lo < y.lo; });
            return out;
        },
        start);
}

MaskSet MaskSet::tagged(std::string tag) const {
    MaskSet m(*this);
    // tags ride on the shared state; copies made after tagging keep it
    std::lock_guard<std::mutex> lk(m.st_->m);
    m.st_->tag = std::move(tag);
    return m;
}

const std::string& MaskSet::tag() const { return st_->tag; }

std::string MaskSet::to_string(double hi_cap) const {
    std::ostringstream os;
    os << "mask:";
    bool first = true;
    for (auto& seg : within(-1e308, hi_cap)) {
        if (!first) os << ";";
        first = false;
        os << seg.lo << "," << seg.hi;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// polynomial helpers

double poly_eval(const std::vector<double>& coef, double s) {
    double v = 0.0;
    for (std::size_t k = coef.size(); k-- > 0;) v = v * s + coef[k];
    return v;
}

std::vector<double> poly_antiderivative(const std::vector<double>& coef) {
    std::vector<double> out(coef.size() + 1, 0.0);
    for (std::size_t k = 0; k < coef.size(); ++k) out[k + 1] = coef[k] / static_cast<double>(k + 1);
    return out;
}

static std::vector<double> poly_derivative(const std::vector<double>& coef) {
    std::vector<double> out;
    for (std::size_t k = 1; k < coef.size(); ++k) out.push_back(coef[k] * static_cast<double>(k));
    return out;
}

static double bisect_root(const std::vector<double>& coef, double a, double b) {
    double fa = poly_eval(coef, a);
    for (int i = 0; i < 200; ++i) {
        double m = 0.5 * (a + b);
        double fm = poly_eval(coef, m);
        if (fm == 0.0) return m;
        if ((fa < 0) != (fm < 0))
            b = m;
        else {
            a = m;
            fa = fm;
        }
    }
    return 0.5 * (a + b);
}

std::vector<double> poly_roots_in(const std::vector<double>& coef, double lo, double hi) {
    // trim trailing zeros
    std::vector<double> c = coef;
    while (!c.empty() && c.back() == 0.0) c.pop_back();
    if (c.size() <= 1) return {};
    if (c.size() == 2) {
        double r = -c[0] / c[1];
        if (r > lo && r < hi) return {r};
        return {};
    }
    auto crit = poly_roots_in(poly_derivative(c), lo, hi);
    std::vector<double> pts = {lo};
    pts.insert(pts.end(), crit.begin(), crit.end());
    pts.push_back(hi);
    std::vector<double> roots;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double fa = poly_eval(c, pts[i]), fb = poly_eval(c, pts[i + 1]);
        if (fa == 0.0) roots.push_back(pts[i]);
        if ((fa < 0) != (fb < 0)) roots.push_back(bisect_root(c, pts[i], pts[i + 1]));
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [&](double a, double b) { return std::abs(a - b) < 1e-13 * (1 + std::abs(a)); }),
                roots.end());
    std::vector<double> inside;
    for (double r : roots)
        if (r > lo && r < hi) inside.push_back(r);
    return inside;
}

// ---------------------------------------------------------------------------
// decaying exponential primitives

double exp_power_tail_bound(double kappa, double alpha, double T) {
    if (T <= 0) T = 1e-6;
    double bound = 0.0;
    double lo = T;
    for (int k = 0; k < 2048; ++k) {
        double hi = 2.0 * lo;
        double term = (hi - lo) * std::exp(-kappa * std::pow(lo, alpha));
        bound += term;
        if (term < 1e-300 || term < 1e-18 * bound) break;
        lo = hi;
    }
    return bound;
}

double exp_power_integral(double kappa, double alpha, double a, double b) {
    if (!(b > a)) return 0.0;
    // find a cut beyond which the tail is negligible
    double cut = std::max(1.0, a);
    while (exp_power_tail_bound(kappa, alpha, cut) > 1e-16 && cut < 1e12) cut *= 2.0;
    double hi = std::min(b, cut);
    if (!(hi > a)) return 0.0;
    auto f = [&](double s) { return std::exp(-kappa * std::pow(s, alpha)); };
    double v = integrate(f, a, hi, 1e-13, 1e-12).value;
    if (b > cut) v += 0.0; // remainder below 1e-16 by construction
    return v;
}

// ---------------------------------------------------------------------------
// IntegrandFn factories

IntegrandFn IntegrandFn::power_decay(double alpha) {
    if (!(alpha > 0.0) || !(alpha < 2.0))
        throw ConfigError("power decay exponent must lie in (0,2)");
    IntegrandFn f;
    f.family_ = IntegrandFamily::PowerDecay;
    f.alpha_ = alpha;
    return f;
}

IntegrandFn IntegrandFn::exp_decay(double c, double alpha) {
    if (!(c > 0.0) || !(alpha > 0.0)) throw ConfigError("exp decay needs c>0, alpha>0");
    IntegrandFn f;
    f.family_ = IntegrandFamily::ExpDecay;
    f.c_ = c;
    f.alpha_ = alpha;
    return f;
}

IntegrandFn IntegrandFn::inv_s() {
    IntegrandFn f;
    f.family_ = IntegrandFamily::InvS;
    return f;
}

IntegrandFn IntegrandFn::alternating_inv_s() {
    IntegrandFn f;
    f.family_ = IntegrandFamily::AltInvS;
    return f;
}

IntegrandFn IntegrandFn::table(std::vector<PolyPiece> pieces) {
    std::sort(pieces.begin(), pieces.end(), [](auto& a, auto& b) { return a.lo < b.lo; });
    for (auto& p : pieces) {
        if (!(p.hi > p.lo) || p.lo < 0.0) throw ConfigError("table piece interval invalid");
        if (p.coef.empty()) throw ConfigError("table piece needs coefficients");
    }
    for (std::size_t i = 0; i + 1 < pieces.size(); ++i)
        if (pieces[i].hi > pieces[i + 1].lo + 1e-15) throw ConfigError("table pieces overlap");
    IntegrandFn f;
    f.family_ = IntegrandFamily::Table;
    f.pieces_ = std::move(pieces);
    return f;
}

static IntegrandFn parse_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open table file: " + path);
    std::vector<PolyPiece> pieces;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) {
            if (!cell.empty()) vals.push_back(std::stod(cell));
        }
        if (vals.size() < 3) throw ConfigError("table row needs lo,hi,c0[,c1,...]: " + line);
        PolyPiece p;
        p.lo = vals[0];
        p.hi = vals[1];
        p.coef.assign(vals.begin() + 2, vals.end());
        pieces.push_back(std::move(p));
    }
    return IntegrandFn::table(std::move(pieces));
}

IntegrandFn IntegrandFn::parse(const std::string& spec) {
    auto mask_pos = spec.find("|mask:");
    std::string base = spec.substr(0, mask_pos);
    IntegrandFn f;
    if (base == "invs")
        f = inv_s();
    else if (base == "alt-invs")
        f = alternating_inv_s();
    else if (base.rfind("pow:", 0) == 0)
        f = power_decay(std::stod(base.substr(4)));
    else if (base.rfind("exp:", 0) == 0) {
        auto rest = base.substr(4);
        auto colon = rest.find(':');
        if (colon == std::string::npos) throw ConfigError("exp spec needs exp:C:ALPHA");
        f = exp_decay(std::stod(rest.substr(0, colon)), std::stod(rest.substr(colon + 1)));
    } else if (base.rfind("table:", 0) == 0)
        f = parse_table_file(base.substr(6));
    else
        throw ConfigError("unknown integrand spec: " + spec);
    if (mask_pos != std::string::npos) f = f.with_mask(MaskSet::parse(spec.substr(mask_pos + 1)));
    return f;
}

std::string IntegrandFn::to_string() const {
    std::ostringstream os;
    switch (family_) {
        case IntegrandFamily::InvS: os << "invs"; break;
        case IntegrandFamily::AltInvS: os << "alt-invs"; break;
        case IntegrandFamily::PowerDecay: os << "pow:" << alpha_; break;
        case IntegrandFamily::ExpDecay: os << "exp:" << c_ << ":" << alpha_; break;
        case IntegrandFamily::Table: os << "table[" << pieces_.size() << " pieces]"; break;
    }
    if (mask_) os << "|masked";
    return os.str();
}

IntegrandFn IntegrandFn::with_mask(const MaskSet& D) const {
    IntegrandFn f(*this);
    f.mask_ = mask_ ? mask_->intersect(D) : D;
    return f;
}

IntegrandFn apply_mask(const IntegrandFn& f, const MaskSet& D) { return f.with_mask(D); }

// ---------------------------------------------------------------------------
// evaluation

double IntegrandFn::support_start() const {
    double a = 0.0;
    switch (family_) {
        case IntegrandFamily::InvS:
        case IntegrandFamily::AltInvS:
        case IntegrandFamily::PowerDecay: a = 1.0; break;
        case IntegrandFamily::ExpDecay: a = 0.0; break;
        case IntegrandFamily::Table: a = pieces_.empty() ? 0.0 : pieces_.front().lo; break;
    }
    if (mask_ && !mask_->lazy()) {
        auto segs = mask_->within(a, 1e308);
        if (segs.empty()) return a;
        return std::max(a, segs.front().lo);
    }
    return a;
}

std::optional<double> IntegrandFn::support_end() const {
    if (family_ == IntegrandFamily::Table)
        return pieces_.empty() ? 0.0 : pieces_.back().hi;
    if (mask_ && !mask_->lazy()) {
        auto segs = mask_->within(-1e308, 1e308);
        if (segs.empty()) return support_start();
        if (segs.back().hi < 1e307) return segs.back().hi;
    }
    return std::nullopt;
}

double IntegrandFn::eval_unmasked(double s) const {
    switch (family_) {
        case IntegrandFamily::InvS: return s >= 1.0 ? 1.0 / s : 0.0;
        case IntegrandFamily::AltInvS: {
            if (s < 1.0) return 0.0;
            auto n = static_cast<std::uint64_t>(std::floor(s));
            return (n % 2 == 1 ? 1.0 : -1.0) / s;
        }
        case IntegrandFamily::PowerDecay: return s >= 1.0 ? std::pow(s, -1.0 / alpha_) : 0.0;
        case IntegrandFamily::ExpDecay: return std::exp(-c_ * std::pow(s, alpha_));
        case IntegrandFamily::Table: {
            for (const auto& p : pieces_)
                if (s >= p.lo && s < p.hi) return poly_eval(p.coef, s);
            return 0.0;
        }
    }
    return 0.0;
}

double IntegrandFn::eval(double s) const {
    if (s < 0.0) return 0.0;
    if (mask_ && !mask_->contains(s)) return 0.0;
    return eval_unmasked(s);
}

bool IntegrandFn::single_signed() const {
    switch (family_) {
        case IntegrandFamily::AltInvS: return false;
        case IntegrandFamily::Table: {
            for (const auto& p : pieces_) {
                if (!poly_roots_in(p.coef, p.lo, p.hi).empty()) return false;
                if (poly_eval(p.coef, 0.5 * (p.lo + p.hi)) < 0.0) return false;
            }
            return true;
        }
        default: return true;
    }
}

// ---------------------------------------------------------------------------
// primitives (integrals from 0 to t of the unmasked function)

double IntegrandFn::unmasked_primitive_sq(double t) const {
    switch (family_) {
        case IntegrandFamily::InvS:
        case IntegrandFamily::AltInvS: return t <= 1.0 ? 0.0 : 1.0 - 1.0 / t;
        case IntegrandFamily::PowerDecay: {
            if (t <= 1.0) return 0.0;
            double p = 2.0 / alpha_;
            return (1.0 - std::pow(t, 1.0 - p)) / (p - 1.0);
        }
        case IntegrandFamily::ExpDecay: return exp_power_integral(2.0 * c_, alpha_, 0.0, t);
        case IntegrandFamily::Table: {
            double acc = 0.0;
            for (const auto& p : pieces_) {
                if (t <= p.lo) break;
                double hi = std::min(t, p.hi);
                // square the polynomial
                std::vector<double> sq(2 * p.coef.size() - 1, 0.0);
                for (std::size_t i = 0; i < p.coef.size(); ++i)
                    for (std::size_t j = 0; j < p.coef.size(); ++j) sq[i + j] += p.coef[i] * p.coef[j];
                auto F = poly_antiderivative(sq);
                acc += poly_eval(F, hi) - poly_eval(F, p.lo);
            }
            return acc;
        }
    }
    return 0.0;
}

// signed integral of one table piece over [a,b] split at interior roots
static double table_abs_piece(const PolyPiece& p, double a, double b) {
    auto roots = poly_roots_in(p.coef, a, b);
    std::vector<double> pts = {a};
    pts.insert(pts.end(), roots.begin(), roots.end());
    pts.push_back(b);
    auto F = poly_antiderivative(p.coef);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        acc += std::abs(poly_eval(F, pts[i + 1]) - poly_eval(F, pts[i]));
    return acc;
}

double IntegrandFn::unmasked_primitive_abs(double t) const {
    switch (family_) {
        case IntegrandFamily::InvS:
        case IntegrandFamily::AltInvS: return t <= 1.0 ? 0.0 : std::log(t);
        case IntegrandFamily::PowerDecay: {
            if (t <= 1.0) return 0.0;
            double p = 1.0 / alpha_;
            if (std::abs(p - 1.0) < 1e-14) return std::log(t);
            return (std::pow(t, 1.0 - p) - 1.0) / (1.0 - p);
        }
        case IntegrandFamily::ExpDecay: return exp_power_integral(c_, alpha_, 0.0, t);
        case IntegrandFamily::Table: {
            double acc = 0.0;
            for (const auto& p : pieces_) {
                if (t <= p.lo) break;
                acc += table_abs_piece(p, p.lo, std::min(t, p.hi));
            }
            return acc;
        }
    }
    return 0.0;
}

namespace {
// log of prod_{i=1..M} (2i)/(2i-1) and prod_{i=1..M} (2i+1)/(2i)
double lnprod_up(std::uint64_t M) {
    if (M == 0) return 0.0;
    double m = static_cast<double>(M);
    return 2.0 * m * std::log(2.0) + 2.0 * std::lgamma(m + 1.0) - std::lgamma(2.0 * m + 1.0);
}
double lnprod_down(std::uint64_t M) {
    if (M == 0) return 0.0;
    double m = static_cast<double>(M);
    return std::lgamma(2.0 * m + 2.0) - 2.0 * m * std::log(2.0) - 2.0 * std::lgamma(m + 1.0);
}
// integral of the alternating 1/s block function over [1, n] for integer n
double alt_partial(std::uint64_t n) {
    std::uint64_t m1 = n / 2;       // odd j in [1, n-1]
    std::uint64_t m2 = (n - 1) / 2; // even j in [1, n-1]
    return lnprod_up(m1) - lnprod_down(m2);
}
} // namespace

double IntegrandFn::unmasked_primitive_signed(double t) const {
    switch (family_) {
        case IntegrandFamily::InvS:
        case IntegrandFamily::PowerDecay:
        case IntegrandFamily::ExpDecay: return unmasked_primitive_abs(t);
        case IntegrandFamily::AltInvS: {
            if (t <= 1.0) return 0.0;
            auto n = static_cast<std::uint64_t>(std::floor(t));
            double base = alt_partial(n);
            double sign = (n % 2 == 1) ? 1.0 : -1.0;
            return base + sign * (std::log(t) - std::log(static_cast<double>(n)));
        }
        case IntegrandFamily::Table: {
            double acc = 0.0;
            for (const auto& p : pieces_) {
                if (t <= p.lo) break;
                auto F = poly_antiderivative(p.coef);
                acc += poly_eval(F, std::min(t, p.hi)) - poly_eval(F, p.lo);
            }
            return acc;
        }
    }
    return 0.0;
}

double IntegrandFn::unmasked_abs_above(double theta, double t) const {
    if (theta <= 0.0) return unmasked_primitive_abs(t);
    switch (family_) {
        case IntegrandFamily::InvS:
        case IntegrandFamily::AltInvS: {
            if (theta >= 1.0) return 0.0;
            double u = std::min(t, 1.0 / theta);
            return u <= 1.0 ? 0.0 : std::log(u);
        }
        case IntegrandFamily::PowerDecay: {
            if (theta >= 1.0) return 0.0;
            double u = std::min(t, std::pow(theta, -alpha_));
            return u <= 1.0 ? 0.0 : unmasked_primitive_abs(u);
        }
        case IntegrandFamily::ExpDecay: {
            if (theta >= 1.0) return 0.0;
            double s_theta = std::pow(-std::log(theta) / c_, 1.0 / alpha_);
            return exp_power_integral(c_, alpha_, 0.0, std::min(t, s_theta));
        }
        case IntegrandFamily::Table: {
            double acc = 0.0;
            for (const auto& p : pieces_) {
                if (t <= p.lo) break;
                double hi = std::min(t, p.hi);
                // split at |p| = theta crossings
                std::vector<double> pts = {p.lo, hi};
                for (double shift : {theta, -theta}) {
                    auto c = p.coef;
                    c[0] -= shift;
                    auto r = poly_roots_in(c, p.lo, hi);
                    pts.insert(pts.end(), r.begin(), r.end());
                }
                std::sort(pts.begin(), pts.end());
                for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
                    double mid = 0.5 * (pts[i] + pts[i + 1]);
                    if (std::abs(poly_eval(p.coef, mid)) > theta)
                        acc += table_abs_piece(p, pts[i], pts[i + 1]);
                }
            }
            return acc;
        }
    }
    return 0.0;
}

double IntegrandFn::unmasked_sq_above(double theta, double t) const {
    if (theta <= 0.0) return unmasked_primitive_sq(t);
    switch (family_) {
        case IntegrandFamily::InvS:
        case IntegrandFamily::AltInvS: {
            if (theta >= 1.0) return 0.0;
            double u = std::min(t, 1.0 / theta);
            return u <= 1.0 ? 0.0 : 1.0 - 1.0 / u;
        }
        case IntegrandFamily::PowerDecay: {
            if (theta >= 1.0) return 0.0;
            double u = std::min(t, std::pow(theta, -alpha_));
            return u <= 1.0 ? 0.0 : unmasked_primitive_sq(u);
        }
        case IntegrandFamily::ExpDecay: {
            if (theta >= 1.0) return 0.0;
            double s_theta = std::pow(-std::log(theta) / c_, 1.0 / alpha_);
            return exp_power_integral(2.0 * c_, alpha_, 0.0, std::min(t, s_theta));
        }
        case IntegrandFamily::Table: {
            double acc = 0.0;
            for (const auto& p : pieces_) {
                if (t <= p.lo) break;
                double hi = std::min(t, p.hi);
                std::vector<double> pts = {p.lo, hi};
                for (double shift : {theta, -theta}) {
                    auto c = p.coef;
                    c[0] -= shift;
                    auto r = poly_roots_in(c, p.lo, hi);
                    pts.insert(pts.end(), r.begin(), r.end());
                }
                std::sort(pts.begin(), pts.end());
                std::vector<double> sq(2 * p.coef.size() - 1, 0.0);
                for (std::size_t i = 0; i < p.coef.size(); ++i)
                    for (std::size_t j = 0; j < p.coef.size(); ++j) sq[i + j] += p.coef[i] * p.coef[j];
                auto F = poly_antiderivative(sq);
                for (std::size_t i = 0; i + 1 < pts.size(); ++i)
                    if (std::abs(poly_eval(p.coef, 0.5 * (pts[i] + pts[i + 1]))) > theta)
                        acc += poly_eval(F, pts[i + 1]) - poly_eval(F, pts[i]);
            }
            return acc;
        }
    }
    return 0.0;
}

double IntegrandFn::unmasked_time_above(double theta, double t) const {
    if (theta <= 0.0) {
        // measure of the support up to t
        switch (family_) {
            case IntegrandFamily::ExpDecay: return t;
            case IntegrandFamily::Table: {
                double acc = 0.0;
                for (const auto& p : pieces_)
                    if (t > p.lo) acc += std::min(t, p.hi) - p.lo;
                return acc;
            }
            default: return std::max(0.0, t - 1.0);
        }
    }
    switch (family_) {
        case IntegrandFamily::InvS:
        case IntegrandFamily::AltInvS: {
            if (theta >= 1.0) return 0.0;
            return std::max(0.0, std::min(t, 1.0 / theta) - 1.0);
        }
        case IntegrandFamily::PowerDecay: {
            if (theta >= 1.0) return 0.0;
            return std::max(0.0, std::min(t, std::pow(theta, -alpha_)) - 1.0);
        }
        case IntegrandFamily::ExpDecay: {
            if (theta >= 1.0) return 0.0;
            double s_theta = std::pow(-std::log(theta) / c_, 1.0 / alpha_);
            return std::min(t, s_theta);
        }
        case IntegrandFamily::Table: {
            double acc = 0.0;
            for (const auto& p : pieces_) {
                if (t <= p.lo) break;
                double hi = std::min(t, p.hi);
                std::vector<double> pts = {p.lo, hi};
                for (double shift : {theta, -theta}) {
                    auto c = p.coef;
                    c[0] -= shift;
                    auto r = poly_roots_in(c, p.lo, hi);
                    pts.insert(pts.end(), r.begin(), r.end());
                }
                std::sort(pts.begin(), pts.end());
                for (std::size_t i = 0; i + 1 < pts.size(); ++i)
                    if (std::abs(poly_eval(p.coef, 0.5 * (pts[i] + pts[i + 1]))) > theta)
                        acc += pts[i + 1] - pts[i];
            }
            return acc;
        }
    }
    return 0.0;
}

double IntegrandFn::masked_sum(double t, const std::function<double(double, double)>& seg) const {
    if (!mask_) return seg(0.0, t);
    double acc = 0.0;
    for (const auto& iv : mask_->within(0.0, t)) acc += seg(iv.lo, std::min(iv.hi, t));
    return acc;
}

double IntegrandFn::sq_integral(double t) const {
    return masked_sum(t, [&](double l, double r) {
        return unmasked_primitive_sq(r) - unmasked_primitive_sq(l);
    });
}

double IntegrandFn::sq_total() const {
    if (family_ == IntegrandFamily::Table)
        return sq_integral(pieces_.empty() ? 0.0 : pieces_.back().hi);
    double base;
    switch (family_) {
        case IntegrandFamily::InvS:
        case IntegrandFamily::AltInvS: base = 1.0; break;
        case IntegrandFamily::PowerDecay: base = 1.0 / (2.0 / alpha_ - 1.0); break;
        default: base = exp_power_integral(2.0 * c_, alpha_, 0.0, 1e12); break;
    }
    if (!mask_) return base;
    if (!mask_->lazy() && support_end()) return sq_integral(*support_end());
    // masked total: materialized part plus the unmasked tail as an upper bound
    const double horizon = 1e9;
    return sq_integral(horizon) + (base - unmasked_primitive_sq(horizon));
}

double IntegrandFn::abs_integral(double t) const {
    return masked_sum(t, [&](double l, double r) {
        return unmasked_primitive_abs(r) - unmasked_primitive_abs(l);
    });
}

std::optional<double> IntegrandFn::abs_total() const {
    if (family_ == IntegrandFamily::Table)
        return abs_integral(pieces_.empty() ? 0.0 : pieces_.back().hi);
    if (mask_ && !mask_->lazy() && support_end()) return abs_integral(*support_end());
    std::optional<double> base;
    switch (family_) {
        case IntegrandFamily::InvS:
        case IntegrandFamily::AltInvS: break; // log divergence
        case IntegrandFamily::PowerDecay:
            if (alpha_ < 1.0) base = alpha_ / (1.0 - alpha_);
            break;
        default: base = exp_power_integral(c_, alpha_, 0.0, 1e12); break;
    }
    if (!base) return std::nullopt; // masked-by-lazy-set log families stay unresolved here
    if (!mask_) return base;
    const double horizon = 1e9;
    return abs_integral(horizon) + (*base - unmasked_primitive_abs(horizon));
}

double IntegrandFn::signed_integral(double t) const {
    return masked_sum(t, [&](double l, double r) {
        return unmasked_primitive_signed(r) - unmasked_primitive_signed(l);
    });
}

std::optional<double> IntegrandFn::signed_total() const {
    if (mask_) {
        if (!mask_->lazy() && support_end()) return signed_integral(*support_end());
        return std::nullopt;
    }
    switch (family_) {
        case IntegrandFamily::AltInvS: return std::log(M_PI / 2.0);
        case IntegrandFamily::PowerDecay:
            if (alpha_ < 1.0) return alpha_ / (1.0 - alpha_);
            return std::nullopt;
        case IntegrandFamily::ExpDecay: return exp_power_integral(c_, alpha_, 0.0, 1e12);
        case IntegrandFamily::Table: return signed_integral(pieces_.empty() ? 0.0 : pieces_.back().hi);
        default: return std::nullopt;
    }
}

double IntegrandFn::abs_integral_above(double theta, double t) const {
    return masked_sum(t, [&](double l, double r) {
        return unmasked_abs_above(theta, r) - unmasked_abs_above(theta, l);
    });
}

double IntegrandFn::sq_integral_above(double theta, double t) const {
    return masked_sum(t, [&](double l, double r) {
        return unmasked_sq_above(theta, r) - unmasked_sq_above(theta, l);
    });
}

double IntegrandFn::time_above(double theta, double t) const {
    return masked_sum(t, [&](double l, double r) {
        return unmasked_time_above(theta, r) - unmasked_time_above(theta, l);
    });
}

std::vector<double> IntegrandFn::breakpoints(double lo, double hi) const {
    std::vector<double> pts;
    switch (family_) {
        case IntegrandFamily::InvS:
        case IntegrandFamily::PowerDecay:
            if (1.0 > lo && 1.0 < hi) pts.push_back(1.0);
            break;
        case IntegrandFamily::ExpDecay: break;
        case IntegrandFamily::AltInvS: {
            double count = hi - lo;
            if (count > (1 << 22))
                throw QuadratureFailure("alternating integrand: breakpoint window too wide");
            for (double n = std::max(1.0, std::ceil(lo)); n < hi; n += 1.0) pts.push_back(n);
            break;
        }
        case IntegrandFamily::Table:
            for (const auto& p : pieces_) {
                if (p.lo > lo && p.lo < hi) pts.push_back(p.lo);
                if (p.hi > lo && p.hi < hi) pts.push_back(p.hi);
            }
            break;
    }
    if (mask_) {
        for (const auto& seg : mask_->within(lo, hi)) {
            if (seg.lo > lo && seg.lo < hi) pts.push_back(seg.lo);
            if (seg.hi > lo && seg.hi < hi) pts.push_back(seg.hi);
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

// ---------------------------------------------------------------------------
// domination

static bool same_params(const IntegrandFn& a, const IntegrandFn& b) {
    if (a.family() != b.family()) return false;
    switch (a.family()) {
        case IntegrandFamily::PowerDecay: return a.param_alpha() == b.param_alpha();
        case IntegrandFamily::ExpDecay:
            return a.param_alpha() == b.param_alpha() && a.param_c() == b.param_c();
        case IntegrandFamily::Table: return false; // compared on the grid
        default: return true;
    }
}

bool dominates(const IntegrandFn& f1, const IntegrandFn& f2, double lo, double hi,
               int grid_per_unit_log) {
    const bool base_modulus_equal =
        (f1.family() == IntegrandFamily::InvS || f1.family() == IntegrandFamily::AltInvS) &&
        (f2.family() == IntegrandFamily::InvS || f2.family() == IntegrandFamily::AltInvS);

    // exact structural cases: identical base (or equal-modulus base) where f2
    // carries at least the mask of f1
    if ((same_params(f1, f2) || base_modulus_equal) && !f1.mask()) return true;

    if (f1.family() == IntegrandFamily::PowerDecay && f2.family() == IntegrandFamily::PowerDecay &&
        !f1.mask() && f2.param_alpha() <= f1.param_alpha())
        return true;
    if (f1.family() == IntegrandFamily::ExpDecay && f2.family() == IntegrandFamily::ExpDecay &&
        !f1.mask() && f2.param_alpha() == f1.param_alpha() && f2.param_c() >= f1.param_c())
        return true;

    // grid check
    std::vector<double> pts = f1.breakpoints(lo, hi);
    auto b2 = f2.breakpoints(lo, hi);
    pts.insert(pts.end(), b2.begin(), b2.end());
    pts.push_back(lo);
    pts.push_back(hi);
    double glo = std::max(lo, 1e-9);
    int n = static_cast<int>(std::ceil(grid_per_unit_log * std::max(1.0, std::log(hi / glo))));
    n = std::min(n, 1 << 22);
    for (int i = 0; i <= n; ++i) {
        double x = glo * std::pow(hi / glo, static_cast<double>(i) / n);
        pts.push_back(x);
    }
    if (lo < glo)
        for (int i = 0; i <= 64; ++i) pts.push_back(lo + (glo - lo) * i / 64.0);
    std::sort(pts.begin(), pts.end());
    for (double s : pts) {
        if (s < lo || s > hi) continue;
        if (std::abs(f2.eval(s)) > std::abs(f1.eval(s)) + 1e-12) return false;
    }
    return true;
}

} // namespace levydom
