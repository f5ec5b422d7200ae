#include "levydom/numerics.hpp"
#include "levydom/errors.hpp"

#include <algorithm>
#include <cmath>

namespace levydom {

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

Vec scale_vec(const Vec& a, double c) {
    Vec r(a);
    for (auto& x : r) x *= c;
    return r;
}

Vec add_vec(const Vec& a, const Vec& b) {
    Vec r(a);
    for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    return r;
}

SymMat SymMat::identity(int d) {
    SymMat m(d);
    for (int i = 0; i < d; ++i) m.at(i, i) = 1.0;
    return m;
}

double SymMat::trace() const {
    double t = 0.0;
    for (int i = 0; i < dim; ++i) t += at(i, i);
    return t;
}

double SymMat::quad_form(const Vec& z) const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) s += z[i] * at(i, j) * z[j];
    return s;
}

SymMat SymMat::scaled(double c) const {
    SymMat m(*this);
    for (auto& x : m.a) x *= c;
    return m;
}

bool SymMat::is_symmetric(double tol) const {
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j)
            if (std::abs(at(i, j) - at(j, i)) > tol) return false;
    return true;
}

double SymMat::min_eigenvalue() const {
    if (dim == 0) return 0.0;
    if (dim == 1) return at(0, 0);
    // cyclic Jacobi; dims here are tiny
    SymMat m(*this);
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < dim; ++p)
            for (int q = p + 1; q < dim; ++q) off += m.at(p, q) * m.at(p, q);
        if (off < 1e-30 * (1.0 + m.trace() * m.trace())) break;
        for (int p = 0; p < dim; ++p) {
            for (int q = p + 1; q < dim; ++q) {
                double apq = m.at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                double theta = (m.at(q, q) - m.at(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < dim; ++k) {
                    double mkp = m.at(k, p), mkq = m.at(k, q);
                    m.at(k, p) = c * mkp - s * mkq;
                    m.at(k, q) = s * mkp + c * mkq;
                }
                for (int k = 0; k < dim; ++k) {
                    double mpk = m.at(p, k), mqk = m.at(q, k);
                    m.at(p, k) = c * mpk - s * mqk;
                    m.at(q, k) = s * mpk + c * mqk;
                }
            }
        }
    }
    double mn = m.at(0, 0);
    for (int i = 1; i < dim; ++i) mn = std::min(mn, m.at(i, i));
    return mn;
}

namespace {

// Gauss 7 / Kronrod 15 nodes and weights on [-1,1].
constexpr double kNodes[8] = {
    0.000000000000000, 0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759, 0.991455371120813};
constexpr double kWeightK[8] = {
    0.209482141084728, 0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979, 0.022935322010529};
constexpr double kWeightG[4] = {
    0.417959183673469, 0.381830050505119, 0.279705391489277, 0.129484966168870};

struct PanelEst {
    double k15, err;
};

PanelEst g7k15(const std::function<double(double)>& f, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double fc = f(mid);
    double k15 = kWeightK[0] * fc;
    double g7 = kWeightG[0] * fc;
    for (int i = 1; i < 8; ++i) {
        double dx = half * kNodes[i];
        double y = f(mid + dx) + f(mid - dx);
        k15 += kWeightK[i] * y;
        if (i % 2 == 0) g7 += kWeightG[i / 2] * y;
    }
    k15 *= half;
    g7 *= half;
    double err = std::abs(k15 - g7);
    err = 200.0 * err * std::sqrt(std::max(err, 0.0));
    return {k15, std::min(err, std::abs(k15 - g7) * 200.0 + 1e-300)};
}

} // namespace

QuadResult integrate_with_breaks(const std::function<double(double)>& f, double a, double b,
                                 const std::vector<double>& breaks,
                                 double abs_tol, double rel_tol, std::size_t max_panels) {
    QuadResult out;
    if (!(b > a)) return out;
    std::vector<double> pts;
    pts.push_back(a);
    for (double x : breaks)
        if (x > a && x < b) pts.push_back(x);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    struct Seg {
        double a, b, val, err;
    };
    std::vector<Seg> stack;
    KahanSum total, toterr;
    std::size_t panels = 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        auto e = g7k15(f, pts[i], pts[i + 1]);
        stack.push_back({pts[i], pts[i + 1], e.k15, e.err});
        panels++;
    }
    // rough magnitude for the relative test
    double mag = 0.0;
    for (auto& s : stack) mag += std::abs(s.val);

    while (!stack.empty()) {
        Seg s = stack.back();
        stack.pop_back();
        double tol_here = std::max(abs_tol * (s.b - s.a) / std::max(b - a, 1e-300),
                                   rel_tol * mag * (s.b - s.a) / std::max(b - a, 1e-300));
        if (s.err <= tol_here || (s.b - s.a) < 1e-14 * (std::abs(s.a) + 1.0)) {
            total.add(s.val);
            toterr.add(s.err);
            continue;
        }
        if (panels >= max_panels)
            throw QuadratureFailure("adaptive quadrature: panel budget exhausted");
        double mid = 0.5 * (s.a + s.b);
        auto e1 = g7k15(f, s.a, mid);
        auto e2 = g7k15(f, mid, s.b);
        panels += 2;
        mag += std::abs(e1.k15) + std::abs(e2.k15) - std::abs(s.val);
        stack.push_back({s.a, mid, e1.k15, e1.err});
        stack.push_back({mid, s.b, e2.k15, e2.err});
    }
    out.value = total.value();
    out.error = toterr.value();
    out.evals = panels * 15;
    return out;
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol, double rel_tol, std::size_t max_panels) {
    return integrate_with_breaks(f, a, b, {}, abs_tol, rel_tol, max_panels);
}

QuadResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                 const std::function<double(double)>& tail_bound,
                                 double abs_tol, double rel_tol) {
    QuadResult acc;
    double lo = a;
    double hi = (a > 0) ? 2.0 * a : 1.0;
    KahanSum total;
    for (int k = 0; k < 4096; ++k) {
        auto r = integrate(f, lo, hi, abs_tol, rel_tol);
        total.add(r.value);
        acc.error += r.error;
        acc.evals += r.evals;
        double tb = tail_bound(hi);
        double scale = std::max(std::abs(total.value()), 1.0);
        if (tb <= std::max(abs_tol, 0.5 * rel_tol * scale)) {
            acc.error += tb;
            acc.value = total.value();
            return acc;
        }
        lo = hi;
        hi *= 2.0;
    }
    throw QuadratureFailure("integrate_to_infinity: tail bound never met");
}

double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          int scan_points, int refine_steps) {
    if (!(hi > lo)) return f(lo);
    double best_x = lo, best = f(lo);
    double fhi = f(hi);
    if (fhi > best) {
        best = fhi;
        best_x = hi;
    }
    double step = (hi - lo) / scan_points;
    for (int i = 1; i < scan_points; ++i) {
        double x = lo + i * step;
        double v = f(x);
        if (v > best) {
            best = v;
            best_x = x;
        }
    }
    double a = std::max(lo, best_x - step), b = std::min(hi, best_x + step);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < refine_steps; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    return std::max({best, f1, f2});
}

std::uint64_t CounterRng::mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

CounterRng CounterRng::substream(std::uint64_t seed, std::uint64_t index) {
    CounterRng r;
    r.key = mix(seed ^ mix(index + 0x632BE59BD9B4E019ULL));
    r.ctr = 0;
    return r;
}

double CounterRng::next_normal() {
    // Acklam's inverse normal CDF; relative error < 1.2e-9, refined by one
    // Halley step to full double precision.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00, 2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    double p = next_double();
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

double trigamma_tail(std::uint64_t m) {
    // direct sum to m + 2^16, then Euler-Maclaurin
    KahanSum s;
    std::uint64_t k_end = m + 65536;
    for (std::uint64_t k = m; k < k_end; ++k) s.add(1.0 / (static_cast<double>(k) * k));
    double K = static_cast<double>(k_end);
    s.add(1.0 / K + 1.0 / (2.0 * K * K) + 1.0 / (6.0 * K * K * K) -
          1.0 / (30.0 * K * K * K * K * K));
    return s.value();
}

} // namespace levydom
