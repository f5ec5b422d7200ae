#include "levydom/block_coeffs.hpp"
#include "levydom/numerics.hpp"

#include <bit>
#include <cmath>
#include <mutex>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace levydom::e2 {

namespace {

constexpr double kLn2 = 0.6931471805599453;

inline int isqrt_int(int x) {
    int r = static_cast<int>(std::sqrt(static_cast<double>(x)));
    while ((r + 1) * (r + 1) <= x) ++r;
    while (r * r > x) --r;
    return r;
}

// interior weight 1/ln p - 1/ln(p+1), cancellation-free
inline double interior_weight(double p) {
    return std::log1p(1.0 / p) / (std::log(p) * std::log(p + 1.0));
}

inline double boundary_weight(double p) { return 1.0 / std::log(p) + 1.0 / std::log(p + 1.0); }

inline int parity_sign(int m) { return (m % 2 == 1) ? +1 : -1; }

// log of 2^{m^2} and of 2^{m^2}+1
inline double log_boundary(int m) { return static_cast<double>(m) * m * kLn2; }
inline double log_boundary_plus1(int m) {
    double mm = static_cast<double>(m) * m;
    double corr = (mm * kLn2 < 700.0) ? std::log1p(std::exp(-mm * kLn2)) : 0.0;
    return mm * kLn2 + corr;
}

} // namespace

int block_of(std::uint64_t n) {
    int l2 = 63 - std::countl_zero(n);
    return isqrt_int(l2);
}

bool is_boundary(std::uint64_t n) {
    if (!std::has_single_bit(n)) return false;
    int l2 = 63 - std::countl_zero(n);
    int m = isqrt_int(l2);
    return m * m == l2;
}

CoeffPair coeff(std::uint64_t n) {
    if (n < 2) return {};
    int m = block_of(n);
    double p = static_cast<double>(n);
    if (is_boundary(n)) {
        double w = boundary_weight(p) / p;
        if (m % 2 == 0) return {w, 0.0};
        return {0.0, w};
    }
    double w = interior_weight(p) / p;
    if (m % 2 == 1) return {w, 0.0};
    return {0.0, w};
}

double signed_term(std::uint64_t p) {
    if (p < 2) return 0.0;
    int m = block_of(p);
    if (is_boundary(p)) return -parity_sign(m) * boundary_weight(static_cast<double>(p));
    return parity_sign(m) * interior_weight(static_cast<double>(p));
}

double abs_term(std::uint64_t p) {
    if (p < 2) return 0.0;
    if (is_boundary(p)) return boundary_weight(static_cast<double>(p));
    return interior_weight(static_cast<double>(p));
}

double tail_sum(std::uint64_t k) {
    if (k < 2) k = 2;
    int m = block_of(k);
    double acc = 0.0;
    double lo = static_cast<double>(k);
    if (is_boundary(k)) {
        acc += -parity_sign(m) * boundary_weight(lo);
        lo += 1.0;
    }
    // interior of the current block telescopes to its end
    double log_end = log_boundary(m + 1);
    if (std::log(lo) < log_end - 1e-15) acc += parity_sign(m) * (1.0 / std::log(lo) - 1.0 / log_end);
    // subsequent blocks, then the exact telescoped remainder
    const int extra = 40;
    for (int mm = m + 1; mm <= m + extra; ++mm) {
        double l0 = log_boundary(mm), l0p = log_boundary_plus1(mm), l1 = log_boundary(mm + 1);
        int eps = parity_sign(mm);
        acc += -eps * (1.0 / l0 + 1.0 / l0p) + eps * (1.0 / l0p - 1.0 / l1);
    }
    int m_rest = m + extra + 1;
    acc += -parity_sign(m_rest) * (1.0 / log_boundary(m_rest));
    return acc;
}

double abs_tail(std::uint64_t k) {
    if (k < 2) k = 2;
    int m = block_of(k);
    double acc = 0.0;
    double lo = static_cast<double>(k);
    if (is_boundary(k)) {
        acc += boundary_weight(lo);
        lo += 1.0;
    }
    double log_end = log_boundary(m + 1);
    if (std::log(lo) < log_end - 1e-15) acc += 1.0 / std::log(lo) - 1.0 / log_end;
    const int extra = 40;
    for (int mm = m + 1; mm <= m + extra; ++mm) {
        double l0 = log_boundary(mm), l0p = log_boundary_plus1(mm), l1 = log_boundary(mm + 1);
        acc += 1.0 / l0 + 2.0 / l0p - 1.0 / l1;
    }
    // remainder over blocks beyond: telescoped part plus 2/(m^2 ln 2) summed exactly
    std::uint64_t m_rest = static_cast<std::uint64_t>(m) + extra + 1;
    acc += 1.0 / log_boundary(static_cast<int>(m_rest));
    acc += (2.0 / kLn2) * trigamma_tail(m_rest);
    return acc;
}

namespace {

template <class TermFn>
double chunked_sum(std::uint64_t lo, std::uint64_t hi, const TermFn& term, bool parallel) {
    // fixed chunking; per-chunk Kahan; in-order combine => thread-count independent
    const std::uint64_t chunk = 1u << 20;
    if (hi < lo) return 0.0;
    std::uint64_t n_chunks = (hi - lo) / chunk + 1;
    std::vector<double> partial(n_chunks, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel && n_chunks > 2)
#endif
    for (std::int64_t ci = 0; ci < static_cast<std::int64_t>(n_chunks); ++ci) {
        std::uint64_t a = lo + static_cast<std::uint64_t>(ci) * chunk;
        std::uint64_t b = std::min(hi, a + chunk - 1);
        KahanSum s;
        for (std::uint64_t p = a; p <= b; ++p) s.add(term(p));
        partial[static_cast<std::size_t>(ci)] = s.value();
    }
    KahanSum total;
    for (double v : partial) total.add(v);
    return total.value();
}

double streamed_signed_term(std::uint64_t p) {
    auto c = coeff(p);
    double pd = static_cast<double>(p);
    return pd * c.a_n - pd * c.a_minus_n;
}

double streamed_abs_term(std::uint64_t p) {
    auto c = coeff(p);
    double pd = static_cast<double>(p);
    return pd * c.a_n + pd * c.a_minus_n;
}

} // namespace

double tail_sum_streamed(std::uint64_t k, std::uint64_t N) {
    double head = chunked_sum(std::max<std::uint64_t>(k, 2), N, streamed_signed_term, true);
    return head + tail_sum(N + 1);
}

double tail_sum_streamed_serial(std::uint64_t k, std::uint64_t N) {
    double head = chunked_sum(std::max<std::uint64_t>(k, 2), N, streamed_signed_term, false);
    return head + tail_sum(N + 1);
}

double abs_partial_streamed(std::uint64_t k, std::uint64_t N) {
    return chunked_sum(std::max<std::uint64_t>(k, 2), N, streamed_abs_term, true);
}

double abs_partial_streamed_serial(std::uint64_t k, std::uint64_t N) {
    return chunked_sum(std::max<std::uint64_t>(k, 2), N, streamed_abs_term, false);
}

double abs_moment(double* err) {
    static std::once_flag flag;
    static double cached = 0.0;
    std::call_once(flag, [] {
        const std::uint64_t n_max = 1ull << 25;
        cached = abs_partial_streamed(2, n_max) + abs_tail(n_max + 1);
    });
    if (err) *err = 1e-11;
    return cached;
}

// ---------------------------------------------------------------------------
// weighted sums with Euler-Maclaurin acceleration over distant blocks

namespace {

struct CoeffTables {
    std::vector<double> signed_term_v, abs_term_v; // index p, p <= P0
};

constexpr std::uint64_t kDirectCap = 8192;

const CoeffTables& coeff_tables() {
    static CoeffTables t = [] {
        CoeffTables tt;
        tt.signed_term_v.resize(kDirectCap + 1, 0.0);
        tt.abs_term_v.resize(kDirectCap + 1, 0.0);
        for (std::uint64_t p = 2; p <= kDirectCap; ++p) {
            tt.signed_term_v[p] = signed_term(p);
            tt.abs_term_v[p] = abs_term(p);
        }
        return tt;
    }();
    return t;
}

// Euler-Maclaurin sum of phi over integers [a, b], phi smooth and slowly
// varying on that range.
double em_sum(const std::function<double(double)>& phi, double a, double b) {
    if (b < a) return 0.0;
    if (b - a <= 96.0) {
        KahanSum s;
        for (double p = a; p <= b + 0.5; p += 1.0) s.add(phi(p));
        return s.value();
    }
    auto in_log = [&](double y) { return phi(std::exp(y)) * std::exp(y); };
    double integral = integrate(in_log, std::log(a), std::log(b), 0.0, 1e-10, 200000).value;
    double dpa = 0.5 * (phi(a + 1.0) - phi(a - 1.0));
    double dpb = 0.5 * (phi(b + 1.0) - phi(b - 1.0));
    return integral + 0.5 * (phi(a) + phi(b)) + (dpb - dpa) / 12.0;
}

} // namespace

double sum_range(const std::function<double(double)>& g, std::uint64_t a, double b,
                 bool signed_sum) {
    if (b < static_cast<double>(a)) return 0.0;
    a = std::max<std::uint64_t>(a, 2);
    KahanSum acc;
    const auto& tabs = coeff_tables();
    const auto& tab = signed_sum ? tabs.signed_term_v : tabs.abs_term_v;
    std::uint64_t direct_hi = std::min<double>(static_cast<double>(kDirectCap), b);
    for (std::uint64_t p = a; p <= direct_hi; ++p) acc.add(tab[p] * g(static_cast<double>(p)));
    if (b <= static_cast<double>(kDirectCap)) return acc.value();

    double lo = std::max(static_cast<double>(a), static_cast<double>(kDirectCap) + 1.0);
    int mm = block_of(static_cast<std::uint64_t>(std::min(lo, 1.8e19)));
    for (; mm <= 2000; ++mm) {
        double l1 = log_boundary(mm + 1);
        if (l1 > 700.0) break;
        double block_end = std::exp(l1); // 2^{(mm+1)^2}
        double sign = signed_sum ? parity_sign(mm) : 1.0;
        double nb = std::exp(log_boundary(mm));
        if (nb >= lo - 0.5 && nb <= b) {
            double bsign = signed_sum ? -parity_sign(mm) : 1.0;
            acc.add(bsign * boundary_weight(nb) * g(nb));
        }
        double seg_a = std::max(lo, nb + 1.0);
        double seg_b = std::min(block_end - 1.0, b);
        if (seg_b >= seg_a) {
            auto phi = [&](double x) { return interior_weight(x) * g(x); };
            acc.add(sign * em_sum(phi, seg_a, seg_b));
        }
        if (b < block_end) break;
        lo = block_end;
    }
    return acc.value();
}

WeightedSum sum_weighted(const std::function<double(double)>& g, double g_inf,
                         double decay_scale, bool signed_sum, double tol) {
    WeightedSum out;
    auto h = [&](double p) { return g(p) - g_inf; };
    KahanSum acc;
    if (g_inf != 0.0) acc.add(g_inf * (signed_sum ? tail_sum(2) : abs_moment()));

    // extend until the decay bound on the dropped tail meets tol
    double p_cut = std::max(64.0 * decay_scale, 1e6);
    for (int i = 0; i < 60; ++i) {
        double ratio = decay_scale / p_cut;
        double bound = abs_tail(static_cast<std::uint64_t>(std::min(p_cut, 1.8e19))) *
                       std::min(1.0, ratio * ratio);
        if (bound <= tol || p_cut > 1e18) {
            out.err_bound = bound;
            break;
        }
        p_cut *= 4.0;
    }
    acc.add(sum_range(h, 2, p_cut, signed_sum));
    out.value = acc.value();
    return out;
}

// ---------------------------------------------------------------------------
// time integrals of the radial tail against ds/s

double signed_tail_time_integral(double t) {
    if (t <= 1.0) return 0.0;
    double tf = std::floor(t);
    KahanSum acc;
    // on [k, k+1) the tail equals sign(block of k) / ln(k+1)
    const double direct_to = std::min(tf, static_cast<double>(1u << 21));
    for (double k = 1.0; k < direct_to; k += 1.0) {
        int m = block_of(static_cast<std::uint64_t>(k) + 1ull) -
                (is_boundary(static_cast<std::uint64_t>(k) + 1ull) ? 1 : 0);
        acc.add(parity_sign(m) * std::log1p(1.0 / k) / std::log(k + 1.0));
    }
    if (tf > direct_to) {
        // k runs over [2^21, floor(t)-1]; sign regions in k are [n*_m, n*_{m+1})
        double lo = direct_to;
        while (lo < tf - 0.5) {
            int m = block_of(static_cast<std::uint64_t>(std::min(lo + 0.5, 1.8e19)));
            double block_end = std::exp(log_boundary(m + 1));
            double hi = std::min(block_end - 1.0, tf - 1.0);
            auto phi = [](double x) { return std::log1p(1.0 / x) / std::log(x + 1.0); };
            acc.add(parity_sign(m) * em_sum(phi, lo, hi));
            lo = hi + 1.0;
        }
    }
    acc.add(tail_sum(static_cast<std::uint64_t>(tf) + 1) * (std::log(t) - std::log(tf)));
    return acc.value();
}

double abs_tail_time_integral(double t) {
    if (t <= 1.0) return 0.0;
    double tf = std::floor(t);
    KahanSum acc;
    const double direct_to = std::min(tf, static_cast<double>(1u << 21));
    for (double k = 1.0; k < direct_to; k += 1.0)
        acc.add(std::log1p(1.0 / k) / std::log(k + 1.0));
    if (tf > direct_to) {
        auto phi = [](double x) { return std::log1p(1.0 / x) / std::log(x + 1.0); };
        acc.add(em_sum(phi, direct_to, tf - 1.0));
    }
    acc.add((1.0 / std::log(tf + 1.0)) * (std::log(t) - std::log(tf)));
    return acc.value();
}

} // namespace levydom::e2
