#pragma once

#include <cstdint>
#include <functional>

namespace levydom::e2 {

// Coefficient sequence a_n living on dyadic blocks (2^{m^2}, 2^{(m+1)^2}):
// inside a block only one of a_n / a_{-n} is nonzero, with telescoping
// weights (1/log n - 1/log(n+1))/n, and block boundaries n = 2^{m^2} carry
// the heavier weight (1/log n + 1/log(n+1))/n on the opposite side.

struct CoeffPair {
    double a_n = 0.0;
    double a_minus_n = 0.0;
};

/// m such that 2^{m^2} <= n < 2^{(m+1)^2}; requires n >= 2
int block_of(std::uint64_t n);
bool is_boundary(std::uint64_t n);
CoeffPair coeff(std::uint64_t n);

/// signed term  p*a_p - p*a_{-p}  (closed form, cancellation-free)
double signed_term(std::uint64_t p);
/// absolute term p*a_p + p*a_{-p}
double abs_term(std::uint64_t p);

/// sum over |n| >= k of n a_n: in-block telescoping plus cross-block blocks,
/// remainder in closed form. Equals +-1/ln k by block parity.
double tail_sum(std::uint64_t k);
/// sum over |n| >= k of |n| a_n, absolute error below ~1e-12
double abs_tail(std::uint64_t k);
/// sum over |n| >= 2 of |n| a_n; err (when given) receives the error bound
double abs_moment(double* err = nullptr);

/// streamed oracle: literal sum of n a_n over k <= |n| <= N by direct
/// coefficient evaluation (deterministic chunked Kahan, OpenMP across chunks),
/// plus the closed-form remainder beyond N.
double tail_sum_streamed(std::uint64_t k, std::uint64_t N);
/// literal sum of |n| a_n over k <= |n| <= N (no remainder added)
double abs_partial_streamed(std::uint64_t k, std::uint64_t N);
/// same, single-threaded reference kept for kernel comparison
double abs_partial_streamed_serial(std::uint64_t k, std::uint64_t N);
double tail_sum_streamed_serial(std::uint64_t k, std::uint64_t N);

struct WeightedSum {
    double value = 0.0;
    double err_bound = 0.0;
};

/// sum over p >= 2 of (signed ? e_p : |e_p|) * g(p), where e_p = p a_p - p a_{-p}.
/// g must approach g_inf with |g(p) - g_inf| <= (decay_scale/p)^2 eventually;
/// the head is summed directly, distant blocks by Euler-Maclaurin, and the
/// limit part is folded through the closed tail.
WeightedSum sum_weighted(const std::function<double(double)>& g, double g_inf,
                         double decay_scale, bool signed_sum, double tol = 1e-10);

/// sum of coef_p * g(p) over integer p in [a, b]: direct over the cached head,
/// Euler-Maclaurin per dyadic block beyond. g must be smooth on [a, b].
double sum_range(const std::function<double(double)>& g, std::uint64_t a, double b,
                 bool signed_sum);

/// time integral of the signed radial tail: int_1^t s^-1 (sum_{|n|>s} n a_n) ds
double signed_tail_time_integral(double t);
/// same with the absolute value of the tail inside
double abs_tail_time_integral(double t);

} // namespace levydom::e2
