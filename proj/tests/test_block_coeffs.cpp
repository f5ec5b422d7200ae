#include <doctest.h>

#include "levydom/block_coeffs.hpp"
#include "levydom/numerics.hpp"

#include <cmath>

using namespace levydom;

TEST_CASE("block index and boundary detection") {
    CHECK(e2::block_of(2) == 1);
    CHECK(e2::block_of(15) == 1);
    CHECK(e2::block_of(16) == 2);
    CHECK(e2::block_of(511) == 2);
    CHECK(e2::block_of(512) == 3);
    CHECK(e2::block_of(65536) == 4);
    CHECK(e2::block_of(1ull << 25) == 5);
    CHECK(e2::is_boundary(2));
    CHECK(e2::is_boundary(16));
    CHECK(e2::is_boundary(512));
    CHECK(e2::is_boundary(65536));
    CHECK(e2::is_boundary(1ull << 25));
    CHECK(!e2::is_boundary(3));
    CHECK(!e2::is_boundary(1024));
}

TEST_CASE("four-case coefficients") {
    auto z = e2::coeff(1);
    CHECK(z.a_n == 0.0);
    CHECK(z.a_minus_n == 0.0);

    // n=2 = 2^{1^2}, m=1 odd: mass sits on the negative side with the heavy weight
    auto c2 = e2::coeff(2);
    CHECK(c2.a_n == 0.0);
    CHECK(c2.a_minus_n ==
          doctest::Approx(0.5 * (1.0 / std::log(2.0) + 1.0 / std::log(3.0))).epsilon(1e-12));
    CHECK(c2.a_minus_n == doctest::Approx(1.176467).epsilon(1e-6));

    // n=5 interior of the m=1 block: positive side, telescoping weight
    auto c5 = e2::coeff(5);
    CHECK(c5.a_minus_n == 0.0);
    CHECK(c5.a_n ==
          doctest::Approx(0.2 * (1.0 / std::log(5.0) - 1.0 / std::log(6.0))).epsilon(1e-12));

    // n=16 = 2^{2^2}, m=2 even: boundary weight on the positive side
    auto c16 = e2::coeff(16);
    CHECK(c16.a_minus_n == 0.0);
    CHECK(c16.a_n ==
          doctest::Approx((1.0 / 16.0) * (1.0 / std::log(16.0) + 1.0 / std::log(17.0)))
              .epsilon(1e-12));

    // n=17 interior of the m=2 block: negative side
    auto c17 = e2::coeff(17);
    CHECK(c17.a_n == 0.0);
    CHECK(c17.a_minus_n > 0.0);

    // exactly one side per n >= 2
    for (std::uint64_t n = 2; n < 4000; ++n) {
        auto c = e2::coeff(n);
        CHECK(((c.a_n > 0.0) != (c.a_minus_n > 0.0)));
    }
}

TEST_CASE("telescoping tail identity") {
    struct Case {
        std::uint64_t k;
        int sign;
    };
    const Case cases[] = {{3, +1},   {5, +1},   {16, +1},    {17, -1},   {100, -1},
                          {512, -1}, {513, +1}, {65536, +1}, {65537, -1}};
    for (auto [k, sign] : cases) {
        double want = sign / std::log(static_cast<double>(k));
        CHECK(e2::tail_sum(k) == doctest::Approx(want).epsilon(1e-11));
    }
    CHECK(e2::tail_sum(2) == doctest::Approx(-1.0 / std::log(2.0)).epsilon(1e-11));
}

TEST_CASE("streamed tail sum agrees with the closed form") {
    const std::uint64_t N = 1ull << 20; // lighter than the acceptance run
    for (std::uint64_t k : {3ull, 17ull, 513ull}) {
        double streamed = e2::tail_sum_streamed(k, N);
        CHECK(std::abs(streamed - e2::tail_sum(k)) < 1e-9);
    }
    // serial kernel must agree bit-for-bit with the chunked parallel one
    CHECK(e2::tail_sum_streamed_serial(3, 1u << 18) == e2::tail_sum_streamed(3, 1u << 18));
}

TEST_CASE("absolute moment: streamed vs analytic tail splice") {
    // consistency across two split points
    double a = e2::abs_partial_streamed(2, 1u << 16) + e2::abs_tail((1u << 16) + 1);
    double b = e2::abs_partial_streamed(2, 1u << 18) + e2::abs_tail((1u << 18) + 1);
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
    double err = 0.0;
    double m = e2::abs_moment(&err);
    CHECK(m > 4.0);
    CHECK(m < 6.0);
    CHECK(err < 1e-9);
    CHECK(m == doctest::Approx(b).epsilon(1e-9));
}

TEST_CASE("weighted sums match direct summation") {
    // g(p) = 1/(s^2 + p^2): direct reference at moderate scale
    for (double s : {50.0, 1000.0}) {
        auto g = [s](double p) { return 1.0 / (s * s + p * p); };
        auto acc = e2::sum_weighted(g, 0.0, s, true, 1e-13);
        KahanSum direct;
        const std::uint64_t N = 1ull << 24;
        for (std::uint64_t p = 2; p <= N; ++p) {
            auto c = e2::coeff(p);
            double pd = static_cast<double>(p);
            direct.add((pd * c.a_n - pd * c.a_minus_n) * g(pd));
        }
        // direct truncation error ~ tail/N^2 * s^2, negligible here
        CHECK(acc.value == doctest::Approx(direct.value()).epsilon(1e-7));
    }
}

TEST_CASE("weighted sum with a nonzero limit") {
    // g(p) = p^2/(s^2+p^2) -> 1; the total must equal tail_sum(2) - s^2 * sum(1/(s^2+p^2))
    double s = 200.0;
    auto g = [s](double p) { return p * p / (s * s + p * p); };
    auto direct_form = e2::sum_weighted([s](double p) { return 1.0 / (s * s + p * p); }, 0.0, s,
                                        true, 1e-13);
    auto with_limit = e2::sum_weighted(g, 1.0, s, true, 1e-13);
    CHECK(with_limit.value ==
          doctest::Approx(e2::tail_sum(2) - s * s * direct_form.value).epsilon(1e-10));
}

TEST_CASE("time integrals of the radial tail") {
    // direct reference for moderate t
    double t = 5000.0;
    KahanSum direct;
    for (std::uint64_t k = 1; k < static_cast<std::uint64_t>(t); ++k)
        direct.add(e2::tail_sum(k + 1) * std::log1p(1.0 / static_cast<double>(k)));
    CHECK(e2::signed_tail_time_integral(t) == doctest::Approx(direct.value()).epsilon(1e-10));

    KahanSum directa;
    for (std::uint64_t k = 1; k < static_cast<std::uint64_t>(t); ++k)
        directa.add(std::log1p(1.0 / static_cast<double>(k)) / std::log(static_cast<double>(k + 1)));
    CHECK(e2::abs_tail_time_integral(t) == doctest::Approx(directa.value()).epsilon(1e-10));

    // the absolute integral grows like log log t
    double h16 = e2::abs_tail_time_integral(std::pow(2.0, 16));
    double h32 = e2::abs_tail_time_integral(std::pow(2.0, 32));
    double r16 = h16 / std::log(16 * std::log(2.0));
    double r32 = h32 / std::log(32 * std::log(2.0));
    CHECK(r16 > 0.5);
    CHECK(std::abs(r16 - r32) / (0.5 * (r16 + r32)) < 0.3);
}
