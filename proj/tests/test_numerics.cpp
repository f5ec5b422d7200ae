#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "levydom/integrand.hpp"
#include "levydom/numerics.hpp"

#include <cmath>

using namespace levydom;

TEST_CASE("adaptive quadrature on smooth and kinked integrands") {
    auto r = integrate([](double x) { return std::sin(x); }, 0.0, M_PI);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-10));

    auto r2 = integrate([](double x) { return std::exp(-x * x); }, -8.0, 8.0);
    CHECK(r2.value == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-10));

    auto r3 = integrate([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, 1e-12, 1e-10);
    double want = 0.5 * (0.3 * 0.3 + 0.7 * 0.7);
    CHECK(r3.value == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("improper integration with tail bound") {
    auto r = integrate_to_infinity([](double x) { return std::exp(-x); }, 0.0,
                                   [](double T) { return std::exp(-T); }, 1e-12, 1e-10);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("golden section maximization") {
    double m = golden_section_max([](double x) { return -(x - 0.37) * (x - 0.37); }, 0.0, 1.0);
    CHECK(m == doctest::Approx(0.0).epsilon(1e-10));
    // maximum attained at an endpoint
    double e = golden_section_max([](double x) { return x; }, 0.0, 2.0);
    CHECK(e == doctest::Approx(2.0));
}

TEST_CASE("kahan summation against long-double reference") {
    CounterRng rng = CounterRng::substream(7, 0);
    KahanSum ks;
    long double ref = 0.0L;
    for (int i = 0; i < 100000; ++i) {
        double x = (rng.next_double() - 0.5) * std::exp(20.0 * rng.next_double());
        ks.add(x);
        ref += x;
    }
    CHECK(ks.value() == doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
}

TEST_CASE("counter rng determinism and normal quality") {
    auto a = CounterRng::substream(42, 3);
    auto b = CounterRng::substream(42, 3);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    auto c = CounterRng::substream(42, 4);
    double mean = 0.0, var = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double x = c.next_normal();
        mean += x;
        var += x * x;
    }
    mean /= n;
    var = var / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("symmetric matrix eigen floor") {
    SymMat m(2);
    m.at(0, 0) = 2.0;
    m.at(1, 1) = 1.0;
    m.at(0, 1) = m.at(1, 0) = 0.5;
    CHECK(m.min_eigenvalue() == doctest::Approx(1.5 - std::sqrt(0.5)).epsilon(1e-9));
    CHECK(m.trace() == doctest::Approx(3.0));
    Vec z{1.0, -1.0};
    CHECK(m.quad_form(z) == doctest::Approx(2.0));
}

TEST_CASE("polynomial roots and integrals") {
    // (s-1)(s-2)(s-3) = s^3 - 6 s^2 + 11 s - 6
    std::vector<double> c{-6.0, 11.0, -6.0, 1.0};
    auto roots = poly_roots_in(c, 0.0, 4.0);
    REQUIRE(roots.size() == 3);
    CHECK(roots[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(roots[1] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(roots[2] == doctest::Approx(3.0).epsilon(1e-10));
}
