#include "levydom/counterexample.hpp"
#include "levydom/block_coeffs.hpp"
#include "levydom/errors.hpp"

#include <cmath>

namespace levydom {

std::vector<Direction> e2_default_directions(int dim) {
    Vec e1(dim, 0.0);
    e1[0] = 1.0;
    return {{e1, 1.0}};
}

Triplet build_mu(const std::vector<Direction>& dirs, const SymMat& A, std::uint64_t n_max_sim) {
    int dim = static_cast<int>(dirs.front().xi.size());
    auto nu = LevyMeasure::block_e2(dim, dirs, false, n_max_sim);
    Vec gamma = scale_vec(nu.mean_correction(), -1.0);
    return Triplet::make(A, std::move(nu), std::move(gamma));
}

Triplet build_mu_tilde(const std::vector<Direction>& dirs, std::uint64_t n_max_sim) {
    int dim = static_cast<int>(dirs.front().xi.size());
    auto nu = LevyMeasure::block_e2(dim, dirs, true, n_max_sim);
    // no-centering form: gamma = int x/(1+|x|^2) nu = (jump mean) - (mean corr),
    // and the extra radius-2 atom makes the jump mean vanish
    Vec gamma = scale_vec(nu.mean_correction(), -1.0);
    return Triplet::make(SymMat::zero(dim), std::move(nu), std::move(gamma));
}

std::vector<E2VerifyRow> e2_identity_table(std::uint64_t stream_n) {
    std::vector<E2VerifyRow> rows;
    auto push = [&](const std::string& name, double got, double want, double tol) {
        E2VerifyRow r{name, got, want, tol, std::abs(got - want) < tol};
        rows.push_back(r);
    };

    const std::uint64_t ks[] = {3, 5, 16, 17, 100, 512, 513, 65536, 65537};
    for (std::uint64_t k : ks) {
        int m = e2::block_of(k) - (e2::is_boundary(k) ? 1 : 0);
        double want = (m % 2 == 1 ? 1.0 : -1.0) / std::log(static_cast<double>(k));
        push("tail_sum(" + std::to_string(k) + ")", e2::tail_sum(k), want, 1e-9);
    }
    push("tail_sum(3) streamed to 2^25", e2::tail_sum_streamed(3, stream_n),
         1.0 / std::log(3.0), 1e-9);
    push("tail_sum(17) streamed to 2^25", e2::tail_sum_streamed(17, stream_n),
         -1.0 / std::log(17.0), 1e-9);

    double err = 0.0;
    double m_fwd = e2::abs_moment(&err);
    // independent accumulation: reverse order in long double
    long double rev = 0.0L;
    for (std::uint64_t p = stream_n; p >= 2; --p) {
        auto c = e2::coeff(p);
        rev += static_cast<long double>(p) * (c.a_n + c.a_minus_n);
    }
    double m_rev = static_cast<double>(rev) + e2::abs_tail(stream_n + 1);
    push("abs_moment forward vs reverse", m_fwd, m_rev, 1e-9);
    push("abs_moment remainder bound", err, 0.0, 1e-9);

    auto mu = build_mu(e2_default_directions(1), SymMat::zero(1));
    auto mn = mean(mu);
    push("mean(mu)", mn ? (*mn)[0] : 1.0, 0.0, 1e-9);

    auto mu_t = build_mu_tilde(e2_default_directions(1));
    push("jump mean of tilde measure", mu_t.nu.jump_mean()[0], 0.0, 1e-9);
    auto mnt = mean(mu_t);
    push("mean(mu tilde)", mnt ? (*mnt)[0] : 1.0, 0.0, 1e-9);
    return rows;
}

double e2_abs_log_moment_partial(double R) {
    return e2::sum_range([](double p) { return std::log(p); }, 2, R, false);
}

} // namespace levydom
