#include "levydom/triplet.hpp"
#include "levydom/errors.hpp"

#include <cmath>

namespace levydom {

Triplet Triplet::make(SymMat A, LevyMeasure nu, Vec gamma) {
    Triplet t;
    t.dim = nu.dim();
    if (A.dim != t.dim || static_cast<int>(gamma.size()) != t.dim)
        throw ConfigError("triplet component dimensions disagree");
    if (!A.is_symmetric(1e-9 * (1.0 + std::abs(A.trace()))))
        throw ConfigError("gaussian covariance must be symmetric");
    double scale = std::max(std::abs(A.trace()), 1.0);
    if (A.min_eigenvalue() < -1e-12 * scale)
        throw ConfigError("gaussian covariance must be positive semidefinite");
    t.A = std::move(A);
    t.nu = std::move(nu);
    t.gamma = std::move(gamma);
    return t;
}

Triplet Triplet::gaussian(int dim, SymMat A, Vec gamma) {
    return make(std::move(A), LevyMeasure::zero(dim), std::move(gamma));
}

Triplet Triplet::zero(int dim) {
    return make(SymMat::zero(dim), LevyMeasure::zero(dim), Vec(dim, 0.0));
}

CumulantValue cumulant(const Triplet& mu, const Vec& z, double tol) {
    CumulantValue out;
    out.gaussian_part = -0.5 * mu.A.quad_form(z);
    out.jump_part = mu.nu.is_zero() ? std::complex<double>{0.0, 0.0} : mu.nu.jump_cumulant(z, tol);
    out.drift_part = {0.0, dot(mu.gamma, z)};
    out.value = out.gaussian_part + out.jump_part + out.drift_part;
    return out;
}

ScaledTriplet scale_triplet(const Triplet& mu, double u) {
    ScaledTriplet s;
    s.u = u;
    s.A_u = mu.A.scaled(u * u);
    s.nu_u = mu.nu.scaled(u);
    Vec corr = mu.nu.drift_correction(u);
    s.gamma_u = add_vec(scale_vec(mu.gamma, u), corr);
    return s;
}

double gamma_u_norm(const Triplet& mu, double u) {
    if (u == 0.0) return 0.0;
    Vec corr = mu.nu.drift_correction(u);
    return norm2(add_vec(scale_vec(mu.gamma, u), corr));
}

double phi(const Triplet& mu, double u) {
    return u * u * mu.A.trace() + mu.nu.clipped_sq(u) + gamma_u_norm(mu, u);
}

double phi_tilde(const Triplet& mu, double u) {
    double au = std::abs(u);
    double sup_gamma =
        golden_section_max([&](double v) { return gamma_u_norm(mu, v); }, 0.0, au, 64, 64);
    return u * u * mu.A.trace() + mu.nu.clipped_sq(u) + sup_gamma;
}

std::optional<Vec> mean(const Triplet& mu) {
    if (!mu.nu.abs_tail_finite()) return std::nullopt;
    return add_vec(mu.gamma, mu.nu.mean_correction());
}

Triplet integral_process_triplet(const Triplet& mu, const IntegrandFn& f, double t) {
    if (!(t > 0.0)) throw ConfigError("time horizon must be positive");
    SymMat A_t = mu.A.scaled(f.sq_integral(t));
    LevyMeasure nu_t =
        mu.nu.is_zero() ? LevyMeasure::zero(mu.dim) : LevyMeasure::time_scaled(mu.nu, f, t);
    Vec gamma_t(mu.dim, 0.0);
    if (mu.nu.is_zero()) {
        gamma_t = scale_vec(mu.gamma, f.signed_integral(t));
    } else {
        auto breaks = f.breakpoints(0.0, t);
        for (int i = 0; i < mu.dim; ++i) {
            auto h = [&](double s) {
                double v = f.eval(s);
                if (v == 0.0) return 0.0;
                return v * mu.gamma[i] + mu.nu.drift_correction(v)[i];
            };
            gamma_t[i] = integrate_with_breaks(h, 0.0, t, breaks, 1e-10, 1e-8, 400000).value;
        }
    }
    return Triplet::make(std::move(A_t), std::move(nu_t), std::move(gamma_t));
}

std::complex<double> phi_cumulant(const Triplet& mu, const IntegrandFn& f, const Vec& z,
                                  double T, double tol) {
    double gauss = -0.5 * mu.A.quad_form(z) * f.sq_integral(T);
    double drift = dot(mu.gamma, z) * f.signed_integral(T);
    std::complex<double> jump{0.0, 0.0};
    if (!mu.nu.is_zero()) {
        auto breaks = f.breakpoints(0.0, T);
        auto re = [&](double s) {
            double v = f.eval(s);
            return v == 0.0 ? 0.0 : mu.nu.jump_cumulant(scale_vec(z, v), tol).real();
        };
        auto im = [&](double s) {
            double v = f.eval(s);
            return v == 0.0 ? 0.0 : mu.nu.jump_cumulant(scale_vec(z, v), tol).imag();
        };
        jump = {integrate_with_breaks(re, 0.0, T, breaks, 1e-9, 1e-7, 400000).value,
                integrate_with_breaks(im, 0.0, T, breaks, 1e-9, 1e-7, 400000).value};
    }
    return std::complex<double>(gauss, drift) + jump;
}

} // namespace levydom
