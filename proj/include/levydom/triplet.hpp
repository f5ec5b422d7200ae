#pragma once

#include "levydom/integrand.hpp"
#include "levydom/measure.hpp"
#include "levydom/numerics.hpp"

#include <complex>
#include <optional>

namespace levydom {

/// Levy-Khintchine triplet (A, nu, gamma) of an infinitely divisible law.
struct Triplet {
    int dim = 1;
    SymMat A;
    LevyMeasure nu = LevyMeasure::zero(1);
    Vec gamma;

    static Triplet make(SymMat A, LevyMeasure nu, Vec gamma);
    static Triplet gaussian(int dim, SymMat A, Vec gamma);
    static Triplet zero(int dim);
};

struct ScaledTriplet {
    double u = 1.0;
    SymMat A_u;
    LevyMeasure nu_u = LevyMeasure::zero(1);
    Vec gamma_u;
};

struct CumulantValue {
    std::complex<double> value;
    double gaussian_part = 0.0;               // real, <= 0
    std::complex<double> jump_part;
    std::complex<double> drift_part;          // purely imaginary
};

/// characteristic exponent evaluated through the triplet
CumulantValue cumulant(const Triplet& mu, const Vec& z, double tol = 1e-8);

/// triplet of the pushforward under x -> u x
ScaledTriplet scale_triplet(const Triplet& mu, double u);

/// |gamma^u| ingredient shared by phi variants
double gamma_u_norm(const Triplet& mu, double u);
/// tr A^u + int (|x|^2 ^ 1) nu^u + |gamma^u|
double phi(const Triplet& mu, double u);
/// same with sup_{|v|<=|u|} |gamma^v| in place of |gamma^u|
double phi_tilde(const Triplet& mu, double u);

/// mean of the law; absent when the first moment is infinite
std::optional<Vec> mean(const Triplet& mu);

/// triplet (A_t, nu_t, gamma_t) of Y_t = int_0^t f(s) dX_s
Triplet integral_process_triplet(const Triplet& mu, const IntegrandFn& f, double t);

/// int_0^T C_mu(f(s) z) ds
std::complex<double> phi_cumulant(const Triplet& mu, const IntegrandFn& f, const Vec& z,
                                  double T, double tol = 1e-8);

} // namespace levydom
