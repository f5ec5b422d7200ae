#pragma once

#include "levydom/triplet.hpp"

#include <string>
#include <vector>

namespace levydom {

/// canonical direction set for the block measure: +e1 with unit weight
std::vector<Direction> e2_default_directions(int dim);

/// martingale law with the telescoping block measure: gamma chosen so the mean
/// vanishes; A arbitrary
Triplet build_mu(const std::vector<Direction>& dirs, const SymMat& A,
                 std::uint64_t n_max_sim = 1ull << 16);

/// compound-Poisson variant: extra atom at radius 2 makes the jump mean zero
/// with no drift
Triplet build_mu_tilde(const std::vector<Direction>& dirs, std::uint64_t n_max_sim = 1ull << 16);

struct E2VerifyRow {
    std::string name;
    double got = 0.0;
    double want = 0.0;
    double tol = 0.0;
    bool pass = false;
};

/// displayed-identity table: telescoping tails at the canonical k-values
/// (streamed cross-check at k=3), absolute-moment agreement between two
/// accumulation orders, mean-zero identities
std::vector<E2VerifyRow> e2_identity_table(std::uint64_t stream_n = 1ull << 25);

/// partial sums of int |x| log|x| nu(dx) at cap R (divergence exhibit)
double e2_abs_log_moment_partial(double R);

} // namespace levydom
