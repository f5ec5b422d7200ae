#pragma once

#include "levydom/triplet.hpp"

#include <optional>
#include <string>
#include <vector>

namespace levydom {

enum class Verdict3 { Member, NonMember, Undetermined };
enum class ConvVerdict { Convergent, Divergent, Undetermined };

const char* to_string(Verdict3 v);
const char* to_string(Finiteness v);
const char* to_string(ConvVerdict v);

struct Evidence {
    std::string condition; // gauss | levy | drift-conv | drift-abs | compensator-q | analytic-rule
    std::string rule;      // decision path that fired
    std::string note;
    double value = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<double, double>> checkpoints; // (t, partial value)
};

/// Membership of the law in the four integral domains, innermost first.
/// The inclusion chain is enforced at construction.
struct DomainVerdict {
    Verdict3 d0 = Verdict3::Undetermined;
    Verdict3 d = Verdict3::Undetermined;
    Verdict3 dc = Verdict3::Undetermined;
    Verdict3 de = Verdict3::Undetermined;
    std::vector<Evidence> evidence;

    static DomainVerdict make(Verdict3 d0, Verdict3 d, Verdict3 dc, Verdict3 de,
                              std::vector<Evidence> ev);
    bool any_undetermined() const;
};

struct Checkpoints {
    double start = 1.0;
    double ratio = 2.0;
    int count = 40;
    std::vector<double> times() const;
};

/// drift integrand h(s) = f(s) gamma + int f(s)x (1/(1+|f(s)x|^2)-1/(1+|x|^2)) nu(dx)
class DriftIntegrand {
public:
    DriftIntegrand(Triplet mu, IntegrandFn f);
    Vec eval(double s) const;
    double eval_j(double s, int j) const;
    const Triplet& mu() const { return mu_; }
    const IntegrandFn& f() const { return f_; }
    bool identically_zero() const; // symmetric measure with zero location

private:
    Triplet mu_;
    IntegrandFn f_;
};

struct CondReport {
    Finiteness verdict = Finiteness::Undetermined;
    double value = 0.0; // finite-horizon value
    std::string rule;
};

/// condition: int f^2 tr A ds finite
CondReport cond_gaussian(const Triplet& mu, const IntegrandFn& f, double T);
/// condition: int ds int (|f x|^2 ^ 1) nu finite
CondReport cond_levy(const Triplet& mu, const IntegrandFn& f, double T);

DriftIntegrand drift_h(const Triplet& mu, const IntegrandFn& f);

struct DriftConvReport {
    ConvVerdict verdict = ConvVerdict::Undetermined;
    std::string rule;
    std::vector<std::pair<double, double>> partials; // (t, |G(t)| or G_j(t))
    Vec limit;                                       // when known
};

/// condition: int_0^t h(s) ds convergent as t -> infinity
DriftConvReport cond_drift_convergence(const Triplet& mu, const IntegrandFn& f,
                                       const Checkpoints& cps = {});
/// condition: int |h(s)| ds finite
CondReport cond_drift_absolute(const Triplet& mu, const IntegrandFn& f, double T);

DomainVerdict classify(const Triplet& mu, const IntegrandFn& f);

struct SignSets {
    MaskSet plus, minus, zero;
    int coord = 0;
};

/// sign sets of h_j on [lo, hi); lazily extendable beyond hi
SignSets sign_sets(const DriftIntegrand& h, int j, double lo, double hi);

struct DefeatingMask {
    int coord = 0;
    int side = +1; // +1 -> positive sign set
    MaskSet mask;
    std::vector<std::pair<double, double>> growth; // masked drift partials
};

/// Open set D with int_D h_j divergent, so that the masked integrand is
/// dominated by f1 yet leaves the definable class.
DefeatingMask build_defeating_mask(const Triplet& mu, const IntegrandFn& f1,
                                   double horizon = 4294967296.0);

struct TailDefeatReport {
    int coord = 0;
    double fitted_c = 0.0;                                 // slope of int |h_j| vs log log t
    std::vector<std::pair<double, double>> ratio_table;    // (t, int|h_j| / loglog t)
    bool ratio_within_tol = false;
    MaskSet mask;
    int side = +1;
    std::vector<double> q_grid;
    // per q: checkpoints of int 1_D (h_j - q/s) ds
    std::vector<std::vector<std::pair<double, double>>> shifted_partials;
    bool all_q_divergent = false;
};

/// numerical exhibit that no constant shift can rescue the masked integrand
/// when the measure tail obeys |int_{|x|>s} x_j nu| ~ c / log s
TailDefeatReport verify_tail_defeat(const Triplet& mu, const Checkpoints& cps);

} // namespace levydom
