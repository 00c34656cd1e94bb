#pragma once

#include <optional>
#include <vector>

#include "sio/good_radii.hpp"
#include "sio/kernels.hpp"
#include "sio/measure.hpp"

namespace sio {

// Closed ball {y : d(center, y) <= radius}; the radius is exact so that
// membership agrees with the certified good radius bit for bit.
struct Ball {
    PointId center = 0;
    Rational radius;

    static Ball from_double(PointId center, double radius) { return {center, exact(radius)}; }
    double radius_value() const { return radius.get_d(); }
};

struct SimpleTerm {
    double coefficient = 0.0;
    Ball ball;
    std::optional<GoodRadiusCertificate> certificate;
};

// Finite combination sum_i a_i chi_{B_i} of closed-ball indicators.
struct SimpleFunction {
    std::vector<SimpleTerm> terms;
};

// membership[y] is 1 when point y lies in the closed ball.
std::vector<char> ball_membership(const PointCloud& cloud, const Ball& ball);

// f evaluated at every point of the cloud.
std::vector<double> evaluate(const SimpleFunction& f, const PointCloud& cloud);

// T_eps(f mu)(x) = sum over y with d(x,y) > eps of k(x,y) f(y) w(y).
double apply_truncated(const KernelSpec& kernel, const DiscreteMeasure& measure,
                       const SimpleFunction& f, PointId x, double eps);

// sum_x T_eps(f mu)(x) g(x) w(x).
double pairing(const KernelSpec& kernel, const DiscreteMeasure& measure, const SimpleFunction& f,
               const SimpleFunction& g, double eps);

struct BallPairTerm {
    std::size_t f_term = 0;
    std::size_t g_term = 0;
    double weight = 0.0;      // |a_i b_j|
    double f_boundary = 0.0;  // boundary term of B_i over the band
    double g_boundary = 0.0;  // boundary term of S_j over the band
};

struct PairingDifference {
    double lhs = 0.0;    // |pairing(eps) - pairing(delta)|
    double rhs = 0.0;    // sum |a_i b_j| (bt(B_i) + 2 bt(S_j))
    double scale = 0.0;  // sum of |terms| of pairing(delta), for the round-off allowance
    bool ok = false;     // lhs <= rhs + 1e-12 scale
    std::vector<BallPairTerm> per_ball_terms;
};

// Four-term bound on the change of the pairing between two truncation levels.
// The pairing difference collects pairs with delta < d <= eps, so the
// boundary terms here are taken over that same band.
PairingDifference pairing_difference_bound(const KernelSpec& kernel, const DiscreteMeasure& measure,
                                           const SimpleFunction& f, const SimpleFunction& g,
                                           double delta, double eps);

struct CancellationResidual {
    double residual = 0.0;   // sum over x, y in B n S, delta < d < eps, of k(x,y) w(x) w(y)
    double magnitude = 0.0;  // sum of |terms|
    bool ok = false;         // |residual| <= 1e-13 magnitude
};

CancellationResidual cancellation_residual(const KernelSpec& kernel, const DiscreteMeasure& measure,
                                           const Ball& b, const Ball& s, double delta, double eps);

// sum over x in B, y outside B, delta < d(x,y) < eps, of |k(x,y)| w(x) w(y).
double boundary_term(const KernelSpec& kernel, const DiscreteMeasure& measure, const Ball& ball,
                     double delta, double eps);

// boundary_term over every pair (delta -> 0, eps -> inf).
double total_boundary_integral(const KernelSpec& kernel, const DiscreteMeasure& measure, const Ball& ball);

struct AnnuliEntry {
    PointId x = 0;
    double gap = 0.0;  // radius - d(center, x)
    double lhs = 0.0;  // sum over y in B(x,2) \ B of |k(x,y)| w(y)
    long annuli = 0;   // N(x) = floor(log2(3 / gap)) + 1
    double rhs = 0.0;  // c c_mu 2^s N(x)
    bool ok = false;
};

struct AnnuliReport {
    std::vector<AnnuliEntry> entries;   // one per atom of the open ball
    std::vector<PointId> sphere_atoms;  // atoms with d(center, x) == radius exactly
    bool all_ok = true;
};

AnnuliReport annuli_log_bound_check(const KernelSpec& kernel, const DiscreteMeasure& measure,
                                    const Ball& ball, double s, double c, double c_mu);

struct ShellEntry {
    int generation = 0;
    Rational lo, hi;  // [r - lambda^{-3n}, r + lambda^{-3n})
    Rational mass;
    Rational bound;   // lambda^{-n}
    bool ok = false;
};

struct ShellReport {
    std::vector<ShellEntry> entries;
    double log_weighted_tail = 0.0;  // sum_{n <= N} lambda^{-n} 3 (n + 1) log(lambda)
    bool all_ok = true;
};

// Shell masses of mu_z around a certified radius r on I = [0, 1]. Throws
// InputError when the certificate does not match mu_z.
ShellReport shell_mass_check(const DiscreteMeasure& measure, PointId z, const Rational& r,
                             const GoodRadiusCertificate& certificate);

struct LogBoundarySum {
    double value = 0.0;  // sum over x in the open ball of w(x) |log(radius - d(center, x))|
    bool finite = true;
    bool has_shell_bound = false;
    double shell_bound = 0.0;   // measured shell masses times the largest |log gap| per shell
    double paper_form = 0.0;    // 3 log(lambda) c_mu (r - lambda^{-3})^s + sum lambda^{-n} 3 (n+1) log(lambda)
    double inner_remainder = 0.0;  // exact contribution of atoms with gap <= lambda^{-3(N+1)}
    bool ok = true;                  // finite and value <= shell_bound
    bool within_paper_form = true;   // value <= paper_form (relies on c_mu at scale r - lambda^{-3})
};

// Throws PreconditionError when the open ball holds no atom. With a
// certificate, also assembles the shell-decomposed upper bounds.
LogBoundarySum log_boundary_sum(const DiscreteMeasure& measure, const Ball& ball,
                                const std::optional<GoodRadiusCertificate>& certificate = std::nullopt,
                                double c_mu = 1.0, double s = 1.0);

std::vector<double> pv_scan(const KernelSpec& kernel, const DiscreteMeasure& measure,
                            const SimpleFunction& f, PointId x, const std::vector<double>& eps_grid);

struct PairingTrace {
    std::vector<double> epsilon_grid;  // strictly decreasing
    std::vector<double> values;
    std::vector<double> cauchy_diffs;  // |values[j] - values[j + 1]|
    std::vector<double> bound_values;  // four-term bound for (eps_{j+1}, eps_j)
    std::vector<char> bound_ok;
};

PairingTrace pairing_trace(const KernelSpec& kernel, const DiscreteMeasure& measure,
                           const SimpleFunction& f, const SimpleFunction& g,
                           const std::vector<double>& eps_grid);

}  // namespace sio
