#include "sio/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sio/errors.hpp"
#include "sio/parallel.hpp"

namespace sio {

namespace {

// Distance band lo < d < hi, or lo < d <= hi when hi_closed.
struct Band {
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    bool hi_closed = false;

    bool contains(double d) const { return d > lo && (hi_closed ? d <= hi : d < hi); }
};

void require_band(double delta, double eps) {
    if (!(delta > 0.0)) throw InputError("delta must be positive");
    if (!(delta < eps)) throw InputError("need 0 < delta < eps");
}

// sum_x row(x), rows summed pairwise in ascending x; each row is itself a
// pairwise sum in ascending y. Rows are computed independently, so the result
// does not depend on the worker count.
template <typename Row>
double ordered_double_sum(std::size_t n, Row&& row) {
    std::vector<double> rows(n, 0.0);
    parallel_for(n, [&](std::size_t x) { rows[x] = row(x); });
    return pairwise_sum(rows);
}

double truncated_at(const KernelSpec& kernel, const DiscreteMeasure& measure,
                    const std::vector<double>& f_values, PointId x, const Band& band,
                    std::vector<double>& scratch) {
    const PointCloud& cloud = measure.cloud();
    scratch.clear();
    for (PointId y = 0; y < cloud.size(); ++y) {
        if (y == x || !band.contains(cloud.distance(x, y))) continue;
        const double fy = f_values[y] * measure.weight(y);
        if (fy == 0.0) continue;
        scratch.push_back(eval_kernel(kernel, cloud, x, y) * fy);
    }
    return pairwise_sum(scratch);
}

double pairing_over(const KernelSpec& kernel, const DiscreteMeasure& measure,
                    const std::vector<double>& f_values, const std::vector<double>& g_values,
                    const Band& band) {
    return ordered_double_sum(measure.size(), [&](PointId x) {
        const double gx = g_values[x] * measure.weight(x);
        if (gx == 0.0) return 0.0;
        std::vector<double> scratch;
        return truncated_at(kernel, measure, f_values, x, band, scratch) * gx;
    });
}

double boundary_over(const KernelSpec& kernel, const DiscreteMeasure& measure,
                     const std::vector<char>& inside, const Band& band) {
    const PointCloud& cloud = measure.cloud();
    return ordered_double_sum(cloud.size(), [&](PointId x) {
        if (!inside[x] || measure.weight(x) == 0.0) return 0.0;
        std::vector<double> terms;
        for (PointId y = 0; y < cloud.size(); ++y) {
            if (inside[y] || measure.weight(y) == 0.0) continue;
            if (!band.contains(cloud.distance(x, y))) continue;
            terms.push_back(std::abs(eval_kernel(kernel, cloud, x, y)) * measure.weight(y));
        }
        return pairwise_sum(terms) * measure.weight(x);
    });
}

void check_ball(const PointCloud& cloud, const Ball& ball) {
    if (ball.center >= cloud.size()) throw InputError("unknown ball center " + std::to_string(ball.center));
    if (!(ball.radius > 0)) throw InputError("ball radius must be positive");
}

Rational exact_distance(const PointCloud& cloud, PointId a, PointId b) { return exact(cloud.distance(a, b)); }

}  // namespace

std::vector<char> ball_membership(const PointCloud& cloud, const Ball& ball) {
    check_ball(cloud, ball);
    std::vector<char> inside(cloud.size(), 0);
    const double approx = ball.radius.get_d();
    for (PointId y = 0; y < cloud.size(); ++y) {
        const double d = cloud.distance(ball.center, y);
        // Only distances within a relative 1e-9 of the radius need the exact comparison.
        if (d < approx * (1.0 - 1e-9)) {
            inside[y] = 1;
        } else if (d > approx * (1.0 + 1e-9)) {
            inside[y] = 0;
        } else {
            inside[y] = exact(d) <= ball.radius;
        }
    }
    return inside;
}

std::vector<double> evaluate(const SimpleFunction& f, const PointCloud& cloud) {
    std::vector<double> values(cloud.size(), 0.0);
    for (const SimpleTerm& term : f.terms) {
        const auto inside = ball_membership(cloud, term.ball);
        for (PointId y = 0; y < cloud.size(); ++y) {
            if (inside[y]) values[y] += term.coefficient;
        }
    }
    return values;
}

double apply_truncated(const KernelSpec& kernel, const DiscreteMeasure& measure,
                       const SimpleFunction& f, PointId x, double eps) {
    if (!(eps > 0.0)) throw InputError("truncation eps must be positive");
    if (x >= measure.size()) throw InputError("unknown point id " + std::to_string(x));
    const auto f_values = evaluate(f, measure.cloud());
    std::vector<double> scratch;
    return truncated_at(kernel, measure, f_values, x, Band{eps}, scratch);
}

double pairing(const KernelSpec& kernel, const DiscreteMeasure& measure, const SimpleFunction& f,
               const SimpleFunction& g, double eps) {
    if (!(eps > 0.0)) throw InputError("truncation eps must be positive");
    return pairing_over(kernel, measure, evaluate(f, measure.cloud()), evaluate(g, measure.cloud()),
                        Band{eps});
}

PairingDifference pairing_difference_bound(const KernelSpec& kernel, const DiscreteMeasure& measure,
                                           const SimpleFunction& f, const SimpleFunction& g,
                                           double delta, double eps) {
    require_band(delta, eps);
    const PointCloud& cloud = measure.cloud();
    const auto f_values = evaluate(f, cloud);
    const auto g_values = evaluate(g, cloud);

    PairingDifference out;
    const double at_eps = pairing_over(kernel, measure, f_values, g_values, Band{eps});
    const double at_delta = pairing_over(kernel, measure, f_values, g_values, Band{delta});
    out.lhs = std::abs(at_eps - at_delta);

    std::vector<double> abs_f(f_values.size()), abs_g(g_values.size());
    for (std::size_t i = 0; i < f_values.size(); ++i) {
        abs_f[i] = std::abs(f_values[i]);
        abs_g[i] = std::abs(g_values[i]);
    }
    out.scale = ordered_double_sum(cloud.size(), [&](PointId x) {
        const double gx = abs_g[x] * measure.weight(x);
        if (gx == 0.0) return 0.0;
        std::vector<double> terms;
        for (PointId y = 0; y < cloud.size(); ++y) {
            if (y == x || !(cloud.distance(x, y) > delta)) continue;
            terms.push_back(std::abs(eval_kernel(kernel, cloud, x, y)) * abs_f[y] * measure.weight(y));
        }
        return pairwise_sum(terms) * gx;
    });

    const Band band{delta, eps, true};
    std::vector<double> f_boundary, g_boundary;
    for (const auto& term : f.terms) {
        f_boundary.push_back(boundary_over(kernel, measure, ball_membership(cloud, term.ball), band));
    }
    for (const auto& term : g.terms) {
        g_boundary.push_back(boundary_over(kernel, measure, ball_membership(cloud, term.ball), band));
    }
    std::vector<double> contributions;
    for (std::size_t i = 0; i < f.terms.size(); ++i) {
        for (std::size_t j = 0; j < g.terms.size(); ++j) {
            const double weight = std::abs(f.terms[i].coefficient * g.terms[j].coefficient);
            out.per_ball_terms.push_back({i, j, weight, f_boundary[i], g_boundary[j]});
            contributions.push_back(weight * (f_boundary[i] + 2.0 * g_boundary[j]));
        }
    }
    out.rhs = pairwise_sum(contributions);
    out.ok = out.lhs <= out.rhs + 1e-12 * out.scale;
    return out;
}

CancellationResidual cancellation_residual(const KernelSpec& kernel, const DiscreteMeasure& measure,
                                           const Ball& b, const Ball& s, double delta, double eps) {
    require_band(delta, eps);
    const PointCloud& cloud = measure.cloud();
    const auto in_b = ball_membership(cloud, b);
    const auto in_s = ball_membership(cloud, s);
    std::vector<char> both(cloud.size());
    for (PointId y = 0; y < cloud.size(); ++y) both[y] = in_b[y] && in_s[y] && measure.weight(y) > 0.0;

    const Band band{delta, eps};
    std::vector<double> row_abs(cloud.size(), 0.0);
    CancellationResidual out;
    out.residual = ordered_double_sum(cloud.size(), [&](PointId x) {
        if (!both[x]) return 0.0;
        std::vector<double> terms, magnitudes;
        for (PointId y = 0; y < cloud.size(); ++y) {
            if (!both[y] || y == x || !band.contains(cloud.distance(x, y))) continue;
            const double term = eval_kernel(kernel, cloud, x, y) * measure.weight(x) * measure.weight(y);
            terms.push_back(term);
            magnitudes.push_back(std::abs(term));
        }
        row_abs[x] = pairwise_sum(magnitudes);
        return pairwise_sum(terms);
    });
    out.magnitude = pairwise_sum(row_abs);
    out.ok = std::abs(out.residual) <= 1e-13 * out.magnitude;
    return out;
}

double boundary_term(const KernelSpec& kernel, const DiscreteMeasure& measure, const Ball& ball,
                     double delta, double eps) {
    require_band(delta, eps);
    return boundary_over(kernel, measure, ball_membership(measure.cloud(), ball), Band{delta, eps});
}

double total_boundary_integral(const KernelSpec& kernel, const DiscreteMeasure& measure, const Ball& ball) {
    return boundary_over(kernel, measure, ball_membership(measure.cloud(), ball), Band{});
}

AnnuliReport annuli_log_bound_check(const KernelSpec& kernel, const DiscreteMeasure& measure,
                                    const Ball& ball, double s, double c, double c_mu) {
    const PointCloud& cloud = measure.cloud();
    const auto inside = ball_membership(cloud, ball);
    AnnuliReport report;
    std::vector<PointId> interior;
    std::vector<double> gaps;
    for (PointId x = 0; x < cloud.size(); ++x) {
        if (!inside[x] || measure.weight(x) == 0.0) continue;
        const Rational gap = ball.radius - exact_distance(cloud, ball.center, x);
        if (gap == 0) {
            report.sphere_atoms.push_back(x);
        } else {
            interior.push_back(x);
            gaps.push_back(gap.get_d());
        }
    }
    if (interior.empty()) throw PreconditionError("the open ball contains no atom");

    const double per_annulus = c * c_mu * std::pow(2.0, s);
    report.entries.resize(interior.size());
    parallel_for(interior.size(), [&](std::size_t k) {
        const PointId x = interior[k];
        std::vector<double> terms;
        for (PointId y = 0; y < cloud.size(); ++y) {
            if (inside[y] || measure.weight(y) == 0.0 || !(cloud.distance(x, y) < 2.0)) continue;
            terms.push_back(std::abs(eval_kernel(kernel, cloud, x, y)) * measure.weight(y));
        }
        AnnuliEntry& e = report.entries[k];
        e.x = x;
        e.gap = gaps[k];
        e.lhs = pairwise_sum(terms);
        e.annuli = static_cast<long>(std::floor(std::log2(3.0 / e.gap))) + 1;
        e.rhs = per_annulus * static_cast<double>(e.annuli);
        e.ok = e.lhs <= e.rhs;
    });
    for (const auto& e : report.entries) report.all_ok = report.all_ok && e.ok;
    return report;
}

namespace {

GoodSetParams certificate_params(const GoodRadiusCertificate& cert) {
    GoodSetParams params;
    params.lambda = cert.lambda;
    params.depth = cert.depth;
    params.a = cert.a;
    params.b = cert.b;
    return params;
}

}  // namespace

ShellReport shell_mass_check(const DiscreteMeasure& measure, PointId z, const Rational& r,
                             const GoodRadiusCertificate& certificate) {
    if (certificate.t != r) throw InputError("certificate was issued for a different radius");
    if (certificate.a != 0 || certificate.b != 1) {
        throw InputError("shell checks need a certificate on I = [0, 1]");
    }
    const StepMeasure pushed = radial_pushforward(measure, z);
    const GoodSetParams params = certificate_params(certificate);
    const RadiusCheck recheck = GoodRadiusTester(pushed, params).check(r);
    bool matches = recheck.good() && recheck.certificate.witnesses.size() == certificate.witnesses.size();
    for (std::size_t n = 0; matches && n < certificate.witnesses.size(); ++n) {
        const auto& mine = recheck.certificate.witnesses[n];
        const auto& theirs = certificate.witnesses[n];
        matches = mine.cell_index == theirs.cell_index && mine.cell_mass == theirs.cell_mass;
    }
    if (!matches) throw InputError("certificate does not match the radial pushforward at this center");

    ShellReport report;
    const double log_lambda = std::log(static_cast<double>(params.lambda));
    for (int n = 1; n <= params.depth; ++n) {
        ShellEntry e;
        e.generation = n;
        const Rational half = inverse_power(params.lambda, 3 * n);
        e.lo = r - half;
        e.hi = r + half;
        e.mass = pushed.interval_mass(e.lo, e.hi, true, false);
        e.bound = inverse_power(params.lambda, n);
        e.ok = e.mass <= e.bound;
        report.all_ok = report.all_ok && e.ok;
        report.log_weighted_tail += std::pow(static_cast<double>(params.lambda), -n) * 3.0 * (n + 1) * log_lambda;
        report.entries.push_back(std::move(e));
    }
    return report;
}

LogBoundarySum log_boundary_sum(const DiscreteMeasure& measure, const Ball& ball,
                                const std::optional<GoodRadiusCertificate>& certificate, double c_mu,
                                double s) {
    const PointCloud& cloud = measure.cloud();
    const auto inside = ball_membership(cloud, ball);
    std::vector<PointId> interior;
    std::vector<Rational> distances;
    std::vector<double> terms;
    for (PointId x = 0; x < cloud.size(); ++x) {
        if (!inside[x] || measure.weight(x) == 0.0) continue;
        Rational d = exact_distance(cloud, ball.center, x);
        if (d == ball.radius) continue;
        const double gap = Rational(ball.radius - d).get_d();
        interior.push_back(x);
        distances.push_back(std::move(d));
        terms.push_back(measure.weight(x) * std::abs(std::log(gap)));
    }
    if (interior.empty()) throw PreconditionError("the open ball contains no atom");

    LogBoundarySum out;
    out.value = pairwise_sum(terms);
    out.finite = std::isfinite(out.value);
    if (!certificate) return out;
    if (certificate->t != ball.radius) throw InputError("certificate was issued for a different radius");

    const long lambda = certificate->lambda;
    const int depth = certificate->depth;
    const double log_lambda = std::log(static_cast<double>(lambda));
    const Rational& r = ball.radius;
    // Shell n >= 1 holds r - lambda^{-3n} <= d < r - lambda^{-3(n+1)}, where the
    // gap lies in (lambda^{-3(n+1)}, lambda^{-3n}] and |log gap| < 3 (n+1) log(lambda).
    // Shell 0 is d < r - lambda^{-3}; atoms past shell depth are summed exactly.
    std::vector<double> shell_mass(depth + 1, 0.0);
    std::vector<double> inner;
    for (std::size_t k = 0; k < interior.size(); ++k) {
        const Rational& d = distances[k];
        const double w = measure.weight(interior[k]);
        if (d < r - inverse_power(lambda, 3)) {
            shell_mass[0] += w;
            continue;
        }
        bool placed = false;
        for (int n = 1; n <= depth && !placed; ++n) {
            if (d >= r - inverse_power(lambda, 3 * n) && d < r - inverse_power(lambda, 3 * (n + 1))) {
                shell_mass[n] += w;
                placed = true;
            }
        }
        if (!placed) inner.push_back(terms[k]);
    }
    out.inner_remainder = pairwise_sum(inner);
    out.has_shell_bound = true;
    out.shell_bound = 3.0 * log_lambda * shell_mass[0] + out.inner_remainder;
    const double core = std::max(0.0, Rational(r - inverse_power(lambda, 3)).get_d());
    out.paper_form = 3.0 * log_lambda * c_mu * std::pow(core, s) + out.inner_remainder;
    for (int n = 1; n <= depth; ++n) {
        const double log_bound = 3.0 * (n + 1) * log_lambda;
        out.shell_bound += shell_mass[n] * log_bound;
        out.paper_form += std::pow(static_cast<double>(lambda), -n) * log_bound;
    }
    const double slack = 1e-12 * std::max(1.0, out.shell_bound);
    out.ok = out.finite && out.value <= out.shell_bound + slack;
    out.within_paper_form = out.value <= out.paper_form + slack;
    return out;
}

std::vector<double> pv_scan(const KernelSpec& kernel, const DiscreteMeasure& measure,
                            const SimpleFunction& f, PointId x, const std::vector<double>& eps_grid) {
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
        if (!(eps_grid[i] > 0.0) || (i > 0 && !(eps_grid[i] < eps_grid[i - 1]))) {
            throw InputError("eps grid must be positive and strictly decreasing");
        }
    }
    if (x >= measure.size()) throw InputError("unknown point id " + std::to_string(x));
    const auto f_values = evaluate(f, measure.cloud());
    std::vector<double> out;
    std::vector<double> scratch;
    for (double eps : eps_grid) out.push_back(truncated_at(kernel, measure, f_values, x, Band{eps}, scratch));
    return out;
}

PairingTrace pairing_trace(const KernelSpec& kernel, const DiscreteMeasure& measure,
                           const SimpleFunction& f, const SimpleFunction& g,
                           const std::vector<double>& eps_grid) {
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
        if (!(eps_grid[i] > 0.0) || (i > 0 && !(eps_grid[i] < eps_grid[i - 1]))) {
            throw InputError("eps grid must be positive and strictly decreasing");
        }
    }
    PairingTrace trace;
    trace.epsilon_grid = eps_grid;
    for (double eps : eps_grid) trace.values.push_back(pairing(kernel, measure, f, g, eps));
    for (std::size_t j = 0; j + 1 < eps_grid.size(); ++j) {
        trace.cauchy_diffs.push_back(std::abs(trace.values[j] - trace.values[j + 1]));
        const auto bound = pairing_difference_bound(kernel, measure, f, g, eps_grid[j + 1], eps_grid[j]);
        trace.bound_values.push_back(bound.rhs);
        trace.bound_ok.push_back(bound.ok);
    }
    return trace;
}

}  // namespace sio
