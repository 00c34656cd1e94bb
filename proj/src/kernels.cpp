#include "sio/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sio/errors.hpp"
#include "sio/parallel.hpp"

namespace sio {

KernelSpec KernelSpec::riesz(std::size_t coordinate, double n) {
    if (coordinate == 0) throw InputError("Riesz coordinate index is 1-based");
    if (!(n > 0.0)) throw InputError("Riesz dimension parameter must be positive");
    KernelSpec k;
    k.family = KernelFamily::coordinate_riesz;
    k.coordinate = coordinate;
    k.riesz_n = n;
    k.s = n;
    return k;
}

KernelSpec KernelSpec::generic(BaseExpression base, double s, std::size_t coordinate,
                               bool antisymmetrize) {
    if (!(s > 0.0)) throw InputError("kernel dimension s must be positive");
    if (coordinate == 0) throw InputError("coordinate index is 1-based");
    KernelSpec k;
    k.family = KernelFamily::generic;
    k.base = base;
    k.s = s;
    k.coordinate = coordinate;
    k.antisymmetrize = antisymmetrize;
    return k;
}

std::string to_string(BaseExpression base) {
    switch (base) {
        case BaseExpression::zero: return "zero";
        case BaseExpression::inverse_power: return "inverse_power";
        case BaseExpression::upper_coordinate: return "upper_coordinate";
    }
    return "unknown";
}

BaseExpression base_expression_from_string(const std::string& name) {
    if (name == "zero") return BaseExpression::zero;
    if (name == "inverse_power") return BaseExpression::inverse_power;
    if (name == "upper_coordinate") return BaseExpression::upper_coordinate;
    throw InputError("unknown kernel base expression '" + name + "'");
}

namespace {

double riesz_ordered(const KernelSpec& k, const PointCloud& cloud, PointId x, PointId y) {
    const auto a = cloud.coords(x);
    const auto b = cloud.coords(y);
    double squared = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        squared += diff * diff;
    }
    const double numerator = a[k.coordinate - 1] - b[k.coordinate - 1];
    const double exponent = k.riesz_n + 1.0;
    const double denominator = exponent == 2.0 ? squared : std::pow(squared, exponent / 2.0);
    return numerator / denominator;
}

double base_value(const KernelSpec& k, const PointCloud& cloud, PointId x, PointId y) {
    switch (k.base) {
        case BaseExpression::zero:
            return 0.0;
        case BaseExpression::inverse_power:
            return std::pow(cloud.distance(x, y), -k.s);
        case BaseExpression::upper_coordinate:
            return cloud.coords(x)[k.coordinate - 1] > cloud.coords(y)[k.coordinate - 1]
                ? std::pow(cloud.distance(x, y), -k.s)
                : 0.0;
    }
    return 0.0;
}

double antisymmetric_ordered(const KernelSpec& k, const PointCloud& cloud, PointId x, PointId y) {
    if (k.family == KernelFamily::coordinate_riesz) return riesz_ordered(k, cloud, x, y);
    return (base_value(k, cloud, x, y) - base_value(k, cloud, y, x)) / 2.0;
}

void check_compatible(const KernelSpec& k, const PointCloud& cloud) {
    const bool needs_coords = k.family == KernelFamily::coordinate_riesz ||
                              k.base == BaseExpression::upper_coordinate;
    if (!needs_coords) return;
    if (!cloud.has_coordinates()) throw InputError("kernel needs point coordinates");
    if (k.coordinate > cloud.dimension()) {
        throw InputError("kernel coordinate index exceeds the cloud dimension");
    }
}

}  // namespace

double eval_kernel(const KernelSpec& kernel, const PointCloud& cloud, PointId x, PointId y) {
    if (x == y) throw DiagonalError("kernel is undefined on the diagonal x == y");
    check_compatible(kernel, cloud);
    if (kernel.family == KernelFamily::generic && !kernel.antisymmetrize) {
        return base_value(kernel, cloud, x, y);
    }
    return x < y ? antisymmetric_ordered(kernel, cloud, x, y)
                 : -antisymmetric_ordered(kernel, cloud, y, x);
}

AntisymmetryReport check_antisymmetry(const KernelSpec& kernel, const PointCloud& cloud) {
    const std::size_t n = cloud.size();
    struct Row {
        double residual = 0.0;
        PointId partner = 0;
        double max_abs = 0.0;
    };
    std::vector<Row> rows(n);
    parallel_for(n, [&](std::size_t x) {
        Row row;
        row.partner = x;
        for (PointId y = x + 1; y < n; ++y) {
            const double kxy = eval_kernel(kernel, cloud, x, y);
            const double kyx = eval_kernel(kernel, cloud, y, x);
            const double residual = std::abs(kxy + kyx);
            row.max_abs = std::max({row.max_abs, std::abs(kxy), std::abs(kyx)});
            if (residual > row.residual) {
                row.residual = residual;
                row.partner = y;
            }
        }
        rows[x] = row;
    });
    AntisymmetryReport report;
    for (PointId x = 0; x < n; ++x) {
        report.max_abs_kernel = std::max(report.max_abs_kernel, rows[x].max_abs);
        if (rows[x].residual > report.worst_residual) {
            report.worst_residual = rows[x].residual;
            report.worst_pair = {x, rows[x].partner};
        }
    }
    report.ok = report.worst_residual <= 1e-13 * report.max_abs_kernel;
    return report;
}

SizeBound check_size_bound(const KernelSpec& kernel, const PointCloud& cloud, double s) {
    if (!(s > 0.0)) throw InputError("size-bound exponent s must be positive");
    const std::size_t n = cloud.size();
    std::vector<SizeBound> rows(n);
    parallel_for(n, [&](std::size_t x) {
        SizeBound row;
        row.witness = {x, x};
        for (PointId y = 0; y < n; ++y) {
            if (y == x) continue;
            const double scaled = std::abs(eval_kernel(kernel, cloud, x, y)) *
                                  std::pow(cloud.distance(x, y), s);
            if (scaled > row.c_certified) {
                row.c_certified = scaled;
                row.witness = {std::min(x, y), std::max(x, y)};
            }
        }
        rows[x] = row;
    });
    SizeBound bound;
    for (const SizeBound& row : rows) {
        if (row.c_certified > bound.c_certified) bound = row;
    }
    return bound;
}

}  // namespace sio
