#include "sio/metric_space.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "sio/errors.hpp"
#include "sio/parallel.hpp"

namespace sio {

MetricDescriptor MetricDescriptor::euclidean(double p) {
    MetricDescriptor m{MetricFamily::euclidean_p, p, 1.0};
    m.validate();
    return m;
}

MetricDescriptor MetricDescriptor::snowflake(double base_p, double alpha) {
    MetricDescriptor m{MetricFamily::snowflake, base_p, alpha};
    m.validate();
    return m;
}

MetricDescriptor MetricDescriptor::custom_table() {
    return MetricDescriptor{MetricFamily::custom_table, 2.0, 1.0};
}

void MetricDescriptor::validate() const {
    if (family == MetricFamily::custom_table) return;
    if (!(p >= 1.0)) {  // also rejects NaN
        throw InputError("metric exponent p must satisfy p >= 1 or p = inf, got " + std::to_string(p));
    }
    if (family == MetricFamily::snowflake && !(alpha > 0.0 && alpha <= 1.0)) {
        throw InputError("snowflake exponent must lie in (0, 1], got " + std::to_string(alpha));
    }
}

PointCloud::PointCloud(MetricDescriptor metric, std::size_t dimension, std::vector<double> coords)
    : metric_(metric), dimension_(dimension), coords_(std::move(coords)) {
    if (metric_.family == MetricFamily::custom_table) {
        throw InputError("use PointCloud::from_table for custom distance tables");
    }
    if (dimension_ == 0) throw InputError("point dimension must be positive");
    if (coords_.size() % dimension_ != 0) {
        throw InputError("coordinate count is not a multiple of the dimension");
    }
    for (double c : coords_) {
        if (!std::isfinite(c)) throw InputError("point coordinates must be finite");
    }
    count_ = coords_.size() / dimension_;
    diameter_ = recompute_diameter();
}

PointCloud PointCloud::from_points(MetricDescriptor metric,
                                   const std::vector<std::vector<double>>& points) {
    metric.validate();
    if (points.empty()) throw InputError("point cloud must contain at least one point");
    const std::size_t dim = points.front().size();
    std::vector<double> flat;
    flat.reserve(points.size() * dim);
    for (const auto& p : points) {
        if (p.size() != dim) throw InputError("all points must have the same dimension");
        flat.insert(flat.end(), p.begin(), p.end());
    }
    return PointCloud(metric, dim, std::move(flat));
}

PointCloud PointCloud::from_table(std::size_t count, std::vector<double> distances) {
    if (count == 0) throw InputError("distance table must describe at least one point");
    if (distances.size() != count * count) {
        throw InputError("distance table must have N*N = " + std::to_string(count * count) +
                         " entries, got " + std::to_string(distances.size()));
    }
    for (double d : distances) {
        if (!std::isfinite(d) || d < 0.0) {
            throw InputError("distance table entries must be finite and nonnegative");
        }
    }
    PointCloud cloud;
    cloud.metric_ = MetricDescriptor::custom_table();
    cloud.count_ = count;
    cloud.table_ = std::move(distances);
    cloud.diameter_ = cloud.recompute_diameter();
    return cloud;
}

std::span<const double> PointCloud::coords(PointId id) const {
    if (!has_coordinates()) return {};
    return std::span<const double>(coords_).subspan(id * dimension_, dimension_);
}

double PointCloud::raw_distance(PointId i, PointId j) const {
    if (metric_.family == MetricFamily::custom_table) return table_[i * count_ + j];
    const double* a = coords_.data() + i * dimension_;
    const double* b = coords_.data() + j * dimension_;
    const double p = metric_.p;
    double base = 0.0;
    if (std::isinf(p)) {
        for (std::size_t k = 0; k < dimension_; ++k) base = std::max(base, std::abs(a[k] - b[k]));
    } else if (p == 1.0) {
        for (std::size_t k = 0; k < dimension_; ++k) base += std::abs(a[k] - b[k]);
    } else if (p == 2.0) {
        for (std::size_t k = 0; k < dimension_; ++k) {
            const double diff = a[k] - b[k];
            base += diff * diff;
        }
        base = std::sqrt(base);
    } else {
        for (std::size_t k = 0; k < dimension_; ++k) base += std::pow(std::abs(a[k] - b[k]), p);
        base = std::pow(base, 1.0 / p);
    }
    if (metric_.family == MetricFamily::snowflake && metric_.alpha != 1.0) {
        return std::pow(base, metric_.alpha);
    }
    return base;
}

double PointCloud::recompute_diameter() const {
    std::vector<double> row_max(count_, 0.0);
    parallel_for(count_, [&](std::size_t i) {
        double m = 0.0;
        for (std::size_t j = i + 1; j < count_; ++j) m = std::max(m, distance(i, j));
        row_max[i] = m;
    });
    return row_max.empty() ? 0.0 : *std::max_element(row_max.begin(), row_max.end());
}

double distance(const PointCloud& cloud, PointId i, PointId j) {
    if (i >= cloud.size() || j >= cloud.size()) {
        throw InputError("unknown point id " + std::to_string(std::max(i, j)) + " (cloud has " +
                         std::to_string(cloud.size()) + " points)");
    }
    return cloud.distance(i, j);
}

namespace {

struct TripleScan {
    double worst = -std::numeric_limits<double>::infinity();
    std::array<PointId, 3> triple{0, 0, 0};

    void visit(const PointCloud& c, PointId x, PointId y, PointId z) {
        const double violation = c.distance(x, z) - c.distance(x, y) - c.distance(y, z);
        if (violation > worst) {
            worst = violation;
            triple = {x, y, z};
        }
    }
};

}  // namespace

MetricReport validate_metric(const PointCloud& cloud, std::uint64_t seed) {
    const std::size_t n = cloud.size();
    if (n == 0) throw InputError("cannot validate an empty cloud");
    MetricReport report;
    for (PointId i = 0; i < n; ++i) {
        if (cloud.raw_distance(i, i) != 0.0) report.identity_ok = false;
        for (PointId j = i + 1; j < n; ++j) {
            const double dij = cloud.raw_distance(i, j);
            if (dij != cloud.raw_distance(j, i)) report.symmetry_ok = false;
            if (!(dij > 0.0)) report.identity_ok = false;
        }
    }

    TripleScan scan;
    if (n <= 1000) {
        for (PointId x = 0; x < n; ++x)
            for (PointId y = 0; y < n; ++y)
                for (PointId z = 0; z < n; ++z) scan.visit(cloud, x, y, z);
        report.triples_checked = static_cast<std::uint64_t>(n) * n * n;
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<PointId> pick(0, n - 1);
        constexpr std::uint64_t samples = 1'000'000;
        for (std::uint64_t s = 0; s < samples; ++s) {
            const PointId x = pick(rng), y = pick(rng), z = pick(rng);
            scan.visit(cloud, x, y, z);
        }
        report.triples_checked = samples;
        report.exhaustive = false;
    }
    // Round-off slack: collinear triples can overshoot by a few ulps of the diameter.
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, cloud.diameter());
    report.worst_triple = scan.triple;
    report.worst_violation = scan.worst;
    report.triangle_ok = scan.worst <= slack;
    return report;
}

namespace {

PointCloud scaled_copy(const PointCloud& cloud, double scale) {
    if (cloud.metric().family == MetricFamily::custom_table) {
        std::vector<double> table(cloud.table().begin(), cloud.table().end());
        for (double& d : table) d /= scale;
        return PointCloud::from_table(cloud.size(), std::move(table));
    }
    double coord_divisor = scale;
    if (cloud.metric().family == MetricFamily::snowflake) {
        coord_divisor = std::pow(scale, 1.0 / cloud.metric().alpha);
    }
    std::vector<double> coords;
    coords.reserve(cloud.size() * cloud.dimension());
    for (PointId i = 0; i < cloud.size(); ++i) {
        for (double c : cloud.coords(i)) coords.push_back(c / coord_divisor);
    }
    return PointCloud(cloud.metric(), cloud.dimension(), std::move(coords));
}

}  // namespace

RescaledCloud rescale_to_unit_diameter(const PointCloud& cloud) {
    if (cloud.size() < 2 || !(cloud.diameter() > 0.0)) {
        throw DegenerateInputError("rescaling needs at least two distinct points");
    }
    if (cloud.diameter() == 1.0) return {cloud, 1.0};
    double scale = cloud.diameter();
    // Division rounds; nudge the divisor up until the recomputed diameter is <= 1.
    for (int attempt = 0; attempt < 64; ++attempt) {
        PointCloud scaled = scaled_copy(cloud, scale);
        if (scaled.diameter() <= 1.0) return {std::move(scaled), scale};
        scale = std::nextafter(scale, std::numeric_limits<double>::infinity());
    }
    throw DegenerateInputError("could not rescale cloud to unit diameter");
}

}  // namespace sio
