#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace sio {

using PointId = std::size_t;

enum class MetricFamily {
    euclidean_p,   // (sum |x_i - y_i|^p)^{1/p}, p in [1, inf]
    snowflake,     // (euclidean_p distance)^alpha, alpha in (0, 1]
    custom_table,  // explicit N x N distance matrix
};

struct MetricDescriptor {
    MetricFamily family = MetricFamily::euclidean_p;
    double p = 2.0;      // exponent of the euclidean_p norm (the base norm for a snowflake)
    double alpha = 1.0;  // snowflake exponent

    static constexpr double infinity = std::numeric_limits<double>::infinity();

    static MetricDescriptor euclidean(double p = 2.0);
    static MetricDescriptor snowflake(double base_p, double alpha);
    static MetricDescriptor custom_table();

    // Throws InputError unless p >= 1 (or p = inf) and 0 < alpha <= 1.
    void validate() const;

    bool operator==(const MetricDescriptor&) const = default;
};

// Finite metric space (X, d): points with coordinates (or a distance table)
// and a metric descriptor. Immutable after construction.
class PointCloud {
public:
    // Row-major coordinates, dimension values per point. The descriptor is
    // not validated here so that deliberately broken metrics can be fed to
    // validate_metric; use the factory functions for checked construction.
    PointCloud(MetricDescriptor metric, std::size_t dimension, std::vector<double> coords);

    static PointCloud from_points(MetricDescriptor metric,
                                  const std::vector<std::vector<double>>& points);
    // Row-major N x N table; entries need not be symmetric (validate_metric reports it).
    static PointCloud from_table(std::size_t count, std::vector<double> distances);

    std::size_t size() const { return count_; }
    std::size_t dimension() const { return dimension_; }
    const MetricDescriptor& metric() const { return metric_; }
    bool has_coordinates() const { return metric_.family != MetricFamily::custom_table; }
    std::span<const double> coords(PointId id) const;
    std::span<const double> table() const { return table_; }
    double diameter() const { return diameter_; }

    // Symmetric by construction: the pair is evaluated in (min, max) order.
    double distance(PointId i, PointId j) const {
        return i <= j ? raw_distance(i, j) : raw_distance(j, i);
    }
    // Evaluates d in the given argument order (used to audit symmetry).
    double raw_distance(PointId i, PointId j) const;

    // Recomputes the maximum pairwise distance from scratch.
    double recompute_diameter() const;

private:
    PointCloud() = default;

    MetricDescriptor metric_;
    std::size_t dimension_ = 0;
    std::size_t count_ = 0;
    std::vector<double> coords_;
    std::vector<double> table_;
    double diameter_ = 0.0;
};

// Checked distance: throws InputError on unknown ids.
double distance(const PointCloud& cloud, PointId i, PointId j);

struct MetricReport {
    bool symmetry_ok = true;
    bool identity_ok = true;
    bool triangle_ok = true;
    // (x, y, z) maximizing d(x,z) - d(x,y) - d(y,z); meaningful when triangle_ok is false.
    std::array<PointId, 3> worst_triple{0, 0, 0};
    double worst_violation = 0.0;
    std::uint64_t triples_checked = 0;
    bool exhaustive = true;
};

// Checks symmetry, identity of indiscernibles and the triangle inequality.
// Exhaustive for up to 1000 points; above that 10^6 triples are sampled
// with the given seed.
MetricReport validate_metric(const PointCloud& cloud, std::uint64_t seed = 0);

struct RescaledCloud {
    PointCloud cloud;
    double scale;  // distances were divided by this value
};

// Rescales so that the diameter is 1 (never above 1). Throws
// DegenerateInputError for clouds without two distinct points.
RescaledCloud rescale_to_unit_diameter(const PointCloud& cloud);

}  // namespace sio
