#pragma once

#include <memory>
#include <span>
#include <vector>

#include "sio/metric_space.hpp"
#include "sio/rational.hpp"

namespace sio {

// Finite atomic Radon measure: a nonnegative weight on every point of a cloud.
class DiscreteMeasure {
public:
    DiscreteMeasure(std::shared_ptr<const PointCloud> cloud, std::vector<double> weights);

    const PointCloud& cloud() const { return *cloud_; }
    const std::shared_ptr<const PointCloud>& shared_cloud() const { return cloud_; }
    std::span<const double> weights() const { return weights_; }
    double weight(PointId id) const { return weights_[id]; }
    double total_mass() const { return total_mass_; }
    std::size_t size() const { return weights_.size(); }

    double recompute_total_mass() const;

private:
    std::shared_ptr<const PointCloud> cloud_;
    std::vector<double> weights_;
    double total_mass_ = 0.0;
};

struct NormalizedMeasure {
    DiscreteMeasure measure;
    double mass_scale;  // weights were divided by this value
};

// Divides every weight by the total mass. Throws DegenerateInputError for the zero measure.
NormalizedMeasure normalize(const DiscreteMeasure& measure);

// Mass of the closed ball {y : d(z, y) <= r}.
double ball_mass(const DiscreteMeasure& measure, PointId z, double r);

struct GrowthCertificate {
    double s = 0.0;
    double r_min = 0.0;
    double c_mu = 0.0;
    PointId witness_point = 0;
    double witness_radius = 0.0;
};

// Smallest c with mass(B(x, r)) <= c r^s for every atom x and every r >= r_min.
// Radii are scanned at r_min and at every pairwise distance >= r_min, which is
// exhaustive because ball mass is a right-continuous step function of r.
GrowthCertificate growth_constant(const DiscreteMeasure& measure, double s, double r_min);

// Purely atomic measure on [0, 1] with exact rational positions and masses.
class StepMeasure {
public:
    struct Atom {
        Rational position;
        Rational mass;
    };

    StepMeasure() = default;
    // Atoms must have strictly increasing positions in [0, 1] and nonnegative masses.
    explicit StepMeasure(std::vector<Atom> atoms);
    // Sorts the atoms and merges equal positions.
    static StepMeasure from_unsorted(std::vector<Atom> atoms);

    std::span<const Atom> atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    const Rational& total() const { return prefix_.back(); }

    Rational interval_mass(const Rational& lo, const Rational& hi, bool lo_closed,
                           bool hi_closed) const;

private:
    std::vector<Atom> atoms_;
    std::vector<Rational> prefix_{Rational(0)};  // prefix_[i] = mass of atoms [0, i)
};

// Exact mass of the interval between lo and hi with the requested endpoint inclusion.
Rational interval_mass(const StepMeasure& measure, const Rational& lo, const Rational& hi,
                       bool lo_closed, bool hi_closed);

// Distribution of d(z, .) under the measure: mu_z(F) = mu{x : d(x, z) in F}.
// Requires diameter <= 1 and total mass <= 1 (up to round-off).
StepMeasure radial_pushforward(const DiscreteMeasure& measure, PointId z);

}  // namespace sio
