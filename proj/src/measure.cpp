#include "sio/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sio/errors.hpp"
#include "sio/parallel.hpp"

namespace sio {

DiscreteMeasure::DiscreteMeasure(std::shared_ptr<const PointCloud> cloud, std::vector<double> weights)
    : cloud_(std::move(cloud)), weights_(std::move(weights)) {
    if (!cloud_) throw InputError("measure needs a point cloud");
    if (weights_.size() != cloud_->size()) {
        throw InputError("measure has " + std::to_string(weights_.size()) + " weights for " +
                         std::to_string(cloud_->size()) + " points");
    }
    for (double w : weights_) {
        if (!std::isfinite(w) || w < 0.0) throw InputError("measure weights must be finite and >= 0");
    }
    total_mass_ = recompute_total_mass();
}

double DiscreteMeasure::recompute_total_mass() const { return pairwise_sum(weights_); }

NormalizedMeasure normalize(const DiscreteMeasure& measure) {
    const double total = measure.total_mass();
    if (!(total > 0.0)) throw DegenerateInputError("cannot normalize the zero measure");
    if (total == 1.0) return {measure, 1.0};
    std::vector<double> weights(measure.weights().begin(), measure.weights().end());
    for (double& w : weights) w /= total;
    return {DiscreteMeasure(measure.shared_cloud(), std::move(weights)), total};
}

double ball_mass(const DiscreteMeasure& measure, PointId z, double r) {
    const PointCloud& cloud = measure.cloud();
    if (z >= cloud.size()) throw InputError("unknown ball center " + std::to_string(z));
    if (!(r >= 0.0)) throw InputError("ball radius must be nonnegative");
    std::vector<double> inside;
    for (PointId y = 0; y < cloud.size(); ++y) {
        if (cloud.distance(z, y) <= r) inside.push_back(measure.weight(y));
    }
    return pairwise_sum(inside);
}

GrowthCertificate growth_constant(const DiscreteMeasure& measure, double s, double r_min) {
    if (!(s > 0.0)) throw InputError("growth exponent s must be positive");
    if (!(r_min > 0.0)) throw InputError("resolution floor r_min must be positive");
    const PointCloud& cloud = measure.cloud();
    if (measure.size() == 0 || !(measure.total_mass() > 0.0)) {
        throw DegenerateInputError("growth constant of an empty measure is undefined");
    }
    const std::size_t n = cloud.size();

    struct Best {
        double ratio = -1.0;
        double radius = 0.0;
    };
    std::vector<Best> per_atom(n);
    parallel_for(n, [&](std::size_t x) {
        if (measure.weight(x) <= 0.0) return;
        std::vector<std::pair<double, double>> by_distance;  // (distance, weight)
        by_distance.reserve(n);
        for (PointId y = 0; y < n; ++y) {
            if (measure.weight(y) > 0.0) by_distance.emplace_back(cloud.distance(x, y), measure.weight(y));
        }
        std::sort(by_distance.begin(), by_distance.end());
        Best best;
        auto consider = [&](double r, double mass) {
            const double ratio = mass / std::pow(r, s);
            if (ratio > best.ratio) best = {ratio, r};
        };
        double mass = 0.0;
        bool floor_done = false;
        for (std::size_t k = 0; k < by_distance.size(); ++k) {
            const double d = by_distance[k].first;
            if (!floor_done && d > r_min) {
                consider(r_min, mass);
                floor_done = true;
            }
            mass += by_distance[k].second;
            const bool last_at_distance = k + 1 == by_distance.size() || by_distance[k + 1].first != d;
            if (last_at_distance && d >= r_min) {
                if (d == r_min) floor_done = true;
                consider(d, mass);
            }
        }
        if (!floor_done) consider(r_min, mass);
        per_atom[x] = best;
    });

    GrowthCertificate cert{s, r_min, -1.0, 0, 0.0};
    for (PointId x = 0; x < n; ++x) {
        const Best& b = per_atom[x];
        if (b.ratio > cert.c_mu) {
            cert.c_mu = b.ratio;
            cert.witness_point = x;
            cert.witness_radius = b.radius;
        }
    }
    return cert;
}

StepMeasure::StepMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    prefix_.reserve(atoms_.size() + 1);
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        const Atom& a = atoms_[i];
        if (a.position < 0 || a.position > 1) throw InputError("step measure atoms must lie in [0, 1]");
        if (a.mass < 0) throw InputError("step measure masses must be nonnegative");
        if (i > 0 && !(atoms_[i - 1].position < a.position)) {
            throw InputError("step measure positions must be strictly increasing");
        }
        prefix_.push_back(prefix_.back() + a.mass);
    }
}

StepMeasure StepMeasure::from_unsorted(std::vector<Atom> atoms) {
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.position < b.position; });
    std::vector<Atom> merged;
    for (Atom& a : atoms) {
        if (!merged.empty() && merged.back().position == a.position) {
            merged.back().mass += a.mass;
        } else {
            merged.push_back(std::move(a));
        }
    }
    return StepMeasure(std::move(merged));
}

Rational StepMeasure::interval_mass(const Rational& lo, const Rational& hi, bool lo_closed,
                                    bool hi_closed) const {
    if (lo > hi) throw InputError("interval_mass needs lo <= hi");
    auto first = lo_closed
        ? std::lower_bound(atoms_.begin(), atoms_.end(), lo,
                           [](const Atom& a, const Rational& v) { return a.position < v; })
        : std::upper_bound(atoms_.begin(), atoms_.end(), lo,
                           [](const Rational& v, const Atom& a) { return v < a.position; });
    auto last = hi_closed
        ? std::upper_bound(atoms_.begin(), atoms_.end(), hi,
                           [](const Rational& v, const Atom& a) { return v < a.position; })
        : std::lower_bound(atoms_.begin(), atoms_.end(), hi,
                           [](const Atom& a, const Rational& v) { return a.position < v; });
    if (last <= first) return Rational(0);
    return prefix_[last - atoms_.begin()] - prefix_[first - atoms_.begin()];
}

Rational interval_mass(const StepMeasure& measure, const Rational& lo, const Rational& hi,
                       bool lo_closed, bool hi_closed) {
    return measure.interval_mass(lo, hi, lo_closed, hi_closed);
}

StepMeasure radial_pushforward(const DiscreteMeasure& measure, PointId z) {
    const PointCloud& cloud = measure.cloud();
    if (z >= cloud.size()) throw InputError("unknown pushforward center " + std::to_string(z));
    if (cloud.diameter() > 1.0) {
        throw PreconditionError("radial pushforward needs diameter <= 1; rescale the cloud first");
    }
    if (measure.total_mass() > 1.0 + 1e-12) {
        throw PreconditionError("radial pushforward needs total mass <= 1; normalize the measure first");
    }
    std::vector<std::pair<double, PointId>> by_distance;
    for (PointId y = 0; y < cloud.size(); ++y) {
        if (measure.weight(y) > 0.0) by_distance.emplace_back(cloud.distance(z, y), y);
    }
    std::sort(by_distance.begin(), by_distance.end());
    // Equal float distances merge; distinct floats are distinct rationals.
    std::vector<StepMeasure::Atom> atoms;
    double previous = -1.0;
    for (const auto& [d, y] : by_distance) {
        if (!atoms.empty() && d == previous) {
            atoms.back().mass += exact(measure.weight(y));
        } else {
            atoms.push_back({exact(d), exact(measure.weight(y))});
            previous = d;
        }
    }
    return StepMeasure(std::move(atoms));
}

}  // namespace sio
