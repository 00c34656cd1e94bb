#pragma once

// Small builders and brute-force oracles shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "sio/experiments.hpp"

namespace testing {

using sio::Rational;

// Canonical rational a / b (mpq_class does not reduce on construction).
template <typename A, typename B>
Rational Q(const A& a, const B& b) {
    Rational q(a, b);
    q.canonicalize();
    return q;
}

inline std::shared_ptr<const sio::PointCloud> line_cloud(const std::vector<double>& xs) {
    std::vector<std::vector<double>> pts;
    for (double x : xs) pts.push_back({x});
    return std::make_shared<const sio::PointCloud>(
        sio::PointCloud::from_points(sio::MetricDescriptor::euclidean(2.0), pts));
}

inline std::shared_ptr<const sio::PointCloud> plane_cloud(const std::vector<std::vector<double>>& pts) {
    return std::make_shared<const sio::PointCloud>(
        sio::PointCloud::from_points(sio::MetricDescriptor::euclidean(2.0), pts));
}

// a = (0,0), b = (1,0), weight 1/2 each.
inline sio::DiscreteMeasure two_atoms() {
    return sio::DiscreteMeasure(plane_cloud({{0.0, 0.0}, {1.0, 0.0}}), {0.5, 0.5});
}

inline sio::SimpleFunction ball_indicator(sio::PointId center, double radius, double coeff = 1.0) {
    sio::SimpleFunction f;
    f.terms.push_back({coeff, sio::Ball::from_double(center, radius), std::nullopt});
    return f;
}

// Random probability step measure with at most max_atoms atoms at positions
// k / 2^20 and masses proportional to random integers.
inline sio::StepMeasure random_step_measure(std::mt19937_64& rng, std::size_t max_atoms) {
    std::uniform_int_distribution<std::size_t> count(1, max_atoms);
    std::uniform_int_distribution<long> position(0, 1L << 20);
    std::uniform_int_distribution<long> weight(0, 40);
    const std::size_t n = count(rng);
    std::vector<sio::StepMeasure::Atom> atoms;
    std::vector<long> w;
    long total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        w.push_back(weight(rng));
        total += w.back();
    }
    if (total == 0) {
        w[0] = 1;
        total = 1;
    }
    // Half of the measures get clustered atoms so that heavy cells appear.
    const bool clustered = rng() % 2 == 0;
    const long center = position(rng);
    for (std::size_t i = 0; i < n; ++i) {
        long p = position(rng);
        if (clustered) p = std::clamp(center + (p - (1L << 19)) / 4096, 0L, 1L << 20);
        atoms.push_back({Q(p, 1L << 20), Q(w[i], total)});
    }
    return sio::StepMeasure::from_unsorted(std::move(atoms));
}

// Brute-force pairing: sum over ordered pairs with d(x,y) > eps of k(x,y) f(y) g(x) w(x) w(y).
inline double brute_pairing(const sio::KernelSpec& k, const sio::DiscreteMeasure& m, const sio::SimpleFunction& f,
                            const sio::SimpleFunction& g, double eps) {
    const auto& cloud = m.cloud();
    const auto fv = sio::evaluate(f, cloud);
    const auto gv = sio::evaluate(g, cloud);
    long double sum = 0;
    for (sio::PointId x = 0; x < cloud.size(); ++x) {
        for (sio::PointId y = 0; y < cloud.size(); ++y) {
            if (x == y || !(cloud.distance(x, y) > eps)) continue;
            sum += static_cast<long double>(sio::eval_kernel(k, cloud, x, y)) * fv[y] * gv[x] * m.weight(x) *
                   m.weight(y);
        }
    }
    return static_cast<double>(sum);
}

inline sio::SimpleFunction random_function(std::mt19937_64& rng, const sio::DiscreteMeasure& m,
                                           std::size_t max_terms) {
    std::uniform_int_distribution<std::size_t> terms(1, max_terms);
    std::uniform_int_distribution<sio::PointId> center(0, m.size() - 1);
    std::uniform_real_distribution<double> radius(0.05, 0.7);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    sio::SimpleFunction f;
    const std::size_t n = terms(rng);
    for (std::size_t i = 0; i < n; ++i) {
        f.terms.push_back({coeff(rng), sio::Ball::from_double(center(rng), radius(rng)), std::nullopt});
    }
    return f;
}

inline sio::GeneratedMeasure four_corner(int level) {
    sio::GeneratorSpec spec;
    spec.level = level;
    return sio::generate(spec);
}

}  // namespace testing
