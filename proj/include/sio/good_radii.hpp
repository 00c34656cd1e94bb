#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "sio/measure.hpp"
#include "sio/rational.hpp"

namespace sio {

// Parameters of the multiscale good-set construction on an interval I = [a, b].
// Generation n partitions I into lambda^{2n} cells of length |I| lambda^{-2n};
// a cell is heavy when its mass is >= lambda^{-n}, and every gridline of
// generation n carries a shell of half-width |I| lambda^{-3n}.
struct GoodSetParams {
    long lambda = 5;
    int depth = 1;
    Rational a{0};
    Rational b{1};

    // Throws InputError for lambda < 3, depth < 1 or an interval outside [0, 1];
    // ResourceError when lambda^{3 depth} does not fit the 62-bit lattice.
    void validate() const;

    Rational length() const { return b - a; }
    // 1 - 3 (lambda^{-1} + ... + lambda^{-depth})
    Rational lower_bound_fraction() const;
    // True when the guaranteed fraction is <= 0 (lambda < 5 at large depth).
    bool bound_is_vacuous() const { return lower_bound_fraction() <= 0; }
    std::int64_t cells_at(int generation) const;  // lambda^{2n}
};

struct HeavyCell {
    std::int64_t index;  // grid cell [a + index w, a + (index + 1) w), w = |I| lambda^{-2n}
    Rational mass;       // >= lambda^{-n}
};

// Heavy cells per generation that descend from surviving (light) cells. The
// gridline shells are implicit in the parameters.
struct RemovedFamily {
    GoodSetParams params;
    std::vector<std::vector<HeavyCell>> heavy;  // heavy[n - 1] for generation n, sorted by index
    // First generation from which every atom sits alone in its cell and is
    // heavy; from there on a light cell carries no mass at any finer generation.
    std::optional<int> mass_stabilization_generation;
};

RemovedFamily build_removed_families(const StepMeasure& measure, const GoodSetParams& params);

enum class RejectionReason { heavy_cell, gridline_shell };

struct GenerationWitness {
    int generation = 0;
    std::int64_t cell_index = 0;
    Rational cell_mass;  // < lambda^{-n} when certified
    Rational clearance;  // min distance from t to the cell endpoints, >= |I| lambda^{-3n}
};

struct GoodRadiusCertificate {
    Rational t;
    long lambda = 0;
    int depth = 0;
    Rational a, b;
    std::vector<GenerationWitness> witnesses;  // one per checked generation
    // The mass witnesses hold for every generation, not only up to depth.
    bool mass_witnesses_extend = false;
};

struct Rejection {
    int generation;
    RejectionReason reason;
};

struct RadiusCheck {
    GoodRadiusCertificate certificate;  // witnesses up to (excluding) a failing generation
    std::optional<Rejection> rejection;

    bool good() const { return !rejection.has_value(); }
};

// Precomputed per-generation cell masses for repeated radius queries.
//
// t is good at depth N when for every n <= N the cell J_n(t) is light and the
// window [t - |I| lambda^{-3n}, t + |I| lambda^{-3n}] fits inside J_n(t).
// Cells are half-open, so the right clearance must be strict except in the
// closed last cell of I.
class GoodRadiusTester {
public:
    struct CellMass {
        std::int64_t index;
        Rational mass;
        bool heavy;
    };

    GoodRadiusTester(const StepMeasure& measure, const GoodSetParams& params);

    const GoodSetParams& params() const { return params_; }

    // Full check with witnesses. Throws InputError unless a < t < b.
    RadiusCheck check(const Rational& t) const;
    bool accepts(const Rational& t) const;
    // Fast path for t = a + |I| num / den with 0 < num < den.
    bool accepts_fraction(std::int64_t num, std::int64_t den) const;

    // Atom-bearing cells of a generation (1-based), sorted by index.
    const std::vector<CellMass>& cells(int generation) const { return cells_[generation - 1]; }
    Rational cell_mass(int generation, std::int64_t index) const;
    bool cell_has_atoms(int generation, std::int64_t index) const;
    bool cell_is_heavy(int generation, std::int64_t index) const;
    bool has_atoms() const { return has_atoms_; }
    std::optional<int> mass_stabilization_generation() const { return stabilization_; }

private:
    const CellMass* find_cell(int generation, std::int64_t index) const;

    GoodSetParams params_;
    bool has_atoms_ = false;
    std::vector<std::vector<CellMass>> cells_;
    std::vector<std::vector<std::int64_t>> heavy_indices_;
    std::vector<std::int64_t> cells_per_gen_;     // lambda^{2n}
    std::vector<std::int64_t> lambda_pow_;        // lambda^{n}
    std::optional<int> stabilization_;
};

RadiusCheck is_good_radius(const StepMeasure& measure, const Rational& t, const GoodSetParams& params);

// Runs of equally long, equally spaced intervals on the lattice
// origin + unit * k, k integer, unit = |I| lambda^{-3N}.
struct IntervalRun {
    std::int64_t first_lo = 0;
    std::int64_t length = 0;
    std::int64_t period = 0;  // 0 when count == 1
    std::int64_t count = 0;

    std::int64_t lo(std::int64_t k) const { return first_lo + k * period; }
    std::int64_t end() const { return lo(count - 1) + length; }
};

// Finite union of disjoint sorted intervals [lo, hi). When last_right_closed
// is set the final interval also contains its right endpoint.
class IntervalSet {
public:
    IntervalSet(Rational origin, Rational unit) : origin_(std::move(origin)), unit_(std::move(unit)) {}

    void append(std::int64_t lo, std::int64_t hi);
    void append_run(IntervalRun run);
    void set_last_right_closed(bool closed) { last_right_closed_ = closed; }

    const Rational& origin() const { return origin_; }
    const Rational& unit() const { return unit_; }
    const std::vector<IntervalRun>& runs() const { return runs_; }
    bool last_right_closed() const { return last_right_closed_; }
    bool empty() const { return runs_.empty(); }

    std::int64_t interval_count() const;
    std::int64_t total_units() const { return total_units_; }
    Rational total_length() const { return unit_ * total_units_; }
    Rational point(std::int64_t k) const { return origin_ + unit_ * k; }

    bool contains(const Rational& t) const;
    // Expands every interval to exact rationals; only for small sets.
    std::vector<std::pair<Rational, Rational>> intervals() const;

    template <typename F>
    void for_each_interval(F&& visit) const {
        for (const IntervalRun& run : runs_)
            for (std::int64_t k = 0; k < run.count; ++k) visit(run.lo(k), run.lo(k) + run.length);
    }

private:
    void append_run_unchecked(IntervalRun run);

    Rational origin_;
    Rational unit_;
    std::vector<IntervalRun> runs_;
    std::int64_t total_units_ = 0;
    bool last_right_closed_ = false;
};

struct GoodSet {
    IntervalSet set;
    Rational lower_bound;  // |I| (1 - 3 sum_{n <= N} lambda^{-n})
    bool bound_holds = false;
};

inline constexpr std::int64_t default_interval_budget = 1'000'000;

// I minus the heavy cells (with their flanking shells) and all gridline
// shells of generations 1..N. Throws ResourceError when sum_n lambda^{2n}
// exceeds the budget, naming the deepest feasible depth.
GoodSet materialize_good_set(const StepMeasure& measure, const GoodSetParams& params,
                             std::int64_t budget = default_interval_budget);

// The certified midpoint of a depth-N grid cell closest to target, scanning
// outward; ties go to the smaller radius. Throws SearchExhaustedError when no
// cell midpoint is good.
Rational select_good_radius_near(const StepMeasure& measure, double target, const GoodSetParams& params);

}  // namespace sio
