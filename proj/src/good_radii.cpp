#include "sio/good_radii.hpp"

#include <algorithm>
#include <string>

#include "sio/errors.hpp"

namespace sio {

namespace {

using u128 = unsigned __int128;

constexpr long max_lattice_bits = 62;

std::int64_t to_int64(const Integer& z) { return static_cast<std::int64_t>(z.get_si()); }

}  // namespace

void GoodSetParams::validate() const {
    if (lambda < 3) throw InputError("lambda must be an integer >= 3, got " + std::to_string(lambda));
    if (depth < 1) throw InputError("depth must be >= 1, got " + std::to_string(depth));
    if (a < 0 || b > 1 || !(a < b)) throw InputError("interval I = [a, b] must satisfy 0 <= a < b <= 1");
    const Integer lattice = ipow(lambda, 3u * static_cast<unsigned>(depth));
    if (mpz_sizeinbase(lattice.get_mpz_t(), 2) > static_cast<std::size_t>(max_lattice_bits)) {
        throw ResourceError("lambda^(3 depth) exceeds the 62-bit lattice; reduce depth");
    }
}

Rational GoodSetParams::lower_bound_fraction() const {
    Rational sum = 0;
    for (int n = 1; n <= depth; ++n) sum += inverse_power(lambda, static_cast<unsigned>(n));
    return 1 - 3 * sum;
}

std::int64_t GoodSetParams::cells_at(int generation) const {
    return to_int64(ipow(lambda, 2u * static_cast<unsigned>(generation)));
}

GoodRadiusTester::GoodRadiusTester(const StepMeasure& measure, const GoodSetParams& params)
    : params_(params) {
    params_.validate();
    const int depth = params_.depth;
    for (int n = 0; n <= 3 * depth; ++n) lambda_pow_.push_back(to_int64(ipow(params_.lambda, n)));
    for (int n = 0; n <= depth; ++n) cells_per_gen_.push_back(lambda_pow_[2 * n]);

    const Rational length = params_.length();
    std::vector<std::pair<Rational, Rational>> inside;  // (relative position, mass)
    for (const auto& atom : measure.atoms()) {
        if (atom.mass > 0 && atom.position >= params_.a && atom.position <= params_.b) {
            inside.emplace_back((atom.position - params_.a) / length, atom.mass);
        }
    }
    has_atoms_ = !inside.empty();

    cells_.resize(depth);
    heavy_indices_.resize(depth);
    for (int n = 1; n <= depth; ++n) {
        const Integer cells = cells_per_gen_[n];
        const Rational threshold = inverse_power(params_.lambda, n);
        auto& row = cells_[n - 1];
        for (const auto& [x, mass] : inside) {
            Integer j = floor(x * cells);
            if (j == cells) j -= 1;  // the last cell is closed
            const std::int64_t index = to_int64(j);
            if (!row.empty() && row.back().index == index) {
                row.back().mass += mass;
            } else {
                row.push_back({index, mass, false});
            }
        }
        for (auto& cell : row) {
            cell.heavy = cell.mass >= threshold;
            if (cell.heavy) heavy_indices_[n - 1].push_back(cell.index);
        }
    }

    // Stabilization: cells narrower than every atom gap and a threshold below
    // every atom mass make each atom-bearing cell heavy.
    if (inside.empty()) {
        stabilization_ = 1;
    } else {
        std::optional<Rational> min_gap;
        Rational min_mass = inside.front().second;
        for (std::size_t i = 0; i < inside.size(); ++i) {
            min_mass = std::min(min_mass, inside[i].second);
            if (i > 0) {
                const Rational gap = inside[i].first - inside[i - 1].first;
                if (!min_gap || gap < *min_gap) min_gap = gap;
            }
        }
        Integer power = params_.lambda;  // lambda^n
        for (int n = 1; n <= 4096; ++n, power *= params_.lambda) {
            const Rational width(Integer(1), power * power);
            const Rational threshold(Integer(1), power);
            if ((!min_gap || width < *min_gap) && threshold <= min_mass) {
                stabilization_ = n;
                break;
            }
        }
    }
}

const GoodRadiusTester::CellMass* GoodRadiusTester::find_cell(int generation, std::int64_t index) const {
    const auto& row = cells_[generation - 1];
    auto it = std::lower_bound(row.begin(), row.end(), index,
                               [](const CellMass& c, std::int64_t v) { return c.index < v; });
    if (it == row.end() || it->index != index) return nullptr;
    return &*it;
}

Rational GoodRadiusTester::cell_mass(int generation, std::int64_t index) const {
    const CellMass* cell = find_cell(generation, index);
    return cell ? cell->mass : Rational(0);
}

bool GoodRadiusTester::cell_has_atoms(int generation, std::int64_t index) const {
    return find_cell(generation, index) != nullptr;
}

bool GoodRadiusTester::cell_is_heavy(int generation, std::int64_t index) const {
    const CellMass* cell = find_cell(generation, index);
    return cell != nullptr && cell->heavy;
}

RadiusCheck GoodRadiusTester::check(const Rational& t) const {
    const Rational length = params_.length();
    const Rational x = (t - params_.a) / length;
    if (!(x > 0 && x < 1)) throw InputError("radius " + t.get_str() + " is not interior to I");

    RadiusCheck result;
    GoodRadiusCertificate& cert = result.certificate;
    cert.t = t;
    cert.lambda = params_.lambda;
    cert.depth = params_.depth;
    cert.a = params_.a;
    cert.b = params_.b;
    for (int n = 1; n <= params_.depth; ++n) {
        const Integer cells = cells_per_gen_[n];
        const std::int64_t j = to_int64(floor(x * cells));
        const Rational mass = cell_mass(n, j);
        if (mass >= inverse_power(params_.lambda, n)) {
            result.rejection = Rejection{n, RejectionReason::heavy_cell};
            return result;
        }
        Rational lo(Integer(j), cells);
        Rational hi(Integer(j + 1), cells);
        lo.canonicalize();
        hi.canonicalize();
        const Rational left = x - lo;
        const Rational right = hi - x;
        const Rational shell = inverse_power(params_.lambda, 3 * n);
        const bool last = j == cells_per_gen_[n] - 1;
        const bool clear = left >= shell && (last ? right >= shell : right > shell);
        if (!clear) {
            result.rejection = Rejection{n, RejectionReason::gridline_shell};
            return result;
        }
        cert.witnesses.push_back({n, j, mass, length * std::min(left, right)});
    }
    cert.mass_witnesses_extend = stabilization_ && *stabilization_ <= params_.depth;
    return result;
}

bool GoodRadiusTester::accepts_fraction(std::int64_t num, std::int64_t den) const {
    if (!(den > 0 && num > 0 && num < den)) {
        throw InputError("fractional radius must satisfy 0 < num < den");
    }
    const u128 d = static_cast<u128>(den);
    for (int n = 1; n <= params_.depth; ++n) {
        const std::int64_t cells = cells_per_gen_[n];
        const u128 scaled = static_cast<u128>(num) * static_cast<u128>(cells);
        std::int64_t j;
        if (scaled >> 64 == 0) {
            j = static_cast<std::int64_t>(static_cast<std::uint64_t>(scaled) / static_cast<std::uint64_t>(den));
        } else {
            j = static_cast<std::int64_t>(scaled / d);
        }
        const auto& heavy = heavy_indices_[n - 1];
        if (!heavy.empty() && std::binary_search(heavy.begin(), heavy.end(), j)) return false;
        const u128 rem = scaled - static_cast<u128>(j) * d;
        const u128 h = static_cast<u128>(lambda_pow_[n]);
        if (rem * h < d) return false;
        const u128 right = (d - rem) * h;
        if (j == cells - 1 ? right < d : right <= d) return false;
    }
    return true;
}

bool GoodRadiusTester::accepts(const Rational& t) const {
    const Rational x = (t - params_.a) / params_.length();
    if (!(x > 0 && x < 1)) throw InputError("radius " + t.get_str() + " is not interior to I");
    if (fits_int64(x.get_num()) && fits_int64(x.get_den())) {
        return accepts_fraction(to_int64(x.get_num()), to_int64(x.get_den()));
    }
    return check(t).good();
}

RadiusCheck is_good_radius(const StepMeasure& measure, const Rational& t, const GoodSetParams& params) {
    return GoodRadiusTester(measure, params).check(t);
}

RemovedFamily build_removed_families(const StepMeasure& measure, const GoodSetParams& params) {
    const GoodRadiusTester tester(measure, params);
    RemovedFamily family;
    family.params = params;
    family.mass_stabilization_generation = tester.mass_stabilization_generation();
    family.heavy.resize(params.depth);
    const std::int64_t branching = params.lambda * params.lambda;
    for (int n = 1; n <= params.depth; ++n) {
        for (const auto& cell : tester.cells(n)) {
            if (!cell.heavy) continue;
            bool ancestor_removed = false;
            std::int64_t ancestor = cell.index;
            for (int k = n - 1; k >= 1 && !ancestor_removed; --k) {
                ancestor /= branching;
                const auto& row = family.heavy[k - 1];
                ancestor_removed = std::binary_search(
                    row.begin(), row.end(), HeavyCell{ancestor, 0},
                    [](const HeavyCell& x, const HeavyCell& y) { return x.index < y.index; });
            }
            if (!ancestor_removed) family.heavy[n - 1].push_back({cell.index, cell.mass});
        }
    }
    return family;
}

void IntervalSet::append(std::int64_t lo, std::int64_t hi) {
    append_run(IntervalRun{lo, hi - lo, 0, 1});
}

void IntervalSet::append_run(IntervalRun run) {
    if (run.count <= 0 || run.length <= 0) return;
    if (!runs_.empty() && run.first_lo < runs_.back().end()) {
        throw PreconditionError("intervals must be appended in increasing order");
    }
    total_units_ += run.length * run.count;
    if (!runs_.empty() && run.count == 1 && run.first_lo == runs_.back().end()) {
        // touching intervals fuse into one
        IntervalRun& back = runs_.back();
        const std::int64_t lo = back.lo(back.count - 1);
        const std::int64_t length = back.length + run.length;
        if (back.count == 1) {
            runs_.pop_back();
        } else if (--back.count == 1) {
            back.period = 0;
        }
        append_run_unchecked(IntervalRun{lo, length, 0, 1});
        return;
    }
    append_run_unchecked(run);
}

void IntervalSet::append_run_unchecked(IntervalRun run) {
    if (!runs_.empty()) {
        IntervalRun& back = runs_.back();
        if (back.length == run.length) {
            if (back.count == 1 && run.count == 1) {
                back.period = run.first_lo - back.first_lo;
                back.count = 2;
                return;
            }
            if (back.count == 1 && run.first_lo - back.first_lo == run.period) {
                back.period = run.period;
                back.count = run.count + 1;
                return;
            }
            if (back.count > 1 && run.first_lo == back.lo(back.count) &&
                (run.count == 1 || run.period == back.period)) {
                back.count += run.count;
                return;
            }
        }
    }
    if (run.count == 1) run.period = 0;
    runs_.push_back(run);
}

std::int64_t IntervalSet::interval_count() const {
    std::int64_t count = 0;
    for (const auto& run : runs_) count += run.count;
    return count;
}

bool IntervalSet::contains(const Rational& t) const {
    if (runs_.empty()) return false;
    const Rational x = (t - origin_) / unit_;
    auto it = std::upper_bound(runs_.begin(), runs_.end(), x,
                               [](const Rational& v, const IntervalRun& r) { return v < r.first_lo; });
    if (it == runs_.begin()) return false;
    const IntervalRun& run = *std::prev(it);
    std::int64_t k = 0;
    if (run.count > 1) {
        const Integer q = floor((x - run.first_lo) / run.period);
        k = q >= run.count ? run.count - 1 : static_cast<std::int64_t>(q.get_si());
    }
    const std::int64_t lo = run.lo(k);
    const std::int64_t hi = lo + run.length;
    if (x < lo) return false;
    if (x < hi) return true;
    const bool very_last = &run == &runs_.back() && k == run.count - 1;
    return very_last && last_right_closed_ && x == hi;
}

std::vector<std::pair<Rational, Rational>> IntervalSet::intervals() const {
    std::vector<std::pair<Rational, Rational>> out;
    for_each_interval([&](std::int64_t lo, std::int64_t hi) { out.emplace_back(point(lo), point(hi)); });
    return out;
}

namespace {

// Lattice sweep of the good set: every generation-n cell is visited with the
// clearance its ancestors' shells already impose on its left and right ends.
class GoodSetBuilder {
public:
    GoodSetBuilder(const GoodRadiusTester& tester) : tester_(tester), params_(tester.params()) {
        const int depth = params_.depth;
        branching_ = params_.lambda * params_.lambda;
        for (int n = 0; n <= depth; ++n) {
            width_.push_back(to_int64(ipow(params_.lambda, 3 * depth - 2 * n)));
            shell_.push_back(to_int64(ipow(params_.lambda, 3 * depth - 3 * n)));
        }
        // Pure cells (no atoms, no inherited clearance) repeat the same pattern;
        // build those patterns from the finest generation up.
        patterns_.resize(depth + 1);
        for (int n = depth; n >= 1; --n) {
            IntervalSet pattern(Rational(0), Rational(1));
            visit(n, 0, 0, 0, 0, true, pattern);
            patterns_[n] = pattern.runs();
        }
    }

    void build(IntervalSet& out) {
        visit(0, 0, 0, 0, 0, !tester_.has_atoms(), out);
    }

    std::int64_t lattice_size() const { return width_[0]; }
    std::int64_t finest_width() const { return width_.back(); }

private:
    void visit(int n, std::int64_t index, std::int64_t lo, std::int64_t left, std::int64_t right,
               bool pure, IntervalSet& out) {
        const std::int64_t hi = lo + width_[n];
        if (n >= 1) {
            if (!pure && tester_.cell_is_heavy(n, index)) return;
            left = std::max(left, shell_[n]);
            right = std::max(right, shell_[n]);
        }
        if (lo + left >= hi - right) return;
        if (n == params_.depth) {
            out.append(lo + left, hi - right);
            return;
        }
        const std::int64_t child_width = width_[n + 1];
        const std::int64_t first = left / child_width;
        const std::int64_t last = branching_ - 1 - right / child_width;
        for (std::int64_t i = first; i <= last; ++i) {
            const std::int64_t child_lo = lo + i * child_width;
            const std::int64_t child_left = std::max<std::int64_t>(0, left - i * child_width);
            const std::int64_t child_right =
                std::max<std::int64_t>(0, right - (branching_ - 1 - i) * child_width);
            const std::int64_t child_index = index * branching_ + i;
            const bool child_pure = pure || !tester_.cell_has_atoms(n + 1, child_index);
            if (child_pure && child_left == 0 && child_right == 0 && !patterns_[n + 1].empty()) {
                for (IntervalRun run : patterns_[n + 1]) {
                    run.first_lo += child_lo;
                    out.append_run(run);
                }
                continue;
            }
            visit(n + 1, child_index, child_lo, child_left, child_right, child_pure, out);
        }
    }

    const GoodRadiusTester& tester_;
    const GoodSetParams& params_;
    std::int64_t branching_ = 0;
    std::vector<std::int64_t> width_;  // cell width per generation, lattice units
    std::vector<std::int64_t> shell_;  // shell half-width per generation, lattice units
    std::vector<std::vector<IntervalRun>> patterns_;
};

}  // namespace

GoodSet materialize_good_set(const StepMeasure& measure, const GoodSetParams& params, std::int64_t budget) {
    params.validate();
    if (measure.total() > 1 + make_rational(1, 1LL << 40)) {
        throw PreconditionError("good-set construction needs a measure of total mass <= 1");
    }
    Integer removable = 0;
    int feasible = 0;
    for (int n = 1; n <= params.depth; ++n) {
        removable += ipow(params.lambda, 2u * n);
        if (removable <= budget) feasible = n;
    }
    if (removable > budget) {
        throw ResourceError("depth " + std::to_string(params.depth) + " needs " + removable.get_str() +
                            " removable intervals, budget is " + std::to_string(budget) +
                            "; maximum feasible depth is " + std::to_string(feasible));
    }

    const GoodRadiusTester tester(measure, params);
    GoodSetBuilder builder(tester);
    const std::int64_t lattice = builder.lattice_size();
    GoodSet result{IntervalSet(params.a, params.length() / lattice), Rational(0), false};
    builder.build(result.set);
    if (!result.set.empty()) {
        result.set.set_last_right_closed(result.set.runs().back().end() > lattice - builder.finest_width());
    }

    std::int64_t bound_units = lattice;
    for (int n = 1; n <= params.depth; ++n) bound_units -= 3 * to_int64(ipow(params.lambda, 3 * params.depth - n));
    result.lower_bound = params.length() * params.lower_bound_fraction();
    result.bound_holds = result.set.total_units() >= bound_units;
    return result;
}

Rational select_good_radius_near(const StepMeasure& measure, double target, const GoodSetParams& params) {
    if (!(target > 0.0 && target < 1.0)) throw InputError("target radius must lie in (0, 1)");
    const GoodRadiusTester tester(measure, params);
    const std::int64_t cells = params.cells_at(params.depth);
    const Rational length = params.length();
    // Candidate j sits at relative position (2j + 1) / (2 cells); y is the target on that scale.
    const Rational y = (exact(target) - params.a) / length * (2 * cells);
    Integer start = floor((y - 1) / 2);
    std::int64_t left = start < -1 ? -1 : (start >= cells ? cells - 1 : to_int64(start));
    std::int64_t right = left + 1;
    while (left >= 0 || right < cells) {
        bool take_left;
        if (left < 0) {
            take_left = false;
        } else if (right >= cells) {
            take_left = true;
        } else {
            take_left = y - (2 * left + 1) <= (2 * right + 1) - y;
        }
        const std::int64_t j = take_left ? left-- : right++;
        if (tester.accepts_fraction(2 * j + 1, 2 * cells)) {
            Rational offset(Integer(2 * j + 1), Integer(2 * cells));
            offset.canonicalize();
            return params.a + length * offset;
        }
    }
    throw SearchExhaustedError("no depth-" + std::to_string(params.depth) +
                               " cell midpoint in I is a good radius");
}

}  // namespace sio
