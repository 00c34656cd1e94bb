#include <doctest.h>

#include <random>
#include <string>

#include "sio/errors.hpp"
#include "sio/good_radii.hpp"
#include "support.hpp"

using namespace sio;

namespace {

StepMeasure dirac_half() { return StepMeasure({{testing::Q(1, 2), Rational(1)}}); }

GoodSetParams params(long lambda, int depth) {
    GoodSetParams p;
    p.lambda = lambda;
    p.depth = depth;
    return p;
}

Rational power(long base, int exponent) {
    Rational r(1);
    for (int i = 0; i < exponent; ++i) r *= base;
    return r;
}

// Independent membership oracle on I = [0, 1]: walks the generations with a
// direct scan over the atoms.
bool oracle_good(const StepMeasure& v, long lambda, int depth, const Rational& t) {
    for (int n = 1; n <= depth; ++n) {
        const Rational cells = power(lambda, 2 * n);
        const Rational scaled = t * cells;
        mpz_class j;
        mpz_fdiv_q(j.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
        const Rational lo = Rational(j) / cells, hi = Rational(j + 1) / cells;
        const bool last = Rational(j + 1) == cells;
        Rational mass = 0;
        for (const auto& atom : v.atoms()) {
            if (atom.position >= lo && (atom.position < hi || (last && atom.position == hi))) mass += atom.mass;
        }
        if (mass >= 1 / power(lambda, n)) return false;
        const Rational h = 1 / power(lambda, 3 * n);
        if (t - lo < h) return false;
        if (last ? hi - t < h : hi - t <= h) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(params(2, 1).validate(), InputError);
    CHECK_THROWS_AS(params(5, 0).validate(), InputError);
    GoodSetParams bad = params(5, 1);
    bad.b = testing::Q(3, 2);
    CHECK_THROWS_AS(bad.validate(), InputError);
    CHECK_THROWS_AS(params(5, 10).validate(), ResourceError);
    CHECK(params(5, 1).lower_bound_fraction() == testing::Q(2, 5));
    CHECK(params(3, 3).bound_is_vacuous());
    CHECK_FALSE(params(5, 3).bound_is_vacuous());
}

TEST_CASE("heavy cells") {
    const RemovedFamily one = build_removed_families(dirac_half(), params(5, 1));
    REQUIRE(one.heavy.size() == 1);
    REQUIRE(one.heavy[0].size() == 1);
    CHECK(one.heavy[0][0].index == 12);
    CHECK(one.heavy[0][0].mass == 1);

    const StepMeasure quarters = StepMeasure::from_unsorted({{testing::Q(1, 10), testing::Q(1, 4)},
                                                             {testing::Q(2, 10), testing::Q(1, 4)},
                                                             {testing::Q(3, 10), testing::Q(1, 4)},
                                                             {testing::Q(9, 10), testing::Q(1, 4)}});
    const RemovedFamily four = build_removed_families(quarters, params(5, 1));
    std::vector<std::int64_t> indices;
    for (const auto& h : four.heavy[0]) indices.push_back(h.index);
    CHECK(indices == std::vector<std::int64_t>{2, 5, 7, 22});

    // light, well separated atoms: no heavy cell anywhere
    const StepMeasure light = StepMeasure::from_unsorted(
        {{testing::Q(1, 10), testing::Q(1, 200)}, {testing::Q(5, 10), testing::Q(1, 200)}, {testing::Q(9, 10), testing::Q(1, 200)}});
    for (const auto& gen : build_removed_families(light, params(5, 3)).heavy) CHECK(gen.empty());
}

TEST_CASE("removed families descend from survivors") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const StepMeasure v = testing::random_step_measure(rng, 40);
        const long lambda = 3 + trial % 4;
        const RemovedFamily f = build_removed_families(v, params(lambda, 3));
        for (int n = 1; n <= 3; ++n) {
            const auto& gen = f.heavy[n - 1];
            CHECK(gen.size() <= std::min<std::size_t>(static_cast<std::size_t>(power(lambda, n).get_d()), v.size()));
            for (const auto& h : gen) {
                CHECK(h.mass >= 1 / power(lambda, n));
                if (n > 1) {
                    for (int m = n - 1; m >= 1; --m) {
                        std::int64_t ancestor = h.index;
                        for (int k = m; k < n; ++k) ancestor /= lambda * lambda;
                        for (const auto& other : f.heavy[m - 1]) CHECK(other.index != ancestor);
                    }
                }
            }
        }
    }
}

TEST_CASE("radius checks") {
    const RadiusCheck good = is_good_radius(dirac_half(), testing::Q(3, 10), params(5, 2));
    REQUIRE(good.good());
    REQUIRE(good.certificate.witnesses.size() == 2);
    CHECK(good.certificate.witnesses[0].cell_index == 7);
    CHECK(good.certificate.witnesses[0].cell_mass == 0);
    CHECK(good.certificate.witnesses[0].clearance == testing::Q(2, 100));
    CHECK(good.certificate.witnesses[1].cell_index == 187);
    CHECK(good.certificate.witnesses[1].clearance == testing::Q(8, 10000));
    CHECK(good.certificate.witnesses[1].clearance >= testing::Q(1, 15625));

    const RadiusCheck heavy = is_good_radius(dirac_half(), testing::Q(1, 2), params(5, 2));
    REQUIRE(heavy.rejection);
    CHECK(heavy.rejection->generation == 1);
    CHECK(heavy.rejection->reason == RejectionReason::heavy_cell);

    const RadiusCheck grid = is_good_radius(dirac_half(), testing::Q(4, 100), params(5, 2));
    REQUIRE(grid.rejection);
    CHECK(grid.rejection->generation == 1);
    CHECK(grid.rejection->reason == RejectionReason::gridline_shell);

    CHECK_THROWS_AS(is_good_radius(dirac_half(), Rational(0), params(5, 1)), InputError);
    CHECK_THROWS_AS(is_good_radius(dirac_half(), Rational(1), params(5, 1)), InputError);
    CHECK_THROWS_AS(is_good_radius(dirac_half(), testing::Q(3, 2), params(5, 1)), InputError);
}

TEST_CASE("window clearance boundaries") {
    const GoodRadiusTester tester(StepMeasure{}, params(5, 1));
    // cell [0.28, 0.32): the window must fit in [lo, hi), so t = lo + h is in and t = hi - h is out
    CHECK(tester.accepts(testing::Q(28, 100) + testing::Q(1, 125)));
    CHECK_FALSE(tester.accepts(testing::Q(32, 100) - testing::Q(1, 125)));
    CHECK(tester.accepts(testing::Q(32, 100) - testing::Q(1, 125) - testing::Q(1, 1000000)));
    // the closed last cell [0.96, 1] admits t = 1 - h
    CHECK(tester.accepts(Rational(1) - testing::Q(1, 125)));
}

TEST_CASE("materialized good sets: hand values") {
    const GoodSet dirac = materialize_good_set(dirac_half(), params(5, 1));
    CHECK(dirac.set.total_length() == testing::Q(72, 125));
    CHECK(dirac.lower_bound == testing::Q(2, 5));
    CHECK(dirac.bound_holds);
    const GoodSet empty = materialize_good_set(StepMeasure{}, params(5, 1));
    CHECK(empty.set.total_length() == testing::Q(3, 5));
    CHECK(empty.set.interval_count() == 25);
    const auto iv = dirac.set.intervals();
    CHECK(iv.front().first == testing::Q(8, 1000));
    CHECK(iv.back().second == testing::Q(992, 1000));
    CHECK(dirac.set.last_right_closed());
    CHECK_FALSE(dirac.set.contains(testing::Q(1, 2)));
    CHECK(dirac.set.contains(testing::Q(3, 10)));
}

TEST_CASE("brute-force grid agrees with 72/125") {
    const StepMeasure v = dirac_half();
    const long samples = 1000000;
    long hits = 0;
    for (long k = 0; k < samples; ++k) {
        // midpoint (2k + 1) / (2 samples); one generation, integer arithmetic only
        const long num = 2 * k + 1, den = 2 * samples;
        const long j = num * 25 / den;
        if (j == 12) continue;  // the atom's cell
        const long rem = num * 25 - j * den;  // t - j/25 = rem / (25 den)
        if (rem * 5 < den) continue;          // left clearance < 1/125
        const long right = (den - rem) * 5;
        if (j == 24 ? right < den : right <= den) continue;
        ++hits;
    }
    CHECK(std::abs(static_cast<double>(hits) / samples - 0.576) <= 2e-6);
}

TEST_CASE("budget errors name the deepest feasible depth") {
    try {
        materialize_good_set(dirac_half(), params(5, 5));
        FAIL("expected a resource error");
    } catch (const ResourceError& e) {
        CHECK(std::string(e.what()).find("maximum feasible depth is 4") != std::string::npos);
    }
    CHECK_NOTHROW(materialize_good_set(dirac_half(), params(5, 5), 20'000'000));
    const StepMeasure too_heavy({{testing::Q(1, 2), Rational(2)}});
    CHECK_THROWS_AS(materialize_good_set(too_heavy, params(5, 1)), PreconditionError);
}

TEST_CASE("good sets agree exactly with the membership oracle") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 60; ++trial) {
        const StepMeasure v = testing::random_step_measure(rng, 12);
        const long lambda = 3 + trial % 3;
        const int depth = 1 + trial % 2;
        const GoodSetParams p = params(lambda, depth);
        const GoodRadiusTester tester(v, p);
        const GoodSet good = materialize_good_set(v, p);
        const Rational unit = 1 / power(lambda, 3 * depth);
        const long lattice = static_cast<long>(power(lambda, 3 * depth).get_d());
        for (long k = 1; k < lattice; ++k) {
            for (const Rational& t : std::vector<Rational>{unit * k, unit * k + unit / 3, unit * k - unit / 7}) {
                const bool expected = oracle_good(v, lambda, depth, t);
                CHECK(good.set.contains(t) == expected);
                CHECK(tester.check(t).good() == expected);
                CHECK(tester.accepts(t) == expected);
            }
        }
        for (const auto& atom : v.atoms()) {
            if (atom.position > 0 && atom.position < 1) CHECK(good.set.contains(atom.position) == oracle_good(v, lambda, depth, atom.position));
        }
    }
}

TEST_CASE("soundness and completeness of materialized sets") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 40; ++trial) {
        const StepMeasure v = testing::random_step_measure(rng, 64);
        const long lambda = 5 + trial % 3;
        const GoodSetParams p = params(lambda, 3);
        const GoodRadiusTester tester(v, p);
        const GoodSet good = materialize_good_set(v, p);
        const Rational& unit = good.set.unit();
        std::int64_t checked = 0;
        good.set.for_each_interval([&](std::int64_t lo, std::int64_t hi) {
            if (checked++ % 97 != 0) return;
            const Rational a = good.set.point(lo), b = good.set.point(hi);
            CHECK(tester.check(a).good());
            CHECK(tester.check(b - unit / 1000000).good());
            CHECK(tester.check((a + b) / 2).good());
            if (b < 1) CHECK_FALSE(tester.check(b).good());
        });
        // every rejected cell midpoint lies outside the set
        const std::int64_t cells = p.cells_at(3);
        for (std::int64_t j = 0; j < cells; j += 37) {
            const Rational mid(Integer(2 * j + 1), Integer(2 * cells));
            if (!tester.check(mid).good()) CHECK_FALSE(good.set.contains(mid));
            else CHECK(good.set.contains(mid));
        }
    }
}

TEST_CASE("measure bound holds for random measures") {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 150; ++trial) {
        const StepMeasure v = testing::random_step_measure(rng, 64);
        const long lambda = 3 + trial % 5;
        const int depth = 1 + trial % 3;
        const GoodSetParams p = params(lambda, depth);
        const GoodSet good = materialize_good_set(v, p);
        CHECK(good.bound_holds);
        CHECK(good.set.total_length() >= p.length() * p.lower_bound_fraction());
    }
}

TEST_CASE("good sets shrink with depth") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 30; ++trial) {
        const StepMeasure v = testing::random_step_measure(rng, 30);
        const GoodSet coarse = materialize_good_set(v, params(5, 2));
        const GoodSet fine = materialize_good_set(v, params(5, 3));
        CHECK(fine.set.total_length() <= coarse.set.total_length());
        fine.set.for_each_interval([&](std::int64_t lo, std::int64_t hi) {
            CHECK(coarse.set.contains(fine.set.point(lo)));
            CHECK(coarse.set.contains(fine.set.point(hi) - fine.set.unit() / 2));
        });
    }
}

TEST_CASE("certified radii carry light windows") {
    std::mt19937_64 rng(59);
    std::uniform_int_distribution<long> pick(1, 999999);
    for (int trial = 0; trial < 50; ++trial) {
        const StepMeasure v = testing::random_step_measure(rng, 64);
        const long lambda = 5 + trial % 2 * 3;
        const GoodRadiusTester tester(v, params(lambda, 3));
        int certified = 0;
        for (int k = 0; k < 400 && certified < 40; ++k) {
            const Rational t(pick(rng), 1000000);
            const RadiusCheck c = tester.check(t);
            if (!c.good()) continue;
            ++certified;
            for (int n = 1; n <= 3; ++n) {
                const Rational h = 1 / power(lambda, 3 * n);
                CHECK(interval_mass(v, t - h, t + h, true, true) < 1 / power(lambda, n));
            }
        }
    }
}

TEST_CASE("stabilized certificates extend to deeper generations") {
    std::mt19937_64 rng(61);
    std::uniform_int_distribution<long> pick(1, 999999);
    int extended = 0;
    for (int trial = 0; trial < 80; ++trial) {
        const StepMeasure v = testing::random_step_measure(rng, 3);
        const GoodRadiusTester shallow(v, params(5, 3));
        const GoodRadiusTester deep(v, params(5, 6));
        for (int k = 0; k < 50; ++k) {
            const Rational t(pick(rng), 1000000);
            const RadiusCheck c = shallow.check(t);
            if (!c.good() || !c.certificate.mass_witnesses_extend) continue;
            ++extended;
            const RadiusCheck d = deep.check(t);
            if (d.rejection) CHECK(d.rejection->reason == RejectionReason::gridline_shell);
        }
    }
    CHECK(extended > 0);
}

TEST_CASE("fast fractional path agrees with the exact check") {
    std::mt19937_64 rng(67);
    std::uniform_int_distribution<std::int64_t> den_pick(2, std::int64_t{1} << 61);
    for (int trial = 0; trial < 20; ++trial) {
        const StepMeasure v = testing::random_step_measure(rng, 20);
        const GoodRadiusTester tester(v, params(16, 3));
        for (int k = 0; k < 500; ++k) {
            const std::int64_t den = den_pick(rng);
            const std::int64_t num = std::uniform_int_distribution<std::int64_t>(1, den - 1)(rng);
            CHECK(tester.accepts_fraction(num, den) == tester.check(testing::Q(Integer(num), Integer(den))).good());
        }
    }
}

TEST_CASE("selecting a good radius near a target") {
    CHECK(select_good_radius_near(dirac_half(), 0.3, params(5, 1)) == testing::Q(3, 10));
    const Rational near_half = select_good_radius_near(dirac_half(), 0.5, params(5, 1));
    CHECK(is_good_radius(dirac_half(), near_half, params(5, 1)).good());
    CHECK((near_half < testing::Q(472, 1000) || near_half > testing::Q(528, 1000)));
    CHECK(near_half == testing::Q(46, 100));  // cells 11 and 13 tie; the smaller wins
    const Rational free = select_good_radius_near(StepMeasure{}, 0.61, params(5, 2));
    CHECK(free == testing::Q(2 * 381 + 1, 2 * 625));
    CHECK_THROWS_AS(select_good_radius_near(dirac_half(), 1.5, params(5, 1)), InputError);
    // a sub-interval I with a heavy atom in three of its nine cells
    GoodSetParams narrow = params(3, 1);
    narrow.a = testing::Q(1, 2) - testing::Q(1, 100);
    narrow.b = testing::Q(1, 2) + testing::Q(1, 100);
    std::vector<StepMeasure::Atom> crowded;
    for (int j = 0; j < 3; ++j) crowded.push_back({narrow.a + narrow.length() * testing::Q(6 * j + 3, 18), testing::Q(1, 3)});
    const StepMeasure v = StepMeasure::from_unsorted(crowded);
    const Rational r = select_good_radius_near(v, 0.5, narrow);
    CHECK(is_good_radius(v, r, narrow).good());
    CHECK(r == narrow.a + narrow.length() * testing::Q(7, 18));
}

TEST_CASE("interval sets merge adjacent pieces") {
    IntervalSet s(Rational(0), testing::Q(1, 100));
    s.append(0, 5);
    s.append(5, 8);
    s.append(10, 12);
    s.append(14, 16);
    s.append(18, 20);
    CHECK(s.interval_count() == 4);
    CHECK(s.total_units() == 14);
    CHECK(s.contains(testing::Q(7, 100)));
    CHECK_FALSE(s.contains(testing::Q(8, 100)));
    CHECK_FALSE(s.contains(testing::Q(20, 100)));
    s.set_last_right_closed(true);
    CHECK(s.contains(testing::Q(20, 100)));
    const auto iv = s.intervals();
    REQUIRE(iv.size() == 4);
    CHECK(iv[0].second == testing::Q(8, 100));
}
