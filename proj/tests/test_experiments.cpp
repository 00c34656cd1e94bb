#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sio/errors.hpp"
#include "sio/experiments.hpp"
#include "sio/parallel.hpp"
#include "support.hpp"

using namespace sio;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("sio_tests_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("four-corner generator") {
    GeneratorSpec spec;
    spec.level = 1;
    const GeneratedMeasure g = generate(spec);
    REQUIRE(g.measure.size() == 4);
    const double scale = 0.75 * std::sqrt(2.0);
    CHECK(g.scale == doctest::Approx(scale).epsilon(1e-15));
    const double expected[4][2] = {{0, 0}, {0.75, 0}, {0, 0.75}, {0.75, 0.75}};
    for (PointId i = 0; i < 4; ++i) {
        CHECK(g.measure.weight(i) == 0.25);
        CHECK(g.measure.cloud().coords(i)[0] * g.scale == doctest::Approx(expected[i][0]));
        CHECK(g.measure.cloud().coords(i)[1] * g.scale == doctest::Approx(expected[i][1]));
    }
    CHECK(g.r_min == doctest::Approx(0.25 / scale));

    spec.level = 3;
    const GeneratedMeasure g3 = generate(spec);
    CHECK(g3.measure.size() == 64);
    CHECK(g3.measure.total_mass() == 1.0);
    CHECK(g3.measure.cloud().diameter() <= 1.0);
    CHECK(g3.measure.cloud().diameter() == doctest::Approx(1.0).epsilon(1e-15));

    spec.level = 9;
    CHECK_THROWS_AS(generate(spec), ResourceError);
}

TEST_CASE("cantor and uniform generators") {
    GeneratorSpec spec;
    spec.family = GeneratorFamily::cantor_1d;
    spec.metric = MetricDescriptor::euclidean(2);
    spec.level = 1;
    const GeneratedMeasure c = generate(spec);
    REQUIRE(c.measure.size() == 2);
    CHECK(c.measure.cloud().coords(1)[0] * c.scale == doctest::Approx(2.0 / 3));
    CHECK(c.scale == doctest::Approx(2.0 / 3));
    CHECK(c.measure.weight(0) == 0.5);
    spec.ratio = 0.6;
    CHECK_THROWS_AS(generate(spec), InputError);

    GeneratorSpec u;
    u.family = GeneratorFamily::uniform_random;
    u.count = 50;
    u.seed = 5;
    const GeneratedMeasure a = generate(u), b = generate(u);
    for (PointId i = 0; i < 50; ++i) CHECK(a.measure.cloud().coords(i)[0] == b.measure.cloud().coords(i)[0]);
    u.seed = 6;
    CHECK(generate(u).measure.cloud().coords(0)[0] != a.measure.cloud().coords(0)[0]);
}

TEST_CASE("ancestors") {
    GeneratorSpec spec;
    CHECK(ancestor_atom(spec, 255, 4, 2) == 15);
    CHECK(ancestor_atom(spec, 100, 4, 4) == 100);
    spec.family = GeneratorFamily::cantor_1d;
    CHECK(ancestor_atom(spec, 13, 4, 1) == 1);
    CHECK_THROWS_AS(ancestor_atom(spec, 1, 1, 2), InputError);
    // an ancestor's coordinates match the corner of the fine atom's cell
    GeneratorSpec fc;
    fc.level = 4;
    const auto fine = generate(fc);
    fc.level = 2;
    const auto coarse = generate(fc);
    const PointId a = ancestor_atom(fc, 201, 4, 2);
    const double cell = 1.0 / 16 / fine.scale;
    for (int k = 0; k < 2; ++k) {
        const double x = fine.measure.cloud().coords(201)[k] * fine.scale / coarse.scale;
        CHECK(x >= coarse.measure.cloud().coords(a)[k] - 1e-12);
        CHECK(x < coarse.measure.cloud().coords(a)[k] + cell * fine.scale / coarse.scale + 1e-12);
    }
}

TEST_CASE("growth constant is uniform across four-corner levels") {
    double at4 = 0.0;
    std::vector<double> values;
    for (int m = 2; m <= 6; ++m) {
        const auto g = testing::four_corner(m);
        values.push_back(growth_constant(g.measure, 1.0, g.r_min).c_mu);
        if (m == 4) at4 = values.back();
    }
    for (double v : values) {
        CHECK(v <= 1.5 * at4);
        CHECK(v >= at4 / 1.5);
    }
}

TEST_CASE("eps grids") {
    const auto g = parse_eps_grid("geometric:start=0.5,ratio=0.5,count=4");
    CHECK(g == std::vector<double>{0.5, 0.25, 0.125, 0.0625});
    CHECK(parse_eps_grid("0.5,0.2,0.1") == std::vector<double>{0.5, 0.2, 0.1});
    CHECK_THROWS_AS(parse_eps_grid("0.1,0.5"), InputError);
    CHECK_THROWS_AS(parse_eps_grid("geometric:start=0.5,ratio=2,count=4"), InputError);
    CHECK_THROWS_AS(parse_eps_grid("geometric:begin=0.5"), InputError);
}

TEST_CASE("suite config round trip") {
    SuiteConfig c;
    c.generator.level = 2;
    c.balls.push_back({3, 0.4, false});
    c.eps_grid = {0.5, 0.1};
    const json j = suite_config_to_json(c);
    const SuiteConfig back = suite_config_from_json(j);
    CHECK(suite_config_to_json(back) == j);
    CHECK(back.balls.size() == 1);
    CHECK_THROWS_AS(suite_config_from_json(json{{"lambda", "five"}}), InputError);
    CHECK_THROWS_AS(suite_config_from_json(json{{"generator", {{"family", "sierpinski"}}}}), InputError);
}

TEST_CASE("two-atom smoke suite") {
    SuiteConfig c;
    c.generator.family = GeneratorFamily::cantor_1d;
    c.generator.metric = MetricDescriptor::euclidean(2);
    c.generator.level = 1;
    c.random_balls = 2;
    const ConvergenceReport r = run_convergence_suite(c);
    CHECK(r.all_passed());
    CHECK(r.balls.size() == 2);
    CHECK(r.traces.size() == 1);
    const auto dir = scratch("smoke");
    const EmittedFiles files = emit_report(r, dir);
    CHECK(files.traces.size() == 1);
    CHECK(std::filesystem::exists(files.summary));
    CHECK_FALSE(files.metadata);
    const json summary = read_json_file(files.summary);
    CHECK(summary.at("all_passed").get<bool>());
    for (const auto& check : summary.at("checks")) {
        CHECK(check.contains("lhs"));
        CHECK(check.contains("rhs"));
    }
}

TEST_CASE("adversarial radius is rejected with a heavy-cell witness") {
    SuiteConfig c;
    c.generator.level = 1;
    const auto g = generate(c.generator);
    // mu_0 has mass 1/4 >= 1/5 at the distance to atom 1
    c.balls.push_back({0, g.measure.cloud().distance(0, 1), true});
    try {
        run_convergence_suite(c);
        FAIL("expected a certification failure");
    } catch (const CertificationError& e) {
        CHECK(std::string(e.what()).find("heavy_cell") != std::string::npos);
        CHECK(std::string(e.what()).find("generation 1") != std::string::npos);
    }
}

TEST_CASE("empty report emission") {
    const auto dir = scratch("empty");
    const EmittedFiles files = emit_report(ConvergenceReport{}, dir, json{{"note", "x"}});
    REQUIRE(files.traces.size() == 1);
    CHECK(slurp(files.traces[0]) == "epsilon,pairing,cauchy_diff,four_term_bound\n");
    const json s = read_json_file(files.summary);
    CHECK(s.at("checks").empty());
    CHECK(s.at("balls").empty());
    CHECK(s.at("traces").empty());
    REQUIRE(files.metadata);
    CHECK(read_json_file(*files.metadata).at("note") == "x");
}

TEST_CASE("suite output is byte-stable across runs and worker counts") {
    SuiteConfig c;
    c.generator.level = 3;
    c.random_balls = 3;
    c.function_pairs = 2;
    set_worker_count(1);
    const auto a = emit_report(run_convergence_suite(c), scratch("det_a"));
    set_worker_count(8);
    const auto b = emit_report(run_convergence_suite(c), scratch("det_b"));
    set_worker_count(1);
    CHECK(slurp(a.summary) == slurp(b.summary));
    REQUIRE(a.traces.size() == b.traces.size());
    for (std::size_t i = 0; i < a.traces.size(); ++i) CHECK(slurp(a.traces[i]) == slurp(b.traces[i]));
}
