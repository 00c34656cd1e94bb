#include "sio/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "sio/errors.hpp"

namespace sio {

namespace {

std::size_t checked_count(std::size_t base, int level) {
    if (level < 0) throw InputError("generator level must be nonnegative");
    std::size_t count = 1;
    for (int k = 0; k < level; ++k) {
        count *= base;
        if (count > max_generated_atoms) {
            throw ResourceError("generator would produce more than " + std::to_string(max_generated_atoms) +
                                " atoms");
        }
    }
    return count;
}

double metric_length(const MetricDescriptor& metric, double side) {
    return metric.family == MetricFamily::snowflake ? std::pow(side, metric.alpha) : side;
}

std::string format_double(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    return buffer;
}

std::string family_name(GeneratorFamily family) {
    switch (family) {
        case GeneratorFamily::four_corner_cantor: return "four_corner";
        case GeneratorFamily::cantor_1d: return "cantor_1d";
        case GeneratorFamily::uniform_random: return "uniform_random";
    }
    return "unknown";
}

GeneratorFamily family_from_name(const std::string& name) {
    if (name == "four_corner" || name == "four_corner_cantor") return GeneratorFamily::four_corner_cantor;
    if (name == "cantor_1d") return GeneratorFamily::cantor_1d;
    if (name == "uniform_random") return GeneratorFamily::uniform_random;
    throw InputError("unknown generator family '" + name + "'");
}

}  // namespace

GeneratedMeasure generate(const GeneratorSpec& spec) {
    spec.metric.validate();
    if (spec.metric.family == MetricFamily::custom_table) {
        throw InputError("generators need a coordinate metric");
    }
    std::vector<std::vector<double>> points;
    double side = 0.0;
    switch (spec.family) {
        case GeneratorFamily::four_corner_cantor: {
            const std::size_t count = checked_count(4, spec.level);
            static constexpr double corner[4][2] = {{0.0, 0.0}, {0.75, 0.0}, {0.0, 0.75}, {0.75, 0.75}};
            for (std::size_t id = 0; id < count; ++id) {
                double x = 0.0, y = 0.0, scale = 1.0;
                std::size_t rest = id;
                std::vector<int> digits(spec.level);
                for (int k = spec.level - 1; k >= 0; --k) {
                    digits[k] = static_cast<int>(rest % 4);
                    rest /= 4;
                }
                for (int d : digits) {
                    x += corner[d][0] * scale;
                    y += corner[d][1] * scale;
                    scale /= 4.0;
                }
                points.push_back({x, y});
            }
            side = std::ldexp(1.0, -2 * spec.level);
            break;
        }
        case GeneratorFamily::cantor_1d: {
            if (!(spec.ratio > 0.0 && spec.ratio < 0.5)) throw InputError("cantor ratio must lie in (0, 1/2)");
            const std::size_t count = checked_count(2, spec.level);
            for (std::size_t id = 0; id < count; ++id) {
                double x = 0.0, scale = 1.0;
                for (int k = spec.level - 1; k >= 0; --k) {
                    if ((id >> k) & 1u) x += (1.0 - spec.ratio) * scale;
                    scale *= spec.ratio;
                }
                points.push_back({x});
            }
            side = std::pow(spec.ratio, spec.level);
            break;
        }
        case GeneratorFamily::uniform_random: {
            if (spec.count == 0 || spec.count > max_generated_atoms) {
                throw ResourceError("uniform_random count must lie in [1, " + std::to_string(max_generated_atoms) + "]");
            }
            if (spec.dimension == 0) throw InputError("uniform_random dimension must be positive");
            std::mt19937_64 rng(spec.seed);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            for (std::size_t i = 0; i < spec.count; ++i) {
                std::vector<double> p(spec.dimension);
                for (double& c : p) c = unit(rng);
                points.push_back(std::move(p));
            }
            side = std::pow(static_cast<double>(spec.count), -1.0 / static_cast<double>(spec.dimension));
            break;
        }
    }
    const PointCloud raw = PointCloud::from_points(spec.metric, points);
    double scale = 1.0;
    std::shared_ptr<const PointCloud> cloud;
    if (raw.size() >= 2) {
        RescaledCloud rescaled = rescale_to_unit_diameter(raw);
        scale = rescaled.scale;
        cloud = std::make_shared<const PointCloud>(std::move(rescaled.cloud));
    } else {
        cloud = std::make_shared<const PointCloud>(raw);
    }
    std::vector<double> weights(cloud->size(), 1.0 / static_cast<double>(cloud->size()));
    NormalizedMeasure normalized = normalize(DiscreteMeasure(cloud, std::move(weights)));
    return {std::move(normalized.measure), metric_length(spec.metric, side) / scale, scale};
}

PointId ancestor_atom(const GeneratorSpec& spec, PointId id, int fine, int coarse) {
    if (coarse > fine) throw InputError("ancestor level must not exceed the atom's level");
    std::size_t base;
    switch (spec.family) {
        case GeneratorFamily::four_corner_cantor: base = 4; break;
        case GeneratorFamily::cantor_1d: base = 2; break;
        default: throw InputError("ancestors exist only for self-similar generators");
    }
    for (int k = coarse; k < fine; ++k) id /= base;
    return id;
}

std::vector<double> parse_eps_grid(const std::string& text) {
    std::vector<double> grid;
    const std::string prefix = "geometric:";
    if (text.rfind(prefix, 0) == 0) {
        double start = 0.5, ratio = 0.5;
        long count = 10;
        std::stringstream fields(text.substr(prefix.size()));
        std::string field;
        while (std::getline(fields, field, ',')) {
            const auto eq = field.find('=');
            if (eq == std::string::npos) throw InputError("bad eps-grid field '" + field + "'");
            const std::string key = field.substr(0, eq);
            const std::string value = field.substr(eq + 1);
            if (key == "start") start = std::stod(value);
            else if (key == "ratio") ratio = std::stod(value);
            else if (key == "count") count = std::stol(value);
            else throw InputError("unknown eps-grid key '" + key + "'");
        }
        if (!(start > 0.0) || !(ratio > 0.0 && ratio < 1.0) || count < 1) {
            throw InputError("geometric eps grid needs start > 0, 0 < ratio < 1, count >= 1");
        }
        double eps = start;
        for (long k = 0; k < count; ++k, eps *= ratio) grid.push_back(eps);
    } else {
        std::stringstream fields(text);
        std::string field;
        while (std::getline(fields, field, ',')) grid.push_back(std::stod(field));
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] < grid[i - 1]))) {
            throw InputError("eps grid must be positive and strictly decreasing");
        }
    }
    return grid;
}

SuiteConfig suite_config_from_json(const json& j) {
    SuiteConfig config;
    try {
        if (j.contains("generator")) {
            const json& g = j.at("generator");
            config.generator.family = family_from_name(g.value("family", "four_corner"));
            config.generator.level = g.value("level", config.generator.level);
            config.generator.ratio = g.value("ratio", config.generator.ratio);
            config.generator.count = g.value("count", config.generator.count);
            config.generator.dimension = g.value("dimension", config.generator.dimension);
            config.generator.seed = g.value("seed", config.generator.seed);
            if (g.contains("metric")) config.generator.metric = metric_from_json(g.at("metric"));
        }
        if (j.contains("kernel")) config.kernel = kernel_from_json(j.at("kernel"));
        config.lambda = j.value("lambda", config.lambda);
        config.depth = j.value("depth", config.depth);
        if (j.contains("balls")) {
            const json& b = j.at("balls");
            if (b.is_number()) {
                config.random_balls = b.get<std::size_t>();
            } else {
                for (const json& req : b) {
                    config.balls.push_back(
                        {req.at("center").get<PointId>(), req.at("target").get<double>(), req.value("force", false)});
                }
            }
        }
        config.function_pairs = j.value("function_pairs", config.function_pairs);
        config.max_terms = j.value("max_terms", config.max_terms);
        if (j.contains("eps_grid")) {
            const json& e = j.at("eps_grid");
            config.eps_grid = e.is_string() ? parse_eps_grid(e.get<std::string>()) : e.get<std::vector<double>>();
        }
        config.seed = j.value("seed", config.seed);
        config.cross_levels = j.value("cross_levels", config.cross_levels);
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed suite config: ") + e.what());
    }
    return config;
}

json suite_config_to_json(const SuiteConfig& config) {
    json generator{{"family", family_name(config.generator.family)},
                   {"level", config.generator.level},
                   {"metric", metric_to_json(config.generator.metric)}};
    if (config.generator.family == GeneratorFamily::cantor_1d) generator["ratio"] = config.generator.ratio;
    if (config.generator.family == GeneratorFamily::uniform_random) {
        generator["count"] = config.generator.count;
        generator["dimension"] = config.generator.dimension;
        generator["seed"] = config.generator.seed;
    }
    json balls;
    if (config.balls.empty()) {
        balls = config.random_balls;
    } else {
        balls = json::array();
        for (const auto& b : config.balls) {
            balls.push_back({{"center", b.center}, {"target", b.target}, {"force", b.force}});
        }
    }
    return json{{"generator", std::move(generator)},
                {"kernel", kernel_to_json(config.kernel)},
                {"lambda", config.lambda},
                {"depth", config.depth},
                {"balls", std::move(balls)},
                {"function_pairs", config.function_pairs},
                {"max_terms", config.max_terms},
                {"eps_grid", config.eps_grid},
                {"seed", config.seed},
                {"cross_levels", config.cross_levels}};
}

bool ConvergenceReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.pass; });
}

namespace {

GoodSetParams unit_params(long lambda, int depth) {
    GoodSetParams params;
    params.lambda = lambda;
    params.depth = depth;
    return params;
}

std::string reason_name(RejectionReason reason) {
    return reason == RejectionReason::heavy_cell ? "heavy_cell" : "gridline_shell";
}

bool interior(const Rational& r) { return r > 0 && r < 1; }

std::vector<LevelRecord> trend(const GeneratorSpec& spec, const KernelSpec& kernel, int top_level,
                               PointId top_center, const Rational& radius, const std::vector<int>& levels,
                               long lambda, int depth, bool recertify) {
    std::vector<LevelRecord> out;
    for (int level : levels) {
        GeneratorSpec at = spec;
        at.level = level;
        const GeneratedMeasure gen = generate(at);
        LevelRecord record;
        record.level = level;
        record.center = ancestor_atom(spec, top_center, top_level, level);
        record.radius = radius;
        const StepMeasure pushed = radial_pushforward(gen.measure, record.center);
        if (interior(radius)) {
            for (int d = 1; d <= depth; ++d) {
                if (!GoodRadiusTester(pushed, unit_params(lambda, d)).check(radius).good()) break;
                record.certification_depth = d;
            }
        }
        record.original_radius_certified = record.certification_depth == depth;
        if (recertify && !record.original_radius_certified) {
            record.radius = select_good_radius_near(pushed, radius.get_d(), unit_params(lambda, depth));
        }
        record.total_boundary = total_boundary_integral(kernel, gen.measure, Ball{record.center, record.radius});
        out.push_back(std::move(record));
    }
    return out;
}

json level_to_json(const LevelRecord& r) {
    return json{{"level", r.level},
                {"center", r.center},
                {"radius", rational_to_json(r.radius)},
                {"radius_value", r.radius.get_d()},
                {"original_radius_certified", r.original_radius_certified},
                {"certification_depth", r.certification_depth},
                {"total_boundary_integral", r.total_boundary}};
}

SimpleFunction random_function(std::mt19937_64& rng, const std::vector<CertifiedBall>& balls,
                               std::size_t max_terms) {
    std::uniform_int_distribution<std::size_t> term_count(1, std::max<std::size_t>(1, max_terms));
    std::uniform_int_distribution<std::size_t> pick(0, balls.size() - 1);
    std::uniform_real_distribution<double> coefficient(-1.0, 1.0);
    SimpleFunction f;
    const std::size_t terms = term_count(rng);
    for (std::size_t t = 0; t < terms; ++t) {
        const CertifiedBall& b = balls[pick(rng)];
        f.terms.push_back({coefficient(rng), b.ball, b.certification.certificate});
    }
    return f;
}

}  // namespace

std::vector<LevelRecord> boundary_trend(const GeneratorSpec& spec, const KernelSpec& kernel,
                                        int top_level, PointId top_center, const Rational& radius,
                                        const std::vector<int>& levels, long lambda, int depth) {
    return trend(spec, kernel, top_level, top_center, radius, levels, lambda, depth, true);
}

ConvergenceReport run_convergence_suite(const SuiteConfig& config) {
    ConvergenceReport report;
    report.config = suite_config_to_json(config);
    const GeneratedMeasure gen = generate(config.generator);
    const DiscreteMeasure& measure = gen.measure;
    const PointCloud& cloud = measure.cloud();
    if (cloud.diameter() > 1.0) throw CertificationError("generated cloud is not unit-diameter");
    const KernelSpec& kernel = config.kernel;
    const double s = kernel.s;
    auto add = [&](std::string kind, std::string label, json lhs, json rhs, bool pass) {
        report.checks.push_back({std::move(kind), std::move(label), std::move(lhs), std::move(rhs), pass});
    };

    report.growth = growth_constant(measure, s, gen.r_min);
    report.antisymmetry = check_antisymmetry(kernel, cloud);
    add("kernel_antisymmetry", "max |k(x,y) + k(y,x)|", report.antisymmetry.worst_residual,
        1e-13 * report.antisymmetry.max_abs_kernel, report.antisymmetry.ok);
    if (!report.antisymmetry.ok) {
        throw CertificationError("kernel is not antisymmetric on this cloud (residual " +
                                 format_double(report.antisymmetry.worst_residual) + ")");
    }
    report.kernel_bound = check_size_bound(kernel, cloud, s);
    const double c = report.kernel_bound.c_certified;
    const double c_mu = report.growth.c_mu;

    std::mt19937_64 rng(config.seed);
    std::vector<BallRequest> requests = config.balls;
    if (requests.empty()) {
        std::uniform_int_distribution<PointId> center(0, cloud.size() - 1);
        std::uniform_real_distribution<double> target(0.15, 0.6);
        for (std::size_t b = 0; b < config.random_balls; ++b) {
            const PointId z = center(rng);
            requests.push_back({z, target(rng), false});
        }
    }
    const GoodSetParams params = unit_params(config.lambda, config.depth);
    for (std::size_t b = 0; b < requests.size(); ++b) {
        const BallRequest& req = requests[b];
        if (req.center >= cloud.size()) throw InputError("ball center out of range");
        const StepMeasure pushed = radial_pushforward(measure, req.center);
        Rational radius;
        if (req.force) {
            radius = exact(req.target);
        } else {
            try {
                radius = select_good_radius_near(pushed, req.target, params);
            } catch (const SearchExhaustedError& e) {
                throw CertificationError("ball " + std::to_string(b) + ": " + e.what());
            }
        }
        CertifiedBall cb;
        cb.ball = Ball{req.center, radius};
        cb.target = req.target;
        cb.certification = GoodRadiusTester(pushed, params).check(radius);
        if (!cb.certification.good()) {
            const Rejection& rej = *cb.certification.rejection;
            throw CertificationError("ball " + std::to_string(b) + " radius " + radius.get_str() +
                                     " rejected at generation " + std::to_string(rej.generation) + ": " +
                                     reason_name(rej.reason));
        }
        const std::string label = "ball " + std::to_string(b);
        cb.shells = shell_mass_check(measure, req.center, radius, cb.certification.certificate);
        for (const auto& e : cb.shells.entries) {
            add("shell_mass", label + " n=" + std::to_string(e.generation), rational_to_json(e.mass),
                rational_to_json(e.bound), e.ok);
        }
        cb.annuli = annuli_log_bound_check(kernel, measure, cb.ball, s, c, c_mu);
        for (const auto& e : cb.annuli.entries) {
            add("annuli", label + " x=" + std::to_string(e.x), e.lhs, e.rhs, e.ok);
        }
        cb.log_sum = log_boundary_sum(measure, cb.ball, cb.certification.certificate, c_mu, s);
        add("log_boundary", label, cb.log_sum.value, cb.log_sum.shell_bound, cb.log_sum.ok);
        report.balls.push_back(std::move(cb));
    }

    const auto& eps = config.eps_grid;
    if (!report.balls.empty()) {
        for (std::size_t p = 0; p < config.function_pairs; ++p) {
            TraceRecord record;
            record.f = random_function(rng, report.balls, config.max_terms);
            record.g = random_function(rng, report.balls, config.max_terms);
            record.trace = pairing_trace(kernel, measure, record.f, record.g, eps);
            const std::string label = "pair " + std::to_string(p);
            for (std::size_t k = 0; k < record.trace.cauchy_diffs.size(); ++k) {
                add("four_term", label + " band " + std::to_string(k), record.trace.cauchy_diffs[k],
                    record.trace.bound_values[k], record.trace.bound_ok[k] != 0);
            }
            for (std::size_t i = 0; i < record.f.terms.size(); ++i) {
                for (std::size_t j = 0; j < record.g.terms.size(); ++j) {
                    for (std::size_t k = 0; k + 1 < eps.size(); ++k) {
                        const auto res = cancellation_residual(kernel, measure, record.f.terms[i].ball,
                                                               record.g.terms[j].ball, eps[k + 1], eps[k]);
                        add("cancellation",
                            label + " B" + std::to_string(i) + " S" + std::to_string(j) + " band " + std::to_string(k),
                            std::abs(res.residual), 1e-13 * res.magnitude, res.ok);
                    }
                }
            }
            report.traces.push_back(std::move(record));
        }
    }

    const bool self_similar = config.generator.family != GeneratorFamily::uniform_random;
    if (self_similar && config.cross_levels > 0 && !report.balls.empty()) {
        const int top = config.generator.level;
        std::vector<int> levels;
        for (int l = std::max(1, top - config.cross_levels); l <= top; ++l) levels.push_back(l);
        const Ball& first = report.balls.front().ball;
        report.levels = boundary_trend(config.generator, kernel, top, first.center, first.radius, levels,
                                       config.lambda, config.depth);

        // Contrast: the heaviest interior distance value of mu_z, used as a radius without certification.
        const StepMeasure pushed = radial_pushforward(measure, first.center);
        const StepMeasure::Atom* heaviest = nullptr;
        for (const auto& atom : pushed.atoms()) {
            if (!interior(atom.position)) continue;
            if (!heaviest || atom.mass > heaviest->mass) heaviest = &atom;
        }
        if (heaviest) {
            BadRadiusContrast bad;
            bad.radius = heaviest->position;
            bad.distance_mass = heaviest->mass;
            bad.heavy_at_first_generation = heaviest->mass >= Rational(1, config.lambda);
            bad.rejection = GoodRadiusTester(pushed, params).check(bad.radius).rejection;
            bad.levels = trend(config.generator, kernel, top, first.center, bad.radius, levels, config.lambda,
                               config.depth, false);
            report.bad_radius = std::move(bad);
        }
    }
    return report;
}

std::string trace_csv(const PairingTrace& trace) {
    std::string out = "epsilon,pairing,cauchy_diff,four_term_bound\n";
    for (std::size_t j = 0; j < trace.epsilon_grid.size(); ++j) {
        out += format_double(trace.epsilon_grid[j]) + "," + format_double(trace.values[j]) + ",";
        if (j < trace.cauchy_diffs.size()) {
            out += format_double(trace.cauchy_diffs[j]) + "," + format_double(trace.bound_values[j]);
        } else {
            out += ",";
        }
        out += "\n";
    }
    return out;
}

json report_summary(const ConvergenceReport& report) {
    json balls = json::array();
    for (const auto& b : report.balls) {
        json shells = json::array();
        for (const auto& e : b.shells.entries) {
            shells.push_back({{"generation", e.generation},
                              {"lo", rational_to_json(e.lo)},
                              {"hi", rational_to_json(e.hi)},
                              {"mass", rational_to_json(e.mass)},
                              {"bound", rational_to_json(e.bound)},
                              {"pass", e.ok}});
        }
        std::size_t annuli_ok = 0;
        for (const auto& e : b.annuli.entries) annuli_ok += e.ok ? 1 : 0;
        balls.push_back({{"center", b.ball.center},
                         {"target", b.target},
                         {"radius", rational_to_json(b.ball.radius)},
                         {"radius_value", b.ball.radius_value()},
                         {"certification", radius_check_to_json(b.certification)},
                         {"shells", std::move(shells)},
                         {"log_weighted_tail", b.shells.log_weighted_tail},
                         {"annuli", {{"atoms", b.annuli.entries.size()},
                                     {"passing", annuli_ok},
                                     {"sphere_atoms", b.annuli.sphere_atoms}}},
                         {"log_boundary_sum", {{"value", b.log_sum.value},
                                               {"shell_bound", b.log_sum.shell_bound},
                                               {"paper_form", b.log_sum.paper_form},
                                               {"inner_remainder", b.log_sum.inner_remainder},
                                               {"within_shell_bound", b.log_sum.ok},
                                               {"within_paper_form", b.log_sum.within_paper_form}}}});
    }
    json traces = json::array();
    for (std::size_t t = 0; t < report.traces.size(); ++t) {
        const auto& tr = report.traces[t];
        char name[32];
        std::snprintf(name, sizeof name, "trace_%03zu.csv", t);
        traces.push_back({{"file", name}, {"f", function_to_json(tr.f)}, {"g", function_to_json(tr.g)}});
    }
    json checks = json::array();
    for (const auto& c : report.checks) {
        checks.push_back({{"kind", c.kind}, {"label", c.label}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"pass", c.pass}});
    }
    json levels = json::array();
    for (const auto& l : report.levels) levels.push_back(level_to_json(l));
    json summary{{"config", report.config},
                 {"growth", {{"s", report.growth.s},
                             {"r_min", report.growth.r_min},
                             {"c_mu", report.growth.c_mu},
                             {"witness_point", report.growth.witness_point},
                             {"witness_radius", report.growth.witness_radius}}},
                 {"kernel_bound", {{"c_certified", report.kernel_bound.c_certified},
                                   {"witness", json::array({report.kernel_bound.witness.first,
                                                            report.kernel_bound.witness.second})}}},
                 {"balls", std::move(balls)},
                 {"traces", std::move(traces)},
                 {"checks", std::move(checks)},
                 {"levels", std::move(levels)},
                 {"all_passed", report.all_passed()}};
    if (report.bad_radius) {
        const auto& bad = *report.bad_radius;
        json bad_levels = json::array();
        for (const auto& l : bad.levels) bad_levels.push_back(level_to_json(l));
        json rejection = nullptr;
        if (bad.rejection) {
            rejection = {{"generation", bad.rejection->generation}, {"reason", reason_name(bad.rejection->reason)}};
        }
        summary["bad_radius"] = {{"radius", rational_to_json(bad.radius)},
                                 {"radius_value", bad.radius.get_d()},
                                 {"distance_mass", rational_to_json(bad.distance_mass)},
                                 {"heavy_at_first_generation", bad.heavy_at_first_generation},
                                 {"rejection", std::move(rejection)},
                                 {"levels", std::move(bad_levels)}};
    }
    return summary;
}

EmittedFiles emit_report(const ConvergenceReport& report, const std::filesystem::path& out_dir,
                         const std::optional<json>& metadata) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
    EmittedFiles files;
    auto trace_path = [&](std::size_t t) {
        char name[32];
        std::snprintf(name, sizeof name, "trace_%03zu.csv", t);
        return out_dir / name;
    };
    if (report.traces.empty()) {
        files.traces.push_back(trace_path(0));
        write_text_file(files.traces.back(), trace_csv(PairingTrace{}));
    }
    for (std::size_t t = 0; t < report.traces.size(); ++t) {
        files.traces.push_back(trace_path(t));
        write_text_file(files.traces.back(), trace_csv(report.traces[t].trace));
    }
    files.summary = out_dir / "summary.json";
    write_text_file(files.summary, report_summary(report).dump(2) + "\n");
    if (metadata) {
        files.metadata = out_dir / "run_metadata.json";
        write_text_file(*files.metadata, metadata->dump(2) + "\n");
    }
    return files;
}

}  // namespace sio
