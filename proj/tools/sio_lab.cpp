// sio-lab: command-line front end for the singular-integral lab.
//
// Exit codes: 0 success, 1 a checked inequality or certification failed,
// 2 bad input or usage, 3 resource limits or other runtime failures.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sio/errors.hpp"
#include "sio/experiments.hpp"
#include "sio/io.hpp"
#include "sio/parallel.hpp"

namespace {

using sio::json;

struct KernelFlags {
    std::string kind = "riesz";
    std::size_t riesz_i = 1;
    double riesz_n = 1.0;
    double s = 1.0;
    std::string file;

    void attach(CLI::App* cmd) {
        cmd->add_option("--kernel", kind, "riesz or custom")->check(CLI::IsMember({"riesz", "custom"}));
        cmd->add_option("--riesz-i", riesz_i, "coordinate index (1-based)");
        cmd->add_option("--riesz-n", riesz_n, "Riesz dimension parameter");
        cmd->add_option("--s", s, "kernel dimension");
        cmd->add_option("--kernel-file", file, "JSON kernel description for --kernel custom");
    }

    sio::KernelSpec resolve() const {
        if (kind == "riesz") {
            sio::KernelSpec k = sio::KernelSpec::riesz(riesz_i, riesz_n);
            k.s = s;
            return k;
        }
        if (file.empty()) throw sio::InputError("--kernel custom needs --kernel-file");
        json j = sio::read_json_file(file);
        if (!j.contains("kernel")) j["kernel"] = "custom";
        if (!j.contains("s")) j["s"] = s;
        return sio::kernel_from_json(j);
    }
};

struct GeneratorFlags {
    std::string family = "four_corner";
    int level = 3;
    double ratio = 1.0 / 3.0;
    std::size_t count = 64;
    std::size_t dimension = 2;
    std::string metric = "euclidean";
    double p = 2.0;
    double alpha = 1.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--family", family, "four_corner, cantor_1d or uniform_random")
            ->check(CLI::IsMember({"four_corner", "cantor_1d", "uniform_random"}));
        cmd->add_option("--level", level, "construction level m");
        cmd->add_option("--ratio", ratio, "cantor_1d contraction ratio");
        cmd->add_option("--count", count, "uniform_random atom count");
        cmd->add_option("--dimension", dimension, "uniform_random ambient dimension");
        cmd->add_option("--metric", metric, "euclidean or snowflake")
            ->check(CLI::IsMember({"euclidean", "snowflake"}));
        cmd->add_option("--p", p, "norm exponent");
        cmd->add_option("--alpha", alpha, "snowflake exponent");
    }

    sio::GeneratorSpec resolve(std::uint64_t seed) const {
        json j{{"family", family}, {"level", level}, {"ratio", ratio}, {"count", count},
               {"dimension", dimension}, {"seed", seed}};
        sio::GeneratorSpec spec = sio::suite_config_from_json(json{{"generator", j}}).generator;
        spec.metric = metric == "snowflake" ? sio::MetricDescriptor::snowflake(p, alpha)
                                            : sio::MetricDescriptor::euclidean(p);
        return spec;
    }
};

// "3/10", "0.3" or "1e-2", parsed exactly.
sio::Rational parse_rational(const std::string& text) {
    if (text.find('/') != std::string::npos) {
        sio::Rational q;
        if (q.set_str(text, 10) != 0) throw sio::InputError("bad rational '" + text + "'");
        q.canonicalize();
        return q;
    }
    std::string mantissa = text;
    long exponent = 0;
    if (auto e = text.find_first_of("eE"); e != std::string::npos) {
        mantissa = text.substr(0, e);
        exponent = std::stol(text.substr(e + 1));
    }
    if (auto dot = mantissa.find('.'); dot != std::string::npos) {
        exponent -= static_cast<long>(mantissa.size() - dot - 1);
        mantissa.erase(dot, 1);
    }
    sio::Integer num;
    if (mantissa.empty() || num.set_str(mantissa, 10) != 0) throw sio::InputError("bad number '" + text + "'");
    sio::Rational q(num);
    if (exponent > 0) q *= sio::ipow(10, static_cast<unsigned>(exponent));
    if (exponent < 0) q /= sio::ipow(10, static_cast<unsigned>(-exponent));
    return q;
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

// Splices a JSON config file into argv as flags so that command-line flags,
// which come later, take precedence. Top-level keys are global flags; an
// object under a subcommand's name holds that subcommand's flags.
std::vector<std::string> with_config(const std::vector<std::string>& args, const std::set<std::string>& commands) {
    std::string config_path;
    for (std::size_t i = 1; i + 1 < args.size(); ++i) {
        if (args[i] == "--config") config_path = args[i + 1];
    }
    if (config_path.empty()) return args;
    const json config = sio::read_json_file(config_path);
    auto as_flags = [](const json& obj, std::vector<std::string>& out) {
        for (const auto& [key, value] : obj.items()) {
            std::string flag = "--" + key;
            std::replace(flag.begin(), flag.end(), '_', '-');
            if (value.is_boolean()) {
                if (value.get<bool>()) out.push_back(flag);
            } else if (value.is_string()) {
                out.push_back(flag);
                out.push_back(value.get<std::string>());
            } else if (value.is_number()) {
                out.push_back(flag);
                out.push_back(value.dump());
            }
        }
    };
    std::vector<std::string> out{args[0]};
    json globals = json::object();
    for (const auto& [key, value] : config.items()) {
        if (!value.is_object()) globals[key] = value;
    }
    as_flags(globals, out);
    std::size_t i = 1;
    for (; i < args.size() && !commands.count(args[i]); ++i) out.push_back(args[i]);
    if (i < args.size()) {
        out.push_back(args[i]);
        if (config.contains(args[i])) as_flags(config.at(args[i]), out);
        for (++i; i < args.size(); ++i) out.push_back(args[i]);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Truncated singular integrals on discrete measures: growth, good radii, pairings"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    std::size_t threads = 1;
    std::uint64_t seed = 1;
    std::string out_dir = "sio-out";
    std::string config_path;
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "random seed");
    app.add_option("--out-dir", out_dir, "directory for emitted files");
    app.add_option("--config", config_path, "JSON file of default flags");

    // generate
    auto* gen_cmd = app.add_subcommand("generate", "write a generated fractal measure");
    GeneratorFlags gen_flags;
    gen_flags.attach(gen_cmd);
    std::string gen_out;
    gen_cmd->add_option("--out", gen_out, "measure JSON path (default <out-dir>/measure.json)");

    // check-growth
    auto* growth_cmd = app.add_subcommand("check-growth", "certify the s-growth constant");
    std::string measure_path;
    double growth_s = 1.0;
    double r_min = 0.0;
    bool check_metric = false;
    growth_cmd->add_option("--measure", measure_path, "measure JSON")->required();
    growth_cmd->add_option("--s", growth_s, "growth exponent");
    growth_cmd->add_option("--r-min", r_min, "resolution floor")->required();
    growth_cmd->add_flag("--validate-metric", check_metric, "also check the metric axioms");

    // check-kernel
    auto* kernel_cmd = app.add_subcommand("check-kernel", "check antisymmetry and certify the size bound");
    KernelFlags kernel_flags;
    kernel_cmd->add_option("--measure", measure_path, "measure JSON")->required();
    kernel_flags.attach(kernel_cmd);

    // good-radii
    auto* radii_cmd = app.add_subcommand("good-radii", "good-radius construction for mu_z");
    sio::PointId center = 0;
    long lambda = 5;
    int depth = 3;
    std::string materialize, test_t, near;
    std::int64_t budget = sio::default_interval_budget;
    radii_cmd->add_option("--measure", measure_path, "measure JSON")->required();
    radii_cmd->add_option("--center", center, "center atom id")->required();
    radii_cmd->add_option("--lambda", lambda, "scale parameter");
    radii_cmd->add_option("--depth", depth, "number of generations");
    radii_cmd->add_option("--budget", budget, "maximum number of removed cells when materializing");
    auto* mode = radii_cmd->add_option_group("mode");
    mode->add_option("--materialize", materialize, "write the good set to this JSON file");
    mode->add_option("--test", test_t, "certify one radius (decimal or num/den)");
    mode->add_option("--near", near, "select the good radius nearest a target");
    mode->require_option(1);

    // pairing
    auto* pairing_cmd = app.add_subcommand("pairing", "trace <T_eps f, g> over an eps grid");
    KernelFlags pairing_kernel;
    std::string f_path, g_path, eps_text = "geometric:start=0.5,ratio=0.5,count=20", trace_out;
    pairing_cmd->add_option("--measure", measure_path, "measure JSON")->required();
    pairing_kernel.attach(pairing_cmd);
    pairing_cmd->add_option("--f", f_path, "simple function JSON")->required();
    pairing_cmd->add_option("--g", g_path, "simple function JSON")->required();
    pairing_cmd->add_option("--eps-grid", eps_text, "geometric:start=..,ratio=..,count=.. or a list");
    pairing_cmd->add_option("--out", trace_out, "trace CSV path (default <out-dir>/trace.csv)");

    // converge
    auto* converge_cmd = app.add_subcommand("converge", "run the end-to-end convergence suite");
    std::string suite_path;
    GeneratorFlags suite_gen;
    KernelFlags suite_kernel;
    std::size_t balls = 5, pairs = 1, max_terms = 4;
    int cross_levels = 2;
    std::string suite_eps;
    converge_cmd->add_option("--suite", suite_path, "suite config JSON; flags given here override it");
    suite_gen.attach(converge_cmd);
    suite_kernel.attach(converge_cmd);
    converge_cmd->add_option("--lambda", lambda, "scale parameter");
    converge_cmd->add_option("--depth", depth, "number of generations");
    converge_cmd->add_option("--balls", balls, "number of random good balls");
    converge_cmd->add_option("--pairs", pairs, "number of random (f, g) pairs");
    converge_cmd->add_option("--max-terms", max_terms, "terms per simple function");
    converge_cmd->add_option("--eps-grid", suite_eps, "eps grid");
    converge_cmd->add_option("--cross-levels", cross_levels, "levels below m for the boundary trend");

    // report
    auto* report_cmd = app.add_subcommand("report", "summarize a summary.json");
    std::string summary_path;
    report_cmd->add_option("--summary", summary_path, "summary JSON (default <out-dir>/summary.json)");

    std::vector<std::string> args(argv, argv + argc);
    std::set<std::string> commands;
    for (const auto* sub : app.get_subcommands({})) commands.insert(sub->get_name());

    try {
        args = with_config(args, commands);
        std::vector<const char*> cargs;
        for (const auto& a : args) cargs.push_back(a.c_str());
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "sio-lab: " << e.what() << "\n";
        return 2;
    }

    try {
        sio::set_worker_count(threads);

        if (*gen_cmd) {
            const sio::GeneratedMeasure g = sio::generate(gen_flags.resolve(seed));
            const std::filesystem::path path =
                gen_out.empty() ? std::filesystem::path(out_dir) / "measure.json" : std::filesystem::path(gen_out);
            if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
            sio::write_text_file(path, sio::measure_to_json(g.measure).dump(2) + "\n");
            print({{"measure", path.string()},
                   {"atoms", g.measure.size()},
                   {"r_min", g.r_min},
                   {"scale", g.scale},
                   {"diameter", g.measure.cloud().diameter()}});
            return 0;
        }

        if (*growth_cmd) {
            const sio::DiscreteMeasure m = sio::load_measure(measure_path);
            json out;
            if (check_metric) {
                const sio::MetricReport report = sio::validate_metric(m.cloud(), seed);
                out["metric"] = {{"symmetry_ok", report.symmetry_ok},
                                 {"identity_ok", report.identity_ok},
                                 {"triangle_ok", report.triangle_ok},
                                 {"worst_violation", report.worst_violation},
                                 {"triples_checked", report.triples_checked},
                                 {"exhaustive", report.exhaustive}};
                if (!(report.symmetry_ok && report.identity_ok && report.triangle_ok)) {
                    print(out);
                    return 1;
                }
            }
            const sio::GrowthCertificate cert = sio::growth_constant(m, growth_s, r_min);
            out["growth"] = {{"s", cert.s},
                             {"r_min", cert.r_min},
                             {"c_mu", cert.c_mu},
                             {"witness_point", cert.witness_point},
                             {"witness_radius", cert.witness_radius}};
            print(out);
            return 0;
        }

        if (*kernel_cmd) {
            const sio::DiscreteMeasure m = sio::load_measure(measure_path);
            const sio::KernelSpec k = kernel_flags.resolve();
            const sio::AntisymmetryReport anti = sio::check_antisymmetry(k, m.cloud());
            const sio::SizeBound bound = sio::check_size_bound(k, m.cloud(), k.s);
            print({{"kernel", sio::kernel_to_json(k)},
                   {"antisymmetric", anti.ok},
                   {"worst_pair", {anti.worst_pair.first, anti.worst_pair.second}},
                   {"worst_residual", anti.worst_residual},
                   {"max_abs_kernel", anti.max_abs_kernel},
                   {"c_certified", bound.c_certified},
                   {"witness", {bound.witness.first, bound.witness.second}}});
            return anti.ok ? 0 : 1;
        }

        if (*radii_cmd) {
            const sio::DiscreteMeasure m = sio::load_measure(measure_path);
            const sio::StepMeasure pushed = sio::radial_pushforward(m, center);
            sio::GoodSetParams params;
            params.lambda = lambda;
            params.depth = depth;
            if (!materialize.empty()) {
                const sio::GoodSet good = sio::materialize_good_set(pushed, params, budget);
                sio::write_text_file(materialize, sio::interval_set_to_json(good.set).dump() + "\n");
                print({{"intervals", sio::integer_to_json(good.set.interval_count())},
                       {"total_length", sio::rational_to_json(good.set.total_length())},
                       {"lower_bound", sio::rational_to_json(good.lower_bound)},
                       {"bound_holds", good.bound_holds},
                       {"bound_is_vacuous", params.bound_is_vacuous()}});
                return good.bound_holds ? 0 : 1;
            }
            if (!test_t.empty()) {
                const sio::RadiusCheck check = sio::is_good_radius(pushed, parse_rational(test_t), params);
                print(sio::radius_check_to_json(check));
                return check.good() ? 0 : 1;
            }
            const sio::Rational r = sio::select_good_radius_near(pushed, std::stod(near), params);
            json out = sio::radius_check_to_json(sio::is_good_radius(pushed, r, params));
            out["radius"] = sio::rational_to_json(r);
            out["radius_value"] = r.get_d();
            print(out);
            return 0;
        }

        if (*pairing_cmd) {
            const sio::DiscreteMeasure m = sio::load_measure(measure_path);
            const sio::KernelSpec k = pairing_kernel.resolve();
            const sio::SimpleFunction f = sio::function_from_json(sio::read_json_file(f_path));
            const sio::SimpleFunction g = sio::function_from_json(sio::read_json_file(g_path));
            const sio::PairingTrace trace = sio::pairing_trace(k, m, f, g, sio::parse_eps_grid(eps_text));
            const std::filesystem::path path =
                trace_out.empty() ? std::filesystem::path(out_dir) / "trace.csv" : std::filesystem::path(trace_out);
            if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
            sio::write_text_file(path, sio::trace_csv(trace));
            bool ok = true;
            for (char b : trace.bound_ok) ok = ok && b;
            print({{"trace", path.string()}, {"points", trace.values.size()}, {"four_term_bounds_hold", ok}});
            return ok ? 0 : 1;
        }

        if (*converge_cmd) {
            sio::SuiteConfig config;
            if (!suite_path.empty()) config = sio::suite_config_from_json(sio::read_json_file(suite_path));
            auto given = [&](const char* name) { return converge_cmd->count(name) > 0; };
            if (given("--family") || given("--level") || given("--ratio") || given("--count") ||
                given("--dimension") || given("--metric") || given("--p") || given("--alpha") || suite_path.empty()) {
                config.generator = suite_gen.resolve(seed);
            }
            if (given("--kernel") || given("--riesz-i") || given("--riesz-n") || given("--s") ||
                given("--kernel-file")) {
                config.kernel = suite_kernel.resolve();
            }
            if (given("--lambda") || suite_path.empty()) config.lambda = lambda;
            if (given("--depth") || suite_path.empty()) config.depth = depth;
            if (given("--balls")) {
                config.random_balls = balls;
                config.balls.clear();
            }
            if (given("--pairs")) config.function_pairs = pairs;
            if (given("--max-terms")) config.max_terms = max_terms;
            if (given("--eps-grid")) config.eps_grid = sio::parse_eps_grid(suite_eps);
            if (given("--cross-levels")) config.cross_levels = cross_levels;
            if (app.count("--seed")) config.seed = seed;

            const sio::ConvergenceReport report = sio::run_convergence_suite(config);
            const json metadata{{"tool", "sio-lab"}, {"threads", threads}, {"argv", args}};
            const sio::EmittedFiles files = sio::emit_report(report, out_dir, metadata);
            std::size_t failed = 0;
            for (const auto& c : report.checks) failed += c.pass ? 0 : 1;
            print({{"summary", files.summary.string()},
                   {"traces", files.traces.size()},
                   {"checks", report.checks.size()},
                   {"failed", failed}});
            return failed == 0 ? 0 : 1;
        }

        if (*report_cmd) {
            const std::filesystem::path path = summary_path.empty()
                                                   ? std::filesystem::path(out_dir) / "summary.json"
                                                   : std::filesystem::path(summary_path);
            const json summary = sio::read_json_file(path);
            std::map<std::string, std::pair<std::size_t, std::size_t>> tally;  // kind -> (passed, total)
            for (const auto& c : summary.at("checks")) {
                auto& t = tally[c.at("kind").get<std::string>()];
                t.first += c.at("pass").get<bool>() ? 1 : 0;
                ++t.second;
            }
            for (const auto& [kind, t] : tally) {
                std::printf("%-20s %zu/%zu passed\n", kind.c_str(), t.first, t.second);
            }
            if (summary.contains("growth")) {
                std::printf("c_mu = %.17g\n", summary["growth"]["c_mu"].get<double>());
            }
            for (const auto& level : summary.value("levels", json::array())) {
                std::printf("level %d  boundary integral %.17g  certified at depth %d\n",
                            level["level"].get<int>(), level["total_boundary_integral"].get<double>(),
                            level["certification_depth"].get<int>());
            }
            const bool ok = summary.value("all_passed", false);
            std::printf("%s\n", ok ? "all checks passed" : "some checks FAILED");
            return ok ? 0 : 1;
        }
    } catch (const sio::CertificationError& e) {
        std::cerr << "sio-lab: certification failed: " << e.what() << "\n";
        return 1;
    } catch (const sio::json::exception& e) {
        std::cerr << "sio-lab: malformed JSON: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "sio-lab: " << e.what() << "\n";
        return 2;
    } catch (const std::logic_error& e) {
        std::cerr << "sio-lab: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "sio-lab: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
