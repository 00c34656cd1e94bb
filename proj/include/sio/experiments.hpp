#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sio/good_radii.hpp"
#include "sio/io.hpp"
#include "sio/kernels.hpp"
#include "sio/measure.hpp"
#include "sio/operator.hpp"

namespace sio {

enum class GeneratorFamily { four_corner_cantor, cantor_1d, uniform_random };

struct GeneratorSpec {
    GeneratorFamily family = GeneratorFamily::four_corner_cantor;
    int level = 1;
    double ratio = 1.0 / 3.0;  // cantor_1d contraction, in (0, 1/2)
    std::size_t count = 0;     // uniform_random
    std::size_t dimension = 2; // uniform_random
    std::uint64_t seed = 0;    // uniform_random
    MetricDescriptor metric = MetricDescriptor::euclidean(2.0);
};

inline constexpr std::size_t max_generated_atoms = 65536;  // 4^8

struct GeneratedMeasure {
    DiscreteMeasure measure;  // normalized, on a unit-diameter cloud
    double r_min;             // construction cell size in rescaled units
    double scale;             // distance divisor applied by the rescale
};

// Four-corner level m: 4^m atoms at sum_k c_{i_k} 4^{-(k-1)}, c in
// {(0,0), (3/4,0), (0,3/4), (3/4,3/4)}, weights 4^{-m}; ids enumerate the
// digit strings with the first digit most significant. cantor_1d is the
// analogue with maps x -> rho x and x -> rho x + (1 - rho).
GeneratedMeasure generate(const GeneratorSpec& spec);

// Id of the level-`coarse` atom whose cell contains the level-`fine` atom `id`.
PointId ancestor_atom(const GeneratorSpec& spec, PointId id, int fine, int coarse);

// "geometric:start=0.5,ratio=0.5,count=20" or an explicit list "0.5,0.25,0.1".
std::vector<double> parse_eps_grid(const std::string& text);

struct BallRequest {
    PointId center = 0;
    double target = 0.3;
    // Use exact(target) as the radius instead of searching; certification must pass.
    bool force = false;
};

struct SuiteConfig {
    GeneratorSpec generator;
    KernelSpec kernel = KernelSpec::riesz(1, 1.0);
    long lambda = 5;
    int depth = 3;
    std::size_t random_balls = 5;       // used when balls is empty
    std::vector<BallRequest> balls;
    std::size_t function_pairs = 1;
    std::size_t max_terms = 4;
    std::vector<double> eps_grid = parse_eps_grid("geometric:start=0.5,ratio=0.5,count=12");
    std::uint64_t seed = 1;
    int cross_levels = 2;  // also evaluate the boundary integral at levels m-2 .. m
};

SuiteConfig suite_config_from_json(const json& j);
json suite_config_to_json(const SuiteConfig& config);

// One inequality instance with its two sides and verdict.
struct CheckRecord {
    std::string kind;
    std::string label;
    json lhs;
    json rhs;
    bool pass = false;
};

struct CertifiedBall {
    Ball ball;
    double target = 0.0;
    RadiusCheck certification;
    ShellReport shells;
    AnnuliReport annuli;
    LogBoundarySum log_sum;
};

struct TraceRecord {
    SimpleFunction f;
    SimpleFunction g;
    PairingTrace trace;
};

struct LevelRecord {
    int level = 0;
    PointId center = 0;
    Rational radius;
    bool original_radius_certified = false;
    int certification_depth = 0;
    double total_boundary = 0.0;
};

struct BadRadiusContrast {
    Rational radius;
    Rational distance_mass;  // mu_z mass sitting exactly at the radius
    bool heavy_at_first_generation = false;
    std::optional<Rejection> rejection;
    std::vector<LevelRecord> levels;
};

struct ConvergenceReport {
    json config;
    GrowthCertificate growth;
    SizeBound kernel_bound;
    AntisymmetryReport antisymmetry;
    std::vector<CertifiedBall> balls;
    std::vector<TraceRecord> traces;
    std::vector<CheckRecord> checks;
    std::vector<LevelRecord> levels;
    std::optional<BadRadiusContrast> bad_radius;

    bool all_passed() const;
};

// Boundary integral of B(center, radius) across generator levels, recertifying
// the radius at every level (falling back to the nearest good radius).
std::vector<LevelRecord> boundary_trend(const GeneratorSpec& spec, const KernelSpec& kernel,
                                        int top_level, PointId top_center, const Rational& radius,
                                        const std::vector<int>& levels, long lambda, int depth);

// Generates, certifies growth and kernel bounds, certifies good balls, and
// checks every estimate of the weak-limit argument. Throws CertificationError
// when a certification step fails.
ConvergenceReport run_convergence_suite(const SuiteConfig& config);

struct EmittedFiles {
    std::vector<std::filesystem::path> traces;
    std::filesystem::path summary;
    std::optional<std::filesystem::path> metadata;
};

json report_summary(const ConvergenceReport& report);
std::string trace_csv(const PairingTrace& trace);

// trace_NNN.csv per trace (a header-only trace_000.csv when there is none)
// and summary.json; metadata, when given, goes to run_metadata.json.
EmittedFiles emit_report(const ConvergenceReport& report, const std::filesystem::path& out_dir,
                         const std::optional<json>& metadata = std::nullopt);

}  // namespace sio
