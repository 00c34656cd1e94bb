#include "sio/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "sio/errors.hpp"

namespace sio {

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

MetricDescriptor metric_from_json(const json& j) {
    const std::string family = j.value("family", "euclidean_p");
    auto read_p = [&]() {
        if (!j.contains("p")) return 2.0;
        const json& p = j.at("p");
        if (p.is_string()) {
            if (p.get<std::string>() == "inf") return MetricDescriptor::infinity;
            throw InputError("metric exponent must be a number or \"inf\"");
        }
        return p.get<double>();
    };
    if (family == "euclidean_p") return MetricDescriptor::euclidean(read_p());
    if (family == "snowflake") return MetricDescriptor::snowflake(read_p(), j.value("alpha", 1.0));
    if (family == "custom_table") return MetricDescriptor::custom_table();
    throw InputError("unknown metric family '" + family + "'");
}

json metric_to_json(const MetricDescriptor& metric) {
    json j;
    auto p_value = [&]() -> json {
        if (std::isinf(metric.p)) return "inf";
        return metric.p;
    };
    switch (metric.family) {
        case MetricFamily::euclidean_p:
            j["family"] = "euclidean_p";
            j["p"] = p_value();
            break;
        case MetricFamily::snowflake:
            j["family"] = "snowflake";
            j["p"] = p_value();
            j["alpha"] = metric.alpha;
            break;
        case MetricFamily::custom_table:
            j["family"] = "custom_table";
            break;
    }
    return j;
}

PointCloud cloud_from_json(const json& j) {
    try {
        const MetricDescriptor metric = metric_from_json(j.value("metric", json::object()));
        if (metric.family == MetricFamily::custom_table) {
            const auto table = j.at("distances").get<std::vector<double>>();
            const std::size_t n = j.contains("points")
                ? j.at("points").size()
                : static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(table.size()))));
            return PointCloud::from_table(n, table);
        }
        const json& points = j.at("points");
        std::vector<std::vector<double>> coords(points.size());
        std::vector<bool> seen(points.size(), false);
        for (const json& p : points) {
            const auto id = p.at("id").get<std::int64_t>();
            if (id < 0 || static_cast<std::size_t>(id) >= points.size() || seen[id]) {
                throw InputError("point ids must be unique and contiguous from 0");
            }
            seen[id] = true;
            coords[id] = p.at("coords").get<std::vector<double>>();
        }
        return PointCloud::from_points(metric, coords);
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed point cloud: ") + e.what());
    }
}

json cloud_to_json(const PointCloud& cloud) {
    json j;
    j["metric"] = metric_to_json(cloud.metric());
    json points = json::array();
    for (PointId i = 0; i < cloud.size(); ++i) {
        json p;
        p["id"] = i;
        p["coords"] = std::vector<double>(cloud.coords(i).begin(), cloud.coords(i).end());
        points.push_back(std::move(p));
    }
    j["points"] = std::move(points);
    if (!cloud.has_coordinates()) {
        j["distances"] = std::vector<double>(cloud.table().begin(), cloud.table().end());
    }
    return j;
}

DiscreteMeasure measure_from_json(const json& j, const std::filesystem::path& base_dir) {
    try {
        const json& cloud_entry = j.at("cloud");
        PointCloud cloud = cloud_entry.is_string()
            ? cloud_from_json(read_json_file(base_dir / cloud_entry.get<std::string>()))
            : cloud_from_json(cloud_entry);
        auto weights = j.at("weights").get<std::vector<double>>();
        return DiscreteMeasure(std::make_shared<const PointCloud>(std::move(cloud)), std::move(weights));
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed measure: ") + e.what());
    }
}

DiscreteMeasure load_measure(const std::filesystem::path& path) {
    return measure_from_json(read_json_file(path), path.parent_path());
}

json measure_to_json(const DiscreteMeasure& measure) {
    json j;
    j["cloud"] = cloud_to_json(measure.cloud());
    j["weights"] = std::vector<double>(measure.weights().begin(), measure.weights().end());
    return j;
}

json integer_to_json(const Integer& z) {
    if (fits_int64(z)) return static_cast<std::int64_t>(z.get_si());
    return z.get_str();
}

json rational_to_json(const Rational& q) {
    return json::array({integer_to_json(q.get_num()), integer_to_json(q.get_den())});
}

Rational rational_from_json(const json& j) {
    auto integer = [](const json& v) {
        if (v.is_string()) return Integer(v.get<std::string>());
        return Integer(static_cast<long>(v.get<std::int64_t>()));
    };
    if (j.is_array() && j.size() == 2) {
        Rational q(integer(j[0]), integer(j[1]));
        if (q.get_den() == 0) throw InputError("rational with zero denominator");
        q.canonicalize();
        return q;
    }
    if (j.is_number()) return exact(j.get<double>());
    throw InputError("expected a number or a [num, den] pair");
}

SimpleFunction function_from_json(const json& j) {
    SimpleFunction f;
    try {
        for (const json& t : j.at("terms")) {
            SimpleTerm term;
            term.coefficient = t.at("coeff").get<double>();
            term.ball.center = t.at("center").get<PointId>();
            term.ball.radius = rational_from_json(t.at("radius"));
            f.terms.push_back(std::move(term));
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed simple function: ") + e.what());
    }
    return f;
}

json function_to_json(const SimpleFunction& f) {
    json terms = json::array();
    for (const auto& t : f.terms) {
        json term;
        term["coeff"] = t.coefficient;
        term["center"] = t.ball.center;
        term["radius"] = rational_to_json(t.ball.radius);
        terms.push_back(std::move(term));
    }
    return json{{"terms", std::move(terms)}};
}

KernelSpec kernel_from_json(const json& j) {
    const std::string family = j.value("kernel", "riesz");
    if (family == "riesz") {
        KernelSpec k = KernelSpec::riesz(j.value("riesz_i", 1), j.value("riesz_n", 1.0));
        k.s = j.value("s", k.riesz_n);
        k.c = j.value("c", 1.0);
        return k;
    }
    if (family == "custom") {
        KernelSpec k = KernelSpec::generic(base_expression_from_string(j.value("base", "zero")),
                                           j.value("s", 1.0), j.value("coordinate", 1),
                                           j.value("antisymmetrize", true));
        k.c = j.value("c", 1.0);
        return k;
    }
    throw InputError("unknown kernel family '" + family + "'");
}

json kernel_to_json(const KernelSpec& kernel) {
    json j;
    if (kernel.family == KernelFamily::coordinate_riesz) {
        j["kernel"] = "riesz";
        j["riesz_i"] = kernel.coordinate;
        j["riesz_n"] = kernel.riesz_n;
    } else {
        j["kernel"] = "custom";
        j["base"] = to_string(kernel.base);
        j["coordinate"] = kernel.coordinate;
        j["antisymmetrize"] = kernel.antisymmetrize;
    }
    j["s"] = kernel.s;
    j["c"] = kernel.c;
    return j;
}

json interval_set_to_json(const IntervalSet& set) {
    json intervals = json::array();
    set.for_each_interval([&](std::int64_t lo, std::int64_t hi) {
        const Rational a = set.point(lo);
        const Rational b = set.point(hi);
        intervals.push_back(json::array({integer_to_json(a.get_num()), integer_to_json(a.get_den()),
                                         integer_to_json(b.get_num()), integer_to_json(b.get_den())}));
    });
    return json{{"intervals", std::move(intervals)}, {"total_length", rational_to_json(set.total_length())}};
}

json certificate_to_json(const GoodRadiusCertificate& cert) {
    json gens = json::array();
    for (const auto& w : cert.witnesses) {
        gens.push_back({{"generation", w.generation},
                        {"cell_index", w.cell_index},
                        {"cell_mass", rational_to_json(w.cell_mass)},
                        {"clearance", rational_to_json(w.clearance)}});
    }
    return json{{"t", rational_to_json(cert.t)},
                {"lambda", cert.lambda},
                {"depth", cert.depth},
                {"interval", json::array({rational_to_json(cert.a), rational_to_json(cert.b)})},
                {"generations", std::move(gens)},
                {"mass_witnesses_extend", cert.mass_witnesses_extend}};
}

json radius_check_to_json(const RadiusCheck& check) {
    json j;
    j["good"] = check.good();
    j["certificate"] = certificate_to_json(check.certificate);
    if (check.rejection) {
        j["rejection"] = {{"generation", check.rejection->generation},
                          {"reason", check.rejection->reason == RejectionReason::heavy_cell ? "heavy_cell"
                                                                                            : "gridline_shell"}};
    }
    return j;
}

}  // namespace sio
