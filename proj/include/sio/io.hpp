#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "sio/good_radii.hpp"
#include "sio/kernels.hpp"
#include "sio/measure.hpp"
#include "sio/operator.hpp"

namespace sio {

using json = nlohmann::json;

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Point-cloud file:
//   {"metric": {"family": "euclidean_p" | "snowflake" | "custom_table", "p": 2, "alpha": 1},
//    "points": [{"id": 0, "coords": [..]}, ...], "distances": [row-major N x N]}
// p may be the string "inf". Ids must be unique and contiguous from 0.
PointCloud cloud_from_json(const json& j);
json cloud_to_json(const PointCloud& cloud);
MetricDescriptor metric_from_json(const json& j);
json metric_to_json(const MetricDescriptor& metric);

// Measure file: {"cloud": <inline cloud object or path>, "weights": [..]}.
// Relative cloud paths resolve against base_dir.
DiscreteMeasure measure_from_json(const json& j, const std::filesystem::path& base_dir = {});
DiscreteMeasure load_measure(const std::filesystem::path& path);
json measure_to_json(const DiscreteMeasure& measure);

// {"terms": [{"coeff": a, "center": id, "radius": r}, ...]}; the radius may be
// a number or an exact rational [num, den].
SimpleFunction function_from_json(const json& j);
json function_to_json(const SimpleFunction& f);

// {"kernel": "riesz", "riesz_i": 1, "riesz_n": 1, "s": 1} or
// {"kernel": "custom", "base": "upper_coordinate", "coordinate": 1, "s": 1, "antisymmetrize": true}
KernelSpec kernel_from_json(const json& j);
json kernel_to_json(const KernelSpec& kernel);

// Integers that do not fit in 64 bits are written as decimal strings.
json integer_to_json(const Integer& z);
json rational_to_json(const Rational& q);  // [num, den]
Rational rational_from_json(const json& j);

// {"intervals": [[lo_num, lo_den, hi_num, hi_den], ...], "total_length": [num, den]}
json interval_set_to_json(const IntervalSet& set);

json certificate_to_json(const GoodRadiusCertificate& cert);
json radius_check_to_json(const RadiusCheck& check);

}  // namespace sio
