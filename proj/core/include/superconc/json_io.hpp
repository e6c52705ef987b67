#pragma once

// JSON conversions for configs and reports. Numbers are written with 17
// significant digits; non-finite values become null.

#include <nlohmann/json.hpp>

#include <string>

#include "superconc/covariance.hpp"
#include "superconc/covering.hpp"
#include "superconc/extremes.hpp"
#include "superconc/sampler.hpp"
#include "superconc/scantest.hpp"
#include "superconc/verify.hpp"

namespace superconc {

using json = nlohmann::json;

/// Fixed-format serializer: sorted keys (nlohmann's default ordering),
/// "%.17g" doubles, `indent` spaces per level.
std::string dump_json(const json& value, int indent = 2);

/// "%.17g" formatting shared with CSV output.
std::string format_double(double x);

/// {"kind": ..., "params": {...}, "table": [[lag, value], ...]}. Errors name
/// the offending field, prefixed by `where`.
CovarianceModel model_from_json(const json& j, const std::string& where = "model");
json model_to_json(const CovarianceModel& model);

json geometry_to_json(const GridGeometry& g);
GridGeometry geometry_from_json(const json& j, const std::string& where = "geometry");

/// {"n": ..., "sets": [[...], ...]} with zero-based indices.
ScanClass scan_class_from_json(const json& j, const std::string& where = "class");
json scan_class_to_json(const ScanClass& cls);

json to_json_value(const HypothesisReport& r);
json to_json_value(const ExtremeSummary& s, bool include_samples = false);
json to_json_value(const BoundReport& r);
json to_json_value(const VarianceEstimate& v);
json to_json_value(const TailFit& f);
json to_json_value(const LaplaceCheck& c);
json to_json_value(const RiskReport& r);
json to_json_value(const SignVectorResult& r);
json to_json_value(const CoveringCheck& c);

}  // namespace superconc
