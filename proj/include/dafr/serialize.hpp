#pragma once

#include "dafr/fitfn.hpp"
#include "dafr/metrics.hpp"
#include "dafr/pipeline.hpp"
#include "dafr/synth.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace dafr {

using Json = nlohmann::ordered_json;

inline constexpr int kModelFormatVersion = 1;

Json to_json(const LinearModel& model);
LinearModel linear_model_from_json(const Json& j);

Json to_json(const Scaler& scaler);
Scaler scaler_from_json(const Json& j);

/// Array of {bin, count, y_low, y_high, mape}.
Json to_json(const DecileProfile& profile);
DecileProfile profile_from_json(const Json& j);

Json to_json(const SegmentSpec& spec);
Json to_json(const KnnRouter& router);
Json to_json(const BathtubReport& report);
Json to_json(const MetricSet& metrics);
Json to_json(const DiagnoseReport& report);
Json to_json(const SynthConfig& config);

/// Whole-model document; every fitted model must be a LinearModel.
std::string serialize_model(const DafrModel& model);
/// Throws PipelineError with code "model_parse" on malformed input.
DafrModel parse_model(std::string_view text);

void save_model(const DafrModel& model, const std::filesystem::path& path);
DafrModel load_model(const std::filesystem::path& path);

}  // namespace dafr
