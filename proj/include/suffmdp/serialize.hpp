#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "suffmdp/adnn.hpp"
#include "suffmdp/baselines.hpp"
#include "suffmdp/dcov.hpp"
#include "suffmdp/feature_map.hpp"
#include "suffmdp/generative.hpp"
#include "suffmdp/qlearn.hpp"
#include "suffmdp/screening.hpp"

namespace suffmdp {

using Json = nlohmann::ordered_json;

// Matrices are stored row-major as nested arrays; NaN becomes null.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

void to_json(Json& j, const StratumResult& v);
void to_json(Json& j, const TestReport& v);
void to_json(Json& j, const ScreenRound& v);
void to_json(Json& j, const ScreenResult& v);

void to_json(Json& j, const DenseLayer& v);
void from_json(const Json& j, DenseLayer& v);
void to_json(Json& j, const FeatureMap& v);
void from_json(const Json& j, FeatureMap& v);
void to_json(Json& j, const Architecture& v);
void from_json(const Json& j, Architecture& v);
void to_json(Json& j, const AdnnModel& v);
void from_json(const Json& j, AdnnModel& v);

void to_json(Json& j, const TuningCell& v);
void from_json(const Json& j, TuningCell& v);
void to_json(Json& j, const FitConfig& v);
void from_json(const Json& j, FitConfig& v);
void to_json(Json& j, const StratifiedTestConfig& v);
void from_json(const Json& j, StratifiedTestConfig& v);
void to_json(Json& j, const ScreenConfig& v);
void from_json(const Json& j, ScreenConfig& v);
void to_json(Json& j, const SelectionConfig& v);
void from_json(const Json& j, SelectionConfig& v);
void to_json(Json& j, const ConstructConfig& v);
void from_json(const Json& j, ConstructConfig& v);

void to_json(Json& j, const DimensionReport& v);
void to_json(Json& j, const ConstructIteration& v);
/// Report without the fitted heads; the map is included.
void to_json(Json& j, const SufficientFeatures& v);

void to_json(Json& j, const GenerativeModelSpec& v);
void from_json(const Json& j, GenerativeModelSpec& v);
void to_json(Json& j, const QConfig& v);
void from_json(const Json& j, QConfig& v);
void to_json(Json& j, const QApproximator& v);
void from_json(const Json& j, QApproximator& v);
void to_json(Json& j, const PolicyValue& v);

Json read_json_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it into place.
void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace suffmdp
