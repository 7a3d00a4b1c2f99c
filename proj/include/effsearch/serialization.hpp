// SPDX-License-Identifier: Apache-2.0
//
// JSON record forms shared by every file format and API payload.
#pragma once

#include <json.hpp>

#include "effsearch/config_space.hpp"
#include "effsearch/descriptors.hpp"
#include "effsearch/objectives.hpp"

namespace effsearch {

using Json = nlohmann::json;

void to_json(Json& j, const EfficiencyConfig& c);
void from_json(const Json& j, EfficiencyConfig& c);

void to_json(Json& j, const PerformanceVector& p);
void from_json(const Json& j, PerformanceVector& p);

void to_json(Json& j, const HardwareSpec& h);
void from_json(const Json& j, HardwareSpec& h);

void to_json(Json& j, const PreferenceWeights& w);
void from_json(const Json& j, PreferenceWeights& w);

void to_json(Json& j, const ModelDescriptor& m);
void from_json(const Json& j, ModelDescriptor& m);

void to_json(Json& j, const TaskDescriptor& t);
void from_json(const Json& j, TaskDescriptor& t);

/// Infinite caps serialize as null.
Json number_or_null(double v);
double number_or_inf(const Json& j);

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double v);

/// Writes `doc` as pretty JSON followed by a newline.
void write_json_file(const std::string& path, const Json& doc);
Json read_json_file(const std::string& path);

}  // namespace effsearch
