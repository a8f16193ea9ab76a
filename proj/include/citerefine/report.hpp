// Copyright 2026 The citerefine Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>

#include "citerefine/metrics.hpp"
#include "json.hpp"

namespace citerefine {

// Everything outside the metrics that a report must record for provenance.
struct ReportContext {
  std::string backend_identity;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
};

// Field order is fixed, so equal inputs serialize to equal bytes. Doubles are
// written at full round-trip precision; `display` repeats the headline
// numbers rounded to two decimals.
nlohmann::ordered_json report_to_json(const CitationReport& report,
                                      const ReportContext& context,
                                      const MetricOptions& options);

void write_report(const CitationReport& report, const ReportContext& context,
                  const MetricOptions& options,
                  const std::filesystem::path& path);

// "74.56" style rendering.
std::string format_percent(double value);

}  // namespace citerefine
