#pragma once

#include <string>
#include <variant>

#include "bmcal/pool.hpp"
#include "bmcal/predict_eval.hpp"
#include "bmcal/sampler_dp.hpp"
#include "bmcal/sampler_finite.hpp"

namespace bmcal {

// Forecast series JSONL: one record per step,
// {"t": <int>, "y": <real>, "components": [{"family": ..., "params": {...}}]}.
ForecastSeries load_forecast_jsonl(const std::string& path);
void save_forecast_jsonl(const ForecastSeries& series, const std::string& path);

// Trace JSONL: a header record, one record per stored draw, and a summary
// footer.  Allocations are serialized 1-based.
void save_trace_jsonl(const FiniteTrace& trace, const std::string& path);
void save_trace_jsonl(const DPTrace& trace, const std::string& path);

using LoadedTrace = std::variant<FiniteTrace, DPTrace>;
LoadedTrace load_trace_jsonl(const std::string& path);

void save_report_csv(const EvalReport& report, const std::string& path);
void save_summary_json(const EvalReport& report, const std::string& path,
                       const std::string& model_name);

// Run manifest: config hash, seed, version, timestamp.
void save_manifest(const std::string& path, const std::string& config_text,
                   std::uint64_t seed, const std::string& mode);

}  // namespace bmcal
