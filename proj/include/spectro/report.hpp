#pragma once

#include <string>

#include <json.hpp>

#include "spectro/config.hpp"
#include "spectro/fit.hpp"

// Deterministic JSON report assembly: insertion-ordered keys, no timestamps,
// every numeric entry tagged with unit and the library operation that
// produced it.
namespace spectro {

using json = nlohmann::ordered_json;

// {"value": ..., "unit": ..., "formula_ref": ..., ["note": ...]}
json quantity(double value, const std::string& unit, const std::string& formula_ref,
              const std::string& note = "");

// {tool, subcommand, config: <resolved>} — common report preamble
json report_header(const std::string& subcommand, const RunConfig& config);

// Parameters with uncertainties, correlation matrix, iteration count,
// convergence reason, model name, and the input data digest.
json fit_report(const FitResult& result, const FitModel& model);

// Serializes with 2-space indent and trailing newline. Same inputs give
// byte-identical files.
void write_report(const std::string& path, const json& j);

std::string dump_report(const json& j);

}  // namespace spectro
