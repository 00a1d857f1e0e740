#include "spectro/report.hpp"

#include <fstream>

#include "spectro/errors.hpp"

namespace spectro {

json quantity(double value, const std::string& unit, const std::string& formula_ref,
              const std::string& note) {
  json j;
  j["value"] = value;
  j["unit"] = unit;
  j["formula_ref"] = formula_ref;
  if (!note.empty()) j["note"] = note;
  return j;
}

json report_header(const std::string& subcommand, const RunConfig& config) {
  json j;
  j["tool"] = "spectro";
  j["subcommand"] = subcommand;
  j["config"] = config.resolved();
  return j;
}

json fit_report(const FitResult& result, const FitModel& model) {
  json j;
  j["model"] = model.name;
  j["input_digest"] = result.data_digest.empty() ? "none" : result.data_digest;
  json params = json::object();
  for (std::size_t i = 0; i < model.param_names.size(); ++i) {
    json p;
    p["value"] = result.params[i];
    p["sigma"] = result.sigmas[i];
    params[model.param_names[i]] = p;
  }
  j["parameters"] = params;
  json corr = json::array();
  for (int r = 0; r < result.correlation.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < result.correlation.cols(); ++c) row.push_back(result.correlation(r, c));
    corr.push_back(row);
  }
  j["correlation"] = corr;
  if (!result.high_correlations.empty()) {
    json hc = json::array();
    for (const auto& [a, b] : result.high_correlations)
      hc.push_back(model.param_names[static_cast<std::size_t>(a)] + "~" +
                   model.param_names[static_cast<std::size_t>(b)]);
    j["poorly_constrained_pairs"] = hc;
  }
  j["jacobian_rank"] = result.jacobian_rank;
  j["iterations"] = result.n_iter;
  j["converged"] = result.converged;
  j["convergence_reason"] = result.convergence_reason;
  j["residual_norm"] = result.residual_norm;
  j["n_points"] = result.residuals.size();
  return j;
}

std::string dump_report(const json& j) { return j.dump(2) + "\n"; }

void write_report(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output file '" + path + "'");
  out << dump_report(j);
  if (!out) throw ValidationError("failed writing '" + path + "'");
}

}  // namespace spectro
