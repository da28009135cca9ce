#include "report_io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <system_error>

#include "errors.hpp"

namespace ergclt {

json to_json(const Interval& iv) { return json::array({iv.lo, iv.hi}); }

json to_json(const DecayFit& fit) {
  return {{"theta", fit.theta}, {"residual", fit.residual}, {"points", fit.points}};
}

json to_json(const VarianceEstimate& est) {
  json j = {{"sigma2", est.sigma2},
            {"method", method_name(est.method)},
            {"truncation_J", est.truncation_J},
            {"tail_bound", est.tail_bound},
            {"decay_fit", to_json(est.decay_fit)},
            {"projected", est.projected}};
  if (est.method == VarianceMethod::monte_carlo) j["stderr"] = est.std_error;
  if (!est.per_interval.empty()) {
    j["per_interval"] = est.per_interval;
    j["interval_spread"] = est.interval_spread;
  }
  return j;
}

json to_json(const EtaProfile& eta) {
  json comps = json::array();
  for (const auto& c : eta.components) {
    json support = json::array();
    for (const auto& iv : c.support) support.push_back(to_json(iv));
    json jc = {{"support", support},
               {"value", c.value},
               {"mass", c.mass},
               {"tail_bound", c.tail_bound}};
    if (!c.partial_sums.empty()) jc["partial_sums"] = c.partial_sums;
    comps.push_back(jc);
  }
  return {{"method", method_name(eta.method)},
          {"truncation_J", eta.truncation_J},
          {"components", comps}};
}

json to_json(const ConditionReport& rep) {
  return {{"V", rep.V},
          {"series_partial", rep.series_partial},
          {"dyadic_partial", rep.dyadic_partial},
          {"iterate_norms", rep.iterate_norms},
          {"interp_bound", rep.interp_bound},
          {"decay_fit", to_json(rep.decay_fit)},
          {"sandwich_ratio", rep.sandwich_ratio},
          {"projected", rep.projected},
          {"negligible_from", rep.negligible_from}};
}

json to_json(const NormalMixture& mix) {
  json comps = json::array();
  for (std::size_t i = 0; i < mix.weights.size(); ++i) {
    comps.push_back({{"weight", mix.weights[i]}, {"variance", mix.variances[i]}});
  }
  return {{"components", comps}, {"description", mix.describe()}};
}

json to_json(const GofReport& rep) {
  return {{"ks_stat", rep.ks_stat},
          {"sample_size", rep.sample_size},
          {"target", to_json(rep.target)},
          {"t", rep.t},
          {"label", rep.label},
          {"skipped", rep.skipped}};
}

json to_json(const MaximalReport& rep) {
  return {{"n", rep.n},
          {"q", rep.q},
          {"lhs", rep.lhs},
          {"lhs_stderr", rep.lhs_stderr},
          {"rhs", rep.rhs},
          {"projection_norm", rep.projection_norm},
          {"delta_q", rep.delta_q},
          {"margin_stderr", rep.margin},
          {"holds", rep.holds}};
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string density_csv(const PAF& density) {
  std::string out = "cell_lo,cell_hi,value\n";
  const auto& bp = density.breakpoints();
  for (std::size_t k = 0; k < density.size(); ++k) {
    const double mid = 0.5 * (bp[k] + bp[k + 1]);
    out += format_double(bp[k]) + ',' + format_double(bp[k + 1]) + ',' +
           format_double(density.pieces()[k](mid)) + '\n';
  }
  return out;
}

std::string sample_csv(const CltSample& sample) {
  std::string out = "path_id,t,value\n";
  out.reserve(out.size() + sample.paths.size() * 32);
  for (std::size_t p = 0; p < sample.num_paths(); ++p) {
    for (std::size_t k = 0; k < sample.t_grid.size(); ++k) {
      out += std::to_string(p) + ',' + format_double(sample.t_grid[k]) + ',' +
             format_double(sample.at(p, k)) + '\n';
    }
  }
  return out;
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path() && !fs::exists(target.parent_path())) {
    throw IoError("output directory does not exist: " + target.parent_path().string());
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + path);
  }
}

}  // namespace ergclt
