#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "clt.hpp"
#include "densities.hpp"
#include "simulate.hpp"
#include "transfer.hpp"

namespace ergclt {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

json to_json(const Interval& iv);
json to_json(const DecayFit& fit);
json to_json(const VarianceEstimate& est);
json to_json(const EtaProfile& eta);
json to_json(const ConditionReport& rep);
json to_json(const NormalMixture& mix);
json to_json(const GofReport& rep);
json to_json(const MaximalReport& rep);

/// cell_lo,cell_hi,value for each piece of a step density.
std::string density_csv(const PAF& density);
/// path_id,t,value for every path and grid time.
std::string sample_csv(const CltSample& sample);

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

/// Writes through a temporary file in the same directory and renames it
/// into place.  Throws IoError.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace ergclt
