#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "vclab/coupling.hpp"
#include "vclab/integrator.hpp"
#include "vclab/metric.hpp"
#include "vclab/model.hpp"
#include "vclab/network.hpp"
#include "vclab/transport.hpp"

// JSON experiment configuration: block parsers collect every problem with
// dotted field paths instead of stopping at the first, and unknown keys are
// rejected so typos cannot silently fall back to defaults.

namespace vclab::config {

using Json = nlohmann::ordered_json;

Json load_file(const std::string& path);   // io -> runtime_error,
                                           // parse -> invalid_argument
Json parse_text(const std::string& text);  // parse -> invalid_argument

// set root[a][b][c] for the dotted path "a.b.c"; the value string is parsed
// as JSON when possible and kept as a string otherwise
void apply_dotted_override(Json& root, const std::string& dotted,
                           const std::string& value);

// throws invalid_argument listing every collected problem
void require_clean(const std::vector<std::string>& errs);

// top-level blocks any command may use; other keys are rejected
void check_top_level(const Json& root, std::vector<std::string>& errs);

ModelParams model_from(const Json& block, std::vector<std::string>& errs);
SimConfig sim_from(const Json& block, std::vector<std::string>& errs);
CouplingKind coupling_from(const Json& block, std::vector<std::string>& errs);

struct DistanceConfig {
  double xi = 1e-3;
  DistanceOverrides overrides;
};
DistanceConfig distance_from(const Json& block, std::vector<std::string>& errs);

InitSampler init_from(const Json& block, const std::string& prefix,
                      std::vector<std::string>& errs);
PairSampler pair_init_from(const Json& block, std::vector<std::string>& errs);

ConductanceSpec conductance_from(const Json& block, const std::string& prefix,
                                 std::vector<std::string>& errs);
InteractionSpec interaction_from(const Json& block, const std::string& prefix,
                                 std::vector<std::string>& errs);

// field helpers shared by the command layer
double require_num(const Json& block, const char* key,
                   const std::string& prefix, std::vector<std::string>& errs);
double num_or(const Json& block, const char* key, double fallback,
              const std::string& prefix, std::vector<std::string>& errs);
int int_or(const Json& block, const char* key, int fallback,
           const std::string& prefix, std::vector<std::string>& errs);
std::string str_or(const Json& block, const char* key,
                   const std::string& fallback, const std::string& prefix,
                   std::vector<std::string>& errs);
void check_keys(const Json& block, const std::vector<std::string>& allowed,
                const std::string& prefix, std::vector<std::string>& errs);

}  // namespace vclab::config
