#include "vclab/config.hpp"

#include <fstream>
#include <sstream>

namespace vclab::config {

Json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

Json parse_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") +
                                e.what());
  }
}

void apply_dotted_override(Json& root, const std::string& dotted,
                           const std::string& value) {
  if (dotted.empty()) throw std::invalid_argument("empty override key");
  Json* node = &root;
  size_t start = 0;
  while (true) {
    const size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(
        start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty())
      throw std::invalid_argument("override key has an empty segment: " +
                                  dotted);
    if (dot == std::string::npos) {
      Json parsed = Json::parse(value, nullptr, false);
      (*node)[key] = parsed.is_discarded() ? Json(value) : parsed;
      return;
    }
    if (!node->contains(key) || !(*node)[key].is_object())
      (*node)[key] = Json::object();
    node = &(*node)[key];
    start = dot + 1;
  }
}

void require_clean(const std::vector<std::string>& errs) {
  if (errs.empty()) return;
  std::ostringstream os;
  os << "invalid configuration:";
  for (const auto& e : errs) os << "\n  - " << e;
  throw std::invalid_argument(os.str());
}

void check_keys(const Json& block, const std::vector<std::string>& allowed,
                const std::string& prefix, std::vector<std::string>& errs) {
  if (!block.is_object()) {
    errs.push_back(prefix + ": expected an object");
    return;
  }
  for (const auto& item : block.items()) {
    bool known = false;
    for (const auto& k : allowed)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known)
      errs.push_back(prefix + "." + item.key() + ": unknown key");
  }
}

void check_top_level(const Json& root, std::vector<std::string>& errs) {
  check_keys(root,
             {"model", "sim", "coupling", "distance", "initial",
              "pair_initial", "contract", "invariant", "noise_bound",
              "network", "chaos", "transport", "output_dir"},
             "config", errs);
}

namespace {

const Json* find(const Json& block, const char* key) {
  if (!block.is_object()) return nullptr;
  const auto it = block.find(key);
  return it == block.end() ? nullptr : &*it;
}

}  // namespace

double require_num(const Json& block, const char* key,
                   const std::string& prefix, std::vector<std::string>& errs) {
  const Json* v = find(block, key);
  if (!v || !v->is_number()) {
    errs.push_back(prefix + "." + key + ": required number is missing");
    return 0.0;
  }
  return v->get<double>();
}

double num_or(const Json& block, const char* key, double fallback,
              const std::string& prefix, std::vector<std::string>& errs) {
  const Json* v = find(block, key);
  if (!v) return fallback;
  if (!v->is_number()) {
    errs.push_back(prefix + "." + key + ": expected a number");
    return fallback;
  }
  return v->get<double>();
}

int int_or(const Json& block, const char* key, int fallback,
           const std::string& prefix, std::vector<std::string>& errs) {
  const Json* v = find(block, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) {
    errs.push_back(prefix + "." + key + ": expected an integer");
    return fallback;
  }
  return v->get<int>();
}

std::string str_or(const Json& block, const char* key,
                   const std::string& fallback, const std::string& prefix,
                   std::vector<std::string>& errs) {
  const Json* v = find(block, key);
  if (!v) return fallback;
  if (!v->is_string()) {
    errs.push_back(prefix + "." + key + ": expected a string");
    return fallback;
  }
  return v->get<std::string>();
}

ConductanceSpec conductance_from(const Json& block, const std::string& prefix,
                                 std::vector<std::string>& errs) {
  if (!block.is_object()) {
    errs.push_back(prefix + ": expected an object with a 'type' field");
    return ConstantG{0.5};
  }
  const std::string type = str_or(block, "type", "", prefix, errs);
  if (type == "constant") {
    check_keys(block, {"type", "value"}, prefix, errs);
    return ConstantG{require_num(block, "value", prefix, errs)};
  }
  if (type == "logistic") {
    check_keys(block, {"type", "base", "amplitude", "steepness", "center"},
               prefix, errs);
    return LogisticG{require_num(block, "base", prefix, errs),
                     require_num(block, "amplitude", prefix, errs),
                     require_num(block, "steepness", prefix, errs),
                     require_num(block, "center", prefix, errs)};
  }
  if (type == "affine_clamped") {
    check_keys(block, {"type", "slope", "intercept", "floor"}, prefix, errs);
    return AffineClampedG{require_num(block, "slope", prefix, errs),
                          require_num(block, "intercept", prefix, errs),
                          require_num(block, "floor", prefix, errs)};
  }
  errs.push_back(prefix +
                 ".type: must be one of constant, logistic, affine_clamped");
  return ConstantG{0.5};
}

ModelParams model_from(const Json& block, std::vector<std::string>& errs) {
  const std::string prefix = "model";
  check_keys(block, {"v_l", "v_e", "g_l", "gamma", "a", "conductance"}, prefix,
             errs);
  ModelParams p;
  p.v_l = require_num(block, "v_l", prefix, errs);
  p.v_e = require_num(block, "v_e", prefix, errs);
  p.g_l = require_num(block, "g_l", prefix, errs);
  p.gamma = require_num(block, "gamma", prefix, errs);
  p.a = require_num(block, "a", prefix, errs);
  const Json* cond = find(block, "conductance");
  if (!cond) {
    errs.push_back(prefix + ".conductance: required block is missing");
    p.conductance = ConstantG{0.5};
  } else {
    p.conductance = conductance_from(*cond, prefix + ".conductance", errs);
  }
  if (errs.empty())
    for (const auto& e : validate(p)) errs.push_back(prefix + ": " + e);
  return p;
}

SimConfig sim_from(const Json& block, std::vector<std::string>& errs) {
  const std::string prefix = "sim";
  // replicas is read by the commands that run ensembles
  check_keys(block, {"dt", "t_end", "snapshot_stride", "seed", "replicas"},
             prefix, errs);
  SimConfig cfg;
  cfg.dt = num_or(block, "dt", cfg.dt, prefix, errs);
  cfg.t_end = num_or(block, "t_end", cfg.t_end, prefix, errs);
  cfg.snapshot_stride =
      int_or(block, "snapshot_stride", cfg.snapshot_stride, prefix, errs);
  const Json* seed = find(block, "seed");
  if (seed) {
    if (seed->is_number_unsigned() || seed->is_number_integer())
      cfg.master_seed = seed->get<uint64_t>();
    else
      errs.push_back(prefix + ".seed: expected an integer");
  }
  if (errs.empty())
    for (const auto& e : validate(cfg)) errs.push_back(prefix + ": " + e);
  return cfg;
}

CouplingKind coupling_from(const Json& block, std::vector<std::string>& errs) {
  const std::string prefix = "coupling";
  check_keys(block, {"variant", "xi"}, prefix, errs);
  CouplingKind kind;
  const std::string variant =
      str_or(block, "variant", "mirror", prefix, errs);
  if (variant == "synchronous")
    kind.variant = CouplingVariant::synchronous;
  else if (variant == "mirror")
    kind.variant = CouplingVariant::mirror;
  else if (variant == "independent")
    kind.variant = CouplingVariant::independent;
  else
    errs.push_back(prefix +
                   ".variant: must be synchronous, mirror, or independent");
  kind.xi = num_or(block, "xi", kind.xi, prefix, errs);
  if (errs.empty())
    for (const auto& e : validate(kind)) errs.push_back(prefix + ": " + e);
  return kind;
}

DistanceConfig distance_from(const Json& block,
                             std::vector<std::string>& errs) {
  const std::string prefix = "distance";
  check_keys(block, {"xi", "m", "M", "r_star", "k"}, prefix, errs);
  DistanceConfig d;
  d.xi = num_or(block, "xi", d.xi, prefix, errs);
  for (const char* key : {"m", "M", "r_star", "k"}) {
    const Json* v = find(block, key);
    if (!v) continue;
    if (!v->is_number()) {
      errs.push_back(prefix + "." + key + ": expected a number");
      continue;
    }
    const double x = v->get<double>();
    if (std::string(key) == "m") d.overrides.m = x;
    if (std::string(key) == "M") d.overrides.M = x;
    if (std::string(key) == "r_star") d.overrides.r_star = x;
    if (std::string(key) == "k") d.overrides.k = x;
  }
  return d;
}

InitSampler init_from(const Json& block, const std::string& prefix,
                      std::vector<std::string>& errs) {
  if (!block.is_object()) {
    errs.push_back(prefix + ": expected an object with a 'type' field");
    return PointInit{State{0.5, 0.5}};
  }
  const std::string type = str_or(block, "type", "", prefix, errs);
  if (type == "point") {
    check_keys(block, {"type", "v", "g"}, prefix, errs);
    return PointInit{State{require_num(block, "v", prefix, errs),
                           require_num(block, "g", prefix, errs)}};
  }
  if (type == "uniform") {
    check_keys(block, {"type", "v_lo", "v_hi", "g_lo", "g_hi"}, prefix, errs);
    UniformInit u{require_num(block, "v_lo", prefix, errs),
                  require_num(block, "v_hi", prefix, errs),
                  require_num(block, "g_lo", prefix, errs),
                  require_num(block, "g_hi", prefix, errs)};
    if (errs.empty() && (u.v_lo > u.v_hi || u.g_lo > u.g_hi))
      errs.push_back(prefix + ": box bounds are inverted");
    return u;
  }
  errs.push_back(prefix + ".type: must be point or uniform");
  return PointInit{State{0.5, 0.5}};
}

PairSampler pair_init_from(const Json& block, std::vector<std::string>& errs) {
  const std::string prefix = "pair_initial";
  check_keys(block, {"z", "z_prime"}, prefix, errs);
  const Json* z = find(block, "z");
  const Json* zp = find(block, "z_prime");
  if (!z || !zp) {
    errs.push_back(prefix + ": needs both 'z' and 'z_prime' blocks");
    return PairPointInit{PairState{State{0.5, 0.5}, State{0.5, 0.5}}};
  }
  InitSampler a = init_from(*z, prefix + ".z", errs);
  InitSampler b = init_from(*zp, prefix + ".z_prime", errs);
  const auto* pa = std::get_if<PointInit>(&a);
  const auto* pb = std::get_if<PointInit>(&b);
  if (pa && pb) return PairPointInit{PairState{pa->s, pb->s}};
  const auto* ua = std::get_if<UniformInit>(&a);
  const auto* ub = std::get_if<UniformInit>(&b);
  if (ua && ub) return PairUniformInit{*ua, *ub};
  // mixed point/box legs: widen the point into a degenerate box
  auto as_box = [](const InitSampler& s) {
    if (const auto* u = std::get_if<UniformInit>(&s)) return *u;
    const State z0 = std::get<PointInit>(s).s;
    return UniformInit{z0.v, z0.v, z0.g, z0.g};
  };
  return PairUniformInit{as_box(a), as_box(b)};
}

InteractionSpec interaction_from(const Json& block, const std::string& prefix,
                                 std::vector<std::string>& errs) {
  if (!block.is_object()) {
    errs.push_back(prefix + ": expected an object with a 'type' field");
    return ConstantH1{0.0};
  }
  const std::string type = str_or(block, "type", "", prefix, errs);
  if (type == "constant") {
    check_keys(block, {"type", "value"}, prefix, errs);
    return ConstantH1{require_num(block, "value", prefix, errs)};
  }
  if (type == "product_logistic") {
    check_keys(block, {"type", "offset", "kappa", "steepness", "center"},
               prefix, errs);
    return ProductLogisticH1{require_num(block, "offset", prefix, errs),
                             require_num(block, "kappa", prefix, errs),
                             require_num(block, "steepness", prefix, errs),
                             require_num(block, "center", prefix, errs)};
  }
  errs.push_back(prefix + ".type: must be constant or product_logistic");
  return ConstantH1{0.0};
}

}  // namespace vclab::config
