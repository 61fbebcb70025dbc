// SPDX-License-Identifier: Apache-2.0
//
// JSON form of SystemConfig. Keys mirror the struct fields; powers are in dBm,
// distances in meters. Missing keys keep their defaults, unknown keys are an
// error so that typos do not silently fall back to defaults.

#pragma once

#include <fstream>
#include <set>
#include <string>

#include "json.hpp"

#include "irswpcn/scenario.hpp"

namespace irswpcn {

using json = nlohmann::json;

namespace detail {

inline json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline Vec3 vec3_from_json(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(key + ": expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace detail

inline json config_to_json(const SystemConfig& c) {
  json j;
  j["num_elements"] = c.num_elements;
  j["num_devices"] = c.num_devices;
  j["hap_power_dbm"] = c.hap_power_dbm;
  j["noise_power_dbm"] = c.noise_power_dbm;
  j["total_time"] = c.total_time;
  j["efficiencies"] = c.efficiencies.empty() ? std::vector<double>{0.8} : c.efficiencies;
  j["weights"] = c.weights.empty() ? std::vector<double>{1.0} : c.weights;
  j["hap_pos"] = detail::vec3_to_json(c.hap_pos);
  j["irs_pos"] = detail::vec3_to_json(c.irs_pos);
  j["device_center"] = detail::vec3_to_json(c.device_region.center);
  j["device_radius"] = c.device_region.radius;
  j["device_positions"] = json::array();
  for (const auto& p : c.device_positions) j["device_positions"].push_back(detail::vec3_to_json(p));
  j["pathloss_exponent_hap_irs"] = c.exponents.hap_irs;
  j["pathloss_exponent_irs_device"] = c.exponents.irs_device;
  j["pathloss_exponent_hap_device"] = c.exponents.hap_device;
  j["ref_loss_db"] = c.ref_loss_db;
  j["seed"] = c.seed;
  return j;
}

inline SystemConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  static const std::set<std::string> known{"num_elements",
                                           "num_devices",
                                           "hap_power_dbm",
                                           "noise_power_dbm",
                                           "total_time",
                                           "efficiencies",
                                           "weights",
                                           "hap_pos",
                                           "irs_pos",
                                           "device_center",
                                           "device_radius",
                                           "device_positions",
                                           "pathloss_exponent_hap_irs",
                                           "pathloss_exponent_irs_device",
                                           "pathloss_exponent_hap_device",
                                           "ref_loss_db",
                                           "seed"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("config: unknown key '" + key + "'");
  }
  SystemConfig c;
  try {
    auto read = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    read("num_elements", c.num_elements);
    read("num_devices", c.num_devices);
    read("hap_power_dbm", c.hap_power_dbm);
    read("noise_power_dbm", c.noise_power_dbm);
    read("total_time", c.total_time);
    read("efficiencies", c.efficiencies);
    read("weights", c.weights);
    read("device_radius", c.device_region.radius);
    read("pathloss_exponent_hap_irs", c.exponents.hap_irs);
    read("pathloss_exponent_irs_device", c.exponents.irs_device);
    read("pathloss_exponent_hap_device", c.exponents.hap_device);
    read("ref_loss_db", c.ref_loss_db);
    read("seed", c.seed);
    if (j.contains("hap_pos")) c.hap_pos = detail::vec3_from_json(j["hap_pos"], "hap_pos");
    if (j.contains("irs_pos")) c.irs_pos = detail::vec3_from_json(j["irs_pos"], "irs_pos");
    if (j.contains("device_center")) c.device_region.center = detail::vec3_from_json(j["device_center"], "device_center");
    if (j.contains("device_positions")) {
      for (const auto& p : j["device_positions"]) c.device_positions.push_back(detail::vec3_from_json(p, "device_positions"));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

inline void save_config(const SystemConfig& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file " + path);
  out << config_to_json(c).dump(2) << '\n';
}

/// Desk-scale defaults: N = 16, K = 4.
inline SystemConfig desk_profile() { return {}; }

/// Full-size setting: N = 50, K = 10.
inline SystemConfig full_profile() {
  SystemConfig c;
  c.num_elements = 50;
  c.num_devices = 10;
  return c;
}

}  // namespace irswpcn
