// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssiu/cli/run_config.hpp"

#include <fstream>
#include <set>

namespace ssiu::cli {

using nlohmann::json;

json RunConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["model"] = model.to_json();
  j["train"] = train.to_json();
  j["data"] = {{"root", data.root},
               {"train_split", data.train_split},
               {"val_split", data.val_split},
               {"regenerate_lr_cache", data.regenerate_lr_cache}};
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  SSIU_CHECK(j.is_object(), "run config must be a JSON object");
  static const std::set<std::string> allowed = {"seed", "output_dir", "model", "train", "data"};
  for (auto it = j.begin(); it != j.end(); ++it)
    SSIU_CHECK(allowed.count(it.key()) > 0, "unknown config key '" << it.key() << "'");
  RunConfig c;
  c.seed = j.value("seed", c.seed);
  c.output_dir = j.value("output_dir", c.output_dir);
  if (j.contains("model")) c.model = model::SSIUConfig::from_json(j.at("model"));
  if (j.contains("train")) c.train = train::TrainConfig::from_json(j.at("train"));
  if (j.contains("data")) {
    const json& d = j.at("data");
    static const std::set<std::string> dkeys = {"root", "train_split", "val_split",
                                                "regenerate_lr_cache"};
    for (auto it = d.begin(); it != d.end(); ++it)
      SSIU_CHECK(dkeys.count(it.key()) > 0, "unknown config key 'data." << it.key() << "'");
    c.data.root = d.value("root", c.data.root);
    c.data.train_split = d.value("train_split", c.data.train_split);
    c.data.val_split = d.value("val_split", c.data.val_split);
    c.data.regenerate_lr_cache = d.value("regenerate_lr_cache", c.data.regenerate_lr_cache);
  }
  c.model.validate();
  c.train.validate();
  return c;
}

void apply_override(json& j, const std::string& spec) {
  size_t eq = spec.find('=');
  SSIU_CHECK(eq != std::string::npos && eq > 0, "override must look like path.to.key=value, got '"
                                                    << spec << "'");
  std::string path = spec.substr(0, eq);
  std::string value = spec.substr(eq + 1);

  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;  // plain string
  }

  json* node = &j;
  size_t pos = 0;
  for (;;) {
    size_t dot = path.find('.', pos);
    std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    SSIU_CHECK(!key.empty(), "empty key segment in override '" << spec << "'");
    if (dot == std::string::npos) {
      (*node)[key] = parsed;
      return;
    }
    node = &(*node)[key];
    pos = dot + 1;
  }
}

RunConfig RunConfig::load(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw io_error("config parse error in " + path + ": " + e.what());
  }
  for (const auto& o : overrides) apply_override(j, o);
  return from_json(j);
}

}  // namespace ssiu::cli
