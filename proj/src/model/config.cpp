// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssiu/model/config.hpp"

#include <algorithm>
#include <set>

namespace ssiu::model {

using nlohmann::json;

void SSIUConfig::validate() const {
  SSIU_CHECK(scale == 2 || scale == 3 || scale == 4, "scale must be 2, 3 or 4, got " << scale);
  SSIU_CHECK(channels >= 1, "channels must be >= 1");
  SSIU_CHECK(num_stages >= 3, "num_stages must be >= 3");
  SSIU_CHECK(attention_mode == "sparse" || attention_mode == "dense",
             "attention_mode must be 'sparse' or 'dense'");
  if (use_moe_fs) {
    SSIU_CHECK(int(moe_taps.size()) == moe.num_experts,
               "moe_taps must list one stage per expert (" << moe.num_experts << ")");
    for (size_t i = 0; i < moe_taps.size(); ++i) {
      SSIU_CHECK(moe_taps[i] >= 1 && moe_taps[i] <= num_stages, "moe tap out of range");
      if (i > 0) SSIU_CHECK(moe_taps[i] > moe_taps[i - 1], "moe_taps must be strictly increasing");
    }
    SSIU_CHECK(moe_taps.back() == num_stages, "last moe tap must be the final stage");
  }
  msgm_resolved().validate();
  esam_resolved().validate();
  moe_resolved().validate();
}

nn::MSGMConfig SSIUConfig::msgm_resolved() const {
  nn::MSGMConfig c = msgm;
  c.channels = channels;
  return c;
}

nn::ESAMConfig SSIUConfig::esam_resolved() const {
  nn::ESAMConfig c = esam;
  c.channels = channels;
  c.dense = attention_mode == "dense";
  return c;
}

nn::MoEFSConfig SSIUConfig::moe_resolved() const {
  nn::MoEFSConfig c = moe;
  c.channels = channels;
  return c;
}

json SSIUConfig::to_json() const {
  json j;
  j["scale"] = scale;
  j["channels"] = channels;
  j["num_stages"] = num_stages;
  j["moe_taps"] = moe_taps;
  j["attention_mode"] = attention_mode;
  j["use_moe_fs"] = use_moe_fs;
  j["msgm"] = {{"hidden_channels", msgm.hidden_channels}, {"dw_kernel", msgm.dw_kernel}};
  j["esam"] = {{"pool_kernel", esam.pool_kernel},
               {"pool_stride", esam.pool_stride},
               {"block_size", esam.block_size},
               {"overlap", esam.overlap},
               {"num_heads", esam.num_heads}};
  j["moe"] = {{"num_experts", moe.num_experts}};
  return j;
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  SSIU_CHECK(j.is_object(), "config section '" << where << "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    SSIU_CHECK(allowed.count(it.key()) > 0,
               "unknown config key '" << where << (where.empty() ? "" : ".") << it.key() << "'");
}

}  // namespace

SSIUConfig SSIUConfig::from_json(const json& j) {
  check_keys(j, {"scale", "channels", "num_stages", "moe_taps", "attention_mode", "use_moe_fs",
                 "msgm", "esam", "moe"},
             "model");
  SSIUConfig c;
  c.scale = j.value("scale", c.scale);
  c.channels = j.value("channels", c.channels);
  c.num_stages = j.value("num_stages", c.num_stages);
  if (j.contains("moe_taps")) c.moe_taps = j.at("moe_taps").get<std::vector<int>>();
  c.attention_mode = j.value("attention_mode", c.attention_mode);
  c.use_moe_fs = j.value("use_moe_fs", c.use_moe_fs);
  if (j.contains("msgm")) {
    const json& m = j.at("msgm");
    check_keys(m, {"hidden_channels", "dw_kernel"}, "model.msgm");
    c.msgm.hidden_channels = m.value("hidden_channels", c.msgm.hidden_channels);
    c.msgm.dw_kernel = m.value("dw_kernel", c.msgm.dw_kernel);
  }
  if (j.contains("esam")) {
    const json& e = j.at("esam");
    check_keys(e, {"pool_kernel", "pool_stride", "block_size", "overlap", "num_heads"},
               "model.esam");
    c.esam.pool_kernel = e.value("pool_kernel", c.esam.pool_kernel);
    c.esam.pool_stride = e.value("pool_stride", c.esam.pool_stride);
    c.esam.block_size = e.value("block_size", c.esam.block_size);
    c.esam.overlap = e.value("overlap", c.esam.overlap);
    c.esam.num_heads = e.value("num_heads", c.esam.num_heads);
  }
  if (j.contains("moe")) {
    const json& m = j.at("moe");
    check_keys(m, {"num_experts"}, "model.moe");
    c.moe.num_experts = m.value("num_experts", c.moe.num_experts);
  }
  c.validate();
  return c;
}

SSIUConfig SSIUConfig::defaults_for_scale(int scale) {
  SSIUConfig c;
  c.scale = scale;
  return c;
}

}  // namespace ssiu::model
