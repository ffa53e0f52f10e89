// Copyright 2026 The tsasd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tsasd/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "tsasd/error.hpp"

namespace tsasd {

using json = nlohmann::json;

namespace {

json conv_to_json(const ConvSpec& c) {
  return json{{"channels", c.out_channels},
              {"kernel", c.kernel},
              {"stride", c.stride}};
}

ConvSpec conv_from_json(const json& j) {
  ConvSpec c;
  c.out_channels = j.at("channels").get<int>();
  c.kernel = j.at("kernel").get<int>();
  c.stride = j.at("stride").get<int>();
  return c;
}

json encoder_to_json(const EncoderConfig& e) {
  json front = json::array();
  for (const ConvSpec& c : e.visual.frontend) front.push_back(conv_to_json(c));
  return json{
      {"embed_dim", e.embed_dim},
      {"visual",
       {{"frontend", front},
        {"temporal_blocks", e.visual.temporal_blocks},
        {"temporal_kernel", e.visual.temporal_kernel}}},
      {"audio",
       {{"stem_channels", e.audio.stem_channels},
        {"blocks", e.audio.blocks},
        {"kernel", e.audio.kernel},
        {"se_reduction", e.audio.se_reduction}}},
      {"speaker_dim", e.speaker_dim},
      {"normalize_speaker", e.normalize_speaker},
      {"mfcc_dim", e.mfcc_dim},
      {"align_group", e.align_group}};
}

EncoderConfig encoder_from_json(const json& j) {
  EncoderConfig e;
  e.embed_dim = j.at("embed_dim").get<int>();
  e.visual.frontend.clear();
  for (const json& c : j.at("visual").at("frontend")) {
    e.visual.frontend.push_back(conv_from_json(c));
  }
  e.visual.temporal_blocks = j.at("visual").at("temporal_blocks").get<int>();
  e.visual.temporal_kernel = j.at("visual").at("temporal_kernel").get<int>();
  e.audio.stem_channels = j.at("audio").at("stem_channels").get<int>();
  e.audio.blocks = j.at("audio").at("blocks").get<int>();
  e.audio.kernel = j.at("audio").at("kernel").get<int>();
  e.audio.se_reduction = j.at("audio").at("se_reduction").get<int>();
  e.speaker_dim = j.at("speaker_dim").get<int>();
  e.normalize_speaker = j.at("normalize_speaker").get<bool>();
  e.mfcc_dim = j.at("mfcc_dim").get<int>();
  e.align_group = j.at("align_group").get<int>();
  return e;
}

json model_to_json(const ModelConfig& m) {
  return json{{"encoder", encoder_to_json(m.encoder)},
              {"mode", fusion_mode_name(m.mode)},
              {"attention",
               {{"heads", m.attention.heads},
                {"layers", m.attention.layers},
                {"dropout", m.attention.dropout},
                {"positional_encoding", m.attention.positional_encoding}}},
              {"ffn_mult", m.ffn_mult},
              {"loss_clip", m.loss_clip}};
}

ModelConfig model_from_json(const json& j) {
  ModelConfig m;
  m.encoder = encoder_from_json(j.at("encoder"));
  m.mode = parse_fusion_mode(j.at("mode").get<std::string>());
  m.attention.heads = j.at("attention").at("heads").get<int>();
  m.attention.layers = j.at("attention").at("layers").get<int>();
  m.attention.dropout = j.at("attention").at("dropout").get<double>();
  m.attention.positional_encoding =
      j.at("attention").at("positional_encoding").get<bool>();
  m.ffn_mult = j.at("ffn_mult").get<int>();
  m.loss_clip = j.at("loss_clip").get<double>();
  return m;
}

}  // namespace

std::string RunConfig::to_json_string(int indent) const {
  json j;
  j["model"] = model_to_json(model);
  j["optimizer"] = {{"lr", optimizer.lr},
                    {"epoch_decay", optimizer.epoch_decay},
                    {"beta1", optimizer.beta1},
                    {"beta2", optimizer.beta2},
                    {"eps", optimizer.eps}};
  j["train"] = {{"epochs", train.epochs},
                {"batch_size", train.batch_size},
                {"augment", train.augment},
                {"force_null_enroll", train.force_null_enroll},
                {"allow_self_enroll", train.allow_self_enroll},
                {"seed", train.seed},
                {"eval_enroll_seed", train.eval_enroll_seed}};
  j["paths"] = {{"manifest", paths.manifest},
                {"library", paths.library},
                {"out_dir", paths.out_dir},
                {"data_root", paths.data_root}};
  j["speaker_backend"] = speaker_backend;
  return indent > 0 ? j.dump(indent) : j.dump();
}

RunConfig RunConfig::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("run config: ") + e.what());
  }
  RunConfig cfg;
  try {
    cfg.model = model_from_json(j.at("model"));
    const json& opt = j.at("optimizer");
    cfg.optimizer.lr = opt.at("lr").get<double>();
    cfg.optimizer.epoch_decay = opt.at("epoch_decay").get<double>();
    cfg.optimizer.beta1 = opt.at("beta1").get<double>();
    cfg.optimizer.beta2 = opt.at("beta2").get<double>();
    cfg.optimizer.eps = opt.at("eps").get<double>();
    const json& tr = j.at("train");
    cfg.train.epochs = tr.at("epochs").get<int>();
    cfg.train.batch_size = tr.at("batch_size").get<int>();
    cfg.train.augment = tr.at("augment").get<bool>();
    cfg.train.force_null_enroll = tr.at("force_null_enroll").get<bool>();
    cfg.train.allow_self_enroll = tr.at("allow_self_enroll").get<bool>();
    cfg.train.seed = tr.at("seed").get<uint64_t>();
    cfg.train.eval_enroll_seed = tr.at("eval_enroll_seed").get<uint64_t>();
    const json& p = j.at("paths");
    cfg.paths.manifest = p.at("manifest").get<std::string>();
    cfg.paths.library = p.at("library").get<std::string>();
    cfg.paths.out_dir = p.at("out_dir").get<std::string>();
    cfg.paths.data_root = p.at("data_root").get<std::string>();
    cfg.speaker_backend = j.at("speaker_backend").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("run config: ") + e.what());
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_string(text);
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config: " + path);
  out << to_json_string() << "\n";
  if (!out) throw IoError("short write to config: " + path);
}

}  // namespace tsasd
