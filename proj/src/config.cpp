#include "clar/config.hpp"

#include <fstream>
#include <functional>
#include <map>

#include "clar/error.hpp"

namespace clar {

LaplacianKind parse_laplacian_kind(const std::string& name) {
  if (name == "unnormalized" || name == "unnorm") return LaplacianKind::Unnormalized;
  if (name == "sym") return LaplacianKind::SymNormalized;
  if (name == "selfloop") return LaplacianKind::SelfLoopSymNormalized;
  throw Error(ErrorCode::InvalidArgument, "unknown laplacian kind '" + name + "'");
}

std::string to_string(LaplacianKind kind) {
  switch (kind) {
    case LaplacianKind::Unnormalized: return "unnormalized";
    case LaplacianKind::SymNormalized: return "sym";
    case LaplacianKind::SelfLoopSymNormalized: return "selfloop";
  }
  return "sym";
}

SampleKind parse_sample_kind(const std::string& name) {
  if (name == "node") return SampleKind::NodeBased;
  if (name == "edge") return SampleKind::EdgeBased;
  throw Error(ErrorCode::InvalidArgument, "unknown sampling strategy '" + name + "'");
}

std::string to_string(SampleKind kind) { return kind == SampleKind::NodeBased ? "node" : "edge"; }

namespace {

using nlohmann::json;

double get_double(const json& v, const std::string& key) {
  if (!v.is_number()) throw Error(ErrorCode::InvalidArgument, "config key '" + key + "' must be a number");
  return v.get<double>();
}

std::size_t get_size(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw Error(ErrorCode::InvalidArgument, "config key '" + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::string get_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw Error(ErrorCode::InvalidArgument, "config key '" + key + "' must be a string");
  return v.get<std::string>();
}

bool get_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw Error(ErrorCode::InvalidArgument, "config key '" + key + "' must be a boolean");
  return v.get<bool>();
}

}  // namespace

TrainConfig train_config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "config must be a JSON object");
  TrainConfig c;
  using Setter = std::function<void(const json&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"lr", [&](const json& v, const std::string& k) { c.lr = get_double(v, k); }},
      {"epochs", [&](const json& v, const std::string& k) { c.max_epochs = get_size(v, k); }},
      {"patience", [&](const json& v, const std::string& k) { c.patience = get_size(v, k); }},
      {"hidden", [&](const json& v, const std::string& k) { c.hidden_dim = get_size(v, k); }},
      {"depth", [&](const json& v, const std::string& k) { c.depth = get_size(v, k); }},
      {"seed", [&](const json& v, const std::string& k) { c.seed = get_size(v, k); }},
      {"backbone", [&](const json& v, const std::string& k) { c.backbone = parse_backbone(get_string(v, k)); }},
      {"split",
       [&](const json& v, const std::string& k) {
         const auto s = get_string(v, k);
         if (s == "random") {
           c.split.kind = SplitSpec::Kind::RandomFraction;
         } else if (s == "planetoid") {
           c.split.kind = SplitSpec::Kind::PlanetoidStyle;
         } else {
           throw Error(ErrorCode::InvalidArgument, "split must be 'random' or 'planetoid'");
         }
       }},
      {"train_frac", [&](const json& v, const std::string& k) { c.split.train = get_double(v, k); }},
      {"val_frac", [&](const json& v, const std::string& k) { c.split.val = get_double(v, k); }},
      {"test_frac", [&](const json& v, const std::string& k) { c.split.test = get_double(v, k); }},
      {"per_class_train", [&](const json& v, const std::string& k) { c.split.per_class_train = get_size(v, k); }},
      {"val_count", [&](const json& v, const std::string& k) { c.split.val_count = get_size(v, k); }},
      {"test_count", [&](const json& v, const std::string& k) { c.split.test_count = get_size(v, k); }},
      {"reg", [&](const json& v, const std::string& k) { c.reg.kind = parse_reg_kind(get_string(v, k)); }},
      {"alpha", [&](const json& v, const std::string& k) { c.reg.alpha = get_double(v, k); }},
      {"beta", [&](const json& v, const std::string& k) { c.reg.beta = get_double(v, k); }},
      {"gamma", [&](const json& v, const std::string& k) { c.reg.gamma = get_double(v, k); }},
      {"S", [&](const json& v, const std::string& k) { c.reg.strategy.s = get_size(v, k); }},
      {"strategy",
       [&](const json& v, const std::string& k) { c.reg.strategy.kind = parse_sample_kind(get_string(v, k)); }},
      {"clamp", [&](const json& v, const std::string& k) { c.reg.clamp_hi = get_double(v, k); }},
      {"drop_rate", [&](const json& v, const std::string& k) { c.reg.drop_rate = get_double(v, k); }},
      {"resample", [&](const json& v, const std::string& k) { c.reg.resample_each_epoch = get_bool(v, k); }},
      {"per_node_trace",
       [&](const json& v, const std::string& k) { c.reg.per_node_trace = get_bool(v, k); }},
      {"ori_laplacian",
       [&](const json& v, const std::string& k) { c.reg.clar.ori_kind = parse_laplacian_kind(get_string(v, k)); }},
      {"com_laplacian",
       [&](const json& v, const std::string& k) { c.reg.clar.com_kind = parse_laplacian_kind(get_string(v, k)); }},
      {"normalize_complement_first",
       [&](const json& v, const std::string& k) { c.reg.clar.normalize_complement_first = get_bool(v, k); }},
  };
  for (const auto& [key, value] : j.items()) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
    it->second(value, key);
  }
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return train_config_from_json(j);
}

json to_json(const TrainConfig& c) {
  json j;
  j["lr"] = c.lr;
  j["epochs"] = c.max_epochs;
  j["patience"] = c.patience;
  j["hidden"] = c.hidden_dim;
  j["depth"] = c.depth;
  j["seed"] = c.seed;
  j["backbone"] = to_string(c.backbone);
  j["split"] = c.split.kind == SplitSpec::Kind::RandomFraction ? "random" : "planetoid";
  j["train_frac"] = c.split.train;
  j["val_frac"] = c.split.val;
  j["test_frac"] = c.split.test;
  j["per_class_train"] = c.split.per_class_train;
  j["val_count"] = c.split.val_count;
  j["test_count"] = c.split.test_count;
  j["reg"] = to_string(c.reg.kind);
  j["alpha"] = c.reg.alpha;
  j["beta"] = c.reg.beta;
  j["gamma"] = c.reg.gamma;
  j["S"] = c.reg.strategy.s;
  j["strategy"] = to_string(c.reg.strategy.kind);
  // JSON has no infinity; a huge finite clamp behaves the same.
  j["clamp"] = std::isfinite(c.reg.clamp_hi) ? c.reg.clamp_hi : std::numeric_limits<double>::max();
  j["drop_rate"] = c.reg.drop_rate;
  j["resample"] = c.reg.resample_each_epoch;
  j["per_node_trace"] = c.reg.per_node_trace;
  j["ori_laplacian"] = to_string(c.reg.clar.ori_kind);
  j["com_laplacian"] = to_string(c.reg.clar.com_kind);
  j["normalize_complement_first"] = c.reg.clar.normalize_complement_first;
  return j;
}

void write_json(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace clar
