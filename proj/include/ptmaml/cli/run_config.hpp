#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>

#include <json.hpp>

#include "ptmaml/data/synthetic.hpp"
#include "ptmaml/learner/config.hpp"
#include "ptmaml/meta/config.hpp"
#include "ptmaml/relevance/classifier.hpp"

namespace ptmaml::cli {

/// Environment variable naming the default config file.
inline constexpr const char* kConfigEnv = "PTMAML_CONFIG";

enum class Profile { Desk, Paper };
std::string_view profile_name(Profile p);
Profile profile_from_name(std::string_view name);

struct Paths {
  std::filesystem::path data = "work/data";            // raw/ and prepared/ live here
  std::filesystem::path checkpoints = "work/checkpoints";
  std::filesystem::path reports = "work/reports";
  std::filesystem::path examples;  // raw example dir; defaults to <data>/raw
  std::filesystem::path tables;    // raw tables file; defaults to <data>/raw/tables.jsonl

  std::filesystem::path raw_dir() const { return examples.empty() ? data / "raw" : examples; }
  std::filesystem::path raw_tables() const { return tables.empty() ? data / "raw" / "tables.jsonl" : tables; }
  std::filesystem::path prepared_dir() const { return data / "prepared"; }
};

struct RunConfig {
  Profile profile = Profile::Desk;
  std::uint64_t seed = 1;
  Paths paths;
  data::SynthConfig synth;
  relevance::ClassifierConfig classifier;
  learner::LearnerConfig learner;
  meta::MetaConfig meta;
  bool gold_types = false;        // train-side retrieval by gold SQL type
  int train_eval_size = 100;      // train examples scored per epoch
  std::optional<int> adapt_k;     // test-time overrides; default to training values
  std::optional<double> adapt_alpha;
  std::optional<int> adapt_steps;

  /// Every field materialized for the profile.
  static RunConfig defaults(Profile p);
  /// Profile defaults overlaid with the keys present in `j`. Unknown keys
  /// are rejected.
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;

  /// Derived seeds so each stage draws from its own stream.
  std::uint64_t synth_seed() const { return seed; }
  std::uint64_t init_seed() const { return seed * 1000003 + 17; }
  std::uint64_t train_seed() const { return seed * 1000003 + 29; }
};

/// Loads a config file; with no path, uses $PTMAML_CONFIG if set, else the
/// desk defaults.
RunConfig load_config(const std::optional<std::filesystem::path>& path);

} // namespace ptmaml::cli
