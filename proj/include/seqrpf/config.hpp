#pragma once

#include <json.hpp>

#include "seqrpf/circle.hpp"
#include "seqrpf/env.hpp"

namespace seqrpf {

using json = nlohmann::json;

enum class SystemKind { sft, circle, environment };

struct SystemConfig {
  SystemKind kind = SystemKind::sft;
  SftSpec sft;
  CircleSpec circle;
  EnvSpec env;
};

struct ExperimentConfig {
  SystemConfig system;
  json params;           // experiment-specific knobs, validated by the runner
  std::uint64_t seed = 1;
  std::string canonical; // sorted-key serialization the hash is taken over
  std::uint64_t hash = 0;
};

ExperimentConfig parse_config(const json& root);
ExperimentConfig load_config(const std::string& path);

// ---- strict-access helpers (all throw Error(config_error)) ------------------

// rejects any key outside `allowed`; `where` names the object in messages
void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where);

double num_at(const json& obj, const char* key, const std::string& where);
double num_or(const json& obj, const char* key, double fallback, const std::string& where);
long int_or(const json& obj, const char* key, long fallback, const std::string& where);
std::uint64_t u64_or(const json& obj, const char* key, std::uint64_t fallback,
                     const std::string& where);
std::string str_or(const json& obj, const char* key, const std::string& fallback,
                   const std::string& where);
bool bool_or(const json& obj, const char* key, bool fallback, const std::string& where);
std::vector<long> int_list_or(const json& obj, const char* key, std::vector<long> fallback,
                              const std::string& where);
std::vector<double> num_list_or(const json& obj, const char* key, std::vector<double> fallback,
                                const std::string& where);

}  // namespace seqrpf
