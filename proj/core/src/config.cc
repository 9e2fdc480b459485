/* Copyright 2026 The ROO Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


#include "roo/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace roo {
namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) {
    part = trim(part);
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

template <typename T>
T parse_uint(const std::string& key, const std::string& v) {
  T out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

// Shortest text that parses back to the same double.
std::string fmt_double(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

using Setter = std::function<void(HarnessConfig&, const std::string&)>;

template <typename T, typename Owner>
Setter uint_field(T Owner::*member, Owner HarnessConfig::*section,
                  const std::string& key) {
  return [=](HarnessConfig& c, const std::string& v) {
    (c.*section).*member = parse_uint<T>(key, v);
  };
}

const std::map<std::string, Setter>& setters() {
  using G = GeneratorConfig;
  using M = ModelConfig;
  static const std::map<std::string, Setter> table = {
      {"generator.seed", uint_field(&G::seed, &HarnessConfig::generator, "generator.seed")},
      {"generator.num_users",
       uint_field(&G::num_users, &HarnessConfig::generator, "generator.num_users")},
      {"generator.requests_per_user",
       uint_field(&G::requests_per_user, &HarnessConfig::generator,
                  "generator.requests_per_user")},
      {"generator.k_fixed",
       uint_field(&G::k_fixed, &HarnessConfig::generator, "generator.k_fixed")},
      {"generator.k_weights",
       [](HarnessConfig& c, const std::string& v) {
         const auto parts = split(v, ',');
         if (parts.size() != 10) {
           throw ConfigError("generator.k_weights: expected 10 weights for k=1..10");
         }
         for (std::size_t i = 0; i < 10; ++i) {
           c.generator.k_weights[i] = parse_double("generator.k_weights", parts[i]);
         }
       }},
      {"generator.num_items",
       uint_field(&G::num_items, &HarnessConfig::generator, "generator.num_items")},
      {"generator.conversion_rates",
       [](HarnessConfig& c, const std::string& v) {
         c.generator.conversion_rates.clear();
         for (const std::string& pair : split(v, ',')) {
           const auto kv = split(pair, ':');
           if (kv.size() != 2) {
             throw ConfigError("generator.conversion_rates: expected label:rate, got '" +
                               pair + "'");
           }
           c.generator.conversion_rates[parse_uint<LabelId>(
               "generator.conversion_rates", kv[0])] =
               parse_double("generator.conversion_rates", kv[1]);
         }
       }},
      {"generator.window_ms",
       [](HarnessConfig& c, const std::string& v) {
         c.generator.window_ms = parse_uint<std::int64_t>("generator.window_ms", v);
       }},
      {"generator.n_ro_dense",
       uint_field(&G::n_ro_dense, &HarnessConfig::generator, "generator.n_ro_dense")},
      {"generator.n_ro_idlist",
       uint_field(&G::n_ro_idlist, &HarnessConfig::generator, "generator.n_ro_idlist")},
      {"generator.ro_idlist_len",
       uint_field(&G::ro_idlist_len, &HarnessConfig::generator,
                  "generator.ro_idlist_len")},
      {"generator.history_min",
       uint_field(&G::history_min, &HarnessConfig::generator, "generator.history_min")},
      {"generator.history_max",
       uint_field(&G::history_max, &HarnessConfig::generator, "generator.history_max")},
      {"generator.n_nro_dense",
       uint_field(&G::n_nro_dense, &HarnessConfig::generator, "generator.n_nro_dense")},
      {"generator.n_nro_idlist",
       uint_field(&G::n_nro_idlist, &HarnessConfig::generator,
                  "generator.n_nro_idlist")},
      {"generator.nro_idlist_len",
       uint_field(&G::nro_idlist_len, &HarnessConfig::generator,
                  "generator.nro_idlist_len")},
      {"generator.loss_rate",
       [](HarnessConfig& c, const std::string& v) {
         c.generator.loss_rate = parse_double("generator.loss_rate", v);
       }},
      {"joiner.window_ms",
       [](HarnessConfig& c, const std::string& v) {
         c.joiner.window_ms = parse_uint<std::int64_t>("joiner.window_ms", v);
       }},
      {"joiner.engagement_threshold",
       [](HarnessConfig& c, const std::string& v) {
         c.joiner.engagement_threshold =
             parse_uint<std::uint32_t>("joiner.engagement_threshold", v);
       }},
      {"joiner.dynamic_trigger",
       [](HarnessConfig& c, const std::string& v) {
         c.joiner.dynamic_trigger = parse_bool("joiner.dynamic_trigger", v);
       }},
      {"joiner.shards",
       [](HarnessConfig& c, const std::string& v) {
         c.joiner_shards = parse_uint<unsigned>("joiner.shards", v);
       }},
      {"model.seed", uint_field(&M::seed, &HarnessConfig::model, "model.seed")},
      {"model.dim", uint_field(&M::dim, &HarnessConfig::model, "model.dim")},
      {"model.feature_table_rows",
       uint_field(&M::feature_table_rows, &HarnessConfig::model,
                  "model.feature_table_rows")},
      {"model.item_table_rows",
       uint_field(&M::item_table_rows, &HarnessConfig::model, "model.item_table_rows")},
      {"model.action_table_rows",
       uint_field(&M::action_table_rows, &HarnessConfig::model,
                  "model.action_table_rows")},
      {"model.context_table_rows",
       uint_field(&M::context_table_rows, &HarnessConfig::model,
                  "model.context_table_rows")},
      {"model.n_max", uint_field(&M::n_max, &HarnessConfig::model, "model.n_max")},
      {"model.lce_n_out",
       uint_field(&M::lce_n_out, &HarnessConfig::model, "model.lce_n_out")},
      {"model.lce_d_out",
       uint_field(&M::lce_d_out, &HarnessConfig::model, "model.lce_d_out")},
      {"model.hidden", uint_field(&M::hidden, &HarnessConfig::model, "model.hidden")},
      {"model.pooling",
       [](HarnessConfig& c, const std::string& v) {
         if (v == "last") {
           c.model.pooling = SeqPooling::kLastValid;
         } else if (v == "mean") {
           c.model.pooling = SeqPooling::kMeanValid;
         } else {
           throw ConfigError("model.pooling: expected last or mean, got '" + v + "'");
         }
       }},
      {"model.history",
       [](HarnessConfig& c, const std::string& v) {
         if (parse_bool("model.history", v)) {
           c.model.history_items = kHistoryItems;
           c.model.history_actions = kHistoryActions;
           c.model.history_contexts = kHistoryContexts;
         } else {
           c.model.history_items.reset();
           c.model.history_actions.reset();
           c.model.history_contexts.reset();
         }
       }},
      {"model.architectures",
       [](HarnessConfig& c, const std::string& v) {
         c.architectures.clear();
         for (const std::string& name : split(v, ',')) {
           auto arch = parse_architecture(name);
           if (!arch) throw ConfigError("model.architectures: unknown '" + name + "'");
           c.architectures.push_back(*arch);
         }
       }},
      {"batch.batch_size",
       [](HarnessConfig& c, const std::string& v) {
         c.batch_size = parse_uint<std::uint32_t>("batch.batch_size", v);
       }},
      {"batch.tasks",
       [](HarnessConfig& c, const std::string& v) {
         c.batch.tasks.clear();
         for (const std::string& t : split(v, ',')) {
           const auto kv = split(t, ':');
           if (kv.size() != 2) {
             throw ConfigError("batch.tasks: expected name:label, got '" + t + "'");
           }
           c.batch.tasks.push_back(
               {kv[0], {{parse_uint<LabelId>("batch.tasks", kv[1]), 1.0f}}});
         }
       }},
      {"store.block_samples",
       [](HarnessConfig& c, const std::string& v) {
         c.block_samples = parse_uint<std::uint32_t>("store.block_samples", v);
       }},
  };
  return table;
}

}  // namespace

void HarnessConfig::validate() const {
  try {
    generator.validate();
    joiner.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (batch_size == 0) throw ConfigError("batch.batch_size must be >= 1");
  if (block_samples == 0) throw ConfigError("store.block_samples must be >= 1");
  if (joiner_shards == 0) throw ConfigError("joiner.shards must be >= 1");
  if (architectures.empty()) throw ConfigError("model.architectures is empty");
  if (batch.tasks.empty()) throw ConfigError("batch.tasks is empty");
  if (model.dim == 0 || model.n_max == 0 || model.hidden == 0 ||
      model.lce_n_out == 0 || model.lce_d_out == 0) {
    throw ConfigError("model dimensions must be >= 1");
  }
  if (model.feature_table_rows == 0 || model.item_table_rows == 0 ||
      model.action_table_rows == 0 || model.context_table_rows == 0) {
    throw ConfigError("model table sizes must be >= 1");
  }
}

BatchConfig default_batch_config() {
  return {{{"engagement", {{1, 1.0f}}}, {"consumption", {{2, 1.0f}}}}};
}

HarnessConfig default_config() {
  HarnessConfig c;
  c.batch = default_batch_config();
  c.model.history_items = kHistoryItems;
  c.model.history_actions = kHistoryActions;
  c.model.history_contexts = kHistoryContexts;
  c.model.tasks.clear();
  for (const TaskSpec& t : c.batch.tasks) c.model.tasks.push_back(t.name);
  c.generator.window_ms = c.joiner.window_ms;
  return c;
}

HarnessConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  HarnessConfig c = default_config();
  bool generator_window = false;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("config: key '" + section + "' outside a section");
    }
    if (section != "generator" && section != "joiner" && section != "model" &&
        section != "batch" && section != "store") {
      throw ConfigError("config: unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      auto it = setters().find(full);
      if (it == setters().end()) throw ConfigError("config: unknown key '" + full + "'");
      it->second(c, trim(value.get_value<std::string>()));
      if (full == "generator.window_ms") generator_window = true;
    }
  }
  // The generator's event span follows the join window unless set apart.
  if (!generator_window) c.generator.window_ms = c.joiner.window_ms;
  c.model.tasks.clear();
  for (const TaskSpec& t : c.batch.tasks) c.model.tasks.push_back(t.name);
  c.validate();
  return c;
}

HarnessConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const HarnessConfig& c) {
  std::ostringstream o;
  const GeneratorConfig& g = c.generator;
  o << "[generator]\n"
    << "seed = " << g.seed << "\n"
    << "num_users = " << g.num_users << "\n"
    << "requests_per_user = " << g.requests_per_user << "\n"
    << "k_fixed = " << g.k_fixed << "\n"
    << "k_weights = ";
  for (std::size_t i = 0; i < g.k_weights.size(); ++i) {
    o << (i ? "," : "") << fmt_double(g.k_weights[i]);
  }
  o << "\nnum_items = " << g.num_items << "\nconversion_rates = ";
  bool first = true;
  for (const auto& [label, p] : g.conversion_rates) {
    o << (first ? "" : ",") << label << ":" << fmt_double(p);
    first = false;
  }
  o << "\nwindow_ms = " << g.window_ms << "\n"
    << "n_ro_dense = " << g.n_ro_dense << "\n"
    << "n_ro_idlist = " << g.n_ro_idlist << "\n"
    << "ro_idlist_len = " << g.ro_idlist_len << "\n"
    << "history_min = " << g.history_min << "\n"
    << "history_max = " << g.history_max << "\n"
    << "n_nro_dense = " << g.n_nro_dense << "\n"
    << "n_nro_idlist = " << g.n_nro_idlist << "\n"
    << "nro_idlist_len = " << g.nro_idlist_len << "\n"
    << "loss_rate = " << fmt_double(g.loss_rate) << "\n";
  o << "\n[joiner]\n"
    << "window_ms = " << c.joiner.window_ms << "\n"
    << "engagement_threshold = " << c.joiner.engagement_threshold << "\n"
    << "dynamic_trigger = " << (c.joiner.dynamic_trigger ? "true" : "false") << "\n"
    << "shards = " << c.joiner_shards << "\n";
  const ModelConfig& m = c.model;
  o << "\n[model]\n"
    << "seed = " << m.seed << "\n"
    << "dim = " << m.dim << "\n"
    << "feature_table_rows = " << m.feature_table_rows << "\n"
    << "item_table_rows = " << m.item_table_rows << "\n"
    << "action_table_rows = " << m.action_table_rows << "\n"
    << "context_table_rows = " << m.context_table_rows << "\n"
    << "n_max = " << m.n_max << "\n"
    << "pooling = " << (m.pooling == SeqPooling::kLastValid ? "last" : "mean") << "\n"
    << "lce_n_out = " << m.lce_n_out << "\n"
    << "lce_d_out = " << m.lce_d_out << "\n"
    << "hidden = " << m.hidden << "\n"
    << "history = " << (m.history_items ? "true" : "false") << "\n"
    << "architectures = ";
  for (std::size_t i = 0; i < c.architectures.size(); ++i) {
    o << (i ? "," : "") << to_string(c.architectures[i]);
  }
  o << "\n\n[batch]\nbatch_size = " << c.batch_size << "\ntasks = ";
  for (std::size_t i = 0; i < c.batch.tasks.size(); ++i) {
    const TaskSpec& t = c.batch.tasks[i];
    if (t.label_values.size() != 1) {
      throw ConfigError("dump_config: task '" + t.name +
                        "' is not a single-label binary task");
    }
    o << (i ? "," : "") << t.name << ":" << t.label_values.begin()->first;
  }
  o << "\n\n[store]\nblock_samples = " << c.block_samples << "\n";
  return o.str();
}

}  // namespace roo
