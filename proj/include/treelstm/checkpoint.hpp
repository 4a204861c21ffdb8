#pragma once

// JSON checkpoints for Tree-LSTM and baseline models. Doubles are written in
// shortest round-trip form, so save followed by load is bit-exact.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "treelstm/baselines.hpp"
#include "treelstm/errors.hpp"
#include "treelstm/tree_lstm.hpp"

namespace treelstm {

inline constexpr int kCheckpointVersion = 1;

using AnyModel = std::variant<TreeLstmModel, BaselineModel>;

namespace detail {

using json = nlohmann::json;

inline json vector_json(std::span<const Real> v) { return json(std::vector<Real>(v.begin(), v.end())); }

inline json params_json(const LstmParams& p) {
  json out = json::object();
  const auto mats = p.matrices();
  for (std::size_t k = 0; k < mats.size(); ++k) {
    out[LstmParams::kMatrixNames[k]] = vector_json(mats[k]->values());
  }
  return out;
}

template <class T>
T field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw CheckpointCorruptError("checkpoint: missing field '" + std::string(key) + "' in " + where);
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw CheckpointCorruptError("checkpoint: field '" + std::string(key) + "' in " + where +
                                 " has the wrong type: " + e.what());
  }
}

inline std::vector<Real> read_values(const json& obj, const char* key, std::size_t expected,
                                     const std::string& where) {
  auto values = field<std::vector<Real>>(obj, key, where);
  if (values.size() != expected) {
    throw CheckpointShapeError("checkpoint: " + where + "." + key + " holds " +
                               std::to_string(values.size()) + " values, expected " +
                               std::to_string(expected));
  }
  for (const Real v : values) {
    if (!std::isfinite(v)) {
      throw CheckpointCorruptError("checkpoint: non-finite value in " + where + "." + key);
    }
  }
  return values;
}

inline LstmParams read_params(const json& obj, std::size_t q, std::size_t m,
                              const std::string& where) {
  LstmParams p = LstmParams::zeros(q, m);
  auto mats = p.matrices();
  for (std::size_t k = 0; k < mats.size(); ++k) {
    const std::size_t rows = mats[k]->rows();
    const std::size_t cols = mats[k]->cols();
    *mats[k] = Matrix(rows, cols,
                      read_values(obj, LstmParams::kMatrixNames[k], rows * cols, where));
  }
  return p;
}

inline json parse_document(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw CheckpointCorruptError(std::string("checkpoint: not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw CheckpointCorruptError("checkpoint: top level is not an object");
  const auto version = field<int>(doc, "format_version", "header");
  if (version != kCheckpointVersion) {
    throw CheckpointVersionError("checkpoint: format version " + std::to_string(version) +
                                 " is not supported (expected " +
                                 std::to_string(kCheckpointVersion) + ")");
  }
  return doc;
}

inline const char* leaf_init_name(LeafInit v) {
  return v == LeafInit::AfterWindowStart ? "after-window-start" : "before-window-start";
}

}  // namespace detail

inline void save_checkpoint(std::ostream& out, const TreeLstmModel& model) {
  using detail::json;
  const TreeLstmConfig& c = model.config();
  json doc;
  doc["format_version"] = kCheckpointVersion;
  doc["kind"] = "tree";
  doc["config"] = {{"L", c.window},
                   {"q", c.hidden},
                   {"m", c.input},
                   {"leaf_indices", c.leaf_indices ? json(*c.leaf_indices) : json(nullptr)},
                   {"shared_combination", c.combination == CombinationWeights::Shared},
                   {"leaf_init", detail::leaf_init_name(c.leaf_init)},
                   {"bptt_horizon", c.bptt_horizon},
                   {"init_variance", c.init_variance},
                   {"seed", c.seed}};
  const TreeLstmWeights& w = model.weights();
  json leaves = json::array();
  for (const auto& leaf : w.leaves) leaves.push_back(detail::params_json(leaf));
  json w_tilde = json::array();
  for (const auto& v : w.w_tilde) w_tilde.push_back(detail::vector_json(v.span()));
  doc["weights"] = {{"main", detail::params_json(w.main)},
                    {"leaves", leaves},
                    {"w_tilde", w_tilde},
                    {"w_hat", detail::vector_json(w.w_hat.span())}};
  out << doc.dump(1) << '\n';
  if (!out) throw CheckpointError("checkpoint: write failed");
}

inline void save_checkpoint(std::ostream& out, const BaselineModel& model) {
  using detail::json;
  const BaselineConfig& c = model.config();
  json doc;
  doc["format_version"] = kCheckpointVersion;
  doc["kind"] = to_string(c.kind);
  doc["config"] = {{"q", c.hidden},
                   {"m", c.input},
                   {"bptt_horizon", c.bptt_horizon},
                   {"init_variance", c.init_variance},
                   {"seed", c.seed}};
  doc["weights"] = {{"lstm", detail::params_json(model.weights().params)},
                    {"w_hat", detail::vector_json(model.weights().w_hat.span())}};
  out << doc.dump(1) << '\n';
  if (!out) throw CheckpointError("checkpoint: write failed");
}

inline AnyModel load_checkpoint(std::istream& in) {
  using detail::field;
  const auto doc = detail::parse_document(in);
  const auto kind = field<std::string>(doc, "kind", "header");
  if (!doc.contains("config") || !doc.contains("weights")) {
    throw CheckpointCorruptError("checkpoint: missing config or weights section");
  }
  const auto& cfg = doc["config"];
  const auto& w = doc["weights"];

  if (kind == "tree") {
    TreeLstmConfig c;
    c.window = field<std::size_t>(cfg, "L", "config");
    c.hidden = field<std::size_t>(cfg, "q", "config");
    c.input = field<std::size_t>(cfg, "m", "config");
    // null means every leaf network.
    if (!cfg.is_object() || !cfg.contains("leaf_indices") || !cfg["leaf_indices"].is_null()) {
      c.leaf_indices = field<std::vector<std::size_t>>(cfg, "leaf_indices", "config");
    }
    c.combination = field<bool>(cfg, "shared_combination", "config") ? CombinationWeights::Shared
                                                                      : CombinationWeights::PerNetwork;
    const auto init = field<std::string>(cfg, "leaf_init", "config");
    if (init == "after-window-start") {
      c.leaf_init = LeafInit::AfterWindowStart;
    } else if (init == "before-window-start") {
      c.leaf_init = LeafInit::BeforeWindowStart;
    } else {
      throw CheckpointCorruptError("checkpoint: unknown leaf_init '" + init + "'");
    }
    c.bptt_horizon = field<std::size_t>(cfg, "bptt_horizon", "config");
    c.init_variance = field<Real>(cfg, "init_variance", "config");
    c.seed = field<std::uint64_t>(cfg, "seed", "config");
    try {
      c.validate();
    } catch (const Error& e) {
      throw CheckpointShapeError(std::string("checkpoint: ") + e.what());
    }
    const std::size_t q = c.hidden;
    const std::size_t m = c.input;
    const std::size_t leaves = c.configured_leaves().size();

    TreeLstmWeights weights;
    weights.main = detail::read_params(field<detail::json>(w, "main", "weights"), q, m, "main");
    const auto leaf_docs = field<std::vector<detail::json>>(w, "leaves", "weights");
    if (leaf_docs.size() != leaves) {
      throw CheckpointShapeError("checkpoint: " + std::to_string(leaf_docs.size()) +
                                 " leaf networks stored, config lists " + std::to_string(leaves));
    }
    for (std::size_t k = 0; k < leaf_docs.size(); ++k) {
      weights.leaves.push_back(
          detail::read_params(leaf_docs[k], q, m, "leaves[" + std::to_string(k) + "]"));
    }
    const auto wt = field<std::vector<detail::json>>(w, "w_tilde", "weights");
    const std::size_t combos = c.combination == CombinationWeights::Shared ? 1 : leaves + 1;
    if (wt.size() != combos) {
      throw CheckpointShapeError("checkpoint: " + std::to_string(wt.size()) +
                                 " combination vectors stored, expected " + std::to_string(combos));
    }
    for (std::size_t k = 0; k < wt.size(); ++k) {
      detail::json holder = {{"w", wt[k]}};
      weights.w_tilde.emplace_back(detail::read_values(
          holder, "w", c.combination_width(), "w_tilde[" + std::to_string(k) + "]"));
    }
    weights.w_hat = Vector(detail::read_values(w, "w_hat", q + 1, "weights"));
    try {
      return TreeLstmModel::from_weights(c, std::move(weights));
    } catch (const DimensionError& e) {
      throw CheckpointShapeError(std::string("checkpoint: ") + e.what());
    }
  }

  if (kind == "zi" || kind == "fi") {
    BaselineConfig c;
    c.kind = kind == "zi" ? BaselineKind::ZeroImpute : BaselineKind::ForwardFill;
    c.hidden = field<std::size_t>(cfg, "q", "config");
    c.input = field<std::size_t>(cfg, "m", "config");
    c.bptt_horizon = field<std::size_t>(cfg, "bptt_horizon", "config");
    c.init_variance = field<Real>(cfg, "init_variance", "config");
    c.seed = field<std::uint64_t>(cfg, "seed", "config");
    try {
      c.validate();
    } catch (const Error& e) {
      throw CheckpointShapeError(std::string("checkpoint: ") + e.what());
    }
    BaselineWeights weights;
    weights.params = detail::read_params(field<detail::json>(w, "lstm", "weights"), c.hidden,
                                         c.cell_input(), "lstm");
    weights.w_hat = Vector(detail::read_values(w, "w_hat", c.hidden + 1, "weights"));
    return BaselineModel::from_weights(c, std::move(weights));
  }
  throw CheckpointCorruptError("checkpoint: unknown model kind '" + kind + "'");
}

inline void save_checkpoint(const std::string& path, const AnyModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("checkpoint: cannot open '" + path + "' for writing");
  std::visit([&](const auto& m) { save_checkpoint(out, m); }, model);
}

inline AnyModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open '" + path + "'");
  return load_checkpoint(in);
}

/// Loads a checkpoint that must hold model type `Model`.
template <class Model>
Model load_checkpoint_as(std::istream& in) {
  AnyModel any = load_checkpoint(in);
  if (auto* m = std::get_if<Model>(&any)) return std::move(*m);
  throw CheckpointShapeError("checkpoint: stored model kind does not match the requested one");
}

}  // namespace treelstm
