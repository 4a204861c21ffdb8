// Command-line front end: synth, mask, train, eval, cv, profile.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "treelstm/treelstm.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace treelstm;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kData = 3, kNumeric = 4 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string arch = "tree";
  std::string data;
  std::optional<std::size_t> target_column;
  std::size_t L = 2;
  std::size_t q = 8;
  double lr = 1e-3;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  double ratio = 0.0;
  std::size_t bptt = 64;
  std::optional<std::vector<std::size_t>> leaf_set;  // nullopt: every pattern
  bool shared_wtilde = false;
  std::string leaf_init = "after-window-start";
  double init_variance = 1e-2;
  double clip = 5.0;
  std::string granularity = "sequence";
  std::optional<std::size_t> score_from;  // defaults to L
  bool scale = true;
  bool wall_clock = false;
  std::vector<std::size_t> q_grid{3, 5, 8, 10};
  std::vector<double> lr_grid{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  std::size_t folds = 5;
  std::size_t threads = 1;

  std::size_t first_scored() const { return score_from.value_or(L); }

  void validate() const {
    if (arch != "tree" && arch != "zi" && arch != "fi") {
      throw UsageError("--arch must be tree, zi or fi (got '" + arch + "')");
    }
    if (granularity != "sequence" && granularity != "chunk") {
      throw UsageError("--granularity must be sequence or chunk");
    }
    if (leaf_init != "after-window-start" && leaf_init != "before-window-start") {
      throw UsageError("--leaf-init must be after-window-start or before-window-start");
    }
    if (!(lr > 0.0)) throw UsageError("--lr must be > 0");
    if (!(ratio >= 0.0 && ratio <= 1.0)) throw UsageError("--ratio must lie in [0, 1]");
    if (epochs < 1) throw UsageError("--epochs must be at least 1");
    if (L < 1 || L > kMaxWindow) throw UsageError("--L must lie in [1, 20]");
    if (q < 1) throw UsageError("--q must be at least 1");
    if (folds < 2) throw UsageError("--folds must be at least 2");
  }
};

json to_json(const RunConfig& c) {
  json j;
  j["arch"] = c.arch;
  j["data"] = c.data;
  j["target_column"] = c.target_column ? json(*c.target_column) : json(nullptr);
  j["L"] = c.L;
  j["q"] = c.q;
  j["lr"] = c.lr;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["ratio"] = c.ratio;
  j["bptt"] = c.bptt;
  j["leaf_set"] = c.leaf_set ? json(*c.leaf_set) : json("all");
  j["shared_wtilde"] = c.shared_wtilde;
  j["leaf_init"] = c.leaf_init;
  j["init_variance"] = c.init_variance;
  j["clip"] = c.clip;
  j["granularity"] = c.granularity;
  j["score_from"] = c.first_scored();
  j["scale"] = c.scale;
  j["wall_clock"] = c.wall_clock;
  j["q_grid"] = c.q_grid;
  j["lr_grid"] = c.lr_grid;
  j["folds"] = c.folds;
  j["threads"] = c.threads;
  return j;
}

std::optional<std::vector<std::size_t>> parse_leaf_set(const std::string& text) {
  if (text == "all") return std::nullopt;
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("--leaf-set: '" + item + "' is not a pattern index");
    }
  }
  return out;
}

/// Overlays the keys present in `j` onto `c`.
void merge_json(RunConfig& c, const json& j) {
  try {
    if (j.contains("arch")) c.arch = j["arch"].get<std::string>();
    if (j.contains("data")) c.data = j["data"].get<std::string>();
    if (j.contains("target_column")) {
      c.target_column = j["target_column"].is_null()
                            ? std::nullopt
                            : std::optional<std::size_t>(j["target_column"].get<std::size_t>());
    }
    if (j.contains("L")) c.L = j["L"].get<std::size_t>();
    if (j.contains("q")) c.q = j["q"].get<std::size_t>();
    if (j.contains("lr")) c.lr = j["lr"].get<double>();
    if (j.contains("epochs")) c.epochs = j["epochs"].get<std::size_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("ratio")) c.ratio = j["ratio"].get<double>();
    if (j.contains("bptt")) c.bptt = j["bptt"].get<std::size_t>();
    if (j.contains("leaf_set")) {
      c.leaf_set = j["leaf_set"].is_string()
                       ? parse_leaf_set(j["leaf_set"].get<std::string>())
                       : std::optional(j["leaf_set"].get<std::vector<std::size_t>>());
    }
    if (j.contains("shared_wtilde")) c.shared_wtilde = j["shared_wtilde"].get<bool>();
    if (j.contains("leaf_init")) c.leaf_init = j["leaf_init"].get<std::string>();
    if (j.contains("init_variance")) c.init_variance = j["init_variance"].get<double>();
    if (j.contains("clip")) c.clip = j["clip"].get<double>();
    if (j.contains("granularity")) c.granularity = j["granularity"].get<std::string>();
    if (j.contains("score_from")) c.score_from = j["score_from"].get<std::size_t>();
    if (j.contains("scale")) c.scale = j["scale"].get<bool>();
    if (j.contains("wall_clock")) c.wall_clock = j["wall_clock"].get<bool>();
    if (j.contains("q_grid")) c.q_grid = j["q_grid"].get<std::vector<std::size_t>>();
    if (j.contains("lr_grid")) c.lr_grid = j["lr_grid"].get<std::vector<double>>();
    if (j.contains("folds")) c.folds = j["folds"].get<std::size_t>();
    if (j.contains("threads")) c.threads = j["threads"].get<std::size_t>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("config file: ") + e.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

/// Flags bound to a scratch RunConfig; only flags actually given are copied over.
class FlagSet {
 public:
  template <class T>
  void add(CLI::App* app, const std::string& name, T RunConfig::*field, const std::string& help) {
    CLI::Option* opt = app->add_option(name, scratch_.*field, help);
    appliers_.emplace_back(opt, [field](RunConfig& dst, const RunConfig& src) {
      dst.*field = src.*field;
    });
  }

  void add_flag(CLI::App* app, const std::string& name, bool RunConfig::*field,
                const std::string& help) {
    CLI::Option* opt = app->add_flag(name, scratch_.*field, help);
    appliers_.emplace_back(opt, [field](RunConfig& dst, const RunConfig& src) {
      dst.*field = src.*field;
    });
  }

  void add_leaf_set(CLI::App* app) {
    CLI::Option* opt = app->add_option("--leaf-set", leaf_text_,
                                       "comma-separated leaf pattern indices, 'all', or '' for none");
    appliers_.emplace_back(opt, [this](RunConfig& dst, const RunConfig&) {
      dst.leaf_set = parse_leaf_set(leaf_text_);
    });
  }

  void add_optional(CLI::App* app, const std::string& name,
                    std::optional<std::size_t> RunConfig::*field, const std::string& help) {
    auto holder = std::make_shared<std::size_t>(0);
    holders_.push_back(holder);
    CLI::Option* opt = app->add_option(name, *holder, help);
    appliers_.emplace_back(opt, [field, holder](RunConfig& dst, const RunConfig&) {
      dst.*field = *holder;
    });
  }

  void add_config(CLI::App* app) { config_ = app->add_option("--config", config_path_, "JSON config file"); }

  /// defaults < config file < flags
  RunConfig resolve(RunConfig base = {}) const {
    if (config_ && config_->count() > 0) merge_json(base, read_json_file(config_path_));
    for (const auto& [opt, apply] : appliers_) {
      if (opt->count() > 0) apply(base, scratch_);
    }
    base.validate();
    return base;
  }

 private:
  RunConfig scratch_;
  std::string leaf_text_;
  std::string config_path_;
  CLI::Option* config_ = nullptr;
  std::vector<std::shared_ptr<std::size_t>> holders_;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&, const RunConfig&)>>> appliers_;
};

void add_model_flags(FlagSet& f, CLI::App* app) {
  f.add(app, "--data", &RunConfig::data, "input CSV");
  f.add_optional(app, "--target-column", &RunConfig::target_column,
                 "0-based target column; default builds next-value targets");
  f.add(app, "--arch", &RunConfig::arch, "tree | zi | fi");
  f.add(app, "--L", &RunConfig::L, "window length");
  f.add(app, "--q", &RunConfig::q, "hidden size");
  f.add(app, "--lr", &RunConfig::lr, "learning rate");
  f.add(app, "--epochs", &RunConfig::epochs, "training epochs");
  f.add(app, "--seed", &RunConfig::seed, "seed for masking and initialization");
  f.add(app, "--ratio", &RunConfig::ratio, "missingness ratio injected before the split");
  f.add(app, "--bptt", &RunConfig::bptt, "BPTT horizon in main-network steps");
  f.add_leaf_set(app);
  f.add_flag(app, "--shared-wtilde", &RunConfig::shared_wtilde, "one combination vector for all networks");
  f.add(app, "--leaf-init", &RunConfig::leaf_init, "after-window-start | before-window-start");
  f.add(app, "--init-variance", &RunConfig::init_variance, "Gaussian init variance");
  f.add(app, "--clip", &RunConfig::clip, "global gradient-norm clip, 0 disables");
  f.add(app, "--granularity", &RunConfig::granularity, "sequence | chunk");
  f.add_optional(app, "--score-from", &RunConfig::score_from, "first scored grid slot (default L)");
  f.add(app, "--scale", &RunConfig::scale, "min-max scale to [-1, 1] (true/false)");
  f.add_flag(app, "--wall-clock", &RunConfig::wall_clock, "record wall time per epoch");
  f.add_config(app);
}

TrainConfig train_config(const RunConfig& c) {
  TrainConfig t;
  t.learning_rate = c.lr;
  t.epochs = c.epochs;
  t.seed = c.seed;
  t.q_grid = c.q_grid;
  t.lr_grid = c.lr_grid;
  t.folds = c.folds;
  t.bptt_horizon = c.bptt;
  t.clip_norm = c.clip;
  t.granularity = c.granularity == "chunk" ? UpdateGranularity::Chunk : UpdateGranularity::Sequence;
  t.score_from = c.first_scored();
  t.record_wall_time = c.wall_clock;
  return t;
}

AnyModel make_model(const RunConfig& c, std::size_t width, std::size_t q) {
  if (c.arch == "tree") {
    TreeLstmConfig t;
    t.window = c.L;
    t.hidden = q;
    t.input = width;
    t.leaf_indices = c.leaf_set;
    t.combination = c.shared_wtilde ? CombinationWeights::Shared : CombinationWeights::PerNetwork;
    t.bptt_horizon = c.bptt;
    t.leaf_init = c.leaf_init == "before-window-start" ? LeafInit::BeforeWindowStart
                                                       : LeafInit::AfterWindowStart;
    t.init_variance = c.init_variance;
    t.seed = c.seed;
    return TreeLstmModel::initialize(t);
  }
  BaselineConfig b;
  b.kind = c.arch == "zi" ? BaselineKind::ZeroImpute : BaselineKind::ForwardFill;
  b.hidden = q;
  b.input = width;
  b.bptt_horizon = c.bptt;
  b.init_variance = c.init_variance;
  b.seed = c.seed;
  return BaselineModel::initialize(b);
}

ExperimentData load_experiment(const RunConfig& c) {
  if (c.data.empty()) throw UsageError("--data is required");
  CsvSchema schema;
  schema.target_column = c.target_column;
  const MaskedSequence raw = load_csv(c.data, schema);
  PipelineOptions opt;
  opt.missing_ratio = c.ratio;
  opt.seed = c.seed;
  opt.scale = c.scale;
  opt.next_value_targets = !c.target_column;
  return prepare_experiment(raw, opt);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

fs::path output_dir(const std::string& out) {
  if (out.empty()) throw UsageError("--out is required");
  fs::create_directories(out);
  return fs::path(out);
}

int cmd_train(const RunConfig& c, const std::string& out) {
  const fs::path dir = output_dir(out);
  const ExperimentData data = load_experiment(c);
  AnyModel model = make_model(c, data.full.width(), c.q);
  const TrainConfig tc = train_config(c);
  const TrainLogger log = [](const std::string& msg) { std::cerr << "note: " << msg << '\n'; };
  std::vector<EpochReport> reports;
  std::visit([&](auto& m) { reports = train(m, data.train, &data.full, data.test_begin, tc, log); },
             model);
  write_text(dir / "config.json", to_json(c).dump(2) + "\n");
  std::ostringstream epochs;
  write_epoch_csv(epochs, reports);
  write_text(dir / "epochs.csv", epochs.str());
  save_checkpoint((dir / "model.ckpt").string(), model);
  const EpochReport& last = reports.back();
  std::cout << "trained " << c.arch << " for " << reports.size() << " epochs: train_mse "
            << format_real(last.train_mse) << " test_mse " << format_real(*last.test_mse) << '\n';
  return kOk;
}

int cmd_eval(const RunConfig& c, const std::string& out, const std::string& model_path,
             bool dump) {
  const fs::path dir = output_dir(out);
  const AnyModel model = load_checkpoint(model_path.empty() ? (dir / "model.ckpt").string() : model_path);
  const ExperimentData data = load_experiment(c);
  const std::size_t from = c.first_scored();
  json metrics;
  std::visit(
      [&](const auto& m) {
        metrics["test_mse"] = evaluate_mse(m, data.full, std::max(data.test_begin, from), data.full.size());
        metrics["train_mse"] = evaluate_mse(m, data.train, from, data.train.size());
        if (dump) {
          std::ostringstream csv;
          write_predictions_csv(csv, predict(m, data.full), data.test_begin, c.L);
          write_text(dir / "predictions.csv", csv.str());
        }
      },
      model);
  metrics["test_begin"] = data.test_begin;
  metrics["N"] = data.full.size();
  write_text(dir / "metrics.json", metrics.dump(2) + "\n");
  std::cout << metrics.dump() << '\n';
  return kOk;
}

int cmd_cv(const RunConfig& c, const std::string& out) {
  const fs::path dir = output_dir(out);
  const ExperimentData data = load_experiment(c);
  const TrainConfig tc = train_config(c);
  const std::size_t width = data.full.width();
  CvResult result;
  const std::size_t min_fold = c.L + 2;
  if (c.arch == "tree") {
    result = cross_validate<TreeLstmModel>(
        data.train,
        [&](std::size_t q, std::uint64_t) { return std::get<TreeLstmModel>(make_model(c, width, q)); },
        tc, min_fold, c.threads);
  } else {
    result = cross_validate<BaselineModel>(
        data.train,
        [&](std::size_t q, std::uint64_t) { return std::get<BaselineModel>(make_model(c, width, q)); },
        tc, min_fold, c.threads);
  }
  std::ostringstream csv;
  csv << "q,lr";
  for (std::size_t f = 0; f < c.folds; ++f) csv << ",fold" << f + 1;
  csv << ",mean\n";
  for (const CvRow& row : result.table) {
    csv << row.q << ',' << format_real(row.learning_rate);
    for (const Real v : row.fold_mse) csv << ',' << format_real(v);
    csv << ',' << format_real(row.mean_mse) << '\n';
  }
  write_text(dir / "cv.csv", csv.str());
  write_text(dir / "config.json", to_json(c).dump(2) + "\n");
  if (result.tie_broken) std::cerr << "note: tie on mean validation MSE broken by smaller q, then larger lr\n";
  std::cout << "best q " << result.best_q << " lr " << format_real(result.best_learning_rate) << '\n';
  return kOk;
}

struct ProfileFlags {
  bool measure = false;
  std::size_t n = 1000;
  std::size_t m = 1;
  double noise = 0.05;
  double step = 0.05;
};

int cmd_profile(const RunConfig& c, const ProfileFlags& p, const std::string& out) {
  const fs::path dir = output_dir(out);
  std::ostringstream csv;
  csv << "arch,N,M,r,L,q,m,measured_cells,measured_combination,formula_min,formula_max\n";
  if (!p.measure) {
    const CrossoverScan scan = crossover_scan(c.q, p.m, c.L, p.n, p.step);
    for (const CrossoverRow& row : scan.rows) {
      const std::string prefix = std::to_string(p.n) + ',' + std::to_string(row.missing) + ',' +
                                 format_real(row.r) + ',' + std::to_string(c.L) + ',' +
                                 std::to_string(c.q) + ',' + std::to_string(p.m) + ",,,";
      csv << "tree," << prefix << format_real(row.tree_min) << ',' << format_real(row.tree_max) << '\n';
      csv << "zi," << prefix << row.zi << ',' << row.zi << '\n';
      csv << "fi," << prefix << row.fi << ',' << row.fi << '\n';
    }
    write_text(dir / "profile.csv", csv.str());
    std::cout << "L=" << c.L << " crossover r="
              << (scan.crossover ? format_real(*scan.crossover) : std::string("none"))
              << " first_grid_crossing="
              << (scan.first_grid_crossing ? format_real(*scan.first_grid_crossing) : std::string("none"))
              << '\n';
    return kOk;
  }

  MaskedSequence raw;
  if (!c.data.empty()) {
    raw = load_csv(c.data);
  } else {
    if (p.n == 0) throw UsageError("--n must be at least 1");
    raw = synth_sine(p.n, p.noise, c.seed);
  }
  const MaskedSequence seq = inject_missingness(raw, c.ratio, c.seed);
  const AnyModel model = make_model(c, seq.width(), c.q);
  CostModel cm{seq.size(), seq.missing_count(), c.q, seq.width(), c.L};
  MultCounter counted;
  std::string fmin, fmax;
  if (const auto* tree = std::get_if<TreeLstmModel>(&model)) {
    counted = measure(*tree, sequence_forward(*tree, seq), BiasConvention::InputWidth);
    fmin = format_real(tree_min_cost(cm));
    fmax = format_real(tree_max_cost(cm));
  } else {
    const auto& base = std::get<BaselineModel>(model);
    counted = measure(base, baseline_forward(base, base.prepare(seq)), BiasConvention::InputWidth);
    fmin = fmax = std::to_string(base.kind() == BaselineKind::ZeroImpute ? zi_cost(cm) : fi_cost(cm));
  }
  csv << c.arch << ',' << cm.n << ',' << cm.m_missing << ',' << format_real(cm.missing_ratio()) << ','
      << c.L << ',' << c.q << ',' << cm.m << ',' << counted.cell << ',' << counted.combination << ','
      << fmin << ',' << fmax << '\n';
  write_text(dir / "profile.csv", csv.str());
  std::cout << c.arch << " measured_cells=" << counted.cell << " formula_min=" << fmin
            << " formula_max=" << fmax << '\n';
  return kOk;
}

int run(int argc, char** argv) {
  CLI::App app{"Tree-LSTM for sequences with missing samples"};
  app.require_subcommand(1);

  // synth
  CLI::App* synth = app.add_subcommand("synth", "write a noisy sine sequence as CSV");
  std::size_t synth_n = 0;
  double synth_noise = 0.05;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  synth->add_option("--n", synth_n, "number of slots")->required();
  synth->add_option("--noise", synth_noise, "noise standard deviation");
  synth->add_option("--seed", synth_seed, "noise seed");
  synth->add_option("--out", synth_out, "output CSV path")->required();

  // mask
  CLI::App* mask = app.add_subcommand("mask", "blank round(ratio*N) rows of a CSV");
  std::string mask_data, mask_out;
  double mask_ratio = 0.0;
  std::uint64_t mask_seed = 0;
  mask->add_option("--data", mask_data, "input CSV")->required();
  mask->add_option("--ratio", mask_ratio, "fraction of rows to blank")->required();
  mask->add_option("--seed", mask_seed, "selection seed");
  mask->add_option("--out", mask_out, "output CSV path")->required();

  std::string out;
  // train
  CLI::App* train_cmd = app.add_subcommand("train", "train a model and write model.ckpt, epochs.csv, config.json");
  FlagSet train_flags;
  add_model_flags(train_flags, train_cmd);
  train_cmd->add_option("--out", out, "output directory")->required();

  // eval
  CLI::App* eval_cmd = app.add_subcommand("eval", "score a checkpoint; writes metrics.json");
  FlagSet eval_flags;
  add_model_flags(eval_flags, eval_cmd);
  std::string model_path;
  bool dump = false;
  eval_cmd->add_option("--out", out, "run directory (reads config.json and model.ckpt)")->required();
  eval_cmd->add_option("--model", model_path, "checkpoint path (default <out>/model.ckpt)");
  eval_cmd->add_flag("--dump-predictions", dump, "write predictions.csv");

  // cv
  CLI::App* cv_cmd = app.add_subcommand("cv", "grid search over q and lr with contiguous folds");
  FlagSet cv_flags;
  add_model_flags(cv_flags, cv_cmd);
  cv_flags.add(cv_cmd, "--q-grid", &RunConfig::q_grid, "hidden sizes");
  cv_flags.add(cv_cmd, "--lr-grid", &RunConfig::lr_grid, "learning rates");
  cv_flags.add(cv_cmd, "--folds", &RunConfig::folds, "number of folds");
  cv_flags.add(cv_cmd, "--threads", &RunConfig::threads, "worker threads");
  cv_cmd->add_option("--out", out, "output directory")->required();

  // profile
  CLI::App* profile_cmd = app.add_subcommand("profile", "cost-model scan or measured multiplication counts");
  FlagSet profile_flags;
  add_model_flags(profile_flags, profile_cmd);
  ProfileFlags pf;
  profile_cmd->add_flag("--measure", pf.measure, "run a forward pass and count multiplications");
  profile_cmd->add_option("--n", pf.n, "sequence length");
  profile_cmd->add_option("--m", pf.m, "input width for the scan");
  profile_cmd->add_option("--noise", pf.noise, "noise of the synthetic sequence");
  profile_cmd->add_option("--step", pf.step, "ratio grid step");
  profile_cmd->add_option("--out", out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  if (synth->parsed()) {
    if (synth_n == 0) throw UsageError("--n must be at least 1");
    if (synth_noise < 0.0) throw UsageError("--noise must be >= 0");
    save_csv(synth_out, synth_sine(synth_n, synth_noise, synth_seed));
    return kOk;
  }
  if (mask->parsed()) {
    if (!(mask_ratio >= 0.0 && mask_ratio <= 1.0)) throw UsageError("--ratio must lie in [0, 1]");
    const MaskedSequence seq = inject_missingness(load_csv(mask_data), mask_ratio, mask_seed);
    save_csv(mask_out, seq);
    std::cout << seq.missing_count() << " of " << seq.size() << " rows blank\n";
    return kOk;
  }
  if (train_cmd->parsed()) return cmd_train(train_flags.resolve(), out);
  if (eval_cmd->parsed()) {
    // The run directory's config is the base; --config and flags still override it.
    RunConfig base;
    const fs::path saved = fs::path(out) / "config.json";
    if (fs::exists(saved)) merge_json(base, read_json_file(saved.string()));
    return cmd_eval(eval_flags.resolve(base), out, model_path, dump);
  }
  if (cv_cmd->parsed()) return cmd_cv(cv_flags.resolve(), out);
  if (profile_cmd->parsed()) return cmd_profile(profile_flags.resolve(), pf, out);
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const DimensionError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const CheckpointError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
