// tactile: command-line front end for dataset construction, training,
// inference, evaluation and reporting.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tactile/augment/augment.hpp"
#include "tactile/dataset/fetch.hpp"
#include "tactile/dataset/io.hpp"
#include "tactile/dataset/split.hpp"
#include "tactile/dataset/synth.hpp"
#include "tactile/error.hpp"
#include "tactile/kv_config.hpp"
#include "tactile/metrics.hpp"
#include "tactile/nn/kernels.hpp"
#include "tactile/palette.hpp"
#include "tactile/random.hpp"
#include "tactile/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace tactile;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIncompatible = 3;

struct Common {
  fs::path out = ".";
  std::uint64_t seed = 0;
  int threads = 0;
  bool verbose = false;
  std::string config;
  std::vector<std::string> overrides;
};

void log(const Common& c, const std::string& msg) {
  if (c.verbose) std::cerr << msg << '\n';
}

// Snapshot of every effective option of a run, written next to its outputs.
void write_run_snapshot(const Common& c, const std::string& subcommand, KeyValues kv) {
  kv.insert(kv.begin(), {"seed", std::to_string(c.seed)});
  kv.insert(kv.begin(), {"subcommand", subcommand});
  write_text_file(c.out / "reports" / (subcommand + "-run.txt"), render_key_values(kv));
}

KeyValues config_overrides(const Common& c) {
  KeyValues kv;
  if (!c.config.empty()) kv = load_key_values(c.config);
  for (const auto& o : c.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Usage, "--set expects key=value, got '" + o + "'");
    }
    kv.emplace_back(trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
  }
  return kv;
}

std::vector<dataset::ManifestRecord> filter_split(const std::vector<dataset::ManifestRecord>& all,
                                                  const std::string& split) {
  if (split == "any") return all;
  const Split s = parse_split(split);
  std::vector<dataset::ManifestRecord> out;
  for (const auto& r : all) {
    if (r.split == s) out.push_back(r);
  }
  return out;
}

std::vector<MapPair> load_pairs(const fs::path& dataset_path, const std::string& split) {
  const auto ref = dataset::resolve_dataset(dataset_path);
  const auto records = filter_split(dataset::read_manifest(ref.manifest), split);
  std::vector<MapPair> pairs;
  pairs.reserve(records.size());
  for (const auto& r : records) pairs.push_back(dataset::load_pair(ref.root, r));
  return pairs;
}

void save_dataset(const fs::path& out, const std::vector<MapPair>& pairs) {
  std::vector<dataset::ManifestRecord> records;
  for (const auto& p : pairs) records.push_back(dataset::store_pair(out, p));
  dataset::write_manifest(out / dataset::kDefaultManifest, records);
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  int n = 10;
  int zoom = 16;
  int size = 512;
  int start = 0;
  double text_density = 14.0;
  double icon_density = 8.0;
};

void run_synth(const Common& c, const SynthArgs& a) {
  auto profile = dataset::default_synth_profile(a.zoom, a.size);
  profile.text_density = a.text_density;
  profile.icon_density = a.icon_density;
  profile.validate();
  std::vector<MapPair> pairs;
  for (int i = 0; i < a.n; ++i) {
    pairs.push_back(dataset::synth_indexed(profile, c.seed, a.start + i).pair);
  }
  save_dataset(c.out, pairs);
  write_run_snapshot(c, "synth",
                     {{"n", std::to_string(a.n)},
                      {"zoom", std::to_string(a.zoom)},
                      {"size", std::to_string(a.size)},
                      {"start", std::to_string(a.start)},
                      {"text_density", std::to_string(a.text_density)},
                      {"icon_density", std::to_string(a.icon_density)}});
  std::cout << "wrote " << a.n << " synthetic pairs to " << (c.out / "manifests/pairs.jsonl").string()
            << '\n';
}

struct SplitArgs {
  std::string dataset;
  int train = 5000;
  int test = 500;
  std::string manifest_out;
};

void run_split(const Common& c, const SplitArgs& a) {
  const auto ref = dataset::resolve_dataset(a.dataset);
  const auto records =
      dataset::split_dataset(dataset::read_manifest(ref.manifest), {a.train, a.test, c.seed});
  const fs::path target = a.manifest_out.empty() ? ref.manifest : fs::path(a.manifest_out);
  dataset::write_manifest(target, records);
  std::map<Split, int> counts;
  for (const auto& r : records) ++counts[r.split];
  write_run_snapshot(c, "split",
                     {{"dataset", a.dataset},
                      {"train", std::to_string(a.train)},
                      {"test", std::to_string(a.test)},
                      {"manifest_out", target.string()}});
  std::cout << "train " << counts[Split::Train] << ", test-english " << counts[Split::TestEnglish]
            << ", test-world " << counts[Split::TestWorld] << ", unassigned "
            << counts[Split::Unassigned] << " -> " << target.string() << '\n';
}

struct FetchArgs {
  std::string jobs;
  std::string location;
  int zoom = 16;
  bool live = false;
  std::string mock_url;
  int concurrency = 4;
  double rate = 10.0;
  int retries = 3;
  int backoff_ms = 500;
};

void run_fetch(const Common& c, const FetchArgs& a) {
  std::vector<dataset::FetchJob> jobs;
  if (!a.jobs.empty()) {
    jobs = dataset::parse_fetch_jobs(read_text_file(a.jobs));
  } else if (!a.location.empty()) {
    jobs.push_back({"loc-000000", a.location, a.zoom, "", LocationType::City, Split::Unassigned});
  } else {
    throw Error(ErrorKind::Usage, "fetch needs --jobs FILE or --location QUERY");
  }
  dataset::FetchConfig cfg;
  cfg.concurrency = a.concurrency;
  cfg.requests_per_second = a.rate;
  cfg.max_attempts = a.retries;
  cfg.initial_backoff = std::chrono::milliseconds(a.backoff_ms);
  std::unique_ptr<dataset::MockMapServer> mock;
  if (a.live) {
    const char* key = std::getenv(dataset::kApiKeyEnv);
    if (!key || !*key) {
      throw Error(ErrorKind::Config, std::string("live fetching needs the API key in $") +
                                         dataset::kApiKeyEnv);
    }
    cfg.api_key = key;
  } else if (!a.mock_url.empty()) {
    cfg.base_url = a.mock_url;
  } else {
    mock = std::make_unique<dataset::MockMapServer>(dataset::MockMapServer::Options{});
    cfg.base_url = mock->base_url();
    log(c, "serving mock maps at " + cfg.base_url);
  }
  dataset::MapClient client(cfg);
  const auto outcomes = dataset::fetch_all(client, jobs);
  std::vector<MapPair> pairs;
  int failed = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].pair) {
      pairs.push_back(*outcomes[i].pair);
    } else {
      ++failed;
      std::cerr << "fetch " << jobs[i].id << ": " << outcomes[i].error << '\n';
    }
  }
  save_dataset(c.out, pairs);
  write_run_snapshot(c, "fetch",
                     {{"jobs", a.jobs},
                      {"location", a.location},
                      {"live", a.live ? "true" : "false"},
                      {"base_url", a.live ? cfg.base_url : "mock"},
                      {"concurrency", std::to_string(a.concurrency)},
                      {"rate", std::to_string(a.rate)},
                      {"retries", std::to_string(a.retries)}});
  std::cout << "fetched " << pairs.size() << " of " << jobs.size() << " pairs ("
            << client.requests_sent() << " requests)\n";
  if (failed > 0) {
    throw Error(ErrorKind::Http, std::to_string(failed) + " of " + std::to_string(jobs.size()) +
                                     " locations failed");
  }
}

struct ImportArgs {
  std::string from;
  int zoom = 16;
  std::string country = "unknown";
  std::string type = "city";
  std::string split = "unassigned";
};

void run_import(const Common& c, const ImportArgs& a) {
  auto pairs = dataset::import_directory(a.from, a.zoom, a.country, parse_location_type(a.type));
  const Split s = parse_split(a.split);
  for (auto& p : pairs) p.split = s;
  save_dataset(c.out, pairs);
  write_run_snapshot(c, "import",
                     {{"from", a.from}, {"zoom", std::to_string(a.zoom)}, {"country", a.country},
                      {"type", a.type}, {"split", a.split}});
  std::cout << "imported " << pairs.size() << " pairs\n";
}

struct PreviewArgs {
  std::string dataset;
  std::string split = "any";
  int count = 4;
};

void run_augment_preview(const Common& c, const PreviewArgs& a) {
  train::TrainConfig cfg;
  apply_key_values(cfg, config_overrides(c));
  cfg.augmentation.validate();
  auto pairs = load_pairs(a.dataset, a.split);
  if (pairs.empty()) throw Error(ErrorKind::Config, "no pairs to preview");
  pairs.resize(std::min<std::size_t>(pairs.size(), static_cast<std::size_t>(a.count)));
  std::vector<MapPair> augmented;
  std::uint64_t recolored = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    Rng rng = Rng::derive(c.seed, i);
    MapPair p = augment::geometric_augment(pairs[i], cfg.augmentation, rng);
    if (cfg.recolor_enabled()) {
      auto r = augment::grey_recolor(p, cfg.augmentation, rng);
      recolored += r.applied;
      p = std::move(r.pair);
    }
    augmented.push_back(std::move(p));
  }
  const fs::path out = c.out / "reports" / "augment-preview.png";
  dataset::write_png(out, augment::preview_grid(pairs, augmented));
  auto kv = to_key_values(cfg);
  kv.insert(kv.begin(), {{"dataset", a.dataset}, {"count", std::to_string(a.count)}});
  write_run_snapshot(c, "augment-preview", kv);
  std::cout << "wrote " << out.string() << " (" << pairs.size() << " rows, " << recolored
            << " recolored)\n";
}

struct TrainArgs {
  std::vector<std::string> datasets;
  std::string split = "train";
  std::optional<int> epochs;
  std::optional<std::string> zoom_set;
};

void run_train(Common& c, const TrainArgs& a) {
  train::TrainConfig cfg;
  KeyValues kv = config_overrides(c);
  if (a.epochs) kv.emplace_back("epochs", std::to_string(*a.epochs));
  if (a.zoom_set) kv.emplace_back("zoom_set", *a.zoom_set);
  kv.emplace_back("seed", std::to_string(c.seed));
  apply_key_values(cfg, kv);
  cfg.validate();

  std::vector<MapPair> pairs;
  std::string hashes;
  for (const auto& d : a.datasets) {
    auto more = load_pairs(d, a.split);
    pairs.insert(pairs.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    hashes += dataset::manifest_hash(dataset::resolve_dataset(d).manifest);
  }
  train::TrainOptions opt;
  opt.checkpoint_dir = c.out / "checkpoints";
  opt.log_path = c.out / "reports" / "loss.jsonl";
  opt.manifest_hash = a.datasets.size() == 1 ? hashes : dataset::sha256_hex(hashes);
  opt.on_epoch = [&](int epoch, double l1) {
    if (c.verbose) std::cerr << "epoch " << epoch << "/" << cfg.epochs << "  mean L1 " << l1 << '\n';
  };
  auto resolved = to_key_values(cfg);
  write_text_file(c.out / "reports" / "train-config.txt", render_key_values(resolved));
  resolved.insert(resolved.begin(), {"split", a.split});
  for (const auto& d : a.datasets) resolved.insert(resolved.begin(), {"dataset", d});
  write_run_snapshot(c, "train", resolved);

  const auto run = train::train(cfg, pairs, opt);
  const fs::path final_path = c.out / "checkpoints" / "final.ckpt";
  fs::copy_file(run.checkpoints.back(), final_path, fs::copy_options::overwrite_existing);
  std::cout << "trained " << to_string(run.model_id) << " on " << run.pairs_used << " pairs, "
            << run.steps.size() << " steps; grey recolor applied " << run.recolor_applied << " of "
            << run.recolor_draws << " draws -> " << final_path.string() << '\n';
}

struct InferArgs {
  std::string model;
  std::string input;
  std::string output;
  std::string split = "any";
};

void run_infer(const Common& c, const InferArgs& a) {
  auto model = train::InferenceModel::load(a.model);
  if (fs::is_regular_file(a.input) && fs::path(a.input).extension() == ".png") {
    const fs::path out = a.output.empty() ? c.out / "images" / "prediction.png" : fs::path(a.output);
    dataset::write_png(out, model.run(dataset::read_png(a.input)));
    std::cout << "wrote " << out.string() << '\n';
  } else {
    const auto ref = dataset::resolve_dataset(a.input);
    const auto records = filter_split(dataset::read_manifest(ref.manifest), a.split);
    for (const auto& r : records) {
      const MapPair p = dataset::load_pair(ref.root, r);
      dataset::write_png(c.out / "images" / (r.id + "_pred.png"), model.run(p.source));
    }
    std::cout << "wrote " << records.size() << " predictions to " << (c.out / "images").string()
              << '\n';
  }
  write_run_snapshot(c, "infer", {{"model", a.model}, {"input", a.input}, {"output", a.output}, {"split", a.split}});
}

struct EvalArgs {
  std::string model;
  std::string set;
  std::string split = "any";
  std::string predictions;
  std::string model_id;
  std::string name;
};

void run_eval(const Common& c, const EvalArgs& a) {
  const auto ref = dataset::resolve_dataset(a.set);
  const auto records = filter_split(dataset::read_manifest(ref.manifest), a.split);
  if (records.empty()) throw Error(ErrorKind::Config, "test set " + a.set + " has no pairs");

  std::optional<train::InferenceModel> model;
  ModelId id;
  if (!a.model.empty()) {
    model.emplace(train::InferenceModel::load(a.model));
    id = model->model_id();
    if (!a.model_id.empty() && parse_model_id(a.model_id) != id) {
      throw Error(ErrorKind::Usage, "--model-id disagrees with the checkpoint's model");
    }
  } else {
    if (a.predictions.empty() || a.model_id.empty()) {
      throw Error(ErrorKind::Usage, "eval needs --model, or --predictions with --model-id");
    }
    id = parse_model_id(a.model_id);
  }
  // Refuse before any inference work.
  for (const auto& r : records) {
    if (!zoom_compatible(id, r.zoom)) {
      throw Error(ErrorKind::IncompatibleZoom,
                  "incompatible zoom: model " + std::string(to_string(id)) + " is not tested on zoom " +
                      std::to_string(r.zoom) + " (pair " + r.id + ")");
    }
  }
  std::vector<MapPair> pairs;
  std::vector<RgbImage> preds;
  for (const auto& r : records) {
    pairs.push_back(dataset::load_pair(ref.root, r));
    if (model) {
      preds.push_back(model->run(pairs.back().source));
    } else {
      preds.push_back(dataset::read_png(fs::path(a.predictions) / (r.id + "_pred.png")));
    }
  }
  const auto ev = evaluate_run(id, pairs, preds, ClassPalette::standard());
  const std::string set_name = a.name.empty() ? fs::path(a.set).filename().string() : a.name;
  std::string tag = std::string(to_string(id));
  for (auto& ch : tag) {
    if (ch == '/') ch = '_';
  }
  const std::string stem = tag + "_" + (set_name.empty() ? "set" : set_name);
  write_metrics_file(c.out / "metrics" / (stem + ".jsonl"), ev.table, to_string(id), set_name);
  const ReportTable report{ev.table, std::nullopt, std::nullopt};
  write_text_file(c.out / "reports" / (stem + ".csv"), render_report(report, ReportFormat::Csv));
  const std::string md = render_report(report, ReportFormat::Markdown);
  write_text_file(c.out / "reports" / (stem + ".md"), md);
  write_run_snapshot(c, "eval",
                     {{"model", a.model}, {"set", a.set}, {"split", a.split},
                      {"predictions", a.predictions}, {"model_id", std::string(to_string(id))},
                      {"name", set_name}});
  std::cout << md;
}

struct DiffArgs {
  std::string double_path;
  std::string single_path;
  std::string name = "diff";
};

void run_report_diff(const Common& c, const DiffArgs& a) {
  const auto table = diff_table(read_metrics_file(a.double_path), read_metrics_file(a.single_path));
  write_text_file(c.out / "reports" / (a.name + ".csv"), render_report(table, ReportFormat::Csv));
  const std::string md = render_report(table, ReportFormat::Markdown);
  write_text_file(c.out / "reports" / (a.name + ".md"), md);
  write_run_snapshot(c, "report-diff", {{"double", a.double_path}, {"single", a.single_path}, {"name", a.name}});
  std::cout << md;
}

struct TexturizeArgs {
  std::string input;
  std::string output;
  std::string textures;
  std::string palette;
};

void run_texturize(const Common& c, const TexturizeArgs& a) {
  const ClassPalette palette = a.palette.empty() ? ClassPalette::standard() : ClassPalette::load(a.palette);
  const TextureMap textures =
      a.textures.empty() ? default_texture_map() : parse_texture_map(read_text_file(a.textures));
  const fs::path out = a.output.empty() ? c.out / "images" / "textured.png" : fs::path(a.output);
  dataset::write_png(out, texturize(dataset::read_png(a.input), palette, textures));
  write_run_snapshot(c, "texturize",
                     {{"input", a.input}, {"output", out.string()}, {"textures", a.textures}, {"palette", a.palette}});
  std::cout << "wrote " << out.string() << '\n';
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage: return kExitUsage;
    case ErrorKind::IncompatibleZoom: return kExitIncompatible;
    default: return kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tactile map toolkit: synthesize or fetch map pairs, train the translation model, "
               "evaluate by color segmentation."};
  app.require_subcommand(1);
  Common common;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", common.out, "Run output directory")->capture_default_str();
    sub->add_option("--seed", common.seed, "Random seed")->capture_default_str();
    sub->add_option("--threads", common.threads, "Worker threads (0: all cores)");
    sub->add_flag("-v,--verbose", common.verbose, "Progress messages on stderr");
  };
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "key=value run configuration file")->check(CLI::ExistingFile);
    sub->add_option("--set", common.overrides, "Override one configuration key (key=value)");
  };

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "Generate procedural source/tactile pairs");
  add_common(s_synth);
  s_synth->add_option("--n", synth.n, "Number of pairs")->check(CLI::PositiveNumber);
  s_synth->add_option("--zoom", synth.zoom, "Zoom analog (15-18)")->check(CLI::Range(15, 18));
  s_synth->add_option("--size", synth.size, "Image side in pixels")->check(CLI::Range(8, 4096));
  s_synth->add_option("--start", synth.start, "Index of the first pair")->check(CLI::NonNegativeNumber);
  s_synth->add_option("--text-density", synth.text_density, "Labels per 512x512 area");
  s_synth->add_option("--icon-density", synth.icon_density, "Icons per 512x512 area");

  SplitArgs split;
  auto* s_split = app.add_subcommand("split", "Assign train / test-english splits by seeded shuffle");
  add_common(s_split);
  s_split->add_option("--dataset", split.dataset, "Dataset directory or manifest")->required();
  s_split->add_option("--train", split.train, "Training pairs")->capture_default_str();
  s_split->add_option("--test", split.test, "English test pairs")->capture_default_str();
  s_split->add_option("--manifest-out", split.manifest_out, "Where to write (default: in place)");

  FetchArgs fetch;
  auto* s_fetch = app.add_subcommand("fetch", "Download source and styled tactile maps");
  add_common(s_fetch);
  s_fetch->add_option("--jobs", fetch.jobs, "CSV: id,center,zoom,country,type[,split]")->check(CLI::ExistingFile);
  s_fetch->add_option("--location", fetch.location, "Single location query");
  s_fetch->add_option("--zoom", fetch.zoom, "Zoom for --location")->check(CLI::Range(15, 18));
  s_fetch->add_flag("--live", fetch.live, "Use the live map service (API key from $" + std::string(dataset::kApiKeyEnv) + ")");
  s_fetch->add_option("--mock-url", fetch.mock_url, "Base URL of a running mock server");
  s_fetch->add_option("--concurrency", fetch.concurrency, "Concurrent requests")->check(CLI::PositiveNumber);
  s_fetch->add_option("--rate", fetch.rate, "Requests per second ceiling");
  s_fetch->add_option("--retries", fetch.retries, "Attempts per request")->check(CLI::PositiveNumber);
  s_fetch->add_option("--backoff-ms", fetch.backoff_ms, "Initial retry backoff");

  ImportArgs import;
  auto* s_import = app.add_subcommand("import", "Import pairs from source/ and tactile/ folders");
  add_common(s_import);
  s_import->add_option("--from", import.from, "Directory with source/ and tactile/")->required();
  s_import->add_option("--zoom", import.zoom, "Zoom of the imported maps")->check(CLI::Range(15, 18));
  s_import->add_option("--country", import.country, "Country recorded for every pair");
  s_import->add_option("--type", import.type, "city|landmark|hospital|university");
  s_import->add_option("--split", import.split, "Split recorded for every pair");

  PreviewArgs preview;
  auto* s_preview = app.add_subcommand("augment-preview", "Write a before/after augmentation grid");
  add_common(s_preview);
  add_config(s_preview);
  s_preview->add_option("--dataset", preview.dataset, "Dataset directory or manifest")->required();
  s_preview->add_option("--split", preview.split, "Split to sample (or any)");
  s_preview->add_option("--count", preview.count, "Rows")->check(CLI::PositiveNumber);

  TrainArgs trainargs;
  auto* s_train = app.add_subcommand("train", "Train the adversarial translation model");
  add_common(s_train);
  add_config(s_train);
  s_train->add_option("--dataset", trainargs.datasets, "Dataset directory or manifest (repeatable)")->required();
  s_train->add_option("--split", trainargs.split, "Split to train on (or any)")->capture_default_str();
  s_train->add_option("--epochs", trainargs.epochs, "Override epochs");
  s_train->add_option("--zoom-set", trainargs.zoom_set, "16, 18 or 16,18");

  InferArgs infer;
  auto* s_infer = app.add_subcommand("infer", "Translate source maps with a checkpoint");
  add_common(s_infer);
  s_infer->add_option("--model", infer.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  s_infer->add_option("--input", infer.input, "PNG file, dataset directory or manifest")->required();
  s_infer->add_option("--output", infer.output, "Output PNG for a single input");
  s_infer->add_option("--split", infer.split, "Split of a dataset input (or any)");

  EvalArgs eval;
  auto* s_eval = app.add_subcommand("eval", "Score predictions by color segmentation");
  add_common(s_eval);
  s_eval->add_option("--model", eval.model, "Checkpoint to run");
  s_eval->add_option("--set", eval.set, "Test dataset directory or manifest")->required();
  s_eval->add_option("--split", eval.split, "Split of the test set (or any)");
  s_eval->add_option("--predictions", eval.predictions, "Directory of <id>_pred.png instead of --model");
  s_eval->add_option("--model-id", eval.model_id, "Zoom-16, Zoom-18 or Zoom-16/18 (with --predictions)");
  s_eval->add_option("--name", eval.name, "Test set name used in outputs");

  DiffArgs diff;
  auto* s_diff = app.add_subcommand("report-diff", "Compare a double-zoom and a single-zoom model");
  add_common(s_diff);
  s_diff->add_option("--double", diff.double_path, "Metrics file of the double-zoom model")->required()->check(CLI::ExistingFile);
  s_diff->add_option("--single", diff.single_path, "Metrics file of the single-zoom model")->required()->check(CLI::ExistingFile);
  s_diff->add_option("--name", diff.name, "Report file stem");

  TexturizeArgs tex;
  auto* s_tex = app.add_subcommand("texturize", "Replace class colors by printable fill patterns");
  add_common(s_tex);
  s_tex->add_option("--input", tex.input, "Tactile PNG")->required()->check(CLI::ExistingFile);
  s_tex->add_option("--output", tex.output, "Output PNG");
  s_tex->add_option("--textures", tex.textures, "Pattern file (class = pattern[:period])")->check(CLI::ExistingFile);
  s_tex->add_option("--palette", tex.palette, "Palette file")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (auto& ch : msg) {
      if (ch == '\n') ch = ' ';
    }
    std::cerr << "error[usage]: " << msg << '\n';
    return kExitUsage;
  }

  try {
    if (common.threads > 0) nn::parallel::set_threads(common.threads);
    if (s_synth->parsed()) run_synth(common, synth);
    else if (s_split->parsed()) run_split(common, split);
    else if (s_fetch->parsed()) run_fetch(common, fetch);
    else if (s_import->parsed()) run_import(common, import);
    else if (s_preview->parsed()) run_augment_preview(common, preview);
    else if (s_train->parsed()) run_train(common, trainargs);
    else if (s_infer->parsed()) run_infer(common, infer);
    else if (s_eval->parsed()) run_eval(common, eval);
    else if (s_diff->parsed()) run_report_diff(common, diff);
    else if (s_tex->parsed()) run_texturize(common, tex);
  } catch (const Error& e) {
    std::string msg = e.what();
    for (auto& ch : msg) {
      if (ch == '\n') ch = ' ';
    }
    std::cerr << "error[" << to_string(e.kind()) << "]: " << msg << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
