#include "tactile/train/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tactile/error.hpp"
#include "tactile/palette.hpp"
#include "tactile/random.hpp"
#include "tactile/train/loss.hpp"

namespace tactile::train {

using nn::Shape;
using nn::Tensor;

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int(key, trim(item)));
  return out;
}

std::uint64_t parse_seed(const std::string& v) {
  std::uint64_t s = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), s);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw Error(ErrorKind::Config, "seed must be a non-negative integer, got '" + v + "'");
  }
  return s;
}

// Stream labels for derived random generators.
constexpr std::uint64_t kInitStream = 0x1000;
constexpr std::uint64_t kShuffleStream = 0x2000;
constexpr std::uint64_t kAugmentStream = 0x3000000;

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorKind::Config, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorKind::Config, "batch_size must be >= 1");
  if (!(lambda_l1 >= 0)) throw Error(ErrorKind::Config, "lambda_l1 must be >= 0");
  if (checkpoint_every < 1) throw Error(ErrorKind::Config, "checkpoint_every must be >= 1");
  if (!(init_std > 0)) throw Error(ErrorKind::Config, "init_std must be > 0");
  model_id();
  generator.validate();
  discriminator.validate();
  if (discriminator.in_channels != generator.in_channels + generator.out_channels) {
    throw Error(ErrorKind::Config, "discriminator input channels must equal source + target channels");
  }
  augmentation.validate();
  Adam(std::vector<nn::Parameter<float>*>{}, AdamConfig{lr, beta1, beta2});  // validates
}

ModelId TrainConfig::model_id() const {
  std::vector<int> z = zoom_set;
  std::sort(z.begin(), z.end());
  if (z == std::vector<int>{16}) return ModelId::Zoom16;
  if (z == std::vector<int>{18}) return ModelId::Zoom18;
  if (z == std::vector<int>{16, 18}) return ModelId::Zoom16_18;
  throw Error(ErrorKind::Config, "zoom_set must be 16, 18 or 16,18 (got '" + join_ints(zoom_set) + "')");
}

bool TrainConfig::recolor_enabled() const {
  return std::find(zoom_set.begin(), zoom_set.end(), 18) != zoom_set.end();
}

void apply_key_values(TrainConfig& c, const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    const std::string& k = key;
    const std::string& v = value;
    if (k == "epochs") c.epochs = parse_int(k, v);
    else if (k == "batch_size") c.batch_size = parse_int(k, v);
    else if (k == "lr") c.lr = parse_double(k, v);
    else if (k == "beta1") c.beta1 = parse_double(k, v);
    else if (k == "beta2") c.beta2 = parse_double(k, v);
    else if (k == "lambda_l1") c.lambda_l1 = parse_double(k, v);
    else if (k == "seed") c.seed = parse_seed(v);
    else if (k == "zoom_set") c.zoom_set = parse_int_list(k, v);
    else if (k == "checkpoint_every") c.checkpoint_every = parse_int(k, v);
    else if (k == "augment") c.augment = parse_bool(k, v);
    else if (k == "init_std") c.init_std = parse_double(k, v);
    else if (k == "g.depth") c.generator.depth = parse_int(k, v);
    else if (k == "g.base_channels") c.generator.base_channels = parse_int(k, v);
    else if (k == "g.max_channels") c.generator.max_channels = parse_int(k, v);
    else if (k == "g.nested") c.generator.nested = parse_bool(k, v);
    else if (k == "g.norm") c.generator.norm = gan::parse_norm_kind(v);
    else if (k == "d.base_channels") c.discriminator.base_channels = parse_int(k, v);
    else if (k == "d.max_channels") c.discriminator.max_channels = parse_int(k, v);
    else if (k == "d.stride2_layers") c.discriminator.stride2_layers = parse_int(k, v);
    else if (k == "d.norm") c.discriminator.norm = gan::parse_norm_kind(v);
    else if (k == "aug.hflip_prob") c.augmentation.hflip_prob = parse_double(k, v);
    else if (k == "aug.max_shift") c.augmentation.max_shift = parse_double(k, v);
    else if (k == "aug.scale_lo") c.augmentation.scale_lo = parse_double(k, v);
    else if (k == "aug.scale_hi") c.augmentation.scale_hi = parse_double(k, v);
    else if (k == "aug.max_rotation_deg") c.augmentation.max_rotation_deg = parse_double(k, v);
    else if (k == "aug.grey_recolor_prob") c.augmentation.grey_recolor_prob = parse_double(k, v);
    else if (k == "aug.grey_value") {
      const auto rgb = parse_int_list(k, v);
      if (rgb.size() != 3 || std::any_of(rgb.begin(), rgb.end(), [](int x) { return x < 0 || x > 255; })) {
        throw Error(ErrorKind::Config, "aug.grey_value must be three integers in 0..255");
      }
      c.augmentation.grey_value = {static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]),
                                   static_cast<std::uint8_t>(rgb[2])};
    } else {
      throw Error(ErrorKind::Config, "unknown training key '" + k + "'");
    }
  }
}

KeyValues to_key_values(const TrainConfig& c) {
  const auto& a = c.augmentation;
  return {
      {"epochs", std::to_string(c.epochs)},
      {"batch_size", std::to_string(c.batch_size)},
      {"lr", fmt(c.lr)},
      {"beta1", fmt(c.beta1)},
      {"beta2", fmt(c.beta2)},
      {"lambda_l1", fmt(c.lambda_l1)},
      {"seed", std::to_string(c.seed)},
      {"zoom_set", join_ints(c.zoom_set)},
      {"checkpoint_every", std::to_string(c.checkpoint_every)},
      {"augment", c.augment ? "true" : "false"},
      {"init_std", fmt(c.init_std)},
      {"g.depth", std::to_string(c.generator.depth)},
      {"g.base_channels", std::to_string(c.generator.base_channels)},
      {"g.max_channels", std::to_string(c.generator.max_channels)},
      {"g.nested", c.generator.nested ? "true" : "false"},
      {"g.norm", gan::to_string(c.generator.norm)},
      {"d.base_channels", std::to_string(c.discriminator.base_channels)},
      {"d.max_channels", std::to_string(c.discriminator.max_channels)},
      {"d.stride2_layers", std::to_string(c.discriminator.stride2_layers)},
      {"d.norm", gan::to_string(c.discriminator.norm)},
      {"aug.hflip_prob", fmt(a.hflip_prob)},
      {"aug.max_shift", fmt(a.max_shift)},
      {"aug.scale_lo", fmt(a.scale_lo)},
      {"aug.scale_hi", fmt(a.scale_hi)},
      {"aug.max_rotation_deg", fmt(a.max_rotation_deg)},
      {"aug.grey_recolor_prob", fmt(a.grey_recolor_prob)},
      {"aug.grey_value", std::to_string(a.grey_value[0]) + "," + std::to_string(a.grey_value[1]) +
                             "," + std::to_string(a.grey_value[2])},
  };
}

std::string render_step_record(const StepRecord& r) {
  nlohmann::ordered_json j;
  j["epoch"] = r.epoch;
  j["step"] = r.step;
  j["d_loss"] = r.d_loss;
  j["g_loss"] = r.g_loss;
  j["g_adv"] = r.g_adv;
  j["g_l1"] = r.g_l1;
  return j.dump();
}

StepRecord parse_step_record(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    return {j.at("epoch").get<int>(),     j.at("step").get<std::int64_t>(),
            j.at("d_loss").get<double>(), j.at("g_loss").get<double>(),
            j.at("g_adv").get<double>(),  j.at("g_l1").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, std::string("loss log record: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

Tensor<float> to_batch(const std::vector<const RgbImage*>& images) {
  if (images.empty()) throw Error(ErrorKind::Shape, "empty image batch");
  const int w = images[0]->width(), h = images[0]->height();
  Tensor<float> t(Shape{static_cast<int>(images.size()), 3, h, w});
  const std::size_t plane = static_cast<std::size_t>(w) * h;
  for (std::size_t n = 0; n < images.size(); ++n) {
    if (images[n]->width() != w || images[n]->height() != h) {
      throw Error(ErrorKind::Shape, "images in a batch must share one size");
    }
    const auto bytes = images[n]->bytes();
    float* dst = t.data() + n * 3 * plane;
    for (std::size_t i = 0; i < plane; ++i) {
      for (int c = 0; c < 3; ++c) {
        dst[c * plane + i] = static_cast<float>(bytes[i * 3 + c]) / 127.5f - 1.0f;
      }
    }
  }
  return t;
}

Tensor<float> to_tensor(const RgbImage& image) { return to_batch({&image}); }

RgbImage from_tensor(const Tensor<float>& t, int batch_index) {
  const Shape& s = t.shape();
  if (s.c != 3 || batch_index < 0 || batch_index >= s.n) {
    throw Error(ErrorKind::Shape, "cannot convert tensor " + s.str() + " to an RGB image");
  }
  RgbImage img(s.w, s.h);
  const std::size_t plane = s.plane();
  const float* src = t.data() + static_cast<std::size_t>(batch_index) * 3 * plane;
  auto bytes = img.bytes();
  for (std::size_t i = 0; i < plane; ++i) {
    for (int c = 0; c < 3; ++c) {
      const double v = std::round((static_cast<double>(src[c * plane + i]) + 1.0) * 127.5);
      bytes[i * 3 + c] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  }
  return img;
}

// ---------------------------------------------------------------------------

Pix2Pix::Pix2Pix(const TrainConfig& cfg)
    : g_(cfg.generator),
      d_(cfg.discriminator),
      opt_g_(g_.parameters(), AdamConfig{cfg.lr, cfg.beta1, cfg.beta2}),
      opt_d_(d_.parameters(), AdamConfig{cfg.lr, cfg.beta1, cfg.beta2}) {
  Rng rng = Rng::derive(cfg.seed, kInitStream);
  g_.init(rng, cfg.init_std);
  d_.init(rng, cfg.init_std);
}

StepRecord Pix2Pix::step(const Tensor<float>& source, const Tensor<float>& target, double lambda_l1) {
  const Tensor<float> fake = g_.forward(source, true);

  // Discriminator: real pairs toward 1, generated pairs toward 0.
  opt_d_.zero_grad();
  const Tensor<float> real_logits = d_.forward(source, target, true);
  Tensor<float> grad_real;
  const double real_term = bce_with_logits(real_logits, 1, &grad_real);
  for (auto& v : grad_real.values()) v *= 0.5f;
  d_.backward(grad_real);
  const Tensor<float> fake_logits = d_.forward(source, fake, true);
  Tensor<float> grad_fake;
  const double fake_term = bce_with_logits(fake_logits, 0, &grad_fake);
  for (auto& v : grad_fake.values()) v *= 0.5f;
  d_.backward(grad_fake);
  const double d_loss = 0.5 * (real_term + fake_term);
  if (!std::isfinite(d_loss)) throw Error(ErrorKind::Numeric, "discriminator loss is not finite");
  opt_d_.step();

  // Generator: fool the updated discriminator and stay close in L1.
  opt_g_.zero_grad();
  const Tensor<float> logits = d_.forward(source, fake, true);
  const Pix2PixLoss<float> loss = pix2pix_loss(logits, logits, fake, target, lambda_l1, true);
  Tensor<float> grad = d_.backward(loss.grad_g_fake);
  nn::add_inplace(grad, loss.grad_gen);
  g_.backward(grad);
  if (!std::isfinite(loss.g_loss)) throw Error(ErrorKind::Numeric, "generator loss is not finite");
  opt_g_.step();

  StepRecord r;
  r.d_loss = d_loss;
  r.g_adv = loss.g_adv;
  r.g_l1 = loss.g_l1;
  r.g_loss = loss.g_loss;
  return r;
}

gan::Checkpoint Pix2Pix::checkpoint(nlohmann::json meta) const {
  auto& self = const_cast<Pix2Pix&>(*this);
  gan::Checkpoint ckpt;
  meta["format"] = kCheckpointFormat;
  meta["schema"] = kCheckpointSchema;
  meta["generator"] = gan::to_json(g_.config());
  meta["discriminator"] = gan::to_json(d_.config());
  meta["optimizer_steps"] = opt_g_.steps();
  ckpt.meta = std::move(meta);
  for (const auto* p : self.g_.parameters()) ckpt.arrays.push_back(gan::to_named_array(*p));
  for (const auto* p : self.d_.parameters()) ckpt.arrays.push_back(gan::to_named_array(*p));
  opt_g_.export_state("adam_g", ckpt.arrays);
  opt_d_.export_state("adam_d", ckpt.arrays);
  return ckpt;
}

void Pix2Pix::restore(const gan::Checkpoint& ckpt) {
  for (auto* p : g_.parameters()) gan::assign(*p, ckpt.array(p->name));
  for (auto* p : d_.parameters()) gan::assign(*p, ckpt.array(p->name));
  const auto steps = ckpt.meta.value("optimizer_steps", std::int64_t{0});
  opt_g_.import_state("adam_g", ckpt, steps);
  opt_d_.import_state("adam_d", ckpt, steps);
}

// ---------------------------------------------------------------------------

TrainRun train(const TrainConfig& cfg, const std::vector<MapPair>& pairs,
               const TrainOptions& options) {
  cfg.validate();
  TrainRun run;
  run.model_id = cfg.model_id();
  run.manifest_hash = options.manifest_hash;

  const std::set<int> zooms(cfg.zoom_set.begin(), cfg.zoom_set.end());
  std::vector<const MapPair*> data;
  std::set<int> seen;
  for (const auto& p : pairs) {
    if (zooms.count(p.zoom)) {
      data.push_back(&p);
      seen.insert(p.zoom);
    }
  }
  if (data.empty()) throw Error(ErrorKind::Config, "training set is empty for zoom set " + join_ints(cfg.zoom_set));
  for (int z : zooms) {
    if (!seen.count(z)) {
      throw Error(ErrorKind::Config, "training pairs do not cover zoom " + std::to_string(z));
    }
  }
  run.pairs_used = data.size();

  Pix2Pix model(cfg);
  const nlohmann::json config_json = [&] {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : to_key_values(cfg)) j[k] = v;
    return j;
  }();

  std::ofstream log;
  if (!options.log_path.empty()) {
    if (options.log_path.has_parent_path()) {
      std::filesystem::create_directories(options.log_path.parent_path());
    }
    log.open(options.log_path, std::ios::trunc);
    if (!log) throw Error(ErrorKind::Io, "cannot write loss log " + options.log_path.string());
  }

  const ClassPalette palette = ClassPalette::standard();
  const bool recolor = cfg.recolor_enabled();
  std::int64_t step = 0;
  std::uint64_t sample_counter = 0;
  std::vector<std::size_t> order(data.size());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle = Rng::derive(cfg.seed, kShuffleStream + static_cast<std::uint64_t>(epoch));
    shuffle.shuffle(order.begin(), order.end());
    double l1_sum = 0;
    int l1_count = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<MapPair> batch;
      for (std::size_t k = start; k < end; ++k) {
        const MapPair& p = *data[order[k]];
        Rng rng = Rng::derive(cfg.seed, kAugmentStream + sample_counter++);
        MapPair sample = cfg.augment ? augment::geometric_augment(p, cfg.augmentation, rng) : p;
        if (recolor && sample.zoom >= kBuildingsMinZoom) {
          auto outcome = augment::grey_recolor(sample, cfg.augmentation, rng, palette);
          ++run.recolor_draws;
          if (outcome.applied) ++run.recolor_applied;
          sample = std::move(outcome.pair);
        }
        batch.push_back(std::move(sample));
      }
      std::vector<const RgbImage*> src, tgt;
      for (const auto& b : batch) {
        src.push_back(&b.source);
        tgt.push_back(&b.tactile);
      }
      StepRecord rec = model.step(to_batch(src), to_batch(tgt), cfg.lambda_l1);
      rec.epoch = epoch;
      rec.step = ++step;
      l1_sum += rec.g_l1;
      ++l1_count;
      if (log.is_open()) log << render_step_record(rec) << '\n';
      if (options.on_step) options.on_step(rec);
      run.steps.push_back(rec);
    }
    if (log.is_open()) log.flush();
    if (options.on_epoch) options.on_epoch(epoch, l1_sum / std::max(1, l1_count));

    if (!options.checkpoint_dir.empty() && (epoch % cfg.checkpoint_every == 0 || epoch == cfg.epochs)) {
      nlohmann::json meta;
      meta["model_id"] = std::string(to_string(run.model_id));
      meta["epoch"] = epoch;
      meta["step"] = step;
      meta["seed"] = cfg.seed;
      meta["train_config"] = config_json;
      meta["manifest_hash"] = options.manifest_hash;
      meta["recolor_applied"] = run.recolor_applied;
      char name[32];
      std::snprintf(name, sizeof name, "epoch-%04d.ckpt", epoch);
      const auto path = options.checkpoint_dir / name;
      try {
        gan::save_checkpoint(path, model.checkpoint(meta));
      } catch (const Error& e) {
        throw Error(ErrorKind::Checkpoint, std::string("checkpoint write failed: ") + e.what());
      }
      run.checkpoints.push_back(path);
    }
  }
  return run;
}

// ---------------------------------------------------------------------------

InferenceModel InferenceModel::from_checkpoint(const gan::Checkpoint& ckpt) {
  if (ckpt.meta.value("format", std::string()) != kCheckpointFormat) {
    throw Error(ErrorKind::Checkpoint, "checkpoint was not written by this trainer");
  }
  if (ckpt.meta.value("schema", 0) != kCheckpointSchema) {
    throw Error(ErrorKind::Checkpoint, "checkpoint config schema " +
                                           std::to_string(ckpt.meta.value("schema", 0)) +
                                           " is not supported");
  }
  if (!ckpt.meta.contains("generator")) throw Error(ErrorKind::Checkpoint, "checkpoint lacks a generator config");
  gan::Generator<float> g(gan::generator_config_from_json(ckpt.meta.at("generator")));
  for (auto* p : g.parameters()) gan::assign(*p, ckpt.array(p->name));
  const ModelId model = parse_model_id(ckpt.meta.value("model_id", std::string("Zoom-16")));
  return InferenceModel(std::move(g), model);
}

InferenceModel InferenceModel::load(const std::filesystem::path& path) {
  return from_checkpoint(gan::load_checkpoint(path));
}

RgbImage InferenceModel::run(const RgbImage& source) {
  return from_tensor(g_.forward(to_tensor(source), false));
}

RgbImage infer(const std::filesystem::path& checkpoint, const RgbImage& source) {
  return InferenceModel::load(checkpoint).run(source);
}

}  // namespace tactile::train
