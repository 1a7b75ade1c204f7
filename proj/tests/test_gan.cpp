#include <cmath>
#include <cstring>
#include <functional>
#include <set>

#include "doctest.h"
#include "support.hpp"
#include "tactile/error.hpp"
#include "tactile/gan/checkpoint.hpp"
#include "tactile/gan/networks.hpp"

using namespace tactile;
using namespace tactile::gan;
using nn::Shape;
using nn::Tensor;
using test_support::relative_error;

namespace {

// Output side of a k x k, stride s, padding p convolution.
int conv_out(int n, int k, int s, int p) { return (n + 2 * p - k) / s + 1; }

int patchgan_side(int n, int stride2_layers) {
  for (int l = 0; l < stride2_layers; ++l) n = conv_out(n, 4, 2, 1);
  n = conv_out(n, 4, 1, 1);
  return conv_out(n, 4, 1, 1);
}

template <typename T>
Tensor<T> random_tensor(Shape s, Rng& rng, double lo = -1, double hi = 1) {
  Tensor<T> t(s);
  for (auto& v : t.values()) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

std::int64_t built_params(std::vector<nn::Parameter<float>*> ps) {
  std::int64_t n = 0;
  for (auto* p : ps) n += static_cast<std::int64_t>(p->size());
  return n;
}

// Parameter total written out node by node.
std::int64_t oracle_generator_params(int in, int out, int depth, int base, int max, bool nested, bool norm) {
  auto ch = [&](int i) { return std::min(base << i, max); };
  auto block = [&](std::int64_t a, std::int64_t b) {
    return 9 * a * b + b + 9 * b * b + b + (norm ? 4 * b : 0);
  };
  std::int64_t total = 0;
  std::int64_t prev = in;
  for (int i = 0; i < depth; ++i) {
    total += block(prev, ch(i));
    prev = ch(i);
  }
  for (int i = 0; i < depth - 1; ++i) {
    for (int j = 1; i + j <= depth - 1; ++j) {
      if (!nested && i + j != depth - 1) continue;
      const std::int64_t skip_inputs = nested ? j : 1;
      total += 4LL * ch(i + 1) * ch(i) + ch(i);
      total += block((skip_inputs + 1) * ch(i), ch(i));
    }
  }
  return total + static_cast<std::int64_t>(ch(0)) * out + out;
}

}  // namespace

TEST_CASE("channel schedule") {
  GeneratorConfig g;
  CHECK(g.channels(0) == 64);
  CHECK(g.channels(3) == 512);
  CHECK(g.channels(4) == 512);
  DiscriminatorConfig d;
  CHECK(d.channels(0) == 64);
  CHECK(d.channels(3) == 512);
  GeneratorConfig bad;
  bad.depth = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("generator preserves spatial size at 256 and 512") {
  GeneratorConfig cfg;
  cfg.depth = 5;
  cfg.base_channels = 2;
  cfg.max_channels = 8;
  Generator<float> g(cfg);
  Rng rng(1);
  g.init(rng);
  for (int side : {256, 512}) {
    CAPTURE(side);
    CHECK(g.output_shape({1, 3, side, side}) == Shape{1, 3, side, side});
    std::vector<LayerTrace> trace;
    const auto y = g.forward(random_tensor<float>({1, 3, side, side}, rng), false, &trace);
    CHECK(y.shape() == Shape{1, 3, side, side});
    REQUIRE_FALSE(trace.empty());
    for (const auto& t : trace) {
      CAPTURE(t.name);
      const auto& geo = t.geometry;
      const int expect = t.transposed ? (t.input.h - 1) * geo.stride - 2 * geo.pad + geo.kernel
                                      : conv_out(t.input.h, geo.kernel, geo.stride, geo.pad);
      CHECK(t.output.h == expect);
      CHECK(t.output.w == expect);
    }
    for (float v : y.values()) REQUIRE(std::abs(v) <= 1.0f);
  }
}

TEST_CASE("generator rejects sizes that are not multiples of 2^(depth-1)") {
  GeneratorConfig cfg;
  cfg.depth = 4;
  cfg.base_channels = 2;
  Generator<float> g(cfg);
  try {
    (void)g.output_shape({1, 3, 100, 100});
    FAIL("expected a shape error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Shape);
    CHECK(std::string(e.what()).find("2^(depth-1) = 8") != std::string::npos);
  }
  CHECK(g.output_shape({1, 3, 104, 96}) == Shape{1, 3, 104, 96});
  CHECK_THROWS_AS((void)g.output_shape({1, 4, 64, 64}), Error);
}

TEST_CASE("default discriminator patch map is 30x30 at 256 and 62x62 at 512") {
  DiscriminatorConfig cfg;
  cfg.base_channels = 2;
  cfg.max_channels = 16;
  Discriminator<float> d(cfg);
  Rng rng(2);
  d.init(rng);
  CHECK(patchgan_side(256, 3) == 30);
  CHECK(patchgan_side(512, 3) == 62);
  for (int side : {256, 512}) {
    const int expect = patchgan_side(side, 3);
    CHECK(d.output_shape({1, 6, side, side}) == Shape{1, 1, expect, expect});
    std::vector<LayerTrace> trace;
    const auto src = random_tensor<float>({1, 3, side, side}, rng);
    const auto out = d.forward(src, src, false, &trace);
    CHECK(out.shape() == Shape{1, 1, expect, expect});
    CHECK(trace.size() == 5);
    for (const auto& t : trace) {
      CHECK(t.output.h == conv_out(t.input.h, t.geometry.kernel, t.geometry.stride, t.geometry.pad));
    }
  }
  CHECK_THROWS_AS(d.forward(Tensor<float>({1, 3, 64, 64}), Tensor<float>({1, 3, 32, 32}), false),
                  Error);
}

TEST_CASE("count_params: hand value, oracle and built models agree") {
  GeneratorConfig tiny;
  tiny.depth = 1;
  tiny.base_channels = 1;
  CHECK(count_params(tiny) == 48);
  tiny.norm = NormKind::None;
  CHECK(count_params(tiny) == 44);

  for (bool nested : {true, false}) {
    for (bool norm : {true, false}) {
      GeneratorConfig c;
      c.depth = 4;
      c.base_channels = 3;
      c.max_channels = 16;
      c.nested = nested;
      c.norm = norm ? NormKind::Instance : NormKind::None;
      Generator<float> g(c);
      CHECK(count_params(c) == built_params(g.parameters()));
      CHECK(count_params(c) == oracle_generator_params(3, 3, 4, 3, 16, nested, norm));
    }
  }
  GeneratorConfig def;
  CHECK(count_params(def) == oracle_generator_params(3, 3, 5, 64, 512, true, true));
  GeneratorConfig plain = def;
  plain.nested = false;
  CHECK(count_params(plain) < count_params(def));

  DiscriminatorConfig d;
  // C64 (no norm), C128, C256, C512 with norm, then the 1-channel head.
  const std::int64_t expect = (16LL * 6 * 64 + 64) + (16LL * 64 * 128 + 128 + 256) +
                              (16LL * 128 * 256 + 256 + 512) + (16LL * 256 * 512 + 512 + 1024) +
                              (16LL * 512 + 1);
  CHECK(count_params(d) == expect);
  DiscriminatorConfig small;
  small.base_channels = 4;
  Discriminator<float> built(small);
  CHECK(count_params(small) == built_params(built.parameters()));
}

TEST_CASE("parameter names are unique and stable") {
  GeneratorConfig c;
  c.depth = 3;
  c.base_channels = 2;
  Generator<float> g(c);
  std::set<std::string> names;
  for (auto* p : g.parameters()) names.insert(p->name);
  CHECK(names.size() == g.parameters().size());
  CHECK(names.count("g.x00.conv1.weight") == 1);
  CHECK(names.count("g.x02.up.weight") == 1);
  CHECK(names.count("g.head.bias") == 1);
}

TEST_CASE("initialization draws weights from N(0, 0.02)") {
  GeneratorConfig c;
  c.depth = 3;
  c.base_channels = 8;
  Generator<float> g(c);
  Rng rng(9);
  g.init(rng, 0.02);
  double s = 0, s2 = 0;
  std::size_t n = 0;
  for (auto* p : g.parameters()) {
    if (p->name.find(".weight") == std::string::npos) continue;
    for (float v : p->value) {
      s += v;
      s2 += double(v) * v;
      ++n;
    }
  }
  const double mean = s / n;
  const double sd = std::sqrt(s2 / n - mean * mean);
  CHECK(std::abs(mean) < 1e-3);
  CHECK(sd == doctest::Approx(0.02).epsilon(0.05));
}

namespace {

template <typename Net>
double grad_fraction(std::vector<nn::Parameter<double>*> params, std::vector<double>* input,
                     const std::vector<double>* input_grad, const std::function<double()>& loss,
                     double tol) {
  const double h = 1e-6;
  std::size_t ok = 0, total = 0;
  auto check_vec = [&](std::vector<double>& v, const std::vector<double>& g) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double saved = v[i];
      v[i] = saved + h;
      const double up = loss();
      v[i] = saved - h;
      const double down = loss();
      v[i] = saved;
      ok += relative_error(g[i], (up - down) / (2 * h)) <= tol;
      ++total;
    }
  };
  for (auto* p : params) check_vec(p->value, p->grad);
  if (input) check_vec(*input, *input_grad);
  return static_cast<double>(ok) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("miniature generator gradients match central differences") {
  nn::set_conv_backend(nn::ConvBackend::Reference);
  GeneratorConfig c;
  c.depth = 2;
  c.base_channels = 2;
  Generator<double> g(c);
  Rng rng(12);
  g.init(rng, 0.5);
  auto x = random_tensor<double>({1, 3, 8, 8}, rng);
  const auto w = random_tensor<double>({1, 3, 8, 8}, rng);
  auto loss = [&] {
    const auto y = g.forward(x, false);
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
    return s;
  };
  for (auto* p : g.parameters()) p->zero_grad();
  g.forward(x, true);
  const auto gx = g.backward(w);
  const double frac = grad_fraction<Generator<double>>(g.parameters(), &x.values(), &gx.values(), loss, 1e-3);
  CHECK(frac >= 0.99);
  nn::set_conv_backend(nn::ConvBackend::Parallel);
}

TEST_CASE("discriminator gradient with respect to the candidate") {
  nn::set_conv_backend(nn::ConvBackend::Reference);
  DiscriminatorConfig c;
  c.base_channels = 2;
  c.max_channels = 4;
  c.stride2_layers = 1;
  Discriminator<double> d(c);
  Rng rng(13);
  d.init(rng, 0.5);
  const auto src = random_tensor<double>({1, 3, 8, 8}, rng);
  auto cand = random_tensor<double>({1, 3, 8, 8}, rng);
  const auto probe = d.forward(src, cand, false);
  const auto w = random_tensor<double>(probe.shape(), rng);
  auto loss = [&] {
    const auto y = d.forward(src, cand, false);
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
    return s;
  };
  for (auto* p : d.parameters()) p->zero_grad();
  d.forward(src, cand, true);
  const auto gc = d.backward(w);
  CHECK(gc.shape() == cand.shape());
  CHECK(grad_fraction<Discriminator<double>>(d.parameters(), &cand.values(), &gc.values(), loss, 1e-3) >= 0.99);
  nn::set_conv_backend(nn::ConvBackend::Parallel);
}

TEST_CASE("reference and parallel backends give the same generator output") {
  GeneratorConfig c;
  c.depth = 3;
  c.base_channels = 4;
  Generator<double> g(c);
  Rng rng(14);
  g.init(rng);
  const auto x = random_tensor<double>({1, 3, 16, 16}, rng);
  nn::set_conv_backend(nn::ConvBackend::Reference);
  const auto a = g.forward(x, false);
  nn::set_conv_backend(nn::ConvBackend::Parallel);
  const auto b = g.forward(x, false);
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("config JSON round trip") {
  GeneratorConfig g;
  g.depth = 3;
  g.nested = false;
  g.norm = NormKind::None;
  CHECK(generator_config_from_json(to_json(g)) == g);
  DiscriminatorConfig d;
  d.stride2_layers = 2;
  CHECK(discriminator_config_from_json(to_json(d)) == d);
  CHECK_THROWS_AS(generator_config_from_json(nlohmann::json{{"depth", "x"}}), Error);
}

TEST_CASE("checkpoint bytes are stable across save and load") {
  Checkpoint ck;
  ck.meta = {{"format", "test"}, {"n", 3}};
  ck.arrays.push_back({"a", {2, 3}, {1, 2, 3, 4, 5, 6}});
  ck.arrays.push_back({"b", {0}, {}});
  ck.arrays.push_back({"s", {}, {2.5f}});
  ck.arrays.push_back({"c", {1}, {-0.0f}});
  ck.timestamp = 1234;
  const auto bytes = serialize_checkpoint(ck);
  CHECK(bytes.compare(0, 8, "TMAPCKPT") == 0);
  std::int64_t ts;
  std::memcpy(&ts, bytes.data() + kCheckpointTimestampOffset, sizeof ts);
  CHECK(ts == 1234);
  const auto back = deserialize_checkpoint(bytes);
  CHECK(back.arrays == ck.arrays);
  CHECK(back.meta == ck.meta);
  CHECK(serialize_checkpoint(back) == bytes);

  test_support::TempDir dir("ckpt");
  ck.timestamp = 0;
  save_checkpoint(dir / "one.ckpt", ck);
  const auto loaded = load_checkpoint(dir / "one.ckpt");
  CHECK(loaded.timestamp > 0);
  Checkpoint again = loaded;
  again.timestamp = 0;
  save_checkpoint(dir / "two.ckpt", again);
  auto a = test_support::read_bytes(dir / "one.ckpt");
  auto b = test_support::read_bytes(dir / "two.ckpt");
  REQUIRE(a.size() == b.size());
  // Identical apart from the timestamp field.
  std::memset(a.data() + kCheckpointTimestampOffset, 0, 8);
  std::memset(b.data() + kCheckpointTimestampOffset, 0, 8);
  CHECK(a == b);

  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)), Error);
  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(deserialize_checkpoint(bad), Error);
  CHECK_THROWS_AS(back.array("missing"), Error);
}

TEST_CASE("assign checks names and dims") {
  nn::Parameter<float> p("w", {2, 2});
  assign(p, {"w", {2, 2}, {1, 2, 3, 4}});
  CHECK(p.value == std::vector<float>{1, 2, 3, 4});
  CHECK_THROWS_AS(assign(p, {"w", {4}, {1, 2, 3, 4}}), Error);
  CHECK_THROWS_AS(assign(p, {"v", {2, 2}, {1, 2, 3, 4}}), Error);
  CHECK(to_named_array(p).values == p.value);
}
