#include "uaweight/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <numeric>

#include "uaweight/error.hpp"
#include "uaweight/text_io.hpp"

namespace uaweight {

std::string_view to_string(DegradationKind kind) noexcept {
  switch (kind) {
    case DegradationKind::gaussian_blur: return "gaussian_blur";
    case DegradationKind::downscale: return "downscale";
    case DegradationKind::brightness_shift: return "brightness_shift";
    case DegradationKind::ocr_inject: return "ocr_inject";
  }
  return "gaussian_blur";
}

DegradationKind parse_degradation_kind(std::string_view text) {
  for (const auto kind : {DegradationKind::gaussian_blur, DegradationKind::downscale,
                          DegradationKind::brightness_shift, DegradationKind::ocr_inject}) {
    if (to_string(kind) == text) return kind;
  }
  fail(ErrorCode::UnknownKind, "unknown degradation kind '" + std::string(text) + "'");
}

Degradation parse_degradation(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    fail(ErrorCode::InvalidConfig, "degradation must look like kind:magnitude, got '" + std::string(text) + "'");
  }
  const auto kind = parse_degradation_kind(text.substr(0, colon));
  const std::string number(text.substr(colon + 1));
  char* end = nullptr;
  const double magnitude = std::strtod(number.c_str(), &end);
  if (number.empty() || *end != '\0' || !std::isfinite(magnitude)) {
    fail(ErrorCode::InvalidConfig, "bad degradation magnitude '" + number + "'");
  }
  return {kind, magnitude};
}

std::vector<Degradation> default_degradations() {
  return {{DegradationKind::gaussian_blur, 2.0},
          {DegradationKind::downscale, 0.4},
          {DegradationKind::ocr_inject, 400.0}};
}

void SynthSpec::validate() const {
  if (n_samples == 0) fail(ErrorCode::InvalidConfig, "n_samples must be positive");
  if (feature_dim == 0 || embedding_dim == 0) fail(ErrorCode::InvalidConfig, "dimensions must be positive");
  if (n_classes < 2 || n_classes > 3) fail(ErrorCode::InvalidConfig, "n_classes must be 2 or 3");
  if (!(lowq_fraction >= 0.0 && lowq_fraction <= 1.0)) fail(ErrorCode::InvalidConfig, "lowq_fraction must be in [0, 1]");
  if (!(label_noise_p >= 0.0 && label_noise_p <= 1.0)) fail(ErrorCode::InvalidConfig, "label_noise_p must be in [0, 1]");
  if (image_width == 0 || image_height == 0) fail(ErrorCode::InvalidConfig, "image size must be positive");
  if (!(class_separation >= 0.0) || !(embedding_noise >= 0.0)) {
    fail(ErrorCode::InvalidConfig, "class_separation and embedding_noise must be >= 0");
  }
  for (const auto& d : degradations) {
    if (!(d.magnitude >= 0.0)) fail(ErrorCode::InvalidConfig, "degradation magnitudes must be >= 0");
    if (d.kind == DegradationKind::downscale && !(d.magnitude > 0.0 && d.magnitude <= 1.0)) {
      fail(ErrorCode::InvalidConfig, "downscale factor must be in (0, 1]");
    }
  }
}

namespace {

std::uint8_t to_byte(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(v + 0.5);
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    total += kernel[i + radius];
  }
  for (double& k : kernel) k /= total;
  return kernel;
}

// For each output index, the source indices and area weights covered when
// `in` samples are averaged into `out` equal-width boxes.
std::vector<std::vector<std::pair<std::size_t, double>>> box_weights(std::size_t in, std::size_t out) {
  std::vector<std::vector<std::pair<std::size_t, double>>> table(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t o = 0; o < out; ++o) {
    const double lo = static_cast<double>(o) * scale;
    const double hi = static_cast<double>(o + 1) * scale;
    const auto first = static_cast<std::size_t>(std::floor(lo));
    const auto last = std::min(in, static_cast<std::size_t>(std::ceil(hi)));
    for (std::size_t s = first; s < last; ++s) {
      const double overlap = std::min(hi, static_cast<double>(s + 1)) - std::max(lo, static_cast<double>(s));
      if (overlap > 0.0) table[o].emplace_back(s, overlap / scale);
    }
  }
  return table;
}

}  // namespace

RgbImage gaussian_blur(const RgbImage& image, double sigma) {
  if (!(sigma >= 0.0)) fail(ErrorCode::InvalidConfig, "blur sigma must be >= 0");
  if (sigma == 0.0) return image;
  const auto kernel = gaussian_kernel(sigma);
  const std::size_t radius = kernel.size() / 2;
  const std::size_t w = image.width;
  const std::size_t h = image.height;
  const std::size_t stride = w * 3;

  // Horizontal pass on each interleaved row, replicating the end pixels.
  std::vector<double> horizontal(image.pixels.size());
  std::vector<double> padded((w + 2 * radius) * 3);
  for (std::size_t y = 0; y < h; ++y) {
    const std::uint8_t* row = image.pixels.data() + y * stride;
    for (std::size_t x = 0; x < w + 2 * radius; ++x) {
      const std::size_t sx = x < radius ? 0 : std::min(x - radius, w - 1);
      for (std::size_t c = 0; c < 3; ++c) padded[x * 3 + c] = row[sx * 3 + c];
    }
    double* dst = horizontal.data() + y * stride;
    for (std::size_t t = 0; t < kernel.size(); ++t) {
      const double k = kernel[t];
      const double* src = padded.data() + t * 3;
      for (std::size_t i = 0; i < stride; ++i) dst[i] += k * src[i];
    }
  }

  // Vertical pass accumulates whole rows, replicating the top and bottom rows.
  RgbImage out(w, h);
  std::vector<double> acc(stride);
  for (std::size_t y = 0; y < h; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t t = 0; t < kernel.size(); ++t) {
      const std::size_t sy = y + t < radius ? 0 : std::min(y + t - radius, h - 1);
      const double k = kernel[t];
      const double* src = horizontal.data() + sy * stride;
      for (std::size_t i = 0; i < stride; ++i) acc[i] += k * src[i];
    }
    std::uint8_t* dst = out.pixels.data() + y * stride;
    for (std::size_t i = 0; i < stride; ++i) dst[i] = to_byte(acc[i]);
  }
  return out;
}

RgbImage downscale(const RgbImage& image, double factor) {
  if (!(factor > 0.0 && factor <= 1.0)) fail(ErrorCode::InvalidConfig, "downscale factor must be in (0, 1]");
  const auto out_w = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(image.width * factor)));
  const auto out_h = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(image.height * factor)));
  const auto wx = box_weights(image.width, out_w);
  const auto wy = box_weights(image.height, out_h);

  std::vector<double> horizontal(out_w * image.height * 3, 0.0);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      for (const auto& [sx, weight] : wx[ox]) {
        const auto* p = image.at(sx, y);
        for (int c = 0; c < 3; ++c) horizontal[(y * out_w + ox) * 3 + c] += weight * p[c];
      }
    }
  }
  RgbImage out(out_w, out_h);
  for (std::size_t oy = 0; oy < out_h; ++oy) {
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      std::array<double, 3> acc{};
      for (const auto& [sy, weight] : wy[oy]) {
        for (int c = 0; c < 3; ++c) acc[c] += weight * horizontal[(sy * out_w + ox) * 3 + c];
      }
      auto* q = out.at(ox, oy);
      for (int c = 0; c < 3; ++c) q[c] = to_byte(acc[c]);
    }
  }
  return out;
}

RgbImage brightness_shift(const RgbImage& image, double amount) {
  if (amount == 0.0) return image;
  RgbImage out = image;
  // Adding the same offset to R, G and B adds it to BT.601 luma.
  for (auto& v : out.pixels) v = to_byte(v + amount);
  return out;
}

RgbImage degrade(const RgbImage& image, DegradationKind kind, double magnitude) {
  if (!(magnitude >= 0.0)) fail(ErrorCode::InvalidConfig, "degradation magnitude must be >= 0");
  switch (kind) {
    case DegradationKind::gaussian_blur: return gaussian_blur(image, magnitude);
    case DegradationKind::downscale: return downscale(image, magnitude);
    case DegradationKind::brightness_shift: return brightness_shift(image, magnitude);
    case DegradationKind::ocr_inject: return image;
  }
  fail(ErrorCode::UnknownKind, "unknown degradation kind");
}

RgbImage procedural_image(std::size_t width, std::size_t height, std::uint64_t seed) {
  Rng rng(seed);
  const auto range = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(rng); };

  const double base = range(100.0, 150.0);
  const std::array<double, 3> tint{range(-10, 10), range(-10, 10), range(-10, 10)};
  const double fx = range(0.02, 0.12), fy = range(0.02, 0.12);
  const double px = range(0, 2 * std::numbers::pi), py = range(0, 2 * std::numbers::pi);
  const double amplitude = range(10.0, 25.0);

  std::vector<double> wave_x(width);
  std::vector<double> wave_y(height);
  for (std::size_t x = 0; x < width; ++x) wave_x[x] = amplitude * std::sin(fx * static_cast<double>(x) + px) / 2.0;
  for (std::size_t y = 0; y < height; ++y) wave_y[y] = amplitude * std::sin(fy * static_cast<double>(y) + py) / 2.0;

  std::vector<double> plane(width * height * 3);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double texture = wave_x[x] + wave_y[y] + range(-16.0, 16.0);
      for (int c = 0; c < 3; ++c) plane[(y * width + x) * 3 + c] = base + tint[c] + texture;
    }
  }

  const auto shapes = 4 + uniform_index(rng, 4);
  for (std::uint64_t s = 0; s < shapes; ++s) {
    const bool disc = bernoulli(rng, 0.5);
    const std::array<double, 3> color{range(40, 215), range(40, 215), range(40, 215)};
    const double cx = range(0, static_cast<double>(width));
    const double cy = range(0, static_cast<double>(height));
    const double rx = range(0.05, 0.18) * static_cast<double>(width);
    const double ry = disc ? rx : range(0.05, 0.18) * static_cast<double>(height);
    const auto x0 = static_cast<std::size_t>(std::max(0.0, std::floor(cx - rx)));
    const auto x1 = static_cast<std::size_t>(std::min(static_cast<double>(width), std::ceil(cx + rx + 1)));
    const auto y0 = static_cast<std::size_t>(std::max(0.0, std::floor(cy - ry)));
    const auto y1 = static_cast<std::size_t>(std::min(static_cast<double>(height), std::ceil(cy + ry + 1)));
    for (std::size_t y = y0; y < y1; ++y) {
      for (std::size_t x = x0; x < x1; ++x) {
        const double dx = (static_cast<double>(x) - cx) / rx;
        const double dy = (static_cast<double>(y) - cy) / ry;
        const bool inside = disc ? dx * dx + dy * dy <= 1.0 : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
        if (!inside) continue;
        for (int c = 0; c < 3; ++c) {
          auto& v = plane[(y * width + x) * 3 + c];
          // Keep part of the background texture so shapes are not flat.
          v = color[c] + 0.5 * (v - base - tint[c]);
        }
      }
    }
  }

  RgbImage image(width, height);
  for (std::size_t i = 0; i < plane.size(); ++i) image.pixels[i] = to_byte(plane[i]);
  return image;
}

std::string random_ocr_text(std::size_t length, Rng& rng) {
  static constexpr std::string_view kAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 %$!";
  std::string text;
  text.reserve(length);
  for (std::size_t i = 0; i < length; ++i) text.push_back(kAlphabet[uniform_index(rng, kAlphabet.size())]);
  return text;
}

namespace {

constexpr std::array<std::string_view, 12> kVenues = {
    "Cafe Luna",   "Harbor Deli", "Maple Arena", "Nova Phone",    "River Hotel", "Atlas Gym",
    "Pine Bistro", "Echo Radio",  "Summit Bank", "Orbit Cinema",  "Coral Park",  "Vista Mall"};

constexpr std::array<std::string_view, 6> kOpeners = {
    "just got back from", "spent the afternoon at", "people keep talking about",
    "took a photo at",    "finally visited",        "a quick update on"};

std::string padded(std::size_t value, std::size_t width) {
  std::string digits = std::to_string(value);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return digits;
}

std::vector<float> gaussian_vector(std::size_t dim, Rng& rng) {
  std::vector<float> v(dim);
  for (auto& x : v) x = static_cast<float>(standard_normal(rng));
  return v;
}

std::vector<float> perturbed(const std::vector<float>& base, double noise, Rng& rng) {
  std::vector<float> v(base.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(base[i] + noise * standard_normal(rng));
  return v;
}

Label class_label(std::size_t cls, std::size_t n_classes) {
  if (n_classes == 2) return cls == 0 ? Label::negative : Label::positive;
  return cls == 0 ? Label::negative : cls == 1 ? Label::neutral : Label::positive;
}

}  // namespace

SynthCorpus generate_corpus(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_samples;
  const std::size_t k = spec.n_classes;
  Rng rng(derive_seed(spec.rng_seed, 0x5eedULL));

  // Regular layout so every seed sees the same class geometry: antipodal for
  // two classes, an equilateral triangle in the first two axes for three.
  std::vector<std::vector<double>> centroids(k, std::vector<double>(spec.feature_dim, 0.0));
  for (std::size_t c = 0; c < k; ++c) {
    if (k == 2 || spec.feature_dim == 1) {
      centroids[c][0] = spec.class_separation * (k == 2 ? (c == 0 ? -1.0 : 1.0) : static_cast<double>(c) - 1.0);
    } else {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(k);
      centroids[c][0] = spec.class_separation * std::cos(angle);
      centroids[c][1] = spec.class_separation * std::sin(angle);
    }
  }

  const auto lowq_count = static_cast<std::size_t>(std::lround(spec.lowq_fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  std::vector<bool> low_quality(n, false);
  for (std::size_t i = 0; i < lowq_count; ++i) low_quality[order[i]] = true;

  double injected = -1.0;
  for (const auto& d : spec.degradations) {
    if (d.kind == DegradationKind::ocr_inject) injected = d.magnitude;
  }

  SynthCorpus out;
  out.low_quality = low_quality;
  out.latent_class.resize(n);
  out.images.reserve(n);
  out.features.features = Matrix(n, spec.feature_dim);
  std::vector<Sample> samples;
  samples.reserve(n);
  std::map<std::string, std::string> ocr;
  const std::size_t width = std::max<std::size_t>(5, std::to_string(n).size());

  for (std::size_t i = 0; i < n; ++i) {
    Rng local(derive_seed(spec.rng_seed, i + 1));
    const std::size_t latent = uniform_index(local, k);
    std::size_t observed = latent;
    const bool lowq = low_quality[i];
    if (lowq && bernoulli(local, spec.label_noise_p)) observed = (latent + 1) % k;
    out.latent_class[i] = latent;

    Sample sample;
    sample.id = "s" + padded(i + 1, width);
    sample.image_file = "img_" + padded(i + 1, width) + ".png";
    sample.aspect = std::string(kVenues[uniform_index(local, kVenues.size())]);
    sample.text = std::string(kOpeners[uniform_index(local, kOpeners.size())]) + " " + sample.aspect + " #" +
                  std::to_string(i + 1);
    sample.label = class_label(observed, k);

    auto row = out.features.features.row(i);
    for (std::size_t d = 0; d < spec.feature_dim; ++d) {
      row[d] = static_cast<float>(centroids[latent][d] + standard_normal(local));
    }
    out.features.keys.push_back(sample.id);
    out.features.labels.emplace_back(to_string(sample.label));

    const auto shared = gaussian_vector(spec.embedding_dim, local);
    out.text_embeddings.insert(sample.id, perturbed(shared, spec.embedding_noise, local));
    out.aspect_embeddings.insert(sample.id, perturbed(shared, spec.embedding_noise, local));
    out.image_embeddings.insert(sample.image_file, lowq ? gaussian_vector(spec.embedding_dim, local)
                                                        : perturbed(shared, spec.embedding_noise, local));

    if (lowq && injected >= 0.0) {
      const auto length = static_cast<std::size_t>(std::lround(injected));
      if (length > 0) ocr[sample.image_file] = random_ocr_text(length, local);
    } else if (bernoulli(local, 0.5) && spec.clean_ocr_max > 0) {
      ocr[sample.image_file] = random_ocr_text(1 + uniform_index(local, spec.clean_ocr_max), local);
    }

    RgbImage image = procedural_image(spec.image_width, spec.image_height, local());
    if (lowq) {
      for (const auto& d : spec.degradations) image = degrade(image, d.kind, d.magnitude);
    }
    out.images.push_back(std::move(image));
    samples.push_back(std::move(sample));
  }
  out.corpus = Corpus(std::move(samples), std::move(ocr));
  return out;
}

void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / SynthLayout::images, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create " + (dir / SynthLayout::images).string() + ": " + ec.message());

  write_manifest(dir / SynthLayout::manifest, corpus.corpus.samples());
  write_file(dir / SynthLayout::ocr, format_ocr_sidecar(corpus.corpus.ocr_texts()));
  write_embeddings(dir / SynthLayout::image_embeddings, corpus.image_embeddings);
  write_embeddings(dir / SynthLayout::text_embeddings, corpus.text_embeddings);
  write_embeddings(dir / SynthLayout::aspect_embeddings, corpus.aspect_embeddings);
  write_features(dir / SynthLayout::features, corpus.features);

  std::string truth = "id\tlatent_class\tlow_quality\n";
  const auto& samples = corpus.corpus.samples();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    truth += samples[i].id + '\t' + std::to_string(corpus.latent_class[i]) + '\t' +
             (corpus.low_quality[i] ? "1" : "0") + '\n';
    write_png(dir / SynthLayout::images / samples[i].image_file, corpus.images[i]);
  }
  write_file(dir / SynthLayout::truth, truth);
}

SynthCorpus gen_corpus(const SynthSpec& spec, const std::filesystem::path& dir) {
  auto corpus = generate_corpus(spec);
  write_corpus(corpus, dir);
  return corpus;
}

}  // namespace uaweight
