#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "uaweight/error.hpp"
#include "uaweight/random.hpp"
#include "uaweight/text_io.hpp"
#include "uaweight/trainer.hpp"

using namespace uaweight;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::IoFailure;
}

struct Blobs {
  Matrix x;
  std::vector<std::size_t> y;
};

// k Gaussian blobs of unit variance around centres spaced `gap` apart on a line.
Blobs blobs(std::size_t n, std::size_t dim, std::size_t k, double gap, std::uint64_t seed) {
  Rng rng(seed);
  Blobs b{Matrix(n, dim), std::vector<std::size_t>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    b.y[i] = i % k;
    for (std::size_t d = 0; d < dim; ++d) b.x(i, d) = standard_normal(rng);
    b.x(i, 0) += gap * static_cast<double>(b.y[i]);
  }
  return b;
}

const std::vector<std::string> kTwo{"negative", "positive"};
const std::vector<std::string> kThree{"negative", "neutral", "positive"};

// Model whose prediction for a one-hot row e_j is class j.
LinearModel echo_model(std::size_t k) {
  LinearModel m{std::vector<std::string>(kThree.begin(), kThree.begin() + static_cast<long>(k)), Matrix(k, k),
                std::vector<double>(k, 0.0)};
  for (std::size_t c = 0; c < k; ++c) m.weights(c, c) = 1.0;
  return m;
}

Matrix one_hot_rows(const std::vector<std::size_t>& preds, std::size_t k) {
  Matrix x(preds.size(), k);
  for (std::size_t i = 0; i < preds.size(); ++i) x(i, preds[i]) = 1.0;
  return x;
}

}  // namespace

TEST(Train, SeparableBlobs) {
  const auto b = blobs(400, 2, 2, 8.0, 1);  // margin 4 sigma on each side
  const std::vector<double> w(400, 1.0);
  const auto out = train(b.x, b.y, w, kTwo, TrainConfig{});
  EXPECT_GE(evaluate(out.model, b.x, b.y).accuracy, 0.99);
  EXPECT_LE(out.objective_history.back(), out.objective_history.front());
  EXPECT_EQ(out.objective_history.size(), TrainConfig{}.epochs + 1);
}

TEST(Train, ZeroEpochsReturnsInitialization) {
  const auto b = blobs(30, 3, 3, 2.0, 2);
  TrainConfig cfg;
  cfg.epochs = 0;
  const auto out = train(b.x, b.y, std::vector<double>(30, 1.0), kThree, cfg);
  for (double v : out.model.weights.data()) EXPECT_EQ(v, 0.0);
  for (double v : out.model.bias) EXPECT_EQ(v, 0.0);
  ASSERT_EQ(out.objective_history.size(), 1u);
  EXPECT_NEAR(out.objective_history[0], std::log(3.0), 1e-15);
}

TEST(Train, WeightScalingIsAbsorbedByLearningRate) {
  const auto b = blobs(90, 4, 3, 1.5, 3);
  Rng rng(10);
  std::vector<double> w(90);
  for (auto& v : w) v = 0.05 + uniform01(rng);
  TrainConfig cfg;
  cfg.l2_reg = 0.0;
  cfg.epochs = 30;
  cfg.batch_size = 8;
  cfg.rng_seed = 4;
  const auto base = train(b.x, b.y, w, kThree, cfg);
  for (double c : {0.25, 2.0, 10.0}) {
    std::vector<double> scaled = w;
    for (auto& v : scaled) v *= c;
    TrainConfig scfg = cfg;
    scfg.learning_rate = cfg.learning_rate / c;
    const auto other = train(b.x, b.y, scaled, kThree, scfg);
    for (std::size_t i = 0; i < base.model.weights.data().size(); ++i) {
      EXPECT_NEAR(other.model.weights.data()[i], base.model.weights.data()[i], 1e-9);
    }
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(other.model.bias[k], base.model.bias[k], 1e-9);
    for (std::size_t e = 0; e < base.objective_history.size(); ++e) {
      EXPECT_NEAR(other.objective_history[e] / c, base.objective_history[e], 1e-9);
    }
  }
}

TEST(Train, DeterministicGivenSeed) {
  const auto b = blobs(100, 5, 3, 1.0, 5);
  const std::vector<double> w(100, 0.7);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.rng_seed = 17;
  const auto a = train(b.x, b.y, w, kThree, cfg);
  const auto again = train(b.x, b.y, w, kThree, cfg);
  EXPECT_EQ(a.model, again.model);
  EXPECT_EQ(a.objective_history, again.objective_history);
  cfg.rng_seed = 18;
  EXPECT_NE(train(b.x, b.y, w, kThree, cfg).model, a.model);
}

TEST(Train, ObjectiveMatchesHistory) {
  const auto b = blobs(64, 3, 2, 1.0, 6);
  const std::vector<double> w(64, 0.5);
  TrainConfig cfg;
  cfg.epochs = 5;
  const auto out = train(b.x, b.y, w, kTwo, cfg);
  EXPECT_DOUBLE_EQ(training_objective(out.model, b.x, b.y, w, cfg.l2_reg), out.objective_history.back());
}

TEST(Train, Errors) {
  const auto b = blobs(10, 2, 2, 1.0, 7);
  const std::vector<double> ones(10, 1.0);
  const std::vector<std::size_t> same(10, 1);
  EXPECT_EQ(code_of([&] { train(b.x, same, ones, kTwo, TrainConfig{}); }), ErrorCode::DegenerateData);
  EXPECT_EQ(code_of([&] { train(b.x, b.y, std::vector<double>(9, 1.0), kTwo, TrainConfig{}); }),
            ErrorCode::ShapeMismatch);
  std::vector<double> neg = ones;
  neg[3] = -1.0;
  EXPECT_EQ(code_of([&] { train(b.x, b.y, neg, kTwo, TrainConfig{}); }), ErrorCode::NegativeWeight);
  TrainConfig bad;
  bad.learning_rate = 0.0;
  EXPECT_EQ(code_of([&] { train(b.x, b.y, ones, kTwo, bad); }), ErrorCode::InvalidConfig);
}

TEST(Evaluate, PerfectPredictions) {
  const std::vector<std::size_t> y{0, 1, 2, 2, 1, 0};
  const auto r = evaluate(echo_model(3), one_hot_rows(y, 3), y);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.macro_f1, 1.0);
}

TEST(Evaluate, AllClassZeroOnBalancedSet) {
  const std::vector<std::size_t> y{0, 1, 0, 1};
  const auto r = evaluate(echo_model(2), one_hot_rows({0, 0, 0, 0}, 2), y);
  EXPECT_EQ(r.accuracy, 0.5);
  EXPECT_NEAR(r.per_class_f1[0], 2.0 / 3.0, 1e-15);
  EXPECT_EQ(r.per_class_f1[1], 0.0);
  EXPECT_NEAR(r.macro_f1, 1.0 / 3.0, 1e-15);
}

TEST(Evaluate, RandomInstanceMatchesConfusionOracle) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 60);
    std::vector<std::size_t> y(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = uniform_index(rng, 3);
      pred[i] = uniform01(rng) < 0.5 ? y[i] : uniform_index(rng, 3);
    }
    std::size_t cm[3][3] = {};
    for (std::size_t i = 0; i < n; ++i) ++cm[y[i]][pred[i]];
    double correct = 0.0, f1_sum = 0.0;
    std::vector<double> f1(3);
    for (int c = 0; c < 3; ++c) {
      correct += static_cast<double>(cm[c][c]);
      double tp = cm[c][c], pred_c = 0, true_c = 0;
      for (int j = 0; j < 3; ++j) {
        pred_c += cm[j][c];
        true_c += cm[c][j];
      }
      const double p = pred_c > 0 ? tp / pred_c : -1.0, r = true_c > 0 ? tp / true_c : -1.0;
      f1[c] = (p < 0 || r < 0 || p + r == 0) ? 0.0 : 2 * p * r / (p + r);
      f1_sum += f1[c];
    }
    const auto rep = evaluate(echo_model(3), one_hot_rows(pred, 3), y);
    EXPECT_NEAR(rep.accuracy, correct / static_cast<double>(n), 1e-15);
    for (int c = 0; c < 3; ++c) {
      EXPECT_NEAR(rep.per_class_f1[c], f1[c], 1e-15);
      for (int j = 0; j < 3; ++j) EXPECT_EQ(rep.confusion[c][j], cm[c][j]);
    }
    EXPECT_NEAR(rep.macro_f1, f1_sum / 3.0, 1e-15);
    EXPECT_GE(rep.macro_f1, 0.0);
    EXPECT_LE(rep.macro_f1, 1.0);
    bool diagonal = true;
    for (int c = 0; c < 3; ++c)
      for (int j = 0; j < 3; ++j) diagonal = diagonal && (c == j || cm[c][j] == 0);
    // Macro-F1 over all classes reaches 1 only when every class is present and perfectly predicted.
    bool all_present = true;
    for (int c = 0; c < 3; ++c) all_present = all_present && cm[c][c] > 0;
    EXPECT_EQ(rep.macro_f1 == 1.0, diagonal && all_present);
  }
}

TEST(Experiment, AllOnesWeightsGiveZeroDelta) {
  const auto tr = blobs(120, 4, 3, 1.5, 11), te = blobs(60, 4, 3, 1.5, 12);
  TrainConfig cfg;
  cfg.epochs = 10;
  const auto r = run_experiment(tr.x, tr.y, std::vector<double>(120, 1.0), te.x, te.y, kThree, cfg);
  EXPECT_EQ(r.delta_accuracy, 0.0);
  EXPECT_EQ(r.delta_macro_f1, 0.0);
  EXPECT_EQ(r.weighted, r.unweighted);
}

TEST(Experiment, RepeatedRunIsByteIdentical) {
  const auto tr = blobs(120, 4, 3, 1.0, 13), te = blobs(60, 4, 3, 1.0, 14);
  Rng rng(1);
  std::vector<double> w(120);
  for (auto& v : w) v = 0.05 + uniform01(rng);
  TrainConfig cfg;
  cfg.epochs = 15;
  const auto a = format_experiment_report(run_experiment(tr.x, tr.y, w, te.x, te.y, kThree, cfg));
  const auto b = format_experiment_report(run_experiment(tr.x, tr.y, w, te.x, te.y, kThree, cfg));
  EXPECT_EQ(a, b);
}

TEST(ModelFile, RoundTripIsExact) {
  const auto b = blobs(60, 3, 3, 2.0, 15);
  TrainConfig cfg;
  cfg.epochs = 7;
  const auto model = train(b.x, b.y, std::vector<double>(60, 1.0), kThree, cfg).model;
  testkit::TempDir dir;
  save_model(dir / "m.json", model);
  const auto back = load_model(dir / "m.json");
  EXPECT_EQ(back, model);
  EXPECT_EQ(format_model(back), read_file(dir / "m.json"));
  EXPECT_EQ(code_of([] { parse_model("{\"classes\":[\"a\"]}"); }), ErrorCode::MalformedSidecar);
}

TEST(FeatureFile, RoundTripAndErrors) {
  const std::string text =
      "{\"key\":\"s1\",\"vec\":[0.5,-1,2],\"label\":\"positive\"}\n"
      "{\"key\":\"s2\",\"vec\":[1e-3,0,3.25],\"label\":\"negative\"}\n";
  const auto set = parse_features(text);
  ASSERT_EQ(set.size(), 2u);
  EXPECT_EQ(set.features.cols(), 3u);
  EXPECT_EQ(set.features(1, 0), static_cast<double>(1e-3f));
  EXPECT_EQ(parse_features(format_features(set)).features, set.features);
  EXPECT_EQ(format_features(parse_features(format_features(set))), format_features(set));

  const auto tail = set.slice(1, 2);
  EXPECT_EQ(tail.keys, std::vector<std::string>{"s2"});
  EXPECT_EQ(tail.features(0, 2), 3.25);

  EXPECT_EQ(code_of([] { parse_features("{\"key\":\"a\",\"vec\":[1],\"label\":\"x\"}\n"
                                        "{\"key\":\"b\",\"vec\":[1,2],\"label\":\"x\"}\n"); }),
            ErrorCode::DimMismatch);
  EXPECT_EQ(code_of([] { parse_features("{\"key\":\"a\",\"vec\":[1],\"label\":\"x\"}\n"
                                        "{\"key\":\"a\",\"vec\":[2],\"label\":\"y\"}\n"); }),
            ErrorCode::DuplicateId);
  EXPECT_EQ(code_of([] { parse_features("{\"key\":\"a\"}\n"); }), ErrorCode::MalformedSidecar);
}

TEST(Labels, ClassListAndEncoding) {
  const std::vector<std::string> labels{"positive", "negative", "positive", "neutral"};
  const auto classes = class_list(labels);
  EXPECT_EQ(classes, kThree);
  EXPECT_EQ(encode_labels(labels, classes), (std::vector<std::size_t>{2, 0, 2, 1}));
  EXPECT_EQ(code_of([&] { encode_labels(std::vector<std::string>{"mixed"}, classes); }), ErrorCode::UnknownLabel);
}
