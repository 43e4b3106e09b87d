#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "tourrec/error.hpp"
#include "tourrec/ffm.hpp"

using namespace tourrec;

namespace {

FfmModel hand_model() {
  FfmModel m(3, 2, 2);
  m.w0() = 0.1;
  m.w(1) = 0.2;
  m.w(2) = 0.3;
  m.v(1, 1)[0] = 0.1;
  m.v(1, 1)[1] = 0.2;
  m.v(2, 0)[0] = 0.3;
  m.v(2, 0)[1] = 0.4;
  return m;
}

std::vector<FfmExample> xor_data() {
  std::vector<FfmExample> data;
  for (int copy = 0; copy < 250; ++copy) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) data.push_back({a ^ b, {{0, a, 1.0}, {1, 2 + b, 1.0}}});
    }
  }
  return data;
}

}  // namespace

TEST(FfmParse, Lines) {
  const auto ex = parse_ffm_line("0 0:1:1 1:2:1");
  EXPECT_EQ(ex.label, 0);
  EXPECT_EQ(ex.triples, (std::vector<FfmTriple>{{0, 1, 1.0}, {1, 2, 1.0}}));
  EXPECT_TRUE(parse_ffm_line("1").triples.empty());
  try {
    parse_ffm_line("0 0:1:x");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.column(), 1u);
  }
  EXPECT_THROW(parse_ffm_line("2 0:1:1"), ParseError);
  EXPECT_THROW(parse_ffm_line("1 0:1:1 0:1:1"), ParseError);
}

TEST(FfmPredict, ZeroModel) {
  const FfmModel m(3, 2, 2);
  const auto p = ffm_predict(m, {{0, 1, 1.0}, {1, 2, 1.0}});
  EXPECT_EQ(p.raw, 0.0);
  EXPECT_EQ(p.probability, 0.5);
}

TEST(FfmPredict, HandExample) {
  const auto p = ffm_predict(hand_model(), {{0, 1, 1.0}, {1, 2, 1.0}});
  EXPECT_NEAR(p.raw, test::frozen_num("ffm", "hand_yhat"), 1e-12);
  EXPECT_NEAR(p.probability, test::frozen_num("ffm", "hand_prob"), 1e-12);
}

TEST(FfmPredict, OutOfBoundsTriple) {
  EXPECT_THROW(ffm_predict(hand_model(), {{0, 9, 1.0}}), DimensionError);
}

TEST(FfmPredict, SingleFieldEqualsFm) {
  Rng rng(5);
  const std::size_t n = 6, d = 3;
  FfmModel m(n, 1, d);
  std::vector<double> fm_v(n * d);
  m.w0() = rng.normal();
  for (std::size_t i = 0; i < n; ++i) {
    m.w(i) = rng.normal();
    for (std::size_t k = 0; k < d; ++k) m.v(i, 0)[k] = fm_v[i * d + k] = rng.normal();
  }
  const std::vector<FfmTriple> x = {{0, 0, 1.0}, {0, 2, 0.5}, {0, 3, 2.0}, {0, 5, 1.0}};
  EXPECT_NEAR(ffm_predict(m, x).raw, fm_predict(m.w0(), m.linear(), fm_v, d, x), 1e-12);
}

TEST(FfmGradient, MatchesFiniteDifferences) {
  Rng rng(21);
  for (int point = 0; point < 20; ++point) {
    FfmModel m(4, 2, 3);
    m.w0() = rng.normal();
    for (double& w : m.linear()) w = rng.normal() * 0.5;
    for (double& v : m.latent()) v = rng.normal() * 0.5;
    const FfmExample ex{static_cast<int>(rng.below(2)), {{0, 1, 1.0}, {1, 3, 1.0}}};
    const double lambda = 0.01;
    const auto g = ffm_gradient(m, ex, lambda);
    const double h = 1e-5;
    auto check = [&](double& param, double analytic) {
      const double keep = param;
      param = keep + h;
      const double up = ffm_loss(m, ex, lambda);
      param = keep - h;
      const double down = ffm_loss(m, ex, lambda);
      param = keep;
      const double numeric = (up - down) / (2 * h);
      EXPECT_LT(std::abs(numeric - analytic) / std::max(1e-8, std::abs(numeric) + std::abs(analytic)), 1e-4);
    };
    check(m.w0(), g.w0);
    for (const auto& [feature, grad] : g.w) check(m.w(feature), grad);
    for (const auto& [block, grad] : g.v) {
      for (std::size_t k = 0; k < grad.size(); ++k) check(m.latent()[block * m.d() + k], grad[k]);
    }
  }
}

TEST(FfmTrain, SeparableDegenerateCase) {
  std::vector<FfmExample> data(50, FfmExample{1, {{0, 0, 1.0}, {1, 1, 1.0}}});
  const auto r = ffm_train(data, {.d = 2, .epochs = 20});
  EXPECT_GE(ffm_predict(r.model, data[0].triples).probability, 0.9);
}

TEST(FfmTrain, XorNeedsInteractions) {
  const auto data = xor_data();
  const auto ffm = ffm_train(data, {.d = 4, .seed = 1});
  EXPECT_LT(mean_logloss(ffm.model, data), 0.2);
  const auto linear = ffm_train(data, {.d = 4, .seed = 1, .linear_only = true});
  EXPECT_GE(mean_logloss(linear.model, data), 0.69);
  EXPECT_NEAR(test::frozen_num("ffm", "xor_linear_floor"), std::log(2.0), 1e-15);
}

TEST(FfmTrain, Deterministic) {
  const auto data = xor_data();
  EXPECT_EQ(ffm_train(data, {.d = 2, .epochs = 3, .seed = 9}).model,
            ffm_train(data, {.d = 2, .epochs = 3, .seed = 9}).model);
}

TEST(FfmModel, JsonRoundTrip) {
  const auto m = hand_model();
  EXPECT_EQ(ffm_model_from_json(ffm_model_to_json(m)), m);
}

TEST(FfmEncode, ArityAndRoundTrip) {
  FfmVocab vocab;
  UserRecord u{.id = 12, .ordinal = {1, 2, 0, 3}, .nominal = {1, 0, 4, 2}};
  const auto triples = encode_example(u, 5, {}, {}, vocab);
  EXPECT_EQ(triples.size(), 10u);
  for (const auto& t : triples) EXPECT_EQ(t.value, 1.0);
  const FfmExample ex{1, triples};
  EXPECT_EQ(parse_ffm_line(format_ffm_line(ex)), ex);
  EXPECT_EQ(encode_example(u, 5, {}, {}, vocab), triples);
}

TEST(FfmEncode, FrozenVocabularySkipsUnseen) {
  FfmVocab vocab;
  UserRecord u{.id = 1};
  encode_example(u, 5, {"Golf"}, {}, vocab);
  vocab.freeze();
  const auto triples = encode_example(u, 6, {"Golf"}, {}, vocab);
  EXPECT_EQ(vocab.skipped(), 1u);
  EXPECT_EQ(triples.size(), 10u);
}

TEST(Collaborative, ZeroModelAndExclusion) {
  FfmVocab vocab;
  UserRecord u{.id = 1};
  const std::map<ItemId, std::vector<std::string>> classes = {{3, {}}, {4, {}}, {8, {}}};
  for (const auto& [id, cls] : classes) encode_example(u, id, cls, {}, vocab);
  const FfmModel zero(vocab.feature_count(), vocab.field_count(), 2);
  CollaborativeInput in{.user = &u, .candidates = {3, 4, 8}, .item_classes = &classes};
  for (const auto& s : collaborative_scores(in, zero, vocab)) EXPECT_EQ(s.score, 0.5);
  EXPECT_EQ(recommend_collaborative(in, {}, zero, vocab, 2).items(), (std::vector<ItemId>{3, 4}));
  EXPECT_EQ(recommend_collaborative(in, {3}, zero, vocab, 2).items(), (std::vector<ItemId>{4, 8}));
  EXPECT_THROW(recommend_collaborative(in, {}, FfmModel{}, vocab, 2), InvariantError);
}

TEST(Collaborative, RankingMatchesStandalonePredictor) {
  FfmVocab vocab;
  UserRecord u{.id = 1, .nominal = {1, 0, 0, 0}};
  const std::map<ItemId, std::vector<std::string>> classes = {{1, {"Golf"}}, {2, {"Beach"}}, {3, {"Golf", "Beach"}}};
  std::vector<FfmExample> data;
  for (const auto& [id, cls] : classes) data.push_back({id == 2 ? 0 : 1, encode_example(u, id, cls, {}, vocab)});
  const auto model = ffm_train(data, {.d = 2, .epochs = 10, .seed = 3}, nullptr, vocab.feature_count(),
                               vocab.field_count()).model;
  CollaborativeInput in{.user = &u, .candidates = {1, 2, 3}, .item_classes = &classes};
  ScoredItems expected;
  FfmVocab frozen = vocab;
  frozen.freeze();
  for (const auto& [id, cls] : classes) {
    expected.push_back({id, ffm_predict(model, encode_example(u, id, cls, {}, frozen)).probability});
  }
  rank(expected);
  EXPECT_EQ(recommend_collaborative(in, {}, model, vocab, 3).items(), make_reclist(expected, "x").items());
}
