#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tourrec/json.hpp"
#include "tourrec/reclist.hpp"
#include "tourrec/user.hpp"

namespace tourrec {

struct FfmTriple {
  int field = 0;
  int feature = 0;
  double value = 1.0;

  bool operator==(const FfmTriple&) const = default;
};

struct FfmExample {
  int label = 0;
  std::vector<FfmTriple> triples;

  bool operator==(const FfmExample&) const = default;
};

/// "label field:feature:value ..." with any whitespace between columns.
/// Errors carry the 0-based column (0 is the label).
FfmExample parse_ffm_line(std::string_view text);
std::string format_ffm_line(const FfmExample& example);
std::vector<FfmExample> parse_ffm_file(std::string_view text);

class FfmModel {
 public:
  FfmModel() = default;
  FfmModel(std::size_t n_features, std::size_t n_fields, std::size_t d);

  std::size_t n_features() const { return n_features_; }
  std::size_t n_fields() const { return n_fields_; }
  std::size_t d() const { return d_; }

  double& w0() { return w0_; }
  double w0() const { return w0_; }
  double& w(std::size_t feature) { return w_[feature]; }
  double w(std::size_t feature) const { return w_[feature]; }
  /// Latent vector of a feature when paired with a feature of the given field.
  double* v(std::size_t feature, std::size_t field) { return &v_[(feature * n_fields_ + field) * d_]; }
  const double* v(std::size_t feature, std::size_t field) const { return &v_[(feature * n_fields_ + field) * d_]; }

  std::vector<double>& linear() { return w_; }
  std::vector<double>& latent() { return v_; }
  const std::vector<double>& linear() const { return w_; }
  const std::vector<double>& latent() const { return v_; }

  /// Throws DimensionError naming the offending triple.
  void check(const std::vector<FfmTriple>& triples) const;

  bool operator==(const FfmModel&) const = default;

 private:
  std::size_t n_features_ = 0;
  std::size_t n_fields_ = 0;
  std::size_t d_ = 1;
  double w0_ = 0.0;
  std::vector<double> w_;
  std::vector<double> v_;
};

json ffm_model_to_json(const FfmModel& model);
FfmModel ffm_model_from_json(const json& value);
void save_ffm_model(const FfmModel& model, const std::string& path);
FfmModel load_ffm_model(const std::string& path);

struct FfmPrediction {
  double raw = 0.0;
  double probability = 0.5;
};

double sigmoid(double x);

/// w0 + sum w_i x_i + sum_{i<j} <v_{i,f(j)}, v_{j,f(i)}> x_i x_j.
FfmPrediction ffm_predict(const FfmModel& model, const std::vector<FfmTriple>& triples);

/// Standard factorization machine with one latent vector per feature
/// (row-major n_features x d), evaluated by the O(n d) identity.
double fm_predict(double w0, const std::vector<double>& w, const std::vector<double>& v, std::size_t d,
                  const std::vector<FfmTriple>& triples);

/// Logistic loss of one example plus lambda / 2 times the squared norm of the
/// linear weights and latent blocks the example touches.
double ffm_loss(const FfmModel& model, const FfmExample& example, double lambda);

struct FfmGradient {
  double w0 = 0.0;
  std::map<std::size_t, double> w;
  /// Keyed by latent block index feature * n_fields + field.
  std::map<std::size_t, std::vector<double>> v;
};

/// Analytic gradient of ffm_loss.
FfmGradient ffm_gradient(const FfmModel& model, const FfmExample& example, double lambda);

struct TrainConfig {
  std::size_t d = 8;
  double eta = 0.1;
  double lambda = 1e-5;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  double init_scale = 0.1;
  std::size_t patience = 3;
  /// Freeze latent vectors at zero (plain logistic regression).
  bool linear_only = false;

  void validate() const;
};

struct TrainResult {
  FfmModel model;
  std::vector<double> train_loss;
  std::vector<double> valid_loss;
  bool stopped_early = false;
};

/// Mean logistic loss (no regularization).
double mean_logloss(const FfmModel& model, const std::vector<FfmExample>& data);

/// Per-example adaptive-step SGD on the regularized logistic loss. Dimensions
/// are taken from the largest indices in the data (and validation set).
/// Deterministic for a fixed seed.
TrainResult ffm_train(const std::vector<FfmExample>& data, const TrainConfig& cfg,
                      const std::vector<FfmExample>* validation = nullptr, std::size_t min_features = 0,
                      std::size_t min_fields = 0);

/// Field and feature ids for encoded attributes. Grows append-only until frozen.
class FfmVocab {
 public:
  int field(const std::string& name);
  /// Feature id for "name=level" inside the named field, or nullopt when the
  /// vocabulary is frozen and the pair is unseen (counted in skipped()).
  std::optional<FfmTriple> triple(const std::string& name, const std::string& level, double value = 1.0);

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  std::size_t field_count() const { return fields_.size(); }
  std::size_t feature_count() const { return features_.size(); }
  std::size_t skipped() const { return skipped_; }

  json to_json() const;
  static FfmVocab from_json(const json& v);
  bool operator==(const FfmVocab& o) const { return fields_ == o.fields_ && features_ == o.features_; }

 private:
  std::map<std::string, int> fields_;
  std::map<std::string, int> features_;
  bool frozen_ = false;
  std::size_t skipped_ = 0;
};

/// One-hot triples for user id, the eight demographics, item id, each item
/// class and each context attribute.
std::vector<FfmTriple> encode_example(const UserRecord& user, ItemId item, const std::vector<std::string>& item_classes,
                                      const std::map<std::string, std::string>& context, FfmVocab& vocab);

struct CollaborativeInput {
  const UserRecord* user = nullptr;
  std::vector<ItemId> candidates;
  /// Item -> LL class labels.
  const std::map<ItemId, std::vector<std::string>>* item_classes = nullptr;
  std::map<std::string, std::string> context;
};

/// Probability for every candidate under a frozen copy of the vocabulary.
ScoredItems collaborative_scores(const CollaborativeInput& input, const FfmModel& model, const FfmVocab& vocab);

/// Top-n candidates by predicted probability, excluding consumed items.
RecList recommend_collaborative(const CollaborativeInput& input, const std::set<ItemId>& consumed,
                                const FfmModel& model, const FfmVocab& vocab, std::size_t n);

}  // namespace tourrec
