#include "tourrec/ffm.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "tourrec/error.hpp"
#include "tourrec/random.hpp"

namespace tourrec {

namespace {

std::vector<std::string_view> split_ws(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logloss(double raw, int label) { return label == 1 ? softplus(-raw) : softplus(raw); }

}  // namespace

FfmExample parse_ffm_line(std::string_view text) {
  const auto cols = split_ws(text);
  if (cols.empty()) throw ParseError("empty example: column 0 (label) missing", 0, 0);
  FfmExample ex;
  if (cols[0] == "0") {
    ex.label = 0;
  } else if (cols[0] == "1") {
    ex.label = 1;
  } else {
    throw ParseError("label in column 0 must be 0 or 1, got '" + std::string(cols[0]) + "'", 0, 0);
  }
  std::set<std::pair<int, int>> seen;
  for (std::size_t c = 1; c < cols.size(); ++c) {
    const std::string_view col = cols[c];
    const std::size_t a = col.find(':');
    const std::size_t b = a == std::string_view::npos ? a : col.find(':', a + 1);
    FfmTriple t;
    if (b == std::string_view::npos || col.find(':', b + 1) != std::string_view::npos ||
        !parse_number(col.substr(0, a), t.field) || !parse_number(col.substr(a + 1, b - a - 1), t.feature)) {
      throw ParseError("malformed triple '" + std::string(col) + "'", 0, c);
    }
    const std::string value(col.substr(b + 1));
    try {
      std::size_t used = 0;
      t.value = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw ParseError("malformed value in triple '" + std::string(col) + "'", 0, c);
    }
    if (t.field < 0 || t.feature < 0) throw ParseError("negative index in '" + std::string(col) + "'", 0, c);
    if (!std::isfinite(t.value)) throw ParseError("non-finite value in '" + std::string(col) + "'", 0, c);
    if (!seen.insert({t.field, t.feature}).second) {
      throw ParseError("duplicate field/feature pair '" + std::string(col) + "'", 0, c);
    }
    ex.triples.push_back(t);
  }
  return ex;
}

std::string format_ffm_line(const FfmExample& ex) {
  std::string out = std::to_string(ex.label);
  for (const auto& t : ex.triples) {
    out += ' ';
    out += std::to_string(t.field) + ':' + std::to_string(t.feature) + ':' + format_double(t.value);
  }
  return out;
}

std::vector<FfmExample> parse_ffm_file(std::string_view text) {
  std::vector<FfmExample> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (split_ws(line).empty()) continue;
    try {
      out.push_back(parse_ffm_line(line));
    } catch (const ParseError& e) {
      std::string msg = e.what();
      throw ParseError(msg, line_no, e.column());
    }
  }
  return out;
}

FfmModel::FfmModel(std::size_t n_features, std::size_t n_fields, std::size_t d)
    : n_features_(n_features),
      n_fields_(n_fields),
      d_(d),
      w_(n_features, 0.0),
      v_(n_features * n_fields * d, 0.0) {
  if (d == 0) throw InvariantError("latent dimension must be at least 1");
}

void FfmModel::check(const std::vector<FfmTriple>& triples) const {
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& t = triples[i];
    if (t.field < 0 || static_cast<std::size_t>(t.field) >= n_fields_ || t.feature < 0 ||
        static_cast<std::size_t>(t.feature) >= n_features_) {
      throw DimensionError("triple " + std::to_string(i) + " (" + std::to_string(t.field) + ":" +
                           std::to_string(t.feature) + ") outside model with " + std::to_string(n_fields_) +
                           " fields and " + std::to_string(n_features_) + " features");
    }
  }
}

json ffm_model_to_json(const FfmModel& m) {
  return {{"format", "tourrec-ffm"}, {"version", 1},       {"n_features", m.n_features()},
          {"n_fields", m.n_fields()}, {"d", m.d()},         {"w0", m.w0()},
          {"w", m.linear()},          {"v", m.latent()}};
}

FfmModel ffm_model_from_json(const json& v) {
  if (v.value("format", std::string{}) != "tourrec-ffm" || v.value("version", 0) != 1) {
    throw InvariantError("not a version 1 FFM model");
  }
  FfmModel m(v.at("n_features").get<std::size_t>(), v.at("n_fields").get<std::size_t>(), v.at("d").get<std::size_t>());
  m.w0() = v.at("w0").get<double>();
  auto w = v.at("w").get<std::vector<double>>();
  auto lat = v.at("v").get<std::vector<double>>();
  if (w.size() != m.linear().size() || lat.size() != m.latent().size()) {
    throw DimensionError("FFM parameter arrays do not match the header dimensions");
  }
  m.linear() = std::move(w);
  m.latent() = std::move(lat);
  return m;
}

void save_ffm_model(const FfmModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << ffm_model_to_json(model).dump() << '\n';
}

FfmModel load_ffm_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return ffm_model_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

FfmPrediction ffm_predict(const FfmModel& model, const std::vector<FfmTriple>& triples) {
  model.check(triples);
  const std::size_t d = model.d();
  double raw = model.w0();
  for (const auto& t : triples) raw += model.w(t.feature) * t.value;
  for (std::size_t a = 0; a < triples.size(); ++a) {
    const auto& ta = triples[a];
    for (std::size_t b = a + 1; b < triples.size(); ++b) {
      const auto& tb = triples[b];
      const double* va = model.v(ta.feature, tb.field);
      const double* vb = model.v(tb.feature, ta.field);
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += va[k] * vb[k];
      raw += dot * ta.value * tb.value;
    }
  }
  return {raw, sigmoid(raw)};
}

double fm_predict(double w0, const std::vector<double>& w, const std::vector<double>& v, std::size_t d,
                  const std::vector<FfmTriple>& triples) {
  double raw = w0;
  for (const auto& t : triples) raw += w.at(t.feature) * t.value;
  for (std::size_t k = 0; k < d; ++k) {
    double sum = 0.0;
    double sq = 0.0;
    for (const auto& t : triples) {
      const double x = v.at(static_cast<std::size_t>(t.feature) * d + k) * t.value;
      sum += x;
      sq += x * x;
    }
    raw += 0.5 * (sum * sum - sq);
  }
  return raw;
}

namespace {

std::set<std::size_t> touched_blocks(const FfmModel& model, const std::vector<FfmTriple>& triples) {
  std::set<std::size_t> blocks;
  for (std::size_t a = 0; a < triples.size(); ++a) {
    for (std::size_t b = a + 1; b < triples.size(); ++b) {
      blocks.insert(static_cast<std::size_t>(triples[a].feature) * model.n_fields() + triples[b].field);
      blocks.insert(static_cast<std::size_t>(triples[b].feature) * model.n_fields() + triples[a].field);
    }
  }
  return blocks;
}

}  // namespace

double ffm_loss(const FfmModel& model, const FfmExample& example, double lambda) {
  const FfmPrediction p = ffm_predict(model, example.triples);
  double reg = 0.0;
  std::set<int> features;
  for (const auto& t : example.triples) features.insert(t.feature);
  for (int f : features) reg += model.w(f) * model.w(f);
  for (std::size_t block : touched_blocks(model, example.triples)) {
    const double* v = model.latent().data() + block * model.d();
    for (std::size_t k = 0; k < model.d(); ++k) reg += v[k] * v[k];
  }
  return logloss(p.raw, example.label) + 0.5 * lambda * reg;
}

FfmGradient ffm_gradient(const FfmModel& model, const FfmExample& example, double lambda) {
  const FfmPrediction p = ffm_predict(model, example.triples);
  const double g = p.probability - static_cast<double>(example.label);
  const std::size_t d = model.d();
  const auto& tr = example.triples;

  FfmGradient grad;
  grad.w0 = g;
  for (const auto& t : tr) grad.w[t.feature] += g * t.value;
  for (auto& [f, value] : grad.w) value += lambda * model.w(f);

  for (std::size_t a = 0; a < tr.size(); ++a) {
    for (std::size_t b = a + 1; b < tr.size(); ++b) {
      const std::size_t block_a = static_cast<std::size_t>(tr[a].feature) * model.n_fields() + tr[b].field;
      const std::size_t block_b = static_cast<std::size_t>(tr[b].feature) * model.n_fields() + tr[a].field;
      const double* va = model.latent().data() + block_a * d;
      const double* vb = model.latent().data() + block_b * d;
      const double xx = g * tr[a].value * tr[b].value;
      auto& ga = grad.v[block_a];
      auto& gb = grad.v[block_b];
      ga.resize(d, 0.0);
      gb.resize(d, 0.0);
      for (std::size_t k = 0; k < d; ++k) {
        ga[k] += xx * vb[k];
        gb[k] += xx * va[k];
      }
    }
  }
  for (auto& [block, gv] : grad.v) {
    const double* v = model.latent().data() + block * d;
    for (std::size_t k = 0; k < d; ++k) gv[k] += lambda * v[k];
  }
  return grad;
}

void TrainConfig::validate() const {
  if (!(eta > 0.0)) throw InvariantError("learning rate must be positive");
  if (lambda < 0.0) throw InvariantError("lambda must be nonnegative");
  if (epochs < 1) throw InvariantError("epochs must be at least 1");
  if (d < 1) throw InvariantError("latent dimension must be at least 1");
  if (init_scale < 0.0) throw InvariantError("init scale must be nonnegative");
}

double mean_logloss(const FfmModel& model, const std::vector<FfmExample>& data) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ex : data) total += logloss(ffm_predict(model, ex.triples).raw, ex.label);
  return total / static_cast<double>(data.size());
}

TrainResult ffm_train(const std::vector<FfmExample>& data, const TrainConfig& cfg,
                      const std::vector<FfmExample>* validation, std::size_t min_features, std::size_t min_fields) {
  cfg.validate();
  if (data.empty()) throw InvariantError("cannot train on an empty data set");

  std::size_t n_features = min_features;
  std::size_t n_fields = min_fields;
  auto grow = [&](const std::vector<FfmExample>& set) {
    for (const auto& ex : set) {
      for (const auto& t : ex.triples) {
        n_features = std::max(n_features, static_cast<std::size_t>(t.feature) + 1);
        n_fields = std::max(n_fields, static_cast<std::size_t>(t.field) + 1);
      }
    }
  };
  grow(data);
  if (validation) grow(*validation);

  TrainResult result;
  FfmModel model(n_features, n_fields, cfg.d);
  Rng rng(mix_seed(cfg.seed, 0x66666d));
  if (!cfg.linear_only) {
    const double hi = cfg.init_scale / std::sqrt(static_cast<double>(cfg.d));
    for (double& x : model.latent()) x = rng.uniform(0.0, hi);
  }

  // Accumulated squared gradients start at 1.
  double g2_w0 = 1.0;
  std::vector<double> g2_w(model.linear().size(), 1.0);
  std::vector<double> g2_v(model.latent().size(), 1.0);

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  FfmModel best = model;
  double best_valid = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      const FfmExample& ex = data[idx];
      const FfmGradient grad = ffm_gradient(model, ex, cfg.lambda);
      g2_w0 += grad.w0 * grad.w0;
      model.w0() -= cfg.eta * grad.w0 / std::sqrt(g2_w0);
      for (const auto& [f, g] : grad.w) {
        g2_w[f] += g * g;
        model.w(f) -= cfg.eta * g / std::sqrt(g2_w[f]);
      }
      if (cfg.linear_only) continue;
      for (const auto& [block, gv] : grad.v) {
        double* v = model.latent().data() + block * cfg.d;
        double* g2 = g2_v.data() + block * cfg.d;
        for (std::size_t k = 0; k < cfg.d; ++k) {
          g2[k] += gv[k] * gv[k];
          v[k] -= cfg.eta * gv[k] / std::sqrt(g2[k]);
        }
      }
    }
    const double loss = mean_logloss(model, data);
    if (!std::isfinite(loss)) {
      throw Error("training diverged at epoch " + std::to_string(epoch + 1) + "; lower the learning rate");
    }
    result.train_loss.push_back(loss);
    if (validation && !validation->empty()) {
      const double vloss = mean_logloss(model, *validation);
      result.valid_loss.push_back(vloss);
      if (vloss < best_valid) {
        best_valid = vloss;
        best = model;
        since_best = 0;
      } else if (++since_best > cfg.patience) {
        result.stopped_early = true;
        break;
      }
    }
  }
  result.model = validation && !validation->empty() ? std::move(best) : std::move(model);
  return result;
}

int FfmVocab::field(const std::string& name) {
  auto it = fields_.find(name);
  if (it != fields_.end()) return it->second;
  if (frozen_) return -1;
  const int id = static_cast<int>(fields_.size());
  fields_.emplace(name, id);
  return id;
}

std::optional<FfmTriple> FfmVocab::triple(const std::string& name, const std::string& level, double value) {
  const int f = field(name);
  const std::string key = name + "=" + level;
  auto it = features_.find(key);
  if (f < 0 || (it == features_.end() && frozen_)) {
    ++skipped_;
    return std::nullopt;
  }
  if (it == features_.end()) it = features_.emplace(key, static_cast<int>(features_.size())).first;
  return FfmTriple{f, it->second, value};
}

json FfmVocab::to_json() const { return {{"fields", fields_}, {"features", features_}}; }

FfmVocab FfmVocab::from_json(const json& v) {
  FfmVocab vocab;
  vocab.fields_ = v.at("fields").get<std::map<std::string, int>>();
  vocab.features_ = v.at("features").get<std::map<std::string, int>>();
  return vocab;
}

std::vector<FfmTriple> encode_example(const UserRecord& user, ItemId item, const std::vector<std::string>& item_classes,
                                      const std::map<std::string, std::string>& context, FfmVocab& vocab) {
  std::vector<FfmTriple> out;
  auto push = [&](const std::string& name, const std::string& level) {
    if (auto t = vocab.triple(name, level)) out.push_back(*t);
  };
  push("user_id", std::to_string(user.id));
  for (std::size_t a = 0; a < kOrdinalCount; ++a) {
    push(std::string(ordinal_name(static_cast<Ordinal>(a))), std::to_string(user.ordinal[a]));
  }
  for (std::size_t a = 0; a < kNominalCount; ++a) {
    push(std::string(nominal_name(static_cast<Nominal>(a))), std::to_string(user.nominal[a]));
  }
  push("item_id", std::to_string(item));
  for (const auto& c : std::set<std::string>(item_classes.begin(), item_classes.end())) push("item_class", c);
  for (const auto& [name, level] : context) push("ctx_" + name, level);
  return out;
}

ScoredItems collaborative_scores(const CollaborativeInput& input, const FfmModel& model, const FfmVocab& vocab) {
  if (model.n_features() == 0) throw InvariantError("collaborative model is not trained");
  if (!input.user) throw InvariantError("collaborative scoring needs a user");
  FfmVocab frozen = vocab;
  frozen.freeze();
  ScoredItems out;
  out.reserve(input.candidates.size());
  static const std::vector<std::string> kNoClasses;
  for (ItemId item : input.candidates) {
    const std::vector<std::string>* classes = &kNoClasses;
    if (input.item_classes) {
      if (auto it = input.item_classes->find(item); it != input.item_classes->end()) classes = &it->second;
    }
    auto triples = encode_example(*input.user, item, *classes, input.context, frozen);
    // Features learned after the model was trained are unknown to it.
    std::erase_if(triples, [&](const FfmTriple& t) {
      return static_cast<std::size_t>(t.feature) >= model.n_features() ||
             static_cast<std::size_t>(t.field) >= model.n_fields();
    });
    out.push_back({item, ffm_predict(model, triples).probability});
  }
  return out;
}

RecList recommend_collaborative(const CollaborativeInput& input, const std::set<ItemId>& consumed,
                                const FfmModel& model, const FfmVocab& vocab, std::size_t n) {
  CollaborativeInput filtered = input;
  std::erase_if(filtered.candidates, [&](ItemId id) { return consumed.contains(id); });
  return make_reclist(top_n(collaborative_scores(filtered, model, vocab), n), "collaborative");
}

}  // namespace tourrec
