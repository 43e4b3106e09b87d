#include "tourrec/preferences.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tourrec/error.hpp"

namespace tourrec {

namespace {

void check_size(const std::vector<double>& v, std::size_t expected, const char* name) {
  if (v.size() != expected) {
    throw DimensionError(std::string(name) + " vector has " + std::to_string(v.size()) + " components, ontology has " +
                         std::to_string(expected));
  }
}

void max_normalize(std::vector<double>& v) {
  double top = 0.0;
  for (double x : v) top = std::max(top, x);
  if (top > 0.0) {
    for (double& x : v) x /= top;
  }
}

bool all_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

std::string to_string(FeedbackKind kind) {
  switch (kind) {
    case FeedbackKind::book: return "book";
    case FeedbackKind::bookmark: return "bookmark";
    case FeedbackKind::dismiss: return "dismiss";
    case FeedbackKind::rate: return "rate";
  }
  return "unknown";
}

FeedbackKind feedback_kind_from_string(const std::string& name) {
  if (name == "book") return FeedbackKind::book;
  if (name == "bookmark") return FeedbackKind::bookmark;
  if (name == "dismiss") return FeedbackKind::dismiss;
  if (name == "rate") return FeedbackKind::rate;
  throw InvariantError("unknown feedback kind '" + name + "'");
}

void FeedbackEvent::validate() const {
  if (kind == FeedbackKind::rate) {
    if (!rating) throw InvariantError("rate feedback requires a rating");
    if (!(*rating >= 0.0 && *rating <= 5.0)) throw InvariantError("rating must lie in [0, 5]");
  } else if (rating) {
    throw InvariantError("only rate feedback carries a rating");
  }
}

json feedback_to_json(const FeedbackEvent& event) {
  json out = {{"user", event.user}, {"item", event.item}, {"kind", to_string(event.kind)},
              {"timestamp", event.timestamp}};
  if (event.rating) out["rating"] = *event.rating;
  return out;
}

FeedbackEvent feedback_from_json(const json& value) {
  FeedbackEvent e;
  e.user = value.at("user").get<UserId>();
  e.item = value.at("item").get<ItemId>();
  e.kind = feedback_kind_from_string(value.at("kind").get<std::string>());
  if (value.contains("rating") && !value["rating"].is_null()) e.rating = value["rating"].get<double>();
  e.timestamp = value.value("timestamp", Timestamp{0});
  e.validate();
  return e;
}

double rating_signal(double rating) { return (rating - 3.0) / 2.0; }

double feedback_signal(const FeedbackEvent& event) {
  switch (event.kind) {
    case FeedbackKind::book: return kSignalBook;
    case FeedbackKind::bookmark: return kSignalBookmark;
    case FeedbackKind::dismiss: return kSignalDismiss;
    case FeedbackKind::rate: return rating_signal(event.rating.value_or(3.0));
  }
  return 0.0;
}

void PreferenceConfig::validate() const {
  if (eta_ll < 0.0 || eta_hl < 0.0) throw InvariantError("learning rates must be nonnegative");
  if (w_hl < 0.0 || w_ll < 0.0 || std::abs(w_hl + w_ll - 1.0) > 1e-9) {
    throw InvariantError("content weights must be nonnegative and sum to 1");
  }
}

json preferences_to_json(const PreferenceState& s) {
  return {{"user", s.user},         {"hl", s.hl},
          {"ll", s.ll},             {"item", s.item},
          {"last_updated", s.last_updated}, {"feedback_count", s.feedback_count},
          {"fallback", s.fallback}};
}

PreferenceState preferences_from_json(const json& v) {
  PreferenceState s;
  s.user = v.at("user").get<UserId>();
  s.hl = v.at("hl").get<std::vector<double>>();
  s.ll = v.at("ll").get<std::vector<double>>();
  s.item = v.at("item").get<std::vector<double>>();
  s.last_updated = v.at("last_updated").get<Timestamp>();
  s.feedback_count = v.at("feedback_count").get<std::size_t>();
  s.fallback = v.at("fallback").get<bool>();
  return s;
}

std::vector<double> item_scores_from_ll(const std::vector<double>& ll, const ContentMatrices& m) {
  check_size(ll, m.ll_labels.size(), "low-level preference");
  const std::size_t items = m.item_ids.size();
  std::vector<double> out(items, 0.0);
  for (std::size_t k = 0; k < items; ++k) {
    double sum = 0.0;
    std::size_t links = 0;
    for (std::size_t j = 0; j < ll.size(); ++j) {
      if (m.ll_item.at(j, k)) {
        sum += ll[j];
        ++links;
      }
    }
    if (links > 0) out[k] = sum / static_cast<double>(links);
  }
  max_normalize(out);
  return out;
}

std::vector<double> ll_from_hl(const std::vector<double>& hl, const ContentMatrices& m) {
  check_size(hl, m.hl_labels.size(), "high-level preference");
  std::vector<double> ll(m.ll_labels.size(), 0.0);
  for (std::size_t i = 0; i < hl.size(); ++i) {
    if (hl[i] == 0.0) continue;
    for (std::size_t j = 0; j < ll.size(); ++j) {
      if (m.hl_ll.at(i, j)) ll[j] += hl[i];
    }
  }
  max_normalize(ll);
  return ll;
}

PreferenceState init_preferences(UserId user, const std::vector<double>& hl_selection, const ContentMatrices& m,
                                 const PreferenceConfig& cfg, Timestamp now) {
  check_size(hl_selection, m.hl_labels.size(), "high-level selection");
  for (double x : hl_selection) {
    if (x != 0.0 && x != 1.0) throw InvariantError("high-level selection entries must be 0 or 1");
  }
  PreferenceState state;
  state.user = user;
  state.hl = hl_selection;
  state.last_updated = now;
  propagate_down(state, m, cfg);
  return state;
}

void propagate_down(PreferenceState& state, const ContentMatrices& m, const PreferenceConfig& cfg) {
  state.ll = ll_from_hl(state.hl, m);
  state.fallback = all_zero(state.ll);
  if (state.fallback) std::fill(state.ll.begin(), state.ll.end(), cfg.fallback_ll);
  refresh_item_cache(state, m);
}

void refresh_item_cache(PreferenceState& state, const ContentMatrices& m) {
  state.item = item_scores_from_ll(state.ll, m);
}

ScoredItems content_scores(const PreferenceState& state, const ContentMatrices& m, const PreferenceConfig& cfg) {
  check_size(state.hl, m.hl_labels.size(), "high-level preference");
  check_size(state.ll, m.ll_labels.size(), "low-level preference");
  const double w_hl = state.feedback_count == 0 ? 1.0 : cfg.w_hl;
  const double w_ll = state.feedback_count == 0 ? 0.0 : cfg.w_ll;

  std::vector<double> via_hl_ll = ll_from_hl(state.hl, m);
  if (all_zero(via_hl_ll)) std::fill(via_hl_ll.begin(), via_hl_ll.end(), cfg.fallback_ll);
  const std::vector<double> via_hl = item_scores_from_ll(via_hl_ll, m);
  const std::vector<double> via_ll = w_ll > 0.0 ? item_scores_from_ll(state.ll, m) : std::vector<double>(via_hl.size());

  ScoredItems out;
  out.reserve(m.item_ids.size());
  for (std::size_t k = 0; k < m.item_ids.size(); ++k) {
    out.push_back({m.item_ids[k], w_hl * via_hl[k] + w_ll * via_ll[k]});
  }
  return out;
}

RecList recommend_content(const PreferenceState& state, const ContentMatrices& m, std::size_t n,
                          const PreferenceConfig& cfg) {
  RecList list = make_reclist(top_n(content_scores(state, m, cfg), n), "content");
  if (state.fallback) list.flags.push_back("fallback");
  return list;
}

PreferenceState apply_feedback(PreferenceState state, const FeedbackEvent& event, const ContentMatrices& m,
                               const PreferenceConfig& cfg) {
  event.validate();
  if (event.user != state.user) {
    throw InvariantError("feedback for user " + std::to_string(event.user) + " applied to user " +
                         std::to_string(state.user));
  }
  const auto column = m.item_column(event.item);
  if (!column) throw NotFoundError("unknown item " + std::to_string(event.item));
  check_size(state.hl, m.hl_labels.size(), "high-level preference");
  check_size(state.ll, m.ll_labels.size(), "low-level preference");

  const double f = feedback_signal(event);
  std::set<std::size_t> parents;
  for (std::size_t j = 0; j < m.ll_labels.size(); ++j) {
    if (!m.ll_item.at(j, *column)) continue;
    state.ll[j] = clamp01(state.ll[j] + cfg.eta_ll * f);
    for (std::size_t i = 0; i < m.hl_labels.size(); ++i) {
      if (m.hl_ll.at(i, j)) parents.insert(i);
    }
  }
  for (std::size_t i : parents) state.hl[i] = clamp01(state.hl[i] + cfg.eta_hl * f);

  state.fallback = false;
  state.feedback_count += 1;
  state.last_updated = std::max(state.last_updated, event.timestamp);
  refresh_item_cache(state, m);
  return state;
}

}  // namespace tourrec
