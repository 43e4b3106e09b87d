#include "tourrec/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "tourrec/error.hpp"

namespace tourrec {

PrecisionRecall precision_recall_at_k(const std::vector<ItemId>& list, const std::set<ItemId>& relevant,
                                      std::size_t k) {
  if (k == 0) throw InvariantError("k must be at least 1");
  PrecisionRecall out;
  if (relevant.empty()) {
    out.flagged = true;
    return out;
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k && i < list.size(); ++i) hits += relevant.contains(list[i]) ? 1 : 0;
  out.precision = static_cast<double>(hits) / static_cast<double>(k);
  out.recall = static_cast<double>(hits) / static_cast<double>(relevant.size());
  return out;
}

namespace {

template <class Term>
double average_over_users(const EvalSet& set, std::size_t k, Term term) {
  if (set.users.empty()) throw InvariantError("evaluation needs at least one user");
  if (k == 0) throw InvariantError("k must be at least 1");
  double total = 0.0;
  for (const auto& u : set.users) {
    if (u.relevant.empty()) continue;
    const std::size_t m = u.relevant.size();
    std::size_t hits = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < k && i < u.recs.size(); ++i) {
      if (!u.relevant.contains(u.recs[i])) continue;
      ++hits;
      sum += term(hits, i + 1, m);
    }
    total += sum;
  }
  return total / static_cast<double>(set.users.size());
}

}  // namespace

double map_at_k(const EvalSet& set, std::size_t k) {
  return average_over_users(set, k, [k](std::size_t hits, std::size_t pos, std::size_t m) {
    const double precision = static_cast<double>(hits) / static_cast<double>(pos);
    return precision / static_cast<double>(std::min(m, k));
  });
}

double mar_at_k(const EvalSet& set, std::size_t k) {
  return average_over_users(set, k, [](std::size_t hits, std::size_t, std::size_t m) {
    const double recall = static_cast<double>(hits) / static_cast<double>(m);
    return recall / static_cast<double>(m);
  });
}

double coverage(const EvalSet& set) {
  if (set.train_items.empty()) throw InvariantError("coverage needs a nonempty training item set");
  std::set<ItemId> seen;
  for (const auto& u : set.users) {
    for (ItemId i : u.recs) {
      if (set.train_items.contains(i)) seen.insert(i);
    }
  }
  return static_cast<double>(seen.size()) / static_cast<double>(set.train_items.size());
}

double personalization(const EvalSet& set) {
  const std::size_t n = set.users.size();
  if (n < 2) throw InvariantError("personalization needs at least two users");
  std::vector<std::set<ItemId>> lists;
  lists.reserve(n);
  for (const auto& u : set.users) lists.emplace_back(u.recs.begin(), u.recs.end());
  double total = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (lists[a].empty() || lists[b].empty()) continue;
      std::size_t overlap = 0;
      for (ItemId i : lists[a]) overlap += lists[b].contains(i) ? 1 : 0;
      total += static_cast<double>(overlap) /
               std::sqrt(static_cast<double>(lists[a].size()) * static_cast<double>(lists[b].size()));
    }
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return 1.0 - total / pairs;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionError("feature vectors differ in length");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

double diversity(const EvalSet& set, const FeatureMatrix& features, std::size_t* single_item_lists) {
  if (set.users.empty()) throw InvariantError("evaluation needs at least one user");
  std::size_t singles = 0;
  double ils_total = 0.0;
  for (const auto& u : set.users) {
    if (u.recs.size() < 2) {
      ++singles;
      continue;
    }
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < u.recs.size(); ++a) {
      auto fa = features.find(u.recs[a]);
      if (fa == features.end()) throw InvariantError("no features for item " + std::to_string(u.recs[a]));
      for (std::size_t b = a + 1; b < u.recs.size(); ++b) {
        auto fb = features.find(u.recs[b]);
        if (fb == features.end()) throw InvariantError("no features for item " + std::to_string(u.recs[b]));
        sum += cosine_similarity(fa->second, fb->second);
        ++pairs;
      }
    }
    ils_total += sum / static_cast<double>(pairs);
  }
  if (single_item_lists) *single_item_lists = singles;
  return 1.0 - ils_total / static_cast<double>(set.users.size());
}

double novelty(const EvalSet& set) {
  const std::size_t population = set.population > 0 ? set.population : set.users.size();
  if (population == 0 || set.users.empty()) throw InvariantError("novelty needs at least one user");
  double total = 0.0;
  for (const auto& u : set.users) {
    if (u.recs.empty()) continue;
    double sum = 0.0;
    for (ItemId i : u.recs) {
      auto it = set.consumption.find(i);
      const double count = it == set.consumption.end() || it->second == 0 ? 1.0 : static_cast<double>(it->second);
      sum += -std::log2(count / static_cast<double>(population));
    }
    total += sum / static_cast<double>(u.recs.size());
  }
  return total / static_cast<double>(set.users.size());
}

EvalReport evaluate(const EvalSet& set, const std::string& model) {
  EvalReport r;
  r.model = model;
  r.users = set.users.size();
  if (set.users.empty()) throw InvariantError("evaluation needs at least one user");
  for (const auto& u : set.users) r.users_without_relevant += u.relevant.empty() ? 1 : 0;
  if (r.users_without_relevant > 0) r.flags.push_back("users_without_relevant");
  r.map_at_k = map_at_k(set, set.k);
  r.mar_at_k = mar_at_k(set, set.k);
  if (!set.train_items.empty()) {
    r.coverage = coverage(set);
  } else {
    r.flags.push_back("coverage_undefined");
  }
  if (set.users.size() >= 2) {
    r.personalization = personalization(set);
  } else {
    r.flags.push_back("personalization_undefined");
  }
  if (!set.features_hl.empty()) {
    r.diversity_hl = diversity(set, set.features_hl, &r.single_item_lists);
  } else {
    r.flags.push_back("diversity_hl_undefined");
  }
  if (!set.features_ll.empty()) {
    r.diversity_ll = diversity(set, set.features_ll, &r.single_item_lists);
  } else {
    r.flags.push_back("diversity_ll_undefined");
  }
  if (r.single_item_lists > 0) r.flags.push_back("single_item_lists");
  r.novelty = novelty(set);
  return r;
}

std::string report_csv_row(const EvalReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), ",%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f", r.map_at_k, r.mar_at_k, r.coverage,
                r.personalization, r.diversity_hl, r.diversity_ll, r.novelty);
  return r.model + buf;
}

json report_to_json(const EvalReport& r) {
  return {{"model", r.model},
          {"map_at_k", r.map_at_k},
          {"mar_at_k", r.mar_at_k},
          {"coverage", r.coverage},
          {"personalization", r.personalization},
          {"diversity_hl", r.diversity_hl},
          {"diversity_ll", r.diversity_ll},
          {"novelty", r.novelty},
          {"users", r.users},
          {"users_without_relevant", r.users_without_relevant},
          {"single_item_lists", r.single_item_lists},
          {"flags", r.flags}};
}

}  // namespace tourrec
