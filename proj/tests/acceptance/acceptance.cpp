// Prints one PASS/FAIL line per acceptance criterion and exits non-zero when
// any of them fails. The first argument is the path of the tourrec CLI.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "tourrec/context.hpp"
#include "tourrec/demographic.hpp"
#include "tourrec/engine.hpp"
#include "tourrec/event_log.hpp"
#include "tourrec/ffm.hpp"
#include "tourrec/fixture.hpp"
#include "tourrec/metrics.hpp"
#include "tourrec/popularity.hpp"
#include "tourrec/random.hpp"

using namespace tourrec;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

EvalSet single(std::vector<ItemId> recs, std::set<ItemId> relevant, std::size_t k) {
  EvalSet s;
  s.k = k;
  s.users.push_back({.user = 1, .recs = std::move(recs), .relevant = std::move(relevant)});
  return s;
}

Outcome metric_oracles() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto& f = test::frozen()["metrics"];
  const auto worked = single({1, 2, 3}, {1, 3}, 3);
  o.require(near(map_at_k(worked, 3), f["worked_map"].get<double>(), 1e-9), "worked MAP");
  o.require(near(mar_at_k(worked, 3), f["worked_mar"].get<double>(), 1e-9), "worked MAR");
  o.require(map_at_k(single({1, 2, 3}, {1, 2, 3, 4}, 3), 3) == 1.0, "MAP all relevant");
  o.require(map_at_k(single({1, 2, 3}, {8}, 3), 3) == 0.0, "MAP none relevant");

  EvalSet cov;
  for (ItemId i = 0; i < 29; ++i) cov.train_items.insert(i);
  for (UserId u = 0; u < 4; ++u) cov.users.push_back({.user = u, .recs = {5}});
  o.require(near(coverage(cov), f["coverage_single_item"].get<double>(), 1e-9), "coverage 1/29");

  EvalSet pers;
  pers.users = {{.user = 1, .recs = {1, 2, 3, 4}}, {.user = 2, .recs = {3, 4, 5, 6}}};
  o.require(near(personalization(pers), f["personalization_overlap2"].get<double>(), 1e-9), "personalization");
  pers.users[1].recs = {1, 2, 3, 4};
  o.require(near(personalization(pers), 0.0, 1e-9), "personalization identical");
  pers.users[1].recs = {7, 8, 9, 10};
  o.require(near(personalization(pers), 1.0, 1e-9), "personalization disjoint");

  EvalSet div;
  const FeatureMatrix feats = {{1, {1, 1, 0}}, {2, {0, 1, 1}}, {3, {1, 0, 0}}, {4, {0, 0, 1}}};
  div.users = {{.user = 1, .recs = {1, 2}}};
  o.require(near(diversity(div, feats), f["diversity_shared_feature"].get<double>(), 1e-9), "diversity");
  div.users = {{.user = 1, .recs = {3, 4}}};
  o.require(near(diversity(div, feats), 1.0, 1e-9), "diversity orthogonal");
  div.users = {{.user = 1, .recs = {1, 1}}};
  o.require(near(diversity(div, feats), 0.0, 1e-9), "diversity identical");

  EvalSet nov;
  nov.users = {{.user = 1, .recs = {9}}};
  nov.consumption[9] = 1;
  nov.population = 4;
  o.require(near(novelty(nov), f["novelty_u4_count1"].get<double>(), 1e-9), "novelty 2.0");
  nov.population = 8;
  o.require(near(novelty(nov), f["novelty_u8_count1"].get<double>(), 1e-9), "novelty doubling");
  nov.consumption[9] = 8;
  o.require(near(novelty(nov), 0.0, 1e-9), "novelty consumed by all");

  const double t = seconds_since(t0);
  o.require(t < 1.0, "runtime");
  if (o.pass) o.detail = "all cases within 1e-9";
  return o;
}

Outcome map_equals_mar() {
  Outcome o;
  Rng rng(2024);
  int equal = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    EvalSet s;
    s.k = 1 + rng.below(6);
    const std::size_t users = 1 + rng.below(8);
    for (std::size_t u = 0; u < users; ++u) {
      std::vector<ItemId> pool(20);
      for (ItemId i = 0; i < 20; ++i) pool[i] = i;
      rng.shuffle(pool);
      UserEval ue{.user = static_cast<UserId>(u)};
      ue.recs.assign(pool.begin(), pool.begin() + static_cast<long>(s.k));
      rng.shuffle(pool);
      const std::size_t m = 1 + rng.below(s.k);
      ue.relevant.insert(pool.begin(), pool.begin() + static_cast<long>(m));
      s.users.push_back(std::move(ue));
    }
    const double gap = std::abs(map_at_k(s, s.k) - mar_at_k(s, s.k));
    worst = std::max(worst, gap);
    if (gap <= 1e-9) ++equal;
  }
  o.require(equal == 200, "");
  std::ostringstream d;
  d << equal << "/200 sets equal, largest gap " << worst;
  o.detail = d.str();
  return o;
}

Outcome damped_mean_suite() {
  Outcome o;
  o.require(damped_mean({}, 5.0, 3.4) == 3.4, "n=0");
  o.require(near(damped_mean({1, 2, 5}, 1e12, 3.4), 3.4, 1e-9), "k=1e12");
  o.require(near(damped_mean({4, 5}, 0.0, 3.0), 4.5, 1e-15), "k=0");
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> r(1 + rng.below(10));
    for (double& x : r) x = rng.uniform(1, 5);
    const double k = rng.uniform(0, 8), gm = rng.uniform(1, 5);
    auto raised = r;
    raised[rng.below(r.size())] += rng.uniform(0, 1);
    o.require(damped_mean(raised, k, gm) >= damped_mean(r, k, gm), "monotonicity");
  }
  if (o.pass) o.detail = "limits hold, 1000/1000 monotone";
  return o;
}

Outcome ffm_suite() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  FfmModel hand(3, 2, 2);
  hand.w0() = 0.1;
  hand.w(1) = 0.2;
  hand.w(2) = 0.3;
  hand.v(1, 1)[0] = 0.1;
  hand.v(1, 1)[1] = 0.2;
  hand.v(2, 0)[0] = 0.3;
  hand.v(2, 0)[1] = 0.4;
  const double yhat = ffm_predict(hand, {{0, 1, 1.0}, {1, 2, 1.0}}).raw;
  o.require(near(yhat, test::frozen_num("ffm", "hand_yhat"), 1e-12), "hand example");

  Rng rng(31);
  for (int point = 0; point < 20; ++point) {
    FfmModel m(4, 2, 3);
    m.w0() = rng.normal();
    for (double& w : m.linear()) w = rng.normal() * 0.5;
    for (double& v : m.latent()) v = rng.normal() * 0.5;
    const FfmExample ex{static_cast<int>(rng.below(2)), {{0, 0, 1.0}, {1, 2, 1.0}}};
    const auto g = ffm_gradient(m, ex, 0.01);
    auto check = [&](double& p, double analytic) {
      const double keep = p, h = 1e-5;
      p = keep + h;
      const double up = ffm_loss(m, ex, 0.01);
      p = keep - h;
      const double down = ffm_loss(m, ex, 0.01);
      p = keep;
      const double numeric = (up - down) / (2 * h);
      o.require(std::abs(numeric - analytic) / std::max(1e-8, std::abs(numeric) + std::abs(analytic)) < 1e-4,
                "gradient");
    };
    check(m.w0(), g.w0);
    for (const auto& [i, gi] : g.w) check(m.w(i), gi);
    for (const auto& [b, gv] : g.v) {
      for (std::size_t k = 0; k < gv.size(); ++k) check(m.latent()[b * m.d() + k], gv[k]);
    }
  }

  FfmModel single_field(5, 1, 2);
  std::vector<double> fm_v(10);
  single_field.w0() = rng.normal();
  for (std::size_t i = 0; i < 5; ++i) {
    single_field.w(i) = rng.normal();
    for (std::size_t k = 0; k < 2; ++k) single_field.v(i, 0)[k] = fm_v[i * 2 + k] = rng.normal();
  }
  const std::vector<FfmTriple> x = {{0, 0, 1.0}, {0, 1, 0.5}, {0, 4, 2.0}};
  o.require(near(ffm_predict(single_field, x).raw, fm_predict(single_field.w0(), single_field.linear(), fm_v, 2, x),
                 1e-12),
            "single-field FM equivalence");

  std::vector<FfmExample> xor_data;
  for (int c = 0; c < 250; ++c) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) xor_data.push_back({a ^ b, {{0, a, 1.0}, {1, 2 + b, 1.0}}});
    }
  }
  const double ffm_loss_xor = mean_logloss(ffm_train(xor_data, {.d = 4, .seed = 1}).model, xor_data);
  const double linear_loss = mean_logloss(ffm_train(xor_data, {.d = 4, .seed = 1, .linear_only = true}).model, xor_data);
  o.require(ffm_loss_xor < 0.2, "XOR logloss");
  o.require(linear_loss >= 0.69, "linear floor");
  const double t = seconds_since(t0);
  o.require(t < 10.0, "runtime");
  std::ostringstream d;
  d << "yhat " << yhat << ", XOR logloss " << ffm_loss_xor << " vs linear " << linear_loss << ", " << t << " s";
  if (o.pass) o.detail = d.str();
  return o;
}

Outcome kprototypes_suite() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto data = test::three_blobs(20, 500 + seed, nullptr);
    const auto m = kprototypes_fit(data, {.k = 3 + seed % 3, .seed = seed, .n_init = 1});
    for (std::size_t i = 1; i < m.cost_history.size(); ++i) {
      o.require(m.cost_history[i] <= m.cost_history[i - 1] + 1e-9, "objective increased");
    }
  }
  std::vector<std::size_t> truth;
  const auto blobs = test::three_blobs(100, 77, &truth);
  const double ari = test::adjusted_rand(truth, kprototypes_fit(blobs, {.k = 3, .seed = 1}).assignments);
  o.require(ari >= 0.9, "adjusted Rand");
  const auto k = choose_k(blobs, 1, 8, std::nullopt, 1).k;
  o.require(k == 3, "choose_k");
  const double t = seconds_since(t0);
  o.require(t < 5.0, "runtime");
  std::ostringstream d;
  d << "ARI " << ari << ", choose_k " << k << ", " << t << " s";
  if (o.pass) o.detail = d.str();
  else o.detail += " (" + d.str() + ")";
  return o;
}

struct CsvRow {
  int phase = 0;
  std::map<std::string, double> values;
};

Outcome phase_protocol(const std::string& cli) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const std::string cmd = "\"" + cli + "\" simulate --plan 98:0,98:64,198:191,250:191,1000:883";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    o.require(false, "could not start the CLI");
    return o;
  }
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int status = pclose(pipe);
  const double t = seconds_since(t0);
  o.require(status == 0, "CLI exit status");

  std::istringstream in(out);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) header.push_back(cell);
  }
  std::map<std::pair<std::string, std::string>, CsvRow> rows;
  std::vector<std::pair<std::string, int>> phases;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream r(line);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(r, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) continue;
    const std::string milestone = cells[0] + "/" + cells[1];
    CsvRow row{.phase = std::stoi(cells[2])};
    for (std::size_t i = 4; i < cells.size(); ++i) row.values[header[i]] = std::stod(cells[i]);
    if (phases.empty() || phases.back().first != milestone) phases.push_back({milestone, row.phase});
    rows[{milestone, cells[3]}] = row;
  }
  std::string seq;
  for (const auto& [m, p] : phases) seq += std::to_string(p);
  o.require(seq == "12344", "phase sequence " + seq);
  auto metric = [&](const std::string& m, const std::string& model, const std::string& name) {
    auto it = rows.find({m, model});
    return it == rows.end() ? -1.0 : it->second.values[name];
  };
  o.require(metric("198/191", "Demog", "Personalization") > metric("198/191", "Hybrid", "Personalization"),
            "198/191 personalization");
  o.require(metric("198/191", "Demog", "Coverage") > metric("198/191", "Hybrid", "Coverage"), "198/191 coverage");
  o.require(metric("1000/883", "Demog", "Coverage") > metric("1000/883", "Hybrid", "Coverage"),
            "1000/883 demographic coverage");
  o.require(metric("1000/883", "Collab", "Coverage") > metric("1000/883", "Hybrid", "Coverage"),
            "1000/883 collaborative coverage");
  o.require(metric("1000/883", "Collab", "Personalization") > metric("1000/883", "Hybrid", "Personalization"),
            "1000/883 personalization");
  o.require(t < 120.0, "runtime");
  std::ostringstream d;
  d << "phases " << seq << "; 198/191 pers " << metric("198/191", "Demog", "Personalization") << " vs "
    << metric("198/191", "Hybrid", "Personalization") << ", cov " << metric("198/191", "Demog", "Coverage") << " vs "
    << metric("198/191", "Hybrid", "Coverage") << "; 1000/883 cov " << metric("1000/883", "Demog", "Coverage") << "/"
    << metric("1000/883", "Collab", "Coverage") << " vs " << metric("1000/883", "Hybrid", "Coverage") << ", pers "
    << metric("1000/883", "Collab", "Personalization") << " vs " << metric("1000/883", "Hybrid", "Personalization")
    << "; " << t << " s";
  o.detail = o.pass ? d.str() : o.detail + " (" + d.str() + ")";
  return o;
}

Outcome content_cold_start() {
  Outcome o;
  Engine e(fixture_ontology(), {});
  Rng rng(7);
  for (UserId u = 0; u < 98; ++u) e.add_user(test::random_user(rng, u), u + 1);
  std::vector<double> sel(e.matrices().hl_labels.size(), 0.0);
  sel[*e.matrices().hl_index("Leisure")] = 1.0;
  e.set_preferences(1, sel, 100);
  o.require(e.phase() == 1, "phase");
  std::string names;
  const auto items = e.recommend(1, 5).items();
  o.require(items.size() == 5, "list length");
  for (ItemId id : items) {
    o.require(e.graph().linked_hl_classes(id) == std::vector<std::string>{"Leisure"}, "non-Leisure item");
    names += (names.empty() ? "" : "; ") + e.graph().item(id).name;
  }
  if (o.pass) o.detail = names;
  return o;
}

Outcome trickle_up() {
  Outcome o;
  Engine e(fixture_ontology(), {});
  std::vector<Event> log;
  e.set_sink([&](const Event& ev) { log.push_back(ev); });
  Rng rng(3);
  e.add_user(test::random_user(rng, 0), 1);
  e.set_preferences(0, std::vector<double>(e.matrices().hl_labels.size(), 1.0), 2);
  const auto& m = e.matrices();
  const PreferenceConfig cfg;
  for (ItemId item : {ItemId{9}, ItemId{26}}) {
    const auto prev = e.preferences(0);
    e.add_feedback({.user = 0, .item = item, .kind = FeedbackKind::dismiss, .timestamp = 3 + item});
    const auto& now = e.preferences(0);
    const auto col = *m.item_column(item);
    std::set<std::size_t> parents;
    for (std::size_t j = 0; j < m.ll_labels.size(); ++j) {
      const double expected = m.ll_item.at(j, col) ? std::max(0.0, prev.ll[j] - cfg.eta_ll) : prev.ll[j];
      o.require(near(now.ll[j], expected, 1e-12), "LL step on item " + std::to_string(item) + ", class " + m.ll_labels[j]);
      if (m.ll_item.at(j, col)) {
        for (std::size_t i = 0; i < m.hl_labels.size(); ++i) {
          if (m.hl_ll.at(i, j)) parents.insert(i);
        }
      }
    }
    for (std::size_t i = 0; i < m.hl_labels.size(); ++i) {
      const double expected = parents.contains(i) ? std::max(0.0, prev.hl[i] - cfg.eta_hl) : prev.hl[i];
      o.require(near(now.hl[i], expected, 1e-12), "HL step on item " + std::to_string(item) + ", class " + m.hl_labels[i]);
    }
  }
  const auto replayed = restore_engine(fixture_ontology(), {}, nullptr, log);
  o.require(replayed.state_json().dump() == e.state_json().dump(), "replay differs");
  if (o.pass) o.detail = "steps of -eta_ll / -eta_hl (clamped at 0) on two dismissals, replay byte-identical";
  return o;
}

Outcome context_suite() {
  Outcome o;
  const auto params = default_context_params();
  const double tau = params.classes.contains("Golf") ? params.classes.at("Golf").tau_days : params.default_tau_days;
  o.require(near(repetition_willingness("Golf", tau * kSecondsPerDay, params), 1.0 - std::exp(-1.0), 1e-12),
            "willingness at tau");
  Rng rng(123);
  const auto ll = fixture_ontology(false).ll_classes();
  for (int trial = 0; trial < 1000; ++trial) {
    ScoredItems in;
    ContextCatalog cat;
    ContextState ctx{.now = 500 * kSecondsPerDay};
    ctx.weather = static_cast<Weather>(rng.below(3));
    for (ItemId id = 0; id < 10; ++id) {
      in.push_back({id, rng.uniform()});
      cat[id].classes = {ll[rng.below(ll.size())]};
      if (rng.bernoulli(0.4)) cat[id].classes.push_back(ll[rng.below(ll.size())]);
      if (rng.bernoulli(0.5)) ctx.last_consumed[id] = ctx.now - static_cast<Timestamp>(rng.below(400 * kSecondsPerDay));
    }
    std::map<ItemId, double> before;
    for (const auto& s : in) before[s.item] = s.score;
    for (const auto& s : apply_context(in, cat, ctx, params)) o.require(s.score <= before[s.item], "score increased");
  }
  for (int trial = 0; trial < 200; ++trial) {
    ContextCatalog cat;
    std::vector<ItemId> ids;
    for (ItemId id = 0; id < 25; ++id) {
      ids.push_back(id);
      if (rng.bernoulli(0.85)) cat[id].location = GeoPoint{rng.uniform(35, 43), rng.uniform(-10, -5)};
    }
    const GeoPoint hotel{rng.uniform(35, 43), rng.uniform(-10, -5)};
    const double r = rng.uniform(5, 500);
    const auto once = location_filter(ids, cat, hotel, r);
    o.require(location_filter(once, cat, hotel, r) == once, "location filter not idempotent");
  }
  if (o.pass) o.detail = "willingness 1-1/e, 1000 score sets, 200 filter cases";
  return o;
}

Outcome event_sourcing() {
  Outcome o;
  Rng rng(555);
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const std::size_t n = 20 + rng.below(100);
    const auto log = test::random_event_log(1000 + trial, n);
    const auto full = restore_engine(fixture_ontology(), {}, nullptr, log);
    const std::size_t cut = rng.below(n + 1);
    Engine head(fixture_ontology(), {});
    head.replay({log.begin(), log.begin() + static_cast<long>(cut)});
    const Snapshot snap = decode_snapshot(encode_snapshot(head.snapshot()));
    const auto tail = restore_engine(fixture_ontology(), {}, &snap, {log.begin() + static_cast<long>(cut), log.end()});
    o.require(tail.state_json().dump() == full.state_json().dump(), "mismatch in log " + std::to_string(trial));
  }
  if (o.pass) o.detail = "100/100 logs identical";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path to tourrec CLI>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"metric oracle suite", metric_oracles},
      {"MAP@K equals MAR@K when m <= K", map_equals_mar},
      {"damped mean limits and monotonicity", damped_mean_suite},
      {"FFM correctness", ffm_suite},
      {"K-Prototypes", kprototypes_suite},
      {"phase protocol reproduction", [&] { return phase_protocol(cli); }},
      {"content cold start", content_cold_start},
      {"trickle-up and replay", trickle_up},
      {"context suite", context_suite},
      {"event-sourcing equivalence", event_sourcing},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " : " << o.detail << std::endl;
    if (!o.pass) ++failed;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
