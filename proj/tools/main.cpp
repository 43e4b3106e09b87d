#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "tourrec/binning.hpp"
#include "tourrec/engine.hpp"
#include "tourrec/error.hpp"
#include "tourrec/event_log.hpp"
#include "tourrec/fixture.hpp"
#include "tourrec/metrics.hpp"
#include "tourrec/service.hpp"
#include "tourrec/simulation.hpp"
#include "tourrec/synthetic.hpp"

using namespace tourrec;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInvariant = 3;

struct Common {
  std::string fixtures = TOURREC_DEFAULT_FIXTURE_DIR;
  std::string config;
  std::uint64_t seed = 7;
  bool deterministic = false;
};

std::string fixture_path(const Common& c, const std::string& name) {
  return (std::filesystem::path(c.fixtures) / name).string();
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

EngineConfig engine_config(const Common& c) {
  EngineConfig cfg = c.config.empty() ? EngineConfig{} : load_engine_config_file(c.config);
  if (c.config.empty()) cfg.seed = c.seed;
  return cfg;
}

OntologyGraph base_ontology(const Common& c, const std::string& path) {
  return load_ontology_file(path.empty() ? fixture_path(c, "ontology.txt") : path);
}

// Rows of "key,item[,...]" CSV files with a header line.
std::vector<std::vector<std::string>> read_csv_rows(const std::string& path, std::size_t columns) {
  std::istringstream in(read_text(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && !std::isdigit(static_cast<unsigned char>(line[0])) && line[0] != '-') continue;
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != columns) {
      throw ParseError(path + ": expected " + std::to_string(columns) + " columns", line_no);
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

long long to_int(const std::string& s, const std::string& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(path + ": '" + s + "' is not an integer", line);
  }
}

int cmd_gen_data(const Common& c, std::size_t users, const std::string& out_dir, const std::string& items_path,
                 double sparsity, double sigma) {
  GenConfig gen;
  gen.n_users = users;
  gen.seed = c.seed;
  gen.coefficients = default_coefficients(c.seed);
  gen.sparsity = sparsity;
  gen.sigma = sigma;
  const auto catalog = load_items_file(items_path.empty() ? fixture_path(c, "table4.jsonl") : items_path);
  const auto user_rows = gen_users(gen);
  const auto prefs = gen_latent_prefs(user_rows, gen);
  const auto ratings = gen_ratings(user_rows, prefs, catalog, gen);
  std::filesystem::create_directories(out_dir);
  const auto dir = std::filesystem::path(out_dir);
  write_text((dir / "users.csv").string(), users_to_csv(user_rows));
  write_text((dir / "preferences.csv").string(), prefs_to_csv(prefs));
  write_text((dir / "ratings.csv").string(), ratings_to_csv(ratings));
  write_text((dir / "ratings_matrix.csv").string(), dense_matrix_csv(user_rows, catalog, ratings));
  std::cout << "users " << user_rows.size() << "\nitems " << catalog.size() << "\nratings " << ratings.size()
            << "\nwrote users.csv preferences.csv ratings.csv ratings_matrix.csv to " << out_dir << "\n";
  return 0;
}

int cmd_bin_items(const Common& c, const std::string& items_path, const std::string& ontology_path,
                  const std::string& vectors_path, const std::string& stopwords_path, double threshold,
                  const std::string& report_path) {
  const OntologyGraph full = base_ontology(c, ontology_path);
  OntologyGraph graph;
  for (const auto& hl : full.hl_classes()) graph.add_hl_class(hl);
  for (const auto& [hl, ll] : full.hl_ll_edges()) graph.add_ll_class(ll, hl);
  VectorTable table = load_vector_table_file(vectors_path.empty() ? fixture_path(c, "vectors_toy.txt") : vectors_path);
  load_stopwords_file(table, stopwords_path.empty() ? fixture_path(c, "stopwords.txt") : stopwords_path);
  BinningConfig cfg;
  cfg.threshold = threshold;
  cfg.validate();

  const auto items = load_items_file(items_path);
  json report = json::array();
  std::size_t linked = 0;
  for (const auto& item : items) {
    const BinResult r = bin_item(item, graph, table, cfg);
    json links = json::array();
    std::cout << item.id << "\t";
    for (std::size_t j = 0; j < r.links.size(); ++j) {
      links.push_back({{"class", r.links[j].ll_class}, {"score", r.links[j].score}});
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%s%s:%.3f", j ? ", " : "", r.links[j].ll_class.c_str(), r.links[j].score);
      std::cout << buf;
    }
    if (r.links.empty()) std::cout << "(unlinked" << (r.diagnostic.empty() ? "" : ": " + r.diagnostic) << ")";
    std::cout << "\t" << item.name << "\n";
    if (!r.links.empty()) ++linked;
    report.push_back({{"id", item.id}, {"name", item.name}, {"links", links}, {"oov", r.oov},
                      {"diagnostic", r.diagnostic}});
  }
  std::cout << "items " << items.size() << "\nlinked " << linked << "\nunlinked " << items.size() - linked << "\n";
  if (!report_path.empty()) write_text(report_path, report.dump(2) + "\n");
  return 0;
}

int cmd_simulate(const Common& c, const std::string& plan_text, std::size_t k, const std::string& out_dir) {
  SimulationPlan plan = default_plan();
  if (!plan_text.empty()) plan.milestones = parse_milestones(plan_text);
  plan.seed = c.seed;
  plan.k = k;
  GenConfig gen;
  gen.coefficients = default_coefficients(c.seed);
  const SimulationResult result = run_simulation(plan, engine_config(c), gen);
  std::cout << combined_csv(result);
  if (!out_dir.empty()) {
    for (const auto& p : write_simulation_outputs(result, out_dir)) std::cerr << "wrote " << p << "\n";
  }
  return 0;
}

int cmd_evaluate(const std::string& recs_path, const std::string& truth_path, std::size_t k,
                 const std::string& items_path) {
  std::map<UserId, std::map<long long, ItemId>> ranked;
  std::size_t line = 1;
  for (const auto& row : read_csv_rows(recs_path, 3)) {
    ++line;
    const UserId u = to_int(row[0], recs_path, line);
    const long long r = to_int(row[1], recs_path, line);
    if (!ranked[u].emplace(r, to_int(row[2], recs_path, line)).second) {
      throw ParseError(recs_path + ": duplicate rank " + row[1] + " for user " + row[0], line);
    }
  }
  std::map<UserId, std::set<ItemId>> truth;
  line = 1;
  for (const auto& row : read_csv_rows(truth_path, 2)) {
    ++line;
    truth[to_int(row[0], truth_path, line)].insert(to_int(row[1], truth_path, line));
  }
  EvalSet set;
  set.k = k;
  std::set<UserId> all_users;
  for (const auto& [u, _] : ranked) all_users.insert(u);
  for (const auto& [u, _] : truth) all_users.insert(u);
  for (UserId u : all_users) {
    UserEval ue;
    ue.user = u;
    for (const auto& [r, item] : ranked[u]) ue.recs.push_back(item);
    ue.relevant = truth[u];
    for (ItemId i : ue.recs) set.train_items.insert(i);
    for (ItemId i : ue.relevant) set.train_items.insert(i);
    set.users.push_back(std::move(ue));
  }
  if (!items_path.empty()) {
    OntologyGraph graph = fixture_ontology(false);
    for (const auto& item : load_items_file(items_path)) graph.add_item(item);
    const ContentMatrices m = content_matrices(graph);
    set.train_items.clear();
    for (ItemId id : m.item_ids) {
      set.train_items.insert(id);
      std::vector<double> hl(m.hl_labels.size(), 0.0);
      std::vector<double> ll(m.ll_labels.size(), 0.0);
      for (const auto& cls : graph.linked_hl_classes(id)) hl[*m.hl_index(cls)] = 1.0;
      for (const auto& cls : graph.linked_classes(id)) ll[*m.ll_index(cls)] = 1.0;
      set.features_hl[id] = hl;
      set.features_ll[id] = ll;
    }
  }
  for (const auto& ue : set.users) {
    for (ItemId i : ue.relevant) set.consumption[i] += 1;
  }
  const EvalReport r = evaluate(set, "input");
  auto print = [](const std::string& name, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    std::cout << name << "\t" << buf << "\n";
  };
  const std::string ks = std::to_string(k);
  print("MAP@" + ks, r.map_at_k);
  print("MAR@" + ks, r.mar_at_k);
  print("Coverage", r.coverage);
  print("Personalization", r.personalization);
  if (!items_path.empty()) {
    print("Diversity HL", r.diversity_hl);
    print("Diversity LL", r.diversity_ll);
  }
  print("Novelty", r.novelty);
  std::cout << "users\t" << r.users << "\nusers_without_relevant\t" << r.users_without_relevant << "\n";
  for (const auto& f : r.flags) std::cout << "flag\t" << f << "\n";
  return 0;
}

Engine restore_from_files(const Common& c, const std::string& log_path, const std::string& snapshot_path,
                          const std::string& ontology_path) {
  const OntologyGraph base = base_ontology(c, ontology_path);
  const EngineConfig cfg = engine_config(c);
  std::vector<Event> events;
  if (!log_path.empty() && std::filesystem::exists(log_path)) events = read_event_log(log_path);
  if (!snapshot_path.empty() && std::filesystem::exists(snapshot_path)) {
    const Snapshot s = read_snapshot_file(snapshot_path);
    return restore_engine(base, cfg, &s, events);
  }
  return restore_engine(base, cfg, nullptr, events);
}

int cmd_replay(const Common& c, const std::string& log_path, const std::string& snapshot_path,
               const std::string& write_snapshot, const std::string& ontology_path) {
  Engine engine = restore_from_files(c, log_path, snapshot_path, ontology_path);
  const MaturityStats s = engine.stats();
  const std::string state = engine.state_json().dump();
  char crc[16];
  std::snprintf(crc, sizeof(crc), "%08x", crc32_of(state));
  json summary = {{"high_water", engine.high_water()}, {"phase", engine.phase()},  {"users", s.users},
                  {"ratings", s.ratings},              {"items", s.items},         {"density", s.density()},
                  {"state_crc32", crc}};
  std::cout << summary.dump(2) << "\n";
  if (!write_snapshot.empty()) write_snapshot_file(write_snapshot, engine.snapshot());
  return 0;
}

int cmd_serve(const Common& c, const std::string& host, int port, const std::string& log_path,
              const std::string& snapshot_path, const std::string& api_key, const std::string& ontology_path,
              bool no_fsync) {
  Engine engine = restore_from_files(c, log_path, snapshot_path, ontology_path);
  std::unique_ptr<EventLogWriter> writer;
  if (!log_path.empty()) {
    writer = std::make_unique<EventLogWriter>(log_path, !no_fsync);
    engine.set_sink([&writer](const Event& e) { writer->append(e); });
  }
  VectorTable table = load_vector_table_file(fixture_path(c, "vectors_toy.txt"));
  load_stopwords_file(table, fixture_path(c, "stopwords.txt"));
  ServiceConfig sc;
  sc.api_key = api_key;
  sc.deterministic = c.deterministic;
  Service service(engine, sc, &table);
  std::cerr << "tourrec serving on http://" << host << ":" << port << " (events " << engine.high_water() << ", phase "
            << engine.phase() << ")\n";
  run_http_server(service, host, port);
  return 0;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Random seed")->envname("TOURREC_SEED");
  app->add_option("--config", c.config, "Engine configuration JSON")->check(CLI::ExistingFile);
  app->add_option("--fixtures", c.fixtures, "Directory holding ontology, items and vectors")
      ->envname("TOURREC_FIXTURES");
  app->add_flag("--deterministic", c.deterministic, "Derive timestamps from sequence numbers");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tourrec: context-aware tourism recommender"};
  app.require_subcommand(1);
  Common common;

  auto* gen = app.add_subcommand("gen-data", "Generate synthetic users, preferences and ratings");
  std::size_t gen_users_n = 98;
  std::string gen_out = "data";
  std::string gen_items;
  double gen_sparsity = 0.0225;
  double gen_sigma = 0.5;
  add_common(gen, common);
  gen->add_option("--users", gen_users_n, "Number of users")->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out, "Output directory");
  gen->add_option("--items", gen_items, "Items JSONL (default: fixture catalog)");
  gen->add_option("--sparsity", gen_sparsity, "Probability that a user/item pair is rated");
  gen->add_option("--sigma", gen_sigma, "Rating noise standard deviation");
  gen->footer(
      "Examples:\n"
      "  tourrec gen-data --users 98 --seed 7 --out data\n"
      "  tourrec gen-data --users 1000 --sparsity 0.03 --out big\n"
      "  tourrec gen-data --users 50 --sigma 0 --items my_items.jsonl --out noiseless\n");

  auto* bin = app.add_subcommand("bin-items", "Link items to low-level classes by description similarity");
  std::string bin_items_path;
  std::string bin_ontology;
  std::string bin_vectors;
  std::string bin_stopwords;
  std::string bin_report;
  double bin_threshold = kDefaultBinningThreshold;
  add_common(bin, common);
  bin->add_option("--items", bin_items_path, "Items JSONL")->required()->check(CLI::ExistingFile);
  bin->add_option("--ontology", bin_ontology, "Ontology document (default: fixture)");
  bin->add_option("--vectors", bin_vectors, "Word vectors in word2vec text format");
  bin->add_option("--stopwords", bin_stopwords, "Stopword list");
  bin->add_option("--threshold", bin_threshold, "Cosine threshold for a link");
  bin->add_option("--out", bin_report, "Write the link report as JSON");
  bin->footer(
      "Examples:\n"
      "  tourrec bin-items --items fixtures/table4.jsonl\n"
      "  tourrec bin-items --items new.jsonl --threshold 0.6 --out links.json\n"
      "  tourrec bin-items --items new.jsonl --vectors glove.txt --stopwords stop.txt\n");

  auto* sim = app.add_subcommand("simulate", "Run the phased growth simulation and write metric tables");
  std::string sim_plan;
  std::string sim_out;
  std::size_t sim_k = 5;
  add_common(sim, common);
  sim->add_option("--plan", sim_plan, "Milestones as users:ratings,... (default 98:0,98:64,198:191,250:191,1000:883)");
  sim->add_option("--k", sim_k, "List length and metric cut-off")->check(CLI::PositiveNumber);
  sim->add_option("--out", sim_out, "Directory for the CSV tables");
  sim->footer(
      "Examples:\n"
      "  tourrec simulate --out results\n"
      "  tourrec simulate --plan 98:0 --k 5\n"
      "  tourrec simulate --seed 11 --config engine.json --deterministic --out run11\n");

  auto* ev = app.add_subcommand("evaluate", "Score recommendation lists against held-out relevance");
  std::string ev_recs;
  std::string ev_truth;
  std::string ev_items;
  std::size_t ev_k = 5;
  ev->add_option("--recs", ev_recs, "CSV userid,rank,itemid")->required()->check(CLI::ExistingFile);
  ev->add_option("--truth", ev_truth, "CSV userid,itemid of relevant items")->required()->check(CLI::ExistingFile);
  ev->add_option("--k", ev_k, "Cut-off")->check(CLI::PositiveNumber);
  ev->add_option("--items", ev_items, "Items JSONL; enables the diversity metrics")->check(CLI::ExistingFile);
  ev->footer(
      "Examples:\n"
      "  tourrec evaluate --recs r.csv --truth t.csv --k 3\n"
      "  tourrec evaluate --recs r.csv --truth t.csv --k 5 --items fixtures/table4.jsonl\n"
      "  tourrec evaluate --recs lists/hybrid.csv --truth heldout.csv\n");

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API over an event log");
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  std::string serve_log;
  std::string serve_snapshot;
  std::string serve_key;
  std::string serve_ontology;
  bool serve_no_fsync = false;
  add_common(serve, common);
  serve->add_option("--host", serve_host, "Bind address")->envname("TOURREC_HOST");
  serve->add_option("--port", serve_port, "Port")->envname("TOURREC_PORT");
  serve->add_option("--log", serve_log, "Event log path (replayed on start, appended to)")->envname("TOURREC_LOG");
  serve->add_option("--snapshot", serve_snapshot, "Snapshot to start from")->envname("TOURREC_SNAPSHOT");
  serve->add_option("--api-key", serve_key, "Require this X-API-Key header")->envname("TOURREC_API_KEY");
  serve->add_option("--ontology", serve_ontology, "Ontology document (default: fixture)");
  serve->add_flag("--no-fsync", serve_no_fsync, "Skip fsync after each appended event");
  serve->footer(
      "Examples:\n"
      "  tourrec serve --port 8080 --log events.log\n"
      "  tourrec serve --log events.log --snapshot state.snap --api-key secret\n"
      "  TOURREC_PORT=9000 tourrec serve --deterministic --log /tmp/demo.log\n");

  auto* rep = app.add_subcommand("replay", "Rebuild engine state from an event log");
  std::string rep_log;
  std::string rep_snapshot;
  std::string rep_write;
  std::string rep_ontology;
  add_common(rep, common);
  rep->add_option("--log", rep_log, "Event log")->required()->check(CLI::ExistingFile);
  rep->add_option("--snapshot", rep_snapshot, "Start from this snapshot and replay the tail");
  rep->add_option("--write-snapshot", rep_write, "Write a snapshot of the replayed state");
  rep->add_option("--ontology", rep_ontology, "Ontology document (default: fixture)");
  rep->footer(
      "Examples:\n"
      "  tourrec replay --log events.log\n"
      "  tourrec replay --log events.log --write-snapshot state.snap\n"
      "  tourrec replay --log events.log --snapshot state.snap\n");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(common, gen_users_n, gen_out, gen_items, gen_sparsity, gen_sigma);
    if (bin->parsed()) {
      return cmd_bin_items(common, bin_items_path, bin_ontology, bin_vectors, bin_stopwords, bin_threshold, bin_report);
    }
    if (sim->parsed()) return cmd_simulate(common, sim_plan, sim_k, sim_out);
    if (ev->parsed()) return cmd_evaluate(ev_recs, ev_truth, ev_k, ev_items);
    if (serve->parsed()) {
      return cmd_serve(common, serve_host, serve_port, serve_log, serve_snapshot, serve_key, serve_ontology,
                       serve_no_fsync);
    }
    if (rep->parsed()) return cmd_replay(common, rep_log, rep_snapshot, rep_write, rep_ontology);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const NotFoundError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const DimensionError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const ConflictError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
