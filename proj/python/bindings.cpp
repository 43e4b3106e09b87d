#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tourrec/context.hpp"
#include "tourrec/demographic.hpp"
#include "tourrec/engine.hpp"
#include "tourrec/error.hpp"
#include "tourrec/ffm.hpp"
#include "tourrec/fixture.hpp"
#include "tourrec/metrics.hpp"
#include "tourrec/popularity.hpp"
#include "tourrec/simulation.hpp"

namespace py = pybind11;
using namespace tourrec;

namespace {

json to_json(const py::object& obj) {
  const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return json::parse(text);
}

py::object from_json(const json& v) { return py::module_::import("json").attr("loads")(v.dump()); }

class PyEngine {
 public:
  explicit PyEngine(const py::object& config)
      : engine_(fixture_ontology(true), config.is_none() ? EngineConfig{} : engine_config_from_json(to_json(config))) {}

  UserId add_user(const py::dict& user) {
    json u = to_json(user);
    if (!u.contains("id")) u["id"] = engine_.next_user_id();
    const UserRecord rec = user_from_json(u);
    engine_.add_user(rec);
    return rec.id;
  }

  void set_preferences(UserId user, const std::vector<std::string>& classes) {
    const auto& labels = engine_.matrices().hl_labels;
    std::vector<double> hl(labels.size(), 0.0);
    for (const auto& c : classes) {
      auto it = std::find(labels.begin(), labels.end(), c);
      if (it == labels.end()) throw InvariantError("unknown high-level class '" + c + "'");
      hl[static_cast<std::size_t>(it - labels.begin())] = 1.0;
    }
    engine_.set_preferences(user, hl);
  }

  void feedback(UserId user, ItemId item, const std::string& kind, std::optional<double> rating, Timestamp ts) {
    engine_.add_feedback({user, item, feedback_kind_from_string(kind), rating, ts});
  }

  void rate(UserId user, ItemId item, double rating, Timestamp ts) { engine_.add_rating({user, item, rating, ts}); }

  py::object recommend(UserId user, std::size_t n, std::optional<std::string> weather) {
    ContextState ctx;
    if (weather) ctx.weather = weather_from_string(*weather);
    return from_json(reclist_to_json(engine_.recommend(user, n, ctx)));
  }

  py::object profile(UserId user) const { return from_json(engine_.profile(user)); }
  std::string state() const { return engine_.state_json().dump(); }
  int phase() const { return engine_.phase(); }
  std::uint64_t high_water() const { return engine_.high_water(); }

 private:
  Engine engine_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "tourrec recommender core";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<InvariantError>(m, "InvariantError", PyExc_ValueError);
  py::register_exception<NotFoundError>(m, "NotFoundError", PyExc_KeyError);
  py::register_exception<ConflictError>(m, "ConflictError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

  m.def("damped_mean", py::overload_cast<const std::vector<double>&, double, double>(&damped_mean),
        py::arg("ratings"), py::arg("k"), py::arg("global_mean"));

  m.def(
      "repetition_willingness",
      [](const std::string& ll_class, double elapsed_days) {
        return repetition_willingness(ll_class, elapsed_days * static_cast<double>(kSecondsPerDay),
                                      default_context_params());
      },
      py::arg("ll_class"), py::arg("elapsed_days"));

  m.def(
      "mixed_distance",
      [](const py::dict& a, const py::dict& b) {
        return mixed_distance(user_from_json(to_json(a)), user_from_json(to_json(b)));
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "evaluate",
      [](const std::vector<std::vector<ItemId>>& recs, const std::vector<std::vector<ItemId>>& relevant,
         std::size_t k) {
        if (recs.size() != relevant.size()) throw DimensionError("recs and relevant differ in length");
        EvalSet set;
        set.k = k;
        for (std::size_t u = 0; u < recs.size(); ++u) {
          UserEval ue{static_cast<UserId>(u), recs[u], {relevant[u].begin(), relevant[u].end()}};
          set.train_items.insert(recs[u].begin(), recs[u].end());
          set.train_items.insert(relevant[u].begin(), relevant[u].end());
          set.users.push_back(std::move(ue));
        }
        return from_json(report_to_json(evaluate(set)));
      },
      py::arg("recs"), py::arg("relevant"), py::arg("k"));

  m.def(
      "ffm_predict_line",
      [](const py::dict& model, const std::string& line) {
        return ffm_predict(ffm_model_from_json(to_json(model)), parse_ffm_line(line).triples).probability;
      },
      py::arg("model"), py::arg("line"));

  m.def("fixture_items", []() {
    py::list out;
    for (const auto& item : load_item_fixture()) out.append(from_json(item_to_json(item)));
    return out;
  });

  m.def(
      "run_simulation",
      [](const std::string& plan, std::uint64_t seed, std::size_t k) {
        SimulationPlan p = default_plan();
        if (!plan.empty()) p.milestones = parse_milestones(plan);
        p.seed = seed;
        p.k = k;
        GenConfig gen;
        gen.coefficients = default_coefficients(seed);
        return combined_csv(run_simulation(p, EngineConfig{}, gen));
      },
      py::arg("plan") = "", py::arg("seed") = 7, py::arg("k") = 5);

  py::class_<PyEngine>(m, "Engine")
      .def(py::init<const py::object&>(), py::arg("config") = py::none())
      .def("add_user", &PyEngine::add_user, py::arg("user"))
      .def("set_preferences", &PyEngine::set_preferences, py::arg("user"), py::arg("classes"))
      .def("feedback", &PyEngine::feedback, py::arg("user"), py::arg("item"), py::arg("kind"),
           py::arg("rating") = py::none(), py::arg("timestamp") = 0)
      .def("rate", &PyEngine::rate, py::arg("user"), py::arg("item"), py::arg("rating"), py::arg("timestamp") = 0)
      .def("recommend", &PyEngine::recommend, py::arg("user"), py::arg("n") = 5, py::arg("weather") = py::none())
      .def("profile", &PyEngine::profile, py::arg("user"))
      .def("state", &PyEngine::state)
      .def_property_readonly("phase", &PyEngine::phase)
      .def_property_readonly("high_water", &PyEngine::high_water);
}
