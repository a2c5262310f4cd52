#include "loopsum/report.hpp"

namespace loopsum {

namespace {

Json post_json(const SymMap& post) {
  Json j = Json::object();
  for (const auto& [k, e] : post) j[k.name] = to_string(e);
  return j;
}

Json stage_json(const Stage& st) {
  Json j;
  j["scc"] = st.scc;
  j["kind"] = to_string(st.tag);
  j["paths"] = st.paths;
  j["guard"] = to_string(st.guard);
  j["iterations"] = to_string(st.iterations);
  j["post"] = post_json(st.post);
  return j;
}

}  // namespace

Json to_json(const State& s) {
  Json j = Json::object();
  for (const auto& [k, v] : s) j[k] = v;
  return j;
}

Json to_json(const SummaryCase& c) {
  Json j;
  j["kind"] = to_string(c.tag);
  j["guard"] = to_string(c.guard);
  j["iterations"] = to_string(c.iterations);
  j["post"] = post_json(c.post);
  Json stages = Json::array();
  for (const auto& st : c.stages) stages.push_back(stage_json(st));
  j["stages"] = stages;
  return j;
}

Json to_json(const Oscillation& o) {
  Json j;
  j["scc"] = o.scc;
  j["variable"] = o.variable;
  j["jump"] = o.jump.to_string();
  j["interval"] = o.interval.to_string();
  j["recurrent"] = o.recurrent.to_string();
  j["rounds"] = o.rounds;
  j["values"] = o.values;
  j["max_steps_to_repeat"] = o.max_steps_to_repeat;
  j["pigeonhole_ok"] = o.pigeonhole_ok;
  Json classes = Json::array();
  for (const auto& c : o.classes) {
    Json k;
    k["values"] = c.values.to_string();
    if (c.modular) {
      k["form"] = "(x0 - " + std::to_string(c.offset) + " + " + std::to_string(c.step) + "*N) mod " +
                  std::to_string(c.period) + " + " + std::to_string(c.offset);
    } else {
      k["form"] = "table";
    }
    classes.push_back(k);
  }
  j["classes"] = classes;
  return j;
}

Json to_json(const Summary& s) {
  Json j;
  j["loop"] = s.loop_id;
  j["stmt"] = s.stmt_id;
  j["status"] = s.ok() ? "SUCCESS" : s.failure->reason;
  if (!s.ok()) j["detail"] = s.failure->detail;
  j["variables"] = s.variables;
  j["guard"] = s.guard ? to_string(s.guard) : "";
  Json cases = Json::array();
  for (const auto& c : s.cases) cases.push_back(to_json(c));
  j["cases"] = cases;
  Json osc = Json::array();
  for (const auto& o : s.oscillations) osc.push_back(to_json(o));
  j["oscillations"] = osc;
  j["notes"] = s.notes;
  return j;
}

Json to_json(const ProgramSummary& ps) {
  Json j;
  j["status"] = ps.ok() ? "SUCCESS" : ps.failure->reason;
  if (!ps.ok()) j["detail"] = ps.failure->detail;
  Json loops = Json::array();
  for (const auto& l : ps.loops) {
    Json lj = to_json(l.summary);
    lj["stmt"] = l.stmt_id;
    Json inner = Json::array();
    for (const auto& s : l.inner) inner.push_back(to_json(s));
    lj["inner"] = inner;
    loops.push_back(lj);
  }
  j["loops"] = loops;
  return j;
}

Json to_json(const DiffReport& r) {
  Json j;
  j["seed"] = r.seed;
  j["inputs"] = r.inputs;
  j["compared"] = r.compared;
  j["matched"] = r.matched;
  j["skipped"] = r.skipped;
  j["mismatches"] = r.mismatch_count;
  j["match_rate"] = r.match_rate();
  Json ms = Json::array();
  for (const auto& m : r.mismatches) {
    Json mj;
    mj["inputs"] = to_json(m.inputs);
    mj["expected"] = to_json(m.expected);
    mj["actual"] = to_json(m.actual);
    mj["message"] = m.message;
    ms.push_back(mj);
  }
  j["examples"] = ms;
  return j;
}

Json to_json(const AssertionResult& r) {
  Json j;
  j["stmt"] = r.stmt_id;
  j["line"] = r.loc.line;
  j["assertion"] = r.text;
  j["in_loop"] = r.in_loop;
  j["verdict"] = to_string(r.verdict);
  if (r.witness) j["witness"] = to_json(*r.witness);
  if (!r.reason.empty()) j["reason"] = r.reason;
  if (!r.method.empty()) j["method"] = r.method;
  return j;
}

Json to_json(const VerifyReport& r) {
  Json j;
  j["summary"] = r.summary_failure ? r.summary_failure->reason : "SUCCESS";
  Json rs = Json::array();
  for (const auto& a : r.results) rs.push_back(to_json(a));
  j["assertions"] = rs;
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace loopsum
