#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "loopsum/frontend.hpp"
#include "loopsum/spath.hpp"

namespace testutil {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string corpus_path(const std::string& name) { return std::string(LOOPSUM_CORPUS_DIR) + "/" + name; }

inline loopsum::ast::Program program(const std::string& source) {
  auto r = loopsum::parse(source);
  if (!r.ok()) throw std::runtime_error("parse failed: " + r.diagnostics.front().to_string());
  return *r.program;
}

inline loopsum::ast::Program corpus(const std::string& name) { return program(read_file(corpus_path(name))); }

/// CFG plus canonical loops of a program.
struct Built {
  loopsum::Cfg cfg;
  std::vector<loopsum::CanonicalLoop> loops;
};

inline Built build(const loopsum::ast::Program& p) {
  Built b;
  b.cfg = loopsum::build_cfg(p);
  b.loops = loopsum::canonicalize(b.cfg);
  return b;
}

inline loopsum::Valuation pre_state(std::initializer_list<std::pair<const char*, loopsum::Int>> vals) {
  loopsum::Valuation v;
  for (const auto& [k, x] : vals) v[{loopsum::SymKind::Pre, k}] = x;
  return v;
}

}  // namespace testutil
