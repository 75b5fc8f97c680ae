#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "pmask/lang/elaborate.hpp"

namespace pmask::testutil {

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string model_path(const std::string& name) { return std::string(PMASK_MODELS_DIR) + "/" + name; }

inline lang::Elaborated load(const std::string& model, const std::map<std::string, Rat>& consts = {},
                             const std::set<std::string>& faults = {}) {
  return lang::load_model(slurp(model_path(model)), consts, faults);
}

}  // namespace pmask::testutil
