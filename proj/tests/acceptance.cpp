// Runs the acceptance list; one PASS/FAIL line per criterion.
#include "cbf/suite.hpp"

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
  cbf::SuiteOptions o;
  std::set<int> only;
  std::string json_out;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--only" && i + 1 < argc)
      only.insert(std::stoi(argv[++i]));
    else if (a == "--json" && i + 1 < argc)
      json_out = argv[++i];
    else if (a == "--threads" && i + 1 < argc)
      o.threads = std::stoi(argv[++i]);
    else {
      std::cerr << "usage: acceptance [--only K]... [--json FILE] [--threads T]\n";
      return 2;
    }
  }
  bool ok = true;
  auto all = nlohmann::json::array();
  for (int id = 1; id <= 10; ++id) {
    if (!only.empty() && !only.count(id)) continue;
    auto r = cbf::run_acceptance(o, {id}).at(0);
    std::cout << r.line() << std::endl;
    if (!r.pass()) std::cout << r.report.to_json(5).dump(1) << std::endl;
    ok = ok && r.pass();
    all.push_back(r.to_json());
  }
  if (!json_out.empty()) std::ofstream(json_out) << all.dump(1) << '\n';
  return ok ? 0 : 1;
}
