// Machine-readable check reports shared by the command-line driver.
#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <string>
#include <vector>

namespace alfeld {

using json = nlohmann::json;

struct CheckRecord {
  std::string name;
  std::string expected;
  std::string computed;
  bool pass = false;
};

/// Per-invocation report: checks are emitted sorted by name, timings only on
/// request so that identical invocations produce byte-identical output.
class Report {
public:
  Report(std::string command, json parameters) : command_(std::move(command)), parameters_(std::move(parameters)) {
    start_ = std::chrono::steady_clock::now();
  }

  void add(const std::string& name, const std::string& expected, const std::string& computed, bool pass) {
    checks_.push_back(CheckRecord{name, expected, computed, pass});
  }
  template <typename A, typename B>
  void add_eq(const std::string& name, const A& expected, const B& computed) {
    add(name, std::to_string(expected), std::to_string(computed),
        std::to_string(expected) == std::to_string(computed));
  }

  bool all_pass() const {
    return std::all_of(checks_.begin(), checks_.end(), [](const CheckRecord& c) { return c.pass; });
  }
  size_t size() const { return checks_.size(); }

  json to_json(bool with_timings) const {
    json j;
    j["command"] = command_;
    j["parameters"] = parameters_;
    auto sorted = checks_;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const CheckRecord& a, const CheckRecord& b) { return a.name < b.name; });
    json arr = json::array();
    for (const auto& c : sorted)
      arr.push_back({{"name", c.name}, {"expected", c.expected}, {"computed", c.computed},
                     {"status", c.pass ? "PASS" : "FAIL"}});
    j["checks"] = arr;
    j["status"] = all_pass() ? "PASS" : "FAIL";
    if (with_timings) {
      auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_);
      j["timings"] = {{"wall_ms", ms.count()}};
    }
    return j;
  }

  std::string to_csv() const {
    std::string out = "name,expected,computed,status\n";
    auto sorted = checks_;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const CheckRecord& a, const CheckRecord& b) { return a.name < b.name; });
    for (const auto& c : sorted)
      out += c.name + "," + c.expected + "," + c.computed + "," + (c.pass ? "PASS" : "FAIL") + "\n";
    return out;
  }

private:
  std::string command_;
  json parameters_;
  std::vector<CheckRecord> checks_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace alfeld
