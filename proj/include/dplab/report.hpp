#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "dplab/regression.hpp"
#include "dplab/stats.hpp"

namespace dplab {

inline constexpr const char* kToolVersion = "dplab 0.1.0";

std::string sha256_hex(const std::string& bytes);

// temp file in the same directory, then rename
void write_atomic(const std::string& path, const std::string& content);

// {"value": v, "se": s}
nlohmann::json num(double value, double se);
nlohmann::json num(const Estimate& e);
// {"value": v, "exact": true}
nlohmann::json exact(double value);
nlohmann::json ols_json(const OlsResult& r, const std::vector<std::string>& names);

// Shortest round-trip text for a double.
std::string fmt(double x);

// Small CSV builder; fields are written as given.
struct Csv {
  Csv() = default;
  Csv(std::vector<std::string> h) : header(std::move(h)) {}

  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string str() const;
};

// Collects the files of one run. Names are relative to the output directory,
// so the manifest does not depend on where the run was written.
class ReportWriter {
 public:
  explicit ReportWriter(std::string dir);
  void json(const std::string& name, const nlohmann::json& j);
  void csv(const std::string& name, const Csv& c);
  void text(const std::string& name, const std::string& s);
  // manifest.json: sorted {file, sha256}; written last
  void finish();
  // non-deterministic side file (runtime), kept out of the manifest
  void side(const std::string& name, const std::string& s);
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace dplab
