#include "dplab/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace dplab {

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

// JSON has no inf/nan; keep them as strings so the report stays valid
static nlohmann::json jnum(double x) {
  if (std::isfinite(x)) return x;
  return fmt(x);
}

nlohmann::json num(double value, double se) { return {{"value", jnum(value)}, {"se", jnum(se)}}; }
nlohmann::json num(const Estimate& e) { return num(e.value, e.se); }
nlohmann::json exact(double value) { return {{"value", jnum(value)}, {"exact", true}}; }

nlohmann::json ols_json(const OlsResult& r, const std::vector<std::string>& names) {
  nlohmann::json cols = nlohmann::json::array();
  for (int j = 0; j < static_cast<int>(r.beta.size()); ++j) {
    nlohmann::json c = num(r.beta[j], r.se[j]);
    c["name"] = j < static_cast<int>(names.size()) ? names[j] : "x" + std::to_string(j);
    c["kept"] = static_cast<bool>(r.kept[j]);
    c["t"] = jnum(r.kept[j] ? r.tstat(j) : 0.0);
    cols.push_back(c);
  }
  return {{"n", r.n}, {"coefficients", cols}, {"warnings", r.warnings}};
}

std::string Csv::str() const {
  std::string s;
  auto line = [&](const std::vector<std::string>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ',';
      s += v[i];
    }
    s += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return s;
}

ReportWriter::ReportWriter(std::string dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

void ReportWriter::text(const std::string& name, const std::string& s) {
  write_atomic((fs::path(dir_) / name).string(), s);
  files_.emplace_back(name, sha256_hex(s));
}

void ReportWriter::json(const std::string& name, const nlohmann::json& j) { text(name, j.dump(2) + "\n"); }

void ReportWriter::csv(const std::string& name, const Csv& c) { text(name, c.str()); }

void ReportWriter::side(const std::string& name, const std::string& s) {
  write_atomic((fs::path(dir_) / name).string(), s);
}

void ReportWriter::finish() {
  auto files = files_;
  std::sort(files.begin(), files.end());
  nlohmann::json m = nlohmann::json::array();
  for (const auto& [f, h] : files) m.push_back({{"file", f}, {"sha256", h}});
  write_atomic((fs::path(dir_) / "manifest.json").string(),
               nlohmann::json{{"files", m}, {"tool", kToolVersion}}.dump(2) + "\n");
}

}  // namespace dplab
