#include "io.hpp"

#include <charconv>
#include <fstream>
#include <iostream>

#include <json.hpp>

namespace mixtool {

namespace {

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t lineno,
                             const std::string& what) {
  throw IoError(path + ":" + std::to_string(lineno) + ": " + what);
}

long long parse_ll(const std::string& s, const std::string& path,
                   std::size_t lineno) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    parse_fail(path, lineno, "'" + s + "' is not an integer");
  }
  return v;
}

double parse_double(const std::string& s, const std::string& path,
                    std::size_t lineno) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    parse_fail(path, lineno, "'" + s + "' is not a number");
  }
  return v;
}

std::ifstream open_or_fail(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open");
  return in;
}

void expect_header(std::ifstream& in, const std::string& path,
                   const std::string& header) {
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError(path + ": empty file, expected a " + header + " header");
  }
  if (strip_cr(line) != header) {
    parse_fail(path, 1, "header must be " + header);
  }
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in = open_or_fail(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

double need_number(const nlohmann::json& j, const char* key,
                   const std::string& path) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw IoError(path + ": missing numeric field '" + std::string(key) + "'");
  }
  return j.at(key).get<double>();
}

}  // namespace

std::string fmt(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fmt(long long v) {
  char buf[24];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<long long> read_counts_csv(const std::string& path) {
  std::ifstream in = open_or_fail(path);
  expect_header(in, path, "period,count");
  std::vector<long long> counts;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 2) parse_fail(path, lineno, "expected period,count");
    long long period = parse_ll(fields[0], path, lineno);
    long long n = parse_ll(fields[1], path, lineno);
    if (period != static_cast<long long>(counts.size()) + 1) {
      parse_fail(path, lineno,
                 "periods must run 1..m in order, got " + fields[0]);
    }
    if (n < 0) {
      throw std::domain_error(path + ":" + std::to_string(lineno) +
                              ": count must be >= 0");
    }
    counts.push_back(n);
  }
  if (counts.empty()) throw IoError(path + ": no data rows");
  return counts;
}

std::vector<std::pair<long long, double>> read_claims_csv(
    const std::string& path) {
  std::ifstream in = open_or_fail(path);
  expect_header(in, path, "period,amount");
  std::vector<std::pair<long long, double>> rows;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 2) parse_fail(path, lineno, "expected period,amount");
    long long period = parse_ll(fields[0], path, lineno);
    double amount = parse_double(fields[1], path, lineno);
    if (period < 1) {
      throw std::domain_error(path + ":" + std::to_string(lineno) +
                              ": period must be >= 1");
    }
    if (!(amount > 0.0)) {
      throw std::domain_error(path + ":" + std::to_string(lineno) +
                              ": amount must be > 0");
    }
    rows.emplace_back(period, amount);
  }
  if (rows.empty()) throw IoError(path + ": no data rows");
  return rows;
}

mixrate::ClaimHistory read_history(const std::string& counts_path,
                                   const std::string& claims_path) {
  mixrate::ClaimHistory history;
  history.counts = read_counts_csv(counts_path);
  if (claims_path.empty()) return history;

  auto rows = read_claims_csv(claims_path);
  std::vector<std::vector<double>> groups(history.counts.size());
  for (const auto& [period, amount] : rows) {
    if (period > static_cast<long long>(history.counts.size())) {
      throw std::invalid_argument(claims_path + ": claim period " +
                                  std::to_string(period) +
                                  " has no matching counts row");
    }
    groups[static_cast<std::size_t>(period - 1)].push_back(amount);
  }
  for (std::size_t t = 0; t < groups.size(); ++t) {
    if (static_cast<long long>(groups[t].size()) != history.counts[t]) {
      throw std::invalid_argument(
          claims_path + ": period " + std::to_string(t + 1) + " carries " +
          std::to_string(groups[t].size()) + " claims but the count says " +
          std::to_string(history.counts[t]));
    }
    history.severities.insert(history.severities.end(), groups[t].begin(),
                              groups[t].end());
  }
  return history;
}

mixrate::FrequencyParams read_freq_params(const std::string& path) {
  nlohmann::json j = load_json(path);
  if (j.is_object() && j.contains("params")) j = j.at("params");
  mixrate::FrequencyParams fp{
      need_number(j, "p", path), need_number(j, "alpha1", path),
      need_number(j, "alpha2", path), need_number(j, "beta", path)};
  mixrate::validate(fp);
  return fp;
}

mixrate::SeverityParams read_sev_params(const std::string& path) {
  nlohmann::json j = load_json(path);
  if (j.is_object() && j.contains("params")) j = j.at("params");
  mixrate::SeverityParams sp{
      need_number(j, "nu", path), need_number(j, "mu", path),
      need_number(j, "delta", path), need_number(j, "sigma", path)};
  mixrate::validate(sp);
  return sp;
}

void write_text(const std::string& path, const std::string& body) {
  write_stream(path, [&](std::ostream& out) { out << body; });
}

void write_stream(const std::string& path,
                  const std::function<void(std::ostream&)>& body) {
  if (path.empty()) {
    body(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError(path + ": cannot open for writing");
  body(out);
  out.flush();
  if (!out) throw IoError(path + ": write failed");
}

namespace {

std::string trim(const std::string& s) {
  std::size_t first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  std::size_t last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<std::string> expand_config_args(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty()) return args;

  std::ifstream in = open_or_fail(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_cr(line));
    if (line.empty() || line[0] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) parse_fail(path, lineno, "expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) parse_fail(path, lineno, "empty key");
    std::string flag = "--" + key;
    bool given = false;
    for (const std::string& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) {
        given = true;
        break;
      }
    }
    if (!given) args.push_back(flag + "=" + value);
  }
  return args;
}

}  // namespace mixtool
