// SPDX-License-Identifier: Apache-2.0
#include "effsearch/replay.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "effsearch/serialization.hpp"

namespace effsearch {

namespace {

constexpr const char* kHeader =
    "config,model,task,hardware,accuracy_pct,latency_ms,memory_gb,energy_j,runs,warmup,seq_in,seq_out";

double parse_double(const std::string& s, std::size_t line, const char* field) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ReplayParseError(line, std::string("bad number in ") + field + ": '" + s + "'");
  return v;
}

int parse_int(const std::string& s, std::size_t line, const char* field) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ReplayParseError(line, std::string("bad integer in ") + field + ": '" + s + "'");
  return v;
}

}  // namespace

ReplayParseError::ReplayParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

ReplayDataset ReplayDataset::parse(std::istream& in) {
  ReplayDataset d;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      if (line != kHeader) throw ReplayParseError(line_no, "unexpected header");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    try {
      f = split_csv_line(line);
    } catch (const std::invalid_argument& e) {
      throw ReplayParseError(line_no, e.what());
    }
    if (f.size() != 12) throw ReplayParseError(line_no, "expected 12 fields, got " + std::to_string(f.size()));
    MeasurementRecord r;
    try {
      r.config = parse_canonical(f[0]);
    } catch (const ConfigParseError& e) {
      throw ReplayParseError(line_no, e.what());
    }
    r.model = f[1];
    r.task = f[2];
    r.hardware = f[3];
    r.perf = {parse_double(f[4], line_no, "accuracy_pct"), parse_double(f[5], line_no, "latency_ms"),
              parse_double(f[6], line_no, "memory_gb"), parse_double(f[7], line_no, "energy_j")};
    r.runs = parse_int(f[8], line_no, "runs");
    r.warmup = parse_int(f[9], line_no, "warmup");
    r.seq_in = parse_int(f[10], line_no, "seq_in");
    r.seq_out = parse_int(f[11], line_no, "seq_out");
    if (!is_valid(r.perf)) throw ReplayParseError(line_no, "metrics out of range");
    if (r.runs < 1 || r.warmup < 0 || r.seq_in < 1 || r.seq_out < 1)
      throw ReplayParseError(line_no, "invalid measurement protocol fields");
    try {
      d.add(std::move(r));
    } catch (const DuplicateKeyError& e) {
      throw DuplicateKeyError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!header_seen) throw ReplayParseError(1, "empty file");
  return d;
}

ReplayDataset ReplayDataset::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return parse(in);
}

void ReplayDataset::add(MeasurementRecord r) {
  Key key{r.config, r.model, r.task, r.hardware};
  if (records_.count(key))
    throw DuplicateKeyError("duplicate measurement for " + to_canonical(r.config) + " / " + r.model +
                            " / " + r.task + " / " + r.hardware);
  records_.emplace(std::move(key), std::move(r));
}

const MeasurementRecord* ReplayDataset::find(const EfficiencyConfig& c, const std::string& model,
                                             const std::string& task, const std::string& hardware) const {
  const auto it = records_.find(Key{c, model, task, hardware});
  return it == records_.end() ? nullptr : &it->second;
}

const MeasurementRecord& ReplayDataset::lookup(const EfficiencyConfig& c, const std::string& model,
                                               const std::string& task, const std::string& hardware) const {
  if (const auto* r = find(c, model, task, hardware)) return *r;
  throw ReplayMissError("no measurement for " + to_canonical(c) + " / " + model + " / " + task + " / " +
                        hardware);
}

std::vector<MeasurementRecord> ReplayDataset::records() const {
  std::vector<MeasurementRecord> out;
  out.reserve(records_.size());
  for (const auto& [k, r] : records_) out.push_back(r);
  return out;
}

void ReplayDataset::write_csv(std::ostream& out) const {
  out << kHeader << '\n';
  for (const auto& [k, r] : records_) {
    out << csv_field(to_canonical(r.config)) << ',' << csv_field(r.model) << ',' << csv_field(r.task) << ','
        << csv_field(r.hardware) << ',' << format_number(r.perf.accuracy_pct) << ','
        << format_number(r.perf.latency_ms) << ',' << format_number(r.perf.memory_gb) << ','
        << format_number(r.perf.energy_j) << ',' << r.runs << ',' << r.warmup << ',' << r.seq_in
        << ',' << r.seq_out << '\n';
  }
}

ReplayEvaluator::ReplayEvaluator(std::shared_ptr<const ReplayDataset> data, std::string model,
                                 std::string task, std::string hardware, std::string source)
    : data_(std::move(data)),
      model_(std::move(model)),
      task_(std::move(task)),
      hardware_(std::move(hardware)),
      source_(std::move(source)) {
  if (!data_) throw std::invalid_argument("replay evaluator needs a dataset");
}

PerformanceVector ReplayEvaluator::evaluate(const EfficiencyConfig& c) const {
  return data_->lookup(c, model_, task_, hardware_).perf;
}

std::string ReplayEvaluator::identity() const {
  return "replay:" + source_ + ":" + model_ + "/" + task_ + "/" + hardware_;
}

}  // namespace effsearch
