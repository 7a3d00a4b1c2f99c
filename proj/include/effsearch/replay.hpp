// SPDX-License-Identifier: Apache-2.0
//
// Replayed measurements. CSV header:
//   config,model,task,hardware,accuracy_pct,latency_ms,memory_gb,energy_j,runs,warmup,seq_in,seq_out
// The config column holds the canonical text form (quoted, it contains commas).
#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "effsearch/evaluator.hpp"

namespace effsearch {

struct MeasurementRecord {
  EfficiencyConfig config;
  std::string model;
  std::string task;
  std::string hardware;
  PerformanceVector perf;
  int runs = 100;
  int warmup = 10;
  int seq_in = 512;
  int seq_out = 128;
};

class ReplayParseError : public std::runtime_error {
 public:
  ReplayParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DuplicateKeyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ReplayMissError : public EvaluationError {
 public:
  using EvaluationError::EvaluationError;
};

/// Splits one CSV line; double quotes delimit fields containing commas.
std::vector<std::string> split_csv_line(const std::string& line);
/// Quotes a field when it contains a comma or quote.
std::string csv_field(const std::string& s);

class ReplayDataset {
 public:
  static ReplayDataset parse(std::istream& in);
  static ReplayDataset load(const std::string& path);

  /// Throws DuplicateKeyError if the key already exists.
  void add(MeasurementRecord r);

  const MeasurementRecord* find(const EfficiencyConfig& c, const std::string& model,
                                const std::string& task, const std::string& hardware) const;
  /// Throws ReplayMissError when absent.
  const MeasurementRecord& lookup(const EfficiencyConfig& c, const std::string& model,
                                  const std::string& task, const std::string& hardware) const;

  std::size_t size() const { return records_.size(); }
  /// Records in key order.
  std::vector<MeasurementRecord> records() const;
  void write_csv(std::ostream& out) const;

 private:
  using Key = std::tuple<EfficiencyConfig, std::string, std::string, std::string>;
  std::map<Key, MeasurementRecord> records_;
};

/// Exact-match lookups for one (model, task, hardware) triple.
class ReplayEvaluator final : public Evaluator {
 public:
  ReplayEvaluator(std::shared_ptr<const ReplayDataset> data, std::string model, std::string task,
                  std::string hardware, std::string source = "memory");

  PerformanceVector evaluate(const EfficiencyConfig& c) const override;
  std::string identity() const override;

 private:
  std::shared_ptr<const ReplayDataset> data_;
  std::string model_;
  std::string task_;
  std::string hardware_;
  std::string source_;
};

}  // namespace effsearch
