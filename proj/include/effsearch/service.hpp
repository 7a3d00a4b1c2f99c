// SPDX-License-Identifier: Apache-2.0
//
// Read-only HTTP API over a finished refinement trace.
#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "effsearch/refinement.hpp"

namespace httplib {
class Server;
}

namespace effsearch {

class PublishError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable view of a trace plus the indexes the endpoints need.
struct PublishedRun {
  RefinementTrace trace;
  ConfigSpace space = ConfigSpace::full();
  SurrogateEnsemble ensemble;  // refit on every measured record of the trace
  std::optional<PerformanceVector> baseline_perf;
  NormalizationContext ranges;  // over the final archive
};

/// Checks the final archive (measured, feasible, mutually non-dominated) and
/// refits the surrogate used for sensitivity reports. Throws PublishError.
std::shared_ptr<const PublishedRun> publish(RefinementTrace trace, Exec exec = Exec::Serial);

struct Recommendation {
  ArchiveEntry entry;
  double utility = 0.0;
};

/// Utility argmax over the archive members feasible under `hw`; ties keep
/// the earlier (canonical) member.
std::optional<Recommendation> recommend(const ParetoArchive& archive, const PreferenceWeights& w,
                                        const HardwareSpec& hw, const NormalizationContext& ctx);

struct ApiResponse {
  int status = 200;
  std::string body;
};

class Service {
 public:
  explicit Service(std::string cors_origin = {}) : cors_origin_(std::move(cors_origin)) {}

  /// Atomically replaces the served run.
  void load(std::shared_ptr<const PublishedRun> run);
  std::shared_ptr<const PublishedRun> snapshot() const;

  ApiResponse run() const;
  ApiResponse front() const;
  ApiResponse recommend(const std::string& body) const;
  ApiResponse sensitivity(const std::string& config) const;

  /// Registers the endpoints (and CORS handling when configured).
  void mount(httplib::Server& server) const;

 private:
  std::string cors_origin_;
  mutable std::mutex mu_;
  std::shared_ptr<const PublishedRun> run_;
};

}  // namespace effsearch
