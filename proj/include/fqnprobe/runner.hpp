#pragma once

// Drives a completion backend over a composed manifest and scores the
// results. This is the only place in the pipeline that parallelizes; output
// order always matches manifest order regardless of the thread count.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fqnprobe/backend.hpp"
#include "fqnprobe/composer.hpp"
#include "fqnprobe/evaluator.hpp"
#include "fqnprobe/normalizer.hpp"

namespace fqnprobe {

class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RunError("cannot open task input: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline CompletionRequest request_for(const TaskRecord& record, std::string text) {
  CompletionRequest request;
  request.text = std::move(text);
  request.meta.snippet_id = record.snippet_id;
  request.meta.file_name = record.file;
  request.meta.shot = record.shot.kind;
  return request;
}

/// Scores one completion against the record's gold FQN.
inline PredictionLine score_completion(const TaskRecord& record,
                                       const CompletionResult& result) {
  const Prediction prediction = make_prediction(result);
  PredictionLine line;
  line.file = record.file;
  line.raw = prediction.raw;
  line.normalized = prediction.normalized;
  line.correct = is_correct(prediction.normalized, record.gold_fqn);
  return line;
}

/// Runs the backend over every manifest record, reading the rendered task
/// inputs from inputs_root. Concurrency is bounded; results come back in
/// manifest order.
inline std::vector<PredictionLine> run_backend(const Manifest& manifest,
                                               const std::filesystem::path& inputs_root,
                                               CompletionBackend& backend,
                                               int concurrency = 1) {
  const std::size_t count = manifest.records.size();
  std::vector<PredictionLine> results(count);
  if (count == 0) return results;

  auto work_one = [&](std::size_t i) {
    const TaskRecord& record = manifest.records[i];
    const std::string text = read_text_file(inputs_root / record.file);
    const CompletionResult result = backend.complete(request_for(record, text));
    results[i] = score_completion(record, result);
  };

  if (concurrency <= 1) {
    for (std::size_t i = 0; i < count; ++i) work_one(i);
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        work_one(i);
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (!failed.exchange(true)) first_error = e.what();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  const int thread_count = std::min<std::size_t>(concurrency, count);
  threads.reserve(thread_count);
  for (int t = 0; t < thread_count; ++t) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  if (failed.load()) throw RunError(first_error);
  return results;
}

}  // namespace fqnprobe
