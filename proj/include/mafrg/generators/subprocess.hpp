#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mafrg/generators/generator.hpp"

namespace mafrg::gen {

/// One request of the file-based generator protocol. The harness writes the
/// speaker clip and this record; the generator writes `candidate_XX.mfrg`
/// files into `output_dir` and exits with status 0.
struct GenerationRequest {
  GenerationMode mode = GenerationMode::Offline;
  int candidates = kDefaultCandidates;
  std::uint64_t seed = 0;
  std::size_t frames = 0;  // speaker frames present in the files
  std::size_t block_begin = 0;
  std::vector<std::size_t> gamma_schedule;  // online only
  std::filesystem::path speaker_facial;
  std::optional<std::filesystem::path> speaker_audio;
  std::vector<std::filesystem::path> previous;  // online only, per candidate
  std::filesystem::path output_dir;

  /// Rows each output file must contain.
  std::size_t expected_rows() const;
};

std::filesystem::path candidate_file(const std::filesystem::path& dir, std::size_t index);

/// Paths are stored relative to the request's directory when possible.
void write_request(const std::filesystem::path& path, const GenerationRequest& request);
/// Relative paths are resolved against the request's directory.
GenerationRequest read_request(const std::filesystem::path& path);

/// Generator side: serves one request with an in-process generator.
void serve_request(Generator& gen, const std::filesystem::path& request_path);

struct SubprocessOptions {
  std::vector<std::string> command;  // argv; the request path is appended
  std::string name = "external";
  std::chrono::milliseconds timeout{std::chrono::minutes(10)};
  std::filesystem::path scratch_root;  // empty: system temp directory
  bool keep_scratch = false;
};

/// Runs an external program per call. Non-zero exit raises GeneratorCrash,
/// overrunning the timeout kills the process and raises GeneratorTimeout.
/// Online steps only ever receive speaker frames up to gamma.
class SubprocessGenerator final : public Generator {
 public:
  explicit SubprocessGenerator(SubprocessOptions options);
  std::string name() const override { return options_.name; }
  std::vector<FrameMatrix> generate(const SpeakerBehaviour& speaker, int m, std::uint64_t seed) override;
  std::vector<FrameMatrix> step(const OnlineStepInput& in, int m, std::uint64_t seed) override;

 private:
  std::vector<FrameMatrix> invoke(GenerationRequest request, const FrameMatrix& facial,
                                  const std::optional<FrameMatrix>& audio,
                                  const std::vector<FrameMatrix>& previous);
  SubprocessOptions options_;
};

}  // namespace mafrg::gen
