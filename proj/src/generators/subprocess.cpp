#include "mafrg/generators/subprocess.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <thread>

#include "mafrg/core/error.hpp"
#include "mafrg/core/io.hpp"

extern char** environ;

namespace mafrg::gen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string rel(const fs::path& p, const fs::path& base) {
  if (p.is_relative()) return p.generic_string();
  auto r = p.lexically_relative(base);
  return r.empty() ? p.generic_string() : r.generic_string();
}

fs::path resolve(const std::string& p, const fs::path& base) {
  fs::path path(p);
  return path.is_relative() ? base / path : path;
}

class ScratchDir {
 public:
  ScratchDir(const fs::path& root, bool keep) : keep_(keep) {
    static std::atomic<unsigned> counter{0};
    const fs::path base = root.empty() ? fs::temp_directory_path() : root;
    std::random_device rd;
    for (int attempt = 0; attempt < 100; ++attempt) {
      std::ostringstream name;
      name << "mafrg-" << ::getpid() << "-" << counter++ << "-" << std::hex << rd();
      path_ = base / name.str();
      if (fs::create_directories(path_)) return;
    }
    throw Error("could not create scratch directory under " + base.string());
  }
  ~ScratchDir() {
    if (keep_) return;
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const fs::path& path() const noexcept { return path_; }

 private:
  fs::path path_;
  bool keep_;
};

std::string tail_of(const fs::path& p, std::size_t max_chars = 400) {
  std::ifstream in(p, std::ios::binary);
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  if (s.size() > max_chars) s = "..." + s.substr(s.size() - max_chars);
  return s;
}

void run_process(const SubprocessOptions& opt, const fs::path& request, const fs::path& scratch) {
  if (opt.command.empty()) throw ArgumentError(opt.name + ": empty generator command");
  std::vector<std::string> args = opt.command;
  args.push_back(request.string());
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  const std::string out_log = (scratch / "stdout.log").string();
  const std::string err_log = (scratch / "stderr.log").string();
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, out_log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, err_log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);

  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    throw GeneratorCrash(opt.name + ": could not start '" + args[0] + "': " + std::strerror(rc));
  }

  const auto deadline = std::chrono::steady_clock::now() + opt.timeout;
  auto pause = std::chrono::microseconds(200);
  int status = 0;
  for (;;) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) throw GeneratorCrash(opt.name + ": waitpid failed: " + std::strerror(errno));
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(pid, SIGKILL);
      while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
      }
      std::ostringstream os;
      os << opt.name << ": generator timed out after " << opt.timeout.count() << " ms and was killed";
      throw GeneratorTimeout(os.str());
    }
    std::this_thread::sleep_for(pause);
    pause = std::min(pause * 2, std::chrono::microseconds(20000));
  }

  if (WIFEXITED(status) && WEXITSTATUS(status) == 0) return;
  std::ostringstream os;
  os << opt.name << ": generator ";
  if (WIFEXITED(status)) {
    os << "exited with status " << WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    os << "was terminated by signal " << WTERMSIG(status);
  } else {
    os << "ended abnormally";
  }
  const auto err = tail_of(err_log);
  if (!err.empty()) os << "; stderr: " << err;
  throw GeneratorCrash(os.str());
}

}  // namespace

std::size_t GenerationRequest::expected_rows() const {
  if (mode == GenerationMode::Offline) return frames;
  if (gamma_schedule.empty()) throw ValidationError("online request without a gamma schedule");
  return gamma_schedule.back() + 1 - block_begin;
}

fs::path candidate_file(const fs::path& dir, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "candidate_%02zu.mfrg", index);
  return dir / buf;
}

void write_request(const fs::path& path, const GenerationRequest& r) {
  const fs::path base = path.parent_path();
  json j;
  j["mode"] = std::string(to_string(r.mode));
  j["candidates"] = r.candidates;
  j["seed"] = r.seed;
  j["frames"] = r.frames;
  j["speaker_facial"] = rel(r.speaker_facial, base);
  if (r.speaker_audio) j["speaker_audio"] = rel(*r.speaker_audio, base);
  j["output_dir"] = rel(r.output_dir, base);
  if (r.mode == GenerationMode::Online) {
    j["block_begin"] = r.block_begin;
    j["gamma_schedule"] = r.gamma_schedule;
    json prev = json::array();
    for (const auto& p : r.previous) prev.push_back(rel(p, base));
    j["previous"] = prev;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

GenerationRequest read_request(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open request " + path.string());
  const fs::path base = path.parent_path();
  try {
    const json j = json::parse(in);
    GenerationRequest r;
    r.mode = parse_generation_mode(j.at("mode").get<std::string>());
    r.candidates = j.at("candidates").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.frames = j.at("frames").get<std::size_t>();
    r.speaker_facial = resolve(j.at("speaker_facial").get<std::string>(), base);
    if (j.contains("speaker_audio")) r.speaker_audio = resolve(j["speaker_audio"].get<std::string>(), base);
    r.output_dir = resolve(j.at("output_dir").get<std::string>(), base);
    if (r.mode == GenerationMode::Online) {
      r.block_begin = j.at("block_begin").get<std::size_t>();
      r.gamma_schedule = j.at("gamma_schedule").get<std::vector<std::size_t>>();
      for (const auto& p : j.at("previous")) r.previous.push_back(resolve(p.get<std::string>(), base));
    }
    return r;
  } catch (const json::exception& e) {
    throw FormatError("request " + path.string() + ": " + e.what());
  }
}

void serve_request(Generator& gen, const fs::path& request_path) {
  const auto req = read_request(request_path);
  if (req.candidates < 1) throw ValidationError("request asks for no candidates");

  SpeakerBehaviour speaker;
  speaker.clip_id = "request";
  speaker.facial.clip_id = "request";
  speaker.facial.frames = io::read_matrix_binary(req.speaker_facial);
  if (req.speaker_audio) speaker.audio = io::read_matrix_binary(*req.speaker_audio);
  if (speaker.length() != req.frames) {
    throw ValidationError("request declares " + std::to_string(req.frames) + " frames, speaker file has " +
                          std::to_string(speaker.length()));
  }

  std::vector<FrameMatrix> out;
  if (req.mode == GenerationMode::Offline) {
    out = gen.generate(speaker, req.candidates, req.seed);
  } else {
    if (req.previous.size() != static_cast<std::size_t>(req.candidates)) {
      throw ValidationError("online request needs one previous-frames file per candidate");
    }
    std::vector<FrameMatrix> emitted;
    for (const auto& p : req.previous) emitted.push_back(io::read_matrix_binary(p));
    out.assign(emitted.size(), FrameMatrix(req.expected_rows(), kNumChannels));
    std::size_t begin = req.block_begin;
    for (std::size_t gamma : req.gamma_schedule) {
      if (gamma < begin || gamma >= speaker.length()) {
        throw ValidationError("gamma schedule is not increasing within the visible frames");
      }
      OnlineStepInput in;
      in.block_begin = begin;
      in.gamma = gamma;
      in.speaker_facial = speaker.facial.frames.slice_rows(0, gamma + 1);
      if (speaker.audio) in.speaker_audio = speaker.audio->slice_rows(0, gamma + 1);
      in.emitted = emitted;
      auto blocks = gen.step(in, req.candidates, req.seed);
      if (blocks.size() != out.size()) throw ValidationError(gen.name() + ": wrong number of candidates");
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (blocks[i].rows() != in.block_size() || blocks[i].cols() != kNumChannels) {
          throw ValidationError(gen.name() + ": online block has the wrong shape");
        }
        std::copy(blocks[i].data().begin(), blocks[i].data().end(), out[i].row(begin - req.block_begin).data());
        FrameMatrix grown(gamma + 1, kNumChannels);
        std::copy(emitted[i].data().begin(), emitted[i].data().end(), grown.data().begin());
        std::copy(blocks[i].data().begin(), blocks[i].data().end(), grown.row(begin).data());
        emitted[i] = std::move(grown);
      }
      begin = gamma + 1;
    }
  }
  fs::create_directories(req.output_dir);
  for (std::size_t i = 0; i < out.size(); ++i) io::write_matrix_binary(candidate_file(req.output_dir, i), out[i]);
}

SubprocessGenerator::SubprocessGenerator(SubprocessOptions options) : options_(std::move(options)) {
  if (options_.command.empty()) throw ArgumentError("subprocess generator needs a command");
}

std::vector<FrameMatrix> SubprocessGenerator::invoke(GenerationRequest req, const FrameMatrix& facial,
                                                     const std::optional<FrameMatrix>& audio,
                                                     const std::vector<FrameMatrix>& previous) {
  ScratchDir scratch(options_.scratch_root, options_.keep_scratch);
  const fs::path dir = scratch.path();
  req.frames = facial.rows();
  req.speaker_facial = dir / "speaker.mfrg";
  io::write_matrix_binary(req.speaker_facial, facial);
  if (audio) {
    req.speaker_audio = dir / "speaker_audio.mfrg";
    io::write_matrix_binary(*req.speaker_audio, *audio);
  }
  for (std::size_t i = 0; i < previous.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "previous_%02zu.mfrg", i);
    req.previous.push_back(dir / buf);
    io::write_matrix_binary(req.previous.back(), previous[i]);
  }
  req.output_dir = dir / "out";
  fs::create_directories(req.output_dir);
  const fs::path request_path = dir / "request.json";
  write_request(request_path, req);

  run_process(options_, request_path, dir);

  std::vector<FrameMatrix> out;
  for (int i = 0; i < req.candidates; ++i) {
    const auto file = candidate_file(req.output_dir, static_cast<std::size_t>(i));
    if (!fs::exists(file)) {
      throw ValidationError(options_.name + ": generator did not write " + file.filename().string());
    }
    out.push_back(io::read_matrix_binary(file));
  }
  return out;
}

std::vector<FrameMatrix> SubprocessGenerator::generate(const SpeakerBehaviour& speaker, int m, std::uint64_t seed) {
  GenerationRequest req;
  req.mode = GenerationMode::Offline;
  req.candidates = m;
  req.seed = seed;
  return invoke(std::move(req), speaker.facial.frames, speaker.audio, {});
}

std::vector<FrameMatrix> SubprocessGenerator::step(const OnlineStepInput& in, int m, std::uint64_t seed) {
  GenerationRequest req;
  req.mode = GenerationMode::Online;
  req.candidates = m;
  req.seed = seed;
  req.block_begin = in.block_begin;
  req.gamma_schedule = {in.gamma};
  return invoke(std::move(req), in.speaker_facial, in.speaker_audio, in.emitted);
}

}  // namespace mafrg::gen
