#include <cstdio>
#include <sstream>

#include "mafrg/core/error.hpp"
#include "mafrg/core/io.hpp"
#include "mafrg/datapipe.hpp"
#include "mafrg/eval/engine.hpp"

namespace mafrg::data {

namespace fs = std::filesystem;

void check_session(const SessionRecord& s) {
  auto fail = [&](const std::string& what) { throw ValidationError("session " + s.session_id + ": " + what); };
  if (s.fps != kStandardFps) fail("fps must be 25, got " + std::to_string(s.fps));
  if (s.subject_a == s.subject_b) fail("both participants are subject " + s.subject_a);
  if (s.a_facial.cols() != kNumChannels || s.b_facial.cols() != kNumChannels) fail("facial streams need 25 channels");
  if (s.a_facial.rows() != s.b_facial.rows()) {
    fail("participant streams differ in length (" + std::to_string(s.a_facial.rows()) + " vs " +
         std::to_string(s.b_facial.rows()) + ")");
  }
  if (s.a_audio.has_value() != s.b_audio.has_value()) fail("audio present for one participant only");
  if (s.a_audio) {
    if (s.a_audio->rows() != s.frames() || s.b_audio->rows() != s.frames()) fail("audio length differs from facial");
    if (s.a_audio->cols() != s.b_audio->cols()) fail("audio widths differ between participants");
  }
}

std::string window_pair_id(std::string_view session_id, std::size_t window_index) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "_w%03zu", window_index);
  return std::string(session_id) + buf;
}

std::vector<ClipPair> segment_session(const SessionRecord& s, std::size_t window) {
  if (window == 0) throw ArgumentError("segment window must be positive");
  check_session(s);
  std::vector<ClipPair> out;
  const std::size_t n = s.frames() / window;
  out.reserve(n);
  for (std::size_t w = 0; w < n; ++w) {
    const std::size_t b = w * window;
    const std::size_t e = b + window;
    ClipPair p;
    p.pair_id = window_pair_id(s.session_id, w);
    p.session_id = s.session_id;
    p.source_corpus = s.corpus;
    p.language = s.language;
    auto part = [&](const std::string& subject, const FrameMatrix& facial, const std::optional<FrameMatrix>& audio,
                    char role) {
      Participant pt;
      pt.subject_id = subject;
      pt.behaviour.clip_id = p.pair_id + "_" + role;
      pt.behaviour.facial = {pt.behaviour.clip_id, facial.slice_rows(b, e), s.fps};
      if (audio) pt.behaviour.audio = audio->slice_rows(b, e);
      return pt;
    };
    p.a = part(s.subject_a, s.a_facial, s.a_audio, 'A');
    p.b = part(s.subject_b, s.b_facial, s.b_audio, 'B');
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<SessionRecord> load_sessions(const fs::path& root, const DatasetManifest& sessions) {
  std::vector<SessionRecord> out;
  out.reserve(sessions.clips.size());
  for (const auto& rec : sessions.clips) {
    SessionRecord s;
    s.session_id = rec.session_id.empty() ? rec.pair_id : rec.session_id;
    s.subject_a = rec.subject_a;
    s.subject_b = rec.subject_b;
    s.language = rec.language;
    s.corpus = rec.corpus;
    s.fps = sessions.fps;
    s.a_facial = io::read_sequence(root / rec.a_facial).frames;
    s.b_facial = io::read_sequence(root / rec.b_facial).frames;
    if (rec.a_audio) s.a_audio = io::read_matrix_binary(root / *rec.a_audio);
    if (rec.b_audio) s.b_audio = io::read_matrix_binary(root / *rec.b_audio);
    check_session(s);
    out.push_back(std::move(s));
  }
  return out;
}

WrittenClips segment_manifest(const fs::path& session_root, const DatasetManifest& sessions, const fs::path& out_dir,
                              std::size_t window, std::size_t workers) {
  if (window == 0) throw ArgumentError("segment window must be positive");
  fs::create_directories(out_dir / "clips");
  const std::size_t n = sessions.clips.size();
  std::vector<std::vector<ClipRecord>> per_session(n);
  std::vector<std::size_t> dropped(n, 0);

  eval::parallel_for(n, workers, [&](std::size_t i) {
    const auto& rec = sessions.clips[i];
    DatasetManifest one;
    one.fps = sessions.fps;
    one.clips = {rec};
    const auto loaded = load_sessions(session_root, one);
    const auto& s = loaded.front();
    dropped[i] = s.frames() % window;
    for (const auto& p : segment_session(s, window)) {
      ClipRecord c;
      c.pair_id = p.pair_id;
      c.session_id = s.session_id;
      c.subject_a = s.subject_a;
      c.subject_b = s.subject_b;
      c.corpus = s.corpus;
      c.language = s.language;
      c.split = rec.split;
      c.frames = window;
      c.a_facial = "clips/" + p.pair_id + "_a.mfrg";
      c.b_facial = "clips/" + p.pair_id + "_b.mfrg";
      io::write_matrix_binary(out_dir / c.a_facial, p.a.behaviour.facial.frames);
      io::write_matrix_binary(out_dir / c.b_facial, p.b.behaviour.facial.frames);
      if (p.a.behaviour.audio) {
        c.a_audio = "clips/" + p.pair_id + "_a_audio.mfrg";
        c.b_audio = "clips/" + p.pair_id + "_b_audio.mfrg";
        io::write_matrix_binary(out_dir / *c.a_audio, *p.a.behaviour.audio);
        io::write_matrix_binary(out_dir / *c.b_audio, *p.b.behaviour.audio);
      }
      per_session[i].push_back(std::move(c));
    }
  });

  WrittenClips out;
  out.manifest.fps = sessions.fps;
  out.manifest.clip_frames = window;
  out.manifest.audio_dim = sessions.audio_dim;
  for (std::size_t i = 0; i < n; ++i) {
    out.dropped_frames += dropped[i];
    for (auto& c : per_session[i]) out.manifest.clips.push_back(std::move(c));
  }
  return out;
}

}  // namespace mafrg::data
