#include "mafrg/core/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mafrg/core/error.hpp"

namespace mafrg::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bytes[i] = static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw FormatError("truncated binary header");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return static_cast<T>(v);
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  return out;
}

std::vector<std::string_view> split_view(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    parts.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string csv_header() {
  std::string header = "frame";
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    header += ',';
    header += ChannelSchema::name(c);
  }
  return header;
}

}  // namespace

void write_matrix_binary(std::ostream& out, const FrameMatrix& m) {
  out.write(kBinaryMagic, 4);
  put_le<std::uint16_t>(out, kBinaryVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  for (float v : m.data()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
}

FrameMatrix read_matrix_binary(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kBinaryMagic, 4) != 0) throw FormatError("bad magic (expected MFRG)");
  const auto version = get_le<std::uint16_t>(in);
  if (version != kBinaryVersion)
    throw FormatError("unsupported binary version " + std::to_string(version));
  const auto rows = get_le<std::uint32_t>(in);
  const auto cols = get_le<std::uint32_t>(in);
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> raw(n * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size())
    throw FormatError("truncated payload: expected " + std::to_string(n) + " floats");
  std::vector<float> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits = static_cast<std::uint32_t>(raw[4 * i]) |
                         static_cast<std::uint32_t>(raw[4 * i + 1]) << 8 |
                         static_cast<std::uint32_t>(raw[4 * i + 2]) << 16 |
                         static_cast<std::uint32_t>(raw[4 * i + 3]) << 24;
    data[i] = std::bit_cast<float>(bits);
  }
  return FrameMatrix(rows, cols, std::move(data));
}

void write_matrix_binary(const fs::path& path, const FrameMatrix& m) {
  auto out = open_out(path, std::ios::binary);
  write_matrix_binary(out, m);
  if (!out) throw FormatError("write failed: " + path.string());
}

FrameMatrix read_matrix_binary(const fs::path& path) {
  auto in = open_in(path, std::ios::binary);
  try {
    return read_matrix_binary(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_sequence_csv(std::ostream& out, const ReactionSequence& seq) {
  out << csv_header() << '\n';
  char buf[32];
  for (std::size_t t = 0; t < seq.frames.rows(); ++t) {
    out << t;
    for (float v : seq.frames.row(t)) {
      auto res = std::to_chars(buf, buf + sizeof(buf), v);
      out << ',' << std::string_view(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

ReactionSequence read_sequence_csv(std::istream& in, std::string clip_id) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty CSV");
  if (trim(line) != csv_header()) throw FormatError("unexpected CSV header");
  std::vector<float> data;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    auto view = trim(line);
    if (view.empty()) continue;
    auto fields = split_view(view, ',');
    if (fields.size() != kNumChannels + 1)
      throw FormatError("CSV row " + std::to_string(rows) + ": expected " +
                        std::to_string(kNumChannels + 1) + " fields, got " +
                        std::to_string(fields.size()));
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto f = trim(fields[i]);
      float v = 0;
      auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size())
        throw FormatError("CSV row " + std::to_string(rows) + ": bad number '" + std::string(f) + "'");
      data.push_back(v);
    }
    ++rows;
  }
  return {std::move(clip_id), FrameMatrix(rows, kNumChannels, std::move(data)), kStandardFps};
}

ReactionSequence read_sequence(const fs::path& path) {
  if (path.extension() == ".csv") {
    auto in = open_in(path);
    try {
      return read_sequence_csv(in, path.stem().string());
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }
  return {path.stem().string(), read_matrix_binary(path), kStandardFps};
}

void write_sequence(const fs::path& path, const ReactionSequence& seq) {
  if (path.extension() == ".csv") {
    auto out = open_out(path);
    write_sequence_csv(out, seq);
    return;
  }
  write_matrix_binary(path, seq.frames);
}

void write_map(std::ostream& out, const AppropriatenessMap& map) {
  for (const auto& [id, set] : map.entries()) {
    out << id << ':';
    for (std::size_t i = 0; i < set.size(); ++i) out << (i ? "," : " ") << set[i];
    out << '\n';
  }
}

AppropriatenessMap read_map(std::istream& in) {
  AppropriatenessMap::Entries entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto colon = view.find(':');
    if (colon == std::string_view::npos)
      throw FormatError("map line " + std::to_string(lineno) + ": missing ':'");
    std::string id(trim(view.substr(0, colon)));
    if (id.empty()) throw FormatError("map line " + std::to_string(lineno) + ": empty id");
    if (entries.contains(id))
      throw FormatError("map line " + std::to_string(lineno) + ": duplicate entry '" + id + "'");
    auto& set = entries[id];
    auto rest = trim(view.substr(colon + 1));
    if (!rest.empty())
      for (auto part : split_view(rest, ',')) {
        auto ref = trim(part);
        if (ref.empty())
          throw FormatError("map line " + std::to_string(lineno) + ": empty reference");
        set.emplace_back(ref);
      }
  }
  return AppropriatenessMap(std::move(entries));
}

void write_map(const fs::path& path, const AppropriatenessMap& map) {
  auto out = open_out(path);
  write_map(out, map);
}

AppropriatenessMap read_map(const fs::path& path) {
  auto in = open_in(path);
  try {
    return read_map(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_manifest(std::ostream& out, const DatasetManifest& manifest) {
  json channels = json::array();
  for (std::size_t c = 0; c < kNumChannels; ++c) channels.push_back(ChannelSchema::name(c));
  json header = {{"record", "header"},
                 {"fps", manifest.fps},
                 {"clip_frames", manifest.clip_frames},
                 {"audio_dim", manifest.audio_dim},
                 {"channels", channels}};
  out << header.dump() << '\n';
  for (const auto& c : manifest.clips) {
    json rec = {{"record", "clip"},
                {"pair_id", c.pair_id},
                {"session_id", c.session_id},
                {"subject_a", c.subject_a},
                {"subject_b", c.subject_b},
                {"corpus", to_string(c.corpus)},
                {"language", c.language},
                {"split", to_string(c.split)},
                {"frames", c.frames},
                {"a_facial", c.a_facial},
                {"b_facial", c.b_facial}};
    if (c.a_audio) rec["a_audio"] = *c.a_audio;
    if (c.b_audio) rec["b_audio"] = *c.b_audio;
    out << rec.dump() << '\n';
  }
}

DatasetManifest read_manifest(std::istream& in) {
  DatasetManifest manifest;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto rec = json::parse(line);
      const auto kind = rec.at("record").get<std::string>();
      if (kind == "header") {
        manifest.fps = rec.value("fps", kStandardFps);
        manifest.clip_frames = rec.value("clip_frames", kStandardFrames);
        manifest.audio_dim = rec.value("audio_dim", std::size_t{0});
        if (rec.contains("channels")) {
          const auto& ch = rec["channels"];
          if (ch.size() != kNumChannels) throw FormatError("channel list must have 25 entries");
          for (std::size_t c = 0; c < kNumChannels; ++c)
            if (ch[c].get<std::string>() != ChannelSchema::name(c))
              throw FormatError("channel " + std::to_string(c) + " must be " +
                                std::string(ChannelSchema::name(c)));
        }
        have_header = true;
      } else if (kind == "clip") {
        ClipRecord c;
        c.pair_id = rec.at("pair_id").get<std::string>();
        c.session_id = rec.at("session_id").get<std::string>();
        c.subject_a = rec.at("subject_a").get<std::string>();
        c.subject_b = rec.at("subject_b").get<std::string>();
        c.corpus = parse_corpus(rec.at("corpus").get<std::string>());
        c.language = rec.value("language", std::string{});
        c.split = parse_split(rec.value("split", std::string{"unassigned"}));
        c.frames = rec.value("frames", manifest.clip_frames);
        c.a_facial = rec.at("a_facial").get<std::string>();
        c.b_facial = rec.at("b_facial").get<std::string>();
        if (rec.contains("a_audio")) c.a_audio = rec["a_audio"].get<std::string>();
        if (rec.contains("b_audio")) c.b_audio = rec["b_audio"].get<std::string>();
        manifest.clips.push_back(std::move(c));
      } else {
        throw FormatError("unknown record type '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw FormatError("manifest line " + std::to_string(lineno) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("manifest line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_header) throw FormatError("manifest has no header record");
  return manifest;
}

void write_manifest(const fs::path& path, const DatasetManifest& manifest) {
  auto out = open_out(path);
  write_manifest(out, manifest);
}

DatasetManifest read_manifest(const fs::path& path) {
  auto in = open_in(path);
  try {
    return read_manifest(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<ClipPair> load_clip_pairs(const fs::path& root,
                                      std::span<const ClipRecord* const> records) {
  std::vector<ClipPair> pairs;
  pairs.reserve(records.size());
  auto load_behaviour = [&](const ClipRecord& rec, const std::string& facial,
                            const std::optional<std::string>& audio, char role) {
    SpeakerBehaviour b;
    b.clip_id = rec.pair_id + "_" + role;
    b.facial = read_sequence(root / facial);
    b.facial.clip_id = b.clip_id;
    if (audio) b.audio = read_matrix_binary(root / *audio);
    return b;
  };
  for (const ClipRecord* rec : records) {
    ClipPair p;
    p.pair_id = rec->pair_id;
    p.session_id = rec->session_id;
    p.source_corpus = rec->corpus;
    p.language = rec->language;
    p.a = {rec->subject_a, load_behaviour(*rec, rec->a_facial, rec->a_audio, 'A')};
    p.b = {rec->subject_b, load_behaviour(*rec, rec->b_facial, rec->b_audio, 'B')};
    check_clip_pair(p);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace mafrg::io
