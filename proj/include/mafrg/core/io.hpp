#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mafrg/core/types.hpp"

namespace mafrg::io {

inline constexpr char kBinaryMagic[4] = {'M', 'F', 'R', 'G'};
inline constexpr std::uint16_t kBinaryVersion = 1;

// Binary layout: "MFRG", u16 version, u32 rows, u32 cols, rows*cols f32; all little-endian.
void write_matrix_binary(std::ostream& out, const FrameMatrix& m);
FrameMatrix read_matrix_binary(std::istream& in);
void write_matrix_binary(const std::filesystem::path& path, const FrameMatrix& m);
FrameMatrix read_matrix_binary(const std::filesystem::path& path);

// CSV layout: header `frame,AU1,...,arousal`, one row per frame.
void write_sequence_csv(std::ostream& out, const ReactionSequence& seq);
ReactionSequence read_sequence_csv(std::istream& in, std::string clip_id = {});

/// Reads either format, chosen by extension (.csv or anything else as binary).
ReactionSequence read_sequence(const std::filesystem::path& path);
void write_sequence(const std::filesystem::path& path, const ReactionSequence& seq);

// Appropriateness map: one line per assignment, `<id>: <id1>,<id2>,...`.
void write_map(std::ostream& out, const AppropriatenessMap& map);
AppropriatenessMap read_map(std::istream& in);
void write_map(const std::filesystem::path& path, const AppropriatenessMap& map);
AppropriatenessMap read_map(const std::filesystem::path& path);

// Manifest: JSON Lines, a header record followed by one record per clip.
void write_manifest(std::ostream& out, const DatasetManifest& manifest);
DatasetManifest read_manifest(std::istream& in);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

/// Loads the clip pairs of `records`, resolving file paths against `root`.
std::vector<ClipPair> load_clip_pairs(const std::filesystem::path& root,
                                      std::span<const ClipRecord* const> records);

}  // namespace mafrg::io
