#include "mafrg/core/types.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "mafrg/core/error.hpp"

namespace mafrg {

std::string_view to_string(Corpus corpus) {
  switch (corpus) {
    case Corpus::NoXi: return "NoXi";
    case Corpus::UDIVA: return "UDIVA";
    case Corpus::RECOLA: return "RECOLA";
    case Corpus::Synthetic: return "Synthetic";
  }
  return "Synthetic";
}

Corpus parse_corpus(std::string_view text) {
  if (text == "NoXi" || text == "NOXI" || text == "noxi") return Corpus::NoXi;
  if (text == "UDIVA" || text == "udiva") return Corpus::UDIVA;
  if (text == "RECOLA" || text == "recola") return Corpus::RECOLA;
  if (text == "Synthetic" || text == "synthetic") return Corpus::Synthetic;
  throw FormatError("unknown corpus '" + std::string(text) + "'");
}

void check_clip_pair(const ClipPair& pair) {
  if (pair.a.subject_id == pair.b.subject_id)
    throw ValidationError("clip pair " + pair.pair_id + ": both participants are subject " +
                          pair.a.subject_id);
  if (pair.a.behaviour.length() != pair.b.behaviour.length())
    throw ValidationError("clip pair " + pair.pair_id + ": participant frame counts differ (" +
                          std::to_string(pair.a.behaviour.length()) + " vs " +
                          std::to_string(pair.b.behaviour.length()) + ")");
  for (const Participant* p : {&pair.a, &pair.b}) {
    const auto& audio = p->behaviour.audio;
    if (audio && audio->rows() != p->behaviour.length())
      throw ValidationError("clip pair " + pair.pair_id + ": audio and facial frame counts differ");
  }
}

std::string assignment_id(std::string_view pair_id, Role role) {
  std::string id(pair_id);
  id += role == Role::A ? "_A" : "_B";
  return id;
}

std::string SpeakerListenerAssignment::id() const { return assignment_id(pair_id, speaker_role); }

std::vector<SpeakerListenerAssignment> enumerate_assignments(std::span<const ClipPair> pairs) {
  std::vector<const ClipPair*> order;
  order.reserve(pairs.size());
  std::unordered_set<std::string> seen;
  for (const auto& p : pairs) {
    if (!seen.insert(p.pair_id).second)
      throw ValidationError("duplicate pair_id '" + p.pair_id + "'");
    order.push_back(&p);
  }
  std::sort(order.begin(), order.end(),
            [](const ClipPair* x, const ClipPair* y) { return x->pair_id < y->pair_id; });

  std::vector<SpeakerListenerAssignment> out;
  out.reserve(2 * pairs.size());
  for (const ClipPair* p : order) {
    out.push_back({p->pair_id, Role::A, p->a.behaviour, p->b.behaviour.facial});
    out.push_back({p->pair_id, Role::B, p->b.behaviour, p->a.behaviour.facial});
  }
  return out;
}

AppropriatenessMap::AppropriatenessMap(Entries entries) : entries_(std::move(entries)) {
  for (auto& [id, set] : entries_) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
  }
}

void AppropriatenessMap::add(const std::string& id, const std::string& appropriate) {
  auto& set = entries_[id];
  auto it = std::lower_bound(set.begin(), set.end(), appropriate);
  if (it == set.end() || *it != appropriate) set.insert(it, appropriate);
}

const std::vector<std::string>* AppropriatenessMap::find(const std::string& id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

const std::vector<std::string>& AppropriatenessMap::at(const std::string& id) const {
  if (const auto* set = find(id)) return *set;
  throw ValidationError("appropriateness map has no entry for '" + id + "'");
}

std::vector<std::string> AppropriatenessMap::check(std::span<const std::string> known_ids) const {
  std::set<std::string_view> known(known_ids.begin(), known_ids.end());
  std::vector<std::string> problems;
  for (const auto& [id, set] : entries_) {
    if (!known.contains(id)) problems.push_back("entry '" + id + "' is not a known assignment");
    if (set.empty()) problems.push_back("entry '" + id + "' has an empty appropriate set");
    if (!std::binary_search(set.begin(), set.end(), id))
      problems.push_back("entry '" + id + "' does not include itself");
    for (const auto& ref : set)
      if (!known.contains(ref))
        problems.push_back("entry '" + id + "' references unknown assignment '" + ref + "'");
  }
  return problems;
}

std::string_view to_string(GenerationMode mode) {
  return mode == GenerationMode::Offline ? "offline" : "online";
}

GenerationMode parse_generation_mode(std::string_view text) {
  if (text == "offline") return GenerationMode::Offline;
  if (text == "online") return GenerationMode::Online;
  throw FormatError("unknown generation mode '" + std::string(text) + "'");
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    case Split::Unassigned: return "unassigned";
  }
  return "unassigned";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "val") return Split::Val;
  if (text == "test") return Split::Test;
  if (text == "unassigned" || text.empty()) return Split::Unassigned;
  throw FormatError("unknown split '" + std::string(text) + "'");
}

std::vector<const ClipRecord*> DatasetManifest::in_split(Split split) const {
  std::vector<const ClipRecord*> out;
  for (const auto& c : clips)
    if (c.split == split) out.push_back(&c);
  return out;
}

std::vector<std::string> DatasetManifest::subject_leaks() const {
  std::map<std::string, std::set<Split>> seen;
  for (const auto& c : clips) {
    if (c.split == Split::Unassigned) continue;
    seen[c.subject_a].insert(c.split);
    seen[c.subject_b].insert(c.split);
  }
  std::vector<std::string> leaks;
  for (const auto& [subject, splits] : seen) {
    if (splits.size() < 2) continue;
    std::string line = subject + ":";
    for (Split s : splits) line += " " + std::string(to_string(s));
    leaks.push_back(std::move(line));
  }
  return leaks;
}

}  // namespace mafrg
