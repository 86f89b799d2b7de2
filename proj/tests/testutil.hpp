#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "pgnet/corpus.hpp"
#include "pgnet/util.hpp"

namespace testutil {

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("pgnet_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// Eight fixed article/summary pairs, small enough to memorize.
inline std::vector<pgnet::RawExample> overfit_pairs() {
  return {
      {"the red fox jumped over the old fence . it was quick .",
       "the fox jumped the fence ."},
      {"the small cat slept under the warm table . it was lazy .",
       "the cat slept under the table ."},
      {"the big dog barked at the tall gate . it was loud .",
       "the dog barked at the gate ."},
      {"the grey owl watched from the high tree . it was calm .",
       "the owl watched from the tree ."},
      {"the young boy kicked the round ball . he was happy .",
       "the boy kicked the ball ."},
      {"the old man opened the heavy door . he was slow .",
       "the man opened the door ."},
      {"the tired girl closed the blue book . she was sleepy .",
       "the girl closed the book ."},
      {"the busy cook stirred the hot soup . he was careful .",
       "the cook stirred the soup ."},
  };
}

// Template-generated corpora for the pretrain/fine-tune experiments. The two
// domains draw from one shared token pool so a news vocabulary covers the
// meeting corpus.
inline std::vector<pgnet::RawExample> synth_news(int n, uint64_t seed) {
  const std::vector<std::string> who = {"manager", "engineer", "designer",
                                        "expert",  "mayor",    "director"};
  const std::vector<std::string> verb = {"announced", "presented", "launched",
                                         "approved",  "rejected",  "reviewed"};
  const std::vector<std::string> what = {"budget",  "prototype", "report",
                                         "project", "interface", "survey"};
  const std::vector<std::string> where = {"london", "paris", "berlin", "madrid"};
  const std::vector<std::string> when = {"monday", "tuesday", "friday", "sunday"};
  pgnet::Rng rng(seed);
  std::vector<pgnet::RawExample> out;
  for (int i = 0; i < n; ++i) {
    const auto& w = who[rng.below(who.size())];
    const auto& v = verb[rng.below(verb.size())];
    const auto& o = what[rng.below(what.size())];
    const auto& p = where[rng.below(where.size())];
    const auto& d = when[rng.below(when.size())];
    const auto& o2 = what[rng.below(what.size())];
    pgnet::RawExample ex;
    ex.article = "the " + w + " " + v + " the " + o + " in " + p + " on " + d +
                 " . officials said the " + o2 + " was ready . the plan was " +
                 "discussed at length .";
    ex.summary = "the " + w + " " + v + " the " + o + " in " + p + " .";
    out.push_back(std::move(ex));
  }
  return out;
}

inline std::vector<pgnet::RawExample> synth_meetings(int n, uint64_t seed) {
  const std::vector<std::string> role = {"manager", "engineer", "designer", "expert"};
  const std::vector<std::string> artifact = {"prototype", "interface", "budget",
                                             "survey", "report"};
  const std::vector<std::string> topic = {"project", "plan", "design", "price"};
  pgnet::Rng rng(seed);
  std::vector<pgnet::RawExample> out;
  for (int i = 0; i < n; ++i) {
    const auto& r1 = role[rng.below(role.size())];
    const auto& r2 = role[rng.below(role.size())];
    const auto& a = artifact[rng.below(artifact.size())];
    const auto& t = topic[rng.below(topic.size())];
    pgnet::RawExample ex;
    ex.article = "the " + r1 + " opened the meeting . the " + r2 +
                 " presented the " + a + " and discussed the " + t +
                 " . the group agreed on the " + t + " . the " + r1 +
                 " closed the meeting .";
    ex.summary = "the " + r2 + " presented the " + a + " . the group agreed on the " +
                 t + " .";
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace testutil
