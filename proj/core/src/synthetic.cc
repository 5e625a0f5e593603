// Copyright 2026 The KbSlot Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kbslot/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "kbslot/dataset.h"
#include "kbslot/error.h"
#include "kbslot/tensor.h"

namespace kbslot {
namespace {

struct KbSpec {
  const char *name;
  const char *top;          // hypernym above every generic of the KB
  const char *domains[2];   // source dialogue domains
  const char *attribute;
};

const KbSpec kKbs[] = {
    {"geography", "location", {"travel", "weather"}, "coordinates"},
    {"personality", "person", {"people", "news"}, "born"},
    {"music", "work", {"media", "radio"}, "released"},
};

struct TypeSpec {
  int kb;
  const char *type;
  const char *generic;
  const char *fields[2];
  const char *cues[3];
};

const TypeSpec kTypes[] = {
    {0, "city", "municipality", {"capital", "township"}, {"downtown", "mayor", "suburbs"}},
    {0, "nation", "territory", {"republic", "kingdom"}, {"president", "border", "passport"}},
    {0, "waterway", "watercourse", {"creek", "canal"}, {"rowing", "upstream", "bridge"}},
    {0, "volcano", "landform", {"caldera", "crater"}, {"eruption", "lava", "summit"}},
    {0, "archipelago", "landmass", {"atoll", "islet"}, {"ferry", "snorkeling", "islands"}},
    {0, "reservoir", "watercourse", {"dam", "basin"}, {"shoreline", "fishing", "drinking"}},
    {0, "aerodrome", "infrastructure", {"airstrip", "heliport"}, {"flights", "runway", "terminal"}},
    {0, "ballpark", "venue", {"diamond", "bullpen"}, {"tickets", "bleachers", "innings"}},
    {1, "thespian", "performer", {"actor", "actress"}, {"movie", "role", "acting"}},
    {1, "vocalist", "entertainer", {"singer", "crooner"}, {"microphone", "duet", "sings"}},
    {1, "director", "maker", {"filmmaker", "auteur"}, {"directed", "cinema", "filmed"}},
    {1, "poet", "maker", {"lyricist", "bard"}, {"verses", "poems", "rhyme"}},
    {1, "congressman", "official", {"governor", "legislator"}, {"elected", "campaign", "vote"}},
    {1, "sprinter", "competitor", {"runner", "hurdler"}, {"race", "medal", "fastest"}},
    {1, "chemist", "scholar", {"biochemist", "pharmacologist"}, {"laboratory", "experiment", "molecule"}},
    {1, "sculptor", "artisan", {"carver", "modeler"}, {"statue", "marble", "chisel"}},
    {2, "song", "composition", {"single", "ballad"}, {"play", "lyrics", "chorus"}},
    {2, "album", "release", {"record", "lp"}, {"tracklist", "vinyl", "discography"}},
    {2, "band", "ensemble", {"quartet", "trio"}, {"concert", "gig", "tour"}},
    {2, "symphony", "composition", {"concerto", "sonata"}, {"conductor", "violins", "movement"}},
    {2, "score", "release", {"soundtrack", "cue"}, {"composer", "cinematic", "theme"}},
    {2, "hymn", "composition", {"chant", "psalm"}, {"church", "choir", "worship"}},
};

constexpr int kTypeCount = sizeof(kTypes) / sizeof(kTypes[0]);

const char *const kFrames[] = {
    "{}",
    "what about the {}",
    "tell me about the {}",
    "i mean the {} one",
    "{} something by him",
    "show me the {} again",
};

const char *const kSyllables[] = {
    "ba", "ren", "to", "mi", "sal", "ko", "ve", "dar", "lu", "fen",
    "qui", "mo", "tas", "ri", "gel", "no", "pa", "zin", "ho", "var",
    "del", "cu", "sor", "ni", "bra", "tem", "ulo", "ka", "wex", "ji",
};

std::string Capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string Fill(const char *frame, const std::string &word) {
  std::string out(frame);
  out.replace(out.find("{}"), 2, word);
  return out;
}

class Embedder {
 public:
  Embedder(int dim, std::mt19937_64 *rng) : dim_(dim), rng_(rng) {}

  Vector Random(double norm) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vector v(dim_);
    for (int i = 0; i < dim_; ++i) v(i) = n(*rng_);
    return v.normalized() * norm;
  }

  void Put(const std::string &token, const Vector &v) {
    if (!table_.count(token)) order_.push_back(token);
    table_[token] = v;
  }
  bool Has(const std::string &token) const { return table_.count(token) > 0; }

  std::string Text() const {
    std::string out;
    char buf[32];
    for (const auto &token : order_) {
      out += token;
      const Vector &v = table_.at(token);
      for (int i = 0; i < dim_; ++i) {
        std::snprintf(buf, sizeof(buf), " %.6f", v(i));
        out += buf;
      }
      out += '\n';
    }
    return out;
  }

 private:
  int dim_;
  std::mt19937_64 *rng_;
  std::map<std::string, Vector> table_;
  std::vector<std::string> order_;
};

struct Role {
  int type;
  int field;
};

struct Value {
  std::string name;
  std::vector<Role> roles;
};

}  // namespace

SyntheticFiles GenerateSynthetic(const SyntheticOptions &options) {
  if (options.embedding_dim <= 0 || options.values_per_type <= 0 ||
      options.contexts_per_role <= 0 || options.second_role_fraction < 0.0 ||
      options.second_role_fraction > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid synthetic options");
  }
  std::mt19937_64 rng(options.seed);
  Embedder emb(options.embedding_dim, &rng);

  // Embedding geometry: a direction per KB, a direction per type mixed with
  // its KB, and cue words and field names scattered around their type.
  std::vector<Vector> kb_dir;
  for (const auto &kb : kKbs) {
    kb_dir.push_back(emb.Random(1.0));
    emb.Put(kb.name, kb_dir.back() + emb.Random(0.1));
    emb.Put(kb.top, kb_dir.back() * 0.5 + emb.Random(0.8));
    emb.Put(kb.attribute, kb_dir.back() * 0.3 + emb.Random(0.5));
  }
  std::vector<Vector> type_vec;
  for (const auto &t : kTypes) {
    Vector v = (kb_dir[t.kb] * 0.5 + emb.Random(1.0)).normalized() * 1.5;
    type_vec.push_back(v);
    emb.Put(t.type, v);
    if (!emb.Has(t.generic)) {
      emb.Put(t.generic, kb_dir[t.kb] * 0.8 + emb.Random(0.6));
    }
    for (const char *f : t.fields) emb.Put(f, v * 0.8 + emb.Random(0.4));
    for (const char *c : t.cues) emb.Put(c, v * 0.8 + emb.Random(0.5));
  }
  for (const char *frame : kFrames) {
    std::istringstream words(Fill(frame, ""));
    std::string w;
    while (words >> w) {
      if (!emb.Has(w)) emb.Put(w, emb.Random(0.3));
    }
  }

  // Values: distinct pseudo names, each with a primary role and maybe a
  // second one of a different type.
  std::set<std::string> used;
  std::uniform_int_distribution<int> syl(0, std::size(kSyllables) - 1);
  auto make_name = [&]() {
    while (true) {
      std::string name;
      for (int w = 0; w < 2; ++w) {
        if (w) name += ' ';
        for (int s = 0; s < 2; ++s) name += kSyllables[syl(rng)];
      }
      if (used.insert(name).second) return name;
    }
  };
  std::uniform_int_distribution<int> coin2(0, 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> other_type(0, kTypeCount - 2);

  std::vector<Value> values;
  // Two hand-picked multi-role figures anchor the interactive examples.
  values.push_back({"clint eastwood", {{8, 0}, {10, 0}, {12, 0}, {16, 0}}});
  values.push_back({"rafi mecartin", {{11, 0}, {10, 1}}});
  used.insert("clint eastwood");
  used.insert("rafi mecartin");
  for (int t = 0; t < kTypeCount; ++t) {
    for (int i = 0; i < options.values_per_type; ++i) {
      Value v{make_name(), {{t, coin2(rng)}}};
      if (unit(rng) < options.second_role_fraction) {
        int o = other_type(rng);
        if (o >= t) ++o;
        v.roles.push_back({o, coin2(rng)});
      }
      values.push_back(std::move(v));
    }
  }

  // Knowledge base records: one entry per (value, KB) with a field per role.
  SyntheticFiles files;
  files.embedding_dim = options.embedding_dim;
  std::vector<std::string> kb_lines(std::size(kKbs));
  std::uniform_int_distribution<int> year(1900, 2020);
  std::uniform_int_distribution<int> relevance(1, 10000);
  for (const auto &v : values) {
    for (size_t kb = 0; kb < std::size(kKbs); ++kb) {
      nlohmann::ordered_json fields = nlohmann::ordered_json::object();
      for (const auto &role : v.roles) {
        const TypeSpec &t = kTypes[role.type];
        if (t.kb != static_cast<int>(kb)) continue;
        fields[t.fields[role.field]] = {
            {kKbs[kb].attribute, std::to_string(year(rng))}};
      }
      if (fields.empty()) continue;
      nlohmann::ordered_json rec;
      rec["kb"] = kKbs[kb].name;
      rec["entry"] = v.name;
      rec["aliases"] = nlohmann::ordered_json::array({v.name});
      rec["fields"] = fields;
      rec["relevance"] = static_cast<double>(relevance(rng));
      kb_lines[kb] += rec.dump() + "\n";
    }
  }
  for (size_t kb = 0; kb < std::size(kKbs); ++kb) {
    files.kb_files.emplace_back(kKbs[kb].name, kb_lines[kb]);
  }

  // Taxonomy: field -> type -> generic -> KB top term.
  std::set<std::pair<std::string, std::string>> edges;
  std::ostringstream tax;
  tax << "# child\tparent\n";
  auto edge = [&](const std::string &c, const std::string &p) {
    if (edges.insert({c, p}).second) tax << c << '\t' << p << '\n';
  };
  for (const auto &t : kTypes) {
    for (const char *f : t.fields) edge(f, t.type);
    edge(t.type, t.generic);
    edge(t.generic, kKbs[t.kb].top);
  }
  files.taxonomy = tax.str();
  files.embeddings = emb.Text();

  // Utterances and the hand-written map from source slots to target keys.
  std::vector<SlotExample> corpus;
  std::uniform_int_distribution<int> frame(0, std::size(kFrames) - 1);
  for (const auto &v : values) {
    for (const auto &role : v.roles) {
      const TypeSpec &t = kTypes[role.type];
      std::vector<int> cues = {0, 1, 2};
      std::shuffle(cues.begin(), cues.end(), rng);
      for (int c = 0; c < options.contexts_per_role; ++c) {
        SlotExample ex;
        ex.value = v.name;
        ex.context = Fill(kFrames[frame(rng)], t.cues[cues[c % 3]]);
        ex.label = Capitalize(t.type);
        ex.source_domain = kKbs[t.kb].domains[coin2(rng)];
        ex.source_key = Capitalize(ex.source_domain) + "_" + ex.label;
        ex.target_domain = "search";
        corpus.push_back(std::move(ex));
      }
    }
  }
  std::ostringstream corpus_text;
  WriteDataset(corpus_text, corpus);
  files.corpus = corpus_text.str();

  std::ostringstream hm;
  for (const auto &t : kTypes) {
    std::string label = Capitalize(t.type);
    files.labels.push_back(label);
    for (const char *d : kKbs[t.kb].domains) {
      hm << d << '\t' << Capitalize(d) << '_' << label << "\tsearch\t" << label
         << '\n';
    }
  }
  files.hardcoded_map = hm.str();
  return files;
}

std::vector<std::filesystem::path> WriteSynthetic(
    const SyntheticFiles &files, const std::filesystem::path &dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "kb");
  std::vector<fs::path> written;
  auto write = [&](const fs::path &path, const std::string &body) {
    std::ofstream out(path, std::ios::binary);
    out << body;
    if (!out) {
      throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
    }
    written.push_back(path);
  };
  for (const auto &[name, body] : files.kb_files) {
    write(dir / "kb" / (name + ".kbl"), body);
  }
  write(dir / "taxonomy.tsv", files.taxonomy);
  write(dir / "embeddings.txt", files.embeddings);
  write(dir / "corpus.jsonl", files.corpus);
  write(dir / "hm.tsv", files.hardcoded_map);
  return written;
}

}  // namespace kbslot
