#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sylparse/errors.hpp"
#include "sylparse/model.hpp"

namespace sylparse {

// Checkpoint layout (all integers little-endian):
//
//   magic "SYLPCKPT", u32 version
//   u64 length + header text: "key=value\n" lines (seed, dimensions, flags)
//   string lists: syllable vocab, word vocab (each token with its count),
//                 POS tags, dependency labels, lexicon entries
//   u64 parameter count, then per parameter:
//     string name, u32 rank, u64 dims[rank], f64 payload[product(dims)]
//
// Strings are u64 length + UTF-8 bytes. Adam state is not stored.
inline constexpr char kCheckpointMagic[8] = {'S', 'Y', 'L', 'P', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

inline void put_string(std::ostream& out, const std::string& s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw DataError("checkpoint: truncated");
  return value;
}

inline std::string get_string(std::istream& in) {
  const auto n = get<std::uint64_t>(in);
  if (n > (1ull << 32)) throw DataError("checkpoint: implausible string length");
  std::string s(n, '\0');
  if (n && !in.read(s.data(), static_cast<std::streamsize>(n))) throw DataError("checkpoint: truncated");
  return s;
}

inline std::string header_text(const JointModel& model) {
  const Hyperparameters& hp = model.hyperparameters();
  std::ostringstream out;
  out << "seed=" << model.parameters().seed() << '\n'
      << "syllable_dim=" << hp.syllable_dim << '\n'
      << "word_dim=" << hp.word_dim << '\n'
      << "boundary_dim=" << hp.boundary_dim << '\n'
      << "pos_dim=" << hp.pos_dim << '\n'
      << "lstm_hidden=" << hp.lstm_hidden << '\n'
      << "lstm_layers=" << hp.lstm_layers << '\n'
      << "ffnn_dim=" << hp.ffnn_dim << '\n'
      << "no_initial_bio=" << hp.flags.no_initial_bio << '\n'
      << "softmax_wseg=" << hp.flags.softmax_wseg << '\n'
      << "softmax_pos=" << hp.flags.softmax_pos << '\n'
      << "no_pos_embedding=" << hp.flags.no_pos_embedding << '\n'
      << "pipeline=" << hp.flags.pipeline << '\n';
  return out.str();
}

inline std::map<std::string, std::uint64_t> parse_header(const std::string& text) {
  std::map<std::string, std::uint64_t> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("checkpoint: malformed header line '" + line + "'");
    try {
      out[line.substr(0, eq)] = std::stoull(line.substr(eq + 1));
    } catch (const std::exception&) {
      throw DataError("checkpoint: malformed header value in '" + line + "'");
    }
  }
  return out;
}

inline void put_vocab(std::ostream& out, const Vocabulary& v) {
  put<std::uint64_t>(out, v.size() - 1);
  for (std::size_t id = 1; id < v.size(); ++id) {
    put_string(out, v.token(id));
    put<std::uint64_t>(out, v.count(id));
  }
}

inline Vocabulary get_vocab(std::istream& in) {
  Vocabulary v;
  const auto n = get<std::uint64_t>(in);
  for (std::uint64_t k = 0; k < n; ++k) {
    const std::string token = get_string(in);
    v.add(token, get<std::uint64_t>(in));
  }
  return v;
}

inline void put_list(std::ostream& out, const std::vector<std::string>& items) {
  put<std::uint64_t>(out, items.size());
  for (const auto& s : items) put_string(out, s);
}

inline std::vector<std::string> get_list(std::istream& in) {
  const auto n = get<std::uint64_t>(in);
  std::vector<std::string> out;
  for (std::uint64_t k = 0; k < n; ++k) out.push_back(get_string(in));
  return out;
}

}  // namespace detail

inline void save_checkpoint(std::ostream& out, const JointModel& model) {
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::put<std::uint32_t>(out, kCheckpointVersion);
  detail::put_string(out, detail::header_text(model));
  const ModelVocabulary& vocab = model.vocabulary();
  detail::put_vocab(out, vocab.syllables);
  detail::put_vocab(out, vocab.words);
  detail::put_list(out, vocab.pos_tags.labels());
  detail::put_list(out, vocab.labels.labels());
  detail::put_list(out, model.lexicon().entries());
  detail::put<std::uint64_t>(out, model.parameters().size());
  for (const auto& [name, p] : model.parameters()) {
    detail::put_string(out, name);
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rank()));
    for (std::size_t d : p.value.shape()) detail::put<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(p.value.data().data()),
              static_cast<std::streamsize>(p.value.size() * sizeof(double)));
  }
}

inline std::string serialize(const JointModel& model) {
  std::ostringstream out(std::ios::binary);
  save_checkpoint(out, model);
  return out.str();
}

inline JointModel load_checkpoint(std::istream& in) {
  char magic[sizeof(kCheckpointMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw DataError("checkpoint: bad magic header");
  }
  const auto version = detail::get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto header = detail::parse_header(detail::get_string(in));
  auto field = [&](const char* key) {
    auto it = header.find(key);
    if (it == header.end()) throw DataError(std::string("checkpoint: header lacks ") + key);
    return it->second;
  };
  Hyperparameters hp;
  hp.syllable_dim = field("syllable_dim");
  hp.word_dim = field("word_dim");
  hp.boundary_dim = field("boundary_dim");
  hp.pos_dim = field("pos_dim");
  hp.lstm_hidden = field("lstm_hidden");
  hp.lstm_layers = field("lstm_layers");
  hp.ffnn_dim = field("ffnn_dim");
  hp.flags.no_initial_bio = field("no_initial_bio") != 0;
  hp.flags.softmax_wseg = field("softmax_wseg") != 0;
  hp.flags.softmax_pos = field("softmax_pos") != 0;
  hp.flags.no_pos_embedding = field("no_pos_embedding") != 0;
  hp.flags.pipeline = field("pipeline") != 0;

  ModelVocabulary vocab;
  vocab.syllables = detail::get_vocab(in);
  vocab.words = detail::get_vocab(in);
  vocab.pos_tags = TagSet(detail::get_list(in));
  vocab.labels = TagSet(detail::get_list(in));
  Lexicon lexicon;
  for (const auto& e : detail::get_list(in)) lexicon.insert_word(e);

  JointModel model(hp, std::move(vocab), std::move(lexicon), field("seed"));
  const auto count = detail::get<std::uint64_t>(in);
  if (count != model.parameters().size()) {
    throw DataError("checkpoint: " + std::to_string(count) + " parameters, model expects " +
                    std::to_string(model.parameters().size()));
  }
  for (std::uint64_t k = 0; k < count; ++k) {
    const std::string name = detail::get_string(in);
    if (!model.parameters().contains(name)) throw DataError("checkpoint: unexpected parameter " + name);
    Parameter& p = model.parameters().at(name);
    const auto rank = detail::get<std::uint32_t>(in);
    std::vector<std::size_t> shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(detail::get<std::uint64_t>(in));
    if (shape != p.value.shape()) throw DataError("checkpoint: shape mismatch for " + name);
    if (!in.read(reinterpret_cast<char*>(p.value.data().data()),
                 static_cast<std::streamsize>(p.value.size() * sizeof(double)))) {
      throw DataError("checkpoint: truncated payload for " + name);
    }
  }
  return model;
}

inline void save_checkpoint(const std::string& path, const JointModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  save_checkpoint(out, model);
}

inline JointModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return load_checkpoint(in);
}

}  // namespace sylparse
