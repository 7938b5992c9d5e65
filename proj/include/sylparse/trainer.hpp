#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sylparse/checkpoint.hpp"
#include "sylparse/corpus_io.hpp"
#include "sylparse/evaluator.hpp"
#include "sylparse/lexicon.hpp"
#include "sylparse/model.hpp"
#include "sylparse/predict.hpp"

namespace sylparse {

struct TrainingConfig {
  std::size_t epochs = 50;
  double learning_rate = 0.001;
  double keep_probability = 0.67;
  double word_dropout_alpha = 0.25;
  std::uint64_t seed = 1;
  Hyperparameters model;

  std::string wseg_train, pos_train, dep_train;
  std::string wseg_dev, pos_dev, dep_dev;
  std::string lexicon;           // optional external lexicon; derived from training data otherwise
  std::string syllable_vectors;  // optional pre-trained vectors (word2vec text format)
  std::string word_vectors;
  std::string model_path;        // where the selected checkpoint is written
  std::string log_path;          // per-epoch records

  void validate() const {
    if (epochs < 1) throw std::invalid_argument("config: epochs must be at least 1");
    if (!(keep_probability > 0.0 && keep_probability <= 1.0)) {
      throw std::invalid_argument("config: keep_probability must lie in (0, 1]");
    }
    if (word_dropout_alpha < 0.0) throw std::invalid_argument("config: word_dropout_alpha must be >= 0");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("config: learning_rate must be positive");
    if (model.lstm_layers < 1 || model.lstm_hidden < 1 || model.syllable_dim < 1 || model.word_dim < 1 ||
        model.ffnn_dim < 1 || (!model.flags.no_initial_bio && model.boundary_dim < 1) ||
        (!model.flags.no_pos_embedding && model.pos_dim < 1)) {
      throw std::invalid_argument("config: dimensions must be positive");
    }
  }
};

namespace detail {

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw DataError("config: '" + key + "' expects a boolean, got '" + v + "'");
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// "key = value" lines; '#' starts a comment. Relative paths are resolved
// against `base_dir`.
inline TrainingConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  TrainingConfig c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    auto path = [&](std::string& field) {
      const std::filesystem::path p(value);
      field = (p.is_relative() && !base_dir.empty()) ? (base_dir / p).string() : value;
    };
    try {
      if (key == "epochs") c.epochs = std::stoul(value);
      else if (key == "learning_rate") c.learning_rate = std::stod(value);
      else if (key == "keep_probability") c.keep_probability = std::stod(value);
      else if (key == "word_dropout_alpha") c.word_dropout_alpha = std::stod(value);
      else if (key == "seed") c.seed = std::stoull(value);
      else if (key == "syllable_dim") c.model.syllable_dim = std::stoul(value);
      else if (key == "word_dim") c.model.word_dim = std::stoul(value);
      else if (key == "boundary_dim") c.model.boundary_dim = std::stoul(value);
      else if (key == "pos_dim") c.model.pos_dim = std::stoul(value);
      else if (key == "lstm_hidden") c.model.lstm_hidden = std::stoul(value);
      else if (key == "lstm_layers") c.model.lstm_layers = std::stoul(value);
      else if (key == "ffnn_dim") c.model.ffnn_dim = std::stoul(value);
      else if (key == "no_initial_bio") c.model.flags.no_initial_bio = detail::parse_bool(key, value);
      else if (key == "softmax_wseg") c.model.flags.softmax_wseg = detail::parse_bool(key, value);
      else if (key == "softmax_pos") c.model.flags.softmax_pos = detail::parse_bool(key, value);
      else if (key == "no_pos_embedding") c.model.flags.no_pos_embedding = detail::parse_bool(key, value);
      else if (key == "pipeline") c.model.flags.pipeline = detail::parse_bool(key, value);
      else if (key == "wseg_train") path(c.wseg_train);
      else if (key == "pos_train") path(c.pos_train);
      else if (key == "dep_train") path(c.dep_train);
      else if (key == "wseg_dev") path(c.wseg_dev);
      else if (key == "pos_dev") path(c.pos_dev);
      else if (key == "dep_dev") path(c.dep_dev);
      else if (key == "lexicon") path(c.lexicon);
      else if (key == "syllable_vectors") path(c.syllable_vectors);
      else if (key == "word_vectors") path(c.word_vectors);
      else if (key == "model") path(c.model_path);
      else if (key == "log") path(c.log_path);
      else throw DataError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    } catch (const std::logic_error&) {
      throw DataError("config line " + std::to_string(line_no) + ": bad value for '" + key + "'");
    }
  }
  return c;
}

inline TrainingConfig load_config(const std::string& path) {
  std::ifstream in = open_input(path);
  return parse_config(in, std::filesystem::path(path).parent_path());
}

using PretrainedVectors = std::vector<std::pair<std::string, std::vector<double>>>;

// Word2vec text format: optional "count dim" header, then one token and
// `dim` reals per line.
inline PretrainedVectors read_word_vectors(std::istream& in, std::size_t dim) {
  PretrainedVectors out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = detail::split_whitespace(line);
    if (tokens.empty()) continue;
    if (line_no == 1 && tokens.size() == 2) continue;
    if (tokens.size() != dim + 1) {
      throw DataError("vectors line " + std::to_string(line_no) + ": expected a token and " +
                      std::to_string(dim) + " values");
    }
    std::vector<double> values(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      try {
        values[k] = std::stod(tokens[k + 1]);
      } catch (const std::exception&) {
        throw DataError("vectors line " + std::to_string(line_no) + ": bad number '" + tokens[k + 1] + "'");
      }
    }
    out.emplace_back(tokens[0], std::move(values));
  }
  return out;
}

// Training counts #(s) and #(w) for word dropout.
struct FrequencyTable {
  std::map<std::string, std::size_t> syllables;
  std::map<std::string, std::size_t> words;

  void add(const AnnotatedSentence& s) {
    for (const auto& syl : s.syllables) ++syllables[syl];
    for (std::size_t j = 0; j < s.word_count(); ++j) ++words[word_form(s, j)];
  }
};

struct TrainingData {
  std::vector<AnnotatedSentence> wseg_train, pos_train, dep_train;
  std::vector<AnnotatedSentence> wseg_dev, pos_dev, dep_dev;
  std::optional<Lexicon> lexicon;
  PretrainedVectors syllable_vectors, word_vectors;
};

inline TrainingData load_training_data(const TrainingConfig& c, Warnings* warnings = nullptr) {
  TrainingData d;
  d.wseg_train = load_corpus(c.wseg_train, CorpusFormat::segmented, warnings);
  d.pos_train = load_corpus(c.pos_train, CorpusFormat::tagged, warnings);
  d.dep_train = load_corpus(c.dep_train, CorpusFormat::conllu, warnings);
  if (!c.wseg_dev.empty()) d.wseg_dev = load_corpus(c.wseg_dev, CorpusFormat::segmented, warnings);
  if (!c.pos_dev.empty()) d.pos_dev = load_corpus(c.pos_dev, CorpusFormat::tagged, warnings);
  if (!c.dep_dev.empty()) d.dep_dev = load_corpus(c.dep_dev, CorpusFormat::conllu, warnings);
  if (!c.lexicon.empty()) {
    std::ifstream in = open_input(c.lexicon);
    d.lexicon = read_lexicon(in);
  }
  if (!c.syllable_vectors.empty()) {
    std::ifstream in = open_input(c.syllable_vectors);
    d.syllable_vectors = read_word_vectors(in, c.model.syllable_dim);
  }
  if (!c.word_vectors.empty()) {
    std::ifstream in = open_input(c.word_vectors);
    d.word_vectors = read_word_vectors(in, c.model.word_dim);
  }
  return d;
}

// Inventories, lexicon and freshly initialised parameters for `data`.
inline JointModel build_model(const TrainingConfig& config, const TrainingData& data) {
  if (data.wseg_train.empty() || data.pos_train.empty() || data.dep_train.empty()) {
    throw DataError("training: all three training corpora must be non-empty");
  }
  FrequencyTable freq;
  std::map<std::string, int> pos_tags, labels;
  for (const auto* corpus : {&data.wseg_train, &data.pos_train, &data.dep_train}) {
    for (const auto& s : *corpus) freq.add(s);
  }
  for (const auto* corpus : {&data.pos_train, &data.dep_train}) {
    for (const auto& s : *corpus) {
      if (!s.pos_tags) continue;
      for (const auto& t : *s.pos_tags) pos_tags[t];
    }
  }
  for (const auto& s : data.dep_train) {
    if (!s.deprels) continue;
    for (const auto& l : *s.deprels) labels[l];
  }
  if (pos_tags.empty()) throw DataError("training: no POS tags in the tagging or parsing corpora");
  if (labels.empty()) throw DataError("training: no dependency labels in the parsing corpus");

  ModelVocabulary vocab;
  for (const auto& [tok, n] : freq.syllables) vocab.syllables.add(tok, n);
  for (const auto& [tok, n] : freq.words) vocab.words.add(tok, n);
  for (const auto& [tok, v] : data.syllable_vectors) vocab.syllables.add(tok);
  for (const auto& [tok, v] : data.word_vectors) vocab.words.add(tok);
  for (const auto& [t, unused] : pos_tags) vocab.pos_tags.add(t);
  for (const auto& [l, unused] : labels) vocab.labels.add(l);

  Lexicon lexicon;
  if (data.lexicon) {
    lexicon = *data.lexicon;
  } else {
    for (const auto* corpus : {&data.wseg_train, &data.pos_train, &data.dep_train}) {
      const Lexicon part = build_lexicon(*corpus);
      for (const auto& e : part.entries()) lexicon.insert_word(e);
    }
  }

  JointModel model(config.model, std::move(vocab), std::move(lexicon), config.seed);
  auto load = [&](const PretrainedVectors& vectors, const Vocabulary& v, Parameter* EmbeddingTables::*table) {
    for (Task t : {Task::segmentation, Task::tagging, Task::parsing}) {
      Parameter& p = *(model.network(t).encoder().tables().*table);
      for (const auto& [tok, values] : vectors) {
        const std::size_t id = v.id(tok);
        std::copy(values.begin(), values.end(), p.value.row(id).begin());
      }
      if (model.network_count() == 1) break;
    }
  };
  load(data.syllable_vectors, model.vocabulary().syllables, &EmbeddingTables::syllables);
  load(data.word_vectors, model.vocabulary().words, &EmbeddingTables::words);
  return model;
}

struct ScheduledSentence {
  Task task;
  std::size_t index;
  friend bool operator==(const ScheduledSentence&, const ScheduledSentence&) = default;
};

namespace detail {

inline std::vector<std::size_t> sample_indices(std::size_t size, std::size_t k, std::mt19937_64& rng,
                                               const char* corpus, Warnings* warnings) {
  std::vector<std::size_t> out;
  if (size >= k) {
    std::vector<std::size_t> all(size);
    std::iota(all.begin(), all.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, size - 1);
      std::swap(all[i], all[pick(rng)]);
    }
    out.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
  } else {
    warn(warnings, std::string(corpus) + " corpus smaller than the parsing corpus; sampling with replacement");
    std::uniform_int_distribution<std::size_t> pick(0, size - 1);
    for (std::size_t i = 0; i < k; ++i) out.push_back(pick(rng));
  }
  return out;
}

}  // namespace detail

// One epoch's sentence stream: every parsing sentence plus as many sampled
// (without replacement) from each of the segmentation and tagging corpora,
// shuffled together. Fully determined by (seed, epoch).
inline std::vector<ScheduledSentence> epoch_schedule(std::size_t wseg_size, std::size_t pos_size,
                                                     std::size_t dep_size, std::uint64_t seed,
                                                     std::size_t epoch, Warnings* warnings = nullptr) {
  if (wseg_size == 0 || pos_size == 0 || dep_size == 0) {
    throw std::invalid_argument("epoch_schedule: all corpora must be non-empty");
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), 0x5c4edu};
  std::mt19937_64 rng(seq);
  std::vector<ScheduledSentence> out;
  out.reserve(3 * dep_size);
  for (std::size_t i = 0; i < dep_size; ++i) out.push_back({Task::parsing, i});
  for (std::size_t i : detail::sample_indices(wseg_size, dep_size, rng, "segmentation", warnings)) {
    out.push_back({Task::segmentation, i});
  }
  for (std::size_t i : detail::sample_indices(pos_size, dep_size, rng, "tagging", warnings)) {
    out.push_back({Task::tagging, i});
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

// The individual loss terms of one training sentence.
struct TaskLosses {
  std::optional<ad::Expr> wseg, pos, arc, label;

  std::vector<ad::Expr> terms() const {
    std::vector<ad::Expr> out;
    for (const auto* t : {&wseg, &pos, &arc, &label}) {
      if (*t) out.push_back(**t);
    }
    return out;
  }
};

namespace detail {

inline void require_layer(bool present, Task task, const char* layer) {
  if (!present) {
    throw DataError(std::string("sentence_loss: ") + task_name(task) + " sentence lacks the " + layer +
                    " layer");
  }
}

inline std::vector<std::size_t> tag_ids(const TagSet& set, const std::vector<std::string>& tags,
                                        const char* what) {
  std::vector<std::size_t> out;
  out.reserve(tags.size());
  for (const auto& t : tags) {
    const auto id = set.find(t);
    if (!id) throw DataError(std::string("sentence_loss: unknown ") + what + " '" + t + "'");
    out.push_back(*id);
  }
  return out;
}

}  // namespace detail

// Segmentation sentences give L_ws; tagging sentences L_pos; parsing
// sentences L_pos + L_arc + L_label, with the parser reading the tagger's
// Viterbi tags. In the pipeline configuration the parsing network reads
// gold tags and contributes only L_arc + L_label. Words always come from
// the gold segmentation and initial tags from the lexicon.
inline TaskLosses task_losses(ad::Graph& g, const JointModel& model, const AnnotatedSentence& s, Task task,
                              ForwardContext& ctx) {
  TaskLosses out;
  detail::require_layer(!s.syllables.empty(), task, "syllable");
  const Network& net = model.network(task);
  const Encoder& enc = net.encoder();
  const auto initial = initial_tags(s.syllables, model.lexicon());
  const auto v = enc.syllable_vectors(g, s.syllables, initial, ctx);
  const auto r = enc.wseg_states(g, v, ctx);

  if (task == Task::segmentation) {
    detail::require_layer(s.words.has_value(), task, "segmentation");
    const auto emissions = enc.wseg_emissions(g, r, ctx);
    std::vector<std::size_t> gold;
    for (BoundaryTag t : tags_from_spans(*s.words, s.syllables.size())) gold.push_back(static_cast<std::size_t>(t));
    out.wseg = net.sequence_loss(g, emissions, gold, net.wseg_transitions());
    return out;
  }

  detail::require_layer(s.words.has_value(), task, "segmentation");
  detail::require_layer(s.pos_tags.has_value(), task, "POS");
  const auto gold_pos = detail::tag_ids(model.vocabulary().pos_tags, *s.pos_tags, "POS tag");
  const auto x = enc.word_vectors(g, s.syllables, *s.words, r, ctx);
  const bool pipeline_parser = task == Task::parsing && model.network_count() > 1;
  std::vector<std::size_t> parser_pos = gold_pos;
  if (!pipeline_parser) {
    const auto pos = enc.pos_states(g, x, ctx);
    out.pos = net.sequence_loss(g, pos.emissions, gold_pos, net.pos_transitions());
    if (task == Task::tagging) return out;
    parser_pos = Network::decode_sequence(pos.emissions, net.pos_transitions());
  }

  detail::require_layer(s.heads.has_value(), task, "head");
  detail::require_layer(s.deprels.has_value(), task, "dependency label");
  const auto labels = detail::tag_ids(model.vocabulary().labels, *s.deprels, "dependency label");
  const auto dep = enc.dep_states(g, x, parser_pos, ctx);
  const ArcScores arcs = net.parser().score_arcs(g, dep, ctx);
  out.arc = arc_hinge_loss(g, arcs, *s.heads);
  out.label = label_loss(g, net.parser(), arcs, *s.heads, labels);
  return out;
}

inline ad::Expr sentence_loss(ad::Graph& g, const JointModel& model, const AnnotatedSentence& s, Task task,
                              ForwardContext& ctx) {
  const auto terms = task_losses(g, model, s, task, ctx).terms();
  return ad::sum(terms);
}

struct DevScores {
  double wseg_f1 = 0.0;
  double ptag_f1 = 0.0;
  double uas_f1 = 0.0;
  double las_f1 = 0.0;
  // Unweighted mean of WSeg, PTag and LAS F1: the model-selection score.
  double average() const { return (wseg_f1 + ptag_f1 + las_f1) / 3.0; }
};

// End-to-end decoding of raw dev input (segmentation included), scored by
// the evaluator: WSeg on the segmentation set, PTag on the tagging set,
// UAS/LAS on the parsing set.
inline DevScores evaluate_dev(const JointModel& model, std::span<const AnnotatedSentence> wseg_dev,
                              std::span<const AnnotatedSentence> pos_dev,
                              std::span<const AnnotatedSentence> dep_dev) {
  DevScores out;
  auto run = [&](std::span<const AnnotatedSentence> gold) {
    Warnings ignored;
    const auto system = predict(model, gold, {}, nullptr, &ignored);
    return score(gold, system);
  };
  out.wseg_f1 = run(wseg_dev).wseg.f1;
  out.ptag_f1 = run(pos_dev).ptag.f1;
  const EvalReport dep = run(dep_dev);
  out.uas_f1 = dep.uas.f1;
  out.las_f1 = dep.las.f1;
  return out;
}

struct EpochRecord {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  DevScores dev;
  bool selected = false;  // new best average at this epoch
  std::size_t nonprojective = 0;
};

inline void write_epoch_record(std::ostream& out, const EpochRecord& r) {
  char loss[32];
  std::snprintf(loss, sizeof(loss), "%.6f", r.mean_loss);
  out << "epoch=" << r.epoch << " loss=" << loss << " wseg_f1=" << format_percent(r.dev.wseg_f1)
      << " ptag_f1=" << format_percent(r.dev.ptag_f1) << " uas_f1=" << format_percent(r.dev.uas_f1)
      << " las_f1=" << format_percent(r.dev.las_f1) << " average=" << format_percent(r.dev.average())
      << " nonprojective=" << r.nonprojective << " selected=" << (r.selected ? 1 : 0) << '\n';
}

struct TrainingResult {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  std::string checkpoint;  // serialized best model

  const EpochRecord& best() const { return epochs.at(best_epoch - 1); }
};

// Per-sentence Adam training over the epoch schedule. After every epoch the
// dev sets are decoded end to end; the checkpoint with the highest average
// dev F1 (earliest on ties) is kept and, when `config.model_path` is set,
// written to disk. Missing dev sets fall back to the training corpora.
inline TrainingResult train(const TrainingConfig& config, const TrainingData& data,
                            std::ostream* log = nullptr, Warnings* warnings = nullptr) {
  config.validate();
  JointModel model = build_model(config, data);
  auto dev_or_train = [&](const std::vector<AnnotatedSentence>& dev, const std::vector<AnnotatedSentence>& train,
                          const char* name) -> std::span<const AnnotatedSentence> {
    if (!dev.empty()) return dev;
    detail::warn(warnings, std::string("no ") + name + " dev set; scoring on its training corpus");
    return train;
  };
  const auto wseg_dev = dev_or_train(data.wseg_dev, data.wseg_train, "segmentation");
  const auto pos_dev = dev_or_train(data.pos_dev, data.pos_train, "tagging");
  const auto dep_dev = dev_or_train(data.dep_dev, data.dep_train, "parsing");

  std::size_t nonprojective = 0;
  for (const auto& s : data.dep_train) {
    if (s.heads && !is_projective(*s.heads)) ++nonprojective;
  }

  std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                    0xd50u};
  std::mt19937_64 rng(seq);
  ForwardContext ctx;
  ctx.training = true;
  ctx.keep_probability = config.keep_probability;
  ctx.word_dropout_alpha = config.word_dropout_alpha;
  ctx.rng = &rng;

  TrainingResult result;
  double best_average = -1.0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto schedule = epoch_schedule(data.wseg_train.size(), data.pos_train.size(), data.dep_train.size(),
                                         config.seed, epoch, warnings);
    double total_loss = 0.0;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
      const ScheduledSentence item = schedule[k];
      const auto& corpus = item.task == Task::segmentation ? data.wseg_train
                           : item.task == Task::tagging    ? data.pos_train
                                                           : data.dep_train;
      try {
        ad::Graph g;
        const ad::Expr loss = sentence_loss(g, model, corpus[item.index], item.task, ctx);
        total_loss += loss.scalar();
        g.backward(loss);
        adam_step(model.parameters(), config.learning_rate);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(k + 1) + " (" + task_name(item.task) + " sentence " +
                           std::to_string(item.index + 1) + "): " + e.what());
      }
    }

    EpochRecord record;
    record.epoch = epoch;
    record.mean_loss = total_loss / static_cast<double>(schedule.size());
    record.dev = evaluate_dev(model, wseg_dev, pos_dev, dep_dev);
    record.nonprojective = nonprojective;
    if (record.dev.average() > best_average) {
      best_average = record.dev.average();
      record.selected = true;
      result.best_epoch = epoch;
      result.checkpoint = serialize(model);
      if (!config.model_path.empty()) {
        std::ofstream out(config.model_path, std::ios::binary);
        if (!out) throw DataError("cannot write " + config.model_path);
        out << result.checkpoint;
      }
    }
    if (log) {
      write_epoch_record(*log, record);
      log->flush();
    }
    result.epochs.push_back(record);
  }
  return result;
}

// Loads every file named by the config, trains, and writes the log file
// when configured.
inline TrainingResult train(const TrainingConfig& config, Warnings* warnings = nullptr) {
  const TrainingData data = load_training_data(config, warnings);
  if (config.log_path.empty()) return train(config, data, nullptr, warnings);
  std::ofstream log(config.log_path);
  if (!log) throw DataError("cannot write " + config.log_path);
  return train(config, data, &log, warnings);
}

}  // namespace sylparse
