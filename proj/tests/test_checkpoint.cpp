#include <gtest/gtest.h>

#include <sstream>

#include "toy.hpp"

using namespace sylparse;

namespace {

JointModel toy_model(const AblationFlags& flags = {}) {
  TrainingConfig c = toy::small_config(1);
  c.model.flags = flags;
  return build_model(c, toy::data());
}

JointModel reload(const std::string& bytes) {
  std::istringstream in(bytes);
  return load_checkpoint(in);
}

}  // namespace

TEST(Checkpoint, RoundTripIsByteIdenticalAndPredictsTheSame) {
  const JointModel model = toy_model();
  const std::string bytes = serialize(model);
  EXPECT_EQ(bytes.substr(0, 8), "SYLPCKPT");
  const JointModel back = reload(bytes);
  EXPECT_EQ(serialize(back), bytes);
  EXPECT_EQ(back.vocabulary().words, model.vocabulary().words);
  EXPECT_EQ(back.lexicon(), model.lexicon());
  const auto data = toy::data();
  EXPECT_EQ(predict(back, data.dep_train), predict(model, data.dep_train));
}

TEST(Checkpoint, FlagsAreBakedIn) {
  AblationFlags flags;
  flags.pipeline = true;
  flags.no_pos_embedding = true;
  flags.softmax_wseg = true;
  const JointModel back = reload(serialize(toy_model(flags)));
  EXPECT_EQ(back.network_count(), 3u);
  EXPECT_TRUE(back.hyperparameters().flags.no_pos_embedding);
  EXPECT_EQ(back.network(Task::segmentation).wseg_transitions(), nullptr);
  EXPECT_NE(back.network(Task::tagging).pos_transitions(), nullptr);
}

TEST(Checkpoint, RejectsCorruptInput) {
  const std::string bytes = serialize(toy_model());
  EXPECT_THROW(reload("NOTACKPT"), DataError);
  EXPECT_THROW(reload(bytes.substr(0, bytes.size() / 2)), DataError);
  std::string wrong_version = bytes;
  wrong_version[8] = 2;
  EXPECT_THROW(reload(wrong_version), DataError);
  EXPECT_THROW(load_checkpoint(std::string("/nonexistent/model.bin")), DataError);
}

TEST(Predict, SingleSyllableAndGoldSegmentation) {
  const JointModel model = toy_model();
  const auto one = model.predict(std::vector<std::string>{"Tôi"});
  EXPECT_EQ(one.word_count(), 1u);
  EXPECT_EQ(*one.heads, std::vector<std::size_t>{0});

  const auto data = toy::data();
  const auto out = predict(model, data.wseg_train, PredictOptions{true});
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].words, data.wseg_train[i].words);
    EXPECT_TRUE(is_tree(*out[i].heads));
    EXPECT_TRUE(is_projective(*out[i].heads));
  }
  std::vector<AnnotatedSentence> raw{AnnotatedSentence{}};
  raw[0].syllables = {"a", "b"};
  EXPECT_THROW(predict(model, raw, PredictOptions{true}), DataError);
}
