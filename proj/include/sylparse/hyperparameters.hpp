#pragma once

#include <cstddef>

namespace sylparse {

// Architecture switches for the ablation and baseline configurations.
struct AblationFlags {
  bool no_initial_bio = false;    // syllable vector without the initial boundary-tag embedding
  bool softmax_wseg = false;      // per-syllable softmax instead of the segmentation CRF
  bool softmax_pos = false;       // per-word softmax instead of the POS CRF
  bool no_pos_embedding = false;  // parser input without the POS tag embedding
  bool pipeline = false;          // three independently trained networks

  friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

struct Hyperparameters {
  std::size_t syllable_dim = 100;
  std::size_t word_dim = 100;
  std::size_t boundary_dim = 25;
  std::size_t pos_dim = 100;
  std::size_t lstm_hidden = 128;
  std::size_t lstm_layers = 2;
  std::size_t ffnn_dim = 100;
  AblationFlags flags;

  // Width of v_i, the syllable vector.
  std::size_t syllable_input_dim() const {
    return syllable_dim + (flags.no_initial_bio ? 0 : boundary_dim);
  }
  // Width of x_j: word embedding plus the syllable-composed embedding.
  std::size_t word_input_dim() const { return word_dim + ffnn_dim; }
  // Width of z_j, the parser input.
  std::size_t parser_input_dim() const {
    return word_input_dim() + (flags.no_pos_embedding ? 0 : pos_dim);
  }
  std::size_t bilstm_output_dim() const { return 2 * lstm_hidden; }

  friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

}  // namespace sylparse
