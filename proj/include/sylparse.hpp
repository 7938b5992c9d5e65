#pragma once

#include "sylparse/checkpoint.hpp"
#include "sylparse/corpus_io.hpp"
#include "sylparse/crf.hpp"
#include "sylparse/encoder.hpp"
#include "sylparse/evaluator.hpp"
#include "sylparse/graph.hpp"
#include "sylparse/lexicon.hpp"
#include "sylparse/model.hpp"
#include "sylparse/ops.hpp"
#include "sylparse/parser.hpp"
#include "sylparse/predict.hpp"
#include "sylparse/trainer.hpp"
