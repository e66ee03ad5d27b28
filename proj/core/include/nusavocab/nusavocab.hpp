#pragma once

#include "nusavocab/codemix.hpp"
#include "nusavocab/corpus.hpp"
#include "nusavocab/document.hpp"
#include "nusavocab/error.hpp"
#include "nusavocab/expansion.hpp"
#include "nusavocab/io.hpp"
#include "nusavocab/metrics.hpp"
#include "nusavocab/mlm.hpp"
#include "nusavocab/parallel.hpp"
#include "nusavocab/pretrain_config.hpp"
#include "nusavocab/random.hpp"
#include "nusavocab/tokenizer.hpp"
#include "nusavocab/trainer.hpp"
#include "nusavocab/unicode_text.hpp"
#include "nusavocab/vocabulary.hpp"
