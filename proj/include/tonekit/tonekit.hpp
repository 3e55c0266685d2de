#pragma once

// Umbrella header: the whole toolkit in one include.

#include "tonekit/corpus.hpp"
#include "tonekit/edit_tags.hpp"
#include "tonekit/errors.hpp"
#include "tonekit/metrics.hpp"
#include "tonekit/normalizer.hpp"
#include "tonekit/pipeline.hpp"
#include "tonekit/rng.hpp"
#include "tonekit/rules.hpp"
#include "tonekit/seq2seq.hpp"
#include "tonekit/text_model.hpp"
#include "tonekit/unicode.hpp"
