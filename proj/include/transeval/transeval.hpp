#pragma once

#include "transeval/bleu.hpp"
#include "transeval/corpus.hpp"
#include "transeval/error.hpp"
#include "transeval/humaneval.hpp"
#include "transeval/lm.hpp"
#include "transeval/metrics.hpp"
#include "transeval/report.hpp"
#include "transeval/significance.hpp"
#include "transeval/ter.hpp"
#include "transeval/text.hpp"
#include "transeval/tokenizer.hpp"
