#ifndef CLINASSERT_CLINASSERT_HPP
#define CLINASSERT_CLINASSERT_HPP

#include "clinassert/bench.hpp"
#include "clinassert/contextual.hpp"
#include "clinassert/error.hpp"
#include "clinassert/evaluation.hpp"
#include "clinassert/i2b2.hpp"
#include "clinassert/jsonl.hpp"
#include "clinassert/manifest.hpp"
#include "clinassert/merger.hpp"
#include "clinassert/negex.hpp"
#include "clinassert/phrase_trie.hpp"
#include "clinassert/pipeline.hpp"
#include "clinassert/runner.hpp"
#include "clinassert/synthetic.hpp"
#include "clinassert/text.hpp"
#include "clinassert/types.hpp"
#include "clinassert/unicode.hpp"

#endif  // CLINASSERT_CLINASSERT_HPP
