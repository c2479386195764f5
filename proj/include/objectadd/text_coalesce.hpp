// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "objectadd/types.hpp"

namespace objectadd {

/// Splices two separately encoded prompts: the start row and the N_P prompt
/// rows of `e_p`, followed by `e_w` from its first token row onward, truncated
/// to N rows. The end row of `e_p` is dropped; `e_w`'s end and pad rows are kept.
///
/// Throws Shape when N or D differ and Overflow when N_P + N_W + 2 > N.
EmbeddingMatrix coalesce(const EmbeddingMatrix& e_p, const EmbeddingMatrix& e_w);

/// 0-based row of the object token inside the coalesced matrix. Throws
/// Overflow when the row falls outside an N-row window.
int object_token_index(int n_p, int object_word_offset, int max_tokens);

/// Default object word: last token of `tokens` that is not an article.
/// Falls back to the last token; returns -1 for an empty list.
int default_object_word_offset(const std::vector<std::string>& tokens);

}  // namespace objectadd
