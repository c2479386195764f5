// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#include "objectadd/text_coalesce.hpp"

#include <algorithm>
#include <array>
#include <sstream>
#include <string_view>

#include "objectadd/error.hpp"

namespace objectadd {

EmbeddingMatrix coalesce(const EmbeddingMatrix& e_p, const EmbeddingMatrix& e_w) {
    const int n = e_p.max_tokens();
    const int d = e_p.dim();
    if (e_w.max_tokens() != n || e_w.dim() != d) throw Error(ErrorKind::Shape, "embedding matrices differ in N or D");
    if (e_p.actual_tokens < 0 || e_w.actual_tokens < 0 || e_p.actual_tokens > n - 2 || e_w.actual_tokens > n - 2)
        throw Error(ErrorKind::Contract, "actual token count outside [0, N-2]");
    if (e_p.actual_tokens + e_w.actual_tokens + 2 > n) {
        std::ostringstream os;
        os << "coalesced prompt needs " << e_p.actual_tokens + e_w.actual_tokens + 2 << " rows, window holds " << n;
        throw Error(ErrorKind::Overflow, os.str());
    }

    EmbeddingMatrix out;
    out.data = Grid<double>(n, d);
    out.actual_tokens = e_p.actual_tokens + e_w.actual_tokens;

    const int head = e_p.actual_tokens + 1;
    for (int i = 0; i < head; ++i) std::copy_n(&e_p.data(i, 0), d, &out.data(i, 0));
    for (int i = head, src = 1; i < n; ++i, ++src) std::copy_n(&e_w.data(src, 0), d, &out.data(i, 0));
    return out;
}

int object_token_index(int n_p, int object_word_offset, int max_tokens) {
    if (n_p < 0 || object_word_offset < 0) throw Error(ErrorKind::Contract, "negative token position");
    const int k = 1 + n_p + object_word_offset;
    if (k >= max_tokens) throw Error(ErrorKind::Overflow, "object token index beyond the embedding window");
    return k;
}

int default_object_word_offset(const std::vector<std::string>& tokens) {
    static constexpr std::array<std::string_view, 3> articles{"a", "an", "the"};
    for (int i = static_cast<int>(tokens.size()) - 1; i >= 0; --i) {
        std::string lower = tokens[static_cast<std::size_t>(i)];
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        if (std::find(articles.begin(), articles.end(), lower) == articles.end()) return i;
    }
    return tokens.empty() ? -1 : static_cast<int>(tokens.size()) - 1;
}

}  // namespace objectadd
