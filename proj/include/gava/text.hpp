#pragma once
#include <string>
#include <string_view>
#include <vector>

namespace gava {

// Lowercase whitespace tokens. ASCII lowering; any isspace byte separates.
std::vector<std::string> tokenize(std::string_view text);

// Harmonic mean of precision/recall over lowercase token multisets:
// 2*overlap / (|A| + |B|). 0 when either side has no tokens or no overlap.
double token_f1(std::string_view a, std::string_view b);
double token_f1(const std::vector<std::string>& a_tokens,
                const std::vector<std::string>& b_tokens);

// Fraction of `question` tokens (with multiplicity) that appear in
// `candidate`. 0 when the question has no tokens.
double token_coverage(std::string_view question, std::string_view candidate);

bool is_blank(std::string_view text);

}  // namespace gava
