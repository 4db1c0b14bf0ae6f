#include "gava/text.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>
#include <unordered_set>

namespace gava {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.push_back(static_cast<char>(
                std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

double token_f1(const std::vector<std::string>& a_tokens,
                const std::vector<std::string>& b_tokens) {
    if (a_tokens.empty() || b_tokens.empty()) return 0.0;
    std::unordered_map<std::string_view, int> counts;
    for (const auto& t : a_tokens) ++counts[t];
    std::size_t overlap = 0;
    for (const auto& t : b_tokens) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    return 2.0 * static_cast<double>(overlap) /
           static_cast<double>(a_tokens.size() + b_tokens.size());
}

double token_f1(std::string_view a, std::string_view b) {
    return token_f1(tokenize(a), tokenize(b));
}

double token_coverage(std::string_view question, std::string_view candidate) {
    const auto q_tokens = tokenize(question);
    if (q_tokens.empty()) return 0.0;
    const auto c_tokens = tokenize(candidate);
    std::unordered_set<std::string_view> vocab(c_tokens.begin(), c_tokens.end());
    std::size_t hits = 0;
    for (const auto& t : q_tokens) {
        if (vocab.count(t)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(q_tokens.size());
}

bool is_blank(std::string_view text) {
    return std::all_of(text.begin(), text.end(), [](char c) {
        return std::isspace(static_cast<unsigned char>(c));
    });
}

}  // namespace gava
