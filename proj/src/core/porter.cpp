// Porter (1980) suffix-stripping stemmer, original algorithm without later
// extensions. Input is expected to be lowercase.

#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>

#include "csi/topics.hpp"

namespace csi {

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool is_consonant(std::string_view w, std::size_t i) {
  if (is_vowel(w[i])) return false;
  if (w[i] != 'y') return true;
  // 'y' flips relative to the letter before it.
  bool negate = false;
  while (i > 0 && w[i] == 'y') {
    negate = !negate;
    --i;
  }
  return !is_vowel(w[i]) != negate;
}

int measure(std::string_view stem) {
  int m = 0;
  bool prev_vowel = false;
  for (std::size_t i = 0; i < stem.size(); ++i) {
    bool cons = is_consonant(stem, i);
    if (cons && prev_vowel) ++m;
    prev_vowel = !cons;
  }
  return m;
}

bool contains_vowel(std::string_view stem) {
  for (std::size_t i = 0; i < stem.size(); ++i)
    if (!is_consonant(stem, i)) return true;
  return false;
}

bool ends_double_consonant(std::string_view w) {
  return w.size() >= 2 && w[w.size() - 1] == w[w.size() - 2] &&
         is_consonant(w, w.size() - 1);
}

bool ends_cvc(std::string_view w) {
  if (w.size() < 3) return false;
  std::size_t n = w.size();
  char last = w[n - 1];
  return is_consonant(w, n - 3) && !is_consonant(w, n - 2) && is_consonant(w, n - 1) &&
         last != 'w' && last != 'x' && last != 'y';
}

bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

using Condition = std::function<bool(std::string_view)>;

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
  Condition condition;
};

// The first rule whose suffix matches decides; later rules are not tried.
std::string apply_rules(const std::string& word, std::initializer_list<Rule> rules) {
  for (const auto& rule : rules) {
    if (ends_with(word, rule.suffix)) {
      std::string_view stem(word.data(), word.size() - rule.suffix.size());
      if (!rule.condition || rule.condition(stem))
        return std::string(stem) + std::string(rule.replacement);
      return word;
    }
  }
  return word;
}

bool m_positive(std::string_view s) { return measure(s) > 0; }
bool m_above_one(std::string_view s) { return measure(s) > 1; }

std::string step1a(const std::string& w) {
  return apply_rules(w, {{"sses", "ss", {}}, {"ies", "i", {}}, {"ss", "ss", {}}, {"s", "", {}}});
}

std::string step1b(const std::string& w) {
  if (ends_with(w, "eed")) {
    std::string_view stem(w.data(), w.size() - 3);
    return measure(stem) > 0 ? std::string(stem) + "ee" : w;
  }
  std::string stem;
  bool stripped = false;
  for (std::string_view suffix : {"ed", "ing"}) {
    if (ends_with(w, suffix)) {
      stem = w.substr(0, w.size() - suffix.size());
      if (contains_vowel(stem)) {
        stripped = true;
        break;
      }
    }
  }
  if (!stripped) return w;
  if (ends_with(stem, "at") || ends_with(stem, "bl") || ends_with(stem, "iz")) return stem + "e";
  if (ends_double_consonant(stem)) {
    char last = stem.back();
    if (last != 'l' && last != 's' && last != 'z') stem.pop_back();
    return stem;
  }
  if (measure(stem) == 1 && ends_cvc(stem)) return stem + "e";
  return stem;
}

std::string step1c(const std::string& w) {
  return apply_rules(w, {{"y", "i", contains_vowel}});
}

std::string step2(const std::string& w) {
  return apply_rules(w, {
                            {"ational", "ate", m_positive},
                            {"tional", "tion", m_positive},
                            {"enci", "ence", m_positive},
                            {"anci", "ance", m_positive},
                            {"izer", "ize", m_positive},
                            {"abli", "able", m_positive},
                            {"alli", "al", m_positive},
                            {"entli", "ent", m_positive},
                            {"eli", "e", m_positive},
                            {"ousli", "ous", m_positive},
                            {"ization", "ize", m_positive},
                            {"ation", "ate", m_positive},
                            {"ator", "ate", m_positive},
                            {"alism", "al", m_positive},
                            {"iveness", "ive", m_positive},
                            {"fulness", "ful", m_positive},
                            {"ousness", "ous", m_positive},
                            {"aliti", "al", m_positive},
                            {"iviti", "ive", m_positive},
                            {"biliti", "ble", m_positive},
                        });
}

std::string step3(const std::string& w) {
  return apply_rules(w, {
                            {"icate", "ic", m_positive},
                            {"ative", "", m_positive},
                            {"alize", "al", m_positive},
                            {"iciti", "ic", m_positive},
                            {"ical", "ic", m_positive},
                            {"ful", "", m_positive},
                            {"ness", "", m_positive},
                        });
}

std::string step4(const std::string& w) {
  auto ion = [](std::string_view s) {
    return measure(s) > 1 && (s.back() == 's' || s.back() == 't');
  };
  return apply_rules(w, {
                            {"al", "", m_above_one},    {"ance", "", m_above_one},
                            {"ence", "", m_above_one},  {"er", "", m_above_one},
                            {"ic", "", m_above_one},    {"able", "", m_above_one},
                            {"ible", "", m_above_one},  {"ant", "", m_above_one},
                            {"ement", "", m_above_one}, {"ment", "", m_above_one},
                            {"ent", "", m_above_one},   {"ion", "", ion},
                            {"ou", "", m_above_one},    {"ism", "", m_above_one},
                            {"ate", "", m_above_one},   {"iti", "", m_above_one},
                            {"ous", "", m_above_one},   {"ive", "", m_above_one},
                            {"ize", "", m_above_one},
                        });
}

std::string step5a(const std::string& w) {
  if (!ends_with(w, "e")) return w;
  std::string_view stem(w.data(), w.size() - 1);
  int m = measure(stem);
  if (m > 1 || (m == 1 && !ends_cvc(stem))) return std::string(stem);
  return w;
}

std::string step5b(const std::string& w) {
  if (ends_with(w, "ll") && measure(std::string_view(w).substr(0, w.size() - 1)) > 1)
    return w.substr(0, w.size() - 1);
  return w;
}

}  // namespace

std::string porter_stem(std::string_view word) {
  std::string w(word);
  if (w.empty()) return w;
  w = step1a(w);
  w = step1b(w);
  w = step1c(w);
  w = step2(w);
  w = step3(w);
  w = step4(w);
  w = step5a(w);
  w = step5b(w);
  return w;
}

}  // namespace csi
