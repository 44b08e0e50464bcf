#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "csp/world.hpp"

namespace csp {

/// Task formula over goal labels. And/Or/Next are n-ary; the parser and
/// normalize() flatten directly nested nodes of the same kind.
struct TaskAst {
  enum class Kind { Goal, And, Or, Next };

  Kind kind = Kind::Goal;
  std::string label;
  std::vector<TaskAst> children;

  static TaskAst goal(std::string label);
  static TaskAst node(Kind kind, std::vector<TaskAst> children);

  bool operator==(const TaskAst&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, std::vector<std::string> expected, std::string_view found);

  /// 0-based byte offset into the formula.
  std::size_t position() const noexcept { return position_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::vector<std::string> expected_;
};

/// Grammar (precedence Next > And > Or, all left-associative):
///
///   or   := and  ( ('|' | '∨') and )*
///   and  := next ( ('&' | '∧') next )*
///   next := atom ( ('>' | '○') atom )*
///   atom := LABEL | '(' or ')'
///
/// LABEL is [A-Za-z_][A-Za-z0-9_]*. Whitespace is ignored.
TaskAst parse(std::string_view formula);

/// Minimal-parenthesis ASCII rendering; parse(to_string(a)) == normalize(a).
std::string to_string(const TaskAst& ast);

TaskAst normalize(TaskAst ast);

/// Labels in order of first appearance.
std::vector<std::string> collect_labels(const TaskAst& ast);

/// Sequence of goal indices.
using Word = std::vector<std::size_t>;

/// Reduces to a disjunction of words. Or unions, Next concatenates, and And
/// over n operands yields every ordering of the operand blocks (no
/// interleaving). Output is deduplicated and sorted lexicographically.
/// `labels` maps a goal index to its label; unknown labels throw SchemaError.
std::vector<Word> to_dnf(const TaskAst& ast, std::span<const std::string> labels);

std::string word_to_string(const Word& word, const GoalSet& goals);

struct Certificate {
  StateIndex state = 0;
  int time = 0;

  bool operator==(const Certificate&) const = default;
};

/// Certificate trace acceptance: the m-th certificate must sit on the m-th
/// goal's grounding and meet that goal's deadline realization. Traces shorter
/// than the word are rejected.
bool evaluate_word(const Word& word, std::span<const Certificate> trace, const GoalSet& goals,
                   std::span<const int> deadline_realizations, bool inclusive = false);

/// Same, with deterministic goal deadlines read from the goal set. Throws
/// std::invalid_argument if a goal in the word has a PMF deadline.
bool evaluate_word(const Word& word, std::span<const Certificate> trace, const GoalSet& goals,
                   bool inclusive = false);

}  // namespace csp
