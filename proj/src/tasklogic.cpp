#include "csp/tasklogic.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>

#include "csp/error.hpp"

namespace csp {

TaskAst TaskAst::goal(std::string label) {
  TaskAst ast;
  ast.kind = Kind::Goal;
  ast.label = std::move(label);
  return ast;
}

TaskAst TaskAst::node(Kind kind, std::vector<TaskAst> children) {
  TaskAst ast;
  ast.kind = kind;
  ast.children = std::move(children);
  return ast;
}

namespace {

std::string describe_expected(const std::vector<std::string>& expected) {
  std::string out;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i) out += ", ";
    out += expected[i];
  }
  return out;
}

}  // namespace

ParseError::ParseError(std::size_t position, std::vector<std::string> expected, std::string_view found)
    : std::runtime_error("parse error at position " + std::to_string(position) + ": expected " +
                         describe_expected(expected) + ", found " + std::string(found)),
      position_(position),
      expected_(std::move(expected)) {}

namespace {

enum class Tok { Label, And, Or, Next, LParen, RParen, End };

struct Token {
  Tok kind;
  std::size_t pos;
  std::string text;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  auto starts_with = [&](std::string_view lit) { return s.substr(i, lit.size()) == lit; };
  while (i < s.size()) {
    const auto ch = static_cast<unsigned char>(s[i]);
    if (std::isspace(ch)) {
      ++i;
    } else if (std::isalpha(ch) || ch == '_') {
      const std::size_t begin = i;
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      tokens.push_back({Tok::Label, begin, std::string(s.substr(begin, i - begin))});
    } else if (ch == '&') {
      tokens.push_back({Tok::And, i++, "'&'"});
    } else if (ch == '|') {
      tokens.push_back({Tok::Or, i++, "'|'"});
    } else if (ch == '>') {
      tokens.push_back({Tok::Next, i++, "'>'"});
    } else if (ch == '(') {
      tokens.push_back({Tok::LParen, i++, "'('"});
    } else if (ch == ')') {
      tokens.push_back({Tok::RParen, i++, "')'"});
    } else if (starts_with("∧")) {
      tokens.push_back({Tok::And, i, "'∧'"});
      i += 3;
    } else if (starts_with("∨")) {
      tokens.push_back({Tok::Or, i, "'∨'"});
      i += 3;
    } else if (starts_with("○")) {
      tokens.push_back({Tok::Next, i, "'○'"});
      i += 3;
    } else {
      throw ParseError(i, {"label", "'('", "operator"}, "'" + std::string(1, s[i]) + "'");
    }
  }
  tokens.push_back({Tok::End, s.size(), "end of input"});
  return tokens;
}

void append_flattened(std::vector<TaskAst>& into, TaskAst child, TaskAst::Kind kind) {
  if (child.kind == kind) {
    for (auto& grandchild : child.children) into.push_back(std::move(grandchild));
  } else {
    into.push_back(std::move(child));
  }
}

TaskAst make_node(TaskAst::Kind kind, std::vector<TaskAst> operands) {
  if (operands.size() == 1) return std::move(operands.front());
  std::vector<TaskAst> children;
  for (auto& op : operands) append_flattened(children, std::move(op), kind);
  return TaskAst::node(kind, std::move(children));
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  TaskAst parse() {
    TaskAst ast = parse_binary(0);
    if (peek().kind != Tok::End) fail({"'&'", "'|'", "'>'", "end of input"});
    return ast;
  }

 private:
  // level 0: Or, 1: And, 2: Next
  TaskAst parse_binary(int level) {
    if (level == 3) return parse_atom();
    static constexpr Tok kOps[3] = {Tok::Or, Tok::And, Tok::Next};
    static constexpr TaskAst::Kind kKinds[3] = {TaskAst::Kind::Or, TaskAst::Kind::And, TaskAst::Kind::Next};
    std::vector<TaskAst> operands;
    operands.push_back(parse_binary(level + 1));
    while (peek().kind == kOps[level]) {
      ++pos_;
      operands.push_back(parse_binary(level + 1));
    }
    return make_node(kKinds[level], std::move(operands));
  }

  TaskAst parse_atom() {
    const Token& tok = peek();
    if (tok.kind == Tok::Label) {
      ++pos_;
      return TaskAst::goal(tok.text);
    }
    if (tok.kind == Tok::LParen) {
      ++pos_;
      TaskAst inner = parse_binary(0);
      if (peek().kind != Tok::RParen) fail({"')'", "'&'", "'|'", "'>'"});
      ++pos_;
      return inner;
    }
    fail({"label", "'('"});
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const Token& tok = peek();
    throw ParseError(tok.pos, std::move(expected), tok.kind == Tok::Label ? "label " + tok.text : tok.text);
  }

  const Token& peek() const { return tokens_[pos_]; }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

int precedence(TaskAst::Kind kind) {
  switch (kind) {
    case TaskAst::Kind::Or:
      return 1;
    case TaskAst::Kind::And:
      return 2;
    case TaskAst::Kind::Next:
      return 3;
    case TaskAst::Kind::Goal:
      return 4;
  }
  return 4;
}

using WordSet = std::set<Word>;

WordSet concatenate(const WordSet& left, const WordSet& right) {
  WordSet out;
  for (const Word& a : left) {
    for (const Word& b : right) {
      Word w = a;
      w.insert(w.end(), b.begin(), b.end());
      out.insert(std::move(w));
    }
  }
  return out;
}

WordSet reduce(const TaskAst& ast, std::span<const std::string> labels) {
  switch (ast.kind) {
    case TaskAst::Kind::Goal: {
      const auto it = std::find(labels.begin(), labels.end(), ast.label);
      if (it == labels.end()) throw SchemaError({"task references unknown goal " + ast.label});
      return {Word{static_cast<std::size_t>(it - labels.begin())}};
    }
    case TaskAst::Kind::Or: {
      WordSet out;
      for (const auto& child : ast.children) {
        WordSet sub = reduce(child, labels);
        out.insert(sub.begin(), sub.end());
      }
      return out;
    }
    case TaskAst::Kind::Next: {
      WordSet out{Word{}};
      for (const auto& child : ast.children) out = concatenate(out, reduce(child, labels));
      return out;
    }
    case TaskAst::Kind::And: {
      std::vector<WordSet> blocks;
      for (const auto& child : ast.children) blocks.push_back(reduce(child, labels));
      std::vector<std::size_t> order(blocks.size());
      std::iota(order.begin(), order.end(), 0);
      WordSet out;
      do {
        WordSet acc{Word{}};
        for (std::size_t b : order) acc = concatenate(acc, blocks[b]);
        out.insert(acc.begin(), acc.end());
      } while (std::next_permutation(order.begin(), order.end()));
      return out;
    }
  }
  return {};
}

void collect(const TaskAst& ast, std::vector<std::string>& out) {
  if (ast.kind == TaskAst::Kind::Goal) {
    if (std::find(out.begin(), out.end(), ast.label) == out.end()) out.push_back(ast.label);
    return;
  }
  for (const auto& child : ast.children) collect(child, out);
}

}  // namespace

TaskAst parse(std::string_view formula) { return Parser(tokenize(formula)).parse(); }

TaskAst normalize(TaskAst ast) {
  if (ast.kind == TaskAst::Kind::Goal) return ast;
  std::vector<TaskAst> operands;
  for (auto& child : ast.children) operands.push_back(normalize(std::move(child)));
  if (operands.empty()) throw std::invalid_argument("operator node without operands");
  return make_node(ast.kind, std::move(operands));
}

std::string to_string(const TaskAst& ast) {
  if (ast.kind == TaskAst::Kind::Goal) return ast.label;
  const char* op = ast.kind == TaskAst::Kind::Or ? " | " : ast.kind == TaskAst::Kind::And ? " & " : " > ";
  std::string out;
  for (std::size_t i = 0; i < ast.children.size(); ++i) {
    if (i) out += op;
    const TaskAst& child = ast.children[i];
    const bool wrap = precedence(child.kind) <= precedence(ast.kind);
    out += wrap ? "(" + to_string(child) + ")" : to_string(child);
  }
  return out;
}

std::vector<std::string> collect_labels(const TaskAst& ast) {
  std::vector<std::string> out;
  collect(ast, out);
  return out;
}

std::vector<Word> to_dnf(const TaskAst& ast, std::span<const std::string> labels) {
  const WordSet words = reduce(ast, labels);
  return {words.begin(), words.end()};
}

std::string word_to_string(const Word& word, const GoalSet& goals) {
  std::string out;
  for (std::size_t m = 0; m < word.size(); ++m) {
    if (m) out += ' ';
    out += goals[word[m]].label;
  }
  return out;
}

bool evaluate_word(const Word& word, std::span<const Certificate> trace, const GoalSet& goals,
                   std::span<const int> deadline_realizations, bool inclusive) {
  if (trace.size() < word.size()) return false;
  for (std::size_t m = 0; m < word.size(); ++m) {
    const std::size_t c = word[m];
    if (trace[m].state != goals[c].state) return false;
    if (!meets_deadline(trace[m].time, deadline_realizations[c], inclusive)) return false;
  }
  return true;
}

bool evaluate_word(const Word& word, std::span<const Certificate> trace, const GoalSet& goals, bool inclusive) {
  std::vector<int> deadlines(goals.size(), 0);
  for (std::size_t c = 0; c < goals.size(); ++c) {
    if (const auto* det = std::get_if<Deterministic>(&goals[c].deadline)) {
      deadlines[c] = det->time;
    } else if (std::find(word.begin(), word.end(), c) != word.end()) {
      throw std::invalid_argument("goal " + goals[c].label + " has a probabilistic deadline; pass a realization");
    }
  }
  return evaluate_word(word, trace, goals, deadlines, inclusive);
}

}  // namespace csp
