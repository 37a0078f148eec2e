#include "mathsearch/latex.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <optional>
#include <unordered_set>

namespace mathsearch {

namespace {

using Kind = LatexToken::Kind;

const std::unordered_set<std::string_view>& symbol_commands() {
  static const std::unordered_set<std::string_view> table = {
      // Greek
      "alpha", "beta", "gamma", "delta", "epsilon", "varepsilon", "zeta",
      "eta", "theta", "vartheta", "iota", "kappa", "lambda", "mu", "nu", "xi",
      "pi", "varpi", "rho", "varrho", "sigma", "varsigma", "tau", "upsilon",
      "phi", "varphi", "chi", "psi", "omega", "Gamma", "Delta", "Theta",
      "Lambda", "Xi", "Pi", "Sigma", "Upsilon", "Phi", "Psi", "Omega",
      // large operators and function names
      "sum", "prod", "coprod", "int", "iint", "iiint", "oint", "bigcup",
      "bigcap", "bigoplus", "bigotimes", "bigvee", "bigwedge", "lim", "limsup",
      "liminf", "sup", "inf", "max", "min", "arg", "det", "exp", "log", "ln",
      "lg", "sin", "cos", "tan", "cot", "sec", "csc", "arcsin", "arccos",
      "arctan", "sinh", "cosh", "tanh", "coth", "deg", "dim", "gcd", "hom",
      "ker", "Pr", "mod", "bmod",
      // binary operators
      "pm", "mp", "times", "div", "cdot", "ast", "star", "circ", "bullet",
      "oplus", "ominus", "otimes", "oslash", "odot", "cup", "cap", "setminus",
      "wedge", "vee", "land", "lor", "neg", "lnot",
      // relations
      "leq", "le", "geq", "ge", "neq", "ne", "equiv", "approx", "cong", "sim",
      "simeq", "propto", "ll", "gg", "prec", "succ", "preceq", "succeq",
      "subset", "supset", "subseteq", "supseteq", "in", "notin", "ni", "mid",
      "nmid", "parallel", "perp", "models", "vdash", "dashv", "not",
      // arrows
      "to", "rightarrow", "leftarrow", "Rightarrow", "Leftarrow",
      "leftrightarrow", "Leftrightarrow", "mapsto", "implies", "iff",
      "longrightarrow", "longleftarrow", "Longrightarrow", "Longleftarrow",
      "uparrow", "downarrow", "gets",
      // miscellaneous
      "infty", "partial", "nabla", "forall", "exists", "nexists", "emptyset",
      "varnothing", "aleph", "hbar", "ell", "Re", "Im", "wp", "angle",
      "triangle", "square", "prime", "dagger", "ldots", "cdots", "vdots",
      "ddots", "dots", "cdotp", "colon",
      // delimiters
      "langle", "rangle", "lbrace", "rbrace", "lfloor", "rfloor", "lceil",
      "rceil", "vert", "Vert", "lvert", "rvert", "lVert", "rVert", "backslash",
  };
  return table;
}

// Commands dropped together with nothing else.
const std::unordered_set<std::string_view>& ignored_commands() {
  static const std::unordered_set<std::string_view> table = {
      "displaystyle", "textstyle", "scriptstyle", "scriptscriptstyle", "rm",
      "bf", "it", "cal", "limits", "nolimits", "quad", "qquad", "hfill",
      "enspace", "thinspace", "medspace", "thickspace", "negthinspace",
      "nonumber", "big", "Big", "bigg", "Bigg", "bigl", "bigr", "Bigl", "Bigr",
      "biggl", "biggr", "Biggl", "Biggr", "middle",
  };
  return table;
}

// Commands whose single argument is spliced into the current baseline.
const std::unordered_set<std::string_view>& style_commands() {
  static const std::unordered_set<std::string_view> table = {
      "mathrm", "mathbf", "mathit", "mathsf", "mathtt", "mathcal", "mathbb",
      "mathfrak", "mathscr", "mathnormal", "boldsymbol", "bm", "operatorname",
  };
  return table;
}

const std::unordered_set<std::string_view>& text_commands() {
  static const std::unordered_set<std::string_view> table = {
      "text", "mbox", "hbox", "textrm", "textit", "textbf", "textsf", "texttt",
  };
  return table;
}

// Marks drawn over their argument; the argument hangs BELOW the mark.
const std::unordered_set<std::string_view>& over_accents() {
  static const std::unordered_set<std::string_view> table = {
      "hat", "bar", "tilde", "vec", "dot", "ddot", "overline", "widehat",
      "widetilde", "overrightarrow", "overleftarrow", "check", "breve",
      "acute", "grave", "mathring",
  };
  return table;
}

const std::unordered_set<std::string_view>& under_accents() {
  static const std::unordered_set<std::string_view> table = {"underline"};
  return table;
}

const std::unordered_set<std::string_view>& matrix_environments() {
  static const std::unordered_set<std::string_view> table = {
      "matrix", "pmatrix", "bmatrix", "Bmatrix", "vmatrix",
      "Vmatrix", "smallmatrix", "cases", "array",
  };
  return table;
}

bool is_ascii_alpha(char ch) {
  return std::isalpha(static_cast<unsigned char>(ch)) != 0;
}

std::size_t utf8_length(unsigned char lead) {
  if (lead >= 0xF0) return 4;
  if (lead >= 0xE0) return 3;
  if (lead >= 0xC0) return 2;
  return 1;
}

std::string collapse_whitespace(std::string_view raw) {
  std::string out;
  bool pending_space = false;
  for (char ch : raw) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(ch);
    }
  }
  return out;
}

class Tokenizer {
 public:
  explicit Tokenizer(std::string_view src) : src_(src) {}

  std::vector<LatexToken> run() {
    while (pos_ < src_.size()) step();
    return std::move(tokens_);
  }

 private:
  void emit(Kind kind, std::string text, std::size_t at) {
    tokens_.push_back(LatexToken{kind, std::move(text), at});
  }

  void skip_spaces() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
  }

  // Reads "{...}" with balanced nesting and returns the inner text.
  std::string read_braced_raw(std::string_view what) {
    skip_spaces();
    if (pos_ >= src_.size() || src_[pos_] != '{') {
      throw ParseError(pos_, std::string("expected '{' after \\") +
                                 std::string(what));
    }
    const std::size_t open = pos_++;
    int depth = 1;
    const std::size_t start = pos_;
    while (pos_ < src_.size()) {
      char ch = src_[pos_];
      if (ch == '\\' && pos_ + 1 < src_.size()) {
        pos_ += 2;
        continue;
      }
      if (ch == '{') ++depth;
      if (ch == '}' && --depth == 0) {
        std::string inner(src_.substr(start, pos_ - start));
        ++pos_;
        return inner;
      }
      ++pos_;
    }
    throw ParseError(open, "unbalanced '{'");
  }

  void step() {
    const std::size_t at = pos_;
    const char ch = src_[pos_];
    const auto uch = static_cast<unsigned char>(ch);
    if (std::isspace(uch) || ch == '~') {
      ++pos_;
      return;
    }
    if (ch == '%') {
      while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      return;
    }
    if (uch >= 0x80) {
      const std::size_t len = std::min(utf8_length(uch), src_.size() - pos_);
      emit(Kind::Symbol, std::string(src_.substr(pos_, len)), at);
      pos_ += len;
      return;
    }
    ++pos_;
    switch (ch) {
      case '{': emit(Kind::GroupOpen, "{", at); return;
      case '}': emit(Kind::GroupClose, "}", at); return;
      case '^': emit(Kind::Superscript, "^", at); return;
      case '_': emit(Kind::Subscript, "_", at); return;
      case '&': emit(Kind::AlignmentTab, "&", at); return;
      case '?': emit(Kind::Wildcard, "?", at); return;
      case '#':
      case '$':
        throw ParseError(at, std::string("unexpected '") + ch + "'");
      case '\\': command(at); return;
      default: break;
    }
    if (std::iscntrl(uch)) throw ParseError(at, "control character");
    emit(Kind::Symbol, std::string(1, ch), at);
  }

  void command(std::size_t at) {
    if (pos_ >= src_.size()) throw ParseError(at, "dangling '\\'");
    const char next = src_[pos_];
    if (!is_ascii_alpha(next)) {
      ++pos_;
      switch (next) {
        case '\\': emit(Kind::RowBreak, "\\\\", at); return;
        case ',': case ';': case ':': case '!': case ' ':
          return;
        case '{': case '}': case '%': case '#': case '&': case '_': case '$':
          emit(Kind::Symbol, std::string(1, next), at);
          return;
        case '|': emit(Kind::Symbol, "Vert", at); return;
        default:
          throw ParseError(at, std::string("unknown command \\") + next);
      }
    }
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_ascii_alpha(src_[pos_])) ++pos_;
    std::string name(src_.substr(start, pos_ - start));
    if (name == "begin" || name == "end") {
      std::string env = collapse_whitespace(read_braced_raw(name));
      if (env.empty()) throw ParseError(at, "empty environment name");
      emit(name == "begin" ? Kind::EnvironmentBegin : Kind::EnvironmentEnd,
           std::move(env), at);
      return;
    }
    if (text_commands().contains(name)) {
      std::string content = collapse_whitespace(read_braced_raw(name));
      if (!content.empty()) emit(Kind::Symbol, std::move(content), at);
      return;
    }
    if (name == "qvar") {
      std::string id = collapse_whitespace(read_braced_raw(name));
      emit(Kind::Wildcard, id.empty() ? "?" : std::move(id), at);
      return;
    }
    emit(Kind::Command, std::move(name), at);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::vector<LatexToken> tokens_;
};

class Parser {
 public:
  Parser(std::vector<LatexToken> tokens, std::size_t src_size)
      : tokens_(std::move(tokens)), end_pos_(src_size) {}

  SymbolLayoutTree parse() {
    auto items = parse_sequence(StopAt::EndOfInput);
    auto root = link_baseline(std::move(items));
    if (!root) throw ParseError(0, "empty formula");
    return SymbolLayoutTree(std::move(*root));
  }

 private:
  enum class StopAt { EndOfInput, GroupClose, Bracket, Cell };

  bool at_end() const { return pos_ >= tokens_.size(); }
  const LatexToken& peek() const { return tokens_[pos_]; }
  std::size_t here() const { return at_end() ? end_pos_ : peek().position; }

  [[noreturn]] void fail(std::size_t at, const std::string& msg) const {
    throw ParseError(at, msg);
  }

  bool stops(const LatexToken& tok, StopAt stop) const {
    switch (stop) {
      case StopAt::EndOfInput: return false;
      case StopAt::GroupClose: return tok.kind == Kind::GroupClose;
      case StopAt::Bracket:
        return tok.kind == Kind::Symbol && tok.text == "]";
      case StopAt::Cell:
        return tok.kind == Kind::AlignmentTab || tok.kind == Kind::RowBreak ||
               tok.kind == Kind::EnvironmentEnd;
    }
    return false;
  }

  std::vector<SymbolNode> parse_sequence(StopAt stop) {
    std::vector<SymbolNode> items;
    while (!at_end()) {
      const LatexToken& tok = peek();
      if (stops(tok, stop)) return items;
      if (tok.kind == Kind::Superscript || tok.kind == Kind::Subscript) {
        attach_script(items);
        continue;
      }
      parse_atom(items);
    }
    switch (stop) {
      case StopAt::EndOfInput: break;
      case StopAt::GroupClose: fail(end_pos_, "unbalanced '{'");
      case StopAt::Bracket: fail(end_pos_, "missing ']'");
      case StopAt::Cell: fail(end_pos_, "unterminated environment");
    }
    return items;
  }

  void attach_script(std::vector<SymbolNode>& items) {
    const LatexToken tok = peek();
    ++pos_;
    if (items.empty()) fail(tok.position, "script without a base");
    const Relation rel =
        tok.kind == Kind::Superscript ? Relation::Super : Relation::Sub;
    SymbolNode& base = items.back();
    if (base.has_child(rel)) {
      fail(tok.position, tok.kind == Kind::Superscript ? "double superscript"
                                                       : "double subscript");
    }
    auto arg = parse_argument(tok.position, tok.text);
    if (arg) base.set_child(rel, std::move(*arg));
  }

  // One required argument: a braced group or a single atom.
  std::optional<SymbolNode> parse_argument(std::size_t owner_pos,
                                           std::string_view owner) {
    if (at_end()) {
      fail(owner_pos, "missing argument for " + std::string(owner));
    }
    const LatexToken& tok = peek();
    switch (tok.kind) {
      case Kind::GroupOpen: {
        ++pos_;
        auto items = parse_sequence(StopAt::GroupClose);
        ++pos_;
        return link_baseline(std::move(items));
      }
      case Kind::Symbol:
      case Kind::Wildcard:
      case Kind::Command:
      case Kind::EnvironmentBegin: {
        std::vector<SymbolNode> items;
        parse_atom(items);
        return link_baseline(std::move(items));
      }
      default:
        fail(tok.position, "missing argument for " + std::string(owner));
    }
  }

  void parse_atom(std::vector<SymbolNode>& items) {
    const LatexToken tok = peek();
    ++pos_;
    switch (tok.kind) {
      case Kind::Symbol:
        items.emplace_back(tok.text);
        return;
      case Kind::Wildcard:
        items.emplace_back(std::string(kWildcardLabel));
        return;
      case Kind::GroupOpen: {
        auto inner = parse_sequence(StopAt::GroupClose);
        ++pos_;
        for (auto& node : inner) items.push_back(std::move(node));
        return;
      }
      case Kind::GroupClose:
        fail(tok.position, "unbalanced '}'");
      case Kind::AlignmentTab:
        fail(tok.position, "'&' outside an environment");
      case Kind::RowBreak:
        fail(tok.position, "'\\\\' outside an environment");
      case Kind::EnvironmentEnd:
        fail(tok.position, "unmatched \\end{" + tok.text + "}");
      case Kind::EnvironmentBegin:
        items.push_back(parse_environment(tok));
        return;
      case Kind::Command:
        parse_command(tok, items);
        return;
      case Kind::Superscript:
      case Kind::Subscript:
        fail(tok.position, "script without a base");
    }
  }

  void parse_command(const LatexToken& tok, std::vector<SymbolNode>& items) {
    const std::string& name = tok.text;
    if (name == "frac" || name == "dfrac" || name == "tfrac" ||
        name == "cfrac") {
      auto num = parse_argument(tok.position, "\\" + name);
      auto den = parse_argument(tok.position, "\\" + name);
      SymbolNode frac{std::string(kFractionLabel)};
      if (num) frac.set_child(Relation::Above, std::move(*num));
      if (den) frac.set_child(Relation::Below, std::move(*den));
      items.push_back(std::move(frac));
      return;
    }
    if (name == "sqrt") {
      SymbolNode root{std::string(kRootLabel)};
      if (!at_end() && peek().kind == Kind::Symbol && peek().text == "[") {
        ++pos_;
        auto index = link_baseline(parse_sequence(StopAt::Bracket));
        ++pos_;
        if (index) root.set_child(Relation::Above, std::move(*index));
      }
      auto radicand = parse_argument(tok.position, "\\sqrt");
      if (radicand) root.set_child(Relation::Within, std::move(*radicand));
      items.push_back(std::move(root));
      return;
    }
    if (name == "left" || name == "right") {
      if (at_end()) fail(tok.position, "missing delimiter after \\" + name);
      if (peek().kind == Kind::Symbol && peek().text == ".") ++pos_;
      return;
    }
    if (ignored_commands().contains(name)) return;
    if (style_commands().contains(name)) {
      auto arg = parse_argument(tok.position, "\\" + name);
      if (arg) items.push_back(std::move(*arg));
      return;
    }
    const bool over = over_accents().contains(name);
    if (over || under_accents().contains(name)) {
      auto arg = parse_argument(tok.position, "\\" + name);
      SymbolNode mark(name);
      if (arg) mark.set_child(over ? Relation::Below : Relation::Above,
                              std::move(*arg));
      items.push_back(std::move(mark));
      return;
    }
    if (symbol_commands().contains(name)) {
      items.emplace_back(name);
      return;
    }
    fail(tok.position, "unknown command \\" + name);
  }

  SymbolNode parse_environment(const LatexToken& begin) {
    const std::string& env = begin.text;
    if (!matrix_environments().contains(env)) {
      fail(begin.position, "unsupported environment '" + env + "'");
    }
    if (env == "array") {
      // column specification
      if (at_end() || peek().kind != Kind::GroupOpen) {
        fail(here(), "array requires a column specification");
      }
      int depth = 0;
      do {
        if (at_end()) fail(end_pos_, "unbalanced '{'");
        if (peek().kind == Kind::GroupOpen) ++depth;
        if (peek().kind == Kind::GroupClose) --depth;
        ++pos_;
      } while (depth > 0);
    }

    std::vector<std::vector<std::optional<SymbolNode>>> rows(1);
    bool last_row_blank = true;
    while (true) {
      const std::size_t cell_start = pos_;
      auto cell = link_baseline(parse_sequence(StopAt::Cell));
      if (pos_ != cell_start) last_row_blank = false;
      rows.back().push_back(std::move(cell));
      const LatexToken& sep = peek();
      ++pos_;
      if (sep.kind == Kind::AlignmentTab) {
        last_row_blank = false;
      } else if (sep.kind == Kind::RowBreak) {
        rows.emplace_back();
        last_row_blank = true;
      } else {
        if (sep.text != env) {
          fail(sep.position, "\\begin{" + env + "} closed by \\end{" +
                                 sep.text + "}");
        }
        break;
      }
    }
    if (last_row_blank) rows.pop_back();
    if (rows.empty()) fail(begin.position, "empty " + env + " environment");

    std::size_t cols = 0;
    for (const auto& row : rows) cols = std::max(cols, row.size());
    if (env == "cases") {
      if (cols > 2) fail(begin.position, "cases rows take at most two columns");
      cols = 2;
    }
    MatrixPayload grid(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        grid.at(r, c) = std::move(rows[r][c]);
      }
    }
    return SymbolNode::make_matrix(std::move(grid));
  }

  std::vector<LatexToken> tokens_;
  std::size_t pos_ = 0;
  std::size_t end_pos_;
};

// ---------------------------------------------------------------------------
// Serialization

void append_piece(std::string& out, std::string_view piece) {
  if (piece.empty()) return;
  if (is_ascii_alpha(piece.front())) {
    // "\alpha" followed by a letter needs a separating space.
    std::size_t i = out.size();
    while (i > 0 && is_ascii_alpha(out[i - 1])) --i;
    if (i < out.size() && i > 0 && out[i - 1] == '\\') out.push_back(' ');
  }
  out.append(piece);
}

std::string label_latex(const std::string& label) {
  if (label.size() == 1) {
    switch (label[0]) {
      case '{': case '}': case '%': case '#': case '&': case '_': case '$':
        return "\\" + label;
      default:
        return label;
    }
  }
  const auto lead = static_cast<unsigned char>(label[0]);
  if (lead >= 0x80 && utf8_length(lead) == label.size()) return label;
  if (symbol_commands().contains(label)) return "\\" + label;
  return "\\text{" + label + "}";
}

class Emitter {
 public:
  explicit Emitter(LatexStyle style) : style_(style) {}

  void node(std::string& out, const SymbolNode& n) const {
    const std::string& label = n.label();
    if (const auto* m = n.matrix()) {
      append_piece(out, "\\begin{matrix}");
      for (std::size_t r = 0; r < m->rows; ++r) {
        if (r > 0) out.append("\\\\");
        for (std::size_t c = 0; c < m->cols; ++c) {
          if (c > 0) out.push_back('&');
          if (const auto& cell = m->at(r, c)) {
            chain(out, *cell);
          } else {
            out.append("{}");
          }
        }
      }
      out.append("\\end{matrix}");
    } else if (label == kFractionLabel) {
      append_piece(out, "\\frac");
      braced(out, n.child(Relation::Above));
      braced(out, n.child(Relation::Below));
    } else if (label == kRootLabel) {
      append_piece(out, "\\sqrt");
      if (const auto* index = n.child(Relation::Above)) {
        out.push_back('[');
        chain(out, *index);
        out.push_back(']');
      }
      braced(out, n.child(Relation::Within));
    } else if (over_accents().contains(label)) {
      append_piece(out, "\\" + label);
      braced(out, n.child(Relation::Below));
    } else if (under_accents().contains(label)) {
      append_piece(out, "\\" + label);
      braced(out, n.child(Relation::Above));
    } else {
      append_piece(out, label_latex(label));
    }
    if (const auto* sub = n.child(Relation::Sub)) script(out, '_', *sub);
    if (const auto* sup = n.child(Relation::Super)) script(out, '^', *sup);
  }

  // Emits a node and its NEXT successors.
  void chain(std::string& out, const SymbolNode& start) const {
    for (const SymbolNode* n = &start; n; n = n->child(Relation::Next)) {
      node(out, *n);
    }
  }

 private:
  void braced(std::string& out, const SymbolNode* content) const {
    out.push_back('{');
    if (content) chain(out, *content);
    out.push_back('}');
  }

  void script(std::string& out, char op, const SymbolNode& content) const {
    out.push_back(op);
    if (style_ == LatexStyle::Compact && content.is_leaf() &&
        !content.matrix() && content.label() != kFractionLabel &&
        content.label() != kRootLabel) {
      const std::string text = label_latex(content.label());
      if (text.size() == 1) {
        out.append(text);
        return;
      }
    }
    braced(out, &content);
  }

  LatexStyle style_;
};

}  // namespace

bool is_symbol_command(std::string_view name) {
  return symbol_commands().contains(name);
}

std::vector<LatexToken> tokenize_latex(std::string_view src) {
  return Tokenizer(src).run();
}

SymbolLayoutTree parse_latex(std::string_view src) {
  auto tokens = tokenize_latex(src);
  if (tokens.empty()) throw ParseError(0, "empty formula");
  return Parser(std::move(tokens), src.size()).parse();
}

std::string to_latex(const SymbolNode& node, LatexStyle style) {
  std::string out;
  Emitter(style).chain(out, node);
  return out;
}

std::string to_latex(const SymbolLayoutTree& tree, LatexStyle style) {
  return to_latex(tree.root(), style);
}

}  // namespace mathsearch
