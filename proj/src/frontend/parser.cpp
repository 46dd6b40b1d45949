#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include <fmt/format.h>

#include "pipeforge/frontend.hpp"

namespace pipeforge {

ParseError::ParseError(ParseErrorKind kind, int line, int column, const std::string& message)
    : Error(fmt::format("line {}, column {}: {}", line, column, message)),
      kind_(kind),
      line_(line),
      column_(column) {}

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
  return out;
}

// A slice of the current line with its 1-based starting column.
struct Token {
  std::string_view text;
  int column = 1;
};

Token trim(Token t) {
  std::size_t b = 0;
  while (b < t.text.size() && std::isspace(static_cast<unsigned char>(t.text[b]))) ++b;
  std::size_t e = t.text.size();
  while (e > b && std::isspace(static_cast<unsigned char>(t.text[e - 1]))) --e;
  return {t.text.substr(b, e - b), t.column + static_cast<int>(b)};
}

struct PendingTarget {
  std::size_t instr;
  int line;
  int column;
};

class LineParser {
 public:
  LineParser(Program& program, std::vector<PendingTarget>& pending) : program_(program), pending_(pending) {}

  void parse_line(std::string_view raw, int line_no) {
    line_ = line_no;
    if (auto semi = raw.find(';'); semi != std::string_view::npos) raw = raw.substr(0, semi);
    Token rest = trim({raw, 1});
    if (rest.text.empty()) return;

    if (rest.text.front() == '.') {
      parse_directive(rest);
      return;
    }

    // Leading labels.
    while (!rest.text.empty() && is_ident_start(rest.text.front())) {
      std::size_t n = 0;
      while (n < rest.text.size() && is_ident_char(rest.text[n])) ++n;
      Token after = trim({rest.text.substr(n), rest.column + static_cast<int>(n)});
      if (after.text.empty() || after.text.front() != ':') break;
      define_label(std::string(rest.text.substr(0, n)), rest.column);
      rest = trim({after.text.substr(1), after.column + 1});
    }
    if (rest.text.empty()) return;
    parse_instruction(rest);
  }

  void finish(int last_line) {
    if (!open_labels_.empty())
      fail(ParseErrorKind::Syntax, last_line, 1,
           fmt::format("label '{}' is not followed by an instruction", open_labels_.front()));
  }

 private:
  [[noreturn]] void fail(ParseErrorKind kind, int line, int column, const std::string& msg) const {
    throw ParseError(kind, line, column, msg);
  }
  [[noreturn]] void fail(ParseErrorKind kind, int column, const std::string& msg) const {
    fail(kind, line_, column, msg);
  }

  void define_label(std::string name, int column) {
    if (program_.labels.contains(name) ||
        std::find(open_labels_.begin(), open_labels_.end(), name) != open_labels_.end())
      fail(ParseErrorKind::DuplicateLabel, column, fmt::format("label '{}' defined twice", name));
    open_labels_.push_back(std::move(name));
  }

  std::int64_t parse_number(Token t) const {
    std::string_view s = t.text;
    bool negative = false;
    if (!s.empty() && s.front() == '-') {
      negative = true;
      s.remove_prefix(1);
    }
    int base = 10;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
      base = 16;
      s.remove_prefix(2);
    }
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value, base);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
      fail(ParseErrorKind::Syntax, t.column, fmt::format("malformed number '{}'", t.text));
    return negative ? -value : value;
  }

  void parse_directive(Token t) {
    std::vector<Token> words;
    std::size_t i = 0;
    while (i < t.text.size()) {
      while (i < t.text.size() && std::isspace(static_cast<unsigned char>(t.text[i]))) ++i;
      std::size_t b = i;
      while (i < t.text.size() && !std::isspace(static_cast<unsigned char>(t.text[i]))) ++i;
      if (b < i) words.push_back({t.text.substr(b, i - b), t.column + static_cast<int>(b)});
    }
    const std::string name = upper(words.front().text);
    if (name == ".DATA") {
      if (words.size() < 3) fail(ParseErrorKind::Syntax, t.column, ".data needs an address and at least one byte");
      DataDirective d;
      std::int64_t addr = parse_number(words[1]);
      if (addr < 0 || addr > 0xFFFFFFFFll) fail(ParseErrorKind::OperandRange, words[1].column, "address out of range");
      d.addr = static_cast<std::uint32_t>(addr);
      for (std::size_t k = 2; k < words.size(); ++k) {
        std::int64_t v = parse_number(words[k]);
        if (v < 0 || v > 255)
          fail(ParseErrorKind::OperandRange, words[k].column, fmt::format("data byte {} outside [0,255]", v));
        d.bytes.push_back(static_cast<std::uint8_t>(v));
      }
      program_.data.push_back(std::move(d));
    } else if (name == ".ENTRY") {
      if (words.size() != 2) fail(ParseErrorKind::Syntax, t.column, ".entry takes one label");
      if (program_.entry) fail(ParseErrorKind::Syntax, t.column, "duplicate .entry");
      program_.entry = std::string(words[1].text);
      entry_line_ = line_;
      entry_column_ = words[1].column;
    } else {
      fail(ParseErrorKind::Syntax, t.column, fmt::format("unknown directive '{}'", words.front().text));
    }
  }

  // Splits on top-level commas; brackets and braces group.
  std::vector<Token> split_operands(Token t) const {
    std::vector<Token> out;
    if (trim(t).text.empty()) return out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= t.text.size(); ++i) {
      char c = i < t.text.size() ? t.text[i] : ',';
      if (c == '[' || c == '{') ++depth;
      if (c == ']' || c == '}') --depth;
      if (c == ',' && depth == 0) {
        Token piece = trim({t.text.substr(start, i - start), t.column + static_cast<int>(start)});
        if (piece.text.empty()) fail(ParseErrorKind::Syntax, piece.column, "empty operand");
        out.push_back(piece);
        start = i + 1;
      }
    }
    if (depth != 0) fail(ParseErrorKind::Syntax, t.column, "unbalanced brackets");
    return out;
  }

  static bool looks_like_reg(Token t) {
    return t.text.size() == 2 && (t.text[0] == 'r' || t.text[0] == 'R') && std::isdigit(static_cast<unsigned char>(t.text[1]));
  }

  Reg reg(Token t) const {
    if (!looks_like_reg(t)) fail(ParseErrorKind::Syntax, t.column, fmt::format("expected register, got '{}'", t.text));
    int idx = t.text[1] - '0';
    if (idx >= kNumRegs) fail(ParseErrorKind::OperandRange, t.column, fmt::format("register '{}' outside r0..r7", t.text));
    return Reg(idx);
  }

  static bool is_imm(Token t) { return !t.text.empty() && t.text.front() == '#'; }

  std::int32_t imm(Token t) const {
    if (!is_imm(t)) fail(ParseErrorKind::Syntax, t.column, fmt::format("expected immediate, got '{}'", t.text));
    std::int64_t v = parse_number(trim({t.text.substr(1), t.column + 1}));
    if (v < INT32_MIN || v > INT32_MAX) fail(ParseErrorKind::OperandRange, t.column, "immediate out of range");
    return static_cast<std::int32_t>(v);
  }

  // [rb, #off] or [rb]
  std::pair<Reg, std::int32_t> memory(Token t) const {
    if (t.text.size() < 2 || t.text.front() != '[' || t.text.back() != ']')
      fail(ParseErrorKind::Syntax, t.column, fmt::format("expected memory operand, got '{}'", t.text));
    auto parts = split_operands({t.text.substr(1, t.text.size() - 2), t.column + 1});
    if (parts.empty() || parts.size() > 2) fail(ParseErrorKind::Syntax, t.column, "memory operand is [rb, #off]");
    return {reg(parts[0]), parts.size() == 2 ? imm(parts[1]) : 0};
  }

  Reg single_reg_list(Token t) const {
    if (t.text.size() >= 2 && t.text.front() == '{' && t.text.back() == '}') {
      Token inner = trim({t.text.substr(1, t.text.size() - 2), t.column + 1});
      if (inner.text.find(',') != std::string_view::npos)
        fail(ParseErrorKind::Syntax, t.column, "PUSH/POP take exactly one register");
      return reg(inner);
    }
    return reg(t);
  }

  std::string label_ref(Token t) const {
    if (t.text.empty() || !is_ident_start(t.text.front()) ||
        !std::all_of(t.text.begin(), t.text.end(), is_ident_char))
      fail(ParseErrorKind::Syntax, t.column, fmt::format("expected label, got '{}'", t.text));
    return std::string(t.text);
  }

  void expect_count(const std::vector<Token>& ops, std::size_t n, Token mnemonic) const {
    if (ops.size() != n)
      fail(ParseErrorKind::Syntax, mnemonic.column,
           fmt::format("{} expects {} operand(s), got {}", mnemonic.text, n, ops.size()));
  }

  void parse_instruction(Token rest) {
    std::size_t n = 0;
    while (n < rest.text.size() && is_ident_char(rest.text[n])) ++n;
    Token mnemonic{rest.text.substr(0, n), rest.column};
    if (n == 0) fail(ParseErrorKind::Syntax, rest.column, fmt::format("expected mnemonic, got '{}'", rest.text));
    auto ops = split_operands({rest.text.substr(n), rest.column + static_cast<int>(n)});
    const std::string m = upper(mnemonic.text);

    Instruction in;
    auto two_reg_or_imm = [&](Kind with_reg, Kind with_imm) {
      expect_count(ops, 2, mnemonic);
      if (is_imm(ops[1])) {
        in = {.kind = with_imm, .dst = reg(ops[0]), .imm = imm(ops[1])};
      } else {
        in = {.kind = with_reg, .dst = reg(ops[0]), .srcs = {reg(ops[1])}};
      }
    };
    auto three_reg = [&](Kind kind) {
      expect_count(ops, 3, mnemonic);
      in = {.kind = kind, .dst = reg(ops[0]), .srcs = {reg(ops[1]), reg(ops[2])}};
    };
    auto add_like = [&](Kind three, Kind with_imm) {
      if (ops.size() == 2) {
        in = {.kind = with_imm, .dst = reg(ops[0]), .imm = imm(ops[1])};
      } else {
        three_reg(three);
      }
    };
    auto shift_op = [&](Kind kind) {
      if (ops.size() == 2) {
        in = {.kind = kind, .dst = reg(ops[0]), .srcs = {reg(ops[0])}, .imm = imm(ops[1])};
      } else {
        expect_count(ops, 3, mnemonic);
        in = {.kind = kind, .dst = reg(ops[0]), .srcs = {reg(ops[1])}, .imm = imm(ops[2])};
      }
    };
    auto mem_op = [&](Kind kind) {
      expect_count(ops, 2, mnemonic);
      auto [base, off] = memory(ops[1]);
      if (kind == Kind::Ldr || kind == Kind::Ldrb)
        in = {.kind = kind, .dst = reg(ops[0]), .srcs = {base}, .imm = off};
      else
        in = {.kind = kind, .srcs = {reg(ops[0]), base}, .imm = off};
    };

    static const std::pair<const char*, Cond> kCondMnemonics[] = {
        {"BEQ", Cond::Eq}, {"BNE", Cond::Ne}, {"BLT", Cond::Lt},
        {"BGE", Cond::Ge}, {"BGT", Cond::Gt}, {"BLE", Cond::Le},
    };

    if (m == "MOV") {
      two_reg_or_imm(Kind::Movr, Kind::Movi);
    } else if (m == "MOVI") {
      expect_count(ops, 2, mnemonic);
      in = {.kind = Kind::Movi, .dst = reg(ops[0]), .imm = imm(ops[1])};
    } else if (m == "MOVR") {
      expect_count(ops, 2, mnemonic);
      in = {.kind = Kind::Movr, .dst = reg(ops[0]), .srcs = {reg(ops[1])}};
    } else if (m == "ADD") {
      add_like(Kind::Add3, Kind::Addi);
    } else if (m == "SUB") {
      add_like(Kind::Sub3, Kind::Subi);
    } else if (m == "ADD3" || m == "SUB3") {
      three_reg(m == "ADD3" ? Kind::Add3 : Kind::Sub3);
    } else if (m == "ADDI" || m == "SUBI") {
      expect_count(ops, 2, mnemonic);
      in = {.kind = m == "ADDI" ? Kind::Addi : Kind::Subi, .dst = reg(ops[0]), .imm = imm(ops[1])};
    } else if (m == "AND" || m == "ORR" || m == "EOR" || m == "BIC") {
      expect_count(ops, 2, mnemonic);
      Kind k = m == "AND" ? Kind::And : m == "ORR" ? Kind::Orr : m == "EOR" ? Kind::Eor : Kind::Bic;
      in = {.kind = k, .dst = reg(ops[0]), .srcs = {reg(ops[1])}};
    } else if (m == "LSL" || m == "LSLI") {
      shift_op(Kind::Lsli);
    } else if (m == "LSR" || m == "LSRI") {
      shift_op(Kind::Lsri);
    } else if (m == "ASR" || m == "ASRI") {
      shift_op(Kind::Asri);
    } else if (m == "CMP" || m == "CMPR" || m == "CMPI") {
      expect_count(ops, 2, mnemonic);
      if (is_imm(ops[1]) && m != "CMPR")
        in = {.kind = Kind::Cmpi, .srcs = {reg(ops[0])}, .imm = imm(ops[1])};
      else if (m != "CMPI")
        in = {.kind = Kind::Cmpr, .srcs = {reg(ops[0]), reg(ops[1])}};
      else
        fail(ParseErrorKind::Syntax, ops[1].column, "CMPI needs an immediate");
    } else if (m == "B") {
      expect_count(ops, 1, mnemonic);
      in = {.kind = Kind::B, .target = label_ref(ops[0])};
    } else if (auto it = std::find_if(std::begin(kCondMnemonics), std::end(kCondMnemonics),
                                      [&](const auto& p) { return m == p.first; });
               it != std::end(kCondMnemonics)) {
      expect_count(ops, 1, mnemonic);
      in = {.kind = Kind::Bcc, .cond = it->second, .target = label_ref(ops[0])};
    } else if (m == "LDR") {
      mem_op(Kind::Ldr);
    } else if (m == "STR") {
      mem_op(Kind::Str);
    } else if (m == "LDRB") {
      mem_op(Kind::Ldrb);
    } else if (m == "STRB") {
      mem_op(Kind::Strb);
    } else if (m == "PUSH" || m == "POP") {
      expect_count(ops, 1, mnemonic);
      Reg x = single_reg_list(ops[0]);
      in = m == "PUSH" ? Instruction{.kind = Kind::Push, .srcs = {x}} : Instruction{.kind = Kind::Pop, .dst = x};
    } else if (m == "NOP" || m == "HALT") {
      expect_count(ops, 0, mnemonic);
      in = {.kind = m == "NOP" ? Kind::Nop : Kind::Halt};
    } else {
      fail(ParseErrorKind::UnknownMnemonic, mnemonic.column, fmt::format("unknown mnemonic '{}'", mnemonic.text));
    }

    if (auto problem = check_operands(in)) fail(ParseErrorKind::OperandRange, mnemonic.column, *problem);

    const std::size_t index = program_.instrs.size();
    for (auto& label : open_labels_) program_.labels.emplace(std::move(label), index);
    open_labels_.clear();
    if (in.target) pending_.push_back({index, line_, ops[0].column});
    program_.instrs.push_back(std::move(in));
  }

  Program& program_;
  std::vector<PendingTarget>& pending_;
  std::vector<std::string> open_labels_;
  int line_ = 0;

 public:
  int entry_line_ = 0;
  int entry_column_ = 0;
};

}  // namespace

Program parse(std::string_view source, std::string name) {
  Program program;
  program.name = std::move(name);
  std::vector<PendingTarget> pending;
  LineParser parser(program, pending);

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    std::size_t nl = source.find('\n', pos);
    if (nl == std::string_view::npos) nl = source.size();
    std::string_view line = source.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    parser.parse_line(line, ++line_no);
    pos = nl + 1;
  }
  parser.finish(line_no);

  for (const PendingTarget& p : pending) {
    const std::string& label = *program.instrs[p.instr].target;
    if (!program.labels.contains(label))
      throw ParseError(ParseErrorKind::UndefinedLabel, p.line, p.column, fmt::format("undefined label '{}'", label));
  }
  if (program.entry && !program.labels.contains(*program.entry))
    throw ParseError(ParseErrorKind::UndefinedLabel, parser.entry_line_, parser.entry_column_,
                     fmt::format("undefined entry label '{}'", *program.entry));
  return program;
}

std::string render(const Instruction& in) {
  auto R = [](Reg x) { return fmt::format("r{}", x.index); };
  const std::int32_t imm = in.imm.value_or(0);
  switch (in.kind) {
    case Kind::Movi: return fmt::format("MOV {}, #{}", R(*in.dst), imm);
    case Kind::Movr: return fmt::format("MOV {}, {}", R(*in.dst), R(in.srcs[0]));
    case Kind::Add3: return fmt::format("ADD {}, {}, {}", R(*in.dst), R(in.srcs[0]), R(in.srcs[1]));
    case Kind::Sub3: return fmt::format("SUB {}, {}, {}", R(*in.dst), R(in.srcs[0]), R(in.srcs[1]));
    case Kind::Addi: return fmt::format("ADDI {}, #{}", R(*in.dst), imm);
    case Kind::Subi: return fmt::format("SUBI {}, #{}", R(*in.dst), imm);
    case Kind::And:
    case Kind::Orr:
    case Kind::Eor:
    case Kind::Bic: return fmt::format("{} {}, {}", kind_name(in.kind), R(*in.dst), R(in.srcs[0]));
    case Kind::Lsli: return fmt::format("LSL {}, {}, #{}", R(*in.dst), R(in.srcs[0]), imm);
    case Kind::Lsri: return fmt::format("LSR {}, {}, #{}", R(*in.dst), R(in.srcs[0]), imm);
    case Kind::Asri: return fmt::format("ASR {}, {}, #{}", R(*in.dst), R(in.srcs[0]), imm);
    case Kind::Cmpr: return fmt::format("CMP {}, {}", R(in.srcs[0]), R(in.srcs[1]));
    case Kind::Cmpi: return fmt::format("CMP {}, #{}", R(in.srcs[0]), imm);
    case Kind::B: return fmt::format("B {}", *in.target);
    case Kind::Bcc: return fmt::format("B{} {}", cond_name(in.cond), *in.target);
    case Kind::Ldr:
    case Kind::Ldrb: return fmt::format("{} {}, [{}, #{}]", kind_name(in.kind), R(*in.dst), R(in.srcs[0]), imm);
    case Kind::Str:
    case Kind::Strb: return fmt::format("{} {}, [{}, #{}]", kind_name(in.kind), R(in.srcs[0]), R(in.srcs[1]), imm);
    case Kind::Push: return fmt::format("PUSH {{{}}}", R(in.srcs[0]));
    case Kind::Pop: return fmt::format("POP {{{}}}", R(*in.dst));
    case Kind::Nop: return "NOP";
    case Kind::Halt: return "HALT";
  }
  return "?";
}

std::string render(const Program& program) {
  std::ostringstream out;
  if (program.entry) out << ".entry " << *program.entry << '\n';
  for (const DataDirective& d : program.data) {
    out << fmt::format(".data 0x{:04x}", d.addr);
    for (std::uint8_t b : d.bytes) out << fmt::format(" 0x{:02x}", b);
    out << '\n';
  }
  std::vector<std::vector<std::string>> by_index(program.instrs.size());
  for (const auto& [name, at] : program.labels)
    if (at < by_index.size()) by_index[at].push_back(name);
  for (std::size_t i = 0; i < program.instrs.size(); ++i) {
    for (const std::string& label : by_index[i]) out << label << ":\n";
    out << "    " << render(program.instrs[i]) << '\n';
  }
  return out.str();
}

}  // namespace pipeforge
