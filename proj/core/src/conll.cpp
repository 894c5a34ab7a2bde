#include "treecrf/conll.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace treecrf {

namespace {

bool parse_int(const std::string& s, int& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool is_multiword(const std::string& id) {
  return id.find('-') != std::string::npos;
}

bool is_empty_node(const std::string& id) {
  return id.find('.') != std::string::npos;
}

ConllRow split_row(const std::string& line, bool& ok) {
  ConllRow row;
  std::size_t start = 0;
  int col = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (col >= 10) {
      ok = false;
      return row;
    }
    row[col++] = line.substr(start, tab == std::string::npos ? std::string::npos
                                                            : tab - start);
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  ok = col == 10;
  return row;
}

}  // namespace

const char* to_string(ConllDialect dialect) {
  return dialect == ConllDialect::kConllX ? "conllx" : "conllu";
}

ConllDialect conll_dialect_from_string(const std::string& name) {
  if (name == "conllx" || name == "conll") return ConllDialect::kConllX;
  if (name == "conllu") return ConllDialect::kConllU;
  throw std::invalid_argument("unknown CoNLL dialect: " + name);
}

DepTree ConllSentence::tree() const {
  for (int h : heads_) {
    if (h == kUnknownHead) {
      throw std::invalid_argument("sentence has unannotated heads");
    }
  }
  return DepTree(heads_);
}

std::vector<std::string> ConllSentence::forms() const {
  std::vector<std::string> out;
  out.reserve(n());
  for (int j = 1; j <= n(); ++j) out.push_back(form(j));
  return out;
}

void ConllSentence::set_heads(std::span<const int> heads,
                              std::span<const std::string> labels) {
  if (static_cast<int>(heads.size()) != n() ||
      (!labels.empty() && labels.size() != heads.size())) {
    throw std::invalid_argument("set_heads: length mismatch");
  }
  for (int j = 1; j <= n(); ++j) {
    const int h = heads[j - 1];
    if (h != kUnknownHead && (h < 0 || h > n())) {
      throw std::invalid_argument("set_heads: head out of range");
    }
    ConllRow& row = rows[word_rows_[j - 1]];
    row[conll_col::kHead] = h == kUnknownHead ? "_" : std::to_string(h);
    if (!labels.empty()) row[conll_col::kDeprel] = labels[j - 1];
    heads_[j - 1] = h;
  }
}

void ConllSentence::reindex(ConllDialect dialect) {
  word_rows_.clear();
  heads_.clear();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string& id = rows[r][conll_col::kId];
    if (is_multiword(id) || is_empty_node(id)) {
      if (dialect != ConllDialect::kConllU) {
        throw std::invalid_argument("token id '" + id +
                                    "' is only valid in CoNLL-U");
      }
      continue;
    }
    int value = 0;
    if (!parse_int(id, value)) {
      throw std::invalid_argument("bad token id '" + id + "'");
    }
    if (value != static_cast<int>(word_rows_.size()) + 1) {
      throw std::invalid_argument("non-contiguous token id " + id);
    }
    word_rows_.push_back(static_cast<int>(r));
  }
  for (int row : word_rows_) {
    const std::string& h = rows[row][conll_col::kHead];
    int value = kUnknownHead;
    if (h != "_" && (!parse_int(h, value) || value < 0 || value > n())) {
      throw std::invalid_argument("bad head '" + h + "'");
    }
    heads_.push_back(value);
  }
}

ConllSentence ConllSentence::from_words(std::span<const std::string> forms) {
  ConllSentence s;
  for (std::size_t k = 0; k < forms.size(); ++k) {
    ConllRow row;
    row.fill("_");
    row[conll_col::kId] = std::to_string(k + 1);
    row[conll_col::kForm] = forms[k];
    s.rows.push_back(row);
  }
  s.reindex(ConllDialect::kConllX);
  return s;
}

std::vector<ConllSentence> read_conll(std::istream& in, ConllDialect dialect,
                                      const std::string& source) {
  std::vector<ConllSentence> out;
  ConllSentence current;
  int line_no = 0;
  int first_line = 0;
  auto fail = [&](int line, const std::string& what) {
    throw std::runtime_error(source + ":" + std::to_string(line) + ": " + what);
  };
  auto flush = [&] {
    if (current.rows.empty()) {
      if (!current.comments.empty()) fail(line_no, "comment block without tokens");
      return;
    }
    try {
      current.reindex(dialect);
    } catch (const std::invalid_argument& e) {
      fail(first_line, e.what());
    }
    out.push_back(std::move(current));
    current = ConllSentence();
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (current.rows.empty() && current.comments.empty()) first_line = line_no;
    if (line[0] == '#') {
      if (!current.rows.empty()) fail(line_no, "comment inside a sentence");
      current.comments.push_back(line);
      continue;
    }
    bool ok = false;
    ConllRow row = split_row(line, ok);
    if (!ok) fail(line_no, "expected 10 tab-separated columns");
    current.rows.push_back(std::move(row));
  }
  flush();
  return out;
}

std::vector<ConllSentence> read_conll_file(const std::string& path,
                                           ConllDialect dialect) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_conll(in, dialect, path);
}

void write_conll(std::ostream& out, std::span<const ConllSentence> sentences) {
  for (const auto& s : sentences) {
    for (const auto& c : s.comments) out << c << '\n';
    for (const auto& row : s.rows) {
      for (int c = 0; c < 10; ++c) {
        if (c > 0) out << '\t';
        out << row[c];
      }
      out << '\n';
    }
    out << '\n';
  }
}

void write_conll_file(const std::string& path,
                      std::span<const ConllSentence> sentences) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_conll(out, sentences);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace treecrf
