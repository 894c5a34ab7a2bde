#include "treecrf/score_file.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace treecrf {

namespace {

void write_rows(std::ostream& out, std::span<const double> values, int width) {
  char buf[32];
  for (std::size_t k = 0; k < values.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g", values[k]);
    out << buf << ((k + 1) % width == 0 ? '\n' : ' ');
  }
}

}  // namespace

void write_score_record(std::ostream& out, int id, int n,
                        std::span<const double> arc,
                        std::span<const double> sib) {
  const std::size_t s = n + 1;
  if (n < 1 || arc.size() != s * s || (!sib.empty() && sib.size() != s * s * s)) {
    throw std::invalid_argument("score record: size mismatch");
  }
  out << '#' << id << ' ' << n << ' ' << (sib.empty() ? 0 : 1) << '\n';
  write_rows(out, arc, n + 1);
  write_rows(out, sib, n + 1);
}

void write_score_record(std::ostream& out, const ScoreRecord& record) {
  write_score_record(out, record.id, record.n, record.arc, record.sib);
}

std::vector<ScoreRecord> read_score_file(std::istream& in) {
  std::vector<ScoreRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] != '#') {
      throw std::runtime_error("score file: expected header, got: " + line);
    }
    std::istringstream head(line.substr(1));
    ScoreRecord r;
    int has_sib = -1;
    head >> r.id >> r.n >> has_sib;
    if (!head || r.n < 1 || (has_sib != 0 && has_sib != 1)) {
      throw std::runtime_error("score file: bad header: " + line);
    }
    const std::size_t s = r.n + 1;
    r.arc.resize(s * s);
    if (has_sib) r.sib.resize(s * s * s);
    for (auto* vec : {&r.arc, &r.sib}) {
      for (double& v : *vec) {
        if (!(in >> v)) {
          throw std::runtime_error("score file: truncated record #" +
                                   std::to_string(r.id));
        }
      }
    }
    in >> std::ws;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace treecrf
