#pragma once

// Plain-text score files, used for marginal dumps and for externally
// supplied scores. One record per sentence:
//
//   #<id> <n> <has_sib>
//   n+1 lines of n+1 reals       arc values, row = head, column = modifier
//   (n+1)^2 lines of n+1 reals   only if has_sib; row (head*(n+1)+sib),
//                                column = modifier
//
// Ids are 1-based sentence positions. Values are written with %.17g.

#include <iosfwd>
#include <span>
#include <vector>

namespace treecrf {

struct ScoreRecord {
  int id = 0;
  int n = 0;
  std::vector<double> arc;  // (n+1)^2
  std::vector<double> sib;  // (n+1)^3 or empty
};

void write_score_record(std::ostream& out, int id, int n,
                        std::span<const double> arc,
                        std::span<const double> sib = {});
void write_score_record(std::ostream& out, const ScoreRecord& record);

// Throws std::runtime_error on malformed input.
std::vector<ScoreRecord> read_score_file(std::istream& in);

}  // namespace treecrf
