#pragma once

// Named parameter blocks, plain gradient descent, and the textual
// checkpoint format.
//
// Checkpoint layout (all lines '\n' terminated):
//
//   treecrf-checkpoint 1
//   meta <key> <value>            zero or more
//   list <name> <count>           followed by <count> lines, one entry each
//   param <name> <rank> <d1> .. <dk>
//   <values, row-major, whitespace separated, %.17g>
//   end
//
// The first line carries the format version; readers reject any other.

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace treecrf {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kCheckpointVersion = 1;

// A parameter block together with the logical shape written to
// checkpoints. The logical shape may have rank > 2; `value` stores it
// row-major with trailing dimensions flattened into columns.
struct NamedParam {
  std::string name;
  Mat* value;
  std::vector<int> shape;
};

struct SgdOptions {
  double learning_rate = 0.1;
  double momentum = 0.0;
  // Rescale the whole gradient to this L2 norm when it is larger; 0 disables.
  double max_grad_norm = 0.0;
};

// Gradient descent with optional heavy-ball momentum and norm clipping:
//   v <- momentum * v + g;  p <- p - lr * v.
class SgdOptimizer {
 public:
  explicit SgdOptimizer(SgdOptions opts);
  void step(std::span<const NamedParam> params,
            std::span<const NamedParam> grads);

 private:
  SgdOptions opts_;
  std::vector<Mat> velocity_;
};

// Single update without state, p <- p - lr * g.
void sgd_step(std::span<const NamedParam> params,
              std::span<const NamedParam> grads, double learning_rate);

struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::map<std::string, std::vector<std::string>> lists;
  std::map<std::string, std::pair<std::vector<int>, std::vector<double>>> params;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt,
                      std::span<const NamedParam> params);
Checkpoint read_checkpoint(std::istream& in);

// Copies checkpoint values into `params`; throws std::runtime_error on a
// missing name or shape mismatch.
void load_params(const Checkpoint& ckpt, std::span<const NamedParam> params);

}  // namespace treecrf
